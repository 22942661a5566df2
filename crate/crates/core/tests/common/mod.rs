//! A from-scratch statevector simulator used to cross-check the density
//! matrix engine. It shares only the circuit IR with the crate under test;
//! gate matrices, qubit embedding, and measurement marginals are all
//! re-derived here so an error in the library's linear algebra cannot
//! silently certify itself.

#![allow(dead_code)]

use num_complex::Complex64;
use qdet_core::circuit::Circuit;
use qdet_core::gates::GateKind;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single(kind: &GateKind) -> Option<Vec<Vec<Complex64>>> {
    let m = match *kind {
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]
        }
        GateKind::X => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Rx { angle } => {
            let (s, co) = (angle / 2.0).sin_cos();
            vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
        }
        GateKind::Rz { angle } => {
            let half = angle / 2.0;
            vec![
                vec![Complex64::from_polar(1.0, -half), c(0.0, 0.0)],
                vec![c(0.0, 0.0), Complex64::from_polar(1.0, half)],
            ]
        }
        _ => return None,
    };
    Some(m)
}

fn pair(kind: &GateKind) -> Option<Vec<Vec<Complex64>>> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let mut m = vec![vec![zero; 4]; 4];
    match *kind {
        GateKind::Cz => {
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = one;
            }
            m[3][3] = c(-1.0, 0.0);
        }
        GateKind::Cnot => {
            m[0][0] = one;
            m[1][1] = one;
            m[2][3] = one;
            m[3][2] = one;
        }
        GateKind::Swap => {
            m[0][0] = one;
            m[1][2] = one;
            m[2][1] = one;
            m[3][3] = one;
        }
        GateKind::Iswap => {
            m[0][0] = one;
            m[1][2] = c(0.0, 1.0);
            m[2][1] = c(0.0, 1.0);
            m[3][3] = one;
        }
        GateKind::Cphase { angle } => {
            for (i, row) in m.iter_mut().take(3).enumerate() {
                row[i] = one;
            }
            m[3][3] = Complex64::from_polar(1.0, angle);
        }
        GateKind::Rxxyy { angle } => {
            let (s, co) = (angle / 2.0).sin_cos();
            m[0][0] = one;
            m[3][3] = one;
            m[1][1] = c(co, 0.0);
            m[2][2] = c(co, 0.0);
            m[1][2] = c(0.0, -s);
            m[2][1] = c(0.0, -s);
        }
        _ => return None,
    }
    Some(m)
}

/// Statevector over `n` qubits with qubit 0 as the most significant bit of
/// the basis index.
pub struct Oracle {
    pub amps: Vec<Complex64>,
    n: usize,
}

impl Oracle {
    pub fn new(n: usize) -> Self {
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        Oracle { amps, n }
    }

    pub fn run(circuit: &Circuit) -> Self {
        let mut state = Oracle::new(circuit.qubits());
        for gate in circuit.flat_gates() {
            state.apply(&gate.kind, &gate.qubits);
        }
        state
    }

    pub fn apply(&mut self, kind: &GateKind, qubits: &[usize]) {
        let u = single(kind)
            .or_else(|| pair(kind))
            .unwrap_or_else(|| panic!("unknown gate {}", kind.name()));
        self.apply_matrix(&u, qubits);
    }

    fn apply_matrix(&mut self, u: &[Vec<Complex64>], qubits: &[usize]) {
        let k = qubits.len();
        let dim = 1usize << k;
        assert_eq!(u.len(), dim);
        let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (self.n - 1 - q)).collect();
        let cleared: usize = !masks.iter().fold(0, |acc, &m| acc | m);

        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut row = 0;
            for (j, &mask) in masks.iter().enumerate() {
                if i & mask != 0 {
                    row |= 1 << (k - 1 - j);
                }
            }
            let base = i & cleared;
            let mut acc = c(0.0, 0.0);
            for (col, &entry) in u[row].iter().enumerate() {
                let mut src = base;
                for (j, &mask) in masks.iter().enumerate() {
                    if col & (1 << (k - 1 - j)) != 0 {
                        src |= mask;
                    }
                }
                acc += entry * self.amps[src];
            }
            *slot = acc;
        }
        self.amps = out;
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Joint distribution over the bits of two wires, indexed `2a + b`.
    pub fn pair_marginal(&self, wire_a: usize, wire_b: usize) -> [f64; 4] {
        let mut joint = [0.0; 4];
        for (i, p) in self.probabilities().iter().enumerate() {
            let a = (i >> (self.n - 1 - wire_a)) & 1;
            let b = (i >> (self.n - 1 - wire_b)) & 1;
            joint[2 * a + b] += p;
        }
        joint
    }

    /// Z expectation of one wire.
    pub fn z_expectation(&self, wire: usize) -> f64 {
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(i, p)| if (i >> (self.n - 1 - wire)) & 1 == 0 { *p } else { -*p })
            .sum()
    }
}
