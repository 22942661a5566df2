//! Gate catalogue: the textbook gates circuits are written in, plus the
//! device-native subset they are transpiled to.
//!
//! The native set of the simulated device is exactly RX(pi/2), RZ(any angle)
//! and CZ. RZ is implemented on hardware as a frame update, which is why the
//! transpiler treats it as free when computing depth. Matrix conventions:
//! RX(a) = exp(-i a X / 2), RZ(a) = exp(-i a Z / 2), and for two-qubit gates
//! the first listed qubit carries the most significant bit.

use crate::linalg::{Complex64, ComplexMatrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

/// Tolerance used when deciding whether an RX angle is the native pi/2.
pub const NATIVE_ANGLE_TOL: f64 = 1e-12;

/// Every gate the circuit layer understands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx { angle: f64 },
    Rz { angle: f64 },
    H,
    X,
    Cz,
    Cnot,
    Swap,
    Iswap,
    Cphase { angle: f64 },
    Rxxyy { angle: f64 },
}

impl GateKind {
    /// Number of qubits the gate acts on.
    pub fn qubit_count(&self) -> usize {
        match self {
            GateKind::Rx { .. } | GateKind::Rz { .. } | GateKind::H | GateKind::X => 1,
            _ => 2,
        }
    }

    /// Rotation angle for parameterized gates.
    pub fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Rx { angle }
            | GateKind::Rz { angle }
            | GateKind::Cphase { angle }
            | GateKind::Rxxyy { angle } => Some(*angle),
            _ => None,
        }
    }

    /// Upper-case name matching the serialized form.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rx { .. } => "RX",
            GateKind::Rz { .. } => "RZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Cz => "CZ",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::Iswap => "ISWAP",
            GateKind::Cphase { .. } => "CPHASE",
            GateKind::Rxxyy { .. } => "RXXYY",
        }
    }

    /// True exactly for the gates the device plays directly: RX(pi/2), RZ of
    /// any angle, and CZ.
    pub fn is_native(&self) -> bool {
        match self {
            GateKind::Rz { .. } => true,
            GateKind::Cz => true,
            GateKind::Rx { angle } => (angle - FRAC_PI_2).abs() < NATIVE_ANGLE_TOL,
            _ => false,
        }
    }

    /// Dense unitary matrix of the gate.
    pub fn matrix(&self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        match *self {
            GateKind::Rx { angle } => {
                let c = Complex64::new((angle / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(angle / 2.0).sin());
                ComplexMatrix::from_rows(&[vec![c, s], vec![s, c]])
            }
            GateKind::Rz { angle } => ComplexMatrix::diagonal(&[
                Complex64::from_polar(1.0, -angle / 2.0),
                Complex64::from_polar(1.0, angle / 2.0),
            ]),
            GateKind::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]])
            }
            GateKind::X => ComplexMatrix::from_rows(&[vec![o, l], vec![l, o]]),
            GateKind::Cz => ComplexMatrix::diagonal(&[l, l, l, -l]),
            GateKind::Cnot => ComplexMatrix::from_rows(&[
                vec![l, o, o, o],
                vec![o, l, o, o],
                vec![o, o, o, l],
                vec![o, o, l, o],
            ]),
            GateKind::Swap => ComplexMatrix::from_rows(&[
                vec![l, o, o, o],
                vec![o, o, l, o],
                vec![o, l, o, o],
                vec![o, o, o, l],
            ]),
            GateKind::Iswap => {
                let i = Complex64::new(0.0, 1.0);
                ComplexMatrix::from_rows(&[
                    vec![l, o, o, o],
                    vec![o, o, i, o],
                    vec![o, i, o, o],
                    vec![o, o, o, l],
                ])
            }
            GateKind::Cphase { angle } => {
                ComplexMatrix::diagonal(&[l, l, l, Complex64::from_polar(1.0, angle)])
            }
            GateKind::Rxxyy { angle } => {
                let c = Complex64::new((angle / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(angle / 2.0).sin());
                ComplexMatrix::from_rows(&[
                    vec![l, o, o, o],
                    vec![o, c, s, o],
                    vec![o, s, c, o],
                    vec![o, o, o, l],
                ])
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.angle() {
            Some(a) => write!(f, "{}({:.6})", self.name(), a),
            None => write!(f, "{}", self.name()),
        }
    }
}
