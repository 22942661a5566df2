//! Unitary-level verification tools: full circuit unitaries, equality up to
//! global phase, and the two-qubit local invariants used to certify gate
//! identities that single-qubit dressing cannot hide.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{embed, Complex64, ComplexMatrix};

/// Local invariants (g1, g2) of a two-qubit unitary. Two gates can be mapped
/// into each other by single-qubit rotations if and only if their invariants
/// match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MakhlinInvariants {
    pub g1: Complex64,
    pub g2: f64,
}

impl MakhlinInvariants {
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.g1 - other.g1).norm() < tol && (self.g2 - other.g2).abs() < tol
    }
}

/// Outcome of comparing two operators up to a global phase.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Largest entry deviation after the optimal phase is applied.
    pub max_entry_deviation: f64,
    /// The unit-modulus phase lambda minimizing ||u - lambda v||.
    pub global_phase: Complex64,
    /// Local invariants of both operands, present when both are 4x4
    /// unitaries.
    pub makhlin: Option<(MakhlinInvariants, MakhlinInvariants)>,
}

/// Full register unitary of a circuit, moments applied in order (the first
/// moment acts first). Fails on registers above the dense-simulation cap.
pub fn circuit_unitary(circuit: &Circuit) -> Result<ComplexMatrix> {
    let n = circuit.qubits();
    let dim = 1usize << n;
    let mut u = ComplexMatrix::identity(dim);
    for gate in circuit.flat_gates() {
        let full = embed(&gate.kind.matrix(), &gate.qubits, n)?;
        u = &full * &u;
    }
    Ok(u)
}

/// Compare two equally-shaped operators up to a global phase.
///
/// The candidate phase is read off the largest-magnitude entry of `v`; the
/// verdict is `true` when `max|u - lambda v| < tol`. For a pair of two-qubit
/// unitaries the report also carries both sets of local invariants.
pub fn equivalent_up_to_global_phase(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<EquivalenceReport> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch {
            expected: u.rows(),
            actual: v.rows(),
        });
    }

    let mut anchor = (0usize, 0usize);
    let mut largest = 0.0;
    for i in 0..v.rows() {
        for j in 0..v.cols() {
            let mag = v.get(i, j).norm();
            if mag > largest {
                largest = mag;
                anchor = (i, j);
            }
        }
    }

    let phase = if largest == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        let ratio = u.get(anchor.0, anchor.1) / v.get(anchor.0, anchor.1);
        if ratio.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            ratio / ratio.norm()
        }
    };

    let max_entry_deviation = u.max_abs_diff(&v.scale(phase));

    let makhlin = if u.rows() == 4 && u.is_unitary(1e-8) && v.is_unitary(1e-8) {
        Some((makhlin_invariants(u)?, makhlin_invariants(v)?))
    } else {
        None
    };

    Ok(EquivalenceReport {
        equivalent: max_entry_deviation < tol,
        max_entry_deviation,
        global_phase: phase,
        makhlin,
    })
}

/// Local invariants of a 4x4 unitary, computed in the magic (Bell) basis:
/// with m = (Q^dag U Q)^T (Q^dag U Q),
/// g1 = tr(m)^2 / (16 det U) and g2 = (tr(m)^2 - tr(m^2)) / (4 det U).
pub fn makhlin_invariants(u: &ComplexMatrix) -> Result<MakhlinInvariants> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: u.rows(),
        });
    }
    if !u.is_unitary(1e-8) {
        let dev = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(4));
        return Err(Error::NotUnitary { deviation: dev });
    }

    let q = magic_basis();
    let ub = &(&q.adjoint() * u) * &q;
    let m = &transpose(&ub) * &ub;
    let tr = m.trace();
    let tr_m2 = (&m * &m).trace();
    let det = u.determinant();

    let g1 = tr * tr / (det * Complex64::new(16.0, 0.0));
    let g2c = (tr * tr - tr_m2) / (det * Complex64::new(4.0, 0.0));
    Ok(MakhlinInvariants { g1, g2: g2c.re })
}

fn transpose(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.cols(), m.rows());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(j, i, m.get(i, j));
        }
    }
    out
}

fn magic_basis() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let o = Complex64::new(0.0, 0.0);
    let r = Complex64::new(s, 0.0);
    let i = Complex64::new(0.0, s);
    ComplexMatrix::from_rows(&[
        vec![r, o, o, i],
        vec![o, i, r, o],
        vec![o, i, -r, o],
        vec![r, o, o, -i],
    ])
}
