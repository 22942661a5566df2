//! Dense complex linear algebra for small qubit registers.
//!
//! Everything here is sized for density-matrix simulation of at most four
//! qubits, so matrices are stored as plain row-major `Vec<Complex64>` and the
//! algorithms favour clarity over asymptotics.
//!
//! Bit convention used across the crate: **qubit 0 is the most significant
//! bit** of a computational-basis index. For a two-qubit register the basis
//! order is |00>, |01>, |10>, |11> with the first bit belonging to qubit 0,
//! and a gate on qubit 0 embeds as `U (x) I`.

use crate::error::{Error, Result};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

pub type Complex64 = num_complex::Complex<f64>;

/// Largest register size handled by the dense routines.
pub const MAX_QUBITS: usize = 4;

/// Numerical tolerance for unitarity / completeness checks.
pub const CHECK_TOL: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Vec<Complex64>,
    rows: usize,
    cols: usize,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
            rows,
            cols,
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from nested rows. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows in matrix literal");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, v) in entries.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    /// Sum of diagonal entries. Panics on non-square matrices.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Multiply every entry by a scalar.
    pub fn scale(&self, factor: Complex64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= factor;
        }
        m
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows, "shape mismatch");
        assert_eq!(self.cols, other.cols, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) < tol
    }

    /// True when `U^dag U = I` within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let product = &self.adjoint() * self;
        product.max_abs_diff(&Self::identity(self.rows)) < tol
    }

    /// True when the matrix equals its own conjugate transpose within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Kronecker product, `self (x) other`. The left factor supplies the
    /// high-order bits of the result index, matching the qubit-0-first
    /// register convention.
    pub fn kron(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        m
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r1, &r2| {
                    a.get(r1, col)
                        .norm()
                        .partial_cmp(&a.get(r2, col).norm())
                        .unwrap()
                })
                .unwrap();
            if a.get(pivot, col).norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(pivot, j));
                    a.set(pivot, j, tmp);
                }
                det = -det;
            }
            let d = a.get(col, col);
            det *= d;
            for row in col + 1..n {
                let factor = a.get(row, col) / d;
                for j in col..n {
                    let v = a.get(row, j) - factor * a.get(col, j);
                    a.set(row, j, v);
                }
            }
        }
        det
    }

    /// Eigenvalues of a Hermitian matrix via cyclic complex Jacobi rotations,
    /// returned in ascending order. The input is assumed Hermitian; feed it
    /// anything else and the result is meaningless.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square(), "eigenvalues of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let scale = self.max_abs().max(1.0);
        let tol = 1e-14 * scale;

        for _ in 0..200 {
            let mut largest = 0.0;
            let mut p = 0;
            let mut q = 1;
            for i in 0..n {
                for j in i + 1..n {
                    let mag = a.get(i, j).norm();
                    if mag > largest {
                        largest = mag;
                        p = i;
                        q = j;
                    }
                }
            }
            if largest < tol || n < 2 {
                break;
            }

            let app = a.get(p, p).re;
            let aqq = a.get(q, q).re;
            let apq = a.get(p, q);
            let r = apq.norm();
            let phase = Complex64::from_polar(1.0, apq.arg());
            let t = 0.5 * (2.0 * r).atan2(app - aqq);
            let (s, c) = t.sin_cos();

            for i in 0..n {
                if i == p || i == q {
                    continue;
                }
                let aip = a.get(i, p);
                let aiq = a.get(i, q);
                let new_ip = aip * c + aiq * phase.conj() * s;
                let new_iq = -aip * phase * s + aiq * c;
                a.set(i, p, new_ip);
                a.set(p, i, new_ip.conj());
                a.set(i, q, new_iq);
                a.set(q, i, new_iq.conj());
            }
            let new_pp = app * c * c + aqq * s * s + 2.0 * r * s * c;
            let new_qq = app * s * s + aqq * c * c - 2.0 * r * s * c;
            a.set(p, p, Complex64::new(new_pp, 0.0));
            a.set(q, q, Complex64::new(new_qq, 0.0));
            a.set(p, q, Complex64::new(0.0, 0.0));
            a.set(q, p, Complex64::new(0.0, 0.0));
        }

        let mut eigs: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows, "shape mismatch");
        assert_eq!(self.cols, rhs.cols, "shape mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, rhs.rows, "shape mismatch");
        assert_eq!(self.cols, rhs.cols, "shape mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }
}

/// Embed a `2^k x 2^k` operator acting on the listed targets into the full
/// `2^n x 2^n` register space. `targets[0]` supplies the most significant bit
/// of the small operator's index.
pub fn embed(op: &ComplexMatrix, targets: &[usize], qubits: usize) -> Result<ComplexMatrix> {
    validate_targets(targets, qubits)?;
    let k = targets.len();
    let sub_dim = 1usize << k;
    if op.rows() != sub_dim || op.cols() != sub_dim {
        return Err(Error::DimensionMismatch {
            expected: sub_dim,
            actual: op.rows(),
        });
    }
    let dim = 1usize << qubits;
    // Bit position (from the least significant end) of each target under the
    // qubit-0-is-MSB convention.
    let shifts: Vec<usize> = targets.iter().map(|&t| qubits - 1 - t).collect();
    let rest_mask: usize = {
        let mut mask = dim - 1;
        for &s in &shifts {
            mask &= !(1 << s);
        }
        mask
    };

    let mut full = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            if (row & rest_mask) != (col & rest_mask) {
                continue;
            }
            let mut sub_row = 0usize;
            let mut sub_col = 0usize;
            for (bit, &s) in shifts.iter().enumerate() {
                let weight = 1 << (k - 1 - bit);
                if row >> s & 1 == 1 {
                    sub_row |= weight;
                }
                if col >> s & 1 == 1 {
                    sub_col |= weight;
                }
            }
            full.set(row, col, op.get(sub_row, sub_col));
        }
    }
    Ok(full)
}

fn validate_targets(targets: &[usize], qubits: usize) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= qubits {
            return Err(Error::QubitOutOfRange { qubit: t, qubits });
        }
        if targets[i + 1..].contains(&t) {
            return Err(Error::DuplicateQubit { qubit: t });
        }
    }
    Ok(())
}

/// Pure state of a small register, stored as a dense amplitude vector.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

impl PureState {
    /// Computational basis state |index> on `qubits` qubits.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits,
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange {
                qubit: index,
                qubits: dim,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { amplitudes, qubits })
    }

    /// All-zeros state |0...0>.
    pub fn zero(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    /// Build from raw amplitudes; the vector length must be a power of two
    /// and the norm must be 1 within 1e-6.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim == 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: dim,
            });
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits,
                max: MAX_QUBITS,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter {
                name: "state norm",
                value: norm,
            });
        }
        Ok(PureState { amplitudes, qubits })
    }

    /// Single-qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        let amplitudes = vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ];
        PureState {
            amplitudes,
            qubits: 1,
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "state dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => ComplexMatrix::from_rows(&[vec![o, l], vec![l, o]]),
            Pauli::Y => ComplexMatrix::from_rows(&[vec![o, -i], vec![i, o]]),
            Pauli::Z => ComplexMatrix::from_rows(&[vec![l, o], vec![o, -l]]),
        }
    }
}

/// Tensor product of single-qubit Paulis, e.g. "ZIZ". The first character
/// acts on qubit 0 (the most significant bit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        assert!(!ops.is_empty(), "empty Pauli string");
        PauliString { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    /// Dense matrix of the full tensor product.
    pub fn matrix(&self) -> ComplexMatrix {
        let mut m = self.ops[0].matrix();
        for op in &self.ops[1..] {
            m = m.kron(&op.matrix());
        }
        m
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let ops = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidParameter {
                    name: "pauli label",
                    value: c as u32 as f64,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { ops })
    }
}

/// Density matrix of a register of up to [`MAX_QUBITS`] qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    qubits: usize,
}

impl DensityMatrix {
    /// |0...0><0...0| on `qubits` qubits.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        Self::from_pure(&PureState::zero(qubits)?)
    }

    /// Projector onto a pure state.
    pub fn from_pure(state: &PureState) -> Result<Self> {
        let dim = state.dim();
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                matrix.set(i, j, state.amplitude(i) * state.amplitude(j).conj());
            }
        }
        Ok(DensityMatrix {
            matrix,
            qubits: state.qubits(),
        })
    }

    /// Wrap an existing matrix. Only the shape is checked here; call
    /// [`DensityMatrix::validate`] to verify trace, Hermiticity and
    /// positivity.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let dim = matrix.rows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: dim,
            });
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(DensityMatrix { matrix, qubits })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits,
                max: MAX_QUBITS,
            });
        }
        let dim = 1usize << qubits;
        let m = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Ok(DensityMatrix { matrix: m, qubits })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Conjugate by a unitary acting on the listed targets: rho -> U rho U^dag.
    ///
    /// `u` is the small `2^k x 2^k` gate matrix; `targets[0]` carries its most
    /// significant bit. The unitarity of `u` is checked to [`CHECK_TOL`].
    pub fn apply_unitary(&mut self, u: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        if !u.is_unitary(CHECK_TOL) {
            let dev = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
            return Err(Error::NotUnitary { deviation: dev });
        }
        let full = embed(u, targets, self.qubits)?;
        self.matrix = &(&full * &self.matrix) * &full.adjoint();
        Ok(())
    }

    /// Apply a Kraus channel: rho -> sum_k K_k rho K_k^dag. The set must
    /// satisfy the completeness relation sum_k K_k^dag K_k = I within
    /// [`CHECK_TOL`].
    pub fn apply_kraus(&mut self, kraus: &[ComplexMatrix], targets: &[usize]) -> Result<()> {
        if kraus.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let sub_dim = 1usize << targets.len();
        let mut completeness = ComplexMatrix::zeros(sub_dim, sub_dim);
        for k in kraus {
            if k.rows() != sub_dim || k.cols() != sub_dim {
                return Err(Error::DimensionMismatch {
                    expected: sub_dim,
                    actual: k.rows(),
                });
            }
            completeness = &completeness + &(&k.adjoint() * k);
        }
        let deviation = completeness.max_abs_diff(&ComplexMatrix::identity(sub_dim));
        if deviation > CHECK_TOL {
            return Err(Error::KrausIncomplete { deviation });
        }

        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for k in kraus {
            let full = embed(k, targets, self.qubits)?;
            out = &out + &(&(&full * &self.matrix) * &full.adjoint());
        }
        self.matrix = out;
        Ok(())
    }

    /// Depolarize the listed targets: rho -> (1-p) rho + p * (I/d (x) tr_T rho)
    /// where d = 2^|targets|. Algebraically identical to applying the uniform
    /// Pauli Kraus set for the same `p`, but evaluated directly.
    pub fn depolarize(&mut self, p: f64, targets: &[usize]) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter {
                name: "depolarization probability",
                value: p,
            });
        }
        validate_targets(targets, self.qubits)?;
        if p == 0.0 {
            return Ok(());
        }

        let dim = self.dim();
        let sub_dim = 1usize << targets.len();
        let shifts: Vec<usize> = targets.iter().map(|&t| self.qubits - 1 - t).collect();
        let rest_mask: usize = {
            let mut mask = dim - 1;
            for &s in &shifts {
                mask &= !(1 << s);
            }
            mask
        };

        let mut out = self.matrix.scale(Complex64::new(1.0 - p, 0.0));
        let weight = p / sub_dim as f64;
        // Accumulate p/d * (I on targets) (x) (partial trace over targets):
        // entry (r, c) with identical target bits picks up the trace of the
        // target block for the fixed non-target bits.
        for row in 0..dim {
            for col in 0..dim {
                if (row & !rest_mask) != (col & !rest_mask) {
                    continue;
                }
                let mut traced = Complex64::new(0.0, 0.0);
                for sub in 0..sub_dim {
                    let mut r = row & rest_mask;
                    let mut c = col & rest_mask;
                    for (bit, &s) in shifts.iter().enumerate() {
                        if sub >> (targets.len() - 1 - bit) & 1 == 1 {
                            r |= 1 << s;
                            c |= 1 << s;
                        }
                    }
                    traced += self.matrix.get(r, c);
                }
                let v = out.get(row, col) + Complex64::new(weight, 0.0) * traced;
                out.set(row, col, v);
            }
        }
        self.matrix = out;
        Ok(())
    }

    /// Reduced density matrix over the kept qubits. The kept qubits retain
    /// their relative order (ascending qubit index = most significant bit
    /// first) regardless of the order they are listed in.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        validate_targets(keep, self.qubits)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        if kept.len() == self.qubits {
            return Ok(self.clone());
        }

        let traced: Vec<usize> = (0..self.qubits).filter(|q| !kept.contains(q)).collect();
        let kept_shifts: Vec<usize> = kept.iter().map(|&q| self.qubits - 1 - q).collect();
        let traced_shifts: Vec<usize> = traced.iter().map(|&q| self.qubits - 1 - q).collect();

        let out_dim = 1usize << kept.len();
        let env_dim = 1usize << traced.len();
        let mut out = ComplexMatrix::zeros(out_dim, out_dim);
        for r in 0..out_dim {
            for c in 0..out_dim {
                let mut sum = Complex64::new(0.0, 0.0);
                for env in 0..env_dim {
                    let mut row = 0usize;
                    let mut col = 0usize;
                    for (bit, &s) in kept_shifts.iter().enumerate() {
                        if r >> (kept.len() - 1 - bit) & 1 == 1 {
                            row |= 1 << s;
                        }
                        if c >> (kept.len() - 1 - bit) & 1 == 1 {
                            col |= 1 << s;
                        }
                    }
                    for (bit, &s) in traced_shifts.iter().enumerate() {
                        if env >> (traced.len() - 1 - bit) & 1 == 1 {
                            row |= 1 << s;
                            col |= 1 << s;
                        }
                    }
                    sum += self.matrix.get(row, col);
                }
                out.set(r, c, sum);
            }
        }
        Ok(DensityMatrix {
            matrix: out,
            qubits: kept.len(),
        })
    }

    /// Z-basis outcome distribution over the listed qubits.
    ///
    /// The returned vector has `2^k` entries indexed by the measured
    /// bitstring with the **lowest-indexed target as the leftmost (most
    /// significant) bit**, independent of the order `targets` is given in.
    /// Rounding noise below zero is clamped to exactly zero.
    pub fn z_basis_distribution(&self, targets: &[usize]) -> Result<Vec<f64>> {
        let reduced = self.partial_trace(targets)?;
        let dim = reduced.dim();
        Ok((0..dim)
            .map(|i| reduced.matrix.get(i, i).re.max(0.0))
            .collect())
    }

    /// Expectation value Tr(rho P) of a Pauli string covering the whole
    /// register. The result must be real; a non-negligible imaginary part
    /// means the state was corrupted and is reported as an error.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                actual: pauli.len(),
            });
        }
        let p = pauli.matrix();
        let mut value = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                value += self.matrix.get(i, j) * p.get(j, i);
            }
        }
        if value.im.abs() > 1e-10 {
            return Err(Error::NotReal {
                imaginary: value.im,
            });
        }
        Ok(value.re)
    }

    /// Fidelity <psi|rho|psi> against a pure target state.
    pub fn pure_state_fidelity(&self, target: &PureState) -> Result<f64> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: target.dim(),
            });
        }
        let mut value = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                value += target.amplitude(i).conj() * self.matrix.get(i, j) * target.amplitude(j);
            }
        }
        if value.im.abs() > 1e-10 {
            return Err(Error::NotReal {
                imaginary: value.im,
            });
        }
        Ok(value.re)
    }

    /// Check the physicality of the state: unit trace, Hermiticity, and all
    /// eigenvalues above `-tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidParameter {
                name: "trace",
                value: tr.re,
            });
        }
        if !self.matrix.is_hermitian(tol) {
            return Err(Error::NotReal { imaginary: tol });
        }
        let eigs = self.matrix.hermitian_eigenvalues();
        if let Some(&min) = eigs.first() {
            if min < -tol {
                return Err(Error::InvalidParameter {
                    name: "minimum eigenvalue",
                    value: min,
                });
            }
        }
        Ok(())
    }
}
