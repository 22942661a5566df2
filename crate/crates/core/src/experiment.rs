//! Running the two experiments: error-injection sweeps over the detection
//! circuits, and logical-qubit tomography with syndrome post-selection.
//!
//! Both experiments share the same execution core. A circuit runs from
//! |000> to a final density matrix; the readout wires named by the builder
//! layouts are marginalized into a joint Z distribution over (ancilla, data);
//! expectations and post-selected branches are computed from that
//! distribution. With `shots` present the distribution is replaced by
//! seeded empirical frequencies, which is the only stochastic element in
//! the crate. Sub-seeds derive as seed + point index, so a grid evaluated
//! in one call matches the same points evaluated one by one.

use crate::builders::{
    detection_layout, static_detection, tomography_circuit, tomography_layout, walking_detection,
    DetectionScheme, ErrorSite, MeasurementBasis,
};
use crate::circuit::{Circuit, Topology};
use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::linalg::{Complex64, ComplexMatrix, DensityMatrix, PureState};
use crate::noise::{insert_noise, Insertion, InsertionKind, NoiseModel, NoisyCircuit};
use crate::transpile::transpile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// Branch weights below this are treated as empty: their conditional
/// expectations are reported as zero instead of 0/0.
const WEIGHT_FLOOR: f64 = 1e-12;

/// `count` evenly spaced values covering [start, end] inclusive.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Evolve |0...0> through every gate of a circuit.
pub fn run_circuit(circuit: &Circuit) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::zero_state(circuit.qubits())?;
    for gate in circuit.flat_gates() {
        rho.apply_unitary(&gate.kind.matrix(), &gate.qubits)?;
    }
    Ok(rho)
}

/// Evolve |0...0> through a noisy circuit: each base gate, then any
/// channels inserted after it, in insertion-list order.
pub fn run_noisy_circuit(noisy: &NoisyCircuit) -> Result<DensityMatrix> {
    let gates = noisy.base.gate_count();
    let mut by_position: Vec<Vec<&Insertion>> = vec![Vec::new(); gates];
    for insertion in &noisy.insertions {
        if insertion.position >= gates {
            return Err(Error::InsertionOutOfRange {
                position: insertion.position,
                gates,
            });
        }
        by_position[insertion.position].push(insertion);
    }

    let mut rho = DensityMatrix::zero_state(noisy.base.qubits())?;
    for (i, gate) in noisy.base.flat_gates().enumerate() {
        rho.apply_unitary(&gate.kind.matrix(), &gate.qubits)?;
        for insertion in &by_position[i] {
            match insertion.kind {
                InsertionKind::Cphase { angle } => {
                    rho.apply_unitary(&GateKind::Cphase { angle }.matrix(), &insertion.qubits)?
                }
                InsertionKind::Rxxyy { angle } => {
                    rho.apply_unitary(&GateKind::Rxxyy { angle }.matrix(), &insertion.qubits)?
                }
                InsertionKind::Depolarize { probability } => {
                    rho.depolarize(probability, &insertion.qubits)?
                }
            }
        }
    }
    Ok(rho)
}

/// Transpile a circuit for the 3-qubit chain, attach the model's channels,
/// and run it.
pub fn run_with_noise(circuit: &Circuit, model: &NoiseModel) -> Result<DensityMatrix> {
    let topology = Topology::chain(circuit.qubits())?;
    let native = transpile(circuit, &topology)?;
    run_noisy_circuit(&insert_noise(&native, model, &topology)?)
}

/// Joint Z-basis distribution over two wires, indexed 2*b_first + b_second.
fn joint_distribution(rho: &DensityMatrix, first: usize, second: usize) -> Result<[f64; 4]> {
    debug_assert_ne!(first, second);
    let dist = rho.z_basis_distribution(&[first.min(second), first.max(second)])?;
    let mut out = [0.0; 4];
    for b_first in 0..2 {
        for b_second in 0..2 {
            let sorted_index = if first < second {
                2 * b_first + b_second
            } else {
                2 * b_second + b_first
            };
            out[2 * b_first + b_second] = dist[sorted_index];
        }
    }
    Ok(out)
}

/// One point of an error-injection sweep. `joint_probs[2a + d]` is the
/// probability of reading ancilla bit `a` and faulted-data bit `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub epsilon: f64,
    pub joint_probs: [f64; 4],
    /// Syndrome expectation <Z_A>.
    pub anc_expectation: f64,
    /// Uncorrected logical expectation <Z_L>.
    pub raw_logical: f64,
    /// Parity-corrected expectation <Z_A Z_L>.
    pub corrected_logical: f64,
}

impl DetectionRecord {
    fn from_joint(epsilon: f64, joint_probs: [f64; 4]) -> Self {
        let [p00, p01, p10, p11] = joint_probs;
        DetectionRecord {
            epsilon,
            joint_probs,
            anc_expectation: p00 + p01 - p10 - p11,
            raw_logical: p00 + p10 - p01 - p11,
            corrected_logical: corrected_logical(&joint_probs),
        }
    }
}

/// Parity-corrected logical expectation <Z_A Z_L> = p00 + p11 - p01 - p10.
///
/// An error that is both detected (ancilla 1) and realized (data 1) leaves
/// the parity intact, so [0,0,0,1] scores +1 just like the clean [1,0,0,0].
pub fn corrected_logical(joint_probs: &[f64; 4]) -> f64 {
    joint_probs[0] + joint_probs[3] - joint_probs[1] - joint_probs[2]
}

/// The subtraction form 1 - (p00 + p11). It reports 0 for a perfect run,
/// so it is kept only for comparing against sources that print it; the
/// parity form above is what every pipeline in this crate uses.
pub fn corrected_logical_literal(joint_probs: &[f64; 4]) -> f64 {
    1.0 - (joint_probs[0] + joint_probs[3])
}

/// Sweep the injected error angle over `epsilons` for one detection scheme.
///
/// `noise = None` runs the builder circuit exactly; otherwise the circuit
/// is transpiled and the model's channels applied. `shots = None` reports
/// exact probabilities; otherwise seeded empirical frequencies with
/// sub-seed = seed + grid index.
pub fn run_error_sweep(
    scheme: DetectionScheme,
    epsilons: &[f64],
    noise: Option<&NoiseModel>,
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<DetectionRecord>> {
    if epsilons.is_empty() {
        return Err(Error::BadDataset {
            reason: "empty epsilon grid".into(),
        });
    }
    if shots == Some(0) {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
        });
    }
    let layout = detection_layout(scheme, ErrorSite::CheckedSecond);
    let mut records = Vec::with_capacity(epsilons.len());
    for (i, &epsilon) in epsilons.iter().enumerate() {
        let circuit = match scheme {
            DetectionScheme::Static => static_detection(epsilon)?,
            DetectionScheme::Walking => walking_detection(epsilon)?,
        };
        let rho = match noise {
            None => run_circuit(&circuit)?,
            Some(model) => run_with_noise(&circuit, model)?,
        };
        let mut joint = joint_distribution(&rho, layout.ancilla, layout.errored_data)?;
        if let Some(n) = shots {
            let sampled = sample_shots(&joint, n, seed.wrapping_add(i as u64))?;
            joint = [sampled[0], sampled[1], sampled[2], sampled[3]];
        }
        records.push(DetectionRecord::from_joint(epsilon, joint));
    }
    Ok(records)
}

/// Target logical state alpha|00> + beta|11> with alpha = cos(theta/2) and
/// beta = e^{i phi} sin(theta/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalStateSpec {
    pub theta: f64,
    pub phi: f64,
}

impl LogicalStateSpec {
    /// theta must lie in [0, pi]; phi is folded into [0, 2 pi).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
            });
        }
        Ok(LogicalStateSpec {
            theta,
            phi: phi.rem_euclid(TAU),
        })
    }

    /// The ideal decoded single-qubit state.
    pub fn ideal_state(&self) -> PureState {
        PureState::from_bloch_angles(self.theta, self.phi)
    }

    /// Ideal Pauli expectations (<X>, <Y>, <Z>).
    pub fn ideal_bloch(&self) -> [f64; 3] {
        [
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        ]
    }
}

/// Post-selection branch of a tomography run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// No post-selection.
    All,
    /// Shots with syndrome Z_A = +1.
    SyndromePlus,
    /// Shots with syndrome Z_A = -1.
    SyndromeMinus,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::All => "all",
            Branch::SyndromePlus => "plus",
            Branch::SyndromeMinus => "minus",
        }
    }
}

/// Reconstructed logical state of one branch.
#[derive(Debug, Clone)]
pub struct BranchResult {
    /// (<X_L>, <Y_L>, <Z_L>) conditioned on the branch.
    pub pauli_expectations: [f64; 3],
    /// Linear-inversion state (I + x sx + y sy + z sz)/2.
    pub rho: DensityMatrix,
    /// Overlap of `rho` with the ideal state.
    pub fidelity: f64,
    /// Probability mass of the branch (1 for All).
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub spec: LogicalStateSpec,
    pub all: BranchResult,
    pub syndrome_plus: BranchResult,
    pub syndrome_minus: BranchResult,
    /// Probability of measuring the syndrome -1, i.e. the post-selection
    /// discard fraction. Equals syndrome_minus.weight.
    pub dropout: f64,
}

impl TomographyResult {
    pub fn branch(&self, branch: Branch) -> &BranchResult {
        match branch {
            Branch::All => &self.all,
            Branch::SyndromePlus => &self.syndrome_plus,
            Branch::SyndromeMinus => &self.syndrome_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TomographyOptions {
    /// Clip the reconstructed state to the physical Bloch ball. Off by
    /// default so the reconstruction stays the verbatim inversion formula;
    /// useful for shot-noisy data whose raw inversion can leave the ball.
    pub psd_projection: bool,
}

/// Full three-basis tomography of the decoded logical qubit.
pub fn run_tomography(
    spec: &LogicalStateSpec,
    noise: Option<&NoiseModel>,
    shots: Option<u64>,
    seed: u64,
) -> Result<TomographyResult> {
    run_tomography_with(spec, noise, shots, seed, &TomographyOptions::default())
}

pub fn run_tomography_with(
    spec: &LogicalStateSpec,
    noise: Option<&NoiseModel>,
    shots: Option<u64>,
    seed: u64,
    options: &TomographyOptions,
) -> Result<TomographyResult> {
    LogicalStateSpec::new(spec.theta, spec.phi)?;
    if shots == Some(0) {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
        });
    }

    let bases = [MeasurementBasis::X, MeasurementBasis::Y, MeasurementBasis::Z];
    let mut all = [0.0; 3];
    let mut plus = [0.0; 3];
    let mut minus = [0.0; 3];
    let mut weight_plus = 0.0;
    let mut weight_minus = 0.0;

    for (i, &basis) in bases.iter().enumerate() {
        let joint = measure_basis(spec, basis, noise)?;
        let joint = match shots {
            None => joint,
            Some(n) => {
                let sampled = sample_shots(&joint, n, seed.wrapping_add(i as u64))?;
                [sampled[0], sampled[1], sampled[2], sampled[3]]
            }
        };
        let [p00, p01, p10, p11] = joint;
        let w_plus = p00 + p01;
        let w_minus = p10 + p11;
        all[i] = p00 + p10 - p01 - p11;
        plus[i] = if w_plus > WEIGHT_FLOOR {
            (p00 - p01) / w_plus
        } else {
            0.0
        };
        minus[i] = if w_minus > WEIGHT_FLOOR {
            (p10 - p11) / w_minus
        } else {
            0.0
        };
        // The syndrome marginal is basis-independent in exact arithmetic;
        // averaging over bases de-noises the sampled case.
        weight_plus += w_plus / 3.0;
        weight_minus += w_minus / 3.0;
    }

    let ideal = spec.ideal_state();
    let build = |expectations: [f64; 3], weight: f64| -> Result<BranchResult> {
        let v = if options.psd_projection {
            project_to_bloch_ball(expectations)
        } else {
            expectations
        };
        let rho = bloch_state(v)?;
        let fidelity = rho.pure_state_fidelity(&ideal)?;
        Ok(BranchResult {
            pauli_expectations: v,
            rho,
            fidelity,
            weight,
        })
    };

    Ok(TomographyResult {
        spec: *spec,
        all: build(all, 1.0)?,
        syndrome_plus: build(plus, weight_plus)?,
        syndrome_minus: build(minus, weight_minus)?,
        dropout: weight_minus,
    })
}

/// Exact unconditional logical expectation in one basis: the forward model
/// the parameter fit evaluates at every grid point.
pub fn logical_pauli_expectation(
    spec: &LogicalStateSpec,
    basis: MeasurementBasis,
    noise: Option<&NoiseModel>,
) -> Result<f64> {
    let [p00, p01, p10, p11] = measure_basis(spec, basis, noise)?;
    Ok(p00 + p10 - p01 - p11)
}

/// Joint (ancilla, logical) distribution after one basis circuit.
pub fn measure_basis(
    spec: &LogicalStateSpec,
    basis: MeasurementBasis,
    noise: Option<&NoiseModel>,
) -> Result<[f64; 4]> {
    let circuit = tomography_circuit(spec.theta, spec.phi, basis)?;
    let rho = match noise {
        None => run_circuit(&circuit)?,
        Some(model) => run_with_noise(&circuit, model)?,
    };
    let layout = tomography_layout();
    joint_distribution(&rho, layout.ancilla, layout.logical)
}

/// (I + x sx + y sy + z sz)/2 as a density matrix. The Bloch vector is not
/// required to lie inside the ball, matching raw linear inversion.
fn bloch_state(v: [f64; 3]) -> Result<DensityMatrix> {
    let [x, y, z] = v;
    let m = ComplexMatrix::from_rows(&[
        vec![
            Complex64::new((1.0 + z) / 2.0, 0.0),
            Complex64::new(x / 2.0, -y / 2.0),
        ],
        vec![
            Complex64::new(x / 2.0, y / 2.0),
            Complex64::new((1.0 - z) / 2.0, 0.0),
        ],
    ]);
    DensityMatrix::from_matrix(m)
}

/// Shrink a Bloch vector onto the unit ball if inversion pushed it outside.
/// For a single qubit this is exactly eigenvalue clipping plus trace
/// renormalization.
fn project_to_bloch_ball(v: [f64; 3]) -> [f64; 3] {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm <= 1.0 {
        v
    } else {
        [v[0] / norm, v[1] / norm, v[2] / norm]
    }
}

/// Empirical frequencies of `shots` draws from a distribution. Deterministic
/// for a fixed seed.
pub fn sample_shots(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
        });
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !p.is_finite() || *p < -1e-9) {
        return Err(Error::BadDistribution {
            reason: "negative or non-finite probability".into(),
        });
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::BadDistribution {
            reason: format!("probabilities sum to {total}, expected 1"),
        });
    }

    let cumulative: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p.max(0.0) / total;
            Some(*acc)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let r: f64 = rng.random();
        let idx = cumulative
            .iter()
            .position(|&c| r < c)
            .unwrap_or(probs.len() - 1);
        counts[idx] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / shots as f64).collect())
}

/// Per-qubit readout assignment probabilities: `m[prepared][assigned]`,
/// rows summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMatrix {
    m: [[f64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        for row in &m {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::BadDistribution {
                    reason: "confusion entries must be probabilities".into(),
                });
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::BadDistribution {
                    reason: "confusion rows must sum to 1".into(),
                });
            }
        }
        Ok(ConfusionMatrix { m })
    }

    /// Equal assignment fidelity for both prepared states.
    pub fn symmetric(fidelity: f64) -> Result<Self> {
        ConfusionMatrix::new([[fidelity, 1.0 - fidelity], [1.0 - fidelity, fidelity]])
    }

    pub fn identity() -> Self {
        ConfusionMatrix {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn entries(&self) -> &[[f64; 2]; 2] {
        &self.m
    }

    fn inverse(&self, qubit: usize) -> Result<[[f64; 2]; 2]> {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        if det.abs() < 1e-12 {
            return Err(Error::SingularConfusion { qubit });
        }
        Ok([[d / det, -b / det], [-c / det, a / det]])
    }
}

/// Push a true distribution through per-qubit readout confusion, producing
/// the distribution a noisy readout would report. Qubit k of the list maps
/// to bit k counted from the most significant end of the outcome index.
pub fn apply_confusion(probs: &[f64], confusion: &[ConfusionMatrix]) -> Result<Vec<f64>> {
    let matrices: Vec<[[f64; 2]; 2]> = confusion.iter().map(|c| c.m).collect();
    transform_per_qubit(probs, &matrices)
}

/// Invert per-qubit readout confusion on a measured distribution: apply the
/// tensor-product inverse, clip negatives, renormalize.
pub fn spam_correct(probs: &[f64], confusion: &[ConfusionMatrix]) -> Result<Vec<f64>> {
    let inverses: Vec<[[f64; 2]; 2]> = confusion
        .iter()
        .enumerate()
        .map(|(q, c)| c.inverse(q))
        .collect::<Result<_>>()?;
    let mut out = transform_per_qubit(probs, &inverses)?;
    for p in &mut out {
        *p = p.max(0.0);
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(Error::BadDistribution {
            reason: "correction removed all probability mass".into(),
        });
    }
    for p in &mut out {
        *p /= total;
    }
    Ok(out)
}

/// Apply one 2x2 matrix per qubit along the corresponding bit axis of a
/// 2^k-outcome distribution: out[j] = sum_i prod_q M_q[i_q][j_q] in[i],
/// evaluated one axis at a time.
fn transform_per_qubit(probs: &[f64], matrices: &[[[f64; 2]; 2]]) -> Result<Vec<f64>> {
    let k = matrices.len();
    if probs.len() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            actual: probs.len(),
        });
    }
    let mut current = probs.to_vec();
    for (q, m) in matrices.iter().enumerate() {
        let shift = k - 1 - q;
        let mut next = vec![0.0; current.len()];
        for (i, &p) in current.iter().enumerate() {
            let bit = (i >> shift) & 1;
            next[i & !(1 << shift)] += m[bit][0] * p;
            next[i | (1 << shift)] += m[bit][1] * p;
        }
        current = next;
    }
    Ok(current)
}
