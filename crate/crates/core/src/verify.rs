//! Equivalence self-checks behind the command line's `verify` subcommand.
//!
//! Each check rewrites or compares circuits whose correctness the rest of
//! the crate depends on: transpile soundness for the builder circuits and a
//! batch of random ones, the CZ budget of the two detection schemes, the
//! exact wire-permutation identity relating them, and the local equivalence
//! of the fused CNOT-SWAP block with ISWAP. A deliberate fault hook
//! corrupts one rewrite so the negative path of the reporting pipeline can
//! be exercised end to end.

use crate::builders::{static_detection, tomography_circuit, walking_detection, MeasurementBasis};
use crate::circuit::{metrics, Circuit, Topology};
use crate::equivalence::{circuit_unitary, equivalent_up_to_global_phase, makhlin_invariants};
use crate::error::Result;
use crate::gates::GateKind;
use crate::transpile::transpile;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One named check and its outcome.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    /// Largest deviation the check measured, comparable to the tolerance.
    pub deviation: f64,
    pub detail: String,
}

/// Outcome of the whole suite.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub checks: Vec<VerifyCheck>,
    pub all_passed: bool,
}

/// Suite configuration.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Deviation threshold for every equivalence comparison.
    pub tolerance: f64,
    /// Corrupt one transpiled circuit before checking it, to prove the
    /// suite actually fails on a broken rewrite.
    pub inject_fault: bool,
    /// Number of random textbook circuits to transpile and compare.
    pub random_circuits: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerance: 1e-9,
            inject_fault: false,
            random_circuits: 25,
            seed: 11,
        }
    }
}

/// A random circuit over the textbook gate set on an `n`-wire chain, with
/// two-qubit gates restricted to adjacent pairs.
pub fn random_textbook_circuit(rng: &mut ChaCha8Rng, qubits: usize) -> Result<Circuit> {
    let mut c = Circuit::new(qubits)?;
    let gates = rng.random_range(6..=14);
    for _ in 0..gates {
        match rng.random_range(0..10u8) {
            0 => {
                let q = rng.random_range(0..qubits);
                c.push(GateKind::H, &[q])?;
            }
            1 => {
                let q = rng.random_range(0..qubits);
                c.push(GateKind::X, &[q])?;
            }
            2 => {
                let q = rng.random_range(0..qubits);
                let angle = rng.random_range(-3.0..3.0);
                c.push(GateKind::Rx { angle }, &[q])?;
            }
            3 => {
                let q = rng.random_range(0..qubits);
                let angle = rng.random_range(-3.0..3.0);
                c.push(GateKind::Rz { angle }, &[q])?;
            }
            kind => {
                let a = rng.random_range(0..qubits - 1);
                let pair = [a, a + 1];
                match kind {
                    4 => c.push(GateKind::Cz, &pair)?,
                    5 => c.push(GateKind::Cnot, &pair)?,
                    6 => c.push(GateKind::Cnot, &[a + 1, a])?,
                    7 => c.push(GateKind::Swap, &pair)?,
                    8 => c.push(GateKind::Iswap, &pair)?,
                    _ => {
                        let angle = rng.random_range(-3.0..3.0);
                        if rng.random::<bool>() {
                            c.push(GateKind::Cphase { angle }, &pair)?
                        } else {
                            c.push(GateKind::Rxxyy { angle }, &pair)?
                        }
                    }
                };
            }
        }
    }
    Ok(c)
}

/// Rebuild a circuit with the first RZ angle shifted by 0.1: a controlled
/// way to break unitary equivalence without breaking validity.
fn corrupt_first_rz(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.qubits())?;
    let mut done = false;
    for gate in circuit.flat_gates() {
        let kind = match gate.kind {
            GateKind::Rz { angle } if !done => {
                done = true;
                GateKind::Rz { angle: angle + 0.1 }
            }
            k => k,
        };
        out.push(kind, &gate.qubits)?;
    }
    Ok(out)
}

fn soundness_check(
    name: &str,
    circuit: &Circuit,
    topology: &Topology,
    tolerance: f64,
    corrupt: bool,
) -> Result<VerifyCheck> {
    let mut native = transpile(circuit, topology)?;
    if corrupt {
        native = corrupt_first_rz(&native)?;
    }
    if !native.is_native() {
        return Ok(VerifyCheck {
            name: name.into(),
            passed: false,
            deviation: f64::INFINITY,
            detail: "transpiled circuit contains non-native gates".into(),
        });
    }
    let report = equivalent_up_to_global_phase(
        &circuit_unitary(circuit)?,
        &circuit_unitary(&native)?,
        tolerance,
    )?;
    Ok(VerifyCheck {
        name: name.into(),
        passed: report.equivalent,
        deviation: report.max_entry_deviation,
        detail: format!(
            "{} gates in, {} native gates out",
            circuit.gate_count(),
            native.gate_count()
        ),
    })
}

/// Run every check and collect a report. Failures never abort the suite;
/// hard errors (impossible circuits, dimension mismatches) do.
pub fn run_suite(options: &VerifyOptions) -> Result<VerifyReport> {
    let chain = Topology::chain(3)?;
    let mut checks = Vec::new();

    let static_circuit = static_detection(0.7)?;
    checks.push(soundness_check(
        "static-transpile-soundness",
        &static_circuit,
        &chain,
        options.tolerance,
        options.inject_fault,
    )?);
    let walking_circuit = walking_detection(0.7)?;
    checks.push(soundness_check(
        "walking-transpile-soundness",
        &walking_circuit,
        &chain,
        options.tolerance,
        false,
    )?);
    checks.push(soundness_check(
        "tomography-transpile-soundness",
        &tomography_circuit(1.0, 0.5, MeasurementBasis::Y)?,
        &chain,
        options.tolerance,
        false,
    )?);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..options.random_circuits {
        let circuit = random_textbook_circuit(&mut rng, 3)?;
        let check = soundness_check("random", &circuit, &chain, options.tolerance, false)?;
        worst = worst.max(check.deviation);
        if !check.passed {
            failures += 1;
        }
    }
    checks.push(VerifyCheck {
        name: "random-circuit-soundness".into(),
        passed: failures == 0,
        deviation: worst,
        detail: format!(
            "{} random circuits, {} failures",
            options.random_circuits, failures
        ),
    });

    let static_native = transpile(&static_circuit, &chain)?;
    let walking_native = transpile(&walking_circuit, &chain)?;
    let static_cz = metrics(&static_native).cz_count;
    let walking_cz = metrics(&walking_native).cz_count;
    checks.push(VerifyCheck {
        name: "detection-cz-budget".into(),
        passed: static_cz == 2 && walking_cz == 4,
        deviation: (static_cz as f64 - 2.0).abs() + (walking_cz as f64 - 4.0).abs(),
        detail: format!("static {static_cz} CZ, walking {walking_cz} CZ"),
    });

    // The walking circuit equals the static circuit dressed by its two
    // SWAPs: relabel the input by SWAP(0,1), the output by SWAP(1,2).
    let mut pre = Circuit::new(3)?;
    pre.push(GateKind::Swap, &[0, 1])?;
    let mut post = Circuit::new(3)?;
    post.push(GateKind::Swap, &[1, 2])?;
    let dressed = &(&circuit_unitary(&post)? * &circuit_unitary(&static_circuit)?)
        * &circuit_unitary(&pre)?;
    let deviation = circuit_unitary(&walking_circuit)?.max_abs_diff(&dressed);
    checks.push(VerifyCheck {
        name: "scheme-permutation-identity".into(),
        passed: deviation < options.tolerance,
        deviation,
        detail: "walking unitary vs swap-dressed static unitary".into(),
    });

    let mut fused = Circuit::new(2)?;
    fused.push(GateKind::Cnot, &[0, 1])?;
    fused.push(GateKind::Swap, &[0, 1])?;
    let fused_unitary = circuit_unitary(&fused)?;
    let iswap_unitary = GateKind::Iswap.matrix();
    let a = makhlin_invariants(&fused_unitary)?;
    let b = makhlin_invariants(&iswap_unitary)?;
    let inv_dev = (a.g1 - b.g1).norm().max((a.g2 - b.g2).abs());
    checks.push(VerifyCheck {
        name: "fused-block-iswap-invariants".into(),
        passed: a.approx_eq(&b, options.tolerance.max(1e-10)),
        deviation: inv_dev,
        detail: "local invariants of CNOT then SWAP vs ISWAP".into(),
    });

    let two = Topology::chain(2)?;
    let fused_native = transpile(&fused, &two)?;
    let report = equivalent_up_to_global_phase(
        &fused_unitary,
        &circuit_unitary(&fused_native)?,
        options.tolerance,
    )?;
    checks.push(VerifyCheck {
        name: "fused-block-two-cz-realization".into(),
        passed: report.equivalent && metrics(&fused_native).cz_count == 2,
        deviation: report.max_entry_deviation,
        detail: format!("{} CZ in the realization", metrics(&fused_native).cz_count),
    });

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        tolerance: options.tolerance,
        checks,
        all_passed,
    })
}
