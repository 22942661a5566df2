//! Builders for the error-detection experiments on a three-qubit chain.
//!
//! Wire assignment follows the device: wires 0, 1, 2 are the chain ends and
//! middle. Two layouts are used:
//!
//! * **Static scheme**: data on wires 0 and 2, ancilla parked on wire 1. Two
//!   CNOTs write the ZZ parity of the data qubits into the ancilla.
//! * **Walking scheme**: ancilla starts on wire 0, data on wires 1 and 2.
//!   Each parity CNOT is followed by a SWAP that carries the ancilla down
//!   the chain, so a chain-coupled device can check both data qubits without
//!   long-range gates. The ancilla ends on wire 2 and the logical pair on
//!   wires (0, 1).
//!
//! A single X-type fault is modelled by an RX(epsilon) on one data qubit
//! between encoding and the detection cycle; epsilon = 0 is the fault-free
//! circuit and epsilon = pi a deterministic bit flip.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::GateKind;
use std::f64::consts::FRAC_PI_2;

/// Which detection circuit family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionScheme {
    Static,
    Walking,
}

/// Which data qubit receives the injected RX(epsilon) fault, named by the
/// order the parity checks reach them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorSite {
    CheckedFirst,
    CheckedSecond,
}

/// Measurement basis for logical-qubit tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementBasis {
    X,
    Y,
    Z,
}

impl MeasurementBasis {
    pub fn label(self) -> &'static str {
        match self {
            MeasurementBasis::X => "X",
            MeasurementBasis::Y => "Y",
            MeasurementBasis::Z => "Z",
        }
    }
}

/// Readout wires of a detection circuit after it has run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionLayout {
    /// Wire carrying the syndrome (ancilla) at measurement time.
    pub ancilla: usize,
    /// Wire carrying the faulted data qubit at measurement time.
    pub errored_data: usize,
}

/// Where the syndrome and the faulted data qubit end up for a given scheme
/// and fault site.
pub fn detection_layout(scheme: DetectionScheme, site: ErrorSite) -> DetectionLayout {
    match (scheme, site) {
        (DetectionScheme::Static, ErrorSite::CheckedFirst) => DetectionLayout {
            ancilla: 1,
            errored_data: 0,
        },
        (DetectionScheme::Static, ErrorSite::CheckedSecond) => DetectionLayout {
            ancilla: 1,
            errored_data: 2,
        },
        // The walking ancilla finishes on wire 2. Data checked first starts
        // on wire 1 and is swapped out to wire 0; data checked second starts
        // on wire 2 and ends on wire 1.
        (DetectionScheme::Walking, ErrorSite::CheckedFirst) => DetectionLayout {
            ancilla: 2,
            errored_data: 0,
        },
        (DetectionScheme::Walking, ErrorSite::CheckedSecond) => DetectionLayout {
            ancilla: 2,
            errored_data: 1,
        },
    }
}

/// Readout wires of the tomography circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TomographyLayout {
    /// Wire carrying the decoded logical qubit.
    pub logical: usize,
    /// Wire carrying the syndrome.
    pub ancilla: usize,
}

pub fn tomography_layout() -> TomographyLayout {
    TomographyLayout {
        logical: 0,
        ancilla: 2,
    }
}

fn check_angle(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

/// Detection circuit with the fault on the default site (the data qubit
/// whose parity is checked second).
pub fn detection_circuit(scheme: DetectionScheme, epsilon: f64) -> Result<Circuit> {
    detection_circuit_with_error_on(scheme, epsilon, ErrorSite::CheckedSecond)
}

/// Detection circuit with an explicit fault site.
pub fn detection_circuit_with_error_on(
    scheme: DetectionScheme,
    epsilon: f64,
    site: ErrorSite,
) -> Result<Circuit> {
    match scheme {
        DetectionScheme::Static => static_detection_with_error_on(epsilon, site),
        DetectionScheme::Walking => walking_detection_with_error_on(epsilon, site),
    }
}

/// Conventional detection circuit: the ancilla stays parked on the middle
/// wire and both data qubits couple to it directly.
pub fn static_detection(epsilon: f64) -> Result<Circuit> {
    static_detection_with_error_on(epsilon, ErrorSite::CheckedSecond)
}

pub fn static_detection_with_error_on(epsilon: f64, site: ErrorSite) -> Result<Circuit> {
    check_angle("epsilon", epsilon)?;
    let layout = detection_layout(DetectionScheme::Static, site);
    let mut c = Circuit::new(3)?;
    c.push(GateKind::Rx { angle: epsilon }, &[layout.errored_data])?;
    c.push(GateKind::Cnot, &[0, 1])?;
    c.push(GateKind::Cnot, &[2, 1])?;
    c.set_metadata("scheme", "static-detection");
    c.set_metadata("ancilla", "1");
    c.set_metadata("data", "0,2");
    c.set_metadata("error_qubit", layout.errored_data.to_string());
    Ok(c)
}

/// Walking detection circuit: parity checks interleaved with SWAPs that
/// carry the ancilla from wire 0 to wire 2.
pub fn walking_detection(epsilon: f64) -> Result<Circuit> {
    walking_detection_with_error_on(epsilon, ErrorSite::CheckedSecond)
}

pub fn walking_detection_with_error_on(epsilon: f64, site: ErrorSite) -> Result<Circuit> {
    check_angle("epsilon", epsilon)?;
    let error_wire = match site {
        ErrorSite::CheckedFirst => 1,
        ErrorSite::CheckedSecond => 2,
    };
    let mut c = Circuit::new(3)?;
    c.push(GateKind::Rx { angle: epsilon }, &[error_wire])?;
    c.push(GateKind::Cnot, &[1, 0])?;
    c.push(GateKind::Swap, &[0, 1])?;
    c.push(GateKind::Cnot, &[2, 1])?;
    c.push(GateKind::Swap, &[1, 2])?;
    c.set_metadata("scheme", "walking-detection");
    c.set_metadata("ancilla_start", "0");
    c.set_metadata("ancilla_end", "2");
    c.set_metadata("logical_pair", "0,1");
    c.set_metadata("error_qubit", error_wire.to_string());
    Ok(c)
}

/// Full tomography circuit for the walking scheme.
///
/// Prepares cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> on wire 1, entangles
/// it with wire 2 to form the logical state, runs the walking detection
/// cycle, decodes the logical qubit onto wire 0 with one more CNOT, and
/// finally rotates wire 0 so a Z measurement reads out the requested Pauli.
pub fn tomography_circuit(theta: f64, phi: f64, basis: MeasurementBasis) -> Result<Circuit> {
    check_angle("theta", theta)?;
    check_angle("phi", phi)?;
    let mut c = Circuit::new(3)?;

    // State preparation. RX(theta) leaves the |1> amplitude at phase -pi/2,
    // so the frame rotation is offset by pi/2 to land on e^{i phi}.
    c.push(GateKind::Rx { angle: theta }, &[1])?;
    c.push(GateKind::Rz { angle: phi + FRAC_PI_2 }, &[1])?;

    // Encode across the adjacent data pair.
    c.push(GateKind::Cnot, &[1, 2])?;

    // Walking detection cycle.
    c.push(GateKind::Cnot, &[1, 0])?;
    c.push(GateKind::Swap, &[0, 1])?;
    c.push(GateKind::Cnot, &[2, 1])?;
    c.push(GateKind::Swap, &[1, 2])?;

    // Decode the logical pair (0, 1) onto wire 0.
    c.push(GateKind::Cnot, &[0, 1])?;

    // Basis change so that measuring Z on wire 0 yields the requested
    // expectation value.
    match basis {
        MeasurementBasis::X => {
            c.push(GateKind::H, &[0])?;
        }
        MeasurementBasis::Y => {
            c.push(GateKind::Rz { angle: -FRAC_PI_2 }, &[0])?;
            c.push(GateKind::H, &[0])?;
        }
        MeasurementBasis::Z => {}
    }

    c.set_metadata("scheme", "walking-tomography");
    c.set_metadata("theta", format!("{theta}"));
    c.set_metadata("phi", format!("{phi}"));
    c.set_metadata("basis", basis.label());
    Ok(c)
}
