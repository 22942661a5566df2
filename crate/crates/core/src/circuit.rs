//! Circuit intermediate representation: a register size plus a list of
//! moments, each moment holding gates that act on disjoint qubits.
//!
//! Circuits serialize to a stable JSON shape,
//! `{"qubits": 3, "moments": [[{"gate": "CZ", "qubits": [0, 1]}, ...], ...]}`,
//! with rotation angles carried in an `angle` field.

use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::linalg::MAX_QUBITS;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One gate bound to concrete qubits. For two-qubit gates the first listed
/// qubit is the control (or the most significant bit for symmetric gates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateApplication {
    #[serde(flatten)]
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateApplication {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        GateApplication { kind, qubits }
    }

    /// True when the gate touches the given qubit.
    pub fn touches(&self, qubit: usize) -> bool {
        self.qubits.contains(&qubit)
    }

    /// True when the gate touches any of the given qubits.
    pub fn touches_any(&self, qubits: &[usize]) -> bool {
        self.qubits.iter().any(|q| qubits.contains(q))
    }
}

/// Device coupling map. The hardware of interest is a linear chain, so that
/// is the only constructor offered, parameterized over length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    /// Chain of `qubits` qubits coupled as 0-1-2-...
    pub fn chain(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits,
                max: MAX_QUBITS,
            });
        }
        let edges = (0..qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Ok(Topology { qubits, edges })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// True when the (unordered) pair is a coupler on the device.
    pub fn are_coupled(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b)) || self.edges.contains(&(b, a))
    }

    /// Qubits directly coupled to `q`, in ascending order.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Couplers incident to `q`, each as an ascending pair.
    pub fn incident_edges(&self, q: usize) -> Vec<(usize, usize)> {
        self.neighbors(q)
            .into_iter()
            .map(|n| (q.min(n), q.max(n)))
            .collect()
    }
}

#[derive(Deserialize)]
struct RawCircuit {
    qubits: usize,
    moments: Vec<Vec<GateApplication>>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

/// A quantum circuit over a fixed-size register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    qubits: usize,
    moments: Vec<Vec<GateApplication>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        let mut circuit = Circuit::new(raw.qubits)?;
        circuit.metadata = raw.metadata;
        for moment in raw.moments {
            circuit.push_moment(moment)?;
        }
        Ok(circuit)
    }
}

impl Circuit {
    /// Empty circuit on `qubits` qubits.
    pub fn new(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge {
                qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(Circuit {
            qubits,
            moments: Vec::new(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn moments(&self) -> &[Vec<GateApplication>] {
        &self.moments
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    /// Append a gate as its own moment.
    pub fn push(&mut self, kind: GateKind, qubits: &[usize]) -> Result<&mut Self> {
        let gate = GateApplication::new(kind, qubits.to_vec());
        self.validate_gate(&gate)?;
        self.moments.push(vec![gate]);
        Ok(self)
    }

    /// Append a whole moment. All gates in it must act on disjoint qubits.
    pub fn push_moment(&mut self, moment: Vec<GateApplication>) -> Result<&mut Self> {
        let mut used: Vec<usize> = Vec::new();
        for gate in &moment {
            self.validate_gate(gate)?;
            for &q in &gate.qubits {
                if used.contains(&q) {
                    return Err(Error::DuplicateQubit { qubit: q });
                }
                used.push(q);
            }
        }
        self.moments.push(moment);
        Ok(self)
    }

    fn validate_gate(&self, gate: &GateApplication) -> Result<()> {
        let expected = gate.kind.qubit_count();
        if gate.qubits.len() != expected {
            return Err(Error::GateArity {
                gate: gate.kind.name(),
                expected,
                actual: gate.qubits.len(),
            });
        }
        for (i, &q) in gate.qubits.iter().enumerate() {
            if q >= self.qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    qubits: self.qubits,
                });
            }
            if gate.qubits[i + 1..].contains(&q) {
                return Err(Error::DuplicateQubit { qubit: q });
            }
        }
        if let Some(angle) = gate.kind.angle() {
            if !angle.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "gate angle",
                    value: angle,
                });
            }
        }
        Ok(())
    }

    /// Gates in execution order (moment by moment, list order inside each
    /// moment; gates within a moment commute since they act on disjoint
    /// qubits).
    pub fn flat_gates(&self) -> impl Iterator<Item = &GateApplication> {
        self.moments.iter().flatten()
    }

    pub fn gate_count(&self) -> usize {
        self.moments.iter().map(|m| m.len()).sum()
    }

    /// True when every gate belongs to the device-native set.
    pub fn is_native(&self) -> bool {
        self.flat_gates().all(|g| g.kind.is_native())
    }

    /// Check that every two-qubit gate sits on a coupler of `topology`.
    pub fn check_topology(&self, topology: &Topology) -> Result<()> {
        for gate in self.flat_gates() {
            if gate.qubits.len() == 2 && !topology.are_coupled(gate.qubits[0], gate.qubits[1]) {
                return Err(Error::NotCoupled {
                    a: gate.qubits[0],
                    b: gate.qubits[1],
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    pub fn from_json(json: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

/// Structural summary of a circuit.
///
/// Depth figures ignore RZ gates: on the device those are frame updates with
/// zero duration, so a moment containing nothing but RZ costs no time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub cz_count: usize,
    pub rx_count: usize,
    pub moment_depth: usize,
    pub two_qubit_depth: usize,
}

/// Compute [`Metrics`] for a circuit. An empty circuit reports all zeros.
pub fn metrics(circuit: &Circuit) -> Metrics {
    let mut cz_count = 0;
    let mut rx_count = 0;
    let mut moment_depth = 0;
    let mut two_qubit_depth = 0;
    for moment in circuit.moments() {
        let mut timed = false;
        let mut two_qubit = false;
        for gate in moment {
            match gate.kind {
                GateKind::Cz => cz_count += 1,
                GateKind::Rx { .. } => rx_count += 1,
                _ => {}
            }
            match gate.kind {
                GateKind::Rz { .. } => {}
                _ => timed = true,
            }
            if gate.qubits.len() == 2 {
                two_qubit = true;
            }
        }
        if timed {
            moment_depth += 1;
        }
        if two_qubit {
            two_qubit_depth += 1;
        }
    }
    Metrics {
        cz_count,
        rx_count,
        moment_depth,
        two_qubit_depth,
    }
}
