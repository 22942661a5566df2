//! Reference constants for the three-qubit chain device the experiments
//! model: the fitted noise parameters, per-qubit readout confusion, and the
//! benchmark logical states used across tests and the command line.

use crate::experiment::{ConfusionMatrix, LogicalStateSpec};
use crate::noise::NoiseModel;
use std::f64::consts::FRAC_PI_2;

/// Noise parameters extracted by fitting the device's logical tomography
/// curves: parasitic phase -0.027 rad per pulse edge, residual exchange
/// 0.37 rad per CZ, and a shared depolarizing probability of 1.78e-2.
pub fn fitted_noise_model() -> NoiseModel {
    NoiseModel::new(-0.027, 0.37, 0.0178, 0.0178).expect("reference parameters are valid")
}

/// Symmetric per-wire readout confusion built from the device's individual
/// readout fidelities of 88%, 83% and 93%.
pub fn readout_confusion() -> Vec<ConfusionMatrix> {
    [0.88, 0.83, 0.93]
        .into_iter()
        .map(|f| ConfusionMatrix::symmetric(f).expect("reference fidelities are valid"))
        .collect()
}

/// The four logical states used as tomography benchmarks: the Z-up and
/// Y-down eigenstates plus two equatorial states near the X axis.
pub fn benchmark_states() -> [LogicalStateSpec; 4] {
    [
        LogicalStateSpec::new(0.0, 0.0).expect("valid spec"),
        LogicalStateSpec::new(FRAC_PI_2, 3.0 * FRAC_PI_2).expect("valid spec"),
        LogicalStateSpec::new(1.57, 1.26).expect("valid spec"),
        LogicalStateSpec::new(1.57, 1.88).expect("valid spec"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_model_round_trips_through_json() {
        let model = fitted_noise_model();
        let text = serde_json::to_string(&model).unwrap();
        let back: NoiseModel = serde_json::from_str(&text).unwrap();
        assert_eq!(model, back);
        assert_eq!(model.p1, model.p2);
    }

    #[test]
    fn confusion_set_covers_the_chain() {
        let confusion = readout_confusion();
        assert_eq!(confusion.len(), 3);
        for m in &confusion {
            let e = m.entries();
            assert!((e[0][0] + e[0][1] - 1.0).abs() < 1e-12);
            assert!((e[1][0] + e[1][1] - 1.0).abs() < 1e-12);
        }
        assert!((confusion[1].entries()[0][0] - 0.83).abs() < 1e-12);
    }

    #[test]
    fn benchmark_states_are_valid_and_distinct() {
        let states = benchmark_states();
        assert_eq!(states.len(), 4);
        assert_eq!(states[0].theta, 0.0);
        for (i, a) in states.iter().enumerate() {
            for b in states.iter().skip(i + 1) {
                assert!(a.theta != b.theta || a.phi != b.phi);
            }
        }
    }
}
