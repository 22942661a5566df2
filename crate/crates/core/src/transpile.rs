//! Transpilation to the device-native gate set {RX(pi/2), RZ, CZ}.
//!
//! The pipeline is deliberately small: a topology check, a peephole that
//! fuses a CNOT immediately followed by a SWAP of the same pair into two
//! back-to-back CNOTs (saving a third of the two-qubit gates), recursive
//! lowering of every textbook gate through the identities
//!
//! ```text
//! H        = RZ(pi/2) RX(pi/2) RZ(pi/2)        (up to global phase)
//! RX(a)    = H RZ(a) H
//! CNOT     = (I (x) H) CZ (I (x) H)
//! SWAP     = CNOT CNOT' CNOT
//! exp(-i a ZZ) = CNOT (I (x) RZ(2a)) CNOT
//! ```
//!
//! followed by RZ merging modulo 2 pi and as-late-as-possible moment
//! packing. No further optimization is attempted; redundant RX pulses left
//! by cancelling Hadamard pairs are kept, matching what the hardware
//! schedule would actually play.

use crate::circuit::{Circuit, GateApplication, Topology};
use crate::error::Result;
use crate::gates::GateKind;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Angles closer than this to 0 (mod 2 pi) are dropped after RZ merging.
const RZ_DROP_TOL: f64 = 1e-12;

/// Knobs for [`transpile_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct TranspileOptions {
    /// Emit a CNOT+SWAP pair as a single ISWAP with single-qubit dressing
    /// instead of the default two-CZ realization. The result is only useful
    /// for hardware with a native iSWAP; it is not native for the CZ-based
    /// device this crate models.
    pub fuse_to_iswap: bool,
}

/// Transpile with default options (two-CZ realization of fused pairs).
pub fn transpile(circuit: &Circuit, topology: &Topology) -> Result<Circuit> {
    transpile_with(circuit, topology, &TranspileOptions::default())
}

/// Rewrite `circuit` over the native set, checking every two-qubit gate
/// against `topology` first.
pub fn transpile_with(
    circuit: &Circuit,
    topology: &Topology,
    options: &TranspileOptions,
) -> Result<Circuit> {
    circuit.check_topology(topology)?;

    let flat: Vec<GateApplication> = circuit.flat_gates().cloned().collect();
    let fused = fuse_cnot_swap(flat, options.fuse_to_iswap);

    let mut lowered = Vec::new();
    for gate in &fused {
        lower(gate, &mut lowered, options.fuse_to_iswap);
    }

    let merged = merge_rz(lowered);
    let moments = pack_alap(&merged, circuit.qubits());

    let mut out = Circuit::new(circuit.qubits())?;
    for (key, value) in circuit.metadata() {
        out.set_metadata(key, value.clone());
    }
    out.set_metadata(
        "gate_set",
        if options.fuse_to_iswap {
            "native+iswap"
        } else {
            "native"
        },
    );
    for moment in moments {
        out.push_moment(moment)?;
    }
    Ok(out)
}

/// Replace each CNOT whose next gate on the same pair is a SWAP of that pair
/// with the fused realization. Gates on other qubits may sit between the two
/// without blocking the fusion.
fn fuse_cnot_swap(gates: Vec<GateApplication>, to_iswap: bool) -> Vec<GateApplication> {
    let mut consumed = vec![false; gates.len()];
    let mut out = Vec::with_capacity(gates.len());

    for i in 0..gates.len() {
        if consumed[i] {
            continue;
        }
        let gate = &gates[i];
        if gate.kind == GateKind::Cnot {
            let control = gate.qubits[0];
            let target = gate.qubits[1];
            if let Some(j) = fusable_swap(&gates, &consumed, i, control, target) {
                consumed[j] = true;
                if to_iswap {
                    // CNOT(c,t) SWAP = (H_c (x) S*_c S*_t) ISWAP (H_t), read
                    // right to left.
                    out.push(GateApplication::new(GateKind::H, vec![target]));
                    out.push(GateApplication::new(GateKind::Iswap, vec![control, target]));
                    out.push(GateApplication::new(
                        GateKind::Rz { angle: -FRAC_PI_2 },
                        vec![control],
                    ));
                    out.push(GateApplication::new(
                        GateKind::Rz { angle: -FRAC_PI_2 },
                        vec![target],
                    ));
                    out.push(GateApplication::new(GateKind::H, vec![control]));
                } else {
                    // CNOT(c,t) SWAP = CNOT(t,c) then CNOT(c,t).
                    out.push(GateApplication::new(GateKind::Cnot, vec![target, control]));
                    out.push(GateApplication::new(GateKind::Cnot, vec![control, target]));
                }
                continue;
            }
        }
        out.push(gate.clone());
    }
    out
}

/// Index of a SWAP on exactly {control, target} that is the next gate
/// touching either qubit after position `i`, if any.
fn fusable_swap(
    gates: &[GateApplication],
    consumed: &[bool],
    i: usize,
    control: usize,
    target: usize,
) -> Option<usize> {
    for (j, gate) in gates.iter().enumerate().skip(i + 1) {
        if consumed[j] || !gate.touches_any(&[control, target]) {
            continue;
        }
        let is_same_pair = gate.kind == GateKind::Swap
            && gate.touches(control)
            && gate.touches(target);
        return if is_same_pair { Some(j) } else { None };
    }
    None
}

/// Recursively expand one gate into native gates. With `keep_iswap` the
/// ISWAP is passed through untouched for hardware that plays it directly.
fn lower(gate: &GateApplication, out: &mut Vec<GateApplication>, keep_iswap: bool) {
    let qs = &gate.qubits;
    match gate.kind {
        GateKind::Rz { .. } | GateKind::Cz => out.push(gate.clone()),
        GateKind::Rx { angle } => {
            if gate.kind.is_native() {
                out.push(gate.clone());
            } else {
                lower(&GateApplication::new(GateKind::H, qs.clone()), out, keep_iswap);
                out.push(GateApplication::new(GateKind::Rz { angle }, qs.clone()));
                lower(&GateApplication::new(GateKind::H, qs.clone()), out, keep_iswap);
            }
        }
        GateKind::H => {
            out.push(GateApplication::new(
                GateKind::Rz { angle: FRAC_PI_2 },
                qs.clone(),
            ));
            out.push(GateApplication::new(
                GateKind::Rx { angle: FRAC_PI_2 },
                qs.clone(),
            ));
            out.push(GateApplication::new(
                GateKind::Rz { angle: FRAC_PI_2 },
                qs.clone(),
            ));
        }
        GateKind::X => {
            lower(
                &GateApplication::new(GateKind::Rx { angle: PI }, qs.clone()),
                out,
                keep_iswap,
            );
        }
        GateKind::Cnot => {
            let (control, target) = (qs[0], qs[1]);
            lower(&GateApplication::new(GateKind::H, vec![target]), out, keep_iswap);
            out.push(GateApplication::new(
                GateKind::Cz,
                vec![control.min(target), control.max(target)],
            ));
            lower(&GateApplication::new(GateKind::H, vec![target]), out, keep_iswap);
        }
        GateKind::Swap => {
            let (a, b) = (qs[0], qs[1]);
            for pair in [vec![a, b], vec![b, a], vec![a, b]] {
                lower(&GateApplication::new(GateKind::Cnot, pair), out, keep_iswap);
            }
        }
        GateKind::Iswap => {
            if keep_iswap {
                out.push(gate.clone());
                return;
            }
            // ISWAP = (S (x) S) (H (x) I) CNOT CNOT' (I (x) H), right to left.
            let (a, b) = (qs[0], qs[1]);
            lower(&GateApplication::new(GateKind::H, vec![b]), out, keep_iswap);
            lower(&GateApplication::new(GateKind::Cnot, vec![b, a]), out, keep_iswap);
            lower(&GateApplication::new(GateKind::Cnot, vec![a, b]), out, keep_iswap);
            lower(&GateApplication::new(GateKind::H, vec![a]), out, keep_iswap);
            for &q in &[a, b] {
                out.push(GateApplication::new(
                    GateKind::Rz { angle: FRAC_PI_2 },
                    vec![q],
                ));
            }
        }
        GateKind::Cphase { angle } => {
            let (a, b) = (qs[0], qs[1]);
            if wrap_angle(angle - PI).abs() < RZ_DROP_TOL {
                out.push(GateApplication::new(GateKind::Cz, vec![a.min(b), a.max(b)]));
                return;
            }
            // Writing the projector on |11> in terms of Z gives
            // CPHASE(d) = RZ(d/2) (x) RZ(d/2) . exp(+i d/4 ZZ) up to phase.
            out.push(GateApplication::new(
                GateKind::Rz { angle: angle / 2.0 },
                vec![a],
            ));
            out.push(GateApplication::new(
                GateKind::Rz { angle: angle / 2.0 },
                vec![b],
            ));
            lower_zz(-angle / 4.0, a, b, out, keep_iswap);
        }
        GateKind::Rxxyy { angle } => {
            // exp(-i a (XX + YY)/2) with a = angle/2, split into the
            // commuting XX and YY factors, each a conjugated ZZ rotation.
            let (a, b) = (qs[0], qs[1]);
            let quarter = angle / 4.0;
            for ys in [false, true] {
                if ys {
                    for &q in &[a, b] {
                        out.push(GateApplication::new(
                            GateKind::Rz { angle: -FRAC_PI_2 },
                            vec![q],
                        ));
                    }
                }
                for &q in &[a, b] {
                    lower(&GateApplication::new(GateKind::H, vec![q]), out, keep_iswap);
                }
                lower_zz(quarter, a, b, out, keep_iswap);
                for &q in &[a, b] {
                    lower(&GateApplication::new(GateKind::H, vec![q]), out, keep_iswap);
                }
                if ys {
                    for &q in &[a, b] {
                        out.push(GateApplication::new(
                            GateKind::Rz { angle: FRAC_PI_2 },
                            vec![q],
                        ));
                    }
                }
            }
        }
    }
}

/// exp(-i alpha Z(x)Z) = CNOT(a,b) RZ(2 alpha) on b, CNOT(a,b).
fn lower_zz(alpha: f64, a: usize, b: usize, out: &mut Vec<GateApplication>, keep_iswap: bool) {
    lower(&GateApplication::new(GateKind::Cnot, vec![a, b]), out, keep_iswap);
    out.push(GateApplication::new(
        GateKind::Rz { angle: 2.0 * alpha },
        vec![b],
    ));
    lower(&GateApplication::new(GateKind::Cnot, vec![a, b]), out, keep_iswap);
}

/// Fold an angle into (-pi, pi].
fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Merge runs of RZ on the same qubit by angle addition modulo 2 pi and drop
/// rotations that cancel to the identity.
fn merge_rz(mut gates: Vec<GateApplication>) -> Vec<GateApplication> {
    let mut alive = vec![true; gates.len()];
    for i in 0..gates.len() {
        let GateKind::Rz { angle } = gates[i].kind else {
            continue;
        };
        let q = gates[i].qubits[0];
        let prev = (0..i)
            .rev()
            .find(|&p| alive[p] && gates[p].touches(q));
        let mut combined = angle;
        if let Some(p) = prev {
            if let GateKind::Rz { angle: prev_angle } = gates[p].kind {
                combined = wrap_angle(prev_angle + angle);
                alive[p] = false;
                gates[i].kind = GateKind::Rz { angle: combined };
            }
        }
        if wrap_angle(combined).abs() < RZ_DROP_TOL {
            alive[i] = false;
        }
    }
    gates
        .into_iter()
        .zip(alive)
        .filter_map(|(g, keep)| keep.then_some(g))
        .collect()
}

/// Pack a flat gate list into moments as late as possible: every gate is
/// scheduled in the latest moment allowed by the gates that follow it, so
/// the final moment always holds the last gate of each line.
fn pack_alap(gates: &[GateApplication], qubits: usize) -> Vec<Vec<GateApplication>> {
    if gates.is_empty() {
        return Vec::new();
    }
    let mut levels_from_end = vec![0usize; qubits];
    let mut rev_levels = Vec::with_capacity(gates.len());
    for gate in gates.iter().rev() {
        let level = gate
            .qubits
            .iter()
            .map(|&q| levels_from_end[q])
            .max()
            .unwrap_or(0);
        rev_levels.push(level);
        for &q in &gate.qubits {
            levels_from_end[q] = level + 1;
        }
    }
    let depth = levels_from_end.iter().copied().max().unwrap_or(0);

    let mut moments: Vec<Vec<GateApplication>> = vec![Vec::new(); depth];
    for (gate, rev_level) in gates.iter().rev().zip(&rev_levels) {
        moments[depth - 1 - rev_level].push(gate.clone());
    }
    for moment in &mut moments {
        moment.sort_by_key(|g| g.qubits[0]);
    }
    moments
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{static_detection, tomography_circuit, walking_detection, MeasurementBasis};
    use crate::circuit::metrics;
    use crate::equivalence::{circuit_unitary, equivalent_up_to_global_phase, makhlin_invariants};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_sound(original: &Circuit, transpiled: &Circuit, tol: f64) {
        let u = circuit_unitary(original).unwrap();
        let v = circuit_unitary(transpiled).unwrap();
        let report = equivalent_up_to_global_phase(&u, &v, tol).unwrap();
        assert!(
            report.equivalent,
            "transpiled circuit deviates by {:.3e}",
            report.max_entry_deviation
        );
    }

    #[test]
    fn static_detection_transpiles_to_two_cz() {
        let topology = Topology::chain(3).unwrap();
        let original = static_detection(0.4).unwrap();
        let native = transpile(&original, &topology).unwrap();
        assert!(native.is_native());
        assert_eq!(metrics(&native).cz_count, 2);
        assert_sound(&original, &native, 1e-9);
    }

    #[test]
    fn walking_detection_transpiles_to_four_cz() {
        let topology = Topology::chain(3).unwrap();
        let original = walking_detection(0.4).unwrap();
        let native = transpile(&original, &topology).unwrap();
        assert!(native.is_native());
        let m = metrics(&native);
        assert_eq!(m.cz_count, 4);
        assert_eq!(m.two_qubit_depth, 4);
        assert_sound(&original, &native, 1e-9);
    }

    #[test]
    fn walking_two_qubit_depth_doubles_static() {
        let topology = Topology::chain(3).unwrap();
        let s = transpile(&static_detection(0.0).unwrap(), &topology).unwrap();
        let w = transpile(&walking_detection(0.0).unwrap(), &topology).unwrap();
        assert_eq!(metrics(&w).two_qubit_depth, 2 * metrics(&s).two_qubit_depth);
    }

    #[test]
    fn tomography_circuit_transpiles_to_six_cz() {
        let topology = Topology::chain(3).unwrap();
        for basis in [MeasurementBasis::X, MeasurementBasis::Y, MeasurementBasis::Z] {
            let original = tomography_circuit(1.1, -0.6, basis).unwrap();
            let native = transpile(&original, &topology).unwrap();
            assert!(native.is_native());
            assert_eq!(metrics(&native).cz_count, 6);
            assert_sound(&original, &native, 1e-9);
        }
    }

    #[test]
    fn every_textbook_gate_lowers_soundly() {
        let topology = Topology::chain(2).unwrap();
        let cases: Vec<(GateKind, Vec<usize>)> = vec![
            (GateKind::Rx { angle: 0.3 }, vec![0]),
            (GateKind::Rx { angle: FRAC_PI_2 }, vec![1]),
            (GateKind::Rz { angle: -2.2 }, vec![0]),
            (GateKind::H, vec![1]),
            (GateKind::X, vec![0]),
            (GateKind::Cz, vec![0, 1]),
            (GateKind::Cnot, vec![0, 1]),
            (GateKind::Cnot, vec![1, 0]),
            (GateKind::Swap, vec![0, 1]),
            (GateKind::Iswap, vec![0, 1]),
            (GateKind::Cphase { angle: 0.9 }, vec![0, 1]),
            (GateKind::Cphase { angle: PI }, vec![0, 1]),
            (GateKind::Rxxyy { angle: 0.37 }, vec![0, 1]),
            (GateKind::Rxxyy { angle: -1.8 }, vec![1, 0]),
        ];
        for (kind, qubits) in cases {
            let mut c = Circuit::new(2).unwrap();
            c.push(kind, &qubits).unwrap();
            let native = transpile(&c, &topology).unwrap();
            assert!(native.is_native(), "{kind:?} left non-native gates");
            assert_sound(&c, &native, 1e-9);
        }
    }

    #[test]
    fn x_lowers_to_two_native_pulses() {
        let topology = Topology::chain(1).unwrap();
        let mut c = Circuit::new(1).unwrap();
        c.push(GateKind::X, &[0]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        assert_eq!(metrics(&native).rx_count, 2);
        assert_sound(&c, &native, 1e-9);
    }

    #[test]
    fn rz_runs_merge_modulo_two_pi() {
        let topology = Topology::chain(1).unwrap();
        let mut c = Circuit::new(1).unwrap();
        c.push(GateKind::Rz { angle: 1.0 }, &[0]).unwrap();
        c.push(GateKind::Rz { angle: 2.0 }, &[0]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        let gates: Vec<_> = native.flat_gates().collect();
        assert_eq!(gates.len(), 1);
        assert_eq!(gates[0].kind, GateKind::Rz { angle: 3.0 });

        let mut c = Circuit::new(1).unwrap();
        c.push(GateKind::Rz { angle: PI }, &[0]).unwrap();
        c.push(GateKind::Rz { angle: PI }, &[0]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        assert_eq!(native.gate_count(), 0);
    }

    #[test]
    fn rz_merge_does_not_cross_other_gates() {
        let topology = Topology::chain(2).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::Rz { angle: 0.5 }, &[0]).unwrap();
        c.push(GateKind::Cz, &[0, 1]).unwrap();
        c.push(GateKind::Rz { angle: 0.5 }, &[0]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        let rz_count = native
            .flat_gates()
            .filter(|g| matches!(g.kind, GateKind::Rz { .. }))
            .count();
        assert_eq!(rz_count, 2);
        assert_sound(&c, &native, 1e-9);
    }

    #[test]
    fn fusion_rewrites_cnot_swap_as_two_cnots() {
        let topology = Topology::chain(2).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::Cnot, &[0, 1]).unwrap();
        c.push(GateKind::Swap, &[0, 1]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        // Without fusion this would be 1 + 3 = 4 CZ.
        assert_eq!(metrics(&native).cz_count, 2);
        assert_sound(&c, &native, 1e-9);
    }

    #[test]
    fn fusion_tolerates_interleaved_spectator_gates() {
        let topology = Topology::chain(3).unwrap();
        let mut c = Circuit::new(3).unwrap();
        c.push(GateKind::Cnot, &[0, 1]).unwrap();
        c.push(GateKind::H, &[2]).unwrap();
        c.push(GateKind::Swap, &[1, 0]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        assert_eq!(metrics(&native).cz_count, 2);
        assert_sound(&c, &native, 1e-9);
    }

    #[test]
    fn fusion_skipped_when_a_gate_intervenes_on_the_pair() {
        let topology = Topology::chain(2).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::Cnot, &[0, 1]).unwrap();
        c.push(GateKind::H, &[1]).unwrap();
        c.push(GateKind::Swap, &[0, 1]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        assert_eq!(metrics(&native).cz_count, 4);
        assert_sound(&c, &native, 1e-9);
    }

    #[test]
    fn iswap_fusion_is_equivalent_and_certified_by_invariants() {
        let topology = Topology::chain(2).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::Cnot, &[0, 1]).unwrap();
        c.push(GateKind::Swap, &[0, 1]).unwrap();

        let options = TranspileOptions { fuse_to_iswap: true };
        let fused = transpile_with(&c, &topology, &options).unwrap();
        assert!(fused.flat_gates().any(|g| g.kind == GateKind::Iswap));
        assert_sound(&c, &fused, 1e-9);

        let pair = circuit_unitary(&c).unwrap();
        let a = makhlin_invariants(&pair).unwrap();
        let b = makhlin_invariants(&GateKind::Iswap.matrix()).unwrap();
        assert!(a.approx_eq(&b, 1e-10));
    }

    #[test]
    fn alap_schedules_idle_wire_gates_late() {
        let topology = Topology::chain(2).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::Rz { angle: 0.4 }, &[1]).unwrap();
        c.push(GateKind::H, &[0]).unwrap();
        let native = transpile(&c, &topology).unwrap();
        // Wire 1 sees nothing after its RZ, so as-late-as-possible packing
        // parks that RZ in the final moment next to the last pulse on wire 0.
        assert!(native.moments().len() > 1);
        let last = native.moments().last().unwrap();
        assert!(last.iter().any(|g| g.touches(1)));
        assert_sound(&c, &native, 1e-9);
    }

    #[test]
    fn transpile_rejects_uncoupled_pairs() {
        let topology = Topology::chain(3).unwrap();
        let mut c = Circuit::new(3).unwrap();
        c.push(GateKind::Cz, &[0, 2]).unwrap();
        assert!(transpile(&c, &topology).is_err());
    }

    #[test]
    fn transpile_is_idempotent_on_native_circuits() {
        let topology = Topology::chain(3).unwrap();
        let native = transpile(&walking_detection(0.3).unwrap(), &topology).unwrap();
        let again = transpile(&native, &topology).unwrap();
        assert_eq!(metrics(&again), metrics(&native));
        assert_sound(&native, &again, 1e-9);
    }

    #[test]
    fn random_textbook_circuits_transpile_soundly() {
        let topology = Topology::chain(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let c = random_circuit(&mut rng, 12);
            let native = transpile(&c, &topology).unwrap();
            assert!(native.is_native());
            assert_sound(&c, &native, 1e-9);
        }
    }

    fn random_circuit(rng: &mut ChaCha8Rng, len: usize) -> Circuit {
        let mut c = Circuit::new(3).unwrap();
        for _ in 0..len {
            let edge = if rng.random_bool(0.5) { (0, 1) } else { (1, 2) };
            let (a, b) = if rng.random_bool(0.5) {
                edge
            } else {
                (edge.1, edge.0)
            };
            let angle = rng.random_range(-PI..PI);
            let q = rng.random_range(0..3);
            match rng.random_range(0..10) {
                0 => c.push(GateKind::Rx { angle }, &[q]).unwrap(),
                1 => c.push(GateKind::Rz { angle }, &[q]).unwrap(),
                2 => c.push(GateKind::H, &[q]).unwrap(),
                3 => c.push(GateKind::X, &[q]).unwrap(),
                4 => c.push(GateKind::Cz, &[a, b]).unwrap(),
                5 => c.push(GateKind::Cnot, &[a, b]).unwrap(),
                6 => c.push(GateKind::Swap, &[a, b]).unwrap(),
                7 => c.push(GateKind::Iswap, &[a, b]).unwrap(),
                8 => c.push(GateKind::Cphase { angle }, &[a, b]).unwrap(),
                _ => c.push(GateKind::Rxxyy { angle }, &[a, b]).unwrap(),
            };
        }
        c
    }
}
