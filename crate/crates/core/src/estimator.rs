//! Noise-parameter estimation from measured logical tomography curves.
//!
//! A [`FitDataset`] holds two curves: the logical X expectation against the
//! azimuthal angle at polar angle pi/2, and the logical Z expectation
//! against the polar angle at azimuthal angle zero. The objective compares
//! them with the exact forward simulation, so the residual carries no
//! simulation shot noise of its own; whatever noise is in the data stays
//! the only noise in the problem.
//!
//! The optimizer is a temperature-scheduled random walk with Metropolis
//! acceptance, followed by a Nelder-Mead polish from the best point found.
//! Everything is driven by one seeded generator, so a given (dataset,
//! bounds, seed, budget) quadruple always returns the identical result.

use crate::builders::MeasurementBasis;
use crate::error::{Error, Result};
use crate::experiment::{
    linspace, logical_pauli_expectation, measure_basis, sample_shots, LogicalStateSpec,
};
use crate::noise::NoiseModel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Residual below which the search stops early; far below any tolerance a
/// sampled dataset can reach.
const CONVERGED: f64 = 1e-14;

/// One measured azimuthal point: logical X expectation at polar angle pi/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiPoint {
    pub phi: f64,
    pub x_l: f64,
}

/// One measured polar point: logical Z expectation at azimuthal angle zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub theta: f64,
    pub z_l: f64,
}

/// One point of the optional full tomography landscape, holding the logical
/// X expectation at an arbitrary state angle pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub x_l: f64,
}

/// Measured expectation curves a fit runs against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDataset {
    pub phi_points: Vec<PhiPoint>,
    pub theta_points: Vec<ThetaPoint>,
    /// Shots per measurement when the data was sampled; absent means the
    /// values are exact probabilities.
    pub shots: Option<u64>,
    /// Optional full landscape on top of the two standard cuts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_grid: Option<Vec<GridPoint>>,
}

impl FitDataset {
    pub fn validate(&self) -> Result<()> {
        if self.phi_points.is_empty() || self.theta_points.is_empty() {
            return Err(Error::BadDataset {
                reason: "both angle grids must be non-empty".into(),
            });
        }
        let check = |angle: f64, value: f64| -> Result<()> {
            if !angle.is_finite() {
                return Err(Error::BadDataset {
                    reason: format!("non-finite grid angle {angle}"),
                });
            }
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::BadDataset {
                    reason: format!("expectation {value} outside [-1, 1]"),
                });
            }
            Ok(())
        };
        for p in &self.phi_points {
            check(p.phi, p.x_l)?;
        }
        for p in &self.theta_points {
            check(p.theta, p.z_l)?;
        }
        for g in self.full_grid.iter().flatten() {
            check(g.theta, g.x_l)?;
            check(g.phi, 0.0)?;
        }
        Ok(())
    }

    /// Total number of residual terms the objective sums over.
    pub fn point_count(&self) -> usize {
        self.phi_points.len()
            + self.theta_points.len()
            + self.full_grid.as_ref().map_or(0, Vec::len)
    }
}

/// Per-parameter closed search intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub delta_phi: (f64, f64),
    pub theta: (f64, f64),
    pub p1: (f64, f64),
    pub p2: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        FitBounds {
            delta_phi: (-0.2, 0.2),
            theta: (0.0, 1.0),
            p1: (0.0, 0.1),
            p2: (0.0, 0.1),
        }
    }
}

impl FitBounds {
    /// Intervals spanning `spread` of each parameter's magnitude on both
    /// sides of a reference model, with probabilities clipped to [0, 1].
    pub fn around(reference: &NoiseModel, spread: f64) -> Self {
        let interval = |v: f64| {
            let half = v.abs() * spread;
            (v - half, v + half)
        };
        let prob_interval = |v: f64| {
            let (lo, hi) = interval(v);
            (lo.max(0.0), hi.min(1.0))
        };
        FitBounds {
            delta_phi: interval(reference.delta_phi),
            theta: interval(reference.theta),
            p1: prob_interval(reference.p1),
            p2: prob_interval(reference.p2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("delta_phi", self.delta_phi),
            ("theta", self.theta),
            ("p1", self.p1),
            ("p2", self.p2),
        ];
        for (name, (lo, hi)) in pairs {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::BadBounds { name, lo, hi });
            }
        }
        for (name, (lo, hi)) in [("p1", self.p1), ("p2", self.p2)] {
            if lo < 0.0 || hi > 1.0 {
                return Err(Error::BadBounds { name, lo, hi });
            }
        }
        Ok(())
    }

    fn lows(&self) -> [f64; 4] {
        [self.delta_phi.0, self.theta.0, self.p1.0, self.p2.0]
    }

    fn highs(&self) -> [f64; 4] {
        [self.delta_phi.1, self.theta.1, self.p1.1, self.p2.1]
    }
}

/// Optional fitting behavior switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    /// Share a single depolarizing probability between both gate classes
    /// instead of fitting them independently.
    pub tie_depolarization: bool,
}

/// Outcome of a fit: the best parameters found and how the search went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: NoiseModel,
    /// Sum of squared residuals at `params`.
    pub residual: f64,
    /// Objective evaluations actually spent.
    pub evaluations: u64,
    pub seed: u64,
    /// True when the search ran out of budget rather than converging.
    pub budget_exhausted: bool,
}

/// Sum of squared differences between the dataset and the exact forward
/// simulation at the given parameters.
pub fn objective(params: &NoiseModel, data: &FitDataset) -> Result<f64> {
    params.validate()?;
    data.validate()?;
    raw_objective(params, data)
}

fn raw_objective(params: &NoiseModel, data: &FitDataset) -> Result<f64> {
    let noise = Some(params);
    let mut sum = 0.0;
    for p in &data.phi_points {
        let spec = LogicalStateSpec::new(FRAC_PI_2, p.phi)?;
        let sim = logical_pauli_expectation(&spec, MeasurementBasis::X, noise)?;
        sum += (sim - p.x_l) * (sim - p.x_l);
    }
    for p in &data.theta_points {
        let spec = LogicalStateSpec::new(p.theta, 0.0)?;
        let sim = logical_pauli_expectation(&spec, MeasurementBasis::Z, noise)?;
        sum += (sim - p.z_l) * (sim - p.z_l);
    }
    for g in data.full_grid.iter().flatten() {
        let spec = LogicalStateSpec::new(g.theta, g.phi)?;
        let sim = logical_pauli_expectation(&spec, MeasurementBasis::X, noise)?;
        sum += (sim - g.x_l) * (sim - g.x_l);
    }
    Ok(sum)
}

struct Search<'a> {
    data: &'a FitDataset,
    lo: [f64; 4],
    hi: [f64; 4],
    tie: bool,
    budget: u64,
    evaluations: u64,
}

impl Search<'_> {
    fn model(&self, x: &[f64; 4]) -> Result<NoiseModel> {
        let p2 = if self.tie { x[2] } else { x[3] };
        NoiseModel::new(x[0], x[1], x[2], p2)
    }

    fn eval(&mut self, x: &[f64; 4]) -> Result<f64> {
        self.evaluations += 1;
        raw_objective(&self.model(x)?, self.data)
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    fn clamp(&self, x: &mut [f64; 4]) {
        for ((xi, &lo), &hi) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *xi = xi.clamp(lo, hi);
        }
        if self.tie {
            x[3] = x[2];
        }
    }
}

/// Fit all four parameters independently. See [`fit_with`].
pub fn fit(data: &FitDataset, bounds: &FitBounds, seed: u64, budget: u64) -> Result<FitResult> {
    fit_with(data, bounds, seed, budget, FitOptions::default())
}

/// Global annealing search followed by a simplex polish.
///
/// The walk proposes uniform jumps whose size shrinks with the temperature
/// and accepts uphill moves by the Metropolis rule; the polish is a
/// bound-clamped Nelder-Mead started from the best visited point. Budget
/// exhaustion is not an error: the best parameters seen so far come back
/// with `budget_exhausted` set.
pub fn fit_with(
    data: &FitDataset,
    bounds: &FitBounds,
    seed: u64,
    budget: u64,
    options: FitOptions,
) -> Result<FitResult> {
    bounds.validate()?;
    data.validate()?;
    if budget == 0 {
        return Err(Error::InvalidParameter {
            name: "budget",
            value: 0.0,
        });
    }

    let mut search = Search {
        data,
        lo: bounds.lows(),
        hi: bounds.highs(),
        tie: options.tie_depolarization,
        budget,
        evaluations: 0,
    };
    if search.tie {
        // The shared probability must satisfy both declared intervals.
        search.lo[2] = search.lo[2].max(search.lo[3]);
        search.hi[2] = search.hi[2].min(search.hi[3]);
        if search.lo[2] > search.hi[2] {
            return Err(Error::BadBounds {
                name: "p1/p2 (tied)",
                lo: search.lo[2],
                hi: search.hi[2],
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Start anywhere in the box rather than at its midpoint, so a dataset
    // whose generating parameters happen to sit at the center is recovered
    // by actual search and not by the starting guess.
    let mut x = [0.0; 4];
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = if search.lo[i] < search.hi[i] {
            rng.random_range(search.lo[i]..=search.hi[i])
        } else {
            search.lo[i]
        };
    }
    search.clamp(&mut x);
    let mut fx = search.eval(&x)?;
    let mut best = x;
    let mut fbest = fx;

    // Annealing walk over roughly the first 60% of the budget. The
    // temperature doubles as the jump scale, cooling geometrically to 1e-4
    // of the initial objective.
    let anneal_budget = (budget * 3 / 5).max(1);
    let t0 = fx.max(1e-6);
    let steps = anneal_budget.saturating_sub(1);
    for k in 0..steps {
        if search.exhausted() || fbest < CONVERGED {
            break;
        }
        let frac = k as f64 / steps.max(1) as f64;
        let t = t0 * 1e-4f64.powf(frac);
        let scale = (t / t0).max(0.01);
        let mut cand = x;
        for (i, c) in cand.iter_mut().enumerate() {
            let width = search.hi[i] - search.lo[i];
            *c += width * scale * rng.random_range(-1.0..=1.0);
        }
        search.clamp(&mut cand);
        let fc = search.eval(&cand)?;
        if fc < fbest {
            best = cand;
            fbest = fc;
        }
        if fc <= fx || rng.random::<f64>() < (-(fc - fx) / t).exp() {
            x = cand;
            fx = fc;
        }
    }

    if !search.exhausted() && fbest >= CONVERGED {
        let (px, pf) = nelder_mead(&mut search, best, fbest)?;
        if pf < fbest {
            best = px;
            fbest = pf;
        }
    }

    Ok(FitResult {
        params: search.model(&best)?,
        residual: fbest,
        evaluations: search.evaluations,
        seed,
        budget_exhausted: search.exhausted() && fbest >= CONVERGED,
    })
}

/// Bound-clamped Nelder-Mead from a start point, spending whatever budget
/// remains in the search.
fn nelder_mead(search: &mut Search, start: [f64; 4], fstart: f64) -> Result<([f64; 4], f64)> {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let mut simplex: Vec<([f64; 4], f64)> = vec![(start, fstart)];
    for i in 0..4 {
        let mut v = start;
        let width = search.hi[i] - search.lo[i];
        if width == 0.0 || (search.tie && i == 3) {
            // Degenerate coordinate: keep the simplex full-rank in the
            // remaining directions by duplicating with a tiny offset that
            // clamps back onto the feasible segment.
            v[i] = start[i];
        } else {
            v[i] = if start[i] + 0.05 * width <= search.hi[i] {
                start[i] + 0.05 * width
            } else {
                start[i] - 0.05 * width
            };
        }
        search.clamp(&mut v);
        if search.exhausted() {
            return Ok((start, fstart));
        }
        let fv = search.eval(&v)?;
        simplex.push((v, fv));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fbest, fworst) = (simplex[0].1, simplex[4].1);
        if search.exhausted() || fbest < CONVERGED || fworst - fbest < 1e-16 {
            break;
        }

        let mut centroid = [0.0; 4];
        for (v, _) in &simplex[..4] {
            for i in 0..4 {
                centroid[i] += v[i] / 4.0;
            }
        }
        let worst = simplex[4].0;
        let mut reflected = [0.0; 4];
        for i in 0..4 {
            reflected[i] = centroid[i] + ALPHA * (centroid[i] - worst[i]);
        }
        search.clamp(&mut reflected);
        let fr = search.eval(&reflected)?;

        if fr < simplex[0].1 {
            if search.exhausted() {
                simplex[4] = (reflected, fr);
                break;
            }
            let mut expanded = [0.0; 4];
            for i in 0..4 {
                expanded[i] = centroid[i] + GAMMA * (reflected[i] - centroid[i]);
            }
            search.clamp(&mut expanded);
            let fe = search.eval(&expanded)?;
            simplex[4] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[3].1 {
            simplex[4] = (reflected, fr);
        } else {
            if search.exhausted() {
                break;
            }
            let mut contracted = [0.0; 4];
            for i in 0..4 {
                contracted[i] = centroid[i] + RHO * (worst[i] - centroid[i]);
            }
            search.clamp(&mut contracted);
            let fc = search.eval(&contracted)?;
            if fc < simplex[4].1 {
                simplex[4] = (contracted, fc);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    for (e, &a) in entry.0.iter_mut().zip(&anchor) {
                        *e = a + SIGMA * (*e - a);
                    }
                    search.clamp(&mut entry.0);
                    if search.exhausted() {
                        break;
                    }
                    entry.1 = search.eval(&entry.0)?;
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(simplex[0])
}

/// Forward-simulated dataset on uniform grids: the azimuthal grid covers
/// [0, 2pi) endpoint-exclusive, the polar grid [0, pi] inclusive. With
/// `shots` present every point is sampled with a per-point sub-seed, so the
/// dataset is reproducible bit for bit.
pub fn generate_synthetic_dataset(
    params: &NoiseModel,
    phi_count: usize,
    theta_count: usize,
    shots: Option<u64>,
    seed: u64,
) -> Result<FitDataset> {
    params.validate()?;
    for (name, count) in [("phi_count", phi_count), ("theta_count", theta_count)] {
        if count < 2 {
            return Err(Error::InvalidParameter {
                name,
                value: count as f64,
            });
        }
    }
    if shots == Some(0) {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
        });
    }

    let expectation =
        |spec: &LogicalStateSpec, basis: MeasurementBasis, sub_seed: u64| -> Result<f64> {
            match shots {
                None => logical_pauli_expectation(spec, basis, Some(params)),
                Some(n) => {
                    let probs = measure_basis(spec, basis, Some(params))?;
                    let freq = sample_shots(&probs, n, sub_seed)?;
                    Ok(freq[0] + freq[2] - freq[1] - freq[3])
                }
            }
        };

    let mut phi_points = Vec::with_capacity(phi_count);
    for k in 0..phi_count {
        let phi = TAU * k as f64 / phi_count as f64;
        let spec = LogicalStateSpec::new(FRAC_PI_2, phi)?;
        let x_l = expectation(&spec, MeasurementBasis::X, seed.wrapping_add(k as u64))?;
        phi_points.push(PhiPoint { phi, x_l });
    }
    let mut theta_points = Vec::with_capacity(theta_count);
    for (j, &theta) in linspace(0.0, PI, theta_count).iter().enumerate() {
        let spec = LogicalStateSpec::new(theta, 0.0)?;
        let sub_seed = seed.wrapping_add((phi_count + j) as u64);
        let z_l = expectation(&spec, MeasurementBasis::Z, sub_seed)?;
        theta_points.push(ThetaPoint { theta, z_l });
    }
    Ok(FitDataset {
        phi_points,
        theta_points,
        shots,
        full_grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices;

    fn planted() -> NoiseModel {
        devices::fitted_noise_model()
    }

    fn small_dataset(model: &NoiseModel) -> FitDataset {
        generate_synthetic_dataset(model, 8, 9, None, 0).unwrap()
    }

    #[test]
    fn noiseless_dataset_is_the_pure_cosine() {
        let data = generate_synthetic_dataset(&NoiseModel::zero(), 12, 13, None, 0).unwrap();
        for p in &data.phi_points {
            assert!((p.x_l - p.phi.cos()).abs() < 1e-9);
        }
        for p in &data.theta_points {
            assert!((p.z_l - p.theta.cos()).abs() < 1e-9);
        }
        assert!((data.phi_points[0].phi).abs() < 1e-15);
        let last_phi = data.phi_points.last().unwrap().phi;
        assert!(last_phi < TAU - 1e-9, "azimuthal grid must exclude 2pi");
        assert!((data.theta_points.last().unwrap().theta - PI).abs() < 1e-12);
    }

    #[test]
    fn objective_vanishes_at_the_generating_parameters() {
        let zero_data = generate_synthetic_dataset(&NoiseModel::zero(), 6, 7, None, 0).unwrap();
        assert!(objective(&NoiseModel::zero(), &zero_data).unwrap() < 1e-12);

        let model = planted();
        let data = small_dataset(&model);
        assert!(objective(&model, &data).unwrap() < 1e-12);
        assert!(objective(&NoiseModel::zero(), &data).unwrap() > 1e-3);
    }

    #[test]
    fn objective_ignores_point_order() {
        let model = planted();
        let mut data = small_dataset(&model);
        let f1 = objective(&NoiseModel::zero(), &data).unwrap();
        data.phi_points.reverse();
        data.theta_points.reverse();
        let f2 = objective(&NoiseModel::zero(), &data).unwrap();
        assert!((f1 - f2).abs() < 1e-12);
    }

    #[test]
    fn dataset_generation_is_deterministic() {
        let model = planted();
        let a = generate_synthetic_dataset(&model, 6, 6, Some(500), 42).unwrap();
        let b = generate_synthetic_dataset(&model, 6, 6, Some(500), 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_dataset(&model, 6, 6, Some(500), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_dataset_stays_in_range() {
        let data = generate_synthetic_dataset(&planted(), 6, 6, Some(50), 7).unwrap();
        data.validate().unwrap();
        assert_eq!(data.shots, Some(50));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let model = planted();
        assert!(generate_synthetic_dataset(&model, 1, 5, None, 0).is_err());
        assert!(generate_synthetic_dataset(&model, 5, 1, None, 0).is_err());
        assert!(generate_synthetic_dataset(&model, 5, 5, Some(0), 0).is_err());

        let empty = FitDataset {
            phi_points: vec![],
            theta_points: vec![ThetaPoint { theta: 0.0, z_l: 1.0 }],
            shots: None,
            full_grid: None,
        };
        assert!(matches!(
            objective(&model, &empty),
            Err(Error::BadDataset { .. })
        ));

        let out_of_range = FitDataset {
            phi_points: vec![PhiPoint { phi: 0.0, x_l: 1.5 }],
            theta_points: vec![ThetaPoint {
                theta: 0.0,
                z_l: 1.0,
            }],
            shots: None,
            full_grid: None,
        };
        assert!(out_of_range.validate().is_err());

        let data = small_dataset(&model);
        let inverted = FitBounds {
            theta: (1.0, 0.0),
            ..FitBounds::default()
        };
        assert!(matches!(
            fit(&data, &inverted, 0, 10),
            Err(Error::BadBounds { .. })
        ));
        assert!(fit(&data, &FitBounds::default(), 0, 0).is_err());
    }

    #[test]
    fn dataset_round_trips_through_json() {
        let data = generate_synthetic_dataset(&planted(), 4, 4, Some(100), 3).unwrap();
        let text = serde_json::to_string(&data).unwrap();
        let back: FitDataset = serde_json::from_str(&text).unwrap();
        assert_eq!(data, back);
        // The optional grid stays out of the serialized form entirely.
        assert!(!text.contains("full_grid"));
    }

    #[test]
    fn fit_recovers_planted_parameters() {
        let truth = planted();
        let data = generate_synthetic_dataset(&truth, 12, 13, None, 0).unwrap();
        let bounds = FitBounds::around(&truth, 0.5);
        let result = fit(&data, &bounds, 1, 2000).unwrap();
        assert!((result.params.delta_phi - truth.delta_phi).abs() <= 0.005);
        assert!((result.params.theta - truth.theta).abs() <= 0.02);
        assert!((result.params.p1 - truth.p1).abs() <= 0.003);
        assert!((result.params.p2 - truth.p2).abs() <= 0.003);
        assert!(result.residual < 1e-8);
        assert!(!result.budget_exhausted);
    }

    #[test]
    fn fit_is_deterministic() {
        let truth = planted();
        let data = generate_synthetic_dataset(&truth, 6, 7, None, 0).unwrap();
        let bounds = FitBounds::around(&truth, 0.5);
        let a = fit(&data, &bounds, 9, 300).unwrap();
        let b = fit(&data, &bounds, 9, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_respects_bounds() {
        let truth = planted();
        let data = small_dataset(&truth);
        // Deliberately exclude the truth so the optimum sits on a face.
        let bounds = FitBounds {
            delta_phi: (0.05, 0.1),
            theta: (0.5, 0.8),
            p1: (0.03, 0.05),
            p2: (0.03, 0.05),
        };
        let result = fit(&data, &bounds, 3, 200).unwrap();
        let p = &result.params;
        assert!(p.delta_phi >= 0.05 && p.delta_phi <= 0.1);
        assert!(p.theta >= 0.5 && p.theta <= 0.8);
        assert!(p.p1 >= 0.03 && p.p1 <= 0.05);
        assert!(p.p2 >= 0.03 && p.p2 <= 0.05);
    }

    #[test]
    fn zero_noise_data_pulls_the_fit_to_the_origin() {
        let data = generate_synthetic_dataset(&NoiseModel::zero(), 10, 11, None, 0).unwrap();
        let result = fit(&data, &FitBounds::default(), 5, 1500).unwrap();
        assert!(result.params.delta_phi.abs() <= 0.02);
        assert!(result.params.theta.abs() <= 0.02);
        assert!(result.params.p1 <= 0.01);
        assert!(result.params.p2 <= 0.01);
    }

    #[test]
    fn tied_fit_returns_equal_depolarization() {
        let truth = planted();
        let data = generate_synthetic_dataset(&truth, 8, 9, None, 0).unwrap();
        let options = FitOptions {
            tie_depolarization: true,
        };
        let result = fit_with(&data, &FitBounds::around(&truth, 0.5), 2, 800, options).unwrap();
        assert_eq!(result.params.p1, result.params.p2);
        assert!((result.params.p1 - truth.p1).abs() <= 0.003);
    }

    #[test]
    fn exhausted_budget_reports_best_so_far() {
        let truth = planted();
        let data = small_dataset(&truth);
        let result = fit(&data, &FitBounds::default(), 0, 5).unwrap();
        assert_eq!(result.evaluations, 5);
        assert!(result.budget_exhausted);
        assert!(result.residual.is_finite());
    }

    #[test]
    fn long_run_drives_the_residual_down() {
        let truth = planted();
        let data = generate_synthetic_dataset(&truth, 12, 13, None, 0).unwrap();
        let result = fit(&data, &FitBounds::around(&truth, 0.5), 11, 20_000).unwrap();
        assert!(
            result.residual < 1e-8,
            "residual {} after {} evaluations",
            result.residual,
            result.evaluations
        );
    }
}
