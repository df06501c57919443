//! Maximin search over unconstrained six-line configurations.
//!
//! Each line is charted by `(phi, kappa, delta)`: latitude and longitude of
//! the tangency point and the tilt of the direction away from north. The
//! objective is the smallest of the 15 pairwise line distances. It is a
//! minimum of smooth functions, so the optimizer is a derivative-free
//! pattern search with step halving.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve;
use crate::d3::{self, D3Params};
use crate::error::{Error, Result};
use crate::geometry::{
    distance_sq, make_tangent_line, radius_from_distance, Configuration, SphericalPoint,
    TangentLine,
};

pub const LINES: usize = 6;
pub const DIM: usize = 3 * LINES;

/// Chart point: `(phi_i, kappa_i, delta_i)` for each of the six lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeConfig {
    pub coords: [f64; DIM],
}

impl FreeConfig {
    pub fn new(coords: [f64; DIM]) -> Self {
        Self { coords }
    }

    pub fn from_configuration(c: &Configuration) -> Result<Self> {
        if c.len() != LINES {
            return Err(Error::WrongLineCount {
                expected: LINES,
                got: c.len(),
            });
        }
        let mut coords = [0.0; DIM];
        for (i, line) in c.lines.iter().enumerate() {
            let (phi, kappa, delta) = line.angles()?;
            coords[3 * i..3 * i + 3].copy_from_slice(&[phi, kappa, delta]);
        }
        Ok(Self { coords })
    }

    pub fn from_params(p: &D3Params) -> Result<Self> {
        Self::from_configuration(&d3::build_c6(p)?)
    }

    pub fn c6() -> Self {
        Self::from_params(&D3Params::origin()).expect("C6(0,0,0) is off the poles")
    }

    pub fn record() -> Self {
        Self::from_params(&curve::record().params).expect("record point is off the poles")
    }

    pub fn curve(x: f64) -> Result<Self> {
        Self::from_params(&curve::gamma_point(x)?.params)
    }

    fn lines(&self) -> Option<[TangentLine; LINES]> {
        let mut out =
            [TangentLine::new(nalgebra::Vector3::x(), nalgebra::Vector3::z()).ok()?; LINES];
        for (i, slot) in out.iter_mut().enumerate() {
            let [phi, kappa, delta] = [
                self.coords[3 * i],
                self.coords[3 * i + 1],
                self.coords[3 * i + 2],
            ];
            if !(phi.abs() < FRAC_PI_2) {
                return None;
            }
            *slot = make_tangent_line(SphericalPoint::new(phi, kappa).ok()?, delta).ok()?;
        }
        Some(out)
    }

    pub fn to_configuration(&self) -> Result<Configuration> {
        for i in 0..LINES {
            let phi = self.coords[3 * i];
            if !(phi.abs() < FRAC_PI_2) {
                return Err(Error::PoleNotAllowed(phi));
            }
        }
        let lines = self.lines().ok_or(Error::InvalidArgument(
            "chart point maps onto a pole".into(),
        ))?;
        Ok(Configuration::new(lines.to_vec()))
    }
}

fn pair_distances(lines: &[TangentLine; LINES]) -> [f64; 15] {
    let mut out = [0.0; 15];
    let mut k = 0;
    for i in 0..LINES {
        for j in i + 1..LINES {
            out[k] = distance_sq(&lines[i], &lines[j]).sqrt();
            k += 1;
        }
    }
    out
}

fn min_of(d: &[f64; 15]) -> f64 {
    d.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Log-sum-exp lower envelope of the distances; tends to the exact minimum
/// as `beta` grows.
fn soft_min(d: &[f64; 15], beta: f64) -> f64 {
    let m = min_of(d);
    let sum: f64 = d.iter().map(|&x| (-beta * (x - m)).exp()).sum();
    m - sum.ln() / beta
}

/// `D(m)`: the smallest pairwise distance of the charted configuration.
pub fn objective(c: &FreeConfig) -> Result<f64> {
    let cfg = c.to_configuration()?;
    cfg.min_distance()
}

/// Objective for the search loop; chart points at a pole score `-inf`.
fn score(c: &FreeConfig) -> f64 {
    match c.lines() {
        Some(lines) => min_of(&pair_distances(&lines)),
        None => f64::NEG_INFINITY,
    }
}

/// `(exact, surrogate)` pair; the surrogate is the exact minimum when
/// `beta` is `None`.
fn score_pair(c: &FreeConfig, beta: Option<f64>) -> (f64, f64) {
    match c.lines() {
        Some(lines) => {
            let d = pair_distances(&lines);
            let exact = min_of(&d);
            (exact, beta.map_or(exact, |b| soft_min(&d, b)))
        }
        None => (f64::NEG_INFINITY, f64::NEG_INFINITY),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub step0: f64,
    pub step_min: f64,
    /// Random unit directions polled per iteration in addition to the 36
    /// coordinate directions.
    pub random_dirs: usize,
    pub rng_seed: u64,
    /// Soft-min sharpness schedule run before the exact-minimum polish.
    /// Empty means the search uses the exact minimum throughout.
    pub smoothing: Vec<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: 200_000,
            step0: 0.1,
            step_min: 1e-9,
            random_dirs: 12,
            rng_seed: 0,
            smoothing: vec![20.0, 80.0, 320.0, 1280.0, 5120.0, 20480.0, 81920.0],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptResult {
    pub best: FreeConfig,
    pub d_best: f64,
    pub r_best: f64,
    pub evals: usize,
    /// `(iteration, d)` each time the best exact value improves, starting
    /// with the seed.
    pub trace: Vec<(usize, f64)>,
    pub start_index: usize,
}

impl OptResult {
    pub fn configuration(&self) -> Result<Configuration> {
        self.best.to_configuration()
    }
}

fn radius_or_inf(d: f64) -> f64 {
    radius_from_distance(d).unwrap_or(f64::INFINITY)
}

struct Search<'a> {
    opts: &'a SearchOptions,
    rng: ChaCha8Rng,
    evals: usize,
    iteration: usize,
    best: FreeConfig,
    best_value: f64,
    trace: Vec<(usize, f64)>,
    dirs: Vec<[f64; DIM]>,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evals >= self.opts.budget
    }

    fn note(&mut self, c: &FreeConfig, exact: f64) {
        if exact > self.best_value {
            self.best_value = exact;
            self.best = *c;
            self.trace.push((self.iteration, exact));
        }
    }

    fn surrogate(&mut self, c: &FreeConfig, beta: f64) -> f64 {
        let (exact, surrogate) = score_pair(c, Some(beta));
        self.evals += 1;
        self.note(c, exact);
        surrogate
    }

    fn gradient(&mut self, x: &FreeConfig, beta: f64) -> Option<SVector<f64, DIM>> {
        if self.evals + 2 * DIM > self.opts.budget {
            return None;
        }
        let h = (1e-3 / beta).clamp(1e-8, 1e-5);
        let mut g = SVector::<f64, DIM>::zeros();
        for k in 0..DIM {
            let (mut plus, mut minus) = (*x, *x);
            plus.coords[k] += h;
            minus.coords[k] -= h;
            let (fp, fm) = (self.surrogate(&plus, beta), self.surrogate(&minus, beta));
            if !fp.is_finite() || !fm.is_finite() {
                return None;
            }
            g[k] = (fp - fm) / (2.0 * h);
        }
        Some(g)
    }

    /// Quasi-Newton ascent on the soft-min surrogate with sharpness `beta`.
    fn smooth_stage(&mut self, start: FreeConfig, beta: f64) -> FreeConfig {
        const MAX_STEP: f64 = 0.2;
        let mut x = start;
        if self.exhausted() {
            return x;
        }
        let mut fx = self.surrogate(&x, beta);
        let Some(mut g) = self.gradient(&x, beta) else {
            return x;
        };
        let mut inv_h = SMatrix::<f64, DIM, DIM>::identity();
        let mut fresh = true;
        while !self.exhausted() && g.norm() > 1e-12 {
            self.iteration += 1;
            let mut dir = inv_h * g;
            if dir.dot(&g) <= 0.0 {
                inv_h = SMatrix::identity();
                dir = g;
            }
            let scale = dir.amax();
            if scale > MAX_STEP {
                dir *= MAX_STEP / scale;
            }
            let slope = dir.dot(&g);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                if self.exhausted() {
                    break;
                }
                let mut trial = x;
                for (c, d) in trial.coords.iter_mut().zip(dir.iter()) {
                    *c += t * d;
                }
                let ft = self.surrogate(&trial, beta);
                if ft >= fx + 1e-4 * t * slope {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            let Some((next, f_next)) = accepted else {
                if fresh {
                    break;
                }
                inv_h = SMatrix::identity();
                fresh = true;
                continue;
            };
            let Some(g_next) = self.gradient(&next, beta) else {
                break;
            };
            let step = SVector::<f64, DIM>::from_fn(|k, _| next.coords[k] - x.coords[k]);
            // Minimizing -f: the curvature pair uses the negated gradient change.
            let y = g - g_next;
            let sy = step.dot(&y);
            if sy > 1e-16 {
                let rho = 1.0 / sy;
                let eye = SMatrix::<f64, DIM, DIM>::identity();
                let left = eye - rho * step * y.transpose();
                let right = eye - rho * y * step.transpose();
                inv_h = left * inv_h * right + rho * step * step.transpose();
                fresh = false;
            }
            let gain = f_next - fx;
            x = next;
            fx = f_next;
            g = g_next;
            if step.amax() < 1e-12 || gain.abs() < 1e-15 {
                break;
            }
        }
        x
    }

    /// Pattern search on the exact minimum.
    fn stage(&mut self, start: FreeConfig, step_min: f64) -> FreeConfig {
        let beta = None;
        let mut current = start;
        let mut value = score_pair(&current, beta).1;
        let mut step = self.opts.step0;
        while step >= step_min && !self.exhausted() {
            self.iteration += 1;
            self.dirs.clear();
            for k in 0..DIM {
                for sign in [1.0, -1.0] {
                    let mut d = [0.0; DIM];
                    d[k] = sign;
                    self.dirs.push(d);
                }
            }
            for _ in 0..self.opts.random_dirs {
                let d = random_unit(&mut self.rng);
                self.dirs.push(d);
            }

            let mut best_trial = None;
            let mut best_surrogate = value;
            for n in 0..self.dirs.len() {
                if self.exhausted() {
                    break;
                }
                let mut trial = current;
                for (c, di) in trial.coords.iter_mut().zip(&self.dirs[n]) {
                    *c += step * di;
                }
                let (exact, surrogate) = score_pair(&trial, beta);
                self.evals += 1;
                self.note(&trial, exact);
                if surrogate > best_surrogate {
                    best_surrogate = surrogate;
                    best_trial = Some(trial);
                }
            }
            match best_trial {
                Some(t) => {
                    current = t;
                    value = best_surrogate;
                }
                None => step *= 0.5,
            }
        }
        current
    }
}

/// Pattern search from `seed`. Every iteration polls `+-step` along each
/// coordinate plus `random_dirs` random unit directions, moves to the best
/// strictly improving point, and halves the step when nothing improves.
///
/// Ties between distances make the exact minimum nonsmooth, and polling
/// stalls on those ridges. The search therefore first climbs a sequence of
/// soft-min surrogates of increasing sharpness with BFGS, then runs the
/// pattern search on the exact minimum from the best point found. The returned point is always the best
/// exact value seen, so `d_best` never drops below the seed's value.
pub fn local_maximize(seed: &FreeConfig, opts: &SearchOptions) -> Result<OptResult> {
    if opts.budget == 0 {
        return Err(Error::InvalidArgument(
            "evaluation budget must be >= 1".into(),
        ));
    }
    if !(opts.step0 > 0.0) || !(opts.step_min > 0.0) {
        return Err(Error::InvalidArgument("step sizes must be positive".into()));
    }
    if opts.smoothing.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::InvalidArgument(
            "smoothing sharpness must be > 0".into(),
        ));
    }
    let seed_value = score(seed);
    if !seed_value.is_finite() {
        return Err(Error::InvalidArgument(
            "seed is not a valid chart point".into(),
        ));
    }
    let mut search = Search {
        opts,
        rng: ChaCha8Rng::seed_from_u64(opts.rng_seed),
        evals: 1,
        iteration: 0,
        best: *seed,
        best_value: seed_value,
        trace: vec![(0, seed_value)],
        dirs: Vec::with_capacity(2 * DIM + opts.random_dirs),
    };

    let mut current = *seed;
    for &beta in &opts.smoothing {
        current = search.smooth_stage(current, beta);
    }
    let polish_from = search.best;
    search.stage(polish_from, opts.step_min);

    Ok(OptResult {
        best: search.best,
        d_best: search.best_value,
        r_best: radius_or_inf(search.best_value),
        evals: search.evals,
        trace: search.trace,
        start_index: 0,
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; DIM] {
    loop {
        let mut d = [0.0; DIM];
        for c in d.iter_mut() {
            *c = StandardNormal.sample(rng);
        }
        let n = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            d.iter_mut().for_each(|c| *c /= n);
            return d;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub radius: f64,
    pub trials: usize,
    pub rng_seed: u64,
    pub base_value: f64,
    pub max_found: f64,
    pub exceed_count: usize,
    pub exceed_fraction: f64,
}

/// Samples `trials` perturbations with every chart coordinate moved uniformly
/// in `[-radius, radius]` and records how often the objective improves.
pub fn perturbation_probe(
    c: &FreeConfig,
    radius: f64,
    trials: usize,
    rng_seed: u64,
) -> Result<ProbeReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "probe radius {radius} must be > 0"
        )));
    }
    let base_value = objective(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut max_found = f64::NEG_INFINITY;
    let mut exceed_count = 0;
    for _ in 0..trials {
        let mut trial = *c;
        for x in trial.coords.iter_mut() {
            *x += rng.random_range(-radius..=radius);
        }
        let v = score(&trial);
        max_found = max_found.max(v);
        if v > base_value {
            exceed_count += 1;
        }
    }
    Ok(ProbeReport {
        radius,
        trials,
        rng_seed,
        base_value,
        max_found,
        exceed_count,
        exceed_fraction: exceed_count as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiStartOptions {
    /// Number of noisy starts around `center`.
    pub n_starts: usize,
    pub rng_seed: u64,
    pub budget_each: usize,
    pub sigma: f64,
    pub center: FreeConfig,
    /// Run `center` itself as an extra start.
    pub include_center: bool,
    /// Curve parameters whose configurations are added as extra starts.
    pub curve_seeds: Vec<f64>,
    /// Per-start search settings; `budget` and `rng_seed` are overridden.
    pub search: SearchOptions,
}

impl MultiStartOptions {
    pub fn new(n_starts: usize, rng_seed: u64, budget_each: usize) -> Self {
        Self {
            n_starts,
            rng_seed,
            budget_each,
            sigma: 0.2,
            center: FreeConfig::c6(),
            include_center: false,
            curve_seeds: vec![0.9, 0.7, 0.5],
            search: SearchOptions::default(),
        }
    }
}

/// Best of [`local_maximize`] over noisy starts around `C6(0,0,0)` plus the
/// trajectory points at `x = 0.9, 0.7, 0.5`.
pub fn multi_start(n_starts: usize, rng_seed: u64, budget_each: usize) -> Result<OptResult> {
    multi_start_with(&MultiStartOptions::new(n_starts, rng_seed, budget_each))
}

/// Start `i` uses the random stream `rng_seed + i`; starts run in parallel
/// and the winner is the largest `d_best`, ties going to the lower index.
pub fn multi_start_with(opts: &MultiStartOptions) -> Result<OptResult> {
    if opts.n_starts == 0 {
        return Err(Error::InvalidArgument("need at least one start".into()));
    }
    if !(opts.sigma >= 0.0) {
        return Err(Error::InvalidArgument("sigma must be >= 0".into()));
    }
    let noise = Normal::new(0.0, opts.sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut seeds = Vec::with_capacity(opts.n_starts + opts.curve_seeds.len() + 1);
    for i in 0..opts.n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed.wrapping_add(i as u64));
        let mut c = opts.center;
        for x in c.coords.iter_mut() {
            *x += noise.sample(&mut rng);
        }
        // Keep latitudes inside the chart.
        for k in 0..LINES {
            c.coords[3 * k] = c.coords[3 * k].clamp(-1.5, 1.5);
        }
        seeds.push(c);
    }
    if opts.include_center {
        seeds.push(opts.center);
    }
    for &x in &opts.curve_seeds {
        seeds.push(FreeConfig::curve(x)?);
    }

    let results: Vec<Result<OptResult>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, seed)| {
            let search = SearchOptions {
                budget: opts.budget_each,
                rng_seed: opts.rng_seed.wrapping_add(i as u64),
                ..opts.search.clone()
            };
            local_maximize(seed, &search).map(|mut r| {
                r.start_index = i;
                r
            })
        })
        .collect();

    let mut best: Option<OptResult> = None;
    for r in results {
        let r = r?;
        best = match best {
            Some(b)
                if b.d_best > r.d_best
                    || (b.d_best == r.d_best && b.start_index < r.start_index) =>
            {
                Some(b)
            }
            _ => Some(r),
        };
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use nalgebra::{Rotation3, Vector3};

    use super::*;

    #[test]
    fn objective_landmarks() {
        assert_abs_diff_eq!(objective(&FreeConfig::c6()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            objective(&FreeConfig::record()).unwrap(),
            (12.0f64 / 11.0).sqrt(),
            epsilon = 1e-12
        );
        let mut c = FreeConfig::record();
        c.coords.copy_within(0..3, 3);
        assert_eq!(objective(&c).unwrap(), 0.0);
    }

    #[test]
    fn pole_chart_rejected() {
        let mut c = FreeConfig::c6();
        c.coords[0] = FRAC_PI_2;
        assert!(objective(&c).is_err());
        assert_eq!(score(&c), f64::NEG_INFINITY);
    }

    #[test]
    fn zero_budget_is_an_error() {
        let opts = SearchOptions {
            budget: 0,
            ..SearchOptions::default()
        };
        assert!(local_maximize(&FreeConfig::c6(), &opts).is_err());
    }

    #[test]
    fn rotation_and_permutation_invariance() {
        let c = FreeConfig::curve(0.8).unwrap();
        let base = objective(&c).unwrap();
        let rot = Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(Vector3::new(0.3, -1.0, 0.7)),
            0.9,
        );
        let rotated =
            FreeConfig::from_configuration(&c.to_configuration().unwrap().rotated(&rot)).unwrap();
        assert_abs_diff_eq!(objective(&rotated).unwrap(), base, epsilon = 1e-10);
        let mut perm = c;
        perm.coords.rotate_left(6);
        assert_eq!(objective(&perm).unwrap(), base);
    }

    #[test]
    fn search_is_monotone_and_deterministic() {
        let mut seed = FreeConfig::c6();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for x in seed.coords.iter_mut() {
            *x += rng.random_range(-1e-2..1e-2);
        }
        let opts = SearchOptions {
            budget: 5_000,
            rng_seed: 3,
            ..SearchOptions::default()
        };
        let a = local_maximize(&seed, &opts).unwrap();
        let b = local_maximize(&seed, &opts).unwrap();
        assert_eq!(a.d_best.to_bits(), b.d_best.to_bits());
        assert!(a.d_best >= objective(&seed).unwrap() - 1e-12);
        assert!(a.trace.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(a.evals <= opts.budget);
        assert_abs_diff_eq!(a.d_best, objective(&a.best).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn probe_argument_checks() {
        let c = FreeConfig::c6();
        assert!(perturbation_probe(&c, 0.0, 10, 1).is_err());
        assert!(perturbation_probe(&c, 1e-3, 0, 1).is_err());
    }

    #[test]
    fn tiny_probe_sees_base_value() {
        let c = FreeConfig::record();
        let r = perturbation_probe(&c, 1e-15, 100, 5).unwrap();
        assert_abs_diff_eq!(r.max_found, r.base_value, epsilon = 1e-12);
    }

    #[test]
    fn trajectory_seed_climbs_to_record() {
        let seed = FreeConfig::curve(0.9).unwrap();
        let opts = SearchOptions {
            budget: 50_000,
            ..SearchOptions::default()
        };
        let r = local_maximize(&seed, &opts).unwrap();
        assert!(r.d_best > objective(&seed).unwrap() + 1e-2);
        assert!(r.d_best > (12.0f64 / 11.0).sqrt() - 1e-4);
        assert!(r.evals <= opts.budget);
    }

    #[test]
    fn budget_is_respected() {
        for budget in [1, 7, 40, 1_000] {
            let opts = SearchOptions {
                budget,
                ..SearchOptions::default()
            };
            let r = local_maximize(&FreeConfig::curve(0.7).unwrap(), &opts).unwrap();
            assert!(r.evals <= budget, "{} > {budget}", r.evals);
        }
    }

    #[test]
    fn multi_start_needs_a_start() {
        assert!(multi_start(0, 1, 10).is_err());
    }
}
