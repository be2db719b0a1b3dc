//! Hyperbolic times along orbits, their empirical frequency, pre-ball
//! contraction and distortion checks, and point estimates of the local
//! expansion bounds `D^-` / `D^+`.
//!
//! A time `n` is a `(sigma, epsilon)`-hyperbolic time for `x` when, for every
//! `1 <= k <= n`,
//!
//! ```text
//! prod_{j=n-k}^{n-1} ‖Df(f^j x)^{-1}‖ <= sigma^k
//! dist_epsilon(f^{n-k} x, C)        >= sigma^{b k}
//! ```
//!
//! Both families are evaluated in log space with running extrema, which is
//! equivalent to the O(n^2) double loop but linear in the horizon.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contractions::ContractionSeq;
use crate::dynamics::{iterate, log_inverse_norms, BranchedMap, Domain, DynamicalSystem, CRITICAL_THRESHOLD};
use crate::error::{Error, Result};

/// Sampling seed used when none is given.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Relative slack on pre-ball contraction ratios.
pub const PREBALL_SLACK: f64 = 1e-9;

/// Orbit points closer than this to a branch boundary make the pre-ball
/// itinerary ambiguous.
pub const AMBIGUITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicParams {
    pub sigma: f64,
    pub epsilon: f64,
    pub b_exp: f64,
    /// Order of the critical set; 0 when it is empty.
    pub beta: f64,
}

impl HyperbolicParams {
    /// Uses the recurrence exponent `b = min(1, 1/beta) / 3`.
    pub fn new(sigma: f64, epsilon: f64, beta: f64) -> Result<Self> {
        Self::with_b(sigma, epsilon, beta, Self::b_cap(beta) / 1.5)
    }

    pub fn with_b(sigma: f64, epsilon: f64, beta: f64, b_exp: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidInput(format!(
                "sigma must lie in (0, 1), got {sigma}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        let cap = Self::b_cap(beta);
        if !(b_exp > 0.0 && b_exp <= cap) {
            return Err(Error::InvalidInput(format!(
                "recurrence exponent must lie in (0, {cap}], got {b_exp}"
            )));
        }
        Ok(Self {
            sigma,
            epsilon,
            b_exp,
            beta,
        })
    }

    /// `min(1, 1/beta) / 2`.
    fn b_cap(beta: f64) -> f64 {
        let m = if beta > 1.0 { 1.0 / beta } else { 1.0 };
        0.5 * m
    }
}

/// `dist_delta(p, C)`: the distance when it is below `delta`, else 1.
/// An empty critical set (`None`) is always far.
pub fn truncated_distance(dist_to_critical: Option<f64>, delta: f64) -> f64 {
    match dist_to_critical {
        Some(d) if d < delta => d,
        _ => 1.0,
    }
}

/// [`truncated_distance`] against an explicit list of critical points on the
/// line.
pub fn truncated_distance_to_set(p: f64, critical_set: &[f64], delta: f64) -> f64 {
    let d = critical_set.iter().map(|c| (p - c).abs()).min_by(f64::total_cmp);
    truncated_distance(d, delta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeRecord {
    pub indices: Vec<usize>,
    pub horizon: usize,
    pub frequency: f64,
}

pub fn detect_hyperbolic_times<M: DynamicalSystem>(
    map: &M,
    x: M::Point,
    params: &HyperbolicParams,
    horizon: usize,
) -> Result<TimeRecord> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be >= 1".into()));
    }
    let logs = log_inverse_norms(map, x, horizon)?;
    let orbit = iterate(map, x, horizon - 1)?;
    let log_sigma = params.sigma.ln();
    let rec_rate = params.b_exp * -log_sigma;

    let scale = 1.0 + logs.iter().map(|l| l.abs()).sum::<f64>() + horizon as f64 * -log_sigma;
    let slack = 1e-12 * scale;

    let mut indices = Vec::new();
    // q_m = P_m - m log sigma; the product condition at n reads q_n <= min_{m<n} q_m
    let mut prefix = 0.0;
    let mut min_q = 0.0;
    // n must exceed m + (-log dist_m) / (b |log sigma|) for every m < n
    let mut recurrence_floor = f64::NEG_INFINITY;
    for n in 1..=horizon {
        let m = n - 1;
        let dist = truncated_distance(map.critical_distance(&orbit.points[m]), params.epsilon);
        let need = -dist.ln();
        let floor = m as f64 + (need - 1e-12 * (1.0 + need.abs())) / rec_rate;
        recurrence_floor = recurrence_floor.max(floor);

        prefix += logs[m];
        let q = prefix - n as f64 * log_sigma;
        if q <= min_q + slack && n as f64 >= recurrence_floor {
            indices.push(n);
        }
        min_q = min_q.min(q);
    }
    let frequency = indices.len() as f64 / horizon as f64;
    Ok(TimeRecord {
        indices,
        horizon,
        frequency,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyStats {
    pub per_point: Vec<f64>,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub horizon: usize,
}

/// Empirical frequency of hyperbolic times over a sample of starting points.
pub fn hyperbolic_frequency<M: DynamicalSystem>(
    map: &M,
    sample: &[M::Point],
    params: &HyperbolicParams,
    horizon: usize,
) -> Result<FrequencyStats> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be >= 1".into()));
    }
    if sample.is_empty() {
        return Err(Error::InvalidInput("sample must be nonempty".into()));
    }
    let per_point = sample
        .par_iter()
        .map(|p| detect_hyperbolic_times(map, *p, params, horizon).map(|r| r.frequency))
        .collect::<Result<Vec<_>>>()?;
    let min = per_point.iter().copied().fold(f64::INFINITY, f64::min);
    let max = per_point.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok(FrequencyStats {
        per_point,
        min,
        mean,
        max,
        horizon,
    })
}

/// Finite-time expansion and recurrence averages along an orbit:
/// `(1/n) sum log ‖Df(f^i p)^{-1}‖^{-1}` and `(1/n) sum -log dist_delta(f^i p, C)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpansionAverages {
    pub expansion: f64,
    pub recurrence: f64,
}

pub fn expansion_averages<M: DynamicalSystem>(
    map: &M,
    p: M::Point,
    delta: f64,
    n: usize,
) -> Result<ExpansionAverages> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one step".into()));
    }
    let logs = log_inverse_norms(map, p, n)?;
    let orbit = iterate(map, p, n - 1)?;
    let recurrence = orbit
        .points
        .iter()
        .map(|q| -truncated_distance(map.critical_distance(q), delta).ln())
        .sum::<f64>();
    Ok(ExpansionAverages {
        expansion: -logs.iter().sum::<f64>() / n as f64,
        recurrence: recurrence / n as f64,
    })
}

fn check_itinerary<M: BranchedMap>(map: &M, x: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("pre-ball time must be >= 1".into()));
    }
    let orbit = iterate(map, x, n)?;
    for (j, &p) in orbit.points[..n].iter().enumerate() {
        let gap = map.branch_boundary_distance(p);
        if gap < AMBIGUITY_THRESHOLD {
            return Err(Error::Ambiguous {
                index: j,
                reason: format!("orbit point {p} is {gap:e} from a branch boundary"),
            });
        }
    }
    Ok(orbit.points)
}

fn sample_in_ball<M: BranchedMap>(map: &M, center: f64, delta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let offset = rng.random_range(-delta..delta);
    match map.domain() {
        Domain::Interval { lo, hi } => {
            let y = center + offset;
            if y < lo || y > hi {
                (center - offset).clamp(lo, hi)
            } else {
                y
            }
        }
        _ => crate::dynamics::wrap(center + offset),
    }
}

/// Pulls `y_n` back along the itinerary of `orbit`, returning `y_0..=y_n`.
fn pull_back<M: BranchedMap>(map: &M, orbit: &[f64], y_n: f64) -> Result<Vec<f64>> {
    let n = orbit.len() - 1;
    let mut chain = vec![0.0; n + 1];
    chain[n] = y_n;
    for j in (0..n).rev() {
        chain[j] = map
            .local_inverse(orbit[j], orbit[j + 1], chain[j + 1])
            .ok_or_else(|| Error::Ambiguous {
                index: j,
                reason: "pre-ball leaves the domain of the local inverse branch".into(),
            })?;
    }
    Ok(chain)
}

fn sample_pairs<M: BranchedMap>(
    map: &M,
    orbit: &[f64],
    pairs: usize,
    delta: f64,
    seed: u64,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ball radius must be positive, got {delta}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = orbit[orbit.len() - 1];
    (0..pairs)
        .map(|_| {
            let y = sample_in_ball(map, center, delta, &mut rng);
            let z = sample_in_ball(map, center, delta, &mut rng);
            Ok((pull_back(map, orbit, y)?, pull_back(map, orbit, z)?))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PreballReport {
    pub pass: bool,
    /// `max d(f^j y, f^j z) / alpha_{n-j}(d(f^n y, f^n z))` over pairs and `j`.
    pub worst_ratio: f64,
    /// `(pair index, j)` attaining the worst ratio.
    pub worst_at: Option<(usize, usize)>,
    pub pairs: usize,
    pub seed: u64,
}

/// Samples pairs in the pre-ball obtained by pulling back `B_delta(f^n x)`
/// along the branch itinerary of `x` and checks
/// `d(f^j y, f^j z) <= alpha_{n-j}(d(f^n y, f^n z))` for `0 <= j < n`.
pub fn verify_preball_contraction<M: BranchedMap>(
    map: &M,
    x: f64,
    n: usize,
    seq: &ContractionSeq,
    pairs: usize,
    delta: f64,
    seed: u64,
) -> Result<PreballReport> {
    let orbit = check_itinerary(map, x, n)?;
    let samples = sample_pairs(map, &orbit, pairs, delta, seed)?;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_at = None;
    for (i, (y, z)) in samples.iter().enumerate() {
        let top = map.distance(&y[n], &z[n]);
        if top == 0.0 {
            continue;
        }
        for j in 0..n {
            let bound = seq
                .alpha(n - j, top)
                .ok_or_else(|| Error::InvalidInput(format!("contraction has no value at index {}", n - j)))?;
            let ratio = map.distance(&y[j], &z[j]) / bound;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_at = Some((i, j));
            }
        }
    }
    Ok(PreballReport {
        pass: worst_ratio <= 1.0 + PREBALL_SLACK,
        worst_ratio,
        worst_at,
        pairs,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    /// Smallest `rho` with `|log J^n(y) / J^n(z)| <= rho d(f^n y, f^n z)` on
    /// every sampled pair.
    pub rho_hat: f64,
    pub samples: usize,
    /// `(y, z, n)` attaining `rho_hat`.
    pub worst_pair: Option<(f64, f64, usize)>,
    pub seed: u64,
}

pub fn check_bounded_distortion<M: BranchedMap>(
    map: &M,
    x: f64,
    n: usize,
    pairs: usize,
    delta: f64,
    seed: u64,
) -> Result<DistortionReport> {
    let orbit = check_itinerary(map, x, n)?;
    let samples = sample_pairs(map, &orbit, pairs, delta, seed)?;
    let log_jac = |chain: &[f64]| -> Result<f64> {
        chain[..n]
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let jac = map.jacobian(p);
                if jac < CRITICAL_THRESHOLD {
                    Err(Error::Singularity {
                        index: j,
                        point: format!("{p:?}"),
                    })
                } else {
                    Ok(jac.ln())
                }
            })
            .sum()
    };
    let mut rho_hat: f64 = 0.0;
    let mut worst_pair = None;
    for (y, z) in &samples {
        let top = map.distance(&y[n], &z[n]);
        if top == 0.0 {
            continue;
        }
        let rho = (log_jac(y)? - log_jac(z)?).abs() / top;
        if rho > rho_hat || worst_pair.is_none() {
            rho_hat = rho_hat.max(rho);
            worst_pair = Some((y[0], z[0], n));
        }
    }
    Ok(DistortionReport {
        rho_hat,
        samples: samples.len(),
        worst_pair,
        seed,
    })
}

/// Systems on which displacement ratios `d(f q, f p) / d(q, p)` can be
/// sampled at a prescribed scale.
pub trait LocalSampler {
    type Point: Clone;

    fn step(&self, p: &Self::Point) -> Self::Point;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// A point `q` with `0 < d(q, p) <= r`.
    fn neighbour(&self, p: &Self::Point, r: f64, rng: &mut ChaCha8Rng) -> Self::Point;
}

fn line_neighbour<M: BranchedMap>(map: &M, p: f64, r: f64, rng: &mut ChaCha8Rng) -> f64 {
    let step = r * rng.random_range(0.5..=1.0);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    match map.domain() {
        Domain::Interval { lo, hi } => {
            let q = p + sign * step;
            if q < lo || q > hi {
                p - sign * step
            } else {
                q
            }
        }
        _ => crate::dynamics::wrap(p + sign * step),
    }
}

macro_rules! line_sampler {
    ($ty:ty) => {
        impl LocalSampler for $ty {
            type Point = f64;

            fn step(&self, p: &f64) -> f64 {
                self.forward(p)
            }

            fn dist(&self, a: &f64, b: &f64) -> f64 {
                self.distance(a, b)
            }

            fn neighbour(&self, p: &f64, r: f64, rng: &mut ChaCha8Rng) -> f64 {
                line_neighbour(self, *p, r, rng)
            }
        }
    };
}

line_sampler!(crate::families::ExpandingCircle);
line_sampler!(crate::families::QuadraticMap);

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionBounds {
    pub d_minus: f64,
    pub d_plus: f64,
    /// `(radius, min ratio, max ratio)` for every radius, largest first.
    pub per_radius: Vec<(f64, f64, f64)>,
}

/// Estimates `D^-(p)` and `D^+(p)` by the extreme displacement ratios at the
/// smallest radius.
pub fn local_expansion_bounds<S: LocalSampler>(
    sys: &S,
    p: &S::Point,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<ExpansionBounds> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("radii must be strictly decreasing".into()));
    }
    if samples_per_radius < 8 {
        return Err(Error::InvalidInput("need at least 8 samples per radius".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let image = sys.step(p);
    let per_radius: Vec<_> = radii
        .iter()
        .map(|&r| {
            let (lo, hi) = (0..samples_per_radius).fold((f64::INFINITY, 0.0f64), |(lo, hi), _| {
                let q = sys.neighbour(p, r, &mut rng);
                let ratio = sys.dist(&sys.step(&q), &image) / sys.dist(&q, p);
                (lo.min(ratio), hi.max(ratio))
            });
            (r, lo, hi)
        })
        .collect();
    let &(_, d_minus, d_plus) = per_radius.last().expect("nonempty radii");
    Ok(ExpansionBounds {
        d_minus,
        d_plus,
        per_radius,
    })
}
