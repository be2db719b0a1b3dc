//! The one-sided full shift on two symbols with weighted metrics
//! `d(x, y) = sum_{n >= 1} b_n |x_n - y_n|`.
//!
//! Points are a finite word followed by a periodic tail, so every distance
//! with geometric weights is a finite closed form; power-law weights carry an
//! explicit tail radius.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contractions::{ContractionKind, ContractionSeq, REL_SLACK};
use crate::error::{Error, Result};
use crate::zooming::LocalSampler;

/// Default word length for sampled points.
pub const DEFAULT_WORD_LEN: usize = 64;

/// Default summation horizon for power-law weights.
pub const DEFAULT_METRIC_HORIZON: usize = 4096;

/// Slack on cylinder contraction ratios.
pub const CYLINDER_SLACK: f64 = 1e-9;

const MAX_TAIL_BLOCK: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolicPoint {
    pub symbols: Vec<u8>,
    /// Repeated forever after `symbols`.
    pub tail: Vec<u8>,
}

impl SymbolicPoint {
    pub fn new(symbols: Vec<u8>, tail: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() || tail.is_empty() {
            return Err(Error::InvalidInput("word and tail must be nonempty".into()));
        }
        if symbols.iter().chain(&tail).any(|&s| s > 1) {
            return Err(Error::InvalidInput("symbols must be 0 or 1".into()));
        }
        Ok(Self { symbols, tail })
    }

    /// `symbols` followed by `000...`.
    pub fn with_zero_tail(symbols: Vec<u8>) -> Result<Self> {
        Self::new(symbols, vec![0])
    }

    pub fn random(len: usize, rng: &mut ChaCha8Rng) -> Self {
        let symbols = (0..len.max(1)).map(|_| rng.random_range(0..2u8)).collect();
        Self {
            symbols,
            tail: vec![0],
        }
    }

    /// The `n`-th symbol, `n >= 1`.
    #[inline]
    pub fn symbol(&self, n: usize) -> u8 {
        debug_assert!(n >= 1);
        if n <= self.symbols.len() {
            self.symbols[n - 1]
        } else {
            self.tail[(n - self.symbols.len() - 1) % self.tail.len()]
        }
    }

    pub fn shift(&self) -> Self {
        if self.symbols.len() > 1 {
            Self {
                symbols: self.symbols[1..].to_vec(),
                tail: self.tail.clone(),
            }
        } else {
            let mut tail = self.tail.clone();
            tail.rotate_left(1);
            Self {
                symbols: vec![self.tail[0]],
                tail,
            }
        }
    }

    pub fn shift_by(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.shift())
    }

    /// The same sequence with a word of at least `len` symbols.
    pub fn extended(&self, len: usize) -> Self {
        let mut symbols = self.symbols.clone();
        while symbols.len() < len {
            symbols.push(self.symbol(symbols.len() + 1));
        }
        let tail_start = symbols.len() + 1;
        let tail = (0..self.tail.len())
            .map(|i| self.symbol(tail_start + i))
            .collect();
        Self { symbols, tail }
    }

    /// Length of the common prefix, capped at `limit`.
    pub fn common_prefix(&self, other: &Self, limit: usize) -> usize {
        (1..=limit)
            .take_while(|&n| self.symbol(n) == other.symbol(n))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Weights {
    /// `b_n = c q^n`.
    Geometric { c: f64, q: f64 },
    /// `b_n = (n + b)^{-a}`.
    Power { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedShiftMetric {
    pub weights: Weights,
    /// Terms summed explicitly before the tail bound (power weights).
    pub horizon: usize,
    /// Largest acceptable error radius.
    pub max_radius: Option<f64>,
}

impl WeightedShiftMetric {
    pub fn geometric(c: f64, q: f64) -> Result<Self> {
        if !(c > 0.0 && q > 0.0 && q < 1.0) {
            return Err(Error::InvalidInput(format!(
                "geometric weights need c > 0 and 0 < q < 1, got c = {c}, q = {q}"
            )));
        }
        Ok(Self {
            weights: Weights::Geometric { c, q },
            horizon: DEFAULT_METRIC_HORIZON,
            max_radius: None,
        })
    }

    /// `b_n = 2^{-n}`.
    pub fn standard() -> Self {
        Self::geometric(1.0, 0.5).expect("valid")
    }

    pub fn power(a: f64, b: f64) -> Result<Self> {
        if !(a > 1.0 && b > -1.0) {
            return Err(Error::InvalidInput(format!(
                "power weights need a > 1 and b > -1, got a = {a}, b = {b}"
            )));
        }
        Ok(Self {
            weights: Weights::Power { a, b },
            horizon: DEFAULT_METRIC_HORIZON,
            max_radius: None,
        })
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon.max(1);
        self
    }

    pub fn with_max_radius(mut self, r: f64) -> Self {
        self.max_radius = Some(r);
        self
    }

    #[inline]
    pub fn weight(&self, n: usize) -> f64 {
        match self.weights {
            Weights::Geometric { c, q } => c * q.powi(n as i32),
            Weights::Power { a, b } => (n as f64 + b).powf(-a),
        }
    }

    /// Upper bound on `sum_{m > n} b_m`.
    pub fn tail_bound(&self, n: usize) -> f64 {
        match self.weights {
            Weights::Geometric { q, .. } => self.weight(n) * q / (1.0 - q),
            Weights::Power { a, b } => (n as f64 + b).powf(1.0 - a) / (a - 1.0),
        }
    }

    pub fn describe(&self) -> String {
        match self.weights {
            Weights::Geometric { c, q } => format!("b_n = {c} * {q}^n"),
            Weights::Power { a, b } => format!("b_n = (n + {b})^-{a}"),
        }
    }
}

/// A distance with its certified error radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValue {
    pub value: f64,
    pub radius: f64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn shift_metric(x: &SymbolicPoint, y: &SymbolicPoint, m: &WeightedShiftMetric) -> Result<MetricValue> {
    let k = x.symbols.len().max(y.symbols.len());
    let (px, py) = (x.tail.len(), y.tail.len());
    let period = px / gcd(px, py) * py;
    if period > MAX_TAIL_BLOCK {
        return Err(Error::InvalidInput(format!("tail period {period} is too long")));
    }
    let diff = |n: usize| (x.symbol(n) != y.symbol(n)) as u8 as f64;
    let tail_differs = (k + 1..=k + period).any(|n| diff(n) != 0.0);

    let out = match m.weights {
        Weights::Geometric { q, .. } => {
            let head: f64 = (1..=k).map(|n| m.weight(n) * diff(n)).sum();
            let block: f64 = (k + 1..=k + period).map(|n| m.weight(n) * diff(n)).sum();
            MetricValue {
                value: head + block / (1.0 - q.powi(period as i32)),
                radius: 0.0,
            }
        }
        Weights::Power { .. } => {
            let h = m.horizon.max(k);
            let head: f64 = (1..=h).map(|n| m.weight(n) * diff(n)).sum();
            if tail_differs {
                let u = m.tail_bound(h);
                MetricValue {
                    value: head + 0.5 * u,
                    radius: 0.5 * u,
                }
            } else {
                MetricValue {
                    value: head,
                    radius: 0.0,
                }
            }
        }
    };
    if let Some(req) = m.max_radius {
        if out.radius > req {
            return Err(Error::Precision {
                radius: out.radius,
                requested: req,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct NonExponentialWitness {
    pub a1: f64,
    /// Largest `n_0 > 1` with `b_n > a_1^n` for every `n <= n_0`, if any.
    pub n0: Option<usize>,
    /// Whether `a_1 >= b_1`, the second half of the witness condition.
    pub a1_dominates_b1: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightReport {
    pub valid: bool,
    pub submultiplicative: bool,
    /// First `(n, k)` with `b_{n+k} > b_n b_k`.
    pub counterexample: Option<(usize, usize)>,
    pub equality_cases: usize,
    pub summable: bool,
    pub fekete: bool,
    /// First `n` with `b_n > b_1^n`.
    pub fekete_counterexample: Option<usize>,
    pub witness: Option<NonExponentialWitness>,
    pub n_max: usize,
}

/// Checks `b_{n+k} <= b_n b_k` for `n + k <= n_max`, summability and
/// `b_n <= b_1^n`. When `a1` is given, also reports the non-exponential
/// witness condition `b_n > a_1^n >= b_1^n` as a diagnostic.
pub fn validate_weights(m: &WeightedShiftMetric, n_max: usize, a1: Option<f64>) -> Result<WeightReport> {
    if n_max < 2 {
        return Err(Error::InvalidInput("n_max must be >= 2".into()));
    }
    let b: Vec<f64> = (0..=n_max)
        .map(|n| if n == 0 { 1.0 } else { m.weight(n) })
        .collect();
    let mut counterexample = None;
    let mut equality_cases = 0;
    'outer: for n in 1..n_max {
        for k in 1..=n_max - n {
            let lhs = b[n + k];
            let rhs = b[n] * b[k];
            if lhs > rhs * (1.0 + REL_SLACK) {
                counterexample = Some((n, k));
                break 'outer;
            }
            if (lhs - rhs).abs() <= REL_SLACK * rhs {
                equality_cases += 1;
            }
        }
    }
    let summable = match m.weights {
        Weights::Geometric { q, .. } => q < 1.0,
        Weights::Power { a, .. } => a > 1.0,
    };
    let fekete_counterexample = (1..=n_max).find(|&n| b[n] > b[1].powi(n as i32) * (1.0 + REL_SLACK));
    let witness = a1.map(|a1| {
        let run = (2..=n_max).take_while(|&n| b[n] > a1.powi(n as i32)).last();
        NonExponentialWitness {
            a1,
            n0: run,
            a1_dominates_b1: a1 >= b[1],
        }
    });
    let submultiplicative = counterexample.is_none();
    let fekete = fekete_counterexample.is_none();
    Ok(WeightReport {
        valid: submultiplicative && summable && fekete,
        submultiplicative,
        counterexample,
        equality_cases,
        summable,
        fekete,
        fekete_counterexample,
        witness,
        n_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationNote {
    pub checked_to: usize,
    /// Whether `b_n <= a_n` for all `n > checked_to` follows by induction.
    pub proved_beyond: bool,
    pub note: String,
}

/// Checks `b_n <= a_n` up to the metric horizon and tries to extend it to all
/// `n` by showing `b_n / a_n` is non-increasing from there on.
pub fn check_domination(m: &WeightedShiftMetric, seq: &ContractionSeq) -> Result<DominationNote> {
    let h = m.horizon;
    for n in 1..=h {
        let a = seq
            .coefficient(n)
            .ok_or_else(|| Error::InvalidInput(format!("contraction has no coefficient at n = {n}")))?;
        if m.weight(n) > a * (1.0 + REL_SLACK) {
            return Err(Error::Hypothesis(format!(
                "domination b_n <= a_n fails at n = {n}: {} > {a}",
                m.weight(n)
            )));
        }
    }
    // step ratio of b_n / a_n for n >= h
    let step = match (m.weights, &seq.kind) {
        (Weights::Geometric { q, .. }, ContractionKind::Power { a, b }) => {
            Some(q * ((h as f64 + 1.0 + b) / (h as f64 + b)).powf(*a))
        }
        (Weights::Geometric { q, .. }, ContractionKind::Exponential { rate }) => Some(q * rate.exp()),
        _ => None,
    };
    let proved_beyond = step.is_some_and(|s| s <= 1.0);
    let note = match step {
        Some(s) if s <= 1.0 => format!(
            "b_n <= a_n checked for n <= {h}; b_(n+1)/a_(n+1) <= {s:.6} * b_n/a_n for n >= {h}, so it holds for all n by induction"
        ),
        Some(s) => format!("b_n <= a_n checked for n <= {h}; ratio step {s:.6} > 1, no induction beyond"),
        None => format!("b_n <= a_n checked for n <= {h}; no induction available for this pair"),
    };
    Ok(DominationNote {
        checked_to: h,
        proved_beyond,
        note,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderCertificate {
    pub pass: bool,
    pub vacuous: bool,
    pub depth: usize,
    /// `max_i d(s^i x, s^i y) / (a_{k-i} d(s^k x, s^k y))`.
    pub worst_ratio: f64,
    pub worst_i: Option<usize>,
    /// `d(x, y) / d(s^k x, s^k y)`.
    pub base_ratio: f64,
    pub domination: DominationNote,
}

/// For `x, y` in a common cylinder `C_k`, checks
/// `d(s^i x, s^i y) <= a_{k-i} d(s^k x, s^k y)` for `0 <= i < k`.
pub fn cylinder_contraction_check(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    k: usize,
    m: &WeightedShiftMetric,
    seq: &ContractionSeq,
) -> Result<CylinderCertificate> {
    if x.common_prefix(y, k) < k {
        return Err(Error::Precondition(format!(
            "points do not share the first {k} symbols"
        )));
    }
    let domination = check_domination(m, seq)?;
    cylinder_ratios(x, y, k, m, seq, domination)
}

fn cylinder_ratios(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    k: usize,
    m: &WeightedShiftMetric,
    seq: &ContractionSeq,
    domination: DominationNote,
) -> Result<CylinderCertificate> {
    if k == 0 {
        return Ok(CylinderCertificate {
            pass: true,
            vacuous: true,
            depth: 0,
            worst_ratio: 1.0,
            worst_i: None,
            base_ratio: 1.0,
            domination,
        });
    }
    let (mut sx, mut sy) = (x.clone(), y.clone());
    let mut dists = Vec::with_capacity(k + 1);
    for i in 0..=k {
        dists.push(shift_metric(&sx, &sy, m)?);
        if i < k {
            sx = sx.shift();
            sy = sy.shift();
        }
    }
    let top = dists[k];
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_i = None;
    for (i, d) in dists[..k].iter().enumerate() {
        let a = seq
            .coefficient(k - i)
            .ok_or_else(|| Error::InvalidInput(format!("no coefficient at {}", k - i)))?;
        let bound = a * top.value;
        let ratio = if bound > 0.0 {
            d.value / bound
        } else if d.value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > worst_ratio || worst_i.is_none() {
            worst_ratio = worst_ratio.max(ratio);
            worst_i = Some(i);
        }
        if d.value - d.radius > a * (top.value + top.radius) * (1.0 + CYLINDER_SLACK) {
            pass = false;
        }
    }
    let base_ratio = if top.value > 0.0 {
        dists[0].value / top.value
    } else {
        0.0
    };
    Ok(CylinderCertificate {
        pass,
        vacuous: false,
        depth: k,
        worst_ratio,
        worst_i,
        base_ratio,
        domination,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthSummary {
    pub depth: usize,
    pub pairs: usize,
    pub worst_ratio: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderBatch {
    pub pass: bool,
    pub pairs: usize,
    pub failures: usize,
    pub worst_ratio: f64,
    pub per_depth: Vec<DepthSummary>,
    pub domination: DominationNote,
    pub seed: u64,
}

/// Random cylinder pairs: depth `k` uniform in `0..=max_depth`, a shared
/// random prefix of length `k`, then independent random words up to `len`.
pub fn random_cylinder_batch(
    m: &WeightedShiftMetric,
    seq: &ContractionSeq,
    pairs: usize,
    max_depth: usize,
    len: usize,
    seed: u64,
) -> Result<CylinderBatch> {
    if len <= max_depth {
        return Err(Error::InvalidInput(format!(
            "word length {len} must exceed the cylinder depth {max_depth}"
        )));
    }
    let domination = check_domination(m, seq)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_depth: Vec<DepthSummary> = (0..=max_depth)
        .map(|depth| DepthSummary {
            depth,
            pairs: 0,
            worst_ratio: 0.0,
            failures: 0,
        })
        .collect();
    for _ in 0..pairs {
        let k = rng.random_range(0..=max_depth);
        let x = SymbolicPoint::random(len, &mut rng);
        let mut y = SymbolicPoint::random(len, &mut rng);
        y.symbols[..k].copy_from_slice(&x.symbols[..k]);
        let cert = cylinder_ratios(&x, &y, k, m, seq, domination.clone())?;
        let slot = &mut per_depth[k];
        slot.pairs += 1;
        slot.worst_ratio = slot.worst_ratio.max(cert.worst_ratio);
        slot.failures += (!cert.pass) as usize;
    }
    let failures = per_depth.iter().map(|d| d.failures).sum();
    Ok(CylinderBatch {
        pass: failures == 0,
        pairs,
        failures,
        worst_ratio: per_depth.iter().map(|d| d.worst_ratio).fold(0.0, f64::max),
        per_depth,
        domination,
        seed,
    })
}

/// The shift map with a weighted metric, for local expansion estimates.
#[derive(Debug, Clone, Copy)]
pub struct ShiftSpace {
    pub metric: WeightedShiftMetric,
}

impl LocalSampler for ShiftSpace {
    type Point = SymbolicPoint;

    fn step(&self, p: &SymbolicPoint) -> SymbolicPoint {
        p.shift()
    }

    fn dist(&self, a: &SymbolicPoint, b: &SymbolicPoint) -> f64 {
        shift_metric(a, b, &self.metric)
            .map(|v| v.value)
            .unwrap_or(f64::NAN)
    }

    /// Flips the first symbol whose tail mass fits in `r` and randomizes a
    /// few symbols after it.
    fn neighbour(&self, p: &SymbolicPoint, r: f64, rng: &mut ChaCha8Rng) -> SymbolicPoint {
        let m = &self.metric;
        let n0 = (1..)
            .find(|&n| m.weight(n) + m.tail_bound(n) <= r)
            .expect("weights are summable");
        let mut q = p.extended(n0 + 16);
        q.symbols[n0 - 1] ^= 1;
        for s in &mut q.symbols[n0..n0 + 16] {
            if rng.random::<bool>() {
                *s ^= 1;
            }
        }
        q
    }
}
