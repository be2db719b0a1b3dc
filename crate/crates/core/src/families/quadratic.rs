use serde::Serialize;

use super::log_slack;
use crate::dynamics::{BranchedMap, Domain, DynamicalSystem};
use crate::error::{Error, Result};

/// Order of the critical point `c = 0` of `a - x^2`.
pub const CRITICAL_ORDER: f64 = 2.0;

/// `Q_a(x) = a - x^2` on its invariant interval `[-r, r]`,
/// `r = (1 + sqrt(1 + 4a)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticMap {
    a: f64,
    radius: f64,
}

impl QuadraticMap {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 2.0) {
            return Err(Error::InvalidInput(format!(
                "quadratic parameter must lie in (0, 2], got {a}"
            )));
        }
        let radius = 0.5 * (1.0 + (1.0 + 4.0 * a).sqrt());
        Ok(Self { a, radius })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Half-width of the invariant interval.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The critical value `Q(0) = a`.
    pub fn critical_value(&self) -> f64 {
        self.a
    }
}

impl DynamicalSystem for QuadraticMap {
    type Point = f64;

    fn name(&self) -> String {
        format!("quadratic:a={}", self.a)
    }

    fn domain(&self) -> Domain {
        Domain::Interval {
            lo: -self.radius,
            hi: self.radius,
        }
    }

    fn contains(&self, p: &f64) -> bool {
        p.abs() <= self.radius + 1e-12
    }

    #[inline]
    fn forward(&self, p: &f64) -> f64 {
        self.a - p * p
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn expansion(&self, p: &f64) -> f64 {
        2.0 * p.abs()
    }

    fn jacobian(&self, p: &f64) -> f64 {
        2.0 * p.abs()
    }

    fn critical_distance(&self, p: &f64) -> Option<f64> {
        Some(p.abs())
    }
}

impl BranchedMap for QuadraticMap {
    fn degree(&self) -> usize {
        2
    }

    fn branch(&self, j: usize, x: f64) -> Option<f64> {
        if x > self.a || j > 1 {
            return None;
        }
        let s = (self.a - x).sqrt();
        Some(if j == 0 { -s } else { s })
    }

    fn branch_index(&self, y: f64) -> usize {
        usize::from(y >= 0.0)
    }

    fn branch_boundary_distance(&self, y: f64) -> f64 {
        y.abs()
    }

    fn derivative(&self, x: f64) -> f64 {
        -2.0 * x
    }

    fn full_branches(&self) -> bool {
        (self.radius - self.a).abs() < 1e-12
    }

    fn critical_points(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn interval_image(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let (qa, qb) = (self.forward(&lo), self.forward(&hi));
        let top = if lo <= 0.0 && hi >= 0.0 {
            self.a
        } else {
            qa.max(qb)
        };
        let bottom = qa.min(qb).max(-self.radius);
        vec![(bottom, top.min(self.radius))]
    }

    fn local_inverse(&self, pre_center: f64, _image_center: f64, y: f64) -> Option<f64> {
        if y > self.a {
            return None;
        }
        let s = (self.a - y).sqrt();
        Some(if pre_center < 0.0 { -s } else { s })
    }
}

/// Result of the finite-horizon Collet-Eckmann test.
#[derive(Debug, Clone, Serialize)]
pub struct CeReport {
    pub pass: bool,
    pub first_failure: Option<usize>,
    /// `min_n (log |DQ^n(Q(c))| - lambda n)`.
    pub min_margin: f64,
    pub min_margin_at: usize,
    /// Log-space margin for each `n = 1..=horizon`.
    pub margins: Vec<f64>,
}

/// Checks `|DQ^n(Q(c))| >= e^{lambda n}` for `n = 1..=horizon`, accumulating
/// `log |Q'|` along the critical orbit.
pub fn collet_eckmann_check(fam: &QuadraticMap, lambda_ce: f64, horizon: usize) -> Result<CeReport> {
    if horizon == 0 {
        return Err(Error::InvalidInput("Collet-Eckmann horizon must be >= 1".into()));
    }
    let mut x = fam.critical_value();
    let mut log_d = 0.0;
    let mut margins = Vec::with_capacity(horizon);
    let mut first_failure = None;
    for n in 1..=horizon {
        log_d += fam.derivative(x).abs().ln();
        x = fam.forward(&x);
        let target = lambda_ce * n as f64;
        let margin = log_d - target;
        if first_failure.is_none() && !(margin >= -log_slack(n, target)) {
            first_failure = Some(n);
        }
        margins.push(margin);
    }
    let (idx, min_margin) =
        margins.iter().copied().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, m)| if m < acc.1 { (i, m) } else { acc },
        );
    Ok(CeReport {
        pass: first_failure.is_none(),
        first_failure,
        min_margin,
        min_margin_at: idx + 1,
        margins,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceReport {
    pub pass: bool,
    /// True when the critical set is empty.
    pub vacuous: bool,
    pub first_failure: Option<usize>,
    /// `min_k (log dist(f^k x, C) + sigma k)`.
    pub min_margin: f64,
}

/// Checks `dist(f^k(x), C) >= e^{-sigma k}` for `k = 1..=horizon`.
pub fn slow_recurrence_check<M: DynamicalSystem>(
    map: &M,
    x: M::Point,
    sigma_rec: f64,
    horizon: usize,
) -> Result<RecurrenceReport> {
    if horizon == 0 {
        return Err(Error::InvalidInput("recurrence horizon must be >= 1".into()));
    }
    if !(sigma_rec > 0.0) {
        return Err(Error::InvalidInput(format!(
            "recurrence rate must be positive, got {sigma_rec}"
        )));
    }
    if map.critical_distance(&x).is_none() {
        return Ok(RecurrenceReport {
            pass: true,
            vacuous: true,
            first_failure: None,
            min_margin: f64::INFINITY,
        });
    }
    let mut p = x;
    let mut first_failure = None;
    let mut min_margin = f64::INFINITY;
    for k in 1..=horizon {
        p = map.forward(&p);
        let dist = map.critical_distance(&p).unwrap_or(f64::INFINITY);
        let margin = dist.ln() + sigma_rec * k as f64;
        min_margin = min_margin.min(margin);
        if first_failure.is_none() && dist < (-sigma_rec * k as f64).exp() {
            first_failure = Some(k);
        }
    }
    Ok(RecurrenceReport {
        pass: first_failure.is_none(),
        vacuous: false,
        first_failure,
        min_margin,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub pass: bool,
    /// Number of `(start, n)` inequalities evaluated.
    pub checked: usize,
    /// Orbit points inside `B_delta`, excluded from every segment.
    pub skipped: usize,
    /// Maximal excursions outside `B_delta`, as `(start, length)`.
    pub segments: Vec<(usize, usize)>,
    /// First failing `(start, n)`.
    pub first_failure: Option<(usize, usize)>,
    /// Smallest log-space margin over all checks.
    pub min_margin: f64,
    pub notes: Vec<String>,
}

/// Scans the orbit of `x0` for maximal excursions outside
/// `B_delta = (-delta, delta)` and checks both expansion clauses on every
/// prefix of each excursion:
/// `|Df^n| >= kappa delta^(order - 1) e^{beta n}` always, and
/// `|Df^n| >= kappa e^{beta n}` when the excursion starts in `f(B_delta)` or
/// the point after it re-enters `B_delta`.
pub fn expansion_outside_check(
    fam: &QuadraticMap,
    x0: f64,
    delta: f64,
    kappa: f64,
    beta_rate: f64,
    horizon: usize,
) -> Result<ExpansionReport> {
    if horizon == 0 || !(delta > 0.0) || !(kappa > 0.0) {
        return Err(Error::InvalidInput(
            "expansion check needs horizon >= 1, delta > 0 and kappa > 0".into(),
        ));
    }
    let mut orbit = Vec::with_capacity(horizon + 1);
    let mut p = x0;
    for _ in 0..=horizon {
        orbit.push(p);
        p = fam.forward(&p);
    }
    let inside = |x: f64| x.abs() < delta;
    let in_image = |x: f64| x > fam.a() - delta * delta && x <= fam.a();

    let mut segments = Vec::new();
    let mut start = None;
    for (i, &x) in orbit.iter().enumerate().take(horizon) {
        match (inside(x), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                segments.push((s, i - s));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        segments.push((s, horizon - s));
    }

    let skipped = orbit[..horizon].iter().filter(|&&x| inside(x)).count();
    let base = kappa.ln() + (CRITICAL_ORDER - 1.0) * delta.ln();
    let strong_base = kappa.ln();
    let mut checked = 0;
    let mut first_failure = None;
    let mut min_margin = f64::INFINITY;
    for &(s, len) in &segments {
        let starts_in_image = in_image(orbit[s]);
        let mut log_d = 0.0;
        for n in 1..=len {
            log_d += fam.derivative(orbit[s + n - 1]).abs().ln();
            let strong = starts_in_image || inside(orbit[s + n]);
            let bound = if strong { strong_base } else { base } + beta_rate * n as f64;
            let margin = log_d - bound;
            checked += 1;
            min_margin = min_margin.min(margin);
            if first_failure.is_none() && !(margin >= -log_slack(n, bound)) {
                first_failure = Some((s, n));
            }
        }
    }
    let mut notes = vec!["segments are maximal excursions of the orbit outside B_delta".to_string()];
    if segments.is_empty() {
        notes.push("no qualifying segment: vacuous pass".to_string());
    }
    Ok(ExpansionReport {
        pass: first_failure.is_none(),
        checked,
        skipped,
        segments,
        first_failure,
        min_margin,
        notes,
    })
}
