//! Zooming-contraction sequences `alpha_n(r)`, validation of the four
//! defining axioms on finite ranges, and the Hölder tail sums
//! `sum_i a_i^alpha` that bound subaction regularity.
//!
//! Index 0 always carries `a_0 = 1` (no contraction over zero steps).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack used when comparing products of coefficients; equality
/// cases inside it are counted separately.
pub const REL_SLACK: f64 = 1e-12;

/// Default number of materialised coefficients.
pub const DEFAULT_HORIZON: usize = 4096;

pub type ContractionFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ContractionKind {
    /// `alpha_n(r) = e^{-rate n} r`.
    Exponential { rate: f64 },
    /// Lipschitz with `a_n = (n + b)^{-a}`.
    Power { a: f64, b: f64 },
    /// Lipschitz with tabulated `a_1, ..., a_L`.
    Table { coeffs: Vec<f64> },
    /// Arbitrary `alpha_n(r)`.
    General { name: String, f: ContractionFn },
}

impl fmt::Debug for ContractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "Exponential {{ rate: {rate} }}"),
            Self::Power { a, b } => write!(f, "Power {{ a: {a}, b: {b} }}"),
            Self::Table { coeffs } => write!(f, "Table {{ len: {} }}", coeffs.len()),
            Self::General { name, .. } => write!(f, "General {{ name: {name} }}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractionSeq {
    pub kind: ContractionKind,
    pub a0: f64,
    pub horizon: usize,
}

impl ContractionSeq {
    fn with_kind(kind: ContractionKind) -> Self {
        let horizon = match &kind {
            ContractionKind::Table { coeffs } => coeffs.len(),
            _ => DEFAULT_HORIZON,
        };
        Self {
            kind,
            a0: 1.0,
            horizon,
        }
    }

    pub fn exponential(rate: f64) -> Self {
        Self::with_kind(ContractionKind::Exponential { rate })
    }

    pub fn power(a: f64, b: f64) -> Self {
        Self::with_kind(ContractionKind::Power { a, b })
    }

    pub fn table(coeffs: Vec<f64>) -> Self {
        Self::with_kind(ContractionKind::Table { coeffs })
    }

    pub fn general(name: impl Into<String>, f: ContractionFn) -> Self {
        Self::with_kind(ContractionKind::General { name: name.into(), f })
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        if !matches!(self.kind, ContractionKind::Table { .. }) {
            self.horizon = horizon;
        }
        self
    }

    pub fn is_lipschitz(&self) -> bool {
        !matches!(self.kind, ContractionKind::General { .. })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ContractionKind::Exponential { rate } => format!("exp:lambda={rate}"),
            ContractionKind::Power { a, b } => format!("power:a={a},b={b}"),
            ContractionKind::Table { coeffs } => format!("table:{} coefficients", coeffs.len()),
            ContractionKind::General { name, .. } => format!("general:{name}"),
        }
    }

    /// Lipschitz coefficient `a_n`, `None` for general sequences or beyond a
    /// table's length.
    pub fn coefficient(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(self.a0);
        }
        match &self.kind {
            ContractionKind::Exponential { rate } => Some((-rate * n as f64).exp()),
            ContractionKind::Power { a, b } => Some((n as f64 + b).powf(-a)),
            ContractionKind::Table { coeffs } => coeffs.get(n - 1).copied(),
            ContractionKind::General { .. } => None,
        }
    }

    /// `alpha_n(r)`; `alpha_0` is the identity.
    pub fn alpha(&self, n: usize, r: f64) -> Option<f64> {
        if n == 0 {
            return Some(r);
        }
        match &self.kind {
            ContractionKind::General { f, .. } => Some(f(n, r)),
            _ => self.coefficient(n).map(|a| a * r),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck<W> {
    pub pass: bool,
    pub counterexample: Option<W>,
    /// Comparisons that hold with equality up to [`REL_SLACK`].
    pub equality_cases: usize,
}

impl<W> AxiomCheck<W> {
    fn new() -> Self {
        Self {
            pass: true,
            counterexample: None,
            equality_cases: 0,
        }
    }

    fn fail(&mut self, witness: W) {
        if self.pass {
            self.pass = false;
            self.counterexample = Some(witness);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummabilityStatus {
    /// Partial sum plus an analytic tail bound.
    Proved,
    /// Only finitely many terms or radii were examined.
    Sampled,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummabilityCheck {
    pub pass: bool,
    pub status: SummabilityStatus,
    /// `sum_{n=1}^{H} alpha_n(r)` (supremum over the radius grid when sampled).
    pub partial_sum: f64,
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    /// Witness `(n, r)` with `alpha_n(r) >= r`.
    pub axiom1_contracting: AxiomCheck<(usize, f64)>,
    /// Witness `(n, r, s)` with `r < s` and `alpha_n(r) >= alpha_n(s)`.
    pub axiom2_monotone: AxiomCheck<(usize, f64, f64)>,
    /// Witness `(m, n, r)`; `r` is `None` for Lipschitz sequences where the
    /// check is `a_m a_n <= a_{m+n}`.
    pub axiom3_supermultiplicative: AxiomCheck<(usize, usize, Option<f64>)>,
    pub axiom4_summable: SummabilityCheck,
    pub verdict: Verdict,
}

fn validate_inputs(seq: &ContractionSeq, r_grid: &[f64], n_max: usize) -> Result<()> {
    if n_max < 2 {
        return Err(Error::InvalidInput(format!("n_max must be >= 2, got {n_max}")));
    }
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidInput(
            "radius grid must be a nonempty subset of (0, 1)".into(),
        ));
    }
    match &seq.kind {
        ContractionKind::Exponential { rate } if !(*rate > 0.0) => Err(Error::InvalidInput(format!(
            "exponential rate must be positive, got {rate}"
        ))),
        ContractionKind::Power { a, b } if !(*a > 0.0 && *b > 0.0) => Err(Error::InvalidInput(format!(
            "power-law contraction needs a > 0 and b > 0, got a = {a}, b = {b}"
        ))),
        ContractionKind::Table { coeffs } if coeffs.len() < n_max => Err(Error::InvalidInput(format!(
            "table has {} coefficients, n_max is {n_max}",
            coeffs.len()
        ))),
        _ => {
            if seq.is_lipschitz() {
                let limit = match &seq.kind {
                    ContractionKind::Table { coeffs } => coeffs.len(),
                    _ => 2 * n_max,
                };
                for n in 1..=limit {
                    let a = seq.coefficient(n).unwrap_or(0.0);
                    if !(0.0..1.0).contains(&a) {
                        return Err(Error::InvalidInput(format!(
                            "Lipschitz coefficient a_{n} = {a} outside [0, 1)"
                        )));
                    }
                }
            }
            Ok(())
        }
    }
}

/// Compare `lhs <= rhs` with relative slack, counting equality cases.
fn leq<W>(check: &mut AxiomCheck<W>, lhs: f64, rhs: f64, witness: impl FnOnce() -> W) {
    let scale = lhs.abs().max(rhs.abs());
    if (lhs - rhs).abs() <= REL_SLACK * scale {
        check.equality_cases += 1;
    } else if lhs > rhs {
        check.fail(witness());
    }
}

/// Checks the four zooming-contraction axioms for `1 <= m, n <= n_max` and
/// all radii (and ordered radius pairs) in `r_grid`.
pub fn validate_contraction(seq: &ContractionSeq, r_grid: &[f64], n_max: usize) -> Result<AxiomReport> {
    validate_inputs(seq, r_grid, n_max)?;
    let alpha = |n: usize, r: f64| seq.alpha(n, r).expect("validated sequence");
    let mut radii = r_grid.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut ax1 = AxiomCheck::new();
    let mut ax2 = AxiomCheck::new();
    for n in 1..=n_max {
        for &r in &radii {
            if !(alpha(n, r) < r) {
                ax1.fail((n, r));
            }
        }
        for (i, &r) in radii.iter().enumerate() {
            for &s in &radii[i + 1..] {
                if !(alpha(n, r) < alpha(n, s)) {
                    ax2.fail((n, r, s));
                }
            }
        }
    }

    let mut ax3 = AxiomCheck::new();
    for m in 1..=n_max {
        for n in 1..=n_max {
            if seq.is_lipschitz() {
                let (Some(am), Some(an), Some(amn)) =
                    (seq.coefficient(m), seq.coefficient(n), seq.coefficient(m + n))
                else {
                    continue;
                };
                leq(&mut ax3, am * an, amn, || (m, n, None));
            } else {
                for &r in &radii {
                    leq(&mut ax3, alpha(m, alpha(n, r)), alpha(m + n, r), || {
                        (m, n, Some(r))
                    });
                }
            }
        }
    }

    let ax4 = summability(seq, &radii, n_max)?;
    let verdict = if ax1.pass && ax2.pass && ax3.pass && ax4.pass {
        Verdict::Valid
    } else {
        Verdict::Invalid
    };
    Ok(AxiomReport {
        axiom1_contracting: ax1,
        axiom2_monotone: ax2,
        axiom3_supermultiplicative: ax3,
        axiom4_summable: ax4,
        verdict,
    })
}

fn summability(seq: &ContractionSeq, radii: &[f64], n_max: usize) -> Result<SummabilityCheck> {
    if !seq.is_lipschitz() {
        // sup over the sampled radii of the partial sums
        let sup = radii
            .iter()
            .map(|&r| {
                (1..=n_max)
                    .map(|n| seq.alpha(n, r).unwrap_or(f64::NAN))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(SummabilityCheck {
            pass: sup.is_finite(),
            status: if sup.is_finite() {
                SummabilityStatus::Sampled
            } else {
                SummabilityStatus::Failed
            },
            partial_sum: sup,
            tail_bound: None,
        });
    }
    Ok(match tail_sum(seq, 1.0)? {
        TailSum::Converged {
            partial, tail_upper, ..
        } => SummabilityCheck {
            pass: true,
            status: SummabilityStatus::Proved,
            partial_sum: partial - seq.a0,
            tail_bound: Some(tail_upper),
        },
        TailSum::PartialOnly { partial, .. } => SummabilityCheck {
            pass: partial.is_finite(),
            status: SummabilityStatus::Sampled,
            partial_sum: partial - seq.a0,
            tail_bound: None,
        },
        TailSum::Divergent { .. } => SummabilityCheck {
            pass: false,
            status: SummabilityStatus::Failed,
            partial_sum: f64::INFINITY,
            tail_bound: None,
        },
    })
}

/// `sum_{i>=0} a_i^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailSum {
    /// `value` is the best estimate; the true sum lies in
    /// `[partial + tail_lower, partial + tail_upper]`.
    Converged {
        value: f64,
        partial: f64,
        terms: usize,
        tail_lower: f64,
        tail_upper: f64,
    },
    /// Tabulated coefficients: no tail information beyond the table.
    PartialOnly { partial: f64, terms: usize },
    /// The p-series test fails: `exponent = a * alpha <= 1`.
    Divergent { exponent: f64 },
}

impl TailSum {
    pub fn value(&self) -> Option<f64> {
        match self {
            TailSum::Converged { value, .. } => Some(*value),
            TailSum::PartialOnly { partial, .. } => Some(*partial),
            TailSum::Divergent { .. } => None,
        }
    }
}

/// Partial sum to the sequence horizon plus an analytic tail: a geometric
/// series for exponential sequences, integral comparison for power laws.
pub fn tail_sum(seq: &ContractionSeq, alpha: f64) -> Result<TailSum> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "Hölder exponent must lie in (0, 1], got {alpha}"
        )));
    }
    let h = seq.horizon;
    let partial_from = |terms: usize| -> f64 {
        // smallest terms first
        (1..=terms)
            .rev()
            .map(|n| seq.coefficient(n).unwrap_or(0.0).powf(alpha))
            .sum::<f64>()
            + seq.a0.powf(alpha)
    };
    match &seq.kind {
        ContractionKind::Exponential { rate } => {
            let q = (-rate * alpha).exp();
            let partial = partial_from(h);
            let tail = q.powi(h as i32 + 1) / (1.0 - q);
            Ok(TailSum::Converged {
                value: seq.a0.powf(alpha) - 1.0 + 1.0 / (1.0 - q),
                partial,
                terms: h + 1,
                tail_lower: tail,
                tail_upper: tail,
            })
        }
        ContractionKind::Power { a, b } => {
            let p = a * alpha;
            if p <= 1.0 {
                return Ok(TailSum::Divergent { exponent: p });
            }
            let partial = partial_from(h);
            let h = h as f64;
            let integral_from = |x: f64| (x + b).powf(1.0 - p) / (p - 1.0);
            // the summand is convex and decreasing, so the midpoint integral
            // is an upper bound and the shifted integral a lower bound
            let tail_upper = integral_from(h + 0.5);
            let tail_lower = integral_from(h + 1.0);
            // Euler-Maclaurin correction for the midpoint rule
            let estimate = tail_upper - p * (h + 0.5 + b).powf(-p - 1.0) / 24.0;
            Ok(TailSum::Converged {
                value: partial + estimate.clamp(tail_lower, tail_upper),
                partial,
                terms: seq.horizon + 1,
                tail_lower,
                tail_upper,
            })
        }
        ContractionKind::Table { coeffs } => Ok(TailSum::PartialOnly {
            partial: partial_from(coeffs.len()),
            terms: coeffs.len() + 1,
        }),
        ContractionKind::General { name, .. } => Err(Error::Capability(format!(
            "no closed-form tail for general contraction '{name}'; use a horizon-only partial sum"
        ))),
    }
}

/// Horizon-only partial sum `sum_{i=0}^{horizon} alpha_i(r)`, for sequences
/// without closed-form tails.
pub fn partial_sum(seq: &ContractionSeq, r: f64, horizon: usize) -> f64 {
    (0..=horizon).map(|n| seq.alpha(n, r).unwrap_or(f64::NAN)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (1..20).map(|i| i as f64 / 20.0).collect()
    }

    #[test]
    fn exponential_halving_is_valid() {
        let r = validate_contraction(&ContractionSeq::exponential(2f64.ln()), &grid(), 64).unwrap();
        assert_eq!(r.verdict, Verdict::Valid);
        // every (m, n) pair is an equality case
        assert_eq!(r.axiom3_supermultiplicative.equality_cases, 64 * 64);
        let s = r.axiom4_summable;
        assert_eq!(s.status, SummabilityStatus::Proved);
        assert!((s.partial_sum + s.tail_bound.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_square_is_valid() {
        let r = validate_contraction(&ContractionSeq::power(2.0, 1.0), &grid(), 64).unwrap();
        assert_eq!(r.verdict, Verdict::Valid);
    }

    #[test]
    fn small_offset_breaks_supermultiplicativity() {
        let r = validate_contraction(&ContractionSeq::power(2.0, 0.5), &grid(), 4).unwrap();
        assert_eq!(r.verdict, Verdict::Invalid);
        assert_eq!(r.axiom3_supermultiplicative.counterexample, Some((1, 1, None)));
        let seq = ContractionSeq::power(2.0, 0.5);
        let a1 = seq.coefficient(1).unwrap();
        assert!((a1 * a1 - 0.197_530_864_197_530_9).abs() < 1e-15);
        assert!((seq.coefficient(2).unwrap() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = grid();
        assert!(validate_contraction(&ContractionSeq::table(vec![0.5, 1.2, 0.1]), &g, 3).is_err());
        assert!(validate_contraction(&ContractionSeq::exponential(-1.0), &g, 4).is_err());
        assert!(validate_contraction(&ContractionSeq::exponential(1.0), &g, 1).is_err());
        assert!(validate_contraction(&ContractionSeq::exponential(1.0), &[], 4).is_err());
        assert!(validate_contraction(&ContractionSeq::exponential(1.0), &[1.5], 4).is_err());
    }

    #[test]
    fn zero_coefficient_is_not_strictly_monotone() {
        let r = validate_contraction(&ContractionSeq::table(vec![0.0; 8]), &grid(), 4).unwrap();
        assert!(!r.axiom2_monotone.pass);
        assert_eq!(r.axiom4_summable.status, SummabilityStatus::Sampled);
    }

    #[test]
    fn general_sequence_is_sampled() {
        let f: ContractionFn = Arc::new(|n, r| r * 0.5f64.powi(n as i32));
        let r = validate_contraction(&ContractionSeq::general("halving", f), &grid(), 16).unwrap();
        assert_eq!(r.verdict, Verdict::Valid);
        assert_eq!(r.axiom4_summable.status, SummabilityStatus::Sampled);
        // constant in n: axioms 1-3 hold, the sampled sum just grows with n_max
        let f: ContractionFn = Arc::new(|_, r| r * r);
        let r = validate_contraction(&ContractionSeq::general("square", f), &grid(), 4).unwrap();
        assert!(r.axiom1_contracting.pass && r.axiom3_supermultiplicative.pass);
        assert!(r.axiom4_summable.partial_sum > 4.0 * 0.9 * 0.9);
    }

    #[test]
    fn tail_sum_examples() {
        let geo = tail_sum(&ContractionSeq::exponential(2f64.ln()), 1.0).unwrap();
        assert!((geo.value().unwrap() - 2.0).abs() < 1e-15);
        let basel = tail_sum(&ContractionSeq::power(2.0, 1.0), 1.0).unwrap();
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((basel.value().unwrap() - pi2_6).abs() < 1e-8);
        if let TailSum::Converged {
            partial,
            tail_lower,
            tail_upper,
            ..
        } = basel
        {
            assert!(partial + tail_lower <= pi2_6 && pi2_6 <= partial + tail_upper);
        }
        assert_eq!(
            tail_sum(&ContractionSeq::power(2.0, 1.0), 0.25).unwrap(),
            TailSum::Divergent { exponent: 0.5 }
        );
        let f: ContractionFn = Arc::new(|_, r| r / 2.0);
        assert!(matches!(
            tail_sum(&ContractionSeq::general("g", f), 1.0),
            Err(Error::Capability(_))
        ));
        assert!(tail_sum(&ContractionSeq::exponential(1.0), 0.0).is_err());
    }

    #[test]
    fn partial_sum_includes_identity_term() {
        let s = partial_sum(&ContractionSeq::exponential(2f64.ln()), 0.5, 3);
        assert!((s - 0.5 * (1.0 + 0.5 + 0.25 + 0.125)).abs() < 1e-15);
    }
}
