//! Concrete example systems: expanding circle maps, the quadratic family
//! with its finite-horizon Benedicks-Carleson checks, and the Viana skew
//! product.

mod circle;
mod quadratic;
mod viana;

pub use circle::{make_expanding_circle, ExpandingCircle};
pub use quadratic::{
    collet_eckmann_check, expansion_outside_check, slow_recurrence_check, CeReport, ExpansionReport,
    QuadraticMap, RecurrenceReport, CRITICAL_ORDER,
};
pub use viana::{find_invariant_strip, viana_step, VianaMap, VianaParams, VianaStep};

/// Slack for log-space comparisons of `n`-term sums against `rate * n`:
/// a few ulps per accumulated term.
pub(crate) fn log_slack(n: usize, scale: f64) -> f64 {
    4.0 * f64::EPSILON * n as f64 * scale.abs().max(1.0)
}
