use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::dynamics::{circle_distance, DynamicalSystem};
use crate::error::{Error, Result};
use crate::families::ExpandingCircle;

pub type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Names accepted by [`HolderPotential::named`].
pub const NAMED_POTENTIALS: [&str; 6] = ["zero", "cos", "sin", "one-minus-cos", "cob-sin", "mixed"];

/// A Hölder continuous function on the circle.
#[derive(Clone)]
pub struct HolderPotential {
    pub name: String,
    /// Hölder exponent in `(0, 1]`.
    pub alpha: f64,
    /// Known upper bound on `‖phi‖_alpha`, if any.
    pub seminorm_hint: Option<f64>,
    pub eval: PotentialFn,
}

impl fmt::Debug for HolderPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolderPotential")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("seminorm_hint", &self.seminorm_hint)
            .finish_non_exhaustive()
    }
}

impl HolderPotential {
    pub fn new(
        name: impl Into<String>,
        alpha: f64,
        seminorm_hint: Option<f64>,
        eval: PotentialFn,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "Hölder exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            name: name.into(),
            alpha,
            seminorm_hint,
            eval,
        })
    }

    fn lipschitz(name: &str, hint: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            alpha: 1.0,
            seminorm_hint: Some(hint),
            eval: Arc::new(f),
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn constant(c: f64) -> Self {
        Self::lipschitz(&format!("const:{c}"), 0.0, move |_| c)
    }

    /// `alpha - alpha o f`.
    pub fn coboundary(
        name: impl Into<String>,
        transfer: impl Fn(f64) -> f64 + Send + Sync + 'static,
        transfer_lipschitz: Option<f64>,
        map: ExpandingCircle,
    ) -> Self {
        let d = map.degree_u32() as f64;
        Self {
            name: name.into(),
            alpha: 1.0,
            seminorm_hint: transfer_lipschitz.map(|l| l * (1.0 + d)),
            eval: Arc::new(move |x| transfer(x) - transfer(map.forward(&x))),
        }
    }

    /// Closed-form potentials by name. `cob-sin` is built over `map`.
    pub fn named(name: &str, map: ExpandingCircle) -> Result<Self> {
        let tau = 2.0 * PI;
        Ok(match name {
            "zero" => Self::lipschitz("zero", 0.0, |_| 0.0),
            "cos" => Self::lipschitz("cos", tau, move |x| (tau * x).cos()),
            "sin" => Self::lipschitz("sin", tau, move |x| (tau * x).sin()),
            "one-minus-cos" => Self::lipschitz("one-minus-cos", tau, move |x| 1.0 - (tau * x).cos()),
            "cob-sin" => Self::coboundary("cob-sin", move |x| (tau * x).sin(), Some(tau), map),
            "mixed" => Self::lipschitz("mixed", 4.0 * tau, move |x| {
                let (s, c) = (tau * x).sin_cos();
                // sin 2t - sin 4t + 1 - cos 2t with sin 4t = 2 sin 2t cos 2t
                s - 2.0 * s * c + 1.0 - c
            }),
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown potential '{other}'; expected one of {NAMED_POTENTIALS:?} or table:<path>"
                )))
            }
        })
    }

    /// Piecewise-linear interpolation of samples at `i / n`, `i < n`, on the
    /// circle.
    pub fn from_table(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(
                "potential table needs at least 2 values".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "potential table has non-finite entries".into(),
            ));
        }
        let n = values.len();
        let lip = (0..n)
            .map(|i| (values[(i + 1) % n] - values[i]).abs() * n as f64)
            .fold(0.0, f64::max);
        let values = Arc::new(values);
        Ok(Self {
            name: name.into(),
            alpha: 1.0,
            seminorm_hint: Some(lip),
            eval: Arc::new(move |x| {
                let t = x.rem_euclid(1.0) * n as f64;
                let i = (t.floor() as usize).min(n - 1);
                let frac = t - i as f64;
                values[i] * (1.0 - frac) + values[(i + 1) % n] * frac
            }),
        })
    }

    pub fn negated(&self) -> Self {
        let f = self.eval.clone();
        Self {
            name: format!("-{}", self.name),
            alpha: self.alpha,
            seminorm_hint: self.seminorm_hint,
            eval: Arc::new(move |x| -f(x)),
        }
    }

    /// `sup |phi(x) - phi(y)| / d(x, y)^alpha` over a uniform grid of `n`
    /// points; a lower bound on `‖phi‖_alpha`.
    pub fn sampled_seminorm(&self, n: usize) -> f64 {
        let pts: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let vals: Vec<f64> = pts.iter().map(|&x| self.value(x)).collect();
        super::holder_seminorm_estimate(&pts, &vals, self.alpha).unwrap_or(0.0)
    }

    /// Checks the declared hint on `n` grid points.
    pub fn hint_holds(&self, n: usize) -> bool {
        match self.seminorm_hint {
            None => true,
            Some(h) => (0..n).all(|i| {
                let x = i as f64 / n as f64;
                (0..n).step_by(7).all(|k| {
                    let y = k as f64 / n as f64 + 0.5 / n as f64;
                    let d = circle_distance(x, y);
                    (self.value(x) - self.value(y)).abs() <= h * d.powf(self.alpha) + 1e-9
                })
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubling() -> ExpandingCircle {
        ExpandingCircle::new(2).unwrap()
    }

    #[test]
    fn mixed_matches_definition() {
        let p = HolderPotential::named("mixed", doubling()).unwrap();
        for k in 0..200 {
            let x = k as f64 / 200.0;
            let t = 2.0 * PI * x;
            let direct = t.sin() - (2.0 * t).sin() + 1.0 - t.cos();
            assert!((p.value(x) - direct).abs() < 1e-14);
        }
        assert!(p.value(0.1) < 0.0);
        assert_eq!(p.value(0.0), 0.0);
    }

    #[test]
    fn hints_are_upper_bounds() {
        for name in NAMED_POTENTIALS {
            let p = HolderPotential::named(name, doubling()).unwrap();
            assert!(p.hint_holds(512), "{name}");
        }
    }

    #[test]
    fn coboundary_telescopes() {
        let p = HolderPotential::named("cob-sin", doubling()).unwrap();
        let a = |x: f64| (2.0 * PI * x).sin();
        assert!((p.value(0.3) - (a(0.3) - a(0.6))).abs() < 1e-15);
    }

    #[test]
    fn table_interpolates_on_circle() {
        let p = HolderPotential::from_table("t", vec![0.0, 1.0, 0.0, -1.0]).unwrap();
        assert_eq!(p.value(0.125), 0.5);
        assert_eq!(p.value(0.875), -0.5);
        assert_eq!(p.seminorm_hint, Some(4.0));
        assert!(HolderPotential::from_table("t", vec![1.0]).is_err());
    }

    #[test]
    fn rejects_bad_exponent_and_name() {
        assert!(HolderPotential::new("x", 0.0, None, Arc::new(|_| 0.0)).is_err());
        assert!(HolderPotential::new("x", 1.5, None, Arc::new(|_| 0.0)).is_err());
        assert!(HolderPotential::named("nope", doubling()).is_err());
    }
}
