use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{circle_distance, wrap, Domain, DynamicalSystem};
use crate::error::{Error, Result};

/// Default Morse function `b(theta) = sin(2 pi theta)` and its derivative.
pub fn sin_morse(theta: f64) -> (f64, f64) {
    let (s, c) = (2.0 * PI * theta).sin_cos();
    (s, 2.0 * PI * c)
}

/// Parameters of `(theta, x) -> (d theta mod 1, a0 + alpha b(theta) - x^2)`
/// together with the invariant strip `S^1 x I` found for them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VianaParams {
    pub a0: f64,
    pub alpha: f64,
    pub d: u32,
    #[serde(skip)]
    pub morse: fn(f64) -> (f64, f64),
    /// `I = [strip.0, strip.1]`.
    pub strip: (f64, f64),
}

impl VianaParams {
    pub fn new(a0: f64, alpha: f64, d: u32) -> Result<Self> {
        if !(a0 > 1.0 && a0 < 2.0) {
            return Err(Error::InvalidInput(format!("a0 must lie in (1, 2), got {a0}")));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if d < 16 {
            return Err(Error::InvalidInput(format!("base degree must be >= 16, got {d}")));
        }
        let strip = find_invariant_strip(a0, alpha).ok_or_else(|| {
            Error::Hypothesis(format!(
                "no invariant strip found for a0 = {a0}, alpha = {alpha}; alpha too large"
            ))
        })?;
        Ok(Self {
            a0,
            alpha,
            d,
            morse: sin_morse,
            strip,
        })
    }

    #[inline]
    pub fn fiber_parameter(&self, theta: f64) -> f64 {
        self.a0 + self.alpha * (self.morse)(theta).0
    }
}

/// Symmetric strip `I = [-r, r]` whose image lies strictly inside it.
///
/// With `a(theta)` ranging over `[a_min, a_max]` the fibre maps send `[-r, r]`
/// into `[a_min - r^2, a_max]`, so strict invariance needs
/// `a_max < r < (1 + sqrt(1 + 4 a_min)) / 2`. The midpoint of that window is
/// taken and then confirmed by sampling the image of a grid.
pub fn find_invariant_strip(a0: f64, alpha: f64) -> Option<(f64, f64)> {
    let (a_min, a_max) = (a0 - alpha, a0 + alpha);
    let r_lo = a_max;
    let r_hi = 0.5 * (1.0 + (1.0 + 4.0 * a_min).sqrt());
    if !(r_lo < r_hi) || r_hi >= 2.0 {
        return None;
    }
    let r = 0.5 * (r_lo + r_hi);
    let inside = (0..=256).all(|i| {
        let theta = i as f64 / 256.0;
        let a = a0 + alpha * sin_morse(theta).0;
        (0..=256).all(|k| {
            let x = -r + 2.0 * r * k as f64 / 256.0;
            let y = a - x * x;
            y > -r && y < r
        })
    });
    inside.then_some((-r, r))
}

/// One step of the skew product plus the strip-membership flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VianaStep {
    pub point: (f64, f64),
    pub in_strip: bool,
}

pub fn viana_step(p: (f64, f64), params: &VianaParams) -> VianaStep {
    let (theta, x) = p;
    let point = (
        wrap(params.d as f64 * theta),
        params.fiber_parameter(theta) - x * x,
    );
    let in_strip = point.1 >= params.strip.0 && point.1 <= params.strip.1;
    VianaStep { point, in_strip }
}

/// The Viana map restricted to `S^1 x I`.
#[derive(Debug, Clone, Copy)]
pub struct VianaMap {
    pub params: VianaParams,
}

impl VianaMap {
    pub fn new(params: VianaParams) -> Self {
        Self { params }
    }

    /// Singular values `(s_min, s_max)` of `Df(theta, x)`.
    pub fn singular_values(&self, p: &(f64, f64)) -> (f64, f64) {
        let d = self.params.d as f64;
        let q = self.params.alpha * (self.params.morse)(p.0).1;
        let r = -2.0 * p.1;
        let trace = d * d + q * q + r * r;
        let det = (d * r).abs();
        let disc = (trace * trace - 4.0 * det * det).max(0.0).sqrt();
        let s_max = (0.5 * (trace + disc)).sqrt();
        let s_min = if s_max > 0.0 { det / s_max } else { 0.0 };
        (s_min, s_max)
    }
}

fn refill_low_digit(theta: f64, from: &(f64, f64), d: u32) -> f64 {
    if !d.is_power_of_two() {
        return theta;
    }
    // splitmix64 of the pre-image state, so the refill is a function of the point
    let mut z = from.0.to_bits() ^ from.1.to_bits().rotate_left(32);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let digit = (z % d as u64) as f64;
    theta + digit * f64::EPSILON / 2.0
}

impl DynamicalSystem for VianaMap {
    type Point = (f64, f64);

    fn name(&self) -> String {
        format!(
            "viana:a0={},alpha={},d={}",
            self.params.a0, self.params.alpha, self.params.d
        )
    }

    fn domain(&self) -> Domain {
        Domain::CircleTimesInterval {
            lo: self.params.strip.0,
            hi: self.params.strip.1,
        }
    }

    fn contains(&self, p: &(f64, f64)) -> bool {
        (0.0..1.0).contains(&p.0) && p.1 >= self.params.strip.0 && p.1 <= self.params.strip.1
    }

    /// [`viana_step`] followed by a refill of the low base digit when `d` is
    /// a power of two. In `f64`, `d theta mod 1` shifts `log2 d` bits out and
    /// every orbit reaches `theta = 0` within `53 / log2 d` steps; refilling
    /// keeps the computed orbit within `2^-49` of a genuine base orbit.
    #[inline]
    fn forward(&self, p: &(f64, f64)) -> (f64, f64) {
        let (theta, x) = viana_step(*p, &self.params).point;
        (refill_low_digit(theta, p, self.params.d), x)
    }

    fn distance(&self, a: &(f64, f64), b: &(f64, f64)) -> f64 {
        circle_distance(a.0, b.0).hypot(a.1 - b.1)
    }

    fn expansion(&self, p: &(f64, f64)) -> f64 {
        self.singular_values(p).0
    }

    fn jacobian(&self, p: &(f64, f64)) -> f64 {
        2.0 * self.params.d as f64 * p.1.abs()
    }

    /// The critical set is the circle `{x = 0}`.
    fn critical_distance(&self, p: &(f64, f64)) -> Option<f64> {
        Some(p.1.abs())
    }
}
