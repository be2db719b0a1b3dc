//! Map models and the orbit-level machinery shared by every other module:
//! iteration, Birkhoff sums, preimage trees, derivative cocycles and
//! covering times.
//!
//! Circle points are always kept in `[0, 1)`; the circle distance is
//! `min(|a - b|, 1 - |a - b|)`.

use std::fmt;

use crate::error::{Error, Result};

/// Below this local expansion a point is treated as critical.
pub const CRITICAL_THRESHOLD: f64 = 1e-9;

/// Default leaf budget for preimage trees (2^24).
pub const DEFAULT_NODE_BUDGET: u128 = 1 << 24;

/// Default bound on the iterate searched by [`covering_time`].
pub const DEFAULT_MAX_COVER_STEPS: usize = 64;

/// Reduce a real number into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can return exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Signed displacement `a - b` on the circle, in `[-1/2, 1/2)`.
#[inline]
pub fn signed_circle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// The phase space a map acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `R/Z`, represented by `[0, 1)`.
    Circle,
    Interval {
        lo: f64,
        hi: f64,
    },
    /// `S^1 x [lo, hi]`.
    CircleTimesInterval {
        lo: f64,
        hi: f64,
    },
    /// One-sided shift space on two symbols.
    Symbolic,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Circle => write!(f, "circle [0,1)"),
            Domain::Interval { lo, hi } => write!(f, "interval [{lo}, {hi}]"),
            Domain::CircleTimesInterval { lo, hi } => write!(f, "circle x [{lo}, {hi}]"),
            Domain::Symbolic => write!(f, "one-sided 2-shift"),
        }
    }
}

/// A measurable self-map of a compact metric space together with the
/// derivative data the hyperbolic-time machinery needs.
pub trait DynamicalSystem: Send + Sync {
    type Point: Copy + fmt::Debug + Send + Sync;

    fn name(&self) -> String;

    fn domain(&self) -> Domain;

    fn contains(&self, p: &Self::Point) -> bool;

    fn forward(&self, p: &Self::Point) -> Self::Point;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// `‖Df(p)^{-1}‖^{-1}`: the smallest expansion factor of the derivative.
    /// Zero on the critical set.
    fn expansion(&self, p: &Self::Point) -> f64;

    /// `‖Df(p)^{-1}‖`.
    fn inverse_norm(&self, p: &Self::Point) -> f64 {
        1.0 / self.expansion(p)
    }

    /// `|det Df(p)|`.
    fn jacobian(&self, p: &Self::Point) -> f64;

    /// Distance to the critical set, `None` when the critical set is empty.
    fn critical_distance(&self, p: &Self::Point) -> Option<f64>;
}

/// One-dimensional maps whose inverse branches are known in closed form.
pub trait BranchedMap: DynamicalSystem<Point = f64> {
    /// Number of inverse branches (topological degree for full-branch maps).
    fn degree(&self) -> usize;

    /// Inverse branch `j` at `x`, or `None` when `x` is outside its domain of
    /// validity.
    fn branch(&self, j: usize, x: f64) -> Option<f64>;

    /// Index of the inverse branch whose image contains `y`.
    fn branch_index(&self, y: f64) -> usize;

    /// Distance from `y` to the nearest boundary between branch images.
    fn branch_boundary_distance(&self, y: f64) -> f64;

    /// Signed derivative `f'(x)`.
    fn derivative(&self, x: f64) -> f64;

    /// Whether every branch is defined on the whole domain.
    fn full_branches(&self) -> bool;

    /// Critical points, possibly empty.
    fn critical_points(&self) -> Vec<f64>;

    /// Image of `[lo, hi]` (a sub-interval of the domain without wrap-around)
    /// as a union of such sub-intervals.
    fn interval_image(&self, lo: f64, hi: f64) -> Vec<(f64, f64)>;

    /// The local inverse of `f` that sends `image_center` to `pre_center`,
    /// evaluated at `y`. Fails if `y` is outside the local branch domain.
    fn local_inverse(&self, pre_center: f64, image_center: f64, y: f64) -> Option<f64>;
}

/// A forward orbit `x, f(x), ..., f^n(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<P> {
    pub points: Vec<P>,
}

impl<P: Copy> Orbit<P> {
    /// Number of steps `n` (one less than the number of points).
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> P {
        self.points[0]
    }

    pub fn end(&self) -> P {
        self.points[self.points.len() - 1]
    }
}

fn check_domain<M: DynamicalSystem>(map: &M, x: &M::Point) -> Result<()> {
    if map.contains(x) {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            point: format!("{x:?}"),
            domain: map.domain().to_string(),
        })
    }
}

pub fn iterate<M: DynamicalSystem>(map: &M, x: M::Point, n: usize) -> Result<Orbit<M::Point>> {
    check_domain(map, &x)?;
    let mut points = Vec::with_capacity(n + 1);
    points.push(x);
    let mut p = x;
    for _ in 0..n {
        p = map.forward(&p);
        points.push(p);
    }
    Ok(Orbit { points })
}

/// `S_n phi(x) = sum_{i<n} phi(f^i(x))`, zero for `n = 0`.
pub fn birkhoff_sum<M, F>(map: &M, phi: F, x: M::Point, n: usize) -> Result<f64>
where
    M: DynamicalSystem,
    F: Fn(&M::Point) -> f64,
{
    check_domain(map, &x)?;
    let mut p = x;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += phi(&p);
        p = map.forward(&p);
    }
    Ok(sum)
}

/// All `y` with `f^n(y) = x`, in lexicographic order of the branch word
/// `(j_1, ..., j_n)` where `j_1` is applied to `x` first.
pub fn preimages<M: BranchedMap>(map: &M, x: f64, n: usize, budget: u128) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("preimage depth must be at least 1".into()));
    }
    check_domain(map, &x)?;
    let leaves = (map.degree() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if leaves > budget {
        return Err(Error::Budget {
            what: format!("depth-{n} preimage tree"),
            needed: leaves,
            budget,
        });
    }
    let mut level = vec![x];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * map.degree());
        for &y in &level {
            next.extend((0..map.degree()).filter_map(|j| map.branch(j, y)));
        }
        level = next;
    }
    Ok(level)
}

fn singular_at<M: DynamicalSystem>(map: &M, p: &M::Point, index: usize) -> Result<()> {
    if map.expansion(p) < CRITICAL_THRESHOLD {
        Err(Error::Singularity {
            index,
            point: format!("{p:?}"),
        })
    } else {
        Ok(())
    }
}

/// `prod_{j<n} ‖Df(f^j(x))^{-1}‖`.
pub fn derivative_product<M: DynamicalSystem>(map: &M, x: M::Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("derivative product needs n >= 1".into()));
    }
    check_domain(map, &x)?;
    let mut p = x;
    let mut prod = 1.0;
    for j in 0..n {
        singular_at(map, &p, j)?;
        prod *= map.inverse_norm(&p);
        p = map.forward(&p);
    }
    Ok(prod)
}

/// Per-step `log ‖Df(f^j(x))^{-1}‖` for `j < n`. Safe against the
/// overflow/underflow of long products.
pub fn log_inverse_norms<M: DynamicalSystem>(map: &M, x: M::Point, n: usize) -> Result<Vec<f64>> {
    check_domain(map, &x)?;
    let mut p = x;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        singular_at(map, &p, j)?;
        out.push(map.inverse_norm(&p).ln());
        p = map.forward(&p);
    }
    Ok(out)
}

/// Outcome of [`covering_time`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cover {
    /// `f^k(region)` covers the domain.
    Covered(usize),
    /// No `k <= k_max` covers.
    Exceeded { k_max: usize },
}

fn domain_bounds(domain: Domain) -> Result<(f64, f64)> {
    match domain {
        Domain::Circle => Ok((0.0, 1.0)),
        Domain::Interval { lo, hi } => Ok((lo, hi)),
        other => Err(Error::Capability(format!(
            "covering time is only defined for one-dimensional maps, not on {other}"
        ))),
    }
}

fn merge(mut pieces: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
    for (lo, hi) in pieces {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1e-12 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn covers(pieces: &[(f64, f64)], lo: f64, hi: f64, resolution: usize) -> bool {
    let width = (hi - lo) / resolution as f64;
    let slack = 1e-12 * (hi - lo);
    (0..resolution).all(|i| {
        let c_lo = lo + i as f64 * width;
        let c_hi = c_lo + width;
        pieces.iter().any(|&(a, b)| b > c_lo + slack && a < c_hi - slack)
    })
}

/// Smallest `k <= k_max` such that the grid-discretised image `f^k(region)`
/// meets every one of `resolution` equal cells of the domain.
pub fn covering_time<M: BranchedMap>(
    map: &M,
    region: (f64, f64),
    resolution: usize,
    k_max: usize,
) -> Result<Cover> {
    let (d_lo, d_hi) = domain_bounds(map.domain())?;
    let (lo, hi) = region;
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty region [{lo}, {hi}]")));
    }
    if lo < d_lo || hi > d_hi {
        return Err(Error::OutsideDomain {
            point: format!("[{lo}, {hi}]"),
            domain: map.domain().to_string(),
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    let mut pieces = vec![(lo, hi)];
    for k in 0..=k_max {
        if covers(&pieces, d_lo, d_hi, resolution) {
            return Ok(Cover::Covered(k));
        }
        if k == k_max {
            break;
        }
        let next = pieces
            .iter()
            .flat_map(|&(a, b)| map.interval_image(a, b))
            .collect();
        pieces = merge(next);
    }
    Ok(Cover::Exceeded { k_max })
}
