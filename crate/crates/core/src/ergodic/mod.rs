//! Ergodic optimization on expanding circle maps `x -> d x mod 1`.
//!
//! Extremal ergodic averages are estimated over periodic orbits. Subactions
//! are built as the truncated infimum of centered Birkhoff sums over the
//! inverse-branch tree, or independently as a fixed point of the
//! Lax-Oleinik operator, and then checked against `phi >= u - u o f` with
//! `u = -lambda`.

mod periodic;
mod potential;
mod subaction;

pub use periodic::{
    estimate_ergodic_value, first_nonzero_average, periodic_points, Direction, ErgodicValueEstimate,
    PeriodicOrbit, MAX_PERIOD,
};
pub use potential::{HolderPotential, PotentialFn, NAMED_POTENTIALS};
pub use subaction::{
    chain_minima, lax_oleinik_fixed_point, mane_subaction, mane_value, CircleGrid, Construction,
    SubactionGrid, MAX_GRID,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{circle_distance, BranchedMap};
use crate::error::{Error, Result};
use crate::families::ExpandingCircle;

/// Float slack on the exact truncation invariant.
pub const EXACT_SLACK: f64 = 1e-12;

/// Periods up to which the sandwich checks that all averages vanish.
pub const SANDWICH_PERIOD: usize = 12;

/// Tolerance on those averages.
pub const SANDWICH_TOL: f64 = 1e-9;

/// Default centering: the inf-side periodic estimate, clamped at 0.
pub fn default_centering(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    max_period: usize,
    budget: u128,
) -> Result<f64> {
    Ok(
        estimate_ergodic_value(map, phi, max_period, Direction::Inf, budget)?
            .value
            .max(0.0),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    /// `min_x [(phi - c)(x) + lambda(x) - lambda(f x)]` over the grid.
    pub min_defect: f64,
    pub argmin: f64,
    pub mean_defect: f64,
    /// `lambda_{N+1}(f x) <= lambda_N(x) + (phi - c)(x)` at every grid point;
    /// `None` for supplied candidates, which carry no truncation.
    pub exact_invariant_ok: Option<bool>,
    /// Largest violation of the exact invariant (negative when it holds
    /// strictly everywhere).
    pub exact_worst: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    pub defects: Vec<f64>,
}

/// Checks the sub-coboundary inequality for `sub` on its grid.
pub fn verify_subcohomology(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    sub: &SubactionGrid,
    tol: f64,
) -> Result<DefectReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tol must be nonnegative, got {tol}")));
    }
    let grid = sub.grid;
    let d = map.degree();
    let c = sub.centering;
    let tilde: Vec<f64> = (0..grid.size).map(|i| phi.value(grid.point(i)) - c).collect();

    let defects: Vec<f64> = (0..grid.size)
        .map(|i| tilde[i] + sub.values[i] - sub.values[grid.forward_index(d, i)])
        .collect();
    let (argmin_i, min_defect) = defects.iter().copied().enumerate().fold(
        (0, f64::INFINITY),
        |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
    );
    let mean_defect = defects.iter().sum::<f64>() / defects.len() as f64;

    let exact_worst = match &sub.construction {
        Construction::Supplied => None,
        Construction::ManeInf { depth } => {
            let depth = *depth;
            let mut images: Vec<usize> = (0..grid.size).map(|i| grid.forward_index(d, i)).collect();
            images.sort_unstable();
            images.dedup();
            let deeper: Vec<(usize, f64)> = images
                .par_iter()
                .map(|&k| (k, mane_value(map, phi, c, grid.point(k), depth + 1)))
                .collect();
            let mut at = vec![f64::NAN; grid.size];
            for (k, v) in deeper {
                at[k] = v;
            }
            Some(
                (0..grid.size)
                    .map(|i| at[grid.forward_index(d, i)] - (sub.raw(i) + tilde[i]))
                    .fold(f64::NEG_INFINITY, f64::max),
            )
        }
        Construction::LaxOleinik { .. } => {
            let op = subaction::LaxOleinikOperator::new(map, phi, c, grid);
            Some(
                (0..grid.size)
                    .map(|i| op.apply_at(&sub.values, grid.forward_index(d, i)) - (sub.values[i] + tilde[i]))
                    .fold(f64::NEG_INFINITY, f64::max),
            )
        }
    };
    let exact_invariant_ok = exact_worst.map(|w| w <= EXACT_SLACK);
    Ok(DefectReport {
        min_defect,
        argmin: grid.point(argmin_i),
        mean_defect,
        exact_invariant_ok,
        exact_worst,
        tolerance: tol,
        pass: min_defect >= -tol && exact_invariant_ok != Some(false),
        defects,
    })
}

/// `max |v(x) - v(y)| / d(x, y)^alpha` over all pairs, with the circle
/// distance.
pub fn holder_seminorm_estimate(points: &[f64], values: &[f64], alpha: f64) -> Result<f64> {
    if points.len() < 2 || points.len() != values.len() {
        return Err(Error::InvalidInput(
            "need at least 2 points and one value per point".into(),
        ));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in i + 1..points.len() {
                let dist = circle_distance(points[i], points[j]);
                if dist > 0.0 {
                    worst = worst.max((values[i] - values[j]).abs() / dist.powf(alpha));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max))
}

/// `‖phi‖_alpha / (1 - d^{-alpha})`: the Hölder bound for subactions of
/// `x -> d x`, whose inverse branches contract by `d^{-i}` after `i` steps.
pub fn subaction_holder_bound(phi_seminorm: f64, degree: usize, alpha: f64) -> f64 {
    phi_seminorm / (1.0 - (degree as f64).powf(-alpha))
}

#[derive(Debug, Clone, Serialize)]
pub struct Sandwich {
    /// Infimum construction for `phi`; `lambda_1 = -values`.
    pub lower: SubactionGrid,
    /// Infimum construction for `-phi`; `lambda_2 = values`.
    pub upper: SubactionGrid,
    pub lower_report: DefectReport,
    pub upper_report: DefectReport,
}

/// Builds `lambda_1 - lambda_1 o f <= phi <= lambda_2 - lambda_2 o f` for a
/// potential whose periodic averages all vanish.
pub fn two_sided_sandwich(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    grid: CircleGrid,
    depth: usize,
    tol: f64,
    budget: u128,
) -> Result<Sandwich> {
    if let Some(w) = first_nonzero_average(map, phi, SANDWICH_PERIOD, SANDWICH_TOL, budget)? {
        return Err(Error::Hypothesis(format!(
            "periodic averages must vanish: period-{} orbit {:?} has average {:.12}",
            w.period,
            w.points,
            w.average.expect("evaluated")
        )));
    }
    let neg = phi.negated();
    let lower = mane_subaction(map, phi, 0.0, grid, depth, budget)?;
    let upper = mane_subaction(map, &neg, 0.0, grid, depth, budget)?;
    let lower_report = verify_subcohomology(map, phi, &lower, tol)?;
    let upper_report = verify_subcohomology(map, &neg, &upper, tol)?;
    Ok(Sandwich {
        lower,
        upper,
        lower_report,
        upper_report,
    })
}
