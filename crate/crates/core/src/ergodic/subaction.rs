use rayon::prelude::*;
use serde::Serialize;

use super::HolderPotential;
use crate::dynamics::BranchedMap;
use crate::error::{Error, Result};
use crate::families::ExpandingCircle;

/// Largest grid [`CircleGrid`] accepts (2^26 points).
pub const MAX_GRID: usize = 1 << 26;

/// The uniform grid `{i / size : 0 <= i < size}` on the circle. It is closed
/// under every map `x -> d x mod 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircleGrid {
    pub size: usize,
}

impl CircleGrid {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=MAX_GRID).contains(&size) {
            return Err(Error::InvalidInput(format!(
                "grid size must lie in 2..={MAX_GRID}, got {size}"
            )));
        }
        Ok(Self { size })
    }

    /// `base^level` points; `base = d` gives the grid whose preimages under
    /// `x -> d x` refine it.
    pub fn power(base: u32, level: u32) -> Result<Self> {
        let size = (base as u128)
            .checked_pow(level)
            .filter(|&s| s <= MAX_GRID as u128)
            .ok_or_else(|| Error::InvalidInput(format!("grid {base}^{level} is too large")))?;
        Self::new(size as usize)
    }

    pub fn dyadic(level: u32) -> Result<Self> {
        Self::power(2, level)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.size as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.point(i)).collect()
    }

    /// Index of `f(x_i)` for `f(x) = d x mod 1`.
    #[inline]
    pub fn forward_index(&self, degree: usize, i: usize) -> usize {
        ((i as u128 * degree as u128) % self.size as u128) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    ManeInf {
        depth: usize,
    },
    LaxOleinik {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
    Supplied,
}

/// Subaction values on a grid, shifted so that the minimum is 0.
#[derive(Debug, Clone, Serialize)]
pub struct SubactionGrid {
    pub grid: CircleGrid,
    pub values: Vec<f64>,
    /// Amount subtracted by the normalization; `values[i] + offset` is the
    /// raw value.
    pub offset: f64,
    pub centering: f64,
    pub construction: Construction,
    /// Set when the per-depth minima keep falling, i.e. the centering is too
    /// large for the infimum to stay bounded.
    pub divergent: bool,
    /// Grid minimum of the raw truncated infimum at depths `1..=N`.
    pub depth_minima: Vec<f64>,
}

impl SubactionGrid {
    #[inline]
    pub fn raw(&self, i: usize) -> f64 {
        self.values[i] + self.offset
    }

    /// A candidate given directly by its values.
    pub fn supplied(grid: CircleGrid, values: Vec<f64>, centering: f64) -> Result<Self> {
        if values.len() != grid.size {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                grid.size,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("subaction values must be finite".into()));
        }
        let offset = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            grid,
            values: values.iter().map(|v| v - offset).collect(),
            offset,
            centering,
            construction: Construction::Supplied,
            divergent: false,
            depth_minima: Vec::new(),
        })
    }

    pub fn nearest(&self, x: f64) -> f64 {
        let i = (x.rem_euclid(1.0) * self.grid.size as f64).round() as usize % self.grid.size;
        self.values[i]
    }
}

pub(crate) fn check_depth_budget(map: &ExpandingCircle, depth: usize, budget: u128) -> Result<()> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be >= 1".into()));
    }
    let leaves = (map.degree() as u128)
        .checked_pow(depth as u32)
        .unwrap_or(u128::MAX);
    if leaves > budget {
        return Err(Error::Budget {
            what: format!("depth-{depth} preimage tree"),
            needed: leaves,
            budget,
        });
    }
    Ok(())
}

fn descend(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    c: f64,
    x: f64,
    level: usize,
    sum: f64,
    best: &mut [f64],
) {
    let next = level + 1;
    for j in 0..map.degree() {
        let y = map.branch(j, x).expect("full branches");
        let s = sum + phi.value(y) - c;
        if s < best[next] {
            best[next] = s;
        }
        if next + 1 < best.len() {
            descend(map, phi, c, y, next, s, best);
        }
    }
}

/// `best[n] = min over y in f^{-n}(x) of S_n(phi - c)(y)` for `1 <= n <= depth`;
/// `best[0]` is unused.
pub fn chain_minima(map: &ExpandingCircle, phi: &HolderPotential, c: f64, x: f64, depth: usize) -> Vec<f64> {
    let mut best = vec![f64::INFINITY; depth + 1];
    if depth > 0 {
        descend(map, phi, c, x, 0, 0.0, &mut best);
    }
    best
}

/// Raw truncated infimum `lambda_N(x)` (no normalization).
pub fn mane_value(map: &ExpandingCircle, phi: &HolderPotential, c: f64, x: f64, depth: usize) -> f64 {
    chain_minima(map, phi, c, x, depth)[1..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Flags unbounded-below growth of the truncated infimum.
///
/// One extra depth can lower the minimum by at most `sup |phi - c|`, so the
/// test looks at the cumulative drop and at a sustained per-depth drift.
pub(crate) fn diverging(depth_minima: &[f64], sup_abs: f64) -> bool {
    if depth_minima.len() < 2 || sup_abs == 0.0 {
        return false;
    }
    let drop = depth_minima[0] - depth_minima[depth_minima.len() - 1];
    if drop > 10.0 * sup_abs {
        return true;
    }
    let steps: Vec<f64> = depth_minima.windows(2).map(|w| w[0] - w[1]).collect();
    steps.len() >= 4 && steps[steps.len() - 4..].iter().all(|&s| s > 0.1 * sup_abs)
}

/// `lambda_N(x) = min_{1 <= n <= N} min_{y in f^{-n}(x)} S_n(phi - c)(y)` on the
/// grid, by exhaustive descent of the inverse-branch tree of each point.
pub fn mane_subaction(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    c: f64,
    grid: CircleGrid,
    depth: usize,
    budget: u128,
) -> Result<SubactionGrid> {
    check_depth_budget(map, depth, budget)?;
    let per_point: Vec<Vec<f64>> = (0..grid.size)
        .into_par_iter()
        .map(|i| {
            let mut best = chain_minima(map, phi, c, grid.point(i), depth);
            for n in 2..=depth {
                best[n] = best[n].min(best[n - 1]);
            }
            best
        })
        .collect();

    let depth_minima: Vec<f64> = (1..=depth)
        .map(|n| per_point.iter().map(|b| b[n]).fold(f64::INFINITY, f64::min))
        .collect();
    let sup_abs = (0..grid.size)
        .map(|i| (phi.value(grid.point(i)) - c).abs())
        .fold(0.0, f64::max);
    let raw: Vec<f64> = per_point.iter().map(|b| b[depth]).collect();
    let offset = depth_minima[depth - 1];
    Ok(SubactionGrid {
        grid,
        values: raw.iter().map(|v| v - offset).collect(),
        offset,
        centering: c,
        construction: Construction::ManeInf { depth },
        divergent: diverging(&depth_minima, sup_abs),
        depth_minima,
    })
}

/// Preimage `(x_k + j) / d` of a grid point located on the grid as
/// `(index, fraction)`, computed in integer arithmetic.
#[inline]
pub(crate) fn preimage_slot(grid: CircleGrid, degree: usize, k: usize, j: usize) -> (usize, f64) {
    let num = k + j * grid.size;
    (num / degree, (num % degree) as f64 / degree as f64)
}

pub(crate) struct LaxOleinikOperator {
    degree: usize,
    grid: CircleGrid,
    /// For each grid point and branch: lower index, fraction, `phi - c` at the preimage.
    slots: Vec<(usize, f64, f64)>,
}

impl LaxOleinikOperator {
    pub(crate) fn new(map: &ExpandingCircle, phi: &HolderPotential, c: f64, grid: CircleGrid) -> Self {
        let d = map.degree();
        let slots = (0..grid.size)
            .flat_map(|k| (0..d).map(move |j| (k, j)))
            .map(|(k, j)| {
                let (idx, frac) = preimage_slot(grid, d, k, j);
                let y = map.branch(j, grid.point(k)).expect("full branches");
                (idx, frac, phi.value(y) - c)
            })
            .collect();
        Self {
            degree: d,
            grid,
            slots,
        }
    }

    #[inline]
    fn interp(&self, lambda: &[f64], idx: usize, frac: f64) -> f64 {
        if frac == 0.0 {
            lambda[idx]
        } else {
            let next = (idx + 1) % self.grid.size;
            lambda[idx] * (1.0 - frac) + lambda[next] * frac
        }
    }

    /// `(T lambda)(x_k) = min over preimages y of [lambda(y) + (phi - c)(y)]`,
    /// with `lambda` interpolated linearly between grid points.
    pub(crate) fn apply_at(&self, lambda: &[f64], k: usize) -> f64 {
        self.slots[k * self.degree..(k + 1) * self.degree]
            .iter()
            .map(|&(idx, frac, p)| self.interp(lambda, idx, frac) + p)
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn apply(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.grid.size)
            .into_par_iter()
            .map(|k| self.apply_at(lambda, k))
            .collect()
    }
}

/// Relative value iteration of the Lax-Oleinik operator from `lambda = 0`,
/// renormalizing to minimum 0 after every sweep.
pub fn lax_oleinik_fixed_point(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    c: f64,
    grid: CircleGrid,
    tol: f64,
    max_iter: usize,
) -> Result<SubactionGrid> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be >= 1".into()));
    }
    let op = LaxOleinikOperator::new(map, phi, c, grid);
    let mut lambda = vec![0.0; grid.size];
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let mut next = op.apply(&lambda);
        let m = next.iter().copied().fold(f64::INFINITY, f64::min);
        next.iter_mut().for_each(|v| *v -= m);
        let change = next
            .iter()
            .zip(&lambda)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        history.push(change);
        lambda = next;
        if change < tol {
            return Ok(SubactionGrid {
                grid,
                values: lambda,
                offset: 0.0,
                centering: c,
                construction: Construction::LaxOleinik {
                    iterations: it,
                    residual: change,
                    tol,
                },
                divergent: false,
                depth_minima: Vec::new(),
            });
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual: *history.last().expect("max_iter >= 1"),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn doubling() -> ExpandingCircle {
        ExpandingCircle::new(2).unwrap()
    }

    #[test]
    fn grid_basics() {
        let g = CircleGrid::dyadic(3).unwrap();
        assert_eq!(g.size, 8);
        assert_eq!(g.forward_index(2, 5), 2);
        assert_eq!(CircleGrid::power(3, 4).unwrap().size, 81);
        assert!(CircleGrid::dyadic(30).is_err());
        assert!(CircleGrid::new(1).is_err());
    }

    #[test]
    fn zero_potential_gives_zero() {
        let t = doubling();
        let phi = HolderPotential::constant(0.7);
        let g = CircleGrid::dyadic(5).unwrap();
        for depth in [1, 4, 9] {
            let s = mane_subaction(&t, &phi, 0.7, g, depth, 1 << 24).unwrap();
            assert!(s.values.iter().all(|&v| v == 0.0));
            assert!(!s.divergent);
        }
        let lo = lax_oleinik_fixed_point(&t, &phi, 0.7, g, 1e-12, 10).unwrap();
        assert_eq!(
            lo.construction,
            Construction::LaxOleinik {
                iterations: 1,
                residual: 0.0,
                tol: 1e-12
            }
        );
    }

    #[test]
    fn coboundary_raw_value_at_zero() {
        let t = doubling();
        let phi = HolderPotential::named("cob-sin", t).unwrap();
        let raw = mane_value(&t, &phi, 0.0, 0.0, 14);
        assert!((raw + 1.0).abs() < 1e-3);
    }

    #[test]
    fn budget_error() {
        let t = doubling();
        let phi = HolderPotential::constant(0.0);
        let g = CircleGrid::dyadic(2).unwrap();
        assert!(matches!(
            mane_subaction(&t, &phi, 0.0, g, 30, 1 << 24),
            Err(Error::Budget { .. })
        ));
        assert!(mane_subaction(&t, &phi, 0.0, g, 0, 1 << 24).is_err());
    }

    #[test]
    fn sup_centering_diverges() {
        let t = doubling();
        let phi = HolderPotential::named("one-minus-cos", t).unwrap();
        // centering at the 2-cycle average 1.5: chains parked near the fixed
        // point 0 lose about 1.5 per step
        let g = CircleGrid::dyadic(4).unwrap();
        let s = mane_subaction(&t, &phi, 1.5, g, 14, 1 << 24).unwrap();
        assert!(s.divergent);
        let s = mane_subaction(&t, &phi, 0.0, g, 14, 1 << 24).unwrap();
        assert!(!s.divergent);
    }

    #[test]
    fn lax_oleinik_coboundary_matches_transfer() {
        let t = doubling();
        let phi = HolderPotential::named("cob-sin", t).unwrap();
        let g = CircleGrid::dyadic(10).unwrap();
        let s = lax_oleinik_fixed_point(&t, &phi, 0.0, g, 1e-10, 10_000).unwrap();
        for i in 0..g.size {
            let expect = -(2.0 * PI * g.point(i)).sin() + 1.0;
            assert!((s.values[i] - expect).abs() < 5e-3, "i={i}");
        }
    }

    #[test]
    fn lax_oleinik_nonconvergence_reports_history() {
        let t = doubling();
        let phi = HolderPotential::named("mixed", t).unwrap();
        let g = CircleGrid::dyadic(6).unwrap();
        match lax_oleinik_fixed_point(&t, &phi, 0.0, g, 1e-14, 3) {
            Err(Error::Convergence {
                iterations, history, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 3);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn preimage_slots_are_exact() {
        let g = CircleGrid::dyadic(3).unwrap();
        assert_eq!(preimage_slot(g, 2, 3, 0), (1, 0.5));
        assert_eq!(preimage_slot(g, 2, 2, 1), (5, 0.0));
    }
}
