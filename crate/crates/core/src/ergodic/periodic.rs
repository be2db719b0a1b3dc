use serde::{Deserialize, Serialize};

use super::HolderPotential;
use crate::error::{Error, Result};
use crate::families::ExpandingCircle;

/// Largest period [`periodic_points`] accepts.
pub const MAX_PERIOD: usize = 24;

/// A cycle of `x -> d x mod 1`. Every point is `k / (d^n - 1)` for the
/// enumeration period `n`; `numerator` and `modulus` record the smallest
/// point of the cycle exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub points: Vec<f64>,
    pub period: usize,
    pub numerator: u64,
    pub modulus: u64,
    /// Birkhoff average of the active potential, once evaluated.
    pub average: Option<f64>,
}

impl PeriodicOrbit {
    pub fn birkhoff_average(&self, phi: &HolderPotential) -> f64 {
        self.points.iter().map(|&x| phi.value(x)).sum::<f64>() / self.period as f64
    }

    pub fn with_average(mut self, phi: &HolderPotential) -> Self {
        self.average = Some(self.birkhoff_average(phi));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sup,
    Inf,
}

fn cycles(map: &ExpandingCircle, n: usize, budget: u128, exact_only: bool) -> Result<Vec<PeriodicOrbit>> {
    if n == 0 || n > MAX_PERIOD {
        return Err(Error::InvalidInput(format!(
            "period must lie in 1..={MAX_PERIOD}, got {n}"
        )));
    }
    let d = map.degree_u32() as u128;
    let needed = d.pow(n as u32);
    if needed > budget {
        return Err(Error::Budget {
            what: format!("period-{n} point enumeration"),
            needed,
            budget,
        });
    }
    let modulus = (needed - 1) as u64;
    let d = d as u64;
    let mut seen = vec![false; modulus as usize];
    let mut out = Vec::new();
    for k in 0..modulus {
        if seen[k as usize] {
            continue;
        }
        let mut cycle = vec![k];
        seen[k as usize] = true;
        let mut j = (k * d) % modulus;
        while j != k {
            seen[j as usize] = true;
            cycle.push(j);
            j = (j * d) % modulus;
        }
        if exact_only && cycle.len() != n {
            continue;
        }
        let m = modulus as f64;
        out.push(PeriodicOrbit {
            points: cycle.iter().map(|&i| i as f64 / m).collect(),
            period: cycle.len(),
            numerator: k,
            modulus,
            average: None,
        });
    }
    out.sort_by_key(|o| (o.period, o.numerator));
    Ok(out)
}

/// All cycles whose exact period divides `n`, one per cycle, ordered by
/// `(period, smallest point)`.
pub fn periodic_points(map: &ExpandingCircle, n: usize, budget: u128) -> Result<Vec<PeriodicOrbit>> {
    cycles(map, n, budget, false)
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicValueEstimate {
    pub value: f64,
    pub witness: PeriodicOrbit,
    pub max_period: usize,
    pub direction: Direction,
    pub orbits_searched: usize,
    /// Extremal average over periods `<= p`, for `p = 1..=max_period`.
    pub running: Vec<f64>,
}

/// Extremal Birkhoff average over all cycles of period `<= max_period`.
/// Ties keep the first cycle in `(period, smallest point)` order.
pub fn estimate_ergodic_value(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    max_period: usize,
    direction: Direction,
    budget: u128,
) -> Result<ErgodicValueEstimate> {
    if max_period == 0 {
        return Err(Error::InvalidInput("max_period must be >= 1".into()));
    }
    let mut best: Option<PeriodicOrbit> = None;
    let mut searched = 0;
    let mut running = Vec::with_capacity(max_period);
    for p in 1..=max_period {
        for orbit in cycles(map, p, budget, true)? {
            searched += 1;
            let orbit = orbit.with_average(phi);
            let avg = orbit.average.expect("just evaluated");
            let better = match &best {
                None => true,
                Some(b) => {
                    let cur = b.average.expect("evaluated");
                    match direction {
                        Direction::Sup => avg > cur,
                        Direction::Inf => avg < cur,
                    }
                }
            };
            if better {
                best = Some(orbit);
            }
        }
        running.push(
            best.as_ref()
                .and_then(|b| b.average)
                .expect("period 1 always has a fixed point"),
        );
    }
    let witness = best.expect("period 1 always has a fixed point");
    Ok(ErgodicValueEstimate {
        value: witness.average.expect("evaluated"),
        witness,
        max_period,
        direction,
        orbits_searched: searched,
        running,
    })
}

/// First cycle of period `<= max_period`, in enumeration order, whose average
/// deviates from zero by more than `tol`.
pub fn first_nonzero_average(
    map: &ExpandingCircle,
    phi: &HolderPotential,
    max_period: usize,
    tol: f64,
    budget: u128,
) -> Result<Option<PeriodicOrbit>> {
    for p in 1..=max_period {
        for orbit in cycles(map, p, budget, true)? {
            let orbit = orbit.with_average(phi);
            if orbit.average.expect("evaluated").abs() > tol {
                return Ok(Some(orbit));
            }
        }
    }
    Ok(None)
}
