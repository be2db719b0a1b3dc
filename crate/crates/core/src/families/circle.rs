use crate::dynamics::{circle_distance, signed_circle_diff, wrap, BranchedMap, Domain, DynamicalSystem};
use crate::error::{Error, Result};

/// `x -> d x mod 1` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandingCircle {
    degree: u32,
}

impl ExpandingCircle {
    pub fn new(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidInput(format!(
                "expanding circle map needs degree >= 2, got {degree}"
            )));
        }
        Ok(Self { degree })
    }

    pub fn degree_u32(&self) -> u32 {
        self.degree
    }
}

pub fn make_expanding_circle(d: u32) -> Result<ExpandingCircle> {
    ExpandingCircle::new(d)
}

impl DynamicalSystem for ExpandingCircle {
    type Point = f64;

    fn name(&self) -> String {
        match self.degree {
            2 => "doubling".to_string(),
            d => format!("expanding:d={d}"),
        }
    }

    fn domain(&self) -> Domain {
        Domain::Circle
    }

    fn contains(&self, p: &f64) -> bool {
        (0.0..1.0).contains(p)
    }

    #[inline]
    fn forward(&self, p: &f64) -> f64 {
        wrap(self.degree as f64 * p)
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        circle_distance(*a, *b)
    }

    fn expansion(&self, _p: &f64) -> f64 {
        self.degree as f64
    }

    fn jacobian(&self, _p: &f64) -> f64 {
        self.degree as f64
    }

    fn critical_distance(&self, _p: &f64) -> Option<f64> {
        None
    }
}

impl BranchedMap for ExpandingCircle {
    fn degree(&self) -> usize {
        self.degree as usize
    }

    #[inline]
    fn branch(&self, j: usize, x: f64) -> Option<f64> {
        (j < self.degree as usize).then(|| (x + j as f64) / self.degree as f64)
    }

    fn branch_index(&self, y: f64) -> usize {
        ((y * self.degree as f64).floor() as usize).min(self.degree as usize - 1)
    }

    fn branch_boundary_distance(&self, y: f64) -> f64 {
        let t = (y * self.degree as f64).rem_euclid(1.0);
        t.min(1.0 - t) / self.degree as f64
    }

    fn derivative(&self, _x: f64) -> f64 {
        self.degree as f64
    }

    fn full_branches(&self) -> bool {
        true
    }

    fn critical_points(&self) -> Vec<f64> {
        Vec::new()
    }

    fn interval_image(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let d = self.degree as f64;
        let len = d * (hi - lo);
        if len >= 1.0 - 1e-12 {
            return vec![(0.0, 1.0)];
        }
        let start = wrap(d * lo);
        let end = start + len;
        if end <= 1.0 {
            vec![(start, end)]
        } else {
            vec![(start, 1.0), (0.0, end - 1.0)]
        }
    }

    fn local_inverse(&self, pre_center: f64, image_center: f64, y: f64) -> Option<f64> {
        Some(wrap(
            pre_center + signed_circle_diff(y, image_center) / self.degree as f64,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degree_one() {
        assert!(ExpandingCircle::new(1).is_err());
        assert_eq!(ExpandingCircle::new(2).unwrap().name(), "doubling");
    }

    #[test]
    fn branches_invert_forward() {
        let t = ExpandingCircle::new(5).unwrap();
        for k in 0..100 {
            let x = k as f64 / 100.0;
            for j in 0..5 {
                let y = t.branch(j, x).unwrap();
                assert_eq!(t.branch_index(y), j);
                assert!(circle_distance(t.forward(&y), x) < 1e-12);
            }
        }
        assert_eq!(t.branch(5, 0.2), None);
    }

    #[test]
    fn local_inverse_follows_center_across_zero() {
        let t = ExpandingCircle::new(2).unwrap();
        // center 0.999 maps to 0.998; a point at 0.002 is 0.004 away
        let y = t.local_inverse(0.999, 0.998, 0.002).unwrap();
        assert!(circle_distance(y, 0.001) < 1e-15);
    }

    #[test]
    fn wrapped_image() {
        let t = ExpandingCircle::new(2).unwrap();
        let img = t.interval_image(0.4, 0.6);
        assert_eq!(img.len(), 2);
        assert!((img[0].0 - 0.8).abs() < 1e-15 && img[0].1 == 1.0);
        assert!(img[1].0 == 0.0 && (img[1].1 - 0.2).abs() < 1e-15);
    }
}
