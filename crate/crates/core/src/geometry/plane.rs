use serde::{Deserialize, Serialize};

use super::curve::{Curve, CurvePoint};
use crate::Vec3;

/// Axis-aligned box. The reconstruction domain `B` is always one of these.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn cube(half: f64) -> Self {
        Self::new(Vec3::repeat(-half), Vec3::repeat(half))
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Radius of the circumscribed sphere about the center.
    pub fn circumradius(&self) -> f64 {
        (self.max - self.min).norm() * 0.5
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|k| x[k] >= self.min[k] && x[k] <= self.max[k])
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            for k in 0..3 {
                c[k] = if (i >> k) & 1 == 0 { self.min[k] } else { self.max[k] };
            }
        }
        out
    }

    /// Range of offsets `p` for which `H(ω, p)` meets the box.
    pub fn offset_range(&self, omega: &Vec3) -> (f64, f64) {
        self.corners()
            .iter()
            .map(|c| omega.dot(c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)))
    }

    /// Parameter interval `[t0, t1]` where the line `a + tξ` lies in the box.
    pub fn ray_interval(&self, a: &Vec3, xi: &Vec3) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if xi[k].abs() < 1e-300 {
                if a[k] < self.min[k] || a[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let ta = (self.min[k] - a[k]) / xi[k];
            let tb = (self.max[k] - a[k]) / xi[k];
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// The hyperplane `H(ω, p) = {x : ⟨ω, x⟩ = p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub omega: Vec3,
    pub p: f64,
}

impl Hyperplane {
    /// Normalizes `omega`; panics on a zero normal.
    pub fn new(omega: Vec3, p: f64) -> Self {
        let n = omega.norm();
        assert!(n > 0.0, "hyperplane normal must be nonzero");
        Self { omega: omega / n, p: p / n }
    }

    /// `H(ω, p) = H(−ω, −p)`; the representative has `p > 0`, or `p = 0` and
    /// the first nonzero component of `ω` positive.
    pub fn canonical(self) -> Self {
        let flip = if self.p != 0.0 {
            self.p < 0.0
        } else {
            self.omega.iter().find(|c| **c != 0.0).is_some_and(|c| *c < 0.0)
        };
        if flip {
            Self { omega: -self.omega, p: -self.p }
        } else {
            self
        }
    }

    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.omega.dot(x) - self.p
    }
}

/// Intersection of a plane with the curve: the selected pair `γ₁, γ₂` plus
/// every transversal root found.
#[derive(Clone, Debug)]
pub struct IntersectionFrame {
    pub plane: Hyperplane,
    pub points: [CurvePoint; 2],
    /// All roots whose transversality exceeds the threshold, in curve order.
    pub candidates: Vec<CurvePoint>,
}

impl IntersectionFrame {
    pub fn params(&self) -> [(usize, f64); 2] {
        [(self.points[0].arc, self.points[0].s), (self.points[1].arc, self.points[1].s)]
    }

    pub fn transversality(&self) -> [f64; 2] {
        [self.points[0].transversality, self.points[1].transversality]
    }

    /// `γ₁₂ = γ₁ − γ₂`.
    pub fn pair_gap(&self) -> Vec3 {
        self.points[0].pos - self.points[1].pos
    }
}

/// All roots of `⟨ω, γ(s)⟩ = p` on every arc, with their transversality.
pub fn intersection_points(curve: &Curve, plane: &Hyperplane) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for (k, arc) in curve.arcs.iter().enumerate() {
        for s in arc.roots(&plane.omega, plane.p) {
            out.push(curve.point(k, s, &plane.omega));
        }
    }
    out
}

/// Selects the pair of transversal roots maximizing the minimum
/// transversality, preferring pairs from distinct arcs. Ties go to the
/// smallest curve parameter. `None` marks a degenerate plane.
pub fn intersect(curve: &Curve, plane: &Hyperplane, eps_t: f64) -> Option<IntersectionFrame> {
    let plane = plane.canonical();
    let candidates: Vec<CurvePoint> = intersection_points(curve, &plane)
        .into_iter()
        .filter(|c| c.transversality > eps_t)
        .collect();
    let min_gap = 1e-9 * (1.0 + plane.p.abs());
    let mut best: Option<(bool, f64, (usize, usize))> = None;
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let (a, b) = (&candidates[i], &candidates[j]);
            if (a.pos - b.pos).norm() <= min_gap {
                continue;
            }
            let distinct = a.arc != b.arc;
            let score = a.transversality.min(b.transversality);
            let better = match best {
                None => true,
                Some((bd, bs, _)) => (distinct && !bd) || (distinct == bd && score > bs),
            };
            if better {
                best = Some((distinct, score, (i, j)));
            }
        }
    }
    let (_, _, (i, j)) = best?;
    Some(IntersectionFrame {
        plane,
        points: [candidates[i].clone(), candidates[j].clone()],
        candidates,
    })
}
