use nalgebra::Matrix3x2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::curve::Curve;
use super::plane::{intersect, intersection_points, Aabb, Hyperplane};
use super::sphere::tangent_frame;
use crate::Vec3;

/// Monte-Carlo diagnostics of the Kirillov-Tuy condition of order 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtReport {
    pub planes_sampled: usize,
    /// Planes with roots where transversality or rank fell under threshold
    /// (the measure-zero set); excluded from the pass fraction.
    pub planes_degenerate: usize,
    /// Planes offering fewer than two curve points.
    pub planes_insufficient: usize,
    pub points_tested: usize,
    pub points_passed: usize,
    pub pass_fraction: f64,
    pub min_transversality: f64,
    pub mean_transversality: f64,
    pub min_singular_value: f64,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Samples `n_planes` random planes meeting `domain` and `n_points` random
/// points in each plane section; a point passes when the unit frame
/// `{x−γ₁, x−γ₂}` has smallest singular value above `eps_rank`.
pub fn check_kirillov_tuy(
    curve: &Curve,
    domain: &Aabb,
    n_planes: usize,
    n_points: usize,
    seed: u64,
    eps_t: f64,
    eps_rank: f64,
) -> KtReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = KtReport {
        planes_sampled: 0,
        planes_degenerate: 0,
        planes_insufficient: 0,
        points_tested: 0,
        points_passed: 0,
        pass_fraction: 0.0,
        min_transversality: f64::INFINITY,
        mean_transversality: 0.0,
        min_singular_value: f64::INFINITY,
    };
    let center = domain.center();
    let reach = domain.circumradius();
    let mut t_sum = 0.0;
    let mut t_count = 0usize;
    for _ in 0..n_planes.max(1) {
        let omega = random_unit(&mut rng);
        let (lo, hi) = domain.offset_range(&omega);
        let plane = Hyperplane::new(omega, rng.random_range(lo..hi));
        rep.planes_sampled += 1;

        let Some(frame) = intersect(curve, &plane, eps_t) else {
            let roots = intersection_points(curve, &plane);
            if roots.len() >= 2 {
                rep.planes_degenerate += 1;
            } else {
                rep.planes_insufficient += 1;
            }
            continue;
        };
        for p in &frame.points {
            rep.min_transversality = rep.min_transversality.min(p.transversality);
            t_sum += p.transversality;
            t_count += 1;
        }

        // Points of H ∩ B by rejection from the plane patch around the box.
        let (e1, e2) = tangent_frame(&plane.omega);
        let base = plane.omega * plane.p + (center - plane.omega * plane.omega.dot(&center));
        let mut plane_fail = 0;
        let mut plane_ok = 0;
        let mut min_sv = f64::INFINITY;
        for _ in 0..n_points.max(1) {
            let mut x = None;
            for _ in 0..1000 {
                let c = base + e1 * rng.random_range(-reach..reach) + e2 * rng.random_range(-reach..reach);
                if domain.contains(&c) {
                    x = Some(c);
                    break;
                }
            }
            let Some(x) = x else { break };
            let a = (x - frame.points[0].pos).normalize();
            let b = (x - frame.points[1].pos).normalize();
            let sv = Matrix3x2::from_columns(&[a, b]).singular_values().min();
            min_sv = min_sv.min(sv);
            if sv > eps_rank {
                plane_ok += 1;
            } else {
                plane_fail += 1;
            }
        }
        rep.min_singular_value = rep.min_singular_value.min(min_sv);
        rep.points_tested += plane_ok + plane_fail;
        rep.points_passed += plane_ok;
    }
    let tested_planes = rep.planes_sampled - rep.planes_degenerate;
    // Planes without two points fail every one of their points.
    let failed_points = rep.planes_insufficient * n_points.max(1);
    let denom = rep.points_tested + failed_points;
    rep.pass_fraction = if tested_planes == 0 || denom == 0 { 0.0 } else { rep.points_passed as f64 / denom as f64 };
    rep.mean_transversality = if t_count > 0 { t_sum / t_count as f64 } else { 0.0 };
    if t_count == 0 {
        rep.min_transversality = 0.0;
    }
    if !rep.min_singular_value.is_finite() {
        rep.min_singular_value = 0.0;
    }
    rep
}

/// True when the curve misses `domain` and, from every sampled curve point,
/// no direction has both opposite rays meeting the box.
pub fn check_encompasses(curve: &Curve, domain: &Aabb) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..curve.arcs.len() {
        let (a, b) = curve.arcs[k].interval();
        let n = curve.samples_per_arc.max(256);
        for j in 0..=n {
            let pos = curve.eval(k, a + (b - a) * j as f64 / n as f64);
            if domain.contains(&pos) {
                return false;
            }
            if j % 16 != 0 {
                continue;
            }
            for _ in 0..32 {
                let xi = random_unit(&mut rng);
                if let Some((t0, t1)) = domain.ray_interval(&pos, &xi) {
                    if t0 <= 0.0 && t1 >= 0.0 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurveSpec;

    #[test]
    fn three_circles_pass_everywhere() {
        let curve = Curve::three_circles(3.5, 64);
        let rep = check_kirillov_tuy(&curve, &Aabb::cube(1.0), 200, 10, 7, 1e-3, 1e-6);
        assert_eq!(rep.pass_fraction, 1.0, "{rep:?}");
    }

    #[test]
    fn single_line_fails() {
        let curve = Curve::single_line(Vec3::new(1.0, 0.2, 0.1), 10.0, 64);
        let rep = check_kirillov_tuy(&curve, &Aabb::cube(1.0), 200, 10, 7, 1e-3, 1e-6);
        assert!(rep.pass_fraction <= 0.01, "{rep:?}");
    }

    #[test]
    fn two_independent_lines_pass_almost_everywhere() {
        let curve = CurveSpec::LineUnion { directions: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], half_length: 1.0e4 }
            .build(64)
            .unwrap();
        let rep = check_kirillov_tuy(&curve, &Aabb::cube(1.0), 300, 10, 3, 1e-3, 1e-6);
        assert!(rep.pass_fraction > 0.99, "{rep:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let curve = Curve::three_circles(3.5, 64);
        let a = check_kirillov_tuy(&curve, &Aabb::cube(1.0), 50, 5, 11, 1e-3, 1e-6);
        let b = check_kirillov_tuy(&curve, &Aabb::cube(1.0), 50, 5, 11, 1e-3, 1e-6);
        assert_eq!(a, b);
    }

    #[test]
    fn encompassing() {
        let b = Aabb::cube(1.0);
        assert!(check_encompasses(&Curve::three_circles(3.5, 64), &b));
        assert!(!check_encompasses(&Curve::three_circles(1.0, 64), &b));
        assert!(!check_encompasses(&Curve::single_line(Vec3::x(), 3.0, 64), &b));
    }
}
