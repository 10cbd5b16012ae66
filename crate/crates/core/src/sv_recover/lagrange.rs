use nalgebra::Vector2;

use crate::{Error, Result, Vec3};

/// Homogeneous linear form `F(x) = ⟨c, x⟩` on ℝ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearForm {
    pub coeffs: Vector2<f64>,
}

impl LinearForm {
    pub fn eval(&self, x: &Vector2<f64>) -> f64 {
        self.coeffs.dot(x)
    }
}

fn det2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// The unique linear form with `F(vᵢ) = yᵢ`, built from the cofactor ratios
/// `lᵢ(x) = Δᵢ(x)/Δ` (row `i` of the frame replaced by `x`).
pub fn lagrange_weights(v: [Vector2<f64>; 2], y: [f64; 2], eps_rank: f64) -> Result<LinearForm> {
    let delta = det2(&v[0], &v[1]);
    if !(delta.abs() > eps_rank * v[0].norm() * v[1].norm()) {
        return Err(Error::SingularFrame { det: delta, eps: eps_rank });
    }
    // l₁(x) = det(x, v₂)/Δ and l₂(x) = det(v₁, x)/Δ, linear in x.
    let l1 = Vector2::new(v[1].y, -v[1].x) / delta;
    let l2 = Vector2::new(-v[0].y, v[0].x) / delta;
    Ok(LinearForm { coeffs: l1 * y[0] + l2 * y[1] })
}

/// Plane coordinates `(⟨x, e¹⟩, ⟨x, e²⟩)`.
pub fn plane_coords(x: &Vec3, e1: &Vec3, e2: &Vec3) -> Vector2<f64> {
    Vector2::new(x.dot(e1), x.dot(e2))
}

/// Split of the interpolation weight of intersection point `γᵢ` for a
/// tangent vector `v`, with `γᵢⱼ = γᵢ − γⱼ` the chord to the other point:
/// for `x = γᵢ + tᵢξᵢ` in the plane,
/// `⟨f(x), v⟩ = Σᵢ ⟨f(x), ξᵢ⟩ (w(ξᵢ) + tᵢ w̃(ξᵢ))` with
/// `w(ξ) = det(v, γᵢⱼ)/det(ξ, γᵢⱼ)` and `w̃(ξ) = det(v, ξ)/det(ξ, γᵢⱼ)`.
///
/// Both pieces blow up like `1/sin θ` as `ξ` approaches the chord line.
pub fn weight_split(v: &Vector2<f64>, chord: &Vector2<f64>, xi: &Vector2<f64>) -> (f64, f64) {
    let d = det2(xi, chord);
    (det2(v, chord) / d, det2(v, xi) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_frame() {
        let f = lagrange_weights([Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)], [3.0, 5.0], 1e-6).unwrap();
        assert!((f.coeffs - Vector2::new(3.0, 5.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_frame() {
        let f = lagrange_weights([Vector2::new(1.0, 1.0), Vector2::new(1.0, -1.0)], [2.0, 0.0], 1e-6).unwrap();
        assert!((f.coeffs - Vector2::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_frame_is_rejected() {
        let r = lagrange_weights([Vector2::new(1.0, 2.0), Vector2::new(2.0, 4.0)], [1.0, 1.0], 1e-6);
        assert!(matches!(r, Err(Error::SingularFrame { .. })));
    }

    proptest! {
        #[test]
        fn reproduces_data_and_is_unique(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
            y1 in -5.0f64..5.0, y2 in -5.0f64..5.0, x1 in -3.0f64..3.0, x2 in -3.0f64..3.0,
        ) {
            let v = [Vector2::new(a, b), Vector2::new(c, d)];
            prop_assume!((a * d - b * c).abs() > 0.1);
            let f = lagrange_weights(v, [y1, y2], 1e-6).unwrap();
            prop_assert!((f.eval(&v[0]) - y1).abs() < 1e-10 * (1.0 + y1.abs()));
            prop_assert!((f.eval(&v[1]) - y2).abs() < 1e-10 * (1.0 + y2.abs()));
            // A second construction from the swapped frame agrees everywhere.
            let g = lagrange_weights([v[1], v[0]], [y2, y1], 1e-6).unwrap();
            let x = Vector2::new(x1, x2);
            prop_assert!((f.eval(&x) - g.eval(&x)).abs() < 1e-12 * (1.0 + f.eval(&x).abs()));
        }

        #[test]
        fn weight_split_reassembles_tangent_component(
            g1 in -3.0f64..3.0, g2 in -3.0f64..3.0, h1 in -3.0f64..3.0, h2 in -3.0f64..3.0,
            x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, f1 in -1.0f64..1.0, f2 in -1.0f64..1.0,
            v1 in -1.0f64..1.0, v2 in -1.0f64..1.0,
        ) {
            let (ga, gb) = (Vector2::new(g1, g2), Vector2::new(h1, h2));
            let x = Vector2::new(x1, x2);
            let (ra, rb) = (x - ga, x - gb);
            prop_assume!(det2(&ra, &rb).abs() > 0.05 * ra.norm() * rb.norm() && ra.norm() > 0.1 && rb.norm() > 0.1);
            let f = Vector2::new(f1, f2);
            let v = Vector2::new(v1, v2);
            let mut total = 0.0;
            for (r, chord) in [(ra, ga - gb), (rb, gb - ga)] {
                let t = r.norm();
                let xi = r / t;
                let (w, wt) = weight_split(&v, &chord, &xi);
                total += f.dot(&xi) * (w + t * wt);
            }
            prop_assert!((total - f.dot(&v)).abs() < 1e-8 * (1.0 + f.norm() * v.norm()), "{} vs {}", total, f.dot(&v));
        }
    }
}
