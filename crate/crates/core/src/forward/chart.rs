use crate::geometry::tangent_frame;
use crate::{Error, Result, Vec3};

/// Gnomonic chart of the directions from a curve point `a` towards a ball
/// `B(center, radius)`: `(u, v) ↦ (axis + u·e_u + v·e_v)/|…|`.
///
/// Great circles map to straight lines, and `(u, v)` are degree-0
/// homogeneous functions of `ξ`, which is what the derivatives in `ξ` act on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartFrame {
    pub origin: Vec3,
    pub axis: Vec3,
    pub eu: Vec3,
    pub ev: Vec3,
    /// Chart covers `|u|, |v| ≤ half_width`.
    pub half_width: f64,
}

impl ChartFrame {
    /// The frame follows the curve tangent so that it varies smoothly
    /// along each arc.
    pub fn new(origin: Vec3, tangent: &Vec3, center: &Vec3, radius: f64) -> Result<Self> {
        let to = center - origin;
        let d = to.norm();
        if !(d > radius * (1.0 + 1e-9)) {
            return Err(Error::Geometry(format!(
                "curve point {origin:?} lies inside the support ball (distance {d:.4} ≤ {radius:.4})"
            )));
        }
        let axis = to / d;
        let t = tangent - axis * axis.dot(tangent);
        let eu = if t.norm() > 1e-6 * tangent.norm() { t.normalize() } else { tangent_frame(&axis).0 };
        let ev = axis.cross(&eu);
        Ok(Self { origin, axis, eu, ev, half_width: radius / (d * d - radius * radius).sqrt() })
    }

    pub fn direction(&self, u: f64, v: f64) -> Vec3 {
        (self.axis + self.eu * u + self.ev * v).normalize()
    }

    /// Chart coordinates of any (not necessarily unit) vector in the
    /// forward half-space.
    pub fn coords(&self, xi: &Vec3) -> Option<(f64, f64)> {
        let z = xi.dot(&self.axis);
        if z <= 0.0 {
            return None;
        }
        Some((xi.dot(&self.eu) / z, xi.dot(&self.ev) / z))
    }

    /// Node coordinate `i` of an `n`-node axis.
    pub fn node(&self, i: usize, n: usize) -> f64 {
        -self.half_width + 2.0 * self.half_width * i as f64 / (n - 1) as f64
    }

    pub fn node_step(&self, n: usize) -> f64 {
        2.0 * self.half_width / (n - 1) as f64
    }

    /// Solid-angle density `dξ = du dv / (1 + u² + v²)^{3/2}`.
    pub fn area_density(u: f64, v: f64) -> f64 {
        (1.0 + u * u + v * v).powf(-1.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_and_cone() {
        let f = ChartFrame::new(Vec3::new(3.5, 0.0, 0.0), &Vec3::y(), &Vec3::zeros(), 1.0).unwrap();
        let xi = f.direction(0.1, -0.2);
        let (u, v) = f.coords(&(xi * 7.0)).unwrap();
        assert!((u - 0.1).abs() < 1e-14 && (v + 0.2).abs() < 1e-14);
        // Tangent ray to the ball hits the chart edge.
        let edge = f.direction(f.half_width, 0.0);
        let dist = (edge.cross(&(Vec3::zeros() - f.origin))).norm();
        assert!((dist - 1.0).abs() < 1e-12);
        assert!(ChartFrame::new(Vec3::new(0.5, 0.0, 0.0), &Vec3::y(), &Vec3::zeros(), 1.0).is_err());
    }

    #[test]
    fn solid_angle_of_a_cap() {
        // Integrate the density over the disc u²+v² ≤ tan²α: 2π(1 − cos α).
        let alpha: f64 = 0.3;
        let t = alpha.tan();
        let n = 2000;
        let mut s = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) / n as f64 * t;
            s += ChartFrame::area_density(r, 0.0) * 2.0 * PI * r * t / n as f64;
        }
        assert!((s - 2.0 * PI * (1.0 - alpha.cos())).abs() < 1e-6);
    }
}
