use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Orthonormal tangent frame `(e¹, e²)` of the plane orthogonal to `ω`:
/// Gram–Schmidt against the axis of the smallest `|ω|` component.
pub fn tangent_frame(omega: &Vec3) -> (Vec3, Vec3) {
    let k = (0..3).min_by(|&a, &b| omega[a].abs().total_cmp(&omega[b].abs())).unwrap();
    let mut axis = Vec3::zeros();
    axis[k] = 1.0;
    let e1 = (axis - omega * omega.dot(&axis)).normalize();
    let e2 = omega.cross(&e1);
    (e1, e2)
}

/// Layout of a direction quadrature, stored in file headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereLayout {
    LatLong { n_theta: usize, n_phi: usize },
    Hemisphere { n_theta: usize, n_phi: usize },
}

/// Unit directions with quadrature weights.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub layout: SphereLayout,
    pub nodes: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    /// Gauss–Legendre in `cos θ` times uniform longitude; weights sum to 4π.
    pub fn lat_long(n_theta: usize, n_phi: usize) -> Self {
        let (z, wz) = gauss_legendre(n_theta);
        Self::from_rings(&z, &wz, n_phi, SphereLayout::LatLong { n_theta, n_phi })
    }

    /// Upper half (`ω₃ > 0`) of a Gauss–Legendre grid with `2·n_theta`
    /// latitudes, so no node sits on the equator; weights sum to 2π.
    pub fn hemisphere(n_theta: usize, n_phi: usize) -> Self {
        let (z, wz) = gauss_legendre(2 * n_theta);
        Self::from_rings(&z[n_theta..], &wz[n_theta..], n_phi, SphereLayout::Hemisphere { n_theta, n_phi })
    }

    pub fn from_layout(layout: SphereLayout) -> Self {
        match layout {
            SphereLayout::LatLong { n_theta, n_phi } => Self::lat_long(n_theta, n_phi),
            SphereLayout::Hemisphere { n_theta, n_phi } => Self::hemisphere(n_theta, n_phi),
        }
    }

    fn from_rings(z: &[f64], wz: &[f64], n_phi: usize, layout: SphereLayout) -> Self {
        let mut nodes = Vec::with_capacity(z.len() * n_phi);
        let mut weights = Vec::with_capacity(z.len() * n_phi);
        let dphi = TAU / n_phi as f64;
        for (zi, wi) in z.iter().zip(wz) {
            let r = (1.0 - zi * zi).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = dphi * (j as f64 + 0.5);
                nodes.push(Vec3::new(r * phi.cos(), r * phi.sin(), *zi));
                weights.push(wi * dphi);
            }
        }
        Self { layout, nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `n` equispaced nodes on the unit circle `S(ω)` orthogonal to `ω`,
/// starting at `e¹(ω)`; each node carries weight `2π / n`.
pub fn circle_nodes(omega: &Vec3, n: usize) -> Vec<Vec3> {
    let (e1, e2) = tangent_frame(omega);
    (0..n)
        .map(|j| {
            let th = TAU * j as f64 / n as f64;
            e1 * th.cos() + e2 * th.sin()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((integral - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn weights_match_target_measure() {
        let s = SphereGrid::lat_long(24, 48);
        assert!((s.total_weight() - 2.0 * TAU).abs() < 1e-10);
        let h = SphereGrid::hemisphere(24, 48);
        assert!((h.total_weight() - TAU).abs() < 1e-10);
        assert!(h.nodes.iter().all(|n| n.z > 0.0 && (n.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cos_squared_average_is_one_third() {
        let s = SphereGrid::hemisphere(16, 32);
        let x = Vec3::new(0.3, -0.5, 0.8).normalize();
        let avg: f64 = s.nodes.iter().zip(&s.weights).map(|(n, w)| w * n.dot(&x).powi(2)).sum::<f64>()
            / s.total_weight();
        assert!((avg - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        for omega in [Vec3::z(), Vec3::new(1.0, 2.0, -0.5).normalize(), Vec3::new(1e-9, 1.0, 0.0).normalize()] {
            let (a, b) = tangent_frame(&omega);
            assert!(a.dot(&omega).abs() < 1e-14 && b.dot(&omega).abs() < 1e-14 && a.dot(&b).abs() < 1e-14);
            assert!((a.norm() - 1.0).abs() < 1e-14 && (b.norm() - 1.0).abs() < 1e-14);
        }
    }
}
