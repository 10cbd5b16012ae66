//! Brute-force reference computations.
//!
//! Everything here is slow and self-contained: the quadratures and the
//! Laplace solver share no code with the pipeline modules they are used to
//! check. Pipeline code must never import from this module.
//!
//! Error bounds: [`oracle_ray`] and [`oracle_radon`] honor the requested
//! absolute tolerance for integrands that are at least C² (the bisection
//! rule converges for kinks too, only slower). [`oracle_laplace`] is a
//! direct banded Cholesky solve, so its error is rounding only (about
//! `1e-13` relative at the size cap).

mod laplace;
mod quadrature;

pub use laplace::{oracle_laplace, MAX_ORACLE_NODES};
pub use quadrature::integrate;

/// The whole-space Helmholtz split computed spectrally from `f` itself.
pub use crate::decompose::helmholtz_oracle;

use crate::Vec3;

/// Line integral `∫ ⟨f(a + tξ), ξ⟩ dt` of a field supported in the ball of
/// radius `support_radius` around the origin, to absolute tolerance `tol`.
///
/// `xi` need not be normalized; the integral is taken in the parameter `t`.
pub fn oracle_ray(f: impl Fn(&Vec3) -> Vec3, support_radius: f64, a: &Vec3, xi: &Vec3, tol: f64) -> f64 {
    let xx = xi.norm_squared();
    if xx == 0.0 {
        return 0.0;
    }
    // the parameter range where the line is inside the support ball
    let tc = -a.dot(xi) / xx;
    let closest = a + xi * tc;
    let gap = support_radius * support_radius - closest.norm_squared();
    if gap <= 0.0 {
        return 0.0;
    }
    let half = gap.sqrt() / xx.sqrt();
    integrate(|t| f(&(a + xi * t)).dot(xi), tc - half, tc + half, tol)
}

/// Moment integral `∫_0^∞ t ⟨f(a + tξ), ξ⟩ dt`, same conventions as
/// [`oracle_ray`]; only the forward half-line from `a` is integrated.
pub fn oracle_moment(f: impl Fn(&Vec3) -> Vec3, support_radius: f64, a: &Vec3, xi: &Vec3, tol: f64) -> f64 {
    let xx = xi.norm_squared();
    if xx == 0.0 {
        return 0.0;
    }
    let tc = -a.dot(xi) / xx;
    let closest = a + xi * tc;
    let gap = support_radius * support_radius - closest.norm_squared();
    if gap <= 0.0 {
        return 0.0;
    }
    let half = gap.sqrt() / xx.sqrt();
    let lo = (tc - half).max(0.0);
    let hi = tc + half;
    if hi <= lo {
        return 0.0;
    }
    integrate(|t| t * f(&(a + xi * t)).dot(xi), lo, hi, tol)
}

/// Radon transform `∫_{⟨x,ω⟩=p} g` of a scalar function supported in the
/// ball of radius `support_radius`, by nested adaptive quadrature over the
/// disk where the plane meets the ball. `omega` must be a unit vector.
pub fn oracle_radon(g: impl Fn(&Vec3) -> f64, support_radius: f64, omega: &Vec3, p: f64, tol: f64) -> f64 {
    let rho2 = support_radius * support_radius - p * p;
    if rho2 <= 0.0 {
        return 0.0;
    }
    let rho = rho2.sqrt();
    // orthonormal basis of the plane, built without the pipeline helpers
    let helper = if omega.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - omega * omega.dot(&helper)).normalize();
    let e2 = omega.cross(&e1);
    let base = omega * p;
    let inner_tol = tol / (4.0 * rho);
    integrate(
        |s| {
            let half = (rho2 - s * s).max(0.0).sqrt();
            if half == 0.0 {
                return 0.0;
            }
            integrate(|t| g(&(base + e1 * s + e2 * t)), -half, half, inner_tol)
        },
        -rho,
        rho,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ray_of_gaussian_profile() {
        // f = exp(-|x|²) e_x along the x axis gives ∫ exp(-t²) dt = √π
        let f = |x: &Vec3| Vec3::x() * (-x.norm_squared()).exp();
        let v = oracle_ray(f, 9.0, &Vec3::new(-5.0, 0.0, 0.0), &Vec3::x(), 1e-12);
        assert!((v - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn ray_of_zero_field() {
        let v = oracle_ray(|_| Vec3::zeros(), 1.0, &Vec3::new(-2.0, 0.1, 0.0), &Vec3::x(), 1e-12);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn ray_missing_the_support() {
        let f = |_: &Vec3| Vec3::new(1.0, 1.0, 1.0);
        assert_eq!(oracle_ray(f, 1.0, &Vec3::new(0.0, 2.0, 0.0), &Vec3::x(), 1e-12), 0.0);
    }

    #[test]
    fn moment_of_constant_field() {
        // f = e_x on the unit ball, ray from (-2,0,0): ∫_1^3 t dt = 4
        let f = |x: &Vec3| if x.norm() < 1.0 { Vec3::x() } else { Vec3::zeros() };
        let v = oracle_moment(f, 1.0, &Vec3::new(-2.0, 0.0, 0.0), &Vec3::x(), 1e-10);
        assert!((v - 4.0).abs() < 1e-8);
    }

    #[test]
    fn radon_of_gaussian() {
        let g = |x: &Vec3| (-x.norm_squared()).exp();
        let omega = Vec3::new(0.3, -0.4, 0.5).normalize();
        let v = oracle_radon(g, 9.0, &omega, 0.0, 1e-10);
        assert!((v - PI).abs() < 1e-9);
        let v = oracle_radon(g, 9.0, &omega, 0.7, 1e-10);
        assert!((v - PI * (-0.49f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn radon_beyond_support() {
        let g = |_: &Vec3| 1.0;
        assert_eq!(oracle_radon(g, 1.0, &Vec3::z(), 1.5, 1e-9), 0.0);
    }

    #[test]
    fn radon_of_ball_indicator_area() {
        let g = |_: &Vec3| 1.0;
        let v = oracle_radon(g, 1.0, &Vec3::z(), 0.6, 1e-9);
        assert!((v - PI * 0.64).abs() < 1e-7);
    }
}
