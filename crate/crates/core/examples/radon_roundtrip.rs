//! Radon transform of a Gaussian and its inversion from the second
//! p-derivative, at three resolutions.
//!
//! cargo run --example radon_roundtrip

use restray::field::{relative_l2, GridSpec, ScalarGrid};
use restray::geometry::{Aabb, SphereLayout};
use restray::radon::{d_dp, invert, radon, RadonSpec};

fn main() -> restray::Result<()> {
    let b = Aabb::cube(1.0);
    let gauss = |x: &restray::Vec3| (-x.norm_squared() / 0.3).exp();
    for (n, n_theta, n_p) in [(33, 16, 128), (49, 24, 192), (65, 32, 256)] {
        let gs = GridSpec::cube(n, 2.0);
        let g = ScalarGrid::from_fn(gs, gauss);
        let spec = RadonSpec { directions: SphereLayout::Hemisphere { n_theta, n_phi: 2 * n_theta }, n_p, p_max: 2.2 };
        let back = invert(&d_dp(&radon(&g, &spec)?, 2)?, &gs, &b)?.remove(0);
        let truth = ScalarGrid::from_fn(gs, |x| if b.contains(x) { gauss(x) } else { 0.0 });
        println!("grid {n}³, {n_theta}x{} hemisphere, {n_p} offsets: relative L2 {:.3e}", 2 * n_theta, relative_l2(&[&back.values], &[&truth.values]));
    }
    Ok(())
}
