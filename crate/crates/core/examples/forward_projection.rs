//! Doppler and first-moment data of the default phantom on the three-circle
//! curve, checked ray by ray against adaptive quadrature.
//!
//! cargo run --example forward_projection

use restray::field::{BumpPhantom, Phantom, PhantomField};
use restray::forward::{doppler, moment1, DirectionLayout};
use restray::geometry::Curve;
use restray::oracles::{oracle_moment, oracle_ray};

fn main() -> restray::Result<()> {
    let ph = BumpPhantom::default();
    let curve = Curve::three_circles(3.5, 32);
    let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n: 24 };
    let d = doppler(&PhantomField(&ph), &curve, layout, 0.01)?;
    let m = moment1(&PhantomField(&ph), &curve, layout, 0.01)?;
    println!("{} curve samples x {} directions, max |Df| {:.4}, max |If| {:.4}", d.n_samples(), d.n_dirs, d.max_abs(), m.max_abs());

    let mut worst = (0.0f64, 0.0f64);
    for k in (0..d.n_samples()).step_by(7) {
        let a = d.samples[k].pos;
        for j in (0..d.n_dirs).step_by(53) {
            let xi = d.direction(k, j);
            let f = |x: &restray::Vec3| ph.f(x);
            let od = oracle_ray(f, ph.support_radius(), &a, &xi, 1e-11);
            let om = oracle_moment(f, ph.support_radius(), &a, &xi, 1e-11);
            worst.0 = worst.0.max((d.values[k * d.n_dirs + j] - od).abs());
            worst.1 = worst.1.max((m.values[k * m.n_dirs + j] - om).abs());
        }
    }
    println!("max deviation from quadrature: Doppler {:.2e}, moment {:.2e}", worst.0, worst.1);
    Ok(())
}
