//! Monte-Carlo check of the curve condition for the three-circle curve and
//! for a single line, which fails it.
//!
//! cargo run --example kirillov_tuy

use restray::geometry::{check_kirillov_tuy, check_encompasses, Aabb, Curve};
use restray::Vec3;

fn main() {
    let b = Aabb::cube(1.0);
    let circles = Curve::three_circles(3.5, 64);
    let line = Curve::single_line(Vec3::new(1.0, 0.3, 0.2), 5.0, 64);
    for (name, curve) in [("three circles R=3.5", &circles), ("single line", &line)] {
        let rep = check_kirillov_tuy(curve, &b, 500, 20, 7, 1e-3, 1e-6);
        println!(
            "{name:<22} encompassing {:<5} pass fraction {:.4} ({} of {} points, {} planes with < 2 points, {} degenerate)",
            check_encompasses(curve, &b),
            rep.pass_fraction,
            rep.points_passed,
            rep.points_tested,
            rep.planes_insufficient,
            rep.planes_degenerate
        );
    }
}
