//! Whole-space and bounded Helmholtz decompositions of the off-center blob,
//! which has no closed-form split.
//!
//! cargo run --example helmholtz

use restray::decompose::{bounded_decompose, helmholtz_split, solenoidal_from_w, SolverOptions};
use restray::field::{relative_l2, saint_venant, BlobPhantom, GridSpec, Phantom, VectorGrid};
use restray::geometry::Aabb;

fn comps(f: &VectorGrid) -> [&[f64]; 3] {
    f.comps.each_ref().map(|c| c.as_slice())
}

fn main() -> restray::Result<()> {
    let ph = BlobPhantom::default();
    let grid = GridSpec::cube(49, 1.6);
    let f = VectorGrid::from_fn(grid, |x| ph.f(x));

    let spectral = helmholtz_split(&f, 2.0);
    let from_w = solenoidal_from_w(&saint_venant(&f), 0);
    println!("spectral split: divergence residual {:.2e}", spectral.divergence_residual);
    println!("f^s from Wf vs spectral split: relative L2 {:.3e}", relative_l2(&comps(&from_w), &comps(&spectral.fs)));

    let b = Aabb::cube(1.0);
    let split = bounded_decompose(&f, &b, &SolverOptions::default(), None)?;
    println!(
        "bounded split on [-1,1]³: {} CG iterations, residual {:.2e}, |f^s_B| / |f| = {:.3}",
        split.stats.iterations,
        split.stats.residual,
        split.fs.norm_l2() / f.norm_l2()
    );
    Ok(())
}
