use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::sinogram::{DirectionLayout, Sinogram, SinogramKind};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{Aabb, Curve};
use crate::{Error, Result, Vec3};

/// Composite Simpson rule for `g` on `[t0, t1]` with step at most `step`.
pub fn simpson(t0: f64, t1: f64, step: f64, g: impl Fn(f64) -> f64) -> f64 {
    if !(t1 > t0) {
        return 0.0;
    }
    let mut m = ((t1 - t0) / step).ceil() as usize;
    m = (m + m % 2).max(2);
    let h = (t1 - t0) / m as f64;
    let mut acc = g(t0) + g(t1);
    for k in 1..m {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(t0 + k as f64 * h);
    }
    acc * h / 3.0
}

fn check_outside(curve: &Curve, support: &Aabb) -> Result<()> {
    for arc in 0..curve.arcs.len() {
        for s in curve.sample_params(arc) {
            let x = curve.eval(arc, s);
            if support.contains(&x) {
                return Err(Error::Geometry(format!("curve point {x:?} lies inside the field support")));
            }
        }
    }
    Ok(())
}

fn fill(sino: &mut Sinogram, support: &Aabb, ray: impl Fn(&Vec3, &Vec3, f64, f64) -> f64 + Sync) {
    let n_dirs = sino.n_dirs;
    let snapshot = &*sino;
    let rows: Vec<Vec<f64>> = (0..snapshot.n_samples())
        .into_par_iter()
        .map(|s| {
            let a = snapshot.samples[s].pos;
            (0..n_dirs)
                .map(|d| {
                    let xi = snapshot.direction(s, d);
                    match support.ray_interval(&a, &xi) {
                        Some((t0, t1)) => ray(&a, &xi, t0.max(0.0), t1),
                        None => 0.0,
                    }
                })
                .collect()
        })
        .collect();
    for (s, row) in rows.into_iter().enumerate() {
        sino.values[s * n_dirs..(s + 1) * n_dirs].copy_from_slice(&row);
    }
}


/// `∫₀^∞ ⟨f(a + tξ), ξ⟩ dt` for one ray.
pub fn doppler_ray(f: &dyn VectorField, a: &Vec3, xi: &Vec3, step: f64) -> f64 {
    match f.support().ray_interval(a, xi) {
        Some((t0, t1)) => simpson(t0.max(0.0), t1, step, |t| f.eval(&(a + xi * t)).dot(xi)),
        None => 0.0,
    }
}

/// `∫₀^∞ t ⟨f(a + tξ), ξ⟩ dt` for one ray.
pub fn moment1_ray(f: &dyn VectorField, a: &Vec3, xi: &Vec3, step: f64) -> f64 {
    match f.support().ray_interval(a, xi) {
        Some((t0, t1)) => simpson(t0.max(0.0), t1, step, |t| t * f.eval(&(a + xi * t)).dot(xi)),
        None => 0.0,
    }
}

/// `∫₀^∞ v(a + tξ) dt` for one ray.
pub fn xray_ray(v: &dyn ScalarField, a: &Vec3, xi: &Vec3, step: f64) -> f64 {
    match v.support().ray_interval(a, xi) {
        Some((t0, t1)) => simpson(t0.max(0.0), t1, step, |t| v.eval(&(a + xi * t))),
        None => 0.0,
    }
}

/// Restricted Doppler transform `∫₀^∞ ⟨f(a + tξ), ξ⟩ dt` with Simpson step `step`.
pub fn doppler(f: &dyn VectorField, curve: &Curve, layout: DirectionLayout, step: f64) -> Result<Sinogram> {
    let support = f.support();
    check_outside(curve, &support)?;
    let mut sino = Sinogram::zeros(SinogramKind::Doppler, curve, layout)?;
    fill(&mut sino, &support, |a, xi, t0, t1| simpson(t0, t1, step, |t| f.eval(&(a + xi * t)).dot(xi)));
    Ok(sino)
}

/// Restricted first moment transform `∫₀^∞ t ⟨f(a + tξ), ξ⟩ dt`.
pub fn moment1(f: &dyn VectorField, curve: &Curve, layout: DirectionLayout, step: f64) -> Result<Sinogram> {
    let support = f.support();
    check_outside(curve, &support)?;
    let mut sino = Sinogram::zeros(SinogramKind::Moment1, curve, layout)?;
    fill(&mut sino, &support, |a, xi, t0, t1| simpson(t0, t1, step, |t| t * f.eval(&(a + xi * t)).dot(xi)));
    Ok(sino)
}

/// Restricted scalar X-ray transform `∫₀^∞ v(a + tξ) dt`.
pub fn scalar_xray(v: &dyn ScalarField, curve: &Curve, layout: DirectionLayout, step: f64) -> Result<Sinogram> {
    let support = v.support();
    check_outside(curve, &support)?;
    let mut sino = Sinogram::zeros(SinogramKind::ScalarXray, curve, layout)?;
    fill(&mut sino, &support, |a, xi, t0, t1| simpson(t0, t1, step, |t| v.eval(&(a + xi * t))));
    Ok(sino)
}

/// Adds independent `N(0, σ²)` noise, reproducibly for a given seed.
pub fn add_noise(sino: &mut Sinogram, sigma: f64, seed: u64) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("noise sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in sino.values.iter_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}
