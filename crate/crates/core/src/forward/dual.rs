use super::sampler::SinogramSampler;
use crate::field::{GridSpec, VectorGrid};
use crate::geometry::Aabb;
use crate::Vec3;
use rayon::prelude::*;

/// `(D_γ*φ)(x) = Σ_arcs ∫ (x − γ(s))/|x − γ(s)|³ · φ(s, (x − γ(s))/|x − γ(s)|) ds`,
/// with `φ` given as chart-layout sinogram data and the `s`-integral taken
/// over the curve samples.
pub fn dual_doppler(phi: &SinogramSampler, x: &Vec3) -> Vec3 {
    let sino = phi.sino;
    let mut acc = Vec3::zeros();
    for k in 0..sino.n_samples() {
        let r = x - sino.samples[k].pos;
        let d = r.norm();
        let Some((u, v)) = sino.frame(k).and_then(|f| f.coords(&r)) else { continue };
        let val = phi.sample_jet(k, u, v).v;
        if val != 0.0 {
            acc += r * (sino.sample_weight(k) * val / (d * d * d));
        }
    }
    acc
}

/// [`dual_doppler`] on every node of `spec` inside `region` (zero elsewhere).
pub fn dual_doppler_grid(phi: &SinogramSampler, spec: &GridSpec, region: &Aabb) -> VectorGrid {
    let vals: Vec<Vec3> = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let x = spec.position_of(i);
            if region.contains(&x) { dual_doppler(phi, &x) } else { Vec3::zeros() }
        })
        .collect();
    let mut out = VectorGrid::zeros(*spec);
    for (i, v) in vals.iter().enumerate() {
        for c in 0..3 {
            out.comps[c][i] = v[c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_phantom, BumpPhantom, PhantomField};
    use crate::forward::{doppler, DirectionLayout, Sinogram, SinogramKind};
    use crate::geometry::Curve;

    #[test]
    fn zero_weight_gives_zero() {
        let curve = Curve::three_circles(3.5, 16);
        let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n: 16 };
        let phi = Sinogram::zeros(SinogramKind::Doppler, &curve, layout).unwrap();
        let sp = SinogramSampler::new(&phi).unwrap();
        assert_eq!(dual_doppler(&sp, &Vec3::new(0.1, 0.2, 0.3)), Vec3::zeros());
    }

    #[test]
    fn point_mass_matches_kernel() {
        let curve = Curve::three_circles(3.5, 16);
        let n = 16;
        let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n };
        let mut phi = Sinogram::zeros(SinogramKind::Doppler, &curve, layout).unwrap();
        // Unit value at the central chart node of sample 3.
        let d = (n / 2) * n + n / 2;
        phi.values[3 * n * n + d] = 1.0;
        let sp = SinogramSampler::new(&phi).unwrap();
        let x = phi.samples[3].pos + phi.direction(3, d) * 3.0;
        let got = dual_doppler(&sp, &x);
        let r = x - phi.samples[3].pos;
        let want = r / r.norm().powi(3) * phi.sample_weight(3);
        assert!((got - want).norm() < 1e-12 * want.norm(), "{got:?} {want:?}");
    }

    #[test]
    fn adjoint_identity_on_default_phantom() {
        let ph = BumpPhantom::default();
        let curve = Curve::three_circles(3.5, 128);
        let n = 48;
        let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n };
        let df = doppler(&PhantomField(&ph), &curve, layout, 0.01).unwrap();
        let mut phi = Sinogram::zeros(SinogramKind::Doppler, &curve, layout).unwrap();
        for k in 0..phi.n_samples() {
            let s = phi.samples[k].s;
            for d in 0..n * n {
                let xi = phi.direction(k, d);
                phi.values[k * n * n + d] = xi.y * s.cos() + xi.x * xi.z * (2.0 * s).sin() + 0.7 * xi.z - 0.4 * xi.x;
            }
        }
        let lhs = df.inner(&phi);
        let sp = SinogramSampler::new(&phi).unwrap();
        let spec = GridSpec::cube(49, 0.96);
        let dual = dual_doppler_grid(&sp, &spec, &Aabb::cube(0.92));
        let (f, _, _) = sample_phantom(&ph, &spec);
        let rhs: f64 = (0..spec.len()).map(|i| f.at(i).dot(&dual.at(i))).sum::<f64>() * spec.cell_volume();
        let gap = (lhs - rhs).abs() / lhs.abs();
        assert!(gap <= 5e-3, "lhs {lhs} rhs {rhs} gap {gap}");
    }
}
