//! Inversion of the restricted scalar X-ray transform and its use to
//! recover the boundary-normalized potential `v_B` from moment data.

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FnVector, GridSpec, ScalarGrid, VectorField, VectorGrid};
use crate::forward::{moment1, DirectionLayout, Sinogram, SinogramKind, SinogramSampler};
use crate::geometry::{intersection_points, tangent_frame, Aabb, Hyperplane};
use crate::radon::{d_dp, invert, RadonGrid, RadonSpec};
use crate::sv_recover::{circle_integral_l, SvOptions};
use crate::Vec3;

/// Counters of the scalar plane assembly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ScalarStats {
    pub planes: usize,
    pub planes_assembled: usize,
    pub planes_skipped: usize,
    pub planes_empty: usize,
}

/// `∂_p v^∧(ω, p)` from restricted scalar X-ray data `Xv(γ₀, ξ)`.
///
/// For any curve point `a` in `H(ω, p)`,
/// `∫_{S(ω)} L Xv(a, ξ) dξ = ∫_{H(ω,p)} ∂_ω v = ∂_p v^∧(ω, p)`, because the
/// great-circle integral of the ray integrals is the plane integral of
/// `v(x)/|x − a|` and `L` differentiates it across the plane. When several
/// transversal points exist their values are averaged with weights equal to
/// the squared transversality.
pub fn scalar_plane_derivative(sampler: &SinogramSampler, plane: &Hyperplane, opts: &SvOptions) -> Result<f64> {
    let (e1, e2) = tangent_frame(&plane.omega);
    let (mut acc, mut wsum) = (0.0, 0.0);
    for c in intersection_points(&sampler.sino.curve, plane) {
        if c.transversality <= opts.eps_t {
            continue;
        }
        let w = c.transversality * c.transversality;
        acc += w * circle_integral_l(sampler, c.arc, c.s, &plane.omega, (&e1, &e2), 1, opts.circle_nodes)?;
        wsum += w;
    }
    if wsum == 0.0 {
        return Err(Error::Geometry(format!("plane {plane:?} has no transversal point")));
    }
    Ok(acc / wsum)
}

/// Recovers `v` on the nodes of `target` inside `region` from its restricted
/// scalar X-ray sinogram (chart layout covering `supp v`).
pub fn invert_scalar_xray(
    sampler: &SinogramSampler,
    spec: &RadonSpec,
    target: &GridSpec,
    region: &Aabb,
    opts: &SvOptions,
) -> Result<(ScalarGrid, ScalarStats)> {
    let DirectionLayout::Chart { center, radius, .. } = sampler.sino.layout else {
        return Err(Error::Config("scalar inversion needs a chart direction layout".into()));
    };
    let center = Vec3::from(center);
    let mut first = RadonGrid::zeros(*spec, 1);
    let n_p = spec.n_p;
    let dirs = first.dirs.nodes.clone();
    let rows: Vec<Vec<Option<f64>>> = dirs
        .par_iter()
        .map(|omega| {
            (0..n_p)
                .map(|k| {
                    let p = spec.p(k);
                    if (p - omega.dot(&center)).abs() > radius {
                        return Some(0.0);
                    }
                    scalar_plane_derivative(sampler, &Hyperplane { omega: *omega, p }, opts).ok()
                })
                .collect()
        })
        .collect();
    let mut stats = ScalarStats { planes: first.n_planes(), ..Default::default() };
    for (d, row) in rows.into_iter().enumerate() {
        for (k, r) in row.into_iter().enumerate() {
            let idx = d * n_p + k;
            match r {
                Some(v) => {
                    first.values[idx] = v;
                    if (spec.p(k) - dirs[d].dot(&center)).abs() > radius {
                        stats.planes_empty += 1;
                    } else {
                        stats.planes_assembled += 1;
                    }
                }
                None => {
                    first.valid[idx] = false;
                    stats.planes_skipped += 1;
                }
            }
        }
    }
    info!("scalar assembly: {} planes, {} skipped", stats.planes_assembled, stats.planes_skipped);
    let second = d_dp(&first, 1)?;
    let v = invert(&second, target, region)?.remove(0);
    Ok((v, stats))
}

/// The sinogram `X v_B = I f^s_B − I f` implied by moment data.
///
/// With `f = f^s_B + d v_B` and `v_B` vanishing outside `B`,
/// `I(d v_B)(γ₀, ξ) = ∫₀^∞ t ∂_t v_B(γ₀ + tξ) dt = −∫₀^∞ v_B(γ₀ + tξ) dt`.
/// `I f^s_B` is computed by forward projection of the (reconstructed)
/// `f^s_B`, taken to vanish outside `b`.
pub fn potential_sinogram(moment: &Sinogram, fs_b: &VectorGrid, b: &Aabb, step: f64) -> Result<Sinogram> {
    if moment.kind != SinogramKind::Moment1 {
        return Err(Error::Config("potential recovery needs first-moment data".into()));
    }
    let field = FnVector { f: |x: &Vec3| if b.contains(x) { fs_b.eval(x) } else { Vec3::zeros() }, support: *b };
    let predicted = moment1(&field, &moment.curve, moment.layout, step)?;
    let mut out = predicted;
    out.kind = SinogramKind::ScalarXray;
    out.values.par_iter_mut().zip(&moment.values).for_each(|(p, m)| *p -= m);
    Ok(out)
}

/// `v_B` from moment data and `f^s_B`.
pub fn recover_vb(
    moment: &Sinogram,
    fs_b: &VectorGrid,
    b: &Aabb,
    spec: &RadonSpec,
    target: &GridSpec,
    opts: &SvOptions,
    step: f64,
) -> Result<(ScalarGrid, ScalarStats, Sinogram)> {
    let data = potential_sinogram(moment, fs_b, b, step)?;
    let sampler = SinogramSampler::new(&data)?;
    let (v, stats) = invert_scalar_xray(&sampler, spec, target, b, opts)?;
    drop(sampler);
    Ok((v, stats, data))
}
