use log::info;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lop::circle_integral_l;
use crate::field::{GridSpec, SkewGrid};
use crate::forward::{DirectionLayout, SinogramKind, SinogramSampler};
use crate::geometry::{intersection_points, tangent_frame, Aabb, CurvePoint, Hyperplane};
use crate::radon::{d_dp, invert, RadonGrid, RadonSpec};
use crate::{Error, Result, Vec3};

/// Tunables of the plane-wise assembly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvOptions {
    /// Nodes of the uniform quadrature on `S(ω)`.
    pub circle_nodes: usize,
    /// Normalized transversality threshold `|⟨ω, γ′⟩|/|γ′|`.
    pub eps_t: f64,
    /// Relative singular-value threshold for the point configuration.
    pub eps_rank: f64,
}

impl Default for SvOptions {
    fn default() -> Self {
        Self { circle_nodes: 1024, eps_t: 1e-3, eps_rank: 1e-6 }
    }
}

/// Assembled data of one plane `H(ω, p)`.
#[derive(Clone, Debug)]
pub struct PlaneDataSlice {
    pub plane: Hyperplane,
    pub points: Vec<CurvePoint>,
    /// `∂²_p⟨f, eᵏ(ω)⟩^∧(ω, p)` for the tangent frame `(e¹, e²)`.
    pub tangent_transforms: [f64; 2],
    /// The part of the per-point integrals that does not depend on the point.
    pub offset_term: f64,
    /// Weighted RMS misfit of the per-point integrals (zero for 3 points).
    pub fit_residual: f64,
}

/// Assembles `∂²_p⟨f, eᵏ⟩^∧(ω, p)` on one plane from restricted Doppler data.
///
/// For a curve point `a` in the plane, the great-circle integral of the
/// second `L`-derivative of the data equals
/// `∂²_p ∫_{H(ω,p)} ⟨f(y), y − a⟩ ds = K − Σₖ ⟨a, eᵏ⟩ ∂²_p⟨f, eᵏ⟩^∧`,
/// with `K` independent of `a`. The affine dependence on `a` is resolved by
/// weighted least squares (weights: squared transversality) over all
/// transversal intersection points; at least three non-collinear points are
/// required.
pub fn p_derivative_block(sampler: &SinogramSampler, plane: &Hyperplane, opts: &SvOptions) -> Result<PlaneDataSlice> {
    let omega = plane.omega;
    let (e1, e2) = tangent_frame(&omega);
    let points: Vec<CurvePoint> = intersection_points(&sampler.sino.curve, plane)
        .into_iter()
        .filter(|c| c.transversality > opts.eps_t)
        .collect();
    if points.len() < 3 {
        return Err(Error::Geometry(format!("plane {plane:?} has {} transversal points (< 3)", points.len())));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut rhs = Vec::with_capacity(points.len());
    let mut scale = 0.0f64;
    for c in &points {
        scale = scale.max(c.pos.norm());
    }
    for c in &points {
        let val = circle_integral_l(sampler, c.arc, c.s, &omega, (&e1, &e2), 2, opts.circle_nodes)?;
        let w = c.transversality;
        rows.push([w, -w * c.pos.dot(&e1) / scale, -w * c.pos.dot(&e2) / scale]);
        rhs.push(w * val);
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > opts.eps_rank * smax) {
        return Err(Error::SingularFrame { det: smin / smax, eps: opts.eps_rank });
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Geometry(e.to_string()))?;
    let resid = (&a * &x - &b).norm() / (rows.len() as f64).sqrt();
    Ok(PlaneDataSlice {
        plane: *plane,
        points,
        tangent_transforms: [x[1] / scale, x[2] / scale],
        offset_term: x[0],
        fit_residual: resid,
    })
}

/// Counters of the plane assembly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AssemblyStats {
    pub planes: usize,
    pub planes_assembled: usize,
    pub planes_skipped: usize,
    /// Planes outside the data ball, known to carry zero data.
    pub planes_empty: usize,
}

/// `∂²_p⟨f, eᵏ⟩^∧` on every plane of `spec` (two components), with planes
/// that cannot be assembled marked invalid. Planes at distance beyond
/// `data_radius` from `center` miss the data ball and are set to zero.
pub fn assemble_tangent_transforms(
    sampler: &SinogramSampler,
    spec: &RadonSpec,
    center: &Vec3,
    data_radius: f64,
    opts: &SvOptions,
) -> Result<(RadonGrid, AssemblyStats)> {
    if sampler.sino.kind != SinogramKind::Doppler {
        return Err(Error::Config("Saint-Venant recovery needs Doppler data".into()));
    }
    let mut grid = RadonGrid::zeros(*spec, 2);
    let n_p = spec.n_p;
    let dirs = grid.dirs.nodes.clone();
    let results: Vec<Vec<Option<[f64; 2]>>> = dirs
        .par_iter()
        .map(|omega| {
            (0..n_p)
                .map(|k| {
                    let p = spec.p(k);
                    if (p - omega.dot(center)).abs() > data_radius {
                        return Some([0.0; 2]);
                    }
                    p_derivative_block(sampler, &Hyperplane { omega: *omega, p }, opts).ok().map(|s| s.tangent_transforms)
                })
                .collect()
        })
        .collect();
    let mut stats = AssemblyStats { planes: grid.n_planes(), ..Default::default() };
    for (d, row) in results.into_iter().enumerate() {
        for (k, r) in row.into_iter().enumerate() {
            let idx = d * n_p + k;
            match r {
                Some(t) => {
                    grid.values[2 * idx] = t[0];
                    grid.values[2 * idx + 1] = t[1];
                    if (spec.p(k) - dirs[d].dot(center)).abs() > data_radius {
                        stats.planes_empty += 1;
                    } else {
                        stats.planes_assembled += 1;
                    }
                }
                None => {
                    grid.valid[idx] = false;
                    stats.planes_skipped += 1;
                }
            }
        }
    }
    Ok((grid, stats))
}

/// The backprojection integrand `½(ω_j ∂³_p⟨f,(eᵢ)_⊥⟩^∧ − ω_i ∂³_p⟨f,(eⱼ)_⊥⟩^∧)`
/// for the pairs `(1,2), (1,3), (2,3)`, from `∂³_p⟨f, eᵏ(ω)⟩^∧`.
pub fn saint_venant_integrand(third: &RadonGrid) -> RadonGrid {
    let mut out = RadonGrid::zeros(third.spec, 3);
    out.valid = third.valid.clone();
    let n_p = third.spec.n_p;
    for (d, omega) in third.dirs.nodes.iter().enumerate() {
        let (e1, e2) = tangent_frame(omega);
        for k in 0..n_p {
            let (t1, t2) = (third.get(d, k, 0), third.get(d, k, 1));
            // ∂³_p⟨f, (eᵢ)_⊥⟩^∧ = Σₖ eᵏ_i ∂³_p⟨f, eᵏ⟩^∧.
            let a = e1 * t1 + e2 * t2;
            let base = (d * n_p + k) * 3;
            for (c, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
                out.values[base + c] = 0.5 * (omega[j] * a[i] - omega[i] * a[j]);
            }
        }
    }
    out
}

/// Reconstructs `Wf` on the nodes of `target` inside `region` from restricted
/// Doppler data.
pub fn recover_w(
    sampler: &SinogramSampler,
    spec: &RadonSpec,
    target: &GridSpec,
    region: &Aabb,
    opts: &SvOptions,
) -> Result<(SkewGrid, AssemblyStats)> {
    let (center, radius) = match sampler.sino.layout {
        DirectionLayout::Chart { center, radius, .. } => (Vec3::from(center), radius),
        DirectionLayout::Sphere { .. } => unreachable!("sampler requires a chart layout"),
    };
    let (second, stats) = assemble_tangent_transforms(sampler, spec, &center, radius, opts)?;
    info!(
        "assembled {} planes, {} empty, {} skipped",
        stats.planes_assembled, stats.planes_empty, stats.planes_skipped
    );
    let third = d_dp(&second, 1)?;
    let integrand = saint_venant_integrand(&third);
    let comps = invert(&integrand, target, region)?;
    let mut w = SkewGrid::zeros(*target);
    for (c, g) in comps.into_iter().enumerate() {
        w.comps[c] = g.values;
    }
    Ok((w, stats))
}
