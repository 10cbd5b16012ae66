//! The whole-space potential outside `B` by integration along exiting rays.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarGrid, VectorField, VectorGrid};
use crate::forward::simpson;
use crate::geometry::Aabb;
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorRaySpec {
    /// Radius beyond which the tail model is integrated analytically.
    pub truncation: f64,
    /// Simpson step along the ray inside the sampled grid.
    pub step: f64,
    /// Nodes kept clear of the grid faces, where interpolation degrades.
    pub margin_nodes: usize,
}

impl ExteriorRaySpec {
    /// Defaults for a box: truncation at ten circumradii, step of half a cell.
    pub fn for_box(b: &Aabb, spacing: f64) -> Self {
        Self { truncation: 10.0 * b.circumradius(), step: 0.5 * spacing, margin_nodes: 2 }
    }
}

/// `v_{ℝⁿ}(x₀)` and the pieces it was built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExteriorValue {
    pub value: f64,
    /// Part of `value` contributed by the tail model beyond the grid.
    pub tail: f64,
    /// Modeled contribution beyond the truncation radius.
    pub tail_beyond_truncation: f64,
    /// Fitted decay exponent of `⟨f^s, ξ⟩` along the ray (0 when unfitted).
    pub exponent: f64,
}

/// Power law `c·r^{−α}` fitted to samples `(r, g)` of one sign.
fn fit_power_law(samples: &[(f64, f64)]) -> Option<(f64, f64)> {
    let sign = samples.first()?.1.signum();
    if samples.len() < 4 || samples.iter().any(|&(_, g)| g == 0.0 || g.signum() != sign) {
        return None;
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, g) in samples {
        let (x, y) = (r.ln(), g.abs().ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let den = n * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / den;
    let alpha = -slope;
    // a decay slower than 1/r has no finite tail; treat the fit as failed
    if alpha <= 1.05 {
        return None;
    }
    let c = sign * ((sy - slope * sx) / n).exp();
    Some((c, alpha))
}

/// `v_{ℝⁿ}(x₀) = ∫₀^∞ ⟨f^s(x₀ + tξ), ξ⟩ dt` for a ray leaving `b`.
///
/// The integral runs over the sampled grid of `fs`; beyond it the integrand
/// is modeled by a power law in `|x|` times the direction cosine `⟨x̂, ξ⟩`,
/// fitted over the outer third of the in-grid part of the ray, integrated numerically to the truncation radius
/// and in closed form after it.
pub fn exterior_potential(fs: &VectorGrid, b: &Aabb, x0: &Vec3, xi: &Vec3, spec: &ExteriorRaySpec) -> Result<ExteriorValue> {
    let xi = xi.normalize();
    if let Some((_, t1)) = b.ray_interval(x0, &xi) {
        let len = b.circumradius() * 1e-9;
        if t1 > len {
            return Err(Error::Geometry(format!("ray from {x0:?} along {xi:?} enters B")));
        }
    }
    let bounds = fs.spec.bounds();
    let m = spec.margin_nodes as f64 * fs.spec.min_spacing();
    let inner = Aabb::new(bounds.min.add_scalar(m), bounds.max.add_scalar(-m));
    let t_grid = match inner.ray_interval(x0, &xi) {
        Some((_, t1)) if t1 > 0.0 => t1,
        _ => return Err(Error::Geometry(format!("ray start {x0:?} is outside the sampled grid"))),
    };
    let g = |t: f64| fs.eval(&(x0 + xi * t)).dot(&xi);
    let body = simpson(0.0, t_grid, spec.step, g);

    // g is modeled as c·|x|^{−α}·⟨x̂, ξ⟩: the direction cosine carries the
    // geometry of a ray that is not yet radial
    let cosine = |t: f64| {
        let x = x0 + xi * t;
        x.dot(&xi) / x.norm()
    };
    let t_fit0 = t_grid * 2.0 / 3.0;
    let fit_t: Vec<f64> = (0..12).map(|j| t_fit0 + (t_grid - t_fit0) * j as f64 / 11.0).collect();
    let fitted = if fit_t.iter().all(|&t| cosine(t) > 0.05) {
        let samples: Vec<(f64, f64)> = fit_t.iter().map(|&t| ((x0 + xi * t).norm(), g(t) / cosine(t))).collect();
        fit_power_law(&samples)
    } else {
        None
    };
    let Some((c, alpha)) = fitted else {
        return Ok(ExteriorValue { value: body, tail: 0.0, tail_beyond_truncation: 0.0, exponent: 0.0 });
    };
    let model = |t: f64| c * (x0 + xi * t).norm().powf(-alpha) * cosine(t);
    // parameter where |x₀ + tξ| reaches the truncation radius
    let bq = x0.dot(&xi);
    let t_trunc = -bq + (bq * bq - x0.norm_squared() + spec.truncation * spec.truncation).max(0.0).sqrt();
    let near = if t_trunc > t_grid { simpson(t_grid, t_trunc, (t_trunc - t_grid) / 400.0, model) } else { 0.0 };
    // beyond T the ray is nearly radial: ∫_T^∞ c r^{−α} dr
    let far = c * spec.truncation.powf(1.0 - alpha) / (alpha - 1.0);
    Ok(ExteriorValue { value: body + near + far, tail: near + far, tail_beyond_truncation: far, exponent: alpha })
}

/// Boundary data `g = −v_{ℝⁿ}|∂B` with summary statistics.
pub struct BoundaryData {
    /// `g` on the grid nodes of `∂B`, zero elsewhere.
    pub g: ScalarGrid,
    /// Largest spread between the values obtained along the different face
    /// normals at edge and corner nodes.
    pub normal_spread: f64,
    /// Largest modeled contribution beyond the truncation radius.
    pub max_tail_beyond_truncation: f64,
    pub nodes: usize,
}

/// Evaluates `g = −v_{ℝⁿ}` on every node of `∂B` of the grid `target`.
/// At edges and corners the values along the adjacent face normals are
/// averaged.
pub fn boundary_data(fs: &VectorGrid, target: &GridSpec, b: &Aabb, spec: &ExteriorRaySpec) -> Result<BoundaryData> {
    target.validate_contains(b)?;
    let region = target.sub_box(b);
    let mut nodes = Vec::new();
    for i in region[0].0..=region[0].1 {
        for j in region[1].0..=region[1].1 {
            for k in region[2].0..=region[2].1 {
                let pos = [i, j, k];
                let mut normals = Vec::new();
                for a in 0..3 {
                    if pos[a] == region[a].0 {
                        normals.push(-Vec3::ith(a, 1.0));
                    }
                    if pos[a] == region[a].1 {
                        normals.push(Vec3::ith(a, 1.0));
                    }
                }
                if !normals.is_empty() {
                    nodes.push((target.index(i, j, k), normals));
                }
            }
        }
    }
    let values: Vec<(usize, f64, f64, f64)> = nodes
        .par_iter()
        .map(|(idx, normals)| {
            let x0 = target.position_of(*idx);
            let mut vals = Vec::with_capacity(normals.len());
            let mut tail = 0.0f64;
            for n in normals {
                let e = exterior_potential(fs, b, &x0, n, spec)?;
                vals.push(e.value);
                tail = tail.max(e.tail_beyond_truncation.abs());
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let spread = vals.iter().fold(f64::MIN, |m, v| m.max(*v)) - vals.iter().fold(f64::MAX, |m, v| m.min(*v));
            Ok((*idx, -mean, spread, tail))
        })
        .collect::<Result<_>>()?;
    let mut g = ScalarGrid::zeros(*target);
    let (mut spread, mut tail) = (0.0f64, 0.0f64);
    for (idx, v, s, t) in values {
        g.values[idx] = v;
        spread = spread.max(s);
        tail = tail.max(t);
    }
    debug!("boundary data on {} nodes, normal spread {spread:.3e}", nodes.len());
    Ok(BoundaryData { g, normal_spread: spread, max_tail_beyond_truncation: tail, nodes: nodes.len() })
}
