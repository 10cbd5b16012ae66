//! Plane Radon transform on the hemisphere of directions, its dual, finite
//! differences in the offset `p`, and the odd-dimensional inversion formula
//! `c·g = (∂²_p ĝ)^∨`.

use std::path::Path;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{GridSpec, ScalarGrid};
use crate::geometry::{Aabb, SphereGrid, SphereLayout};
use crate::{container, Error, Result, Vec3};

/// Direction quadrature and offset axis of a Radon grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadonSpec {
    pub directions: SphereLayout,
    pub n_p: usize,
    pub p_max: f64,
}

impl RadonSpec {
    /// `p_max = 1.1 ×` the circumradius of `box_`.
    pub fn for_box(directions: SphereLayout, n_p: usize, box_: &Aabb) -> Self {
        Self { directions, n_p, p_max: 1.1 * box_.circumradius() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_p < 64 {
            return Err(Error::Config(format!("n_p = {} must be at least 64", self.n_p)));
        }
        if !(self.p_max > 0.0) {
            return Err(Error::Config("p_max must be positive".into()));
        }
        Ok(())
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.p_max / (self.n_p - 1) as f64
    }

    pub fn p(&self, k: usize) -> f64 {
        -self.p_max + k as f64 * self.dp()
    }
}

/// Values on (direction, offset) planes, optionally vector-valued, with a
/// validity mask per plane.
#[derive(Clone, Debug)]
pub struct RadonGrid {
    pub spec: RadonSpec,
    pub dirs: SphereGrid,
    pub components: usize,
    /// `values[(dir·n_p + k)·components + c]`.
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl RadonGrid {
    pub fn zeros(spec: RadonSpec, components: usize) -> Self {
        let dirs = SphereGrid::from_layout(spec.directions);
        let planes = dirs.len() * spec.n_p;
        Self { spec, dirs, components, values: vec![0.0; planes * components], valid: vec![true; planes] }
    }

    pub fn from_fn(spec: RadonSpec, components: usize, f: impl Fn(&Vec3, f64, &mut [f64]) + Sync) -> Self {
        let mut g = Self::zeros(spec, components);
        let dirs = &g.dirs;
        g.values.par_chunks_mut(spec.n_p * components).enumerate().for_each(|(d, row)| {
            for k in 0..spec.n_p {
                f(&dirs.nodes[d], spec.p(k), &mut row[k * components..(k + 1) * components]);
            }
        });
        g
    }

    pub fn n_planes(&self) -> usize {
        self.valid.len()
    }

    #[inline]
    pub fn get(&self, dir: usize, k: usize, c: usize) -> f64 {
        self.values[(dir * self.spec.n_p + k) * self.components + c]
    }

    pub fn invalid_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    /// Extracts one component.
    pub fn component(&self, c: usize) -> RadonGrid {
        RadonGrid {
            spec: self.spec,
            dirs: self.dirs.clone(),
            components: 1,
            values: self.values.iter().skip(c).step_by(self.components).copied().collect(),
            valid: self.valid.clone(),
        }
    }

    pub fn write(&self, path: &Path, config_hash: &str) -> Result<()> {
        let header = RadonHeader {
            kind: "radon".into(),
            spec: self.spec,
            components: self.components,
            valid: self.valid.iter().map(|&v| v as u8).collect(),
            dtype: "f64-le".into(),
            config_hash: config_hash.into(),
        };
        container::write(path, crate::forward::SINOGRAM_MAGIC, &header, &self.values)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (h, values): (RadonHeader, Vec<f64>) = container::read(path, crate::forward::SINOGRAM_MAGIC)?;
        let mut g = Self::zeros(h.spec, h.components);
        if h.kind != "radon" || values.len() != g.values.len() || h.valid.len() != g.valid.len() {
            return Err(Error::Container { path: Some(path.to_path_buf()), reason: "not a matching radon grid".into() });
        }
        g.values = values;
        g.valid = h.valid.iter().map(|&v| v != 0).collect();
        Ok(g)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RadonHeader {
    kind: String,
    spec: RadonSpec,
    components: usize,
    valid: Vec<u8>,
    dtype: String,
    #[serde(default)]
    config_hash: String,
}

/// Radon transform of grid samples.
///
/// Every node contributes `g(x)h³` to the plane offsets near `⟨ω, x⟩`
/// through a Gaussian kernel of width `h` (narrower kernels alias the node
/// lattice in near-axis directions); the blur is then removed to fourth
/// order in `p`. Per direction this costs one pass over the
/// grid instead of a 2-D quadrature per plane.
pub fn radon(g: &ScalarGrid, spec: &RadonSpec) -> Result<RadonGrid> {
    spec.validate()?;
    let gs = &g.spec;
    let h = gs.min_spacing();
    let sigma = h;
    let dp = spec.dp();
    // Fine accumulation bins, then Gaussian smoothing onto the p axis.
    let refine = ((4.0 * dp / sigma).ceil() as usize).max(4);
    let dq = dp / refine as f64;
    let nq = (spec.n_p - 1) * refine + 1;
    let nodes: Vec<(Vec3, f64)> = (0..gs.len())
        .filter(|&i| g.values[i] != 0.0)
        .map(|i| (gs.position_of(i), g.values[i] * gs.cell_volume()))
        .collect();
    let kernel_half = (5.0 * sigma / dq).ceil() as usize;
    let kernel: Vec<f64> = (0..=2 * kernel_half)
        .map(|j| {
            let x = (j as f64 - kernel_half as f64) * dq;
            (-0.5 * x * x / (sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        })
        .collect();
    let mut out = RadonGrid::zeros(*spec, 1);
    let dirs = out.dirs.nodes.clone();
    out.values.par_chunks_mut(spec.n_p).zip(dirs.par_iter()).for_each(|(row, omega)| {
        let mut bins = vec![0.0; nq];
        for (x, m) in &nodes {
            let q = (omega.dot(x) + spec.p_max) / dq;
            let i = q.floor();
            let f = q - i;
            let i = i as i64;
            if i >= 0 && (i as usize) < nq {
                bins[i as usize] += m * (1.0 - f);
            }
            if i + 1 >= 0 && ((i + 1) as usize) < nq {
                bins[(i + 1) as usize] += m * f;
            }
        }
        let mut smooth = vec![0.0; spec.n_p];
        for (k, s) in smooth.iter_mut().enumerate() {
            let c = (k * refine) as i64;
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                let b = c + j as i64 - kernel_half as i64;
                if b >= 0 && (b as usize) < nq {
                    acc += w * bins[b as usize];
                }
            }
            *s = acc;
        }
        // Undo the Gaussian blur to fourth order:
        // ĝ ≈ G − (σ²/2)∂²_p G + (σ⁴/8)∂⁴_p G.
        for k in 0..spec.n_p {
            let km = k.saturating_sub(1);
            let kp = (k + 1).min(spec.n_p - 1);
            let d2 = if k == km || k == kp { 0.0 } else { (smooth[kp] - 2.0 * smooth[k] + smooth[km]) / (dp * dp) };
            let mut v = smooth[k] - 0.5 * sigma * sigma * d2;
            if k >= 2 && k + 2 < spec.n_p {
                let d4 = (smooth[k + 2] - 4.0 * smooth[k + 1] + 6.0 * smooth[k] - 4.0 * smooth[k - 1] + smooth[k - 2]) / dp.powi(4);
                v += sigma.powi(4) / 8.0 * d4;
            }
            row[k] = v;
        }
    });
    Ok(out)
}

/// Derivative of order `order ≤ 3` in `p`: fourth-order central stencils,
/// second-order one-sided stencils at the ends. A result is marked invalid
/// when its stencil touches an invalid plane.
pub fn d_dp(f: &RadonGrid, order: usize) -> Result<RadonGrid> {
    match order {
        0 => Ok(f.clone()),
        1 => Ok(first_derivative(f)),
        2 => Ok(second_derivative(f)),
        3 => Ok(first_derivative(&second_derivative(f))),
        _ => Err(Error::Config(format!("p-derivative order {order} > 3"))),
    }
}

fn apply_stencil(f: &RadonGrid, pick: impl Fn(usize, usize) -> Vec<(isize, f64)> + Sync) -> RadonGrid {
    let n = f.spec.n_p;
    let nc = f.components;
    let mut out = f.clone();
    let rows: Vec<(Vec<f64>, Vec<bool>)> = (0..f.dirs.len())
        .into_par_iter()
        .map(|d| {
            let mut vals = vec![0.0; n * nc];
            let mut ok = vec![false; n];
            for k in 0..n {
                let st = pick(k, n);
                if st.iter().all(|(o, _)| f.valid[d * n + (k as isize + o) as usize]) {
                    ok[k] = true;
                    for c in 0..nc {
                        vals[k * nc + c] = st.iter().map(|(o, w)| w * f.get(d, (k as isize + o) as usize, c)).sum();
                    }
                }
            }
            (vals, ok)
        })
        .collect();
    for (d, (vals, ok)) in rows.into_iter().enumerate() {
        out.values[d * n * nc..(d + 1) * n * nc].copy_from_slice(&vals);
        out.valid[d * n..(d + 1) * n].copy_from_slice(&ok);
    }
    out
}

fn first_derivative(f: &RadonGrid) -> RadonGrid {
    let h = f.spec.dp();
    apply_stencil(f, |k, n| {
        let s: Vec<(isize, f64)> = if k >= 2 && k + 2 < n {
            vec![(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)].into_iter().map(|(o, w)| (o, w / 12.0)).collect()
        } else if k >= 1 && k + 1 < n {
            vec![(-1, -0.5), (1, 0.5)]
        } else if k == 0 {
            vec![(0, -1.5), (1, 2.0), (2, -0.5)]
        } else {
            vec![(0, 1.5), (-1, -2.0), (-2, 0.5)]
        };
        s.into_iter().map(|(o, w)| (o, w / h)).collect()
    })
}

fn second_derivative(f: &RadonGrid) -> RadonGrid {
    let h2 = f.spec.dp() * f.spec.dp();
    apply_stencil(f, |k, n| {
        let s: Vec<(isize, f64)> = if k >= 2 && k + 2 < n {
            vec![(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)]
                .into_iter()
                .map(|(o, w)| (o, w / 12.0))
                .collect()
        } else if k >= 1 && k + 1 < n {
            vec![(-1, 1.0), (0, -2.0), (1, 1.0)]
        } else if k == 0 {
            vec![(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)]
        } else {
            vec![(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)]
        };
        s.into_iter().map(|(o, w)| (o, w / h2)).collect()
    })
}

/// Rotation-invariant probability average of `F(ω, ⟨ω, x⟩)`, linear in `p`.
/// Directions whose bracketing planes are invalid are dropped and the
/// weights renormalized; offsets beyond `p_max` contribute zero.
pub fn dual_radon(f: &RadonGrid, x: &Vec3) -> Vec<f64> {
    dual_radon_counted(f, x).0
}

fn dual_radon_counted(f: &RadonGrid, x: &Vec3) -> (Vec<f64>, usize) {
    let n = f.spec.n_p;
    let nc = f.components;
    let dp = f.spec.dp();
    let mut acc = vec![0.0; nc];
    let mut wsum = 0.0;
    let mut outside = 0;
    for (d, (omega, w)) in f.dirs.nodes.iter().zip(&f.dirs.weights).enumerate() {
        let p = omega.dot(x);
        let t = (p + f.spec.p_max) / dp;
        if !(t >= 0.0 && t <= (n - 1) as f64) {
            outside += 1;
            wsum += w;
            continue;
        }
        let k = (t.floor() as usize).min(n - 2);
        let a = t - k as f64;
        if !(f.valid[d * n + k] && f.valid[d * n + k + 1]) {
            continue;
        }
        wsum += w;
        for (c, o) in acc.iter_mut().enumerate() {
            *o += w * ((1.0 - a) * f.get(d, k, c) + a * f.get(d, k + 1, c));
        }
    }
    if wsum > 0.0 {
        for o in acc.iter_mut() {
            *o /= wsum;
        }
    }
    (acc, outside)
}

/// `c = (−4π)^{(n−1)/2} Γ(n/2)/Γ(1/2)` for odd `n`.
pub fn inversion_constant(n: usize) -> Result<f64> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::UnsupportedDimension(n));
    }
    let m = (n - 1) / 2;
    // Γ(n/2)/Γ(1/2) = ½·(3/2)·…·((n−2)/2).
    let ratio: f64 = (0..m).map(|j| 0.5 + j as f64).product();
    Ok((-4.0 * std::f64::consts::PI).powi(m as i32) * ratio)
}

/// Backprojects `F = ∂²_p ĝ` (per component) to every node of `target`
/// inside `region` and divides by `c`; other nodes are zero.
pub fn invert(f: &RadonGrid, target: &GridSpec, region: &Aabb) -> Result<Vec<ScalarGrid>> {
    let c = inversion_constant(3)?;
    let results: Vec<(Vec<f64>, usize)> = (0..target.len())
        .into_par_iter()
        .map(|i| {
            let x = target.position_of(i);
            if region.contains(&x) {
                let (v, o) = dual_radon_counted(f, &x);
                (v.into_iter().map(|v| v / c).collect(), o)
            } else {
                (vec![0.0; f.components], 0)
            }
        })
        .collect();
    let outside: usize = results.iter().map(|r| r.1).sum();
    if outside > 0 {
        debug!("backprojection: {outside} (node, direction) pairs beyond p_max contributed zero");
    }
    Ok((0..f.components)
        .map(|c| ScalarGrid { spec: *target, values: results.iter().map(|r| r.0[c]).collect() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::relative_l2;
    use std::f64::consts::PI;

    fn spec(n_p: usize, p_max: f64) -> RadonSpec {
        RadonSpec { directions: SphereLayout::Hemisphere { n_theta: 12, n_phi: 24 }, n_p, p_max }
    }

    #[test]
    fn constant_and_quadratic_backprojection() {
        let one = RadonGrid::from_fn(spec(64, 3.0), 1, |_, _, o| o[0] = 1.0);
        assert!((dual_radon(&one, &Vec3::new(0.3, -0.2, 0.5))[0] - 1.0).abs() < 1e-14);
        let sq = RadonGrid::from_fn(spec(513, 3.0), 1, |_, p, o| o[0] = p * p);
        let x = Vec3::new(0.4, 0.1, -0.3);
        let v = dual_radon(&sq, &x)[0];
        assert!((v - x.norm_squared() / 3.0).abs() < 1e-4, "{v}");
        let lin = RadonGrid::from_fn(spec(64, 3.0), 1, |_, p, o| o[0] = p);
        assert!(dual_radon(&lin, &Vec3::zeros())[0].abs() < 1e-14);
    }

    #[test]
    fn constant_is_three_dimensional_only() {
        assert!((inversion_constant(3).unwrap() + 2.0 * PI).abs() < 1e-15);
        assert!(matches!(inversion_constant(2), Err(Error::UnsupportedDimension(2))));
    }

    #[test]
    fn first_derivative_of_gaussian_profile() {
        let g = RadonGrid::from_fn(spec(256, 3.0), 1, |_, p, o| o[0] = PI * (-p * p).exp());
        let d = d_dp(&g, 1).unwrap();
        for k in 2..254 {
            let p = g.spec.p(k);
            assert!((d.get(5, k, 0) + 2.0 * PI * p * (-p * p).exp()).abs() < 1e-5);
        }
        let c = RadonGrid::from_fn(spec(64, 3.0), 1, |_, _, o| o[0] = 2.5);
        for order in 1..=3 {
            assert!(d_dp(&c, order).unwrap().values.iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn gaussian_plane_integral() {
        let gs = GridSpec::cube(49, 3.0);
        let g = ScalarGrid::from_fn(gs, |x| (-x.norm_squared()).exp());
        let r = radon(&g, &spec(129, 3.2)).unwrap();
        let k0 = 64;
        assert!(r.spec.p(k0).abs() < 1e-12);
        for d in [0, 17, 100] {
            assert!((r.get(d, k0, 0) - PI).abs() < 2e-3 * PI, "{}", r.get(d, k0, 0));
        }
    }

    #[test]
    fn gaussian_round_trip() {
        let gs = GridSpec::cube(41, 2.0);
        let g = ScalarGrid::from_fn(gs, |x| (-x.norm_squared() / 0.3).exp());
        let sp = RadonSpec { directions: SphereLayout::Hemisphere { n_theta: 24, n_phi: 48 }, n_p: 161, p_max: 2.2 };
        let r = radon(&g, &sp).unwrap();
        let back = invert(&d_dp(&r, 2).unwrap(), &gs, &Aabb::cube(1.0)).unwrap().remove(0);
        let truth = ScalarGrid::from_fn(gs, |x| if Aabb::cube(1.0).contains(x) { (-x.norm_squared() / 0.3).exp() } else { 0.0 });
        let err = relative_l2(&[&back.values], &[&truth.values]);
        assert!(err < 0.02, "{err}");
    }
}
