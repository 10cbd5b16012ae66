//! 7-point finite-difference Dirichlet problems on boxes, solved by
//! Jacobi-preconditioned conjugate gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{d_in_box, delta, GridSpec, ScalarGrid, VectorGrid};
use crate::geometry::Aabb;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative residual `‖b − Ax‖ / ‖b‖` at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 100_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub unknowns: usize,
}

/// Interior unknowns of a closed index box.
struct Interior {
    m: [usize; 3],
    lo: [usize; 3],
    inv: [f64; 3],
}

impl Interior {
    fn new(spec: &GridSpec, region: [(usize, usize); 3]) -> Result<Self> {
        for a in 0..3 {
            let (lo, hi) = region[a];
            if hi >= spec.dims[a] || hi < lo + 2 {
                return Err(Error::Shape(format!("Dirichlet box {region:?} has no interior on axis {a}")));
            }
        }
        Ok(Self {
            m: region.map(|(lo, hi)| hi - lo - 1),
            lo: region.map(|(lo, _)| lo + 1),
            inv: spec.spacing.map(|h| 1.0 / (h * h)),
        })
    }

    fn len(&self) -> usize {
        self.m.iter().product()
    }

    fn global(&self, spec: &GridSpec, r: usize) -> usize {
        let [m0, m1, m2] = self.m;
        let _ = m0;
        let (a, b, c) = (r / (m1 * m2), (r / m2) % m1, r % m2);
        spec.index(self.lo[0] + a, self.lo[1] + b, self.lo[2] + c)
    }

    fn diag(&self) -> f64 {
        2.0 * (self.inv[0] + self.inv[1] + self.inv[2])
    }

    /// `y = A x` with `A = −Δ_h` and homogeneous boundary values.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let [m0, m1, m2] = self.m;
        let diag = self.diag();
        let inv = self.inv;
        let slab = m1 * m2;
        y.par_chunks_mut(slab).enumerate().for_each(|(a, out)| {
            for b in 0..m1 {
                for c in 0..m2 {
                    let r = (a * m1 + b) * m2 + c;
                    let mut acc = diag * x[r];
                    if a > 0 {
                        acc -= inv[0] * x[r - slab];
                    }
                    if a + 1 < m0 {
                        acc -= inv[0] * x[r + slab];
                    }
                    if b > 0 {
                        acc -= inv[1] * x[r - m2];
                    }
                    if b + 1 < m1 {
                        acc -= inv[1] * x[r + m2];
                    }
                    if c > 0 {
                        acc -= inv[2] * x[r - 1];
                    }
                    if c + 1 < m2 {
                        acc -= inv[2] * x[r + 1];
                    }
                    out[b * m2 + c] = acc;
                }
            }
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `Δ_h u = rhs` at the interior nodes of the closed index box
/// `region`, with `u = boundary` on its faces. Missing `rhs` / `boundary`
/// mean zero; `guess` seeds the iteration. Nodes outside `region` are zero
/// in the output.
pub fn dirichlet_poisson(
    spec: &GridSpec,
    region: [(usize, usize); 3],
    rhs: Option<&[f64]>,
    boundary: Option<&[f64]>,
    guess: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(ScalarGrid, SolveStats)> {
    let int = Interior::new(spec, region)?;
    let n = int.len();
    let strides = [spec.dims[1] * spec.dims[2], spec.dims[2], 1];
    // b = −rhs + boundary couplings
    let b: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|r| {
            let g = int.global(spec, r);
            let mut acc = rhs.map_or(0.0, |f| -f[g]);
            if let Some(bd) = boundary {
                let [i, j, k] = spec.unindex(g);
                let pos = [i, j, k];
                for a in 0..3 {
                    if pos[a] == region[a].0 + 1 {
                        acc += int.inv[a] * bd[g - strides[a]];
                    }
                    if pos[a] + 1 == region[a].1 {
                        acc += int.inv[a] * bd[g + strides[a]];
                    }
                }
            }
            acc
        })
        .collect();
    let bnorm = dot(&b, &b).sqrt();
    let mut x: Vec<f64> = match guess {
        Some(x0) => (0..n).map(|r| x0[int.global(spec, r)]).collect(),
        None => vec![0.0; n],
    };
    let mut stats = SolveStats { unknowns: n, ..Default::default() };
    if bnorm > 0.0 {
        let inv_diag = 1.0 / int.diag();
        let mut ax = vec![0.0; n];
        int.apply(&x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut z: Vec<f64> = r.iter().map(|v| v * inv_diag).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        let mut res = dot(&r, &r).sqrt() / bnorm;
        let mut it = 0;
        while res > opts.tol {
            if it >= opts.max_iter {
                return Err(Error::NoConvergence { iterations: it, residual: res });
            }
            int.apply(&p, &mut q);
            let alpha = rz / dot(&p, &q);
            x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
            r.par_iter_mut().zip(&q).for_each(|(r, q)| *r -= alpha * q);
            z.par_iter_mut().zip(&r).for_each(|(z, r)| *z = r * inv_diag);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
            res = dot(&r, &r).sqrt() / bnorm;
            it += 1;
        }
        stats.iterations = it;
        stats.residual = res;
    } else {
        x.iter_mut().for_each(|v| *v = 0.0);
    }

    let mut out = ScalarGrid::zeros(*spec);
    if let Some(bd) = boundary {
        for i in region[0].0..=region[0].1 {
            for j in region[1].0..=region[1].1 {
                for k in region[2].0..=region[2].1 {
                    let idx = spec.index(i, j, k);
                    out.values[idx] = bd[idx];
                }
            }
        }
    }
    for (r, v) in x.into_iter().enumerate() {
        out.values[int.global(spec, r)] = v;
    }
    Ok((out, stats))
}

/// Result of [`bounded_decompose`].
pub struct BoundedSplit {
    pub fs: VectorGrid,
    pub v: ScalarGrid,
    pub stats: SolveStats,
}

/// Split `f = f^s_B + d v_B` on the box `b` with `v_B = 0` on `∂B`.
///
/// Both parts are set to zero outside `b`. `guess` seeds the solver, which
/// is only useful to check that the result does not depend on it.
pub fn bounded_decompose(f: &VectorGrid, b: &Aabb, opts: &SolverOptions, guess: Option<&ScalarGrid>) -> Result<BoundedSplit> {
    f.spec.validate_contains(b)?;
    let region = f.spec.sub_box(b);
    let div = delta(f);
    let (v, stats) = dirichlet_poisson(&f.spec, region, Some(&div.values), None, guess.map(|g| g.values.as_slice()), opts)?;
    let mut fs = f.sub(&d_in_box(&v, region))?;
    fs.mask_outside(b);
    Ok(BoundedSplit { fs, v, stats })
}

/// Discrete harmonic extension into `b` of the values `g` holds on the
/// grid nodes of `∂b`.
pub fn laplace_dirichlet(spec: &GridSpec, b: &Aabb, g: &ScalarGrid, opts: &SolverOptions) -> Result<(ScalarGrid, SolveStats)> {
    spec.validate_contains(b)?;
    if g.spec != *spec {
        return Err(Error::Shape("boundary data grid differs from the solve grid".into()));
    }
    dirichlet_poisson(spec, spec.sub_box(b), None, Some(&g.values), None, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{laplacian7, relative_l2, sample_phantom, BumpPhantom};
    use crate::oracles::oracle_laplace;
    use crate::Vec3;

    #[test]
    fn constants_and_linears_are_harmonic() {
        let spec = GridSpec::cube(21, 1.5);
        let b = Aabb::cube(1.0);
        for g in [ScalarGrid::from_fn(spec, |_| 1.0), ScalarGrid::from_fn(spec, |x| x.x)] {
            let (u, _) = laplace_dirichlet(&spec, &b, &g, &SolverOptions::default()).unwrap();
            let region = spec.sub_box(&b);
            for i in region[0].0..=region[0].1 {
                for j in region[1].0..=region[1].1 {
                    for k in region[2].0..=region[2].1 {
                        let idx = spec.index(i, j, k);
                        assert!((u.values[idx] - g.values[idx]).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn matches_direct_solve() {
        let spec = GridSpec::cube(16, 1.0);
        let region = spec.dims.map(|n| (0, n - 1));
        let g = ScalarGrid::from_fn(spec, |x| (x.x * 1.3).sin() * (0.7 * x.y).cosh() + x.z * x.z);
        let opts = SolverOptions { tol: 1e-12, ..Default::default() };
        let (u, _) = dirichlet_poisson(&spec, region, None, Some(&g.values), None, &opts).unwrap();
        let direct = oracle_laplace(&spec, region, &g).unwrap();
        let diff = u.values.iter().zip(&direct.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn maximum_principle() {
        let spec = GridSpec::cube(17, 1.2);
        let g = ScalarGrid::from_fn(spec, |x| (3.0 * x.x + x.y).sin() + 0.5 * x.z);
        let (u, _) = laplace_dirichlet(&spec, &Aabb::cube(1.0), &g, &SolverOptions::default()).unwrap();
        let region = spec.sub_box(&Aabb::cube(1.0));
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        let mut inside = vec![];
        for i in region[0].0..=region[0].1 {
            for j in region[1].0..=region[1].1 {
                for k in region[2].0..=region[2].1 {
                    let idx = spec.index(i, j, k);
                    let face = [i, j, k].iter().zip(&region).any(|(p, r)| *p == r.0 || *p == r.1);
                    if face {
                        lo = lo.min(g.values[idx]);
                        hi = hi.max(g.values[idx]);
                    } else {
                        inside.push(u.values[idx]);
                    }
                }
            }
        }
        assert!(inside.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }

    #[test]
    fn bounded_split_properties() {
        let spec = GridSpec::cube(33, 1.2);
        let b = Aabb::cube(1.0);
        let (f, _, _) = sample_phantom(&BumpPhantom::default(), &spec);
        let opts = SolverOptions::default();
        let s1 = bounded_decompose(&f, &b, &opts, None).unwrap();
        assert!(s1.stats.residual <= 1e-9);
        // boundary values of v_B vanish exactly
        let region = spec.sub_box(&b);
        for j in region[1].0..=region[1].1 {
            assert_eq!(s1.v.values[spec.index(region[0].0, j, 16)], 0.0);
            assert_eq!(s1.v.values[spec.index(16, j, region[2].1)], 0.0);
        }
        // the solver equation holds to its tolerance
        let lap = laplacian7(&spec, &s1.v.values);
        let div = delta(&f);
        let (mut num, mut den) = (0.0, 0.0);
        for i in region[0].0 + 1..region[0].1 {
            for j in region[1].0 + 1..region[1].1 {
                for k in region[2].0 + 1..region[2].1 {
                    let idx = spec.index(i, j, k);
                    num += (lap[idx] - div.values[idx]).powi(2);
                    den += div.values[idx].powi(2);
                }
            }
        }
        assert!((num / den).sqrt() < 1e-6);
        // a different starting point reaches the same split
        let seed = ScalarGrid::from_fn(spec, |x: &Vec3| (5.0 * x.x).sin() * x.y);
        let s2 = bounded_decompose(&f, &b, &opts, Some(&seed)).unwrap();
        let e = relative_l2(&[&s1.v.values], &[&s2.v.values]);
        assert!(e < 1e-8, "{e}");
    }

    #[test]
    fn default_phantom_potential_is_recovered() {
        // the phantom's potential vanishes on ∂B, so v_B = v there
        let spec = GridSpec::cube(41, 1.2);
        let (f, _, v) = sample_phantom(&BumpPhantom::default(), &spec);
        let s = bounded_decompose(&f, &Aabb::cube(1.0), &SolverOptions::default(), None).unwrap();
        let e = relative_l2(&[&s.v.values], &[&v.values]);
        assert!(e < 0.02, "{e}");
    }

    #[test]
    fn zero_rhs_is_zero() {
        let spec = GridSpec::cube(12, 1.0);
        let f = VectorGrid::zeros(spec);
        let s = bounded_decompose(&f, &Aabb::cube(0.8), &SolverOptions::default(), None).unwrap();
        assert_eq!(s.v.max_abs(), 0.0);
        assert_eq!(s.stats.iterations, 0);
    }
}
