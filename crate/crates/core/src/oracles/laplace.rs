//! Direct solve of the discrete Dirichlet problem on small boxes.

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarGrid};

/// Largest box (in nodes, boundary included) accepted by [`oracle_laplace`].
pub const MAX_ORACLE_NODES: usize = 24 * 24 * 24;

/// Harmonic extension of the values of `boundary` on the faces of the closed
/// index box `region` into its interior, for the 7-point Laplacian.
///
/// The symmetric positive definite system is factored by banded Cholesky in
/// the natural ordering (bandwidth = one interior slab). Output nodes outside
/// `region` are zero; boundary nodes keep the given values.
pub fn oracle_laplace(spec: &GridSpec, region: [(usize, usize); 3], boundary: &ScalarGrid) -> Result<ScalarGrid> {
    if boundary.spec != *spec {
        return Err(Error::Shape("boundary grid does not match the grid spec".into()));
    }
    let counts = region.map(|(lo, hi)| hi + 1 - lo.min(hi + 1));
    if region.iter().any(|&(lo, hi)| hi < lo + 2 || hi >= usize::MAX) || (0..3).any(|a| region[a].1 >= spec.dims[a]) {
        return Err(Error::Shape("Dirichlet box needs at least one interior node per axis".into()));
    }
    let total: usize = counts.iter().product();
    if total > MAX_ORACLE_NODES {
        return Err(Error::OracleTooLarge(total));
    }
    let m = counts.map(|c| c - 2);
    let unknowns = m[0] * m[1] * m[2];
    let band = m[1] * m[2];
    let inv = spec.spacing.map(|h| 1.0 / (h * h));
    let diag = 2.0 * (inv[0] + inv[1] + inv[2]);
    let local = |a: usize, b: usize, c: usize| (a * m[1] + b) * m[2] + c;
    let global = |a: usize, b: usize, c: usize| spec.index(region[0].0 + 1 + a, region[1].0 + 1 + b, region[2].0 + 1 + c);

    // lower band storage: row r, column r - d at low[r * (band + 1) + d]
    let width = band + 1;
    let mut low = vec![0.0; unknowns * width];
    let mut rhs = vec![0.0; unknowns];
    for a in 0..m[0] {
        for b in 0..m[1] {
            for c in 0..m[2] {
                let r = local(a, b, c);
                low[r * width] = diag;
                let g = global(a, b, c);
                let strides = [spec.dims[1] * spec.dims[2], spec.dims[2], 1];
                let pos = [a, b, c];
                for axis in 0..3 {
                    let lower_stride = [band, m[2], 1][axis];
                    if pos[axis] > 0 {
                        low[r * width + lower_stride] = -inv[axis];
                    } else {
                        rhs[r] += inv[axis] * boundary.values[g - strides[axis]];
                    }
                    if pos[axis] + 1 == m[axis] {
                        rhs[r] += inv[axis] * boundary.values[g + strides[axis]];
                    }
                }
            }
        }
    }

    // in-place banded Cholesky A = L Lᵀ
    for r in 0..unknowns {
        let first = r.saturating_sub(band);
        for col in first..=r {
            let mut sum = low[r * width + (r - col)];
            let k_lo = first.max(col.saturating_sub(band));
            for k in k_lo..col {
                sum -= low[r * width + (r - k)] * low[col * width + (col - k)];
            }
            if col == r {
                if sum <= 0.0 {
                    return Err(Error::Shape("Dirichlet matrix lost positive definiteness".into()));
                }
                low[r * width] = sum.sqrt();
            } else {
                low[r * width + (r - col)] = sum / low[col * width];
            }
        }
    }
    // forward then backward substitution
    let mut y = rhs;
    for r in 0..unknowns {
        let mut sum = y[r];
        for k in r.saturating_sub(band)..r {
            sum -= low[r * width + (r - k)] * y[k];
        }
        y[r] = sum / low[r * width];
    }
    for r in (0..unknowns).rev() {
        let mut sum = y[r];
        for k in r + 1..(r + band + 1).min(unknowns) {
            sum -= low[k * width + (k - r)] * y[k];
        }
        y[r] = sum / low[r * width];
    }

    let mut out = ScalarGrid::zeros(*spec);
    for i in region[0].0..=region[0].1 {
        for j in region[1].0..=region[1].1 {
            for k in region[2].0..=region[2].1 {
                let idx = spec.index(i, j, k);
                let interior = i > region[0].0
                    && i < region[0].1
                    && j > region[1].0
                    && j < region[1].1
                    && k > region[2].0
                    && k < region[2].1;
                out.values[idx] = if interior {
                    y[local(i - region[0].0 - 1, j - region[1].0 - 1, k - region[2].0 - 1)]
                } else {
                    boundary.values[idx]
                };
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::laplacian7;

    fn full(spec: &GridSpec) -> [(usize, usize); 3] {
        spec.dims.map(|n| (0, n - 1))
    }

    #[test]
    fn constant_boundary() {
        let spec = GridSpec::cube(12, 1.0);
        let g = ScalarGrid::from_fn(spec, |_| 1.0);
        let u = oracle_laplace(&spec, full(&spec), &g).unwrap();
        assert!(u.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn linear_boundary_anisotropic() {
        let spec = GridSpec { dims: [9, 11, 13], origin: [-1.0, -0.5, 0.0], spacing: [0.2, 0.1, 0.07] };
        let g = ScalarGrid::from_fn(spec, |x| x.x - 2.0 * x.y + 0.5 * x.z);
        let u = oracle_laplace(&spec, full(&spec), &g).unwrap();
        for (a, b) in u.values.iter().zip(&g.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sub_box_is_discretely_harmonic() {
        let spec = GridSpec::cube(20, 1.0);
        let region = [(2, 15), (3, 17), (1, 18)];
        let g = ScalarGrid::from_fn(spec, |x| (2.0 * x.x).sin() * (x.y * x.z).exp());
        let u = oracle_laplace(&spec, region, &g).unwrap();
        let lap = laplacian7(&spec, &u.values);
        for i in region[0].0 + 1..region[0].1 {
            for j in region[1].0 + 1..region[1].1 {
                for k in region[2].0 + 1..region[2].1 {
                    assert!(lap[spec.index(i, j, k)].abs() < 1e-9);
                }
            }
        }
        assert_eq!(u.values[spec.index(0, 0, 0)], 0.0);
    }

    #[test]
    fn size_cap() {
        let spec = GridSpec::cube(25, 1.0);
        let g = ScalarGrid::zeros(spec);
        assert!(matches!(oracle_laplace(&spec, full(&spec), &g), Err(Error::OracleTooLarge(_))));
    }
}
