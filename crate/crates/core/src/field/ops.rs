use rayon::prelude::*;

use super::{GridSpec, ScalarGrid, SkewGrid, VectorGrid};

/// Derivative along `axis`: fourth-order central in the interior, second
/// order on the two outermost layers of each face.
pub fn diff_axis(spec: &GridSpec, values: &[f64], axis: usize) -> Vec<f64> {
    let n = spec.dims[axis];
    let h = spec.spacing[axis];
    let stride = match axis {
        0 => spec.dims[1] * spec.dims[2],
        1 => spec.dims[2],
        _ => 1,
    };
    let mut out = vec![0.0; values.len()];
    out.par_iter_mut().enumerate().for_each(|(idx, o)| {
        let i = spec.unindex(idx)[axis];
        let f = |di: isize| values[(idx as isize + di * stride as isize) as usize];
        *o = if i >= 2 && i + 2 < n {
            (-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h)
        } else if i >= 1 && i + 1 < n {
            (f(1) - f(-1)) / (2.0 * h)
        } else if i == 0 {
            (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
        } else {
            (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h)
        };
    });
    out
}

/// Gradient `dv`.
pub fn d(v: &ScalarGrid) -> VectorGrid {
    let comps = [0, 1, 2].map(|a| diff_axis(&v.spec, &v.values, a));
    VectorGrid { spec: v.spec, comps }
}

/// Gradient of `v` computed from the nodes of the closed index box `region`
/// only (one-sided stencils on its faces); zero outside the box.
pub fn d_in_box(v: &ScalarGrid, region: [(usize, usize); 3]) -> VectorGrid {
    let spec = &v.spec;
    let sub = GridSpec {
        dims: region.map(|(lo, hi)| hi + 1 - lo),
        origin: std::array::from_fn(|a| spec.origin[a] + region[a].0 as f64 * spec.spacing[a]),
        spacing: spec.spacing,
    };
    let g = d(&v.restrict(&sub));
    let mut out = VectorGrid::zeros(*spec);
    for idx in 0..sub.len() {
        let [i, j, k] = sub.unindex(idx);
        let dst = spec.index(i + region[0].0, j + region[1].0, k + region[2].0);
        for c in 0..3 {
            out.comps[c][dst] = g.comps[c][idx];
        }
    }
    out
}

/// Divergence `δf`.
pub fn delta(f: &VectorGrid) -> ScalarGrid {
    let mut values = diff_axis(&f.spec, &f.comps[0], 0);
    for a in 1..3 {
        for (o, x) in values.iter_mut().zip(diff_axis(&f.spec, &f.comps[a], a)) {
            *o += x;
        }
    }
    ScalarGrid { spec: f.spec, values }
}

/// Saint-Venant operator `(Wf)_ij = ½(∂_j f_i − ∂_i f_j)`.
pub fn saint_venant(f: &VectorGrid) -> SkewGrid {
    let s = &f.spec;
    let pair = |i: usize, j: usize| -> Vec<f64> {
        let a = diff_axis(s, &f.comps[i], j);
        let b = diff_axis(s, &f.comps[j], i);
        a.iter().zip(&b).map(|(x, y)| 0.5 * (x - y)).collect()
    };
    SkewGrid { spec: *s, comps: [pair(0, 1), pair(0, 2), pair(1, 2)] }
}

/// `y_i = 2 ∂_j W_ij`, so that `y = Δf` whenever `W = Wf` and `δf = 0`.
pub fn divergence_of_skew(w: &SkewGrid) -> VectorGrid {
    let s = &w.spec;
    let dw = |c: usize, axis: usize| diff_axis(s, &w.comps[c], axis);
    let (w12_2, w13_3) = (dw(0, 1), dw(1, 2));
    let (w12_1, w23_3) = (dw(0, 0), dw(2, 2));
    let (w13_1, w23_2) = (dw(1, 0), dw(2, 1));
    let n = s.len();
    let mut out = VectorGrid::zeros(*s);
    for i in 0..n {
        out.comps[0][i] = 2.0 * (w12_2[i] + w13_3[i]);
        out.comps[1][i] = 2.0 * (-w12_1[i] + w23_3[i]);
        out.comps[2][i] = 2.0 * (-w13_1[i] - w23_2[i]);
    }
    out
}

/// Seven-point Laplacian; boundary nodes are left at zero.
pub fn laplacian7(spec: &GridSpec, u: &[f64]) -> Vec<f64> {
    let [n0, n1, n2] = spec.dims;
    let inv = spec.spacing.map(|h| 1.0 / (h * h));
    let s0 = n1 * n2;
    let mut out = vec![0.0; u.len()];
    out.par_iter_mut().enumerate().for_each(|(idx, o)| {
        let [i, j, k] = spec.unindex(idx);
        if i == 0 || j == 0 || k == 0 || i + 1 == n0 || j + 1 == n1 || k + 1 == n2 {
            return;
        }
        let c = u[idx];
        *o = (u[idx + s0] + u[idx - s0] - 2.0 * c) * inv[0]
            + (u[idx + n2] + u[idx - n2] - 2.0 * c) * inv[1]
            + (u[idx + 1] + u[idx - 1] - 2.0 * c) * inv[2];
    });
    out
}
