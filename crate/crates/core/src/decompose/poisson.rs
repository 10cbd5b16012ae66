//! Free-space Poisson solve by zero-padded convolution with the Newtonian
//! kernel, and the solenoidal part recovered from the Saint-Venant field.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::{smooth_size, Fft3};
use crate::field::{divergence_of_skew, GridSpec, ScalarGrid, SkewGrid, VectorGrid};

/// `∫_{[-1/2,1/2]³} |x|⁻¹ dx`, the cell average of the kernel singularity.
const CELL_SELF_INTEGRAL: f64 = 2.380_077_700_819_328;

/// Solver for `Δu = ρ` in all of ℝ³ with `u → 0` at infinity, for sources
/// sampled on `source` and solutions wanted on `source.extended(extra)`.
///
/// The convolution with `−1/(4π|x|)` is evaluated with an FFT on a box large
/// enough that no wrap-around occurs, so the only errors are the midpoint
/// quadrature of the convolution and the cell-averaged self term.
pub struct FreeSpacePoisson {
    pub source: GridSpec,
    pub target: GridSpec,
    extra: usize,
    fft: Fft3,
    kernel: Vec<Complex64>,
}

impl FreeSpacePoisson {
    pub fn new(source: &GridSpec, extra: usize) -> Self {
        let target = source.extended(extra);
        let dims: [usize; 3] = std::array::from_fn(|a| smooth_size(source.dims[a] + target.dims[a] - 1));
        let fft = Fft3::new(dims);
        let h = source.spacing;
        let vol = h[0] * h[1] * h[2];
        let self_term = -CELL_SELF_INTEGRAL * vol.powf(2.0 / 3.0) / (4.0 * PI);
        // the circular index m represents the target-minus-source offset
        // m - extra, with negative offsets wrapped to the end
        let offset = |m: usize, a: usize| -> f64 {
            let lag = if m < target.dims[a] { m as i64 } else { m as i64 - dims[a] as i64 };
            (lag - extra as i64) as f64 * h[a]
        };
        let mut kernel: Vec<Complex64> = (0..fft.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (dims[1] * dims[2]), (idx / dims[2]) % dims[1], idx % dims[2]);
                let (x, y, z) = (offset(i, 0), offset(j, 1), offset(k, 2));
                let r = (x * x + y * y + z * z).sqrt();
                let g = if r < 1e-12 * h[0] { self_term } else { -vol / (4.0 * PI * r) };
                Complex64::new(g, 0.0)
            })
            .collect();
        fft.forward(&mut kernel);
        Self { source: *source, target, extra, fft, kernel }
    }

    /// `Δ⁻¹ρ` on the target grid.
    pub fn solve(&self, rho: &[f64]) -> ScalarGrid {
        let [n0, n1, n2] = self.fft.dims;
        let mut buf = vec![Complex64::default(); self.fft.len()];
        for (idx, v) in rho.iter().enumerate() {
            let [i, j, k] = self.source.unindex(idx);
            buf[(i * n1 + j) * n2 + k].re = *v;
        }
        self.fft.forward(&mut buf);
        buf.par_iter_mut().zip(&self.kernel).for_each(|(b, g)| *b *= g);
        self.fft.inverse(&mut buf);
        let _ = n0;
        let values = (0..self.target.len())
            .into_par_iter()
            .map(|idx| {
                let [i, j, k] = self.target.unindex(idx);
                buf[(i * n1 + j) * n2 + k].re
            })
            .collect();
        ScalarGrid { spec: self.target, values }
    }

    pub fn extra(&self) -> usize {
        self.extra
    }
}

/// Solenoidal part `f^s` of the field whose Saint-Venant tensor is `w`.
///
/// Since `Wf_ij = ½(∂_j f_i − ∂_i f_j)`, we have
/// `2 ∂_j Wf_ij = Δf_i − ∂_i div f = Δf^s_i` (the last step uses
/// `f = f^s + dv` with `div f^s = 0`, so `Δ(dv)_i = ∂_i Δv = ∂_i div f`).
/// Hence `f^s = Δ⁻¹(2 ∂_j Wf_ij)` with the free-space inverse, which fixes
/// the solution that tends to zero at infinity. The result lives on the
/// grid of `w` extended by `extra` nodes per side.
pub fn solenoidal_from_w(w: &SkewGrid, extra: usize) -> VectorGrid {
    let y = divergence_of_skew(w);
    let solver = FreeSpacePoisson::new(&w.spec, extra);
    let comps = y.comps.each_ref().map(|c| solver.solve(c).values);
    VectorGrid { spec: solver.target, comps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{relative_l2, sample_phantom, saint_venant, BumpPhantom};

    #[test]
    fn point_charge_far_field() {
        let spec = GridSpec::cube(17, 1.0);
        let mut rho = vec![0.0; spec.len()];
        rho[spec.index(8, 8, 8)] = 1.0 / spec.cell_volume();
        let solver = FreeSpacePoisson::new(&spec, 8);
        let u = solver.solve(&rho);
        let t = solver.target;
        for idx in [t.index(0, 16, 16), t.index(32, 32, 32), t.index(5, 20, 30)] {
            let x = t.position_of(idx);
            let want = -1.0 / (4.0 * PI * x.norm());
            assert!((u.values[idx] - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn gaussian_charge_converges() {
        // u = exp(−r²/s) has Δu = (4r²/s² − 6/s) u
        let s = 0.05;
        let err = |n: usize| {
            let spec = GridSpec::cube(n, 1.2);
            let rho: Vec<f64> = (0..spec.len())
                .map(|idx| {
                    let r2 = spec.position_of(idx).norm_squared();
                    (4.0 * r2 / (s * s) - 6.0 / s) * (-r2 / s).exp()
                })
                .collect();
            let u = FreeSpacePoisson::new(&spec, 0).solve(&rho);
            let exact: Vec<f64> = (0..spec.len()).map(|idx| (-spec.position_of(idx).norm_squared() / s).exp()).collect();
            relative_l2(&[&u.values], &[&exact])
        };
        let (coarse, fine) = (err(25), err(49));
        assert!(fine < 1e-2, "{fine}");
        assert!(fine < 0.5 * coarse, "{coarse} -> {fine}");
    }

    #[test]
    fn phantom_solenoidal_part() {
        let spec = GridSpec::cube(49, 1.2);
        let (f, fs, _) = sample_phantom(&BumpPhantom::default(), &spec);
        let rec = solenoidal_from_w(&saint_venant(&f), 0);
        let e = relative_l2(&rec.comps.each_ref().map(|c| c.as_slice()), &fs.comps.each_ref().map(|c| c.as_slice()));
        assert!(e < 0.03, "{e}");
    }

    #[test]
    fn potential_field_gives_nothing() {
        let spec = GridSpec::cube(33, 1.2);
        let v = ScalarGrid::from_fn(spec, |x| (-x.norm_squared() / 0.1).exp());
        let f = crate::field::d(&v);
        let rec = solenoidal_from_w(&saint_venant(&f), 0);
        assert!(rec.max_abs() < 1e-10 * f.max_abs().max(1.0), "{}", rec.max_abs());
    }

    #[test]
    fn zero_input() {
        let spec = GridSpec::cube(9, 1.0);
        assert_eq!(solenoidal_from_w(&SkewGrid::zeros(spec), 2).max_abs(), 0.0);
    }
}
