//! Periodic spectral calculus on a zero-padded box, and the whole-space
//! Helmholtz split computed with it.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::{smooth_size, wave_numbers, Fft3};
use crate::field::{GridSpec, ScalarGrid, VectorGrid};

/// FFT workspace on a box padded by at least `pad` × the field dims.
///
/// Holds the wave vectors and the inverse-Laplacian multiplier `−1/|k|²`,
/// with the mean mode mapped to zero.
pub struct SpectralWorkspace {
    /// The field grid the workspace was built for.
    pub field: GridSpec,
    /// Padded grid: same spacing, field grid centered inside.
    pub padded: GridSpec,
    /// Offset (in nodes) of the field grid inside the padded one.
    pub offset: [usize; 3],
    pub k: [Vec<f64>; 3],
    fft: Fft3,
}

impl SpectralWorkspace {
    pub fn new(field: &GridSpec, pad: f64) -> Self {
        let dims = field.dims.map(|n| smooth_size(((n as f64) * pad.max(1.0)).ceil() as usize));
        let offset = std::array::from_fn(|a| (dims[a] - field.dims[a]) / 2);
        let padded = GridSpec {
            dims,
            origin: std::array::from_fn(|a| field.origin[a] - offset[a] as f64 * field.spacing[a]),
            spacing: field.spacing,
        };
        let k = std::array::from_fn(|a| wave_numbers(dims[a], field.spacing[a]));
        Self { field: *field, padded, offset, k, fft: Fft3::new(dims) }
    }

    /// Zero-padded spectrum of field-grid samples.
    pub fn spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); self.padded.len()];
        let [n0, n1, n2] = self.field.dims;
        for i in 0..n0 {
            for j in 0..n1 {
                for k in 0..n2 {
                    let dst = self.padded.index(i + self.offset[0], j + self.offset[1], k + self.offset[2]);
                    buf[dst].re = values[self.field.index(i, j, k)];
                }
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    /// Real part of the inverse transform on the whole padded grid.
    pub fn synthesize(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.fft.inverse(&mut spec);
        spec.into_iter().map(|c| c.re).collect()
    }

    /// Restriction of padded-grid values to the field grid.
    pub fn crop(&self, padded: &[f64]) -> Vec<f64> {
        (0..self.field.len())
            .map(|idx| {
                let [i, j, k] = self.field.unindex(idx);
                padded[self.padded.index(i + self.offset[0], j + self.offset[1], k + self.offset[2])]
            })
            .collect()
    }

    /// Wave vector of a flat padded-grid index.
    pub fn wave_vector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.padded.unindex(idx);
        [self.k[0][i], self.k[1][j], self.k[2][k]]
    }

    /// The multiplier `−1/|k|²` of `Δ⁻¹`, zero on the mean mode.
    pub fn inverse_laplacian(&self, idx: usize) -> f64 {
        let k = self.wave_vector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    }
}

/// Result of [`helmholtz_split`].
pub struct HelmholtzSplit {
    pub fs: VectorGrid,
    pub v: ScalarGrid,
    /// `‖div f^s‖ / ‖div f‖` measured spectrally before cropping.
    pub divergence_residual: f64,
}

/// Spectral split `f = f^s + dv`, `div f^s = 0`, on a box padded by `pad`.
///
/// `v = Δ⁻¹ div f` is fixed up to a constant by the zero-mean convention of
/// the periodic solve; the constant is then chosen so that `v` averages to
/// zero over the outermost layer of the padded box, where the whole-space
/// potential is smallest.
pub fn helmholtz_split(f: &VectorGrid, pad: f64) -> HelmholtzSplit {
    let ws = SpectralWorkspace::new(&f.spec, pad);
    let spectra: Vec<Vec<Complex64>> = f.comps.iter().map(|c| ws.spectrum(c)).collect();
    let n = ws.padded.len();
    let i = Complex64::i();
    // i k·f̂
    let div: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let k = ws.wave_vector(idx);
            i * (spectra[0][idx] * k[0] + spectra[1][idx] * k[1] + spectra[2][idx] * k[2])
        })
        .collect();
    let v_hat: Vec<Complex64> = (0..n).into_par_iter().map(|idx| div[idx] * ws.inverse_laplacian(idx)).collect();
    let mut fs_hat: Vec<Vec<Complex64>> = spectra;
    for (a, comp) in fs_hat.iter_mut().enumerate() {
        comp.par_iter_mut().enumerate().for_each(|(idx, c)| {
            *c -= i * ws.wave_vector(idx)[a] * v_hat[idx];
        });
    }
    let div_before: f64 = div.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let div_after: f64 = (0..n)
        .into_par_iter()
        .map(|idx| {
            let k = ws.wave_vector(idx);
            (fs_hat[0][idx] * k[0] + fs_hat[1][idx] * k[1] + fs_hat[2][idx] * k[2]).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();

    let mut v_pad = ws.synthesize(v_hat);
    let dims = ws.padded.dims;
    let (mut shell, mut count) = (0.0, 0usize);
    for (idx, val) in v_pad.iter().enumerate() {
        let [a, b, c] = ws.padded.unindex(idx);
        if a == 0 || b == 0 || c == 0 || a + 1 == dims[0] || b + 1 == dims[1] || c + 1 == dims[2] {
            shell += val;
            count += 1;
        }
    }
    let shift = shell / count as f64;
    v_pad.iter_mut().for_each(|x| *x -= shift);

    let comps = fs_hat.into_iter().map(|c| ws.crop(&ws.synthesize(c))).collect::<Vec<_>>();
    let [c0, c1, c2]: [Vec<f64>; 3] = comps.try_into().expect("three components");
    HelmholtzSplit {
        fs: VectorGrid { spec: f.spec, comps: [c0, c1, c2] },
        v: ScalarGrid { spec: f.spec, values: ws.crop(&v_pad) },
        divergence_residual: if div_before > 0.0 { div_after / div_before } else { 0.0 },
    }
}

/// Whole-space Helmholtz split `(f^s, v)` of a field supported inside its
/// grid, spectrally on a 2× padded box.
pub fn helmholtz_oracle(f: &VectorGrid) -> (VectorGrid, ScalarGrid) {
    let s = helmholtz_split(f, 2.0);
    (s.fs, s.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{relative_l2, sample_phantom, BumpPhantom};

    #[test]
    fn default_phantom_potential() {
        let spec = GridSpec::cube(41, 1.2);
        let (f, fs, v) = sample_phantom(&BumpPhantom::default(), &spec);
        let split = helmholtz_split(&f, 2.0);
        let ev = relative_l2(&[&split.v.values], &[&v.values]);
        assert!(ev < 0.02, "v error {ev}");
        let efs = relative_l2(&split.fs.comps.each_ref().map(|c| c.as_slice()), &fs.comps.each_ref().map(|c| c.as_slice()));
        assert!(efs < 0.02, "fs error {efs}");
        assert!(split.divergence_residual < 1e-8, "{}", split.divergence_residual);
    }

    #[test]
    fn solenoidal_input_has_no_potential() {
        let spec = GridSpec::cube(33, 1.2);
        let (f, _, _) = sample_phantom(&BumpPhantom::solenoidal_only(), &spec);
        let (_, v) = helmholtz_oracle(&f);
        let scale = f.max_abs();
        assert!(v.max_abs() < 1e-3 * scale, "{}", v.max_abs());
    }

    #[test]
    fn zero_field() {
        let spec = GridSpec::cube(10, 1.0);
        let (fs, v) = helmholtz_oracle(&VectorGrid::zeros(spec));
        assert_eq!(fs.max_abs(), 0.0);
        assert_eq!(v.max_abs(), 0.0);
    }
}
