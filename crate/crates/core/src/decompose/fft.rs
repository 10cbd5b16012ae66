//! Three-dimensional complex FFT built from rustfft line transforms.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest integer `≥ n` whose only prime factors are 2, 3 and 5.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Planned forward and inverse transforms for one array shape (row-major,
/// last axis contiguous).
pub struct Fft3 {
    pub dims: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = dims.map(|n| planner.plan_fft_forward(n));
        let inv = dims.map(|n| planner.plan_fft_inverse(n));
        Self { dims, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
        let s = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|c| *c *= s);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        assert_eq!(data.len(), self.len());
        let [n0, n1, n2] = self.dims;
        // contiguous axis
        data.par_chunks_mut(n2).for_each(|line| plans[2].process(line));
        // middle axis: each i-slab is an n1 × n2 matrix, transform its columns
        data.par_chunks_mut(n1 * n2).for_each(|slab| {
            let mut line = vec![Complex64::default(); n1];
            for k in 0..n2 {
                for j in 0..n1 {
                    line[j] = slab[j * n2 + k];
                }
                plans[1].process(&mut line);
                for j in 0..n1 {
                    slab[j * n2 + k] = line[j];
                }
            }
        });
        // slow axis: gather columns of length n0 per (j, k) block
        let plane = n1 * n2;
        let lines: Vec<Vec<Complex64>> = (0..plane)
            .into_par_iter()
            .map(|jk| {
                let mut line: Vec<Complex64> = (0..n0).map(|i| data[i * plane + jk]).collect();
                plans[0].process(&mut line);
                line
            })
            .collect();
        for (jk, line) in lines.into_iter().enumerate() {
            for (i, c) in line.into_iter().enumerate() {
                data[i * plane + jk] = c;
            }
        }
    }
}

/// Angular wave numbers of an FFT axis of `n` points with spacing `h`;
/// the Nyquist mode (even `n`) is set to zero so that odd-order spectral
/// derivatives stay real.
pub fn wave_numbers(n: usize, h: f64) -> Vec<f64> {
    let scale = std::f64::consts::TAU / (n as f64 * h);
    (0..n)
        .map(|m| {
            if 2 * m == n {
                0.0
            } else if 2 * m < n {
                m as f64 * scale
            } else {
                (m as f64 - n as f64) * scale
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(193), 200);
        assert_eq!(smooth_size(128), 128);
        assert_eq!(smooth_size(7), 8);
    }

    #[test]
    fn round_trip_and_plane_wave() {
        let dims = [6, 10, 9];
        let fft = Fft3::new(dims);
        let orig: Vec<Complex64> = (0..fft.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i % 5) as f64)).collect();
        let mut d = orig.clone();
        fft.forward(&mut d);
        fft.inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
        // a single plane wave lands in a single bin
        let (a, b, c) = (2usize, 3usize, 4usize);
        let mut w: Vec<Complex64> = (0..fft.len())
            .map(|idx| {
                let (i, j, k) = (idx / 90, (idx / 9) % 10, idx % 9);
                let ph = std::f64::consts::TAU * (a * i) as f64 / 6.0 + std::f64::consts::TAU * (b * j) as f64 / 10.0 + std::f64::consts::TAU * (c * k) as f64 / 9.0;
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        fft.forward(&mut w);
        let peak = (a * 10 + b) * 9 + c;
        for (idx, v) in w.iter().enumerate() {
            let want = if idx == peak { fft.len() as f64 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-9 && v.im.abs() < 1e-9);
        }
    }

    #[test]
    fn wave_number_layout() {
        let k = wave_numbers(8, 0.5);
        let s = std::f64::consts::TAU / 4.0;
        assert_eq!(k[1], s);
        assert_eq!(k[4], 0.0);
        assert_eq!(k[7], -s);
    }
}
