//! Helmholtz-type splits of vector fields: in all of space from the
//! Saint-Venant tensor or spectrally from the field, and on a box with
//! zero boundary potential.

mod dirichlet;
mod fft;
mod poisson;
mod spectral;

pub use dirichlet::{bounded_decompose, dirichlet_poisson, laplace_dirichlet, BoundedSplit, SolveStats, SolverOptions};
pub use fft::{smooth_size, wave_numbers, Fft3};
pub use poisson::{solenoidal_from_w, FreeSpacePoisson};
pub use spectral::{helmholtz_oracle, helmholtz_split, HelmholtzSplit, SpectralWorkspace};
