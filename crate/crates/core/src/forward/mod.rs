//! Restricted ray transforms along lines through a curve, their duals, and
//! smooth interpolation of the resulting sinograms.

mod chart;
mod dual;
mod sampler;
mod sinogram;
mod spline;
mod transforms;

pub use chart::ChartFrame;
pub use dual::{dual_doppler, dual_doppler_grid};
pub use sampler::SinogramSampler;
pub use sinogram::{CurveSample, DirectionLayout, Sinogram, SinogramHeader, SinogramKind, SINOGRAM_MAGIC};
pub use spline::{prefilter_2d, Jet2, SplineGrid};
pub use transforms::{add_noise, doppler, doppler_ray, moment1, moment1_ray, scalar_xray, simpson, xray_ray};
