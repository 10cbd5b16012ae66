//! Recovery of the potential part: the whole-space potential outside `B`
//! from exterior rays, the harmonic bridge to the zero-boundary split on
//! `B`, and `v_B` from first-moment data by scalar cone-beam inversion.

mod assemble;
mod exterior;
mod scalar;

pub use assemble::{assemble_full, FullOptions, FullReconstruction};
pub use exterior::{boundary_data, exterior_potential, BoundaryData, ExteriorRaySpec, ExteriorValue};
pub use scalar::{invert_scalar_xray, potential_sinogram, recover_vb, scalar_plane_derivative, ScalarStats};
