//! Recovery of the Saint-Venant field `Wf` from restricted Doppler data:
//! interpolation weights, the `L` operator on homogeneous extensions of the
//! data, plane-wise assembly of `∂²_p⟨f, v⟩^∧` for tangent vectors `v`, and
//! filtered backprojection.

mod assembly;
mod lagrange;
mod lop;

pub use assembly::{
    assemble_tangent_transforms, p_derivative_block, recover_w, saint_venant_integrand, AssemblyStats,
    PlaneDataSlice, SvOptions,
};
pub use lagrange::{lagrange_weights, plane_coords, weight_split, LinearForm};
pub use lop::{apply_l, circle_average, circle_integral_l, l_jet};
