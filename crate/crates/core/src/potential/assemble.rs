//! The full reconstruction chain `f^s_{ℝⁿ} → g → u → f^s_B → v_B → f`.

use log::info;
use serde::{Deserialize, Serialize};

use super::exterior::{boundary_data, BoundaryData, ExteriorRaySpec};
use super::scalar::{recover_vb, ScalarStats};
use crate::decompose::{laplace_dirichlet, SolveStats, SolverOptions};
use crate::error::Result;
use crate::field::{d_in_box, GridSpec, ScalarGrid, VectorGrid};
use crate::forward::Sinogram;
use crate::geometry::Aabb;
use crate::radon::RadonSpec;
use crate::sv_recover::SvOptions;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullOptions {
    pub ray: ExteriorRaySpec,
    pub solver: SolverOptions,
    pub sv: SvOptions,
    /// Simpson step of the forward projection of `f^s_B`.
    pub step: f64,
}

/// Every intermediate of [`assemble_full`].
pub struct FullReconstruction {
    pub f: VectorGrid,
    pub fs_b: VectorGrid,
    pub v_b: ScalarGrid,
    /// `u = v_B − v_{ℝⁿ}` on `B`.
    pub u: ScalarGrid,
    pub boundary: BoundaryData,
    pub laplace: SolveStats,
    pub scalar: ScalarStats,
    /// The derived scalar sinogram `X v_B`.
    pub potential_data: Sinogram,
}

/// Reconstructs `f` on `B` from its whole-space solenoidal part `fs_r`
/// (sampled on a grid extending past `target`) and first-moment data.
///
/// `g = −v_{ℝⁿ}|∂B` comes from exterior rays; `u` is its harmonic extension,
/// so `f^s_B = f^s_{ℝⁿ} − du` on `B`; then `v_B` is recovered from
/// `X v_B = I f^s_B − I f` and `f = f^s_B + dv_B`.
pub fn assemble_full(
    fs_r: &VectorGrid,
    target: &GridSpec,
    b: &Aabb,
    moment: &Sinogram,
    spec: &RadonSpec,
    opts: &FullOptions,
) -> Result<FullReconstruction> {
    let region = target.sub_box(b);
    let boundary = boundary_data(fs_r, target, b, &opts.ray)?;
    info!("boundary data: {} nodes, normal spread {:.3e}", boundary.nodes, boundary.normal_spread);
    let (u, laplace) = laplace_dirichlet(target, b, &boundary.g, &opts.solver)?;
    let mut fs_b = fs_r.restrict(target).sub(&d_in_box(&u, region))?;
    fs_b.mask_outside(b);
    let (v_b, scalar, potential_data) = recover_vb(moment, &fs_b, b, spec, target, &opts.sv, opts.step)?;
    let mut f = fs_b.add(&d_in_box(&v_b, region))?;
    f.mask_outside(b);
    Ok(FullReconstruction { f, fs_b, v_b, u, boundary, laplace, scalar, potential_data })
}
