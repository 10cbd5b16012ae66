//! Sampled fields on regular grids, analytic phantoms with known
//! decompositions, and the finite-difference operators `d`, `δ` and `W`.

mod grid;
mod interp;
mod io;
mod ops;
mod phantom;

pub use grid::{relative_l2, GridSpec, ScalarGrid, SkewGrid, VectorGrid};
pub use interp::{catmull_rom_weights, tricubic};
pub use io::{read_field, write_field, AnyField, FieldHeader, FieldKind, FIELD_MAGIC};
pub use ops::{d, d_in_box, delta, diff_axis, divergence_of_skew, laplacian7, saint_venant};
pub use phantom::{sample_phantom, BlobPhantom, BumpPhantom, Phantom, PhantomField, PhantomSpec, RadialBump};

use crate::geometry::Aabb;
use crate::Vec3;

/// Anything that can be evaluated as a vector field in ℝ³.
pub trait VectorField: Sync {
    fn eval(&self, x: &Vec3) -> Vec3;
    /// A box outside of which the field vanishes.
    fn support(&self) -> Aabb;
}

/// Anything that can be evaluated as a scalar field in ℝ³.
pub trait ScalarField: Sync {
    fn eval(&self, x: &Vec3) -> f64;
    fn support(&self) -> Aabb;
}

/// Adapts a closure to [`VectorField`].
pub struct FnVector<F> {
    pub f: F,
    pub support: Aabb,
}

impl<F: Fn(&Vec3) -> Vec3 + Sync> VectorField for FnVector<F> {
    fn eval(&self, x: &Vec3) -> Vec3 {
        (self.f)(x)
    }
    fn support(&self) -> Aabb {
        self.support
    }
}

/// Adapts a closure to [`ScalarField`].
pub struct FnScalar<F> {
    pub f: F,
    pub support: Aabb,
}

impl<F: Fn(&Vec3) -> f64 + Sync> ScalarField for FnScalar<F> {
    fn eval(&self, x: &Vec3) -> f64 {
        (self.f)(x)
    }
    fn support(&self) -> Aabb {
        self.support
    }
}
