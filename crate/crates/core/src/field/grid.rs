use serde::{Deserialize, Serialize};

use super::interp::tricubic;
use super::{ScalarField, VectorField};
use crate::geometry::Aabb;
use crate::{Error, Result, Vec3};

/// Regular box grid; node `(i, j, k)` sits at `origin + (i h₀, j h₁, k h₂)`
/// and is stored at `(i·n₁ + j)·n₂ + k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
}

impl GridSpec {
    /// Cube `[-half, half]³` with `n` nodes per axis (both faces on nodes).
    pub fn cube(n: usize, half: f64) -> Self {
        let h = 2.0 * half / (n - 1) as f64;
        Self { dims: [n; 3], origin: [-half; 3], spacing: [h; 3] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&n| n < 8) {
            return Err(Error::Config(format!("grid dims {:?} must be at least 8 per axis", self.dims)));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        Ok(())
    }

    /// Checks that the grid box strictly contains `domain`.
    pub fn validate_contains(&self, domain: &Aabb) -> Result<()> {
        self.validate()?;
        let b = self.bounds();
        if (0..3).any(|k| !(b.min[k] < domain.min[k] && b.max[k] > domain.max[k])) {
            return Err(Error::Config("grid box must strictly contain the domain B".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let j = (idx / self.dims[2]) % self.dims[1];
        let i = idx / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        )
    }

    pub fn position_of(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.unindex(idx);
        self.position(i, j, k)
    }

    pub fn bounds(&self) -> Aabb {
        let min = Vec3::from(self.origin);
        let max = self.position(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1);
        Aabb::new(min, max)
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Index range per axis of the nodes lying inside `domain` (closed).
    pub fn sub_box(&self, domain: &Aabb) -> [(usize, usize); 3] {
        let mut out = [(0, 0); 3];
        for a in 0..3 {
            let lo = ((domain.min[a] - self.origin[a]) / self.spacing[a] - 1e-9).ceil().max(0.0) as usize;
            let hi = ((domain.max[a] - self.origin[a]) / self.spacing[a] + 1e-9).floor() as usize;
            out[a] = (lo, hi.min(self.dims[a] - 1));
        }
        out
    }

    /// Same spacing, `extra` nodes added on each side of every axis.
    pub fn extended(&self, extra: usize) -> Self {
        let mut s = *self;
        for a in 0..3 {
            s.dims[a] += 2 * extra;
            s.origin[a] -= extra as f64 * self.spacing[a];
        }
        s
    }
}

/// Scalar samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self { values: vec![0.0; spec.len()], spec }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(&Vec3) -> f64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.position_of(i))).collect();
        Self { spec, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.spec.cell_volume()).sqrt()
    }

    /// Restriction onto a grid with the same spacing whose nodes are a subset.
    pub fn restrict(&self, target: &GridSpec) -> Self {
        restrict_component(&self.spec, &self.values, target).map(|values| Self { spec: *target, values }).unwrap()
    }
}

impl ScalarField for ScalarGrid {
    fn eval(&self, x: &Vec3) -> f64 {
        tricubic(&self.spec, &[&self.values], x)[0]
    }
    fn support(&self) -> Aabb {
        self.spec.bounds()
    }
}

/// Vector samples, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGrid {
    pub spec: GridSpec,
    pub comps: [Vec<f64>; 3],
}

impl VectorGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.len();
        Self { spec, comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(&Vec3) -> Vec3) -> Self {
        let mut out = Self::zeros(spec);
        for i in 0..spec.len() {
            let v = f(&spec.position_of(i));
            for c in 0..3 {
                out.comps[c][i] = v[c];
            }
        }
        out
    }

    pub fn at(&self, idx: usize) -> Vec3 {
        Vec3::new(self.comps[0][idx], self.comps[1][idx], self.comps[2][idx])
    }

    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|v| v * v).sum();
        (s * self.spec.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::Shape("vector grids on different specs".into()));
        }
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.comps[c].iter_mut().zip(&other.comps[c]) {
                *a -= b;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::Shape("vector grids on different specs".into()));
        }
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.comps[c].iter_mut().zip(&other.comps[c]) {
                *a += b;
            }
        }
        Ok(out)
    }

    pub fn restrict(&self, target: &GridSpec) -> Self {
        let comps = [0, 1, 2].map(|c| restrict_component(&self.spec, &self.comps[c], target).unwrap());
        Self { spec: *target, comps }
    }

    /// Zero every node outside `domain`.
    pub fn mask_outside(&mut self, domain: &Aabb) {
        for i in 0..self.spec.len() {
            if !domain.contains(&self.spec.position_of(i)) {
                for c in 0..3 {
                    self.comps[c][i] = 0.0;
                }
            }
        }
    }
}

impl VectorField for VectorGrid {
    fn eval(&self, x: &Vec3) -> Vec3 {
        let v = tricubic(&self.spec, &[&self.comps[0], &self.comps[1], &self.comps[2]], x);
        Vec3::new(v[0], v[1], v[2])
    }
    fn support(&self) -> Aabb {
        self.spec.bounds()
    }
}

/// Antisymmetric 2-tensor samples stored as `(W₁₂, W₁₃, W₂₃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewGrid {
    pub spec: GridSpec,
    pub comps: [Vec<f64>; 3],
}

impl SkewGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.len();
        Self { spec, comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    /// Component `(i, j)`, zero-based, with `W_ji = −W_ij` and `W_ii = 0`.
    pub fn get(&self, i: usize, j: usize, idx: usize) -> f64 {
        match (i, j) {
            (0, 1) => self.comps[0][idx],
            (0, 2) => self.comps[1][idx],
            (1, 2) => self.comps[2][idx],
            (1, 0) => -self.comps[0][idx],
            (2, 0) => -self.comps[1][idx],
            (2, 1) => -self.comps[2][idx],
            _ => 0.0,
        }
    }

    pub fn norm_l2(&self) -> f64 {
        // Both triangles of the full tensor.
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|v| v * v).sum();
        (2.0 * s * self.spec.cell_volume()).sqrt()
    }

    pub fn restrict(&self, target: &GridSpec) -> Self {
        let comps = [0, 1, 2].map(|c| restrict_component(&self.spec, &self.comps[c], target).unwrap());
        Self { spec: *target, comps }
    }
}

fn restrict_component(from: &GridSpec, values: &[f64], to: &GridSpec) -> Result<Vec<f64>> {
    let mut off = [0usize; 3];
    for a in 0..3 {
        if (from.spacing[a] - to.spacing[a]).abs() > 1e-12 * from.spacing[a] {
            return Err(Error::Shape("restriction needs equal spacing".into()));
        }
        let o = (to.origin[a] - from.origin[a]) / from.spacing[a];
        if o < -1e-9 || (o - o.round()).abs() > 1e-6 || o.round() as usize + to.dims[a] > from.dims[a] {
            return Err(Error::Shape("target grid is not a node subset".into()));
        }
        off[a] = o.round() as usize;
    }
    let mut out = vec![0.0; to.len()];
    for i in 0..to.dims[0] {
        for j in 0..to.dims[1] {
            for k in 0..to.dims[2] {
                out[to.index(i, j, k)] = values[from.index(i + off[0], j + off[1], k + off[2])];
            }
        }
    }
    Ok(out)
}

/// `‖a − b‖₂ / ‖b‖₂` over matching arrays.
pub fn relative_l2(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.iter().zip(y.iter()) {
            num += (u - v) * (u - v);
            den += v * v;
        }
    }
    if den == 0.0 { num.sqrt() } else { (num / den).sqrt() }
}
