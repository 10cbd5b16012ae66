use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{GridSpec, ScalarGrid, VectorField, VectorGrid};
use crate::geometry::Aabb;
use crate::Vec3;

/// Analytic test field with known pieces.
pub trait Phantom: Sync {
    fn f(&self, x: &Vec3) -> Vec3;
    /// Solenoidal part on all of ℝ³, if known.
    fn fs(&self, x: &Vec3) -> Option<Vec3>;
    /// Potential on all of ℝ³, if known.
    fn v(&self, x: &Vec3) -> Option<f64>;
    /// `(W₁₂, W₁₃, W₂₃)` of `f`, if known.
    fn w(&self, x: &Vec3) -> Option<[f64; 3]>;
    /// `f` vanishes outside this radius.
    fn support_radius(&self) -> f64;
}

/// Radial profile `φ(r) = χ(r/R)·exp(−r²/a)` with a quintic smoothstep cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialBump {
    pub width2: f64,
    pub radius: f64,
    /// χ ≡ 1 for `r/R` below this.
    pub plateau: f64,
}

impl Default for RadialBump {
    fn default() -> Self {
        Self { width2: 0.08, radius: 0.9, plateau: 0.5 }
    }
}

impl RadialBump {
    /// `(φ, φ', φ'')` at radius `r`.
    pub fn jet(&self, r: f64) -> [f64; 3] {
        let s = r / self.radius;
        if s >= 1.0 {
            return [0.0; 3];
        }
        let a = self.width2;
        let g = (-r * r / a).exp();
        let g1 = -2.0 * r / a * g;
        let g2 = (4.0 * r * r / (a * a) - 2.0 / a) * g;
        let (c0, c1, c2) = if s <= self.plateau {
            (1.0, 0.0, 0.0)
        } else {
            let w = 1.0 - self.plateau;
            let t = (s - self.plateau) / w;
            let c0 = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
            let c1 = -30.0 * t * t * (1.0 - t) * (1.0 - t) / w / self.radius;
            let c2 = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w) / (self.radius * self.radius);
            (c0, c1, c2)
        };
        [c0 * g, c1 * g + c0 * g1, c2 * g + 2.0 * c1 * g1 + c0 * g2]
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.jet(x.norm())[0]
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let r = x.norm();
        if r < 1e-300 {
            return Vec3::zeros();
        }
        x * (self.jet(r)[1] / r)
    }

    pub fn hessian(&self, x: &Vec3) -> Matrix3<f64> {
        let r = x.norm();
        let [_, p1, p2] = self.jet(r);
        if r < 1e-8 {
            // φ'(r)/r → φ''(0) on the plateau.
            return Matrix3::identity() * self.jet(0.0)[2];
        }
        let u = x / r;
        let uu = u * u.transpose();
        uu * p2 + (Matrix3::identity() - uu) * (p1 / r)
    }
}

/// `f = a_s·curl(0,0,φ) + a_p·∇φ`: the solenoidal part is `a_s·(∂₂φ, −∂₁φ, 0)`
/// and the potential is `a_p·φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpPhantom {
    pub profile: RadialBump,
    pub solenoidal_amplitude: f64,
    pub potential_amplitude: f64,
}

impl Default for BumpPhantom {
    fn default() -> Self {
        Self { profile: RadialBump::default(), solenoidal_amplitude: 1.0, potential_amplitude: 1.0 }
    }
}

impl BumpPhantom {
    pub fn potential_only() -> Self {
        Self { solenoidal_amplitude: 0.0, ..Self::default() }
    }

    pub fn solenoidal_only() -> Self {
        Self { potential_amplitude: 0.0, ..Self::default() }
    }
}

impl Phantom for BumpPhantom {
    fn f(&self, x: &Vec3) -> Vec3 {
        let g = self.profile.gradient(x);
        Vec3::new(g.y, -g.x, 0.0) * self.solenoidal_amplitude + g * self.potential_amplitude
    }
    fn fs(&self, x: &Vec3) -> Option<Vec3> {
        let g = self.profile.gradient(x);
        Some(Vec3::new(g.y, -g.x, 0.0) * self.solenoidal_amplitude)
    }
    fn v(&self, x: &Vec3) -> Option<f64> {
        Some(self.profile.value(x) * self.potential_amplitude)
    }
    fn w(&self, x: &Vec3) -> Option<[f64; 3]> {
        let h = self.profile.hessian(x);
        let a = 0.5 * self.solenoidal_amplitude;
        Some([a * (h[(0, 0)] + h[(1, 1)]), a * h[(1, 2)], -a * h[(0, 2)]])
    }
    fn support_radius(&self) -> f64 {
        self.profile.radius
    }
}

/// Off-center bump times a fixed direction; no closed-form decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobPhantom {
    pub center: [f64; 3],
    pub direction: [f64; 3],
    pub profile: RadialBump,
}

impl Default for BlobPhantom {
    fn default() -> Self {
        Self {
            center: [0.2, -0.1, 0.1],
            direction: [1.0, 0.0, 0.0],
            profile: RadialBump { width2: 0.05, radius: 0.6, plateau: 0.4 },
        }
    }
}

impl Phantom for BlobPhantom {
    fn f(&self, x: &Vec3) -> Vec3 {
        Vec3::from(self.direction) * self.profile.value(&(x - Vec3::from(self.center)))
    }
    fn fs(&self, _: &Vec3) -> Option<Vec3> {
        None
    }
    fn v(&self, _: &Vec3) -> Option<f64> {
        None
    }
    fn w(&self, x: &Vec3) -> Option<[f64; 3]> {
        let g = self.profile.gradient(&(x - Vec3::from(self.center)));
        let e = Vec3::from(self.direction);
        let pair = |i: usize, j: usize| 0.5 * (e[i] * g[j] - e[j] * g[i]);
        Some([pair(0, 1), pair(0, 2), pair(1, 2)])
    }
    fn support_radius(&self) -> f64 {
        Vec3::from(self.center).norm() + self.profile.radius
    }
}

/// Configurable phantom selection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhantomSpec {
    Bump {
        #[serde(default = "one")]
        solenoidal_amplitude: f64,
        #[serde(default = "one")]
        potential_amplitude: f64,
        #[serde(default)]
        profile: Option<RadialBump>,
    },
    Blob {
        center: [f64; 3],
        direction: [f64; 3],
        #[serde(default)]
        profile: Option<RadialBump>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec::Bump { solenoidal_amplitude: 1.0, potential_amplitude: 1.0, profile: None }
    }
}

impl PhantomSpec {
    pub fn build(&self) -> Box<dyn Phantom> {
        match *self {
            PhantomSpec::Bump { solenoidal_amplitude, potential_amplitude, profile } => Box::new(BumpPhantom {
                profile: profile.unwrap_or_default(),
                solenoidal_amplitude,
                potential_amplitude,
            }),
            PhantomSpec::Blob { center, direction, profile } => Box::new(BlobPhantom {
                center,
                direction,
                profile: profile.unwrap_or(BlobPhantom::default().profile),
            }),
        }
    }
}

/// Samples `f`, the solenoidal part and the potential (zeros where unknown).
pub fn sample_phantom(ph: &dyn Phantom, spec: &GridSpec) -> (VectorGrid, VectorGrid, ScalarGrid) {
    let f = VectorGrid::from_fn(*spec, |x| ph.f(x));
    let fs = VectorGrid::from_fn(*spec, |x| ph.fs(x).unwrap_or_else(Vec3::zeros));
    let v = ScalarGrid::from_fn(*spec, |x| ph.v(x).unwrap_or(0.0));
    (f, fs, v)
}

/// Phantoms evaluate as vector fields supported in their ball.
pub struct PhantomField<'a>(pub &'a dyn Phantom);

impl VectorField for PhantomField<'_> {
    fn eval(&self, x: &Vec3) -> Vec3 {
        self.0.f(x)
    }
    fn support(&self) -> Aabb {
        Aabb::cube(self.0.support_radius())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{d, delta, diff_axis, saint_venant};
    use proptest::prelude::*;

    #[test]
    fn solenoidal_part_at_reference_point() {
        let ph = BumpPhantom::default();
        let x = Vec3::new(0.1, 0.0, 0.0);
        let v = ph.v(&x).unwrap();
        let fs = ph.fs(&x).unwrap();
        assert!(fs.x.abs() < 1e-15 && fs.z.abs() < 1e-15);
        assert!((fs.y - 2.5 * v).abs() < 1e-13);
        assert_eq!(ph.v(&Vec3::zeros()), Some(1.0));
        assert_eq!(ph.fs(&Vec3::zeros()), Some(Vec3::zeros()));
    }

    #[test]
    fn vanishes_outside_support() {
        let ph = BumpPhantom::default();
        for x in [Vec3::new(0.91, 0.0, 0.0), Vec3::new(0.6, 0.6, 0.6)] {
            assert_eq!(ph.f(&x), Vec3::zeros());
        }
    }

    fn fd_jet(b: &RadialBump, r: f64) -> [f64; 2] {
        let h = 1e-4;
        let f = |r: f64| b.jet(r)[0];
        [(f(r + h) - f(r - h)) / (2.0 * h), (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h)]
    }

    proptest! {
        #[test]
        fn radial_jet_matches_finite_differences(r in 0.01f64..0.89) {
            let b = RadialBump::default();
            let [d1, d2] = fd_jet(&b, r);
            let [_, p1, p2] = b.jet(r);
            prop_assert!((d1 - p1).abs() < 1e-6);
            prop_assert!((d2 - p2).abs() < 1e-5);
        }

        #[test]
        fn analytic_w_matches_derivatives_of_f(x in -0.7f64..0.7, y in -0.7f64..0.7, z in -0.7f64..0.7) {
            let ph = BumpPhantom::default();
            let p = Vec3::new(x, y, z);
            let h = 1e-5;
            let df = |j: usize| {
                let mut e = Vec3::zeros();
                e[j] = h;
                (ph.f(&(p + e)) - ph.f(&(p - e))) / (2.0 * h)
            };
            let j = [df(0), df(1), df(2)];
            let w = ph.w(&p).unwrap();
            let fdw = [0.5 * (j[1][0] - j[0][1]), 0.5 * (j[2][0] - j[0][2]), 0.5 * (j[2][1] - j[1][2])];
            for k in 0..3 {
                prop_assert!((w[k] - fdw[k]).abs() < 1e-6, "{k}: {} vs {}", w[k], fdw[k]);
            }
        }
    }

    #[test]
    fn sampled_pieces_split_exactly() {
        let spec = GridSpec::cube(17, 1.5);
        let ph = BumpPhantom::default();
        let (f, fs, _) = sample_phantom(&ph, &spec);
        let dv = VectorGrid::from_fn(spec, |x| ph.profile.gradient(x));
        let r = f.sub(&fs).unwrap().sub(&dv).unwrap();
        assert!(r.max_abs() <= 1e-12);
    }

    #[test]
    fn kernel_and_divergence_identities_on_grid() {
        // h = 1/32 over [-1.5, 1.5]³.
        let spec = GridSpec::cube(97, 1.5);
        let ph = BumpPhantom::potential_only();
        let (f, _, v) = sample_phantom(&ph, &spec);
        let w = saint_venant(&d(&v));
        let m = w.comps.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(m <= 1e-6, "{m}");
        // curl of the sampled vector potential (0, 0, v).
        let a3 = &v.values;
        let fsol = VectorGrid {
            spec,
            comps: [diff_axis(&spec, a3, 1), diff_axis(&spec, a3, 0).iter().map(|x| -x).collect(), vec![0.0; spec.len()]],
        };
        assert!(delta(&fsol).max_abs() <= 1e-6);
        assert!(f.max_abs() > 0.1);
    }
}
