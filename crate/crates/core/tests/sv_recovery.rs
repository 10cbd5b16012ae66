//! Saint-Venant recovery from restricted Doppler data on small
//! configurations, checked against quadrature oracles and the analytic
//! tensor of the phantom.

use std::sync::OnceLock;

use restray::field::{relative_l2, BumpPhantom, GridSpec, Phantom, PhantomField, SkewGrid};
use restray::forward::{doppler, DirectionLayout, Sinogram, SinogramSampler};
use restray::geometry::{tangent_frame, Aabb, Curve, Hyperplane, SphereLayout};
use restray::oracles::oracle_radon;
use restray::radon::RadonSpec;
use restray::sv_recover::{p_derivative_block, recover_w, SvOptions};
use restray::Vec3;

fn layout() -> DirectionLayout {
    DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n: 64 }
}

fn curve() -> Curve {
    Curve::three_circles(3.5, 128)
}

fn sinogram(ph: &BumpPhantom) -> Sinogram {
    doppler(&PhantomField(ph), &curve(), layout(), 0.02).unwrap()
}

fn default_data() -> &'static Sinogram {
    static DATA: OnceLock<Sinogram> = OnceLock::new();
    DATA.get_or_init(|| sinogram(&BumpPhantom::default()))
}

/// `∂²_p⟨f, e⟩^∧(ω, p)` by central differences of the quadrature oracle.
fn oracle_second_derivative(ph: &BumpPhantom, e: &Vec3, omega: &Vec3, p: f64) -> f64 {
    let h = 0.01;
    let r = |p: f64| oracle_radon(|x| ph.f(x).dot(e), ph.support_radius(), omega, p, 1e-12);
    (r(p + h) - 2.0 * r(p) + r(p - h)) / (h * h)
}

#[test]
fn plane_block_matches_oracle_on_generic_planes() {
    let ph = BumpPhantom::default();
    let sampler = SinogramSampler::new(default_data()).unwrap();
    let opts = SvOptions::default();
    for (omega, p) in [(Vec3::new(0.3, -0.5, 0.8), 0.2), (Vec3::new(1.0, 0.4, 0.2), -0.35), (Vec3::new(-0.2, 0.9, 0.3), 0.05)] {
        let omega = omega.normalize();
        let block = p_derivative_block(&sampler, &Hyperplane { omega, p }, &opts).unwrap();
        let (e1, e2) = tangent_frame(&omega);
        let got = e1 * block.tangent_transforms[0] + e2 * block.tangent_transforms[1];
        let want = e1 * oracle_second_derivative(&ph, &e1, &omega, p) + e2 * oracle_second_derivative(&ph, &e2, &omega, p);
        let err = (got - want).norm() / want.norm();
        println!("omega {omega:?} p {p}: {got:?} vs {want:?} ({err:.3e})");
        assert!(err <= 0.05, "{err}");
    }
}

#[test]
fn plane_normal_to_the_rotation_axis_carries_nothing() {
    // the tangent projection of curl(0,0,φ) integrates to zero on planes
    // normal to e₃, and ∇φ has no tangent component there after integration
    let ph = BumpPhantom::default();
    let sampler = SinogramSampler::new(default_data()).unwrap();
    let omega = Vec3::z();
    let block = p_derivative_block(&sampler, &Hyperplane { omega, p: 0.2 }, &SvOptions::default()).unwrap();
    let (e1, _) = tangent_frame(&omega);
    let generic = Vec3::new(0.3, -0.5, 0.8).normalize();
    let scale = oracle_second_derivative(&ph, &e1.cross(&generic).normalize(), &generic, 0.2).abs().max(1.0);
    let got = Vec3::new(block.tangent_transforms[0], block.tangent_transforms[1], 0.0).norm();
    assert!(got <= 0.02 * scale, "{got} vs scale {scale}");
}

#[test]
fn opposite_plane_parametrization_agrees() {
    // H(ω, p) = H(−ω, −p) and ∂²_p is even under the flip
    let sampler = SinogramSampler::new(default_data()).unwrap();
    let opts = SvOptions::default();
    let omega = Vec3::new(0.6, 0.2, -0.7).normalize();
    let vec = |omega: Vec3, p: f64| {
        let b = p_derivative_block(&sampler, &Hyperplane { omega, p }, &opts).unwrap();
        let (e1, e2) = tangent_frame(&omega);
        e1 * b.tangent_transforms[0] + e2 * b.tangent_transforms[1]
    };
    let a = vec(omega, 0.3);
    let b = vec(-omega, -0.3);
    assert!((a - b).norm() <= 1e-6 * a.norm().max(1.0), "{a:?} vs {b:?}");
}

#[test]
fn zero_data_gives_zero() {
    let mut sino = default_data().clone();
    sino.values.iter_mut().for_each(|v| *v = 0.0);
    let sampler = SinogramSampler::new(&sino).unwrap();
    let block = p_derivative_block(&sampler, &Hyperplane { omega: Vec3::new(0.3, -0.5, 0.8).normalize(), p: 0.2 }, &SvOptions::default()).unwrap();
    assert_eq!(block.tangent_transforms, [0.0, 0.0]);
}

fn coarse_recovery(sino: &Sinogram) -> SkewGrid {
    let sampler = SinogramSampler::new(sino).unwrap();
    let b = Aabb::cube(1.0);
    let spec = RadonSpec::for_box(SphereLayout::Hemisphere { n_theta: 16, n_phi: 32 }, 64, &b);
    recover_w(&sampler, &spec, &GridSpec::cube(33, 1.6), &b, &SvOptions::default()).unwrap().0
}

fn analytic_w(ph: &BumpPhantom, spec: GridSpec) -> SkewGrid {
    let mut w = SkewGrid::zeros(spec);
    for idx in 0..spec.len() {
        let v = ph.w(&spec.position_of(idx)).unwrap();
        for c in 0..3 {
            w.comps[c][idx] = v[c];
        }
    }
    w
}

fn slices(w: &SkewGrid) -> [&[f64]; 3] {
    w.comps.each_ref().map(|c| c.as_slice())
}

#[test]
fn recovered_tensor_matches_the_phantom_and_ignores_potentials() {
    let ph = BumpPhantom::default();
    let w = coarse_recovery(default_data());
    let truth = analytic_w(&ph, w.spec);
    let err = relative_l2(&slices(&w), &slices(&truth));
    println!("W relative L2 at 33³: {err:.4}");
    assert!(err <= 0.10, "{err}");

    let pot = coarse_recovery(&sinogram(&BumpPhantom::potential_only()));
    let leak = pot.norm_l2() / truth.norm_l2();
    println!("W of a potential field relative to the solenoidal W: {leak:.3e}");
    assert!(leak <= 0.05, "{leak}");
}
