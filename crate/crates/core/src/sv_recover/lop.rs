//! The operator `L = ⟨ω, ∂_ξ⟩` acting on degree-0 homogeneous extensions of
//! sinogram data, and integrals over the great circle `S(ω)`.

use std::f64::consts::TAU;

use crate::forward::{ChartFrame, SinogramSampler};
use crate::{Result, Vec3};

/// `(Ψ, LΨ, L²Ψ)` at the unit direction `ξ ⊥ ω` for the curve point
/// `(arc, s)`, where `Ψ(ξ + εω)` is read through the chart frame `frame`
/// of that point. Returns `None` outside the chart.
pub fn l_jet(sampler: &SinogramSampler, arc: usize, s: f64, frame: &ChartFrame, omega: &Vec3, xi: &Vec3) -> Option<[f64; 3]> {
    let z = xi.dot(&frame.axis);
    if z <= 0.0 {
        return None;
    }
    let u = xi.dot(&frame.eu) / z;
    let v = xi.dot(&frame.ev) / z;
    let h = frame.half_width;
    if u.abs() > h || v.abs() > h {
        return None;
    }
    let j = sampler.jet(arc, s, u, v);
    // Chain rule along ε ↦ ξ + εω in gnomonic coordinates.
    let oc = omega.dot(&frame.axis) / z;
    let u1 = omega.dot(&frame.eu) / z - u * oc;
    let v1 = omega.dot(&frame.ev) / z - v * oc;
    let u2 = -2.0 * u1 * oc;
    let v2 = -2.0 * v1 * oc;
    let g1 = j.du * u1 + j.dv * v1;
    let g2 = j.duu * u1 * u1 + 2.0 * j.duv * u1 * v1 + j.dvv * v1 * v1 + j.du * u2 + j.dv * v2;
    Some([j.v, g1, g2])
}

/// `Lᵏ(w·Ψ)` at `ξ ⊥ ω` by central finite differences of
/// `ε ↦ w(ξ + εω)·Ψ(ξ + εω)` with step `eps`, for `k ≤ 2`.
pub fn apply_l(
    sampler: &SinogramSampler,
    arc: usize,
    s: f64,
    omega: &Vec3,
    xi: &Vec3,
    k: usize,
    weight: &dyn Fn(&Vec3) -> f64,
    eps: f64,
) -> Result<f64> {
    let g = |e: f64| -> Result<f64> {
        let d = xi + omega * e;
        Ok(weight(&d) * sampler.value(arc, s, &d)?)
    };
    Ok(match k {
        0 => g(0.0)?,
        1 => (g(eps)? - g(-eps)?) / (2.0 * eps),
        _ => (g(eps)? - 2.0 * g(0.0)? + g(-eps)?) / (eps * eps),
    })
}

/// Trapezoidal integral over the circle of uniformly spaced samples.
pub fn circle_average(g: &[f64]) -> f64 {
    TAU * g.iter().sum::<f64>() / g.len() as f64
}

/// `∫_{S(ω)} LᵏΨ dξ` (`k = 1, 2`) at one curve point with `n_nodes`
/// uniform nodes; nodes outside the point's chart contribute zero.
pub fn circle_integral_l(
    sampler: &SinogramSampler,
    arc: usize,
    s: f64,
    omega: &Vec3,
    frame2: (&Vec3, &Vec3),
    k: usize,
    n_nodes: usize,
) -> Result<f64> {
    let frame = sampler.frame_at(arc, s)?;
    let (e1, e2) = frame2;
    // S(ω) is a line in the chart: only the arc with ⟨ξ, axis⟩ > 0 and
    // |u|, |v| ≤ half-width can contribute.
    let a = (e1.dot(&frame.axis), e2.dot(&frame.axis));
    let mut acc = 0.0;
    for m in 0..n_nodes {
        let th = TAU * m as f64 / n_nodes as f64;
        let (c, sn) = (th.cos(), th.sin());
        if c * a.0 + sn * a.1 <= 0.0 {
            continue;
        }
        let xi = e1 * c + e2 * sn;
        if let Some(j) = l_jet(sampler, arc, s, &frame, omega, &xi) {
            acc += j[k];
        }
    }
    Ok(acc * TAU / n_nodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{DirectionLayout, Sinogram, SinogramKind};
    use crate::geometry::{tangent_frame, Curve};
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    const A: [f64; 3] = [0.3, -0.8, 0.5];

    /// Synthetic data `D(γ₀, ξ) = ⟨ξ, a⟩/|ξ|` on every chart node.
    fn synthetic() -> &'static Sinogram {
        static S: OnceLock<Sinogram> = OnceLock::new();
        S.get_or_init(|| {
            let curve = Curve::three_circles(3.5, 256);
            let n = 96;
            let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.2, n };
            let mut s = Sinogram::zeros(SinogramKind::Doppler, &curve, layout).unwrap();
            for k in 0..s.n_samples() {
                for d in 0..n * n {
                    let xi = s.direction(k, d);
                    s.values[k * n * n + d] = xi.dot(&Vec3::from(A));
                }
            }
            s
        })
    }

    #[test]
    fn circle_quadrature() {
        let n = 256;
        let th = |m: usize| TAU * m as f64 / n as f64;
        assert!((circle_average(&vec![1.0; n]) - TAU).abs() < 1e-13);
        assert!(circle_average(&(0..n).map(|m| th(m).cos()).collect::<Vec<_>>()).abs() < 1e-13);
        assert!((circle_average(&(0..n).map(|m| th(m).cos().powi(2)).collect::<Vec<_>>()) - PI).abs() < 1e-13);
    }

    #[test]
    fn constant_data_has_zero_l() {
        let curve = Curve::three_circles(3.5, 32);
        let n = 32;
        let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n };
        let mut s = Sinogram::zeros(SinogramKind::Doppler, &curve, layout).unwrap();
        s.values.iter_mut().for_each(|v| *v = 2.0);
        let sp = SinogramSampler::new(&s).unwrap();
        let frame = sp.frame_at(0, 0.3).unwrap();
        let omega = Vec3::new(0.2, 0.1, 1.0).normalize();
        let (e1, _) = tangent_frame(&omega);
        let xi = (frame.axis - omega * omega.dot(&frame.axis)).normalize() * 0.9 + e1 * 0.1;
        let xi = (xi - omega * omega.dot(&xi)).normalize();
        let j = l_jet(&sp, 0, 0.3, &frame, &omega, &xi).unwrap();
        assert!(j[1].abs() < 1e-10 && j[2].abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn symbolic_derivatives_of_linear_data(s in 0.0f64..6.28, ox in -1.0f64..1.0, oy in -1.0f64..1.0, t in -0.25f64..0.25) {
            let sino = synthetic();
            let sp = SinogramSampler::new(sino).unwrap();
            let frame = sp.frame_at(1, s).unwrap();
            // ω ⟂ ξ with ξ near the chart axis.
            prop_assume!(ox.abs() + oy.abs() > 0.3);
            let omega = (frame.eu * ox + frame.ev * oy + frame.axis * 0.05).normalize();
            let xi0 = frame.axis + (frame.eu * oy - frame.ev * ox) * t;
            let xi = (xi0 - omega * omega.dot(&xi0)).normalize();
            let (u, v) = frame.coords(&xi).unwrap();
            prop_assume!(u.abs().max(v.abs()) < 0.7 * frame.half_width);
            let a = Vec3::from(A);
            if let Some(j) = l_jet(&sp, 1, s, &frame, &omega, &xi) {
                prop_assert!((j[0] - xi.dot(&a)).abs() < 1e-6);
                prop_assert!((j[1] - omega.dot(&a)).abs() < 1e-4, "L: {} vs {}", j[1], omega.dot(&a));
                prop_assert!((j[2] + xi.dot(&a)).abs() < 1e-4, "L²: {} vs {}", j[2], -xi.dot(&a));
                let one = |_: &Vec3| 1.0;
                let l2 = apply_l(&sp, 1, s, &omega, &xi, 2, &one, 1e-3).unwrap();
                prop_assert!((l2 + xi.dot(&a)).abs() < 1e-4, "fd L²: {}", l2);
            }
        }
    }
}
