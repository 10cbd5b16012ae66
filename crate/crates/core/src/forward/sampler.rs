use rayon::prelude::*;

use super::chart::ChartFrame;
use super::sinogram::{DirectionLayout, Sinogram};
use super::spline::{prefilter_2d, Jet2, SplineGrid};
use crate::{Error, Result, Vec3};

/// Smooth interpolant of chart-layout sinogram data: cubic B-splines in the
/// chart coordinates of every sample, cubic Lagrange interpolation along
/// each arc.
pub struct SinogramSampler<'a> {
    pub sino: &'a Sinogram,
    center: Vec3,
    radius: f64,
    n: usize,
    coef: Vec<f64>,
    /// Per sample, the chart box outside which data and spline vanish.
    active: Vec<Option<[f64; 4]>>,
}

impl<'a> SinogramSampler<'a> {
    pub fn new(sino: &'a Sinogram) -> Result<Self> {
        let DirectionLayout::Chart { center, radius, n } = sino.layout else {
            return Err(Error::Config("derivatives in ξ need a chart direction layout".into()));
        };
        let mut coef = sino.values.clone();
        coef.par_chunks_exact_mut(n * n).for_each(|block| prefilter_2d(block, n));
        let active = (0..sino.n_samples()).map(|k| active_box(sino, k, n)).collect();
        Ok(Self { sino, center: Vec3::from(center), radius, n, coef, active })
    }

    /// Chart frame at an arbitrary parameter; frames vary smoothly in `s`.
    pub fn frame_at(&self, arc: usize, s: f64) -> Result<ChartFrame> {
        let a = &self.sino.curve.arcs[arc];
        ChartFrame::new(a.eval(s), &a.deriv(s), &self.center, self.radius)
    }

    fn grid(&self, sample: usize) -> SplineGrid {
        let f = self.sino.frame(sample).expect("chart layout");
        SplineGrid { n: self.n, lo: -f.half_width, h: f.node_step(self.n) }
    }

    /// Samples and cubic Lagrange weights interpolating in `s` on `arc`.
    pub fn stencil(&self, arc: usize, s: f64) -> [(usize, f64); 4] {
        let curve = &self.sino.curve;
        let m = curve.samples_per_arc as i64;
        let (lo, _) = curve.arcs[arc].interval();
        let h = curve.sample_step(arc);
        let t = (s - lo) / h;
        let closed = curve.arcs[arc].is_closed();
        let mut base = t.floor() as i64 - 1;
        if !closed {
            base = base.clamp(0, m - 4);
        }
        let x = t - base as f64; // nodes at 0, 1, 2, 3
        let l = [
            -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
            x * (x - 2.0) * (x - 3.0) / 2.0,
            -x * (x - 1.0) * (x - 3.0) / 2.0,
            x * (x - 1.0) * (x - 2.0) / 6.0,
        ];
        let off = self.sino.arc_offsets[arc];
        std::array::from_fn(|k| {
            let j = (base + k as i64).rem_euclid(m) as usize;
            (off + j, l[k])
        })
    }

    /// Spline jet of one sample's chart data; zero outside the chart.
    pub fn sample_jet(&self, sample: usize, u: f64, v: f64) -> Jet2 {
        match self.active[sample] {
            Some([u0, u1, v0, v1]) if u >= u0 && u <= u1 && v >= v0 && v <= v1 => {}
            _ => return Jet2::default(),
        }
        let nn = self.n * self.n;
        self.grid(sample).jet(&self.coef[sample * nn..(sample + 1) * nn], u, v).unwrap_or_default()
    }

    /// Jet in chart coordinates `(u, v)` of the frame at `(arc, s)`.
    pub fn jet(&self, arc: usize, s: f64, u: f64, v: f64) -> Jet2 {
        let mut out = Jet2::default();
        for (sample, w) in self.stencil(arc, s) {
            out.scaled_add(w, &self.sample_jet(sample, u, v));
        }
        out
    }

    /// Data value for the ray from `γ(s)` in direction `ξ` (any length).
    pub fn value(&self, arc: usize, s: f64, xi: &Vec3) -> Result<f64> {
        let frame = self.frame_at(arc, s)?;
        Ok(match frame.coords(xi) {
            Some((u, v)) => self.jet(arc, s, u, v).v,
            None => 0.0,
        })
    }
}

/// Bounding chart box of the exactly nonzero data of one sample, widened by
/// the spline's reach (the prefiltered coefficients decay like 0.27^k).
fn active_box(sino: &Sinogram, sample: usize, n: usize) -> Option<[f64; 4]> {
    let row = sino.row(sample);
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for (d, v) in row.iter().enumerate() {
        if *v != 0.0 {
            let (i, j) = (d / n, d % n);
            i0 = i0.min(i);
            i1 = i1.max(i);
            j0 = j0.min(j);
            j1 = j1.max(j);
        }
    }
    if i0 == usize::MAX {
        return None;
    }
    let f = sino.frame(sample)?;
    let pad = 20;
    let lo = |k: usize| f.node(k.saturating_sub(pad), n);
    let hi = |k: usize| f.node((k + pad).min(n - 1), n);
    Some([lo(i0), hi(i1), lo(j0), hi(j1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BumpPhantom, PhantomField};
    use crate::forward::doppler;
    use crate::geometry::Curve;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn setup() -> &'static Sinogram {
        static SINO: OnceLock<Sinogram> = OnceLock::new();
        SINO.get_or_init(|| {
            let ph = BumpPhantom::default();
            let curve = Curve::three_circles(3.5, 96);
            let layout = DirectionLayout::Chart { center: [0.0; 3], radius: 1.0, n: 48 };
            doppler(&PhantomField(&ph), &curve, layout, 0.02).unwrap()
        })
    }

    #[test]
    fn reproduces_nodes() {
        let sino = setup();
        let sp = SinogramSampler::new(sino).unwrap();
        let n = 48;
        for (sample, d) in [(5usize, 1000usize), (100, 1200), (250, 7)] {
            let smp = sino.samples[sample];
            let f = sino.frame(sample).unwrap();
            let j = sp.jet(smp.arc, smp.s, f.node(d / n, n), f.node(d % n, n));
            assert!((j.v - sino.row(sample)[d]).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn degree_zero_homogeneous(s in 0.0f64..6.28, u in -0.2f64..0.2, v in -0.2f64..0.2, scale in 0.1f64..10.0) {
            let sino = setup();
            let sp = SinogramSampler::new(sino).unwrap();
            let frame = sp.frame_at(0, s).unwrap();
            let xi = frame.direction(u, v);
            let a = sp.value(0, s, &xi).unwrap();
            let b = sp.value(0, s, &(xi * scale)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
