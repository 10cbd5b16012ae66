use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chart::ChartFrame;
use crate::geometry::{Curve, CurveSpec, SphereGrid, SphereLayout};
use crate::{container, Error, Result, Vec3};

pub const SINOGRAM_MAGIC: &[u8; 8] = b"VTS1\0\0\0\0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinogramKind {
    Doppler,
    Moment1,
    ScalarXray,
}

/// How ray directions are laid out at each curve sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionLayout {
    /// The same sphere quadrature at every sample.
    Sphere { layout: SphereLayout },
    /// An `n×n` gnomonic chart per sample aimed at the ball
    /// `B(center, radius)`, which must contain the support of the field.
    Chart { center: [f64; 3], radius: f64, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub arc: usize,
    pub s: f64,
    pub pos: Vec3,
    pub tangent: Vec3,
}

/// Ray data indexed by (curve sample, direction), samples grouped by arc.
#[derive(Clone, Debug)]
pub struct Sinogram {
    pub kind: SinogramKind,
    pub curve: Curve,
    pub layout: DirectionLayout,
    pub samples: Vec<CurveSample>,
    pub arc_offsets: Vec<usize>,
    pub n_dirs: usize,
    /// Row-major `(sample, direction)`.
    pub values: Vec<f64>,
    sphere: Option<SphereGrid>,
    frames: Vec<ChartFrame>,
}

impl Sinogram {
    /// Allocates a zero sinogram; fails if a chart cannot be built because
    /// a curve point lies inside the chart ball.
    pub fn zeros(kind: SinogramKind, curve: &Curve, layout: DirectionLayout) -> Result<Self> {
        let mut samples = Vec::new();
        let mut arc_offsets = Vec::new();
        for (arc, a) in curve.arcs.iter().enumerate() {
            arc_offsets.push(samples.len());
            for s in curve.sample_params(arc) {
                samples.push(CurveSample { arc, s, pos: a.eval(s), tangent: a.deriv(s) });
            }
        }
        let (sphere, frames, n_dirs) = match layout {
            DirectionLayout::Sphere { layout } => {
                let g = SphereGrid::from_layout(layout);
                let n = g.len();
                (Some(g), Vec::new(), n)
            }
            DirectionLayout::Chart { center, radius, n } => {
                if n < 8 {
                    return Err(Error::Config("chart needs at least 8 nodes per axis".into()));
                }
                let c = Vec3::from(center);
                let frames =
                    samples.iter().map(|p| ChartFrame::new(p.pos, &p.tangent, &c, radius)).collect::<Result<Vec<_>>>()?;
                (None, frames, n * n)
            }
        };
        Ok(Self {
            kind,
            curve: curve.clone(),
            layout,
            values: vec![0.0; samples.len() * n_dirs],
            samples,
            arc_offsets,
            n_dirs,
            sphere,
            frames,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn chart_size(&self) -> Option<usize> {
        match self.layout {
            DirectionLayout::Chart { n, .. } => Some(n),
            DirectionLayout::Sphere { .. } => None,
        }
    }

    pub fn frame(&self, sample: usize) -> Option<&ChartFrame> {
        self.frames.get(sample)
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.n_dirs..(sample + 1) * self.n_dirs]
    }

    /// Unit direction `d` at `sample`.
    pub fn direction(&self, sample: usize, d: usize) -> Vec3 {
        match (&self.sphere, self.layout) {
            (Some(g), _) => g.nodes[d],
            (None, DirectionLayout::Chart { n, .. }) => {
                let f = &self.frames[sample];
                f.direction(f.node(d / n, n), f.node(d % n, n))
            }
            _ => unreachable!(),
        }
    }

    /// Solid-angle quadrature weight of direction `d` at `sample`.
    pub fn direction_weight(&self, sample: usize, d: usize) -> f64 {
        match (&self.sphere, self.layout) {
            (Some(g), _) => g.weights[d],
            (None, DirectionLayout::Chart { n, .. }) => {
                let f = &self.frames[sample];
                let (i, j) = (d / n, d % n);
                let edge = |k: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
                let h = f.node_step(n);
                edge(i) * edge(j) * h * h * ChartFrame::area_density(f.node(i, n), f.node(j, n))
            }
            _ => unreachable!(),
        }
    }

    /// Parameter-measure weight `ds` of a sample (trapezoid on open arcs).
    pub fn sample_weight(&self, sample: usize) -> f64 {
        let arc = self.samples[sample].arc;
        let h = self.curve.sample_step(arc);
        if self.curve.arcs[arc].is_closed() {
            return h;
        }
        let first = self.arc_offsets[arc];
        let last = first + self.curve.samples_per_arc - 1;
        if sample == first || sample == last { 0.5 * h } else { h }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `⟨self, other⟩` in the `ds·dξ` measure.
    pub fn inner(&self, other: &Sinogram) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.n_samples() {
            let ws = self.sample_weight(s);
            let (a, b) = (self.row(s), other.row(s));
            for d in 0..self.n_dirs {
                acc += ws * self.direction_weight(s, d) * a[d] * b[d];
            }
        }
        acc
    }

    pub fn write(&self, path: &Path, config_hash: &str) -> Result<()> {
        let header = SinogramHeader {
            kind: self.kind,
            curve: self.curve.spec.clone(),
            samples_per_arc: self.curve.samples_per_arc,
            directions: self.layout,
            n_samples: self.n_samples(),
            n_dirs: self.n_dirs,
            dtype: "f64-le".into(),
            config_hash: config_hash.into(),
        };
        container::write(path, SINOGRAM_MAGIC, &header, &self.values)
    }

    pub fn read(path: &Path) -> Result<(SinogramHeader, Self)> {
        let (h, values): (SinogramHeader, Vec<f64>) = container::read(path, SINOGRAM_MAGIC)?;
        let curve = h.curve.build(h.samples_per_arc)?;
        let mut sino = Self::zeros(h.kind, &curve, h.directions)?;
        if values.len() != sino.values.len() || sino.n_dirs != h.n_dirs {
            return Err(Error::Container { path: Some(path.to_path_buf()), reason: "payload size mismatch".into() });
        }
        sino.values = values;
        Ok((h, sino))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinogramHeader {
    pub kind: SinogramKind,
    pub curve: CurveSpec,
    pub samples_per_arc: usize,
    pub directions: DirectionLayout,
    pub n_samples: usize,
    pub n_dirs: usize,
    pub dtype: String,
    #[serde(default)]
    pub config_hash: String,
}
