use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::plane::Aabb;
use crate::{Error, Result, Vec3};

/// Samples per arc used to bracket roots on arcs without closed-form roots.
pub const ROOT_SCAN_SAMPLES: usize = 64;

/// One parametrized piece of a curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Arc {
    /// `c + r (cos s · u + sin s · v)`, `s ∈ [0, 2π)`.
    Circle { center: Vec3, radius: f64, u: Vec3, v: Vec3 },
    /// `origin + s · dir`, `s ∈ [a, b]`.
    Segment { origin: Vec3, dir: Vec3, a: f64, b: f64 },
    /// Catmull-Rom spline through knots, `s ∈ [0, n)` closed or `[0, n−1]` open.
    Tabulated { knots: Vec<Vec3>, closed: bool },
}

impl Arc {
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Arc::Circle { .. } => (0.0, TAU),
            Arc::Segment { a, b, .. } => (*a, *b),
            Arc::Tabulated { knots, closed } => {
                let n = knots.len() as f64;
                (0.0, if *closed { n } else { n - 1.0 })
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Arc::Circle { .. } => true,
            Arc::Segment { .. } => false,
            Arc::Tabulated { closed, .. } => *closed,
        }
    }

    pub fn eval(&self, s: f64) -> Vec3 {
        match self {
            Arc::Circle { center, radius, u, v } => center + (u * s.cos() + v * s.sin()) * *radius,
            Arc::Segment { origin, dir, .. } => origin + dir * s,
            Arc::Tabulated { .. } => self.tabulated(s).0,
        }
    }

    pub fn deriv(&self, s: f64) -> Vec3 {
        match self {
            Arc::Circle { radius, u, v, .. } => (v * s.cos() - u * s.sin()) * *radius,
            Arc::Segment { dir, .. } => *dir,
            Arc::Tabulated { .. } => self.tabulated(s).1,
        }
    }

    fn tabulated(&self, s: f64) -> (Vec3, Vec3) {
        let Arc::Tabulated { knots, closed } = self else { unreachable!() };
        let n = knots.len() as isize;
        let (lo, hi) = self.interval();
        let s = if *closed { s.rem_euclid(hi) } else { s.clamp(lo, hi) };
        let i = (s.floor() as isize).min(if *closed { n - 1 } else { n - 2 });
        let t = s - i as f64;
        let at = |k: isize| {
            if *closed {
                knots[k.rem_euclid(n) as usize]
            } else if k < 0 {
                knots[0] * 2.0 - knots[1]
            } else if k >= n {
                knots[(n - 1) as usize] * 2.0 - knots[(n - 2) as usize]
            } else {
                knots[k as usize]
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let t2 = t * t;
        let t3 = t2 * t;
        let pos = (p1 * 2.0
            + (p2 - p0) * t
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
            * 0.5;
        let vel = ((p2 - p0) + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * (2.0 * t)
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * (3.0 * t2))
            * 0.5;
        (pos, vel)
    }

    /// Parameters where `⟨ω, γ(s)⟩ = p`, ascending. Circles and segments are
    /// solved in closed form; a circle lying in the plane contributes no root.
    pub fn roots(&self, omega: &Vec3, p: f64) -> Vec<f64> {
        match self {
            Arc::Circle { center, radius, u, v } => {
                let a = radius * omega.dot(u);
                let b = radius * omega.dot(v);
                let q = p - omega.dot(center);
                let rho = a.hypot(b);
                if rho <= 1e-14 * radius.max(1.0) || q.abs() > rho {
                    return Vec::new();
                }
                let phi = b.atan2(a);
                let delta = (q / rho).clamp(-1.0, 1.0).acos();
                let mut out: Vec<f64> = [phi - delta, phi + delta]
                    .iter()
                    .map(|s| s.rem_euclid(TAU))
                    .collect();
                out.sort_by(f64::total_cmp);
                if delta == 0.0 {
                    out.truncate(1);
                }
                out
            }
            Arc::Segment { origin, dir, a, b } => {
                let slope = omega.dot(dir);
                if slope.abs() <= 1e-300 {
                    return Vec::new();
                }
                let s = (p - omega.dot(origin)) / slope;
                if s >= *a && s <= *b {
                    vec![s]
                } else {
                    Vec::new()
                }
            }
            Arc::Tabulated { .. } => self.bracketed_roots(omega, p),
        }
    }

    fn bracketed_roots(&self, omega: &Vec3, p: f64) -> Vec<f64> {
        let (lo, hi) = self.interval();
        let g = |s: f64| omega.dot(&self.eval(s)) - p;
        let n = ROOT_SCAN_SAMPLES;
        let span = hi - lo;
        let node = |j: usize| lo + span * j as f64 / n as f64;
        let mut out = Vec::new();
        for j in 0..n {
            let (mut a, mut b) = (node(j), node(j + 1));
            let (mut ga, gb) = (g(a), g(b));
            if ga == 0.0 {
                out.push(a);
                continue;
            }
            if ga * gb >= 0.0 {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if gm == 0.0 || (b - a) < 1e-15 * span.max(1.0) {
                    a = m;
                    b = m;
                    break;
                }
                if ga * gm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            out.push(0.5 * (a + b));
        }
        if !self.is_closed() && g(hi) == 0.0 {
            out.push(hi);
        }
        out
    }
}

/// A point on the curve together with its transversality to a plane.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub arc: usize,
    pub s: f64,
    pub pos: Vec3,
    pub tangent: Vec3,
    /// `|⟨ω, γ′(s)⟩| / |γ′(s)|`.
    pub transversality: f64,
}

/// Curve description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    ThreeCircles { radius: f64 },
    LineUnion { directions: Vec<[f64; 3]>, half_length: f64 },
    Tabulated { arcs: Vec<Vec<[f64; 3]>>, closed: bool },
}

impl CurveSpec {
    pub fn build(&self, samples_per_arc: usize) -> Result<Curve> {
        let arcs = match self {
            CurveSpec::ThreeCircles { radius } => Curve::three_circles(*radius, samples_per_arc).arcs,
            CurveSpec::LineUnion { directions, half_length } => directions
                .iter()
                .map(|d| {
                    let dir = Vec3::from(*d);
                    if dir.norm() == 0.0 {
                        return Err(Error::Config("zero line direction".into()));
                    }
                    Ok(Arc::Segment {
                        origin: Vec3::zeros(),
                        dir: dir.normalize(),
                        a: -half_length,
                        b: *half_length,
                    })
                })
                .collect::<Result<_>>()?,
            CurveSpec::Tabulated { arcs, closed } => arcs
                .iter()
                .map(|knots| {
                    if knots.len() < 4 {
                        return Err(Error::Config("tabulated arcs need at least 4 knots".into()));
                    }
                    Ok(Arc::Tabulated { knots: knots.iter().map(|k| Vec3::from(*k)).collect(), closed: *closed })
                })
                .collect::<Result<_>>()?,
        };
        let curve = Curve { arcs, samples_per_arc, spec: self.clone() };
        curve.validate()?;
        Ok(curve)
    }
}

/// A union of parametrized arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub arcs: Vec<Arc>,
    /// Sinogram samples per arc.
    pub samples_per_arc: usize,
    /// Description the curve was built from.
    pub spec: CurveSpec,
}

impl Curve {
    /// Three great circles of radius `radius` in the coordinate planes
    /// (xy, xz, yz), without any domain check.
    pub fn three_circles(radius: f64, samples_per_arc: usize) -> Self {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        let arcs = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| Arc::Circle { center: Vec3::zeros(), radius, u: e[i], v: e[j] })
            .collect();
        Self { arcs, samples_per_arc, spec: CurveSpec::ThreeCircles { radius } }
    }

    pub fn single_line(dir: Vec3, half_length: f64, samples_per_arc: usize) -> Self {
        Self {
            arcs: vec![Arc::Segment { origin: Vec3::zeros(), dir: dir.normalize(), a: -half_length, b: half_length }],
            samples_per_arc,
            spec: CurveSpec::LineUnion { directions: vec![dir.normalize().into()], half_length },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples_per_arc < 8 {
            return Err(Error::Config("samples_per_arc must be at least 8".into()));
        }
        for arc in &self.arcs {
            let (a, b) = arc.interval();
            for j in 0..=16 {
                let s = a + (b - a) * j as f64 / 16.0;
                if arc.deriv(s).norm() <= 0.0 {
                    return Err(Error::Config("curve has a vanishing tangent".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, arc: usize, s: f64) -> Vec3 {
        self.arcs[arc].eval(s)
    }

    pub fn point(&self, arc: usize, s: f64, omega: &Vec3) -> CurvePoint {
        let pos = self.arcs[arc].eval(s);
        let tangent = self.arcs[arc].deriv(s);
        let transversality = omega.dot(&tangent).abs() / tangent.norm();
        CurvePoint { arc, s, pos, tangent, transversality }
    }

    /// Uniform sample parameters of one arc (periodic arcs exclude the end).
    pub fn sample_params(&self, arc: usize) -> Vec<f64> {
        let (a, b) = self.arcs[arc].interval();
        let n = self.samples_per_arc;
        if self.arcs[arc].is_closed() {
            (0..n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
        } else {
            (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
        }
    }

    pub fn sample_step(&self, arc: usize) -> f64 {
        let (a, b) = self.arcs[arc].interval();
        let n = self.samples_per_arc as f64;
        if self.arcs[arc].is_closed() { (b - a) / n } else { (b - a) / (n - 1.0) }
    }
}

/// The three-great-circles curve of radius `radius`, checked against the
/// guarantee `R > √3 · r_B` for the box `domain`.
pub fn make_three_circles(radius: f64, domain: &Aabb, samples_per_arc: usize) -> Result<Curve> {
    let limit = 3f64.sqrt() * domain.circumradius();
    if !(radius > limit) {
        return Err(Error::CurveCondition(format!("R = {radius} must exceed √3·r_B = {limit:.6}")));
    }
    let curve = Curve::three_circles(radius, samples_per_arc);
    curve.validate()?;
    Ok(curve)
}
