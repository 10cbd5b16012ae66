//! Stage functions shared by the commands, the examples and the tests.

use std::collections::BTreeMap;
use std::time::Instant;

use log::info;

use super::config::PipelineConfig;
use super::report::{Metric, ReconstructionReport};
use crate::decompose::{bounded_decompose, helmholtz_oracle, solenoidal_from_w};
use crate::error::Result;
use crate::field::{saint_venant, GridSpec, Phantom, PhantomField, ScalarGrid, SkewGrid, VectorGrid};
use crate::forward::{add_noise, doppler, moment1, Sinogram, SinogramSampler};
use crate::geometry::{Aabb, Curve};
use crate::potential::{assemble_full, FullReconstruction};
use crate::sv_recover::{recover_w, AssemblyStats};

/// The configured phantom sampled on the configured grid.
pub struct PhantomFields {
    pub f: VectorGrid,
    /// Whole-space solenoidal part, when known in closed form.
    pub fs: Option<VectorGrid>,
    /// Whole-space potential, when known in closed form.
    pub v: Option<ScalarGrid>,
    /// Saint-Venant tensor, when known in closed form.
    pub w: Option<SkewGrid>,
}

pub fn phantom_fields(cfg: &PipelineConfig, ph: &dyn Phantom) -> PhantomFields {
    let spec = cfg.grid_spec();
    let probe = spec.position(0, 0, 0);
    let f = VectorGrid::from_fn(spec, |x| ph.f(x));
    let fs = ph.fs(&probe).map(|_| VectorGrid::from_fn(spec, |x| ph.fs(x).unwrap_or_default()));
    let v = ph.v(&probe).map(|_| ScalarGrid::from_fn(spec, |x| ph.v(x).unwrap_or(0.0)));
    let w = ph.w(&probe).map(|_| {
        let mut w = SkewGrid::zeros(spec);
        for idx in 0..spec.len() {
            let val = ph.w(&spec.position_of(idx)).unwrap_or_default();
            for c in 0..3 {
                w.comps[c][idx] = val[c];
            }
        }
        w
    });
    PhantomFields { f, fs, v, w }
}

pub fn curve(cfg: &PipelineConfig) -> Result<Curve> {
    cfg.curve.build(cfg.samples_per_arc)
}

/// Restricted Doppler and first-moment data of the analytic phantom, with
/// the configured noise.
pub struct ForwardData {
    pub doppler: Sinogram,
    pub moment: Sinogram,
}

pub fn forward(cfg: &PipelineConfig, ph: &dyn Phantom) -> Result<ForwardData> {
    let curve = curve(cfg)?;
    let field = PhantomField(ph);
    let t = Instant::now();
    let mut d = doppler(&field, &curve, cfg.doppler.layout(), cfg.doppler.step)?;
    let mut m = moment1(&field, &curve, cfg.moment.layout(), cfg.moment.step)?;
    add_noise(&mut d, cfg.noise, cfg.seed)?;
    add_noise(&mut m, cfg.noise, cfg.seed.wrapping_add(1))?;
    info!("forward projection: {:.1}s", t.elapsed().as_secs_f64());
    Ok(ForwardData { doppler: d, moment: m })
}

/// Output of the solenoidal reconstruction.
pub struct SolOutput {
    pub w: SkewGrid,
    /// `f^s_{ℝⁿ}` on the grid padded by `exterior.pad_nodes`.
    pub fs: VectorGrid,
    pub stats: AssemblyStats,
    pub runtimes: BTreeMap<String, f64>,
}

pub fn recon_sol(cfg: &PipelineConfig, doppler: &Sinogram) -> Result<SolOutput> {
    let mut runtimes = BTreeMap::new();
    let t = Instant::now();
    let sampler = SinogramSampler::new(doppler)?;
    let (w, stats) = recover_w(&sampler, &cfg.radon_spec(), &cfg.grid_spec(), &cfg.domain(), &cfg.sv_options())?;
    runtimes.insert("recover_w".to_string(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    let fs = solenoidal_from_w(&w, cfg.exterior.pad_nodes);
    runtimes.insert("solenoidal_from_w".to_string(), t.elapsed().as_secs_f64());
    Ok(SolOutput { w, fs, stats, runtimes })
}

pub fn recon_full(cfg: &PipelineConfig, fs: &VectorGrid, moment: &Sinogram) -> Result<FullReconstruction> {
    assemble_full(fs, &cfg.grid_spec(), &cfg.domain(), moment, &cfg.radon_spec(), &cfg.full_options())
}

fn comps(f: &VectorGrid) -> [&[f64]; 3] {
    f.comps.each_ref().map(|c| c.as_slice())
}

/// Log-log slope of the shell-averaged `|f^s|` over the padding shell
/// (nodes of `fs` outside the box of `inner`), with the radii used.
pub fn decay_slope(fs: &VectorGrid, inner: &GridSpec) -> Option<f64> {
    let ib = inner.bounds();
    let ob = fs.spec.bounds();
    let r0 = (0..3).map(|a| ib.max[a].abs().max(ib.min[a].abs())).fold(0.0, f64::max);
    let r1 = (0..3).map(|a| ob.max[a].abs().min(ob.min[a].abs())).fold(f64::MAX, f64::min);
    if r1 <= r0 * 1.05 {
        return None;
    }
    let bins = 8;
    let mut sum = vec![0.0; bins];
    let mut cnt = vec![0usize; bins];
    for idx in 0..fs.spec.len() {
        let x = fs.spec.position_of(idx);
        let r = x.norm();
        if ib.contains(&x) || r < r0 || r >= r1 {
            continue;
        }
        let b = (((r - r0) / (r1 - r0)) * bins as f64) as usize;
        sum[b.min(bins - 1)] += fs.at(idx).norm();
        cnt[b.min(bins - 1)] += 1;
    }
    let pts: Vec<(f64, f64)> = (0..bins)
        .filter(|&b| cnt[b] > 0 && sum[b] > 0.0)
        .map(|b| {
            let r = r0 + (b as f64 + 0.5) * (r1 - r0) / bins as f64;
            (r.ln(), (sum[b] / cnt[b] as f64).ln())
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx)));
    let slope = num / den;
    slope.is_finite().then_some(slope)
}

/// Errors of the solenoidal stage against the phantom and the oracles.
pub fn sol_report(cfg: &PipelineConfig, out: &SolOutput, truth: &PhantomFields) -> ReconstructionReport {
    let mut rep = ReconstructionReport::new("recon-sol", &cfg.hash());
    let target = cfg.grid_spec();
    let fs_rec = out.fs.restrict(&target);
    if let Some(w) = &truth.w {
        rep.metrics.push(Metric::compare(
            "W",
            "analytic Saint-Venant tensor of the phantom",
            &out.w.comps.each_ref().map(|c| c.as_slice()),
            &w.comps.each_ref().map(|c| c.as_slice()),
        ));
    }
    let (oracle_fs, _) = helmholtz_oracle(&truth.f);
    match &truth.fs {
        Some(fs) => rep.metrics.push(Metric::compare("f^s", "analytic solenoidal part of the phantom", &comps(&fs_rec), &comps(fs))),
        None => rep.metrics.push(Metric::compare("f^s", "spectral Helmholtz split of the sampled phantom", &comps(&fs_rec), &comps(&oracle_fs))),
    }
    let cross = solenoidal_from_w(&saint_venant(&truth.f), 0);
    rep.metrics.push(Metric::compare("f^s cross-path", "spectral Helmholtz split of the sampled phantom", &comps(&cross), &comps(&oracle_fs)));
    rep.counts.insert("planes".into(), out.stats.planes as f64);
    rep.counts.insert("planes_assembled".into(), out.stats.planes_assembled as f64);
    rep.counts.insert("planes_skipped".into(), out.stats.planes_skipped as f64);
    rep.counts.insert("planes_empty".into(), out.stats.planes_empty as f64);
    match decay_slope(&out.fs, &target) {
        Some(s) => {
            rep.counts.insert("decay_slope".into(), s);
        }
        None => {
            rep.counts.insert("decay_slope_undefined".into(), 1.0);
        }
    }
    rep.runtimes = out.runtimes.clone();
    rep
}

/// Values on the grid nodes of `∂B` (others zero).
fn boundary_only(g: &ScalarGrid, b: &Aabb) -> ScalarGrid {
    let region = g.spec.sub_box(b);
    let mut out = ScalarGrid::zeros(g.spec);
    for idx in 0..g.spec.len() {
        let p = g.spec.unindex(idx);
        let inside = (0..3).all(|a| p[a] >= region[a].0 && p[a] <= region[a].1);
        let face = (0..3).any(|a| p[a] == region[a].0 || p[a] == region[a].1);
        if inside && face {
            out.values[idx] = g.values[idx];
        }
    }
    out
}

fn inside_only(g: &ScalarGrid, b: &Aabb) -> ScalarGrid {
    let mut out = g.clone();
    for idx in 0..g.spec.len() {
        if !b.contains(&g.spec.position_of(idx)) {
            out.values[idx] = 0.0;
        }
    }
    out
}

/// Errors of the full reconstruction against the phantom and the oracles.
pub fn full_report(cfg: &PipelineConfig, rec: &FullReconstruction, truth: &PhantomFields) -> Result<ReconstructionReport> {
    let mut rep = ReconstructionReport::new("recon-full", &cfg.hash());
    let b = cfg.domain();
    let mut f_b = truth.f.clone();
    f_b.mask_outside(&b);
    rep.metrics.push(Metric::compare("f", "sampled phantom", &comps(&rec.f), &comps(&f_b)));
    let split = bounded_decompose(&truth.f, &b, &cfg.solver_options(), None)?;
    rep.metrics.push(Metric::compare("v_B", "bounded decomposition of the sampled phantom", &[&rec.v_b.values], &[&split.v.values]));
    rep.metrics.push(Metric::compare("f^s_B", "bounded decomposition of the sampled phantom", &comps(&rec.fs_b), &comps(&split.fs)));
    let (_, v_r) = helmholtz_oracle(&truth.f);
    let g_oracle = boundary_only(&ScalarGrid { spec: v_r.spec, values: v_r.values.iter().map(|v| -v).collect() }, &b);
    // g and u are small for phantoms whose potential nearly vanishes on ∂B;
    // both are measured relative to the size of v_B
    let v_scale: [&[f64]; 1] = [&split.v.values];
    rep.metrics.push(Metric::compare_scaled(
        "g",
        "spectral Helmholtz potential on the boundary, relative to |v_B|",
        &[&rec.boundary.g.values],
        &[&g_oracle.values],
        &v_scale,
    ));
    let u_oracle = inside_only(
        &ScalarGrid { spec: v_r.spec, values: split.v.values.iter().zip(&v_r.values).map(|(a, b)| a - b).collect() },
        &b,
    );
    rep.metrics.push(Metric::compare_scaled(
        "u",
        "bounded minus spectral whole-space potential, relative to |v_B|",
        &[&inside_only(&rec.u, &b).values],
        &[&u_oracle.values],
        &v_scale,
    ));
    rep.counts.insert("boundary_nodes".into(), rec.boundary.nodes as f64);
    rep.counts.insert("boundary_normal_spread".into(), rec.boundary.normal_spread);
    rep.counts.insert("tail_beyond_truncation".into(), rec.boundary.max_tail_beyond_truncation);
    rep.counts.insert("laplace_iterations".into(), rec.laplace.iterations as f64);
    rep.counts.insert("laplace_residual".into(), rec.laplace.residual);
    rep.counts.insert("scalar_planes_assembled".into(), rec.scalar.planes_assembled as f64);
    rep.counts.insert("scalar_planes_skipped".into(), rec.scalar.planes_skipped as f64);
    rep.counts.insert("bounded_oracle_iterations".into(), split.stats.iterations as f64);
    Ok(rep)
}

/// Reports of one complete run: forward data, solenoidal and full
/// reconstruction.
pub struct LevelRun {
    pub sol: ReconstructionReport,
    pub full: ReconstructionReport,
}

pub fn run_level(cfg: &PipelineConfig) -> Result<LevelRun> {
    let ph = cfg.phantom.build();
    let truth = phantom_fields(cfg, ph.as_ref());
    let t = Instant::now();
    let data = forward(cfg, ph.as_ref())?;
    let forward_secs = t.elapsed().as_secs_f64();
    let sol = recon_sol(cfg, &data.doppler)?;
    let mut sol_rep = sol_report(cfg, &sol, &truth);
    sol_rep.runtimes.insert("forward".into(), forward_secs);
    let t = Instant::now();
    let full = recon_full(cfg, &sol.fs, &data.moment)?;
    let mut full_rep = full_report(cfg, &full, &truth)?;
    full_rep.runtimes.insert("assemble_full".into(), t.elapsed().as_secs_f64());
    Ok(LevelRun { sol: sol_rep, full: full_rep })
}

/// Runs the refinement ladder `cfg.refined(0..levels)` and returns one row
/// per level and metric (`sol:<name>` / `full:<name>`).
pub fn convergence_study(cfg: &PipelineConfig, levels: usize) -> Result<Vec<super::report::ConvergenceRow>> {
    let mut rows = Vec::new();
    for level in 0..levels {
        let c = cfg.refined(level, levels);
        info!("convergence level {level}: grid {}", c.grid.n);
        let run = run_level(&c)?;
        let spec = c.grid_spec();
        for (prefix, rep) in [("sol", &run.sol), ("full", &run.full)] {
            for m in &rep.metrics {
                rows.push(super::report::ConvergenceRow {
                    level,
                    grid_n: c.grid.n,
                    spacing: spec.min_spacing(),
                    metric: format!("{prefix}:{}", m.name),
                    rel_l2: m.rel_l2,
                });
            }
        }
    }
    Ok(rows)
}
