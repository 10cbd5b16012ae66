//! Command implementations. Each writes its outputs into `out` and returns
//! them for inspection; files carry the config hash.

use std::path::{Path, PathBuf};

use log::info;

use super::config::PipelineConfig;
use super::pipeline::{self, ForwardData, SolOutput};
use super::report::{convergence_csv, ConvergenceRow, ReconstructionReport};
use super::verify::{run_verify, VerifyReport};
use crate::error::{Error, Result};
use crate::field::{read_field, write_field, AnyField, VectorGrid};
use crate::forward::{add_noise, doppler, moment1, Sinogram};
use crate::geometry::{check_kirillov_tuy, KtReport};
use crate::potential::FullReconstruction;

pub const F_FILE: &str = "f.vtf";
pub const DOPPLER_FILE: &str = "doppler.vts";
pub const MOMENT_FILE: &str = "moment.vts";
pub const FS_FILE: &str = "fs_rn.vtf";
pub const W_FILE: &str = "w.vtf";
pub const F_HAT_FILE: &str = "f_hat.vtf";

/// Process exit code for an error; verification failure uses 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnsupportedDimension(_) => 2,
        Error::MissingFile(_) => 3,
        Error::Io(_) | Error::Json(_) | Error::Container { .. } => 4,
        Error::NoConvergence { .. } => 5,
        Error::Geometry(_) | Error::CurveCondition(_) | Error::SingularFrame { .. } => 6,
        Error::OracleTooLarge(_) | Error::Shape(_) => 7,
    }
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Writes the sampled phantom: `f`, and `fs`, `v`, `w` when known.
pub fn cmd_phantom(cfg: &PipelineConfig, out: &Path) -> Result<Vec<PathBuf>> {
    prepare(out)?;
    let ph = cfg.phantom.build();
    let fields = pipeline::phantom_fields(cfg, ph.as_ref());
    let hash = cfg.hash();
    let mut written = vec![out.join(F_FILE)];
    write_field(&written[0], &AnyField::Vector(fields.f), &hash)?;
    if let Some(fs) = fields.fs {
        written.push(out.join("fs.vtf"));
        write_field(written.last().unwrap(), &AnyField::Vector(fs), &hash)?;
    }
    if let Some(v) = fields.v {
        written.push(out.join("v.vtf"));
        write_field(written.last().unwrap(), &AnyField::Scalar(v), &hash)?;
    }
    if let Some(w) = fields.w {
        written.push(out.join(W_FILE));
        write_field(written.last().unwrap(), &AnyField::Skew(w), &hash)?;
    }
    Ok(written)
}

/// Doppler and moment sinograms. With `input`, the sampled field file is
/// projected (tricubic interpolation); otherwise the analytic phantom.
pub fn cmd_forward(cfg: &PipelineConfig, input: Option<&Path>, out: &Path) -> Result<ForwardData> {
    prepare(out)?;
    let data = match input {
        None => pipeline::forward(cfg, cfg.phantom.build().as_ref())?,
        Some(path) => {
            let f = read_vector(path)?;
            let curve = pipeline::curve(cfg)?;
            let mut d = doppler(&f, &curve, cfg.doppler.layout(), cfg.doppler.step)?;
            let mut m = moment1(&f, &curve, cfg.moment.layout(), cfg.moment.step)?;
            add_noise(&mut d, cfg.noise, cfg.seed)?;
            add_noise(&mut m, cfg.noise, cfg.seed.wrapping_add(1))?;
            ForwardData { doppler: d, moment: m }
        }
    };
    let hash = cfg.hash();
    data.doppler.write(&out.join(DOPPLER_FILE), &hash)?;
    data.moment.write(&out.join(MOMENT_FILE), &hash)?;
    Ok(data)
}

fn read_vector(path: &Path) -> Result<VectorGrid> {
    match read_field(path)?.1 {
        AnyField::Vector(f) => Ok(f),
        _ => Err(Error::Config(format!("{} is not a vector field", path.display()))),
    }
}

fn read_sinogram(path: &Path) -> Result<Sinogram> {
    Ok(Sinogram::read(path)?.1)
}

/// Solenoidal reconstruction from `doppler`; writes `W`, `f^s` and the report.
pub fn cmd_recon_sol(cfg: &PipelineConfig, doppler: &Path, out: &Path) -> Result<(SolOutput, ReconstructionReport)> {
    prepare(out)?;
    let sino = read_sinogram(doppler)?;
    let sol = pipeline::recon_sol(cfg, &sino)?;
    let ph = cfg.phantom.build();
    let report = pipeline::sol_report(cfg, &sol, &pipeline::phantom_fields(cfg, ph.as_ref()));
    let hash = cfg.hash();
    write_field(&out.join(W_FILE), &AnyField::Skew(sol.w.clone()), &hash)?;
    write_field(&out.join(FS_FILE), &AnyField::Vector(sol.fs.clone()), &hash)?;
    report.write(out, "recon_sol")?;
    info!("\n{}", report.to_text());
    Ok((sol, report))
}

/// Full reconstruction from `f^s_{ℝⁿ}` and the moment data.
pub fn cmd_recon_full(cfg: &PipelineConfig, fs: &Path, moment: &Path, out: &Path) -> Result<(FullReconstruction, ReconstructionReport)> {
    prepare(out)?;
    let fs = read_vector(fs)?;
    let sino = read_sinogram(moment)?;
    let rec = pipeline::recon_full(cfg, &fs, &sino)?;
    let ph = cfg.phantom.build();
    let report = pipeline::full_report(cfg, &rec, &pipeline::phantom_fields(cfg, ph.as_ref()))?;
    let hash = cfg.hash();
    write_field(&out.join(F_HAT_FILE), &AnyField::Vector(rec.f.clone()), &hash)?;
    if cfg.dump_stages {
        let stages: [(&str, AnyField); 4] = [
            ("fs_b.vtf", AnyField::Vector(rec.fs_b.clone())),
            ("v_b.vtf", AnyField::Scalar(rec.v_b.clone())),
            ("u.vtf", AnyField::Scalar(rec.u.clone())),
            ("g.vtf", AnyField::Scalar(rec.boundary.g.clone())),
        ];
        for (name, field) in &stages {
            write_field(&out.join(name), field, &hash)?;
        }
        rec.potential_data.write(&out.join("potential.vts"), &hash)?;
    }
    report.write(out, "recon_full")?;
    info!("\n{}", report.to_text());
    Ok((rec, report))
}

pub fn cmd_check_kt(cfg: &PipelineConfig, out: &Path) -> Result<KtReport> {
    prepare(out)?;
    let curve = pipeline::curve(cfg)?;
    let t = &cfg.tolerances;
    let rep = check_kirillov_tuy(&curve, &cfg.domain(), 500, 20, cfg.seed, t.eps_t, t.eps_rank);
    write_json(&out.join("kt.json"), &rep)?;
    Ok(rep)
}

pub fn cmd_verify(cfg: &PipelineConfig, out: &Path) -> Result<VerifyReport> {
    prepare(out)?;
    let rep = run_verify(cfg)?;
    write_json(&out.join("verify.json"), &rep)?;
    std::fs::write(out.join("verify.txt"), rep.to_text())?;
    Ok(rep)
}

/// Collects the reports found in `out` into `summary.txt`; with
/// `levels > 0` also runs the refinement ladder into `convergence.csv`.
pub fn cmd_report(cfg: &PipelineConfig, out: &Path, levels: usize) -> Result<(String, Vec<ConvergenceRow>)> {
    prepare(out)?;
    let mut summary = String::new();
    for stem in ["recon_sol", "recon_full"] {
        let path = out.join(format!("{stem}.json"));
        if path.exists() {
            summary += &ReconstructionReport::read(&path)?.to_text();
            summary.push('\n');
        }
    }
    let verify = out.join("verify.json");
    if verify.exists() {
        let rep: VerifyReport = serde_json::from_str(&std::fs::read_to_string(&verify)?)?;
        summary += &rep.to_text();
    }
    let rows = if levels > 0 { pipeline::convergence_study(cfg, levels)? } else { Vec::new() };
    if !rows.is_empty() {
        std::fs::write(out.join("convergence.csv"), convergence_csv(&rows))?;
        summary += "\nconvergence (rel L2 per level)\n";
        summary += &convergence_csv(&rows);
    }
    std::fs::write(out.join("summary.txt"), &summary)?;
    Ok((summary, rows))
}

