//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.
//!
//! The refinement ladder (three levels ending at the default configuration)
//! is computed once and shared by the solenoidal, full and decay criteria.

use std::io::Write;
use std::sync::OnceLock;

use restray::field::{relative_l2, BumpPhantom, GridSpec, PhantomSpec, ScalarGrid};
use restray::geometry::{check_kirillov_tuy, Aabb, Curve, SphereLayout};
use restray::harness::pipeline::{self, run_level, LevelRun};
use restray::harness::report::ConvergenceRow;
use restray::harness::verify::{adjoint_check, kernel_check, moment_identity_check, run_verify};
use restray::harness::PipelineConfig;
use restray::radon::{d_dp, invert, radon, RadonSpec};
use restray::Vec3;

const LEVELS: usize = 3;

/// Writes to the process stdout directly so the line shows up even when
/// the test harness captures output.
fn report(criterion: u32, pass: bool, detail: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    let _ = out.flush();
}

fn ladder() -> &'static Vec<(PipelineConfig, LevelRun)> {
    static LADDER: OnceLock<Vec<(PipelineConfig, LevelRun)>> = OnceLock::new();
    LADDER.get_or_init(|| {
        (0..LEVELS)
            .map(|level| {
                let cfg = PipelineConfig::default().refined(level, LEVELS);
                let run = run_level(&cfg).expect("pipeline run");
                (cfg, run)
            })
            .collect()
    })
}

fn rows(stage: &str, metric: &str) -> Vec<ConvergenceRow> {
    ladder()
        .iter()
        .enumerate()
        .map(|(level, (cfg, run))| {
            let rep = if stage == "sol" { &run.sol } else { &run.full };
            ConvergenceRow {
                level,
                grid_n: cfg.grid.n,
                spacing: cfg.grid_spec().min_spacing(),
                metric: metric.into(),
                rel_l2: rep.metric(metric).expect("metric present").rel_l2,
            }
        })
        .collect()
}

fn series(rows: &[ConvergenceRow]) -> String {
    rows.iter().map(|r| format!("{}³ {:.4}", r.grid_n, r.rel_l2)).collect::<Vec<_>>().join(", ")
}

#[test]
fn criterion_1_kernel() {
    let cfg = PipelineConfig::default();
    let curve = cfg.curve.build(cfg.samples_per_arc).unwrap();
    let data = kernel_check(&curve, 1000, cfg.seed);

    let mut pot = cfg.clone();
    pot.phantom = PhantomSpec::Bump { solenoidal_amplitude: 0.0, potential_amplitude: 1.0, profile: None };
    let ph = pot.phantom.build();
    let fwd = pipeline::forward(&pot, ph.as_ref()).unwrap();
    let sol = pipeline::recon_sol(&pot, &fwd.doppler).unwrap();
    let reference = pipeline::phantom_fields(&cfg, &BumpPhantom::solenoidal_only()).w.unwrap();
    let leak = sol.w.norm_l2() / reference.norm_l2();

    let pass = data <= 1e-6 && leak <= 0.05;
    report(1, pass, format!("max|D(dv)| / scale = {data:.2e} (<= 1e-6), |W(dv) recovered| / |W f^s| = {leak:.2e} (<= 5e-2)"));
    assert!(pass);
}

#[test]
fn criterion_2_moment_identity() {
    let cfg = PipelineConfig::default();
    let curve = cfg.curve.build(cfg.samples_per_arc).unwrap();
    let r = moment_identity_check(&curve, 1000, cfg.seed.wrapping_add(1));
    report(2, r <= 1e-6, format!("max|I(dv) + Xv| / scale over 1000 rays = {r:.2e} (<= 1e-6)"));
    assert!(r <= 1e-6);
}

#[test]
fn criterion_3_adjoint() {
    let cfg = PipelineConfig::default();
    let ph = cfg.phantom.build();
    let r = adjoint_check(&restray::field::PhantomField(ph.as_ref()), 10, cfg.seed.wrapping_add(2)).unwrap();
    report(3, r <= 5e-3, format!("worst adjoint gap over 10 φ = {r:.2e} (<= 5e-3)"));
    assert!(r <= 5e-3);
}

fn round_trip(n: usize, n_theta: usize, n_p: usize) -> f64 {
    let gs = GridSpec::cube(n, 2.0);
    let gauss = |x: &Vec3| (-x.norm_squared() / 0.3).exp();
    let g = ScalarGrid::from_fn(gs, gauss);
    let spec = RadonSpec { directions: SphereLayout::Hemisphere { n_theta, n_phi: 2 * n_theta }, n_p, p_max: 2.2 };
    let b = Aabb::cube(1.0);
    let back = invert(&d_dp(&radon(&g, &spec).unwrap(), 2).unwrap(), &gs, &b).unwrap().remove(0);
    let truth = ScalarGrid::from_fn(gs, |x| if b.contains(x) { gauss(x) } else { 0.0 });
    relative_l2(&[&back.values], &[&truth.values])
}

#[test]
fn criterion_4_radon_round_trip() {
    let base = round_trip(64, 48, 256);
    let fine = round_trip(80, 60, 320);
    let pass = base <= 0.02 && fine < base;
    report(4, pass, format!("Gaussian round trip 64³/48x96/256: {base:.3e} (<= 2e-2), next refinement 80³/60x120/320: {fine:.3e}"));
    assert!(pass);
}

#[test]
fn criterion_5_solenoidal_recovery() {
    let fs = rows("sol", "f^s");
    let default = &ladder().last().unwrap().1.sol;
    let cross = default.metric("f^s cross-path").unwrap().rel_l2;
    let last = fs.last().unwrap().rel_l2;
    let decreasing = restray::harness::report::strictly_decreasing(&fs, "f^s");
    let pass = last <= 0.15 && decreasing && cross <= 0.03;
    report(5, pass, format!("f^s rel L2 {} (default <= 0.15, strictly decreasing: {decreasing}), cross-path {cross:.4} (<= 0.03)", series(&fs)));
    assert!(pass);
}

#[test]
fn criterion_6_full_recovery() {
    let f = rows("full", "f");
    let default = &ladder().last().unwrap().1.full;
    let v = default.metric("v_B").unwrap().rel_l2;
    let last = f.last().unwrap().rel_l2;
    let decreasing = restray::harness::report::strictly_decreasing(&f, "f");
    let pass = last <= 0.20 && decreasing && v <= 0.15;
    report(6, pass, format!("f rel L2 {} (default <= 0.20, strictly decreasing: {decreasing}), v_B {v:.4} (<= 0.15)", series(&f)));
    assert!(pass);
}

#[test]
fn criterion_7_curve_conditions() {
    let b = Aabb::cube(1.0);
    let circles = check_kirillov_tuy(&Curve::three_circles(3.5, 128), &b, 500, 20, 11, 1e-3, 1e-6);
    let line = check_kirillov_tuy(&Curve::single_line(Vec3::new(1.0, 0.3, 0.2), 5.0, 128), &b, 500, 20, 12, 1e-3, 1e-6);
    let pass = circles.pass_fraction == 1.0 && line.pass_fraction <= 0.01;
    report(
        7,
        pass,
        format!(
            "three circles pass fraction {} ({} degenerate planes excluded), single line {}",
            circles.pass_fraction, circles.planes_degenerate, line.pass_fraction
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_decay() {
    // an exact solenoidal part of a compactly supported field decays like
    // |x|^-3 or faster; the measured rate comes from the reconstructed field
    let sol = &ladder().last().unwrap().1.sol;
    let slope = sol.counts.get("decay_slope").copied();
    let pass = slope.is_some_and(|s| (-2.5..=-1.5).contains(&s));
    report(8, pass, format!("log-log slope of |f^s| on the padding shell: {slope:?} (window [-2.5, -1.5])"));
    assert!(pass);
}

#[test]
fn criterion_9_determinism() {
    let cfg = PipelineConfig::default();
    let a = run_verify(&cfg).unwrap();
    let b = run_verify(&cfg).unwrap();
    let worst = a
        .checks
        .iter()
        .zip(&b.checks)
        .map(|(x, y)| {
            assert_eq!(x.name, y.name);
            if x.value == y.value { 0.0 } else { (x.value - y.value).abs() / x.value.abs().max(y.value.abs()) }
        })
        .fold(0.0f64, f64::max);
    let pass = worst <= 1e-12 && a.checks.len() == b.checks.len();
    report(9, pass, format!("two verify runs, worst relative difference per check {worst:.1e} (<= 1e-12)"));
    assert!(pass);
}
