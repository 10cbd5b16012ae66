//! Reconstruction reports: JSON for machines, aligned text for people,
//! CSV columns for convergence plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One error measurement against a named reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    /// What the quantity is compared against.
    pub oracle: String,
    /// `‖x − ref‖₂ / ‖ref‖₂`.
    pub rel_l2: f64,
    /// `‖x − ref‖∞ / ‖ref‖∞`.
    pub rel_linf: f64,
    /// `‖ref‖₂` (or of the scale field), so that small references can be read.
    pub ref_l2: f64,
}

impl Metric {
    /// Compares matching arrays (several components allowed). Errors are
    /// absolute when the reference vanishes identically.
    pub fn compare(name: &str, oracle: &str, got: &[&[f64]], reference: &[&[f64]]) -> Self {
        Self::compare_scaled(name, oracle, got, reference, reference)
    }

    /// As [`Metric::compare`], with the norms in the denominators taken from
    /// `scale` (for references that are close to zero by construction).
    pub fn compare_scaled(name: &str, oracle: &str, got: &[&[f64]], reference: &[&[f64]], scale: &[&[f64]]) -> Self {
        let (mut num, mut dmax) = (0.0, 0.0f64);
        for (a, b) in got.iter().zip(reference) {
            for (x, y) in a.iter().zip(b.iter()) {
                num += (x - y) * (x - y);
                dmax = dmax.max((x - y).abs());
            }
        }
        let (mut den, mut rmax) = (0.0, 0.0f64);
        for v in scale.iter().flat_map(|c| c.iter()) {
            den += v * v;
            rmax = rmax.max(v.abs());
        }
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { a };
        Self {
            name: name.into(),
            oracle: oracle.into(),
            rel_l2: ratio(num.sqrt(), den.sqrt()),
            rel_linf: ratio(dmax, rmax),
            ref_l2: den.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub crate_version: String,
    pub threads: usize,
}

impl Provenance {
    pub fn new(config_hash: &str) -> Self {
        Self {
            config_hash: config_hash.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub stage: String,
    pub provenance: Provenance,
    pub metrics: Vec<Metric>,
    /// Plane counts, solver iterations and other scalar diagnostics.
    pub counts: BTreeMap<String, f64>,
    /// Wall-clock seconds per stage.
    pub runtimes: BTreeMap<String, f64>,
}

impl ReconstructionReport {
    pub fn new(stage: &str, config_hash: &str) -> Self {
        Self {
            stage: stage.into(),
            provenance: Provenance::new(config_hash),
            metrics: Vec::new(),
            counts: BTreeMap::new(),
            runtimes: BTreeMap::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "stage {}  (config {}, v{}, {} threads)", self.stage, &self.provenance.config_hash[..12.min(self.provenance.config_hash.len())], self.provenance.crate_version, self.provenance.threads);
        let w = self.metrics.iter().map(|m| m.name.len()).max().unwrap_or(4).max(6);
        let wo = self.metrics.iter().map(|m| m.oracle.len()).max().unwrap_or(6).max(6);
        let _ = writeln!(out, "{:<w$}  {:>10}  {:>10}  {:>10}  {:<wo$}", "metric", "rel L2", "rel Linf", "ref L2", "oracle");
        for m in &self.metrics {
            let _ = writeln!(out, "{:<w$}  {:>10.3e}  {:>10.3e}  {:>10.3e}  {:<wo$}", m.name, m.rel_l2, m.rel_linf, m.ref_l2, m.oracle);
        }
        for (k, v) in &self.counts {
            let _ = writeln!(out, "{k:<w$}  {v:>10}");
        }
        for (k, v) in &self.runtimes {
            let _ = writeln!(out, "{:<w$}  {v:>9.2}s", format!("time {k}"));
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.txt` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(self)?)?;
        std::fs::write(dir.join(format!("{stem}.txt")), self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub grid_n: usize,
    pub spacing: f64,
    pub metric: String,
    pub rel_l2: f64,
}

/// CSV with columns `level,grid_n,spacing,metric,rel_l2`.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("level,grid_n,spacing,metric,rel_l2\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{:e}", r.level, r.grid_n, r.spacing, r.metric, r.rel_l2);
    }
    out
}

/// Whether `metric` decreases strictly from each level to the next.
pub fn strictly_decreasing(rows: &[ConvergenceRow], metric: &str) -> bool {
    let mut vals: Vec<(usize, f64)> = rows.iter().filter(|r| r.metric == metric).map(|r| (r.level, r.rel_l2)).collect();
    vals.sort_by_key(|v| v.0);
    vals.len() >= 2 && vals.windows(2).all(|w| w[1].1 < w[0].1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_values() {
        let m = Metric::compare("x", "exact", &[&[1.0, 2.0]], &[&[1.0, 1.0]]);
        assert!((m.rel_l2 - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.rel_linf, 1.0);
        let z = Metric::compare("z", "zero", &[&[0.0]], &[&[0.0]]);
        assert_eq!(z.rel_l2, 0.0);
        let a = Metric::compare("a", "zero", &[&[3.0, 4.0]], &[&[0.0, 0.0]]);
        assert_eq!((a.rel_l2, a.rel_linf), (5.0, 4.0));
        let s = Metric::compare_scaled("s", "scaled", &[&[1.0]], &[&[0.0]], &[&[2.0]]);
        assert_eq!(s.rel_l2, 0.5);
    }

    #[test]
    fn json_round_trip_and_text() {
        let mut r = ReconstructionReport::new("sol", "abcdef0123456789");
        r.metrics.push(Metric::compare("f^s", "analytic", &[&[1.0]], &[&[1.1]]));
        r.counts.insert("planes_skipped".into(), 3.0);
        let back: ReconstructionReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        let t = r.to_text();
        assert!(t.contains("f^s") && t.contains("analytic") && t.contains("planes_skipped"));
    }

    #[test]
    fn convergence_helpers() {
        let row = |level, v| ConvergenceRow { level, grid_n: 10, spacing: 0.1, metric: "e".into(), rel_l2: v };
        let rows = vec![row(0, 0.3), row(1, 0.2), row(2, 0.1)];
        assert!(strictly_decreasing(&rows, "e"));
        assert!(!strictly_decreasing(&[row(0, 0.3), row(1, 0.3)], "e"));
        assert!(convergence_csv(&rows).lines().count() == 4);
    }
}
