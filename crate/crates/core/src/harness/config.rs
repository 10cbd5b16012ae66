//! Pipeline configuration: TOML with strict keys, `RESTRAY_` environment
//! overrides, and a content hash stamped on every output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decompose::SolverOptions;
use crate::error::{Error, Result};
use crate::field::{GridSpec, PhantomSpec};
use crate::forward::DirectionLayout;
use crate::geometry::{Aabb, CurveSpec, SphereLayout};
use crate::potential::{ExteriorRaySpec, FullOptions};
use crate::radon::RadonSpec;
use crate::sv_recover::SvOptions;

/// Prefix of environment overrides: `RESTRAY_RADON__N_P=96` sets `radon.n_p`.
pub const ENV_PREFIX: &str = "RESTRAY_";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Nodes per axis.
    pub n: usize,
    /// The grid spans `[−half_width, half_width]³`.
    pub half_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    /// Radius of the ball (centered at the origin) every chart must cover.
    pub radius: f64,
    /// Chart nodes per axis.
    pub n: usize,
    /// Simpson step of the ray integrals.
    pub step: f64,
}

impl ChartConfig {
    pub fn layout(&self) -> DirectionLayout {
        DirectionLayout::Chart { center: [0.0; 3], radius: self.radius, n: self.n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadonConfig {
    /// Gauss–Legendre rings in the upper hemisphere.
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_p: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub eps_t: f64,
    pub eps_rank: f64,
    pub circle_nodes: usize,
    pub solver_tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorConfig {
    /// Nodes added per side to the grid on which `f^s_{ℝⁿ}` is evaluated.
    pub pad_nodes: usize,
    /// Truncation radius in units of the circumradius of `B`.
    pub truncation_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub grid: GridConfig,
    /// `B = [−domain_half, domain_half]³`.
    pub domain_half: f64,
    pub curve: CurveSpec,
    pub samples_per_arc: usize,
    pub doppler: ChartConfig,
    pub moment: ChartConfig,
    pub radon: RadonConfig,
    pub tolerances: Tolerances,
    pub exterior: ExteriorConfig,
    pub phantom: PhantomSpec,
    /// Standard deviation of additive Gaussian noise on both sinograms.
    pub noise: f64,
    pub seed: u64,
    pub dump_stages: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig { n: 65, half_width: 1.6 },
            domain_half: 1.0,
            curve: CurveSpec::ThreeCircles { radius: 3.5 },
            samples_per_arc: 256,
            doppler: ChartConfig { radius: 1.0, n: 96, step: 0.02 },
            moment: ChartConfig { radius: 3f64.sqrt(), n: 80, step: 0.02 },
            radon: RadonConfig { n_theta: 32, n_phi: 64, n_p: 128 },
            tolerances: Tolerances { eps_t: 1e-3, eps_rank: 1e-6, circle_nodes: 1024, solver_tol: 1e-9, max_iter: 100_000 },
            exterior: ExteriorConfig { pad_nodes: 32, truncation_factor: 10.0 },
            phantom: PhantomSpec::default(),
            noise: 0.0,
            seed: 0,
            dump_stages: false,
        }
    }
}

fn range<T: PartialOrd + std::fmt::Display + Copy>(name: &str, v: T, lo: T, hi: T) -> Result<()> {
    if v < lo || v > hi {
        return Err(Error::Config(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

impl PipelineConfig {
    /// Parses TOML, applies environment overrides and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_env(text, std::env::vars())
    }

    /// As [`Self::from_toml_str`] with an explicit override source.
    pub fn from_toml_with_env(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut value: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        let defaults = toml::Table::try_from(Self::default()).map_err(|e| Error::Config(e.to_string()))?;
        // absent sections take their defaults; unknown keys stay errors
        for (k, v) in defaults {
            value.entry(k).or_insert(v);
        }
        apply_env(&mut value, env)?;
        let cfg: Self = toml::Value::Table(value).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        range("grid.n", self.grid.n, 17, 257)?;
        range("domain_half", self.domain_half, 1e-3, self.grid.half_width * 0.95)?;
        range("samples_per_arc", self.samples_per_arc, 8, 4096)?;
        range("doppler.n", self.doppler.n, 8, 512)?;
        range("moment.n", self.moment.n, 8, 512)?;
        range("doppler.step", self.doppler.step, 1e-4, 0.2)?;
        range("moment.step", self.moment.step, 1e-4, 0.2)?;
        range("radon.n_theta", self.radon.n_theta, 4, 512)?;
        range("radon.n_phi", self.radon.n_phi, 8, 1024)?;
        range("radon.n_p", self.radon.n_p, 64, 4096)?;
        range("tolerances.eps_t", self.tolerances.eps_t, 0.0, 0.5)?;
        range("tolerances.eps_rank", self.tolerances.eps_rank, 0.0, 0.5)?;
        range("tolerances.circle_nodes", self.tolerances.circle_nodes, 16, 65_536)?;
        range("tolerances.solver_tol", self.tolerances.solver_tol, 1e-15, 1e-2)?;
        range("exterior.pad_nodes", self.exterior.pad_nodes, 4, 256)?;
        range("exterior.truncation_factor", self.exterior.truncation_factor, 10.0, 1e6)?;
        range("noise", self.noise, 0.0, f64::MAX)?;
        if self.moment.radius < self.domain().circumradius() - 1e-12 {
            return Err(Error::Config("moment.radius must cover B (its circumradius)".into()));
        }
        self.grid_spec().validate_contains(&self.domain())?;
        self.radon_spec().validate()?;
        Ok(())
    }

    /// SHA-256 of the configuration; output flags that do not change
    /// results (`dump_stages`) are left out.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&Self { dump_stages: false, ..self.clone() }).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::cube(self.grid.n, self.grid.half_width)
    }

    pub fn domain(&self) -> Aabb {
        Aabb::cube(self.domain_half)
    }

    pub fn radon_spec(&self) -> RadonSpec {
        RadonSpec::for_box(
            SphereLayout::Hemisphere { n_theta: self.radon.n_theta, n_phi: self.radon.n_phi },
            self.radon.n_p,
            &self.domain(),
        )
    }

    pub fn sv_options(&self) -> SvOptions {
        SvOptions { circle_nodes: self.tolerances.circle_nodes, eps_t: self.tolerances.eps_t, eps_rank: self.tolerances.eps_rank }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tolerances.solver_tol, max_iter: self.tolerances.max_iter }
    }

    pub fn full_options(&self) -> FullOptions {
        let b = self.domain();
        FullOptions {
            ray: ExteriorRaySpec {
                truncation: self.exterior.truncation_factor * b.circumradius(),
                step: 0.5 * self.grid_spec().min_spacing(),
                margin_nodes: 2,
            },
            solver: self.solver_options(),
            sv: self.sv_options(),
            step: self.moment.step,
        }
    }

    /// Level `0..levels` of a resolution ladder ending at this config:
    /// grid, curve sampling, charts and Radon resolutions all scale by
    /// `(level + 2) / (levels + 1)` (so 3 levels give ½, ¾, 1).
    pub fn refined(&self, level: usize, levels: usize) -> Self {
        let f = (level + 2) as f64 / (levels + 1) as f64;
        let scale = |n: usize, min: usize| (((n as f64) * f).round() as usize).max(min);
        let mut c = self.clone();
        // keep an odd node count so the grid stays centered on the origin
        c.grid.n = (((self.grid.n - 1) as f64 * f).round() as usize).max(16) + 1;
        if c.grid.n % 2 == 0 {
            c.grid.n += 1;
        }
        c.samples_per_arc = scale(self.samples_per_arc, 8);
        c.doppler.n = scale(self.doppler.n, 8);
        c.moment.n = scale(self.moment.n, 8);
        c.radon.n_theta = scale(self.radon.n_theta, 4);
        c.radon.n_phi = scale(self.radon.n_phi, 8);
        c.radon.n_p = scale(self.radon.n_p, 64);
        c.exterior.pad_nodes = scale(self.exterior.pad_nodes, 4);
        c
    }
}

/// `RESTRAY_A__B=value` → key path `a.b`; values parse as TOML when they
/// can (numbers, booleans, arrays, inline tables) and as strings otherwise.
fn apply_env(table: &mut toml::Table, env: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    for (key, raw) in env {
        let Some(path) = key.strip_prefix(ENV_PREFIX) else { continue };
        let parts: Vec<String> = path.split("__").map(|p| p.to_ascii_lowercase()).collect();
        let value = format!("x = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or(toml::Value::String(raw.clone()));
        let mut node = &mut *table;
        for (i, part) in parts.iter().enumerate() {
            if i + 1 == parts.len() {
                node.insert(part.clone(), value.clone());
            } else {
                node = node
                    .entry(part.clone())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| Error::Config(format!("{key}: {part} is not a table")))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Vec<(String, String)> {
        vec![]
    }

    #[test]
    fn default_round_trips_exactly() {
        let c = PipelineConfig::default();
        let text = c.to_toml_string().unwrap();
        let back = PipelineConfig::from_toml_with_env(&text, none()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = PipelineConfig::from_toml_with_env("grid = { n = 33, half_width = 1.6, spacing = 0.1 }", none());
        assert!(matches!(e, Err(Error::Config(_))));
        let e = PipelineConfig::from_toml_with_env("colour = 3", none());
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn partial_files_take_defaults() {
        let c = PipelineConfig::from_toml_with_env("seed = 7\n[radon]\nn_theta = 8\nn_phi = 16\nn_p = 64\n", none()).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.radon.n_p, 64);
        assert_eq!(c.grid, PipelineConfig::default().grid);
    }

    #[test]
    fn environment_overrides() {
        let env = vec![
            ("RESTRAY_RADON__N_P".to_string(), "96".to_string()),
            ("RESTRAY_SEED".to_string(), "11".to_string()),
            ("RESTRAY_PHANTOM__KIND".to_string(), "bump".to_string()),
            ("OTHER".to_string(), "1".to_string()),
        ];
        let c = PipelineConfig::from_toml_with_env("", env).unwrap();
        assert_eq!(c.radon.n_p, 96);
        assert_eq!(c.seed, 11);
        let bad = vec![("RESTRAY_RADON__COLOUR".to_string(), "1".to_string())];
        assert!(PipelineConfig::from_toml_with_env("", bad).is_err());
    }

    #[test]
    fn out_of_range_values() {
        assert!(PipelineConfig::from_toml_with_env("[radon]\nn_theta = 8\nn_phi = 16\nn_p = 32\n", none()).is_err());
        assert!(PipelineConfig::from_toml_with_env("domain_half = 1.7", none()).is_err());
    }

    #[test]
    fn ladder_ends_at_the_config() {
        let c = PipelineConfig::default();
        assert_eq!(c.refined(2, 3), c);
        let l0 = c.refined(0, 3);
        assert_eq!(l0.grid.n, 33);
        assert_eq!(c.refined(1, 3).grid.n, 49);
        assert!(l0.validate().is_ok());
    }
}
