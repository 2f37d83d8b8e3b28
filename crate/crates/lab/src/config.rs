//! Experiment configuration: one TOML file per experiment, unknown keys
//! rejected, initial data only through seeded presets.

use crate::{LabError, LabResult};
use aht_core::combinatorics::Constants;
use aht_core::dynamics::{DynamicsConfig, FilterConfig};
use aht_core::geometry::{make_grid_with, GridOptions};
use aht_core::presets::{initial_field, IpmProfile, Preset};
use aht_core::{Domain, Grid2D, VectorField};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Used in report headers only.
    #[serde(default)]
    pub name: String,
    pub domain: DomainSpec,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub kato: KatoSpec,
    #[serde(default)]
    pub taylor: TaylorSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub constants: ConstantsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Torus {
        #[serde(default = "two_pi")]
        period: f64,
    },
    Disk {
        #[serde(default = "one")]
        radius: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
}

fn two_pi() -> f64 {
    std::f64::consts::TAU
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// `(n1, n2)`: torus `(nx, ny)`, polar `(rings, angles)`.
    pub resolution: [usize; 2],
    #[serde(default = "elliptic_order")]
    pub elliptic_order: usize,
}

fn elliptic_order() -> usize {
    GridOptions::default().elliptic_order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSpec {
    Layers,
    Bubble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    GradientSteady,
    Rotation {
        theta: f64,
    },
    IpmEmbed {
        #[serde(default = "layers")]
        profile: ProfileSpec,
    },
    RandomSmooth {
        seed: u64,
        #[serde(default = "decay")]
        decay: f64,
    },
    RandomTangent {
        seed: u64,
        #[serde(default = "decay")]
        decay: f64,
    },
    Solenoidal,
}

fn layers() -> ProfileSpec {
    ProfileSpec::Layers
}

fn decay() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub t_end: f64,
    pub sample_every: f64,
    pub cfl_safety: f64,
    pub max_dt: Option<f64>,
    pub filter_strength: f64,
    /// Seed of the Gaussian part of the rearrangement test battery.
    pub battery_seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        let d = DynamicsConfig::default();
        Self { t_end: 1.0, sample_every: 0.05, cfl_safety: d.cfl_safety, max_dt: None, filter_strength: d.filter.strength, battery_seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KatoSpec {
    pub order: usize,
    /// Compare against the finite-difference oracle.
    pub oracle: bool,
    pub oracle_points: usize,
    pub oracle_seed: u64,
    /// Initial oracle step; default `1e-2/‖y0‖_surrogate`.
    pub oracle_step: Option<f64>,
    pub oracle_halvings: usize,
    /// Relative agreement of consecutive oracle refinements.
    pub oracle_tol: f64,
}

impl Default for KatoSpec {
    fn default() -> Self {
        Self { order: 3, oracle: true, oracle_points: 8, oracle_seed: 1, oracle_step: None, oracle_halvings: 6, oracle_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaylorSpec {
    /// Largest truncation order `K` compared against the trajectories.
    pub order: usize,
    /// Ladder order used for the radius fit.
    pub radius_order: usize,
    pub points: usize,
    pub point_seed: u64,
    /// Evaluation time; default `0.1/‖y0‖_surrogate`.
    pub t: Option<f64>,
    /// Velocity snapshots recorded over `[0, t]`.
    pub snapshots: usize,
}

impl Default for TaylorSpec {
    fn default() -> Self {
        Self { order: 5, radius_order: 6, points: 100, point_seed: 1, t: None, snapshots: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    pub s_max: usize,
    pub m_max: usize,
    pub series_max: usize,
    pub kernel_max: usize,
    pub k_max: usize,
    /// Length of the doubling sequence of `L` checked for monotonicity.
    pub doublings: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { s_max: 6, m_max: 12, series_max: 8, kernel_max: 20, k_max: 50, doublings: 12 }
    }
}

/// Overrides for the measured constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSpec {
    pub c_omega: Option<f64>,
    pub c_r: Option<f64>,
    pub c_rho: Option<f64>,
    pub c_gamma: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        Self { c_omega: None, c_r: None, c_rho: None, c_gamma: None, trials: 10, seed: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Relative paths resolve against the config file's directory.
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> LabResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; a relative `output.dir` is anchored at the file.
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(d) = &cfg.output.dir {
            if d.is_relative() {
                cfg.output.dir = Some(path.parent().unwrap_or(Path::new(".")).join(d));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> LabResult<()> {
        self.domain().map_err(|e| LabError::Config(e.to_string()))?;
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if !(self.run.t_end >= 0.0) || !(self.run.sample_every > 0.0) || !(self.run.cfl_safety > 0.0) {
            return bad("run: need t_end ≥ 0, sample_every > 0, cfl_safety > 0");
        }
        if self.kato.order == 0 {
            return bad("kato.order must be at least 1");
        }
        if self.taylor.points == 0 || self.taylor.snapshots == 0 {
            return bad("taylor: points and snapshots must be positive");
        }
        if self.constants.trials < 10 {
            return bad("constants.trials must be at least 10");
        }
        Ok(())
    }

    /// Replaces the seed of a random preset.
    pub fn override_seed(&mut self, seed: u64) {
        match &mut self.initial {
            InitialSpec::RandomSmooth { seed: s, .. } | InitialSpec::RandomTangent { seed: s, .. } => *s = seed,
            _ => {}
        }
    }

    pub fn domain(&self) -> aht_core::Result<Domain> {
        match self.domain {
            DomainSpec::Torus { period } => Domain::torus(period),
            DomainSpec::Disk { radius } => Domain::disk(radius),
            DomainSpec::Annulus { r_in, r_out } => Domain::annulus(r_in, r_out),
        }
    }

    pub fn grid(&self) -> aht_core::Result<Arc<Grid2D>> {
        self.grid_at(self.grid.resolution)
    }

    pub fn grid_at(&self, resolution: [usize; 2]) -> aht_core::Result<Arc<Grid2D>> {
        make_grid_with(self.domain()?, (resolution[0], resolution[1]), GridOptions { elliptic_order: self.grid.elliptic_order })
    }

    pub fn preset(&self) -> Preset {
        match self.initial {
            InitialSpec::GradientSteady => Preset::GradientSteady,
            InitialSpec::Rotation { theta } => Preset::Rotation { theta },
            InitialSpec::IpmEmbed { profile } => Preset::IpmEmbed {
                profile: match profile {
                    ProfileSpec::Layers => IpmProfile::Layers,
                    ProfileSpec::Bubble => IpmProfile::Bubble,
                },
            },
            InitialSpec::RandomSmooth { seed, decay } => Preset::RandomSmooth { seed, decay },
            InitialSpec::RandomTangent { seed, decay } => Preset::RandomTangent { seed, decay },
            InitialSpec::Solenoidal => Preset::Solenoidal,
        }
    }

    pub fn initial_field(&self, grid: &Arc<Grid2D>) -> aht_core::Result<VectorField> {
        initial_field(grid, self.preset())
    }

    pub fn dynamics(&self) -> DynamicsConfig {
        DynamicsConfig {
            cfl_safety: self.run.cfl_safety,
            filter: FilterConfig { strength: self.run.filter_strength, ..FilterConfig::default() },
            max_dt: self.run.max_dt,
            ..DynamicsConfig::default()
        }
    }

    /// Measured constants on `grid`, with the configured overrides applied.
    pub fn constants(&self, grid: &Arc<Grid2D>) -> aht_core::Result<Constants> {
        let o = &self.constants;
        let all = o.c_omega.is_some() && o.c_r.is_some() && o.c_rho.is_some() && o.c_gamma.is_some();
        let mut c = if all {
            Constants { c_omega: 0.0, c_r: 0.0, c_rho: 0.0, c_gamma: 0.0 }
        } else {
            Constants::measure(grid, o.trials, o.seed)?
        };
        c.c_omega = o.c_omega.unwrap_or(c.c_omega);
        c.c_r = o.c_r.unwrap_or(c.c_r);
        c.c_rho = o.c_rho.unwrap_or(c.c_rho);
        c.c_gamma = o.c_gamma.unwrap_or(c.c_gamma);
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [domain]
        kind = "disk"
        [grid]
        resolution = [16, 32]
        [initial]
        preset = "rotation"
        theta = 0.3
    "#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.domain, DomainSpec::Disk { radius: 1.0 });
        assert_eq!(c.run, RunSpec::default());
        assert_eq!(c.grid.elliptic_order, 4);
        assert_eq!(c.preset(), Preset::Rotation { theta: 0.3 });
        let back = ExperimentConfig::parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        for extra in ["\n[run]\nspeed = 2", "\n[grid2]\nx = 1"] {
            assert!(matches!(ExperimentConfig::parse(&format!("{MINIMAL}{extra}")), Err(LabError::Config(_))));
        }
        let bad_domain = MINIMAL.replace("kind = \"disk\"", "kind = \"disk\"\nperiod = 3.0");
        assert!(ExperimentConfig::parse(&bad_domain).is_err());
        let bad_preset = MINIMAL.replace("theta = 0.3", "theta = 0.3\nseed = 4");
        assert!(ExperimentConfig::parse(&bad_preset).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("\"disk\"", "\"sphere\"")).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let neg = MINIMAL.replace("kind = \"disk\"", "kind = \"disk\"\nradius = -1.0");
        assert!(ExperimentConfig::parse(&neg).is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}\n[kato]\norder = 0")).is_err());
    }

    #[test]
    fn seed_override() {
        let mut c = ExperimentConfig::parse(&MINIMAL.replace("preset = \"rotation\"\n        theta = 0.3", "preset = \"random_smooth\"\nseed = 3")).unwrap();
        c.override_seed(9);
        assert_eq!(c.preset(), Preset::RandomSmooth { seed: 9, decay: 0.5 });
    }

    #[test]
    fn presets_are_reproducible() {
        let c = ExperimentConfig::parse(&MINIMAL.replace("preset = \"rotation\"\n        theta = 0.3", "preset = \"random_smooth\"\nseed = 3")).unwrap();
        let g = c.grid().unwrap();
        assert_eq!(c.initial_field(&g).unwrap().comp(0), c.initial_field(&g).unwrap().comp(0));
    }
}
