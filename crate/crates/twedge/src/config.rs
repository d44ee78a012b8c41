//! Run configuration, resolved field by field with precedence
//! flags > `TWEDGE_*` environment > TOML file > defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use twedge_core::distributions::Beta;
use twedge_core::ensembles::{EnsembleSpec, Model, WishartSpec};
use twedge_core::painleve::SolverConfig;

use crate::error::CliError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Percentile rows of the Wishart comparison table.
pub const TABLE_PERCENTILES: [f64; 9] = [0.01, 0.05, 0.10, 0.30, 0.50, 0.70, 0.90, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplerModel {
    Dense,
    Tridiagonal,
}

impl From<SamplerModel> for Model {
    fn from(m: SamplerModel) -> Model {
        match m {
            SamplerModel::Dense => Model::Dense,
            SamplerModel::Tridiagonal => Model::Tridiagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gaussian,
    Wishart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Tabulate,
    Density,
    Sample,
    Compare,
    Verify,
}

/// One configuration layer: every field optional. Parsed from flags (with
/// environment fallbacks) and, with the same field names, from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// TOML file with defaults for any of these settings.
    #[arg(long, env = "TWEDGE_CONFIG")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Symmetry classes, comma separated (1, 2, 4).
    #[arg(long, env = "TWEDGE_BETA", value_delimiter = ',')]
    pub beta: Option<Vec<u8>>,
    #[arg(long, env = "TWEDGE_M_MAX")]
    pub m_max: Option<usize>,
    #[arg(long, env = "TWEDGE_S_MIN", allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, env = "TWEDGE_S_MAX", allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    #[arg(long, env = "TWEDGE_GRID_STEP")]
    pub grid_step: Option<f64>,
    #[arg(long, env = "TWEDGE_REPLICATES")]
    pub replicates: Option<usize>,
    #[arg(long, env = "TWEDGE_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "TWEDGE_ENSEMBLE")]
    pub ensemble: Option<EnsembleKind>,
    /// Matrix size of Gaussian ensembles.
    #[arg(long, env = "TWEDGE_N")]
    pub n: Option<usize>,
    /// Top eigenvalues kept per replicate.
    #[arg(long, env = "TWEDGE_K")]
    pub k: Option<usize>,
    #[arg(long, env = "TWEDGE_MODEL")]
    pub model: Option<SamplerModel>,
    /// Wishart variates.
    #[arg(long, env = "TWEDGE_WISHART_P")]
    pub wishart_p: Option<usize>,
    /// Wishart degrees of freedom.
    #[arg(long, env = "TWEDGE_WISHART_N")]
    pub wishart_n: Option<usize>,
    #[arg(long, env = "TWEDGE_PERCENTILES", value_delimiter = ',')]
    pub percentiles: Option<Vec<f64>>,
    /// Quadrature nodes of the Fredholm determinant oracle.
    #[arg(long, env = "TWEDGE_ORACLE_NODES")]
    pub oracle_nodes: Option<usize>,
    /// Multiplies every `verify` tolerance.
    #[arg(long, env = "TWEDGE_TOLERANCE_SCALE")]
    pub tolerance_scale: Option<f64>,
    /// Ceiling on the estimated floating-point work of a Monte Carlo batch.
    #[arg(long, env = "TWEDGE_WORK_BUDGET")]
    pub work_budget: Option<f64>,
    #[arg(long, env = "TWEDGE_FORMAT")]
    pub format: Option<Format>,
    #[arg(long, env = "TWEDGE_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "TWEDGE_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Existing sample CSV for `compare` (its JSON sidecar must sit beside it).
    #[arg(long, env = "TWEDGE_BATCH")]
    pub batch: Option<PathBuf>,
    /// Solver settings; file only.
    #[arg(skip)]
    pub solver: Option<SolverConfig>,
}

macro_rules! layer {
    ($top:expr, $bottom:expr, $($field:ident),*) => {
        Overrides { config: $top.config.or($bottom.config), $($field: $top.$field.or($bottom.$field)),* }
    };
}

impl Overrides {
    /// Fields of `self`, falling back to `other`.
    pub fn or(self, other: Overrides) -> Overrides {
        layer!(
            self, other, beta, m_max, s_min, s_max, grid_step, replicates, seed, ensemble, n, k, model, wishart_p,
            wishart_n, percentiles, oracle_nodes, tolerance_scale, work_budget, format, out, cache_dir, batch, solver
        )
    }

    pub fn from_file(path: &Path) -> Result<Overrides, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub betas: Vec<u8>,
    pub m_max: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub grid_step: f64,
    pub replicates: usize,
    pub seed: u64,
    pub ensemble: EnsembleKind,
    pub n: usize,
    pub k: usize,
    pub model: SamplerModel,
    pub wishart_p: usize,
    pub wishart_n: usize,
    pub percentiles: Vec<f64>,
    pub oracle_nodes: usize,
    pub tolerance_scale: f64,
    pub work_budget: f64,
    pub format: Format,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub cache_dir: PathBuf,
    pub batch: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl RunConfig {
    /// Merges flags/environment over the file named by `--config` (if any) over defaults.
    pub fn resolve(command: Command, cli: Overrides) -> Result<RunConfig, CliError> {
        let file = match &cli.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        Self::from_layers(command, cli.or(file))
    }

    pub fn from_layers(command: Command, o: Overrides) -> Result<RunConfig, CliError> {
        let s_min = o.s_min.unwrap_or(-10.0);
        let s_max = o.s_max.unwrap_or(6.0);
        let grid_step = o.grid_step.unwrap_or(0.01);
        let mut solver = o.solver.unwrap_or_default();
        let intervals = (s_max - s_min) / grid_step;
        if !(grid_step > 0.0) || !(s_max > s_min) || (intervals - intervals.round()).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "grid step {grid_step} must divide [{s_min}, {s_max}] into whole intervals"
            )));
        }
        let intervals = intervals.round() as usize;
        solver.s_left = s_min;
        solver.s_right = s_max;
        solver.grid_points = intervals + 1;
        solver.relaxation_mesh_size = 2 * intervals + 1;
        let config = RunConfig {
            command,
            betas: o.beta.unwrap_or_else(|| vec![1, 2, 4]),
            m_max: o.m_max.unwrap_or(2),
            s_min,
            s_max,
            grid_step,
            replicates: o.replicates.unwrap_or(10_000),
            seed: o.seed.unwrap_or(2024),
            ensemble: o.ensemble.unwrap_or(EnsembleKind::Gaussian),
            n: o.n.unwrap_or(200),
            k: o.k.unwrap_or(4),
            model: o.model.unwrap_or(SamplerModel::Tridiagonal),
            wishart_p: o.wishart_p.unwrap_or(100),
            wishart_n: o.wishart_n.unwrap_or(100),
            percentiles: o.percentiles.unwrap_or_else(|| TABLE_PERCENTILES.to_vec()),
            oracle_nodes: o.oracle_nodes.unwrap_or(twedge_core::fredholm::DEFAULT_NODES),
            tolerance_scale: o.tolerance_scale.unwrap_or(1.0),
            work_budget: o.work_budget.unwrap_or(twedge_core::ensembles::DEFAULT_WORK_BUDGET),
            format: o.format.unwrap_or(Format::Csv),
            out: o.out.unwrap_or_else(|| PathBuf::from("twedge-out")),
            cache_dir: o.cache_dir.unwrap_or_else(|| PathBuf::from(".twedge-cache")),
            batch: o.batch,
            solver,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.betas.is_empty() {
            return bad("at least one beta is required".into());
        }
        for beta in self.betas()? {
            if self.m_max == 0 || self.m_max > beta.m_max_cap() {
                return bad(format!("m_max = {} outside 1..={} for beta = {}", self.m_max, beta.m_max_cap(), beta.as_u8()));
            }
        }
        if self.percentiles.is_empty()
            || self.percentiles.iter().any(|p| !(*p > 0.0 && *p < 1.0))
            || self.percentiles.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("percentiles must be strictly increasing inside (0, 1)".into());
        }
        if !(self.tolerance_scale > 0.0) || !(self.work_budget > 0.0) {
            return bad("tolerance_scale and work_budget must be positive".into());
        }
        if self.oracle_nodes < 4 {
            return bad("oracle_nodes must be at least 4".into());
        }
        self.solver.validate().map_err(|e| CliError::Config(format!("solver: {e}")))?;
        match self.ensemble {
            EnsembleKind::Gaussian => self.gaussian_spec(self.betas()?[0]).validate(),
            EnsembleKind::Wishart => self.wishart_spec().validate(),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn betas(&self) -> Result<Vec<Beta>, CliError> {
        let mut out = Vec::new();
        for &b in &self.betas {
            let beta = Beta::from_u8(b).map_err(|e| CliError::Config(e.to_string()))?;
            if !out.contains(&beta) {
                out.push(beta);
            }
        }
        Ok(out)
    }

    pub fn gaussian_spec(&self, beta: Beta) -> EnsembleSpec {
        EnsembleSpec {
            beta,
            n: self.n,
            replicates: self.replicates,
            k: self.k,
            master_seed: self.seed,
            model: self.model.into(),
        }
    }

    pub fn wishart_spec(&self) -> WishartSpec {
        WishartSpec { p: self.wishart_p, n: self.wishart_n, replicates: self.replicates, k: self.k, master_seed: self.seed }
    }

    /// SHA-256 over the code version and every setting except output locations.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        sha256_hex(&format!("twedge {CODE_VERSION}\n{json}"))
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_total() {
        let c = RunConfig::from_layers(Command::Tabulate, Overrides::default()).unwrap();
        assert_eq!(c.betas, [1, 2, 4]);
        assert_eq!((c.s_min, c.s_max, c.m_max), (-10.0, 6.0, 2));
        assert_eq!(c.solver.grid_points, 1601);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.config_hash().len(), 64);
    }

    #[test]
    fn upper_layers_win() {
        let file: Overrides = toml::from_str("m_max = 1\nseed = 7\n[solver]\nrk_rtol = 1e-9\n").unwrap();
        let cli = Overrides { seed: Some(9), ..Default::default() };
        let c = RunConfig::from_layers(Command::Tabulate, cli.or(file)).unwrap();
        assert_eq!((c.m_max, c.seed), (1, 9));
        assert_eq!(c.solver.rk_rtol, 1e-9);
        assert_eq!(c.solver.rk_atol, SolverConfig::default().rk_atol);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let reject = |o: Overrides| matches!(RunConfig::from_layers(Command::Tabulate, o), Err(CliError::Config(_)));
        assert!(reject(Overrides { beta: Some(vec![3]), ..Default::default() }));
        assert!(reject(Overrides { m_max: Some(3), ..Default::default() }));
        assert!(reject(Overrides { grid_step: Some(0.03), ..Default::default() }));
        assert!(reject(Overrides { k: Some(300), ..Default::default() }));
        assert!(reject(Overrides { percentiles: Some(vec![0.5, 0.2]), ..Default::default() }));
        assert!(toml::from_str::<Overrides>("unknown = 1").is_err());
    }

    #[test]
    fn hash_ignores_output_locations_only() {
        let a = RunConfig::from_layers(Command::Sample, Overrides::default()).unwrap();
        let b = RunConfig::from_layers(
            Command::Sample,
            Overrides { out: Some("elsewhere".into()), cache_dir: Some("c".into()), ..Default::default() },
        )
        .unwrap();
        let c = RunConfig::from_layers(Command::Sample, Overrides { seed: Some(1), ..Default::default() }).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
    }
}
