//! Experiment configuration with decibel boundaries.
//!
//! The core library speaks linear units only (watts, linear SINR ratios).
//! Decibel and dBm forms exist in this module and in the CLI flags; they are
//! converted exactly once, when a configuration is resolved.

use std::path::{Path, PathBuf};

use anbeam_core::channel::SystemSpec;
use anbeam_core::schemes::Scheme;
use serde::Deserialize;

/// `10^((dbm - 30) / 10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `10 log10(w) + 30` dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Every scheme the harness knows, in canonical order.
pub const ALL_SCHEMES: [Scheme; 5] = [
    Scheme::Relaxed,
    Scheme::Scheme1,
    Scheme::Scheme2,
    Scheme::BaselineSingle,
    Scheme::BaselineMrt,
];

pub fn parse_scheme(name: &str) -> Result<Scheme, ConfigError> {
    ALL_SCHEMES
        .into_iter()
        .find(|s| s.to_string() == name.trim())
        .ok_or_else(|| ConfigError::Invalid { reason: format!("unknown scheme {name:?}") })
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {reason}")]
    Invalid { reason: String },
    #[error(transparent)]
    Channel(#[from] anbeam_core::channel::ChannelError),
}

/// Which integer the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Number of eavesdroppers. Trials at neighboring points share channel
    /// draws, so adding an eavesdropper extends a realization instead of
    /// replacing it (paired sampling; see the harness module).
    EveCount,
    /// Number of transmit antennas; the channel dimension changes per point.
    AntennaCount,
}

/// Flat key-value configuration file, TOML syntax, every key optional.
///
/// Keys: `n_tx`, `n_eves`, `gamma_req_db` (one user SINR floor per layer),
/// `gamma_tol_db` (eavesdropper SINR caps; a short list is extended by
/// repeating its last entry up to `n_eves`), `p_max_dbm` (per-antenna
/// budget), `noise_dbm`, `user_distance_m`, `eve_distance_m`, `seed`,
/// `trials`, `sweep_values`, `schemes`, `out`. Command-line flags override
/// file values; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n_tx: Option<usize>,
    pub n_eves: Option<usize>,
    pub gamma_req_db: Option<Vec<f64>>,
    pub gamma_tol_db: Option<Vec<f64>>,
    pub p_max_dbm: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub user_distance_m: Option<f64>,
    pub eve_distance_m: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub sweep_values: Option<Vec<usize>>,
    pub schemes: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        toml::from_str(&text)
            .map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })
    }
}

/// Command-line overrides; `None` keeps the file value or the default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub sweep_values: Option<Vec<usize>>,
    pub schemes: Option<Vec<Scheme>>,
    pub out: Option<PathBuf>,
}

/// One fully resolved experiment: base system, trial count, seeding, sweep
/// axis and points, enabled schemes, and the output destination.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: SystemSpec,
    pub n_trials: usize,
    pub seed: u64,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub output_path: Option<PathBuf>,
}

fn extend_last(list: &[f64], n: usize) -> Result<Vec<f64>, ConfigError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let Some(&last) = list.last() else {
        return Err(ConfigError::Invalid {
            reason: "cannot resize an empty list to a nonzero length".to_string(),
        });
    };
    Ok((0..n).map(|i| list.get(i).copied().unwrap_or(last)).collect())
}

impl ExperimentConfig {
    /// Stock operating point: four antennas, three layers with 6/9/12 dB
    /// SINR floors, three eavesdroppers capped at -10 dB, 43 dBm per-antenna
    /// budget, -95 dBm receiver noise, user at 50 m, eavesdroppers at 30 m,
    /// 500 trials. Stock sweep ranges: eavesdroppers 1..=4, antennas 4..=8.
    pub fn defaults(axis: SweepAxis) -> Self {
        Self::resolve(axis, &FileConfig::default(), &Overrides::default())
            .expect("the stock operating point is valid")
    }

    /// Merges defaults, then the file, then the flags, and validates.
    pub fn resolve(
        axis: SweepAxis,
        file: &FileConfig,
        ov: &Overrides,
    ) -> Result<Self, ConfigError> {
        let gamma_req_db = file.gamma_req_db.clone().unwrap_or_else(|| vec![6.0, 9.0, 12.0]);
        let gamma_tol_db = file.gamma_tol_db.clone().unwrap_or_else(|| vec![-10.0]);
        let n_eves = file
            .n_eves
            .or(file.gamma_tol_db.as_ref().map(Vec::len))
            .unwrap_or(3);
        let n_tx = file.n_tx.unwrap_or(4);
        let p_max_w = dbm_to_watts(file.p_max_dbm.unwrap_or(43.0));
        let spec = SystemSpec {
            n_tx,
            n_layers: gamma_req_db.len(),
            gamma_req: gamma_req_db.iter().copied().map(db_to_linear).collect(),
            gamma_tol: extend_last(&gamma_tol_db, n_eves)?
                .iter()
                .copied()
                .map(db_to_linear)
                .collect(),
            p_max: vec![p_max_w; n_tx],
            noise_power: dbm_to_watts(file.noise_dbm.unwrap_or(-95.0)),
            user_distance_m: file.user_distance_m.unwrap_or(50.0),
            eve_distance_m: file.eve_distance_m.unwrap_or(30.0),
        };
        let sweep_values = ov
            .sweep_values
            .clone()
            .or_else(|| file.sweep_values.clone())
            .unwrap_or_else(|| match axis {
                SweepAxis::EveCount => vec![1, 2, 3, 4],
                SweepAxis::AntennaCount => vec![4, 5, 6, 7, 8],
            });
        let schemes = match (&ov.schemes, &file.schemes) {
            (Some(list), _) => list.clone(),
            (None, Some(names)) => names
                .iter()
                .map(|n| parse_scheme(n))
                .collect::<Result<Vec<_>, _>>()?,
            (None, None) => ALL_SCHEMES.to_vec(),
        };
        let cfg = ExperimentConfig {
            spec,
            n_trials: ov.trials.or(file.trials).unwrap_or(500),
            seed: ov.seed.or(file.seed).unwrap_or(7),
            sweep_axis: axis,
            sweep_values,
            schemes,
            output_path: ov.out.clone().or_else(|| file.out.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |reason: String| Err(ConfigError::Invalid { reason });
        if self.n_trials == 0 {
            return invalid("trials must be at least one".to_string());
        }
        if self.sweep_values.is_empty() {
            return invalid("sweep_values must be nonempty".to_string());
        }
        if !self.sweep_values.windows(2).all(|w| w[0] < w[1]) {
            return invalid("sweep_values must be strictly increasing".to_string());
        }
        if self.schemes.is_empty() {
            return invalid("at least one scheme must be enabled".to_string());
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return invalid(format!("scheme {s} listed twice"));
            }
        }
        self.spec.validate()?;
        for &v in &self.sweep_values {
            self.spec_for(v)?.validate()?;
        }
        Ok(())
    }

    /// System at one sweep point. The eavesdropper axis resizes the cap
    /// list, repeating its last entry; the antenna axis resizes the array
    /// and its per-antenna budget the same way.
    pub fn spec_for(&self, sweep_value: usize) -> Result<SystemSpec, ConfigError> {
        let mut spec = self.spec.clone();
        match self.sweep_axis {
            SweepAxis::EveCount => {
                spec.gamma_tol = extend_last(&spec.gamma_tol, sweep_value)?;
            }
            SweepAxis::AntennaCount => {
                spec.n_tx = sweep_value;
                spec.p_max = extend_last(&spec.p_max, sweep_value)?;
            }
        }
        Ok(spec)
    }

    /// The sweep value at which `spec_for` returns the base system unchanged.
    pub fn baseline_sweep_value(&self) -> usize {
        match self.sweep_axis {
            SweepAxis::EveCount => self.spec.n_eves(),
            SweepAxis::AntennaCount => self.spec.n_tx,
        }
    }
}
