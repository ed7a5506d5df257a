use std::f64::consts::PI;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::estimator::GompConfig;
use crate::projection_design::{DesignConfig, DesignVariant, InitKind, ProjectionKind};

/// Every key accepted in a config file or a `key=value` override.
pub const CONFIG_KEYS: &[&str] = &[
    "N",
    "M",
    "P",
    "K",
    "L",
    "snr_grid_db",
    "trials",
    "seed",
    "projection_kind",
    "methods",
    "nu_max",
    "min_separation_cells",
    "i_max",
    "j_max",
    "t_max",
    "step_size",
    "alpha_candidates",
    "max_halvings",
    "init",
    "p_values",
];

/// Largest accepted `trials`, `t_max`, `i_max`, `j_max` and dimension values;
/// protects against configs that would never finish or exhaust memory.
const MAX_COUNT: usize = 1 << 20;
const MAX_DIM: usize = 1 << 14;

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Projection rows (RF chains).
    pub n: usize,
    /// Sensors.
    pub m: usize,
    /// Dictionary grid points.
    pub p: usize,
    /// Sources.
    pub k: usize,
    /// Snapshots.
    pub l: usize,
    /// SNR points in dB; `f64::INFINITY` for noiseless.
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub projection_kind: ProjectionKind,
    /// Projections compared by the multi-method drivers; empty means
    /// `[projection_kind]` for sweeps and every kind for coherence runs.
    pub methods: Vec<ProjectionKind>,
    /// Upper end of the source/grid frequency range `[0, nu_max]`.
    pub nu_max: f64,
    /// Minimum source separation in grid cells (`nu_max / P`).
    pub min_separation_cells: f64,
    pub gomp: GompConfig,
    pub design: DesignConfig,
    /// Shrinkage factors tried by the design driver; the lowest-coherence
    /// result wins.
    pub alpha_candidates: Vec<f64>,
    /// Grid sizes for the coherence experiment.
    pub p_values: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 16,
            m: 64,
            p: 64,
            k: 5,
            l: 16,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 200,
            seed: 0,
            projection_kind: ProjectionKind::Designed,
            methods: Vec::new(),
            nu_max: 2.0 * PI,
            min_separation_cells: 2.0,
            gomp: GompConfig::default(),
            design: DesignConfig::default(),
            alpha_candidates: vec![1.0, 1.5, 2.0, 3.0, 5.0],
            p_values: vec![64, 128],
        }
    }
}

/// An SNR entry: a number of dB or the string `"inf"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum SnrValue {
    Db(f64),
    Text(String),
}

fn snr_from_value(v: SnrValue) -> std::result::Result<f64, String> {
    match v {
        SnrValue::Db(db) => Ok(db),
        SnrValue::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is neither a number nor \"inf\"")),
        },
    }
}

fn field<T: DeserializeOwned>(key: &str, value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::config(key, e.to_string()))
}

fn u64_seed(key: &str, value: Value) -> Result<u64> {
    match &value {
        // Allow seeds written as strings so the full u64 range survives tools
        // that store JSON numbers as doubles.
        Value::String(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::config(key, format!("`{s}`: {e}"))),
        _ => field(key, value),
    }
}

/// Parses the value half of a `key=value` override: JSON when it parses,
/// otherwise the raw text as a string.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

impl SweepConfig {
    /// Builds a config from a JSON object text plus `key=value` overrides
    /// (applied in order, later ones win), then validates it.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self> {
        let root: Value = if text.trim().is_empty() {
            Value::Object(Map::new())
        } else {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                reason: e.to_string(),
            })?
        };
        let Value::Object(mut map) = root else {
            return Err(Error::Parse {
                line: 1,
                reason: "config must be a JSON object".into(),
            });
        };
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| Error::config(ov.as_str(), "override must have the form key=value"))?;
            map.insert(key.trim().to_string(), override_value(raw.trim()));
        }
        Self::from_map(map)
    }

    /// Reads a JSON config file (see [`SweepConfig::from_json_str`]).
    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text, overrides)
    }

    fn from_map(map: Map<String, Value>) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        // serde_json's map is ordered by key, so the first unknown key
        // reported is deterministic
        for (key, value) in map {
            let k = key.as_str();
            match k {
                "N" => cfg.n = field(k, value)?,
                "M" => cfg.m = field(k, value)?,
                "P" => cfg.p = field(k, value)?,
                "K" => cfg.k = field(k, value)?,
                "L" => cfg.l = field(k, value)?,
                "snr_grid_db" => {
                    let raw: Vec<SnrValue> = field(k, value)?;
                    cfg.snr_grid_db = raw
                        .into_iter()
                        .map(snr_from_value)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::config(k, e))?;
                }
                "trials" => cfg.trials = field(k, value)?,
                "seed" => cfg.seed = u64_seed(k, value)?,
                "projection_kind" => cfg.projection_kind = field(k, value)?,
                "methods" => cfg.methods = field(k, value)?,
                "nu_max" => cfg.nu_max = field(k, value)?,
                "min_separation_cells" => cfg.min_separation_cells = field(k, value)?,
                "i_max" => cfg.gomp.i_max = field(k, value)?,
                "j_max" => cfg.gomp.j_max = field(k, value)?,
                "t_max" => cfg.design.t_max = field(k, value)?,
                "step_size" => cfg.design.step_size = field(k, value)?,
                "alpha_candidates" => cfg.alpha_candidates = field(k, value)?,
                "max_halvings" => cfg.design.max_halvings = field(k, value)?,
                "init" => cfg.design.init = field::<InitKind>(k, value)?,
                "p_values" => cfg.p_values = field(k, value)?,
                _ => return Err(Error::config(k, "unknown key")),
            }
        }
        cfg.design.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant; errors name the offending key and constraint.
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("N", self.n),
            ("M", self.m),
            ("P", self.p),
            ("K", self.k),
            ("L", self.l),
        ] {
            if v == 0 {
                return Err(Error::config(key, format!("{key} >= 1 required")));
            }
            if v > MAX_DIM {
                return Err(Error::config(key, format!("{key} <= {MAX_DIM} required, got {v}")));
            }
        }
        if self.k > self.n {
            return Err(Error::config(
                "K",
                format!("K <= N required, got K={}, N={}", self.k, self.n),
            ));
        }
        if self.n > self.m {
            return Err(Error::config(
                "N",
                format!("N <= M required, got N={}, M={}", self.n, self.m),
            ));
        }
        if self.m > self.p {
            return Err(Error::config(
                "P",
                format!("M <= P required, got M={}, P={}", self.m, self.p),
            ));
        }
        if self.trials == 0 || self.trials > MAX_COUNT {
            return Err(Error::config("trials", format!("1 <= trials <= {MAX_COUNT} required")));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_grid_db", "at least one SNR point required"));
        }
        if let Some(bad) = self
            .snr_grid_db
            .iter()
            .find(|s| !(s.is_finite() || **s == f64::INFINITY))
        {
            return Err(Error::config(
                "snr_grid_db",
                format!("SNR must be finite or \"inf\", got {bad}"),
            ));
        }
        if !(self.nu_max > 0.0 && self.nu_max <= 2.0 * PI) {
            return Err(Error::config(
                "nu_max",
                format!("0 < nu_max <= 2π required, got {}", self.nu_max),
            ));
        }
        if !(self.min_separation_cells >= 0.0 && self.min_separation_cells.is_finite()) {
            return Err(Error::config(
                "min_separation_cells",
                format!("must be finite and >= 0, got {}", self.min_separation_cells),
            ));
        }
        if let Err(reason) = self.separation_feasibility() {
            return Err(Error::config("min_separation_cells", reason));
        }
        if self.gomp.i_max > MAX_COUNT {
            return Err(Error::config("i_max", format!("i_max <= {MAX_COUNT} required")));
        }
        if self.gomp.j_max > MAX_COUNT {
            return Err(Error::config("j_max", format!("j_max <= {MAX_COUNT} required")));
        }
        self.gomp.validate()?;
        if self.design.t_max > MAX_COUNT {
            return Err(Error::config("t_max", format!("t_max <= {MAX_COUNT} required")));
        }
        if self.design.max_halvings > 60 {
            return Err(Error::config("max_halvings", "max_halvings <= 60 required"));
        }
        self.design.validate()?;
        if self.alpha_candidates.is_empty() {
            return Err(Error::config("alpha_candidates", "at least one candidate required"));
        }
        if let Some(bad) = self.alpha_candidates.iter().find(|a| !(**a >= 1.0 && a.is_finite())) {
            return Err(Error::config(
                "alpha_candidates",
                format!("alpha >= 1 required, got {bad}"),
            ));
        }
        if let Some(bad) = self.p_values.iter().find(|&&p| p < self.m || p > MAX_DIM) {
            return Err(Error::config(
                "p_values",
                format!(
                    "M <= P <= {MAX_DIM} required for every entry, got P={bad}, M={}",
                    self.m
                ),
            ));
        }
        Ok(())
    }

    /// Minimum source separation in frequency units.
    pub fn min_separation(&self) -> f64 {
        self.min_separation_cells * self.nu_max / self.p as f64
    }

    /// Whether `K` sources with the configured separation fit in
    /// `[0, nu_max]` (and on the circle, since distances wrap).
    fn separation_feasibility(&self) -> std::result::Result<(), String> {
        let sep = self.min_separation();
        let k = self.k as f64;
        if (k - 1.0) * sep > self.nu_max || k * sep > 2.0 * PI {
            return Err(format!(
                "{} sources separated by {} cells do not fit in [0, nu_max]",
                self.k, self.min_separation_cells
            ));
        }
        Ok(())
    }

    /// Methods compared by [`run_mse_sweep`](super::run_mse_sweep).
    pub fn sweep_methods(&self) -> Vec<ProjectionKind> {
        if self.methods.is_empty() {
            vec![self.projection_kind]
        } else {
            dedup_kinds(&self.methods)
        }
    }

    /// Methods compared by
    /// [`run_coherence_experiment`](super::run_coherence_experiment).
    pub fn coherence_methods(&self) -> Vec<ProjectionKind> {
        if self.methods.is_empty() {
            ProjectionKind::ALL.to_vec()
        } else {
            dedup_kinds(&self.methods)
        }
    }

    /// Design settings for one gradient-based kind.
    pub fn design_for(&self, variant: DesignVariant) -> DesignConfig {
        DesignConfig {
            variant,
            seed: self.seed,
            ..self.design.clone()
        }
    }
}

fn dedup_kinds(kinds: &[ProjectionKind]) -> Vec<ProjectionKind> {
    let mut out: Vec<ProjectionKind> = Vec::with_capacity(kinds.len());
    for &k in kinds {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}
