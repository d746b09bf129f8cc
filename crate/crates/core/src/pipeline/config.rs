use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learning::TrainConfig;
use crate::retrieval::ZoneTessellation;
use crate::roles::RoleFitConfig;

/// Every tunable of the engine. Read from a flat TOML file; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub beta: f64,
    pub delta_s: f64,
    pub x_pct: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub cost_grid: Vec<f64>,
    pub folds: usize,
    pub holdout: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub min_matches: usize,
    pub min_events: usize,
    /// Fixed cap for goal normalization; the corpus maximum when unset.
    pub max_goals: Option<u32>,
    pub sample_cap: usize,
    pub silhouette_cap: usize,
    pub keep_goalkeepers: bool,
    pub store_path: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub bind: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let r = RoleFitConfig::default();
        PipelineConfig {
            alpha: 0.0,
            beta: 0.1,
            delta_s: 0.1,
            x_pct: 40.0,
            k_min: r.k_min,
            k_max: r.k_max,
            restarts: r.restarts,
            max_iter: r.max_iter,
            seed: 42,
            cost_grid: t.cost_grid,
            folds: t.folds,
            holdout: t.holdout,
            grid_rows: 10,
            grid_cols: 10,
            min_matches: 10,
            min_events: 3,
            max_goals: None,
            sample_cap: r.sample_cap,
            silhouette_cap: r.silhouette_cap,
            keep_goalkeepers: false,
            store_path: None,
            model_path: None,
            bind: "127.0.0.1:8080".to_string(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Validation(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("delta_s", self.delta_s)?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0..=100.0).contains(&self.x_pct) {
            return bad(format!("x_pct = {} outside [0, 100]", self.x_pct));
        }
        if self.k_min < 2 || self.k_max < self.k_min {
            return bad(format!("k range {}..={} needs 2 <= k_min <= k_max", self.k_min, self.k_max));
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return bad("restarts and max_iter must be positive".into());
        }
        if self.cost_grid.is_empty() || self.cost_grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return bad("cost_grid needs positive finite costs".into());
        }
        if self.folds < 2 {
            return bad(format!("folds = {} must be at least 2", self.folds));
        }
        if !(0.0..1.0).contains(&self.holdout) {
            return bad(format!("holdout = {} outside [0, 1)", self.holdout));
        }
        ZoneTessellation::new(self.grid_rows, self.grid_cols)?;
        if self.min_events == 0 {
            return bad("min_events must be at least 1".into());
        }
        if self.max_goals == Some(0) {
            return bad("max_goals must be at least 1".into());
        }
        if self.sample_cap == 0 || self.silhouette_cap < 2 {
            return bad("sample_cap and silhouette_cap are too small".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> ZoneTessellation {
        ZoneTessellation { rows: self.grid_rows, cols: self.grid_cols }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            cost_grid: self.cost_grid.clone(),
            folds: self.folds,
            holdout: self.holdout,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    pub fn role_config(&self) -> RoleFitConfig {
        RoleFitConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            restarts: self.restarts,
            max_iter: self.max_iter,
            seed: self.seed,
            sample_cap: self.sample_cap,
            silhouette_cap: self.silhouette_cap,
            ..RoleFitConfig::default()
        }
    }

    /// Digest of the settings that shape the learned model.
    pub fn learning_digest(&self) -> String {
        let learning = serde_json::json!({
            "delta_s": self.delta_s,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "restarts": self.restarts,
            "max_iter": self.max_iter,
            "seed": self.seed,
            "cost_grid": self.cost_grid,
            "folds": self.folds,
            "holdout": self.holdout,
            "min_events": self.min_events,
            "max_goals": self.max_goals,
            "sample_cap": self.sample_cap,
            "silhouette_cap": self.silhouette_cap,
            "keep_goalkeepers": self.keep_goalkeepers,
        });
        let digest = Sha256::digest(learning.to_string().as_bytes());
        format!("{digest:x}")[..16].to_string()
    }
}
