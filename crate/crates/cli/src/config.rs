use std::path::{Path, PathBuf};

use klfactor::{io, Result};
use serde::Deserialize;

/// Settings read from `--config`; any flag given on the command line wins.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub grid_step: Option<i64>,
    pub fill: Option<String>,
    pub day_offset_steps: Option<i64>,
    pub delta: Option<f64>,
    pub weight: Option<String>,
    pub method: Option<String>,
    pub methods: Option<String>,
    pub window: Option<usize>,
    pub horizon_days: Option<usize>,
    pub level: Option<f64>,
    pub aue_refit: Option<String>,
    pub k: Option<usize>,
    pub estimator: Option<String>,
    pub penalty: Option<String>,
    pub n_forecasts: Option<usize>,
    pub window_search: Option<String>,
    pub days: Option<usize>,
    pub burn_in: Option<usize>,
    pub max_lag: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        io::read_json(path).map_err(|e| match e {
            klfactor::Error::Parse(m) => klfactor::Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
