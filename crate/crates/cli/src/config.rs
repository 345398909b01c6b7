//! Run configuration, read from TOML.
//!
//! ```toml
//! [grid]
//! mode = "axisym"     # or "s2" (n = 3 only)
//! n = 4
//! resolution = 64
//!
//! [shape]
//! kind = "perturbed_sphere"
//! r0 = 1.0
//! epsilon = 0.05
//! harmonics = [{ degree = 2 }]
//!
//! [flow]
//! dt = 1e-3
//! t_end = 2.0
//! sample_every = 10
//!
//! [sweep]
//! radii = [0.5, 1.0]
//! amplitudes = [0.0, 0.05, 0.1]
//! dims = [3, 4]
//! degree = 2
//! ```

use std::path::Path;
use std::sync::Arc;

use imcf_core::{build_grid, FlowConfig, GridMode, ShapeSpec, SphereGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_mode")]
    pub mode: GridMode,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            n: default_n(),
            resolution: default_resolution(),
        }
    }
}

fn default_mode() -> GridMode {
    GridMode::Axisymmetric
}

fn default_n() -> usize {
    3
}

fn default_resolution() -> usize {
    64
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub dims: Vec<usize>,
    /// Degree of the zonal harmonic perturbing each sphere.
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Overrides `flow.t_end` for sweep cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

fn default_degree() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_shape")]
    pub shape: ShapeSpec,
    #[serde(default = "default_flow")]
    pub flow: FlowConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            shape: default_shape(),
            flow: default_flow(),
            sweep: SweepConfig::default(),
        }
    }
}

fn default_shape() -> ShapeSpec {
    ShapeSpec::perturbed(1.0, 0.05, 2)
}

fn default_flow() -> FlowConfig {
    FlowConfig::new(1e-3, 2.0).sample_every(10)
}

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    pub mode: Option<GridMode>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    /// Reads `path`, returning the parsed config together with its verbatim text.
    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.shape.seed = seed;
        }
        if let Some(res) = o.resolution {
            self.grid.resolution = res;
        }
        if let Some(mode) = o.mode {
            self.grid.mode = mode;
        }
        if let Some(n) = o.n {
            self.grid.n = n;
            self.sweep.dims = vec![n];
        }
        if let Some(t_end) = o.t_end {
            self.flow.t_end = t_end;
            self.sweep.t_end = None;
        }
        if let Some(dt) = o.dt {
            self.flow.dt = dt;
        }
    }

    /// Checks everything that can be checked without running the flow.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.shape.validate(self.grid.mode)?;
        self.flow.validate()?;
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !finite(&self.sweep.radii) || !finite(&self.sweep.amplitudes) {
            return Err(CliError::Config("sweep radii and amplitudes must be finite".into()));
        }
        if let Some(t) = self.sweep.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("sweep.t_end must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<SphereGrid>, CliError> {
        Ok(Arc::new(build_grid(self.grid.mode, self.grid.n, self.grid.resolution)?))
    }

    /// The configuration after overrides, as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}
