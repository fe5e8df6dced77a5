//! TOML run configuration shared by the CLI subcommands.
//!
//! ```toml
//! preset = "table1"            # or an explicit [[parameters]] list
//!
//! [design]
//! kind = "qmc"
//! n = 8192
//! skip = 1
//!
//! [surrogate]
//! nr = 1
//! no = 2
//! q = 1.0
//!
//! [paths]
//! design = "design.csv"
//! outputs = "outputs.csv"
//! model = "model.bin"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::distributions::{table1_space, Parameter, ParameterSpace};
use crate::error::{Error, Result};
use crate::gsa::DEFAULT_VAR_FLOOR;
use crate::multires::QuantileSource;
use crate::qmc::DEFAULT_SKIP;
use crate::surrogate::{Grid, DEFAULT_RCOND};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    #[default]
    Qmc,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    pub kind: DesignKind,
    pub n: usize,
    pub skip: u64,
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            kind: DesignKind::Qmc,
            n: 512,
            skip: DEFAULT_SKIP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub nr: u32,
    pub no: u32,
    pub q: f64,
    pub rcond: f64,
    pub var_floor: f64,
    pub quantiles: QuantileSource,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            nr: 0,
            no: 2,
            q: 1.0,
            rcond: DEFAULT_RCOND,
            var_floor: DEFAULT_VAR_FLOOR,
            quantiles: QuantileSource::Empirical,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub design: Option<PathBuf>,
    pub outputs: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub test_design: Option<PathBuf>,
    pub test_outputs: Option<PathBuf>,
    pub export_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_components")]
    pub components: Vec<String>,
}

fn default_components() -> Vec<String> {
    vec!["y".into()]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Named parameter space; currently only `"table1"`.
    pub preset: Option<String>,
    pub parameters: Vec<Parameter>,
    pub design: DesignConfig,
    pub surrogate: SurrogateConfig,
    pub paths: PathsConfig,
    pub grid: Option<GridConfig>,
}

impl RunConfig {
    /// Checks ranges that do not depend on the invoked subcommand.
    pub fn validate(&self) -> Result<()> {
        let s = &self.surrogate;
        if !(s.q > 0.0 && s.q <= 1.0) {
            return Err(Error::Config(format!("surrogate.q must lie in (0, 1], got {}", s.q)));
        }
        if !(s.rcond >= 0.0 && s.rcond < 1.0) {
            return Err(Error::Config(format!("surrogate.rcond must lie in [0, 1), got {}", s.rcond)));
        }
        if !(s.var_floor >= 0.0) {
            return Err(Error::Config(format!("surrogate.var_floor must be ≥ 0, got {}", s.var_floor)));
        }
        if self.preset.is_some() && !self.parameters.is_empty() {
            return Err(Error::Config("give either `preset` or `parameters`, not both".into()));
        }
        if let Some(p) = &self.preset {
            preset_space(p)?;
        }
        if !self.parameters.is_empty() {
            ParameterSpace::new(self.parameters.clone())?;
        }
        self.grid()?;
        let paths = &self.paths;
        let all = [
            &paths.design,
            &paths.outputs,
            &paths.model,
            &paths.report,
            &paths.reference,
            &paths.metrics,
            &paths.test_design,
            &paths.test_outputs,
            &paths.export_dir,
        ];
        if all.iter().any(|p| p.as_ref().is_some_and(|p| p.as_os_str().is_empty())) {
            return Err(Error::Config("paths must be nonempty".into()));
        }
        Ok(())
    }

    /// The configured parameter space, if any.
    pub fn space(&self) -> Result<Option<ParameterSpace>> {
        if let Some(p) = &self.preset {
            return preset_space(p).map(Some);
        }
        if self.parameters.is_empty() {
            return Ok(None);
        }
        ParameterSpace::new(self.parameters.clone()).map(Some)
    }

    pub fn grid(&self) -> Result<Option<Grid>> {
        self.grid
            .as_ref()
            .map(|g| Grid::new(g.rows, g.cols, g.components.clone()).map_err(|e| Error::Config(e.to_string())))
            .transpose()
    }
}

pub fn preset_space(name: &str) -> Result<ParameterSpace> {
    match name {
        "table1" => Ok(table1_space()),
        other => Err(Error::Config(format!("unknown preset {other:?}"))),
    }
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = parse_config(
            r#"
preset = "table1"

[design]
kind = "qmc"
n = 8192
skip = 1

[surrogate]
nr = 1
no = 2
q = 1.0
var_floor = 1e-10

[paths]
design = "d.csv"
outputs = "y.csv"
model = "m.bin"

[grid]
rows = 100
cols = 100
components = ["u", "v"]
"#,
        )
        .unwrap();
        assert_eq!(cfg.design.n, 8192);
        assert_eq!(cfg.surrogate.nr, 1);
        assert_eq!(cfg.space().unwrap().unwrap().len(), 5);
        assert_eq!(cfg.grid().unwrap().unwrap().cells(), 20_000);
    }

    #[test]
    fn explicit_parameters() {
        let cfg = parse_config(
            r#"
[[parameters]]
name = "a"
kind = "uniform"
lo = 0.0
hi = 2.0

[[parameters]]
name = "b"
kind = "scaled_beta"
shape_a = 2.0
shape_b = 3.0
lo = 0.0
hi = 1.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.space().unwrap().unwrap().names(), vec!["a", "b"]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_config("[surrogate]\nq = 0.0\n").is_err());
        assert!(parse_config("[surrogate]\nq = 1.5\n").is_err());
        assert!(parse_config("preset = \"nope\"\n").is_err());
        assert!(parse_config("[design]\nbogus = 1\n").is_err());
        assert!(parse_config("[paths]\nmodel = \"\"\n").is_err());
        assert!(parse_config("[grid]\nrows = 0\ncols = 3\n").is_err());
        assert!(matches!(parse_config("[design\n"), Err(Error::Config(_))));
    }

    #[test]
    fn defaults_are_valid() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(cfg.space().unwrap().is_none());
    }
}
