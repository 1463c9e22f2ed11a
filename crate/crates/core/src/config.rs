//! Run configuration: UTF-8 `key = value` lines with `#` comments.
//!
//! Every key has a default except `output_dir`; unknown keys are rejected
//! with their line number so typos cannot silently fall back to defaults.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::reconstruct::Anchoring;
use crate::tensor::Dim;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Smooth anisotropic Gaussian-filtered noise.
    Smooth,
    /// Piecewise-constant Voronoi cells.
    Voronoi,
    /// Single centered spherical inclusion.
    Inclusion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Periodic spectral fixed-point solver.
    Spectral,
    /// Bounded-domain finite elements with Dirichlet data.
    Fem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadSet {
    Spherical,
    Deviatoric,
    Both,
}

/// Parsed pipeline configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dimension: Dim,
    /// Grid points per axis.
    pub grid: usize,
    pub contrast: f64,
    pub seed: u64,
    pub generator: GeneratorKind,
    /// Correlation lengths for the smooth generator.
    pub corr_x: f64,
    pub corr_y: f64,
    /// Cell count for the Voronoi generator.
    pub cells: usize,
    /// Inclusion radius in domain units.
    pub radius: f64,
    pub solver: SolverKind,
    /// Relative residual tolerance for both solvers.
    pub tol: f64,
    pub max_iter: usize,
    pub loads: LoadSet,
    /// Bounded-reconstruction anchoring.
    pub anchoring: Anchoring,
    /// Also emit the single-load shear map.
    pub diagnostics: bool,
    /// Nominal mean moduli scaling the generated unit-mean maps.
    pub kappa0: f64,
    pub mu0: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: Dim::Two,
            grid: 128,
            contrast: 0.1,
            seed: 1,
            generator: GeneratorKind::Voronoi,
            corr_x: 0.2,
            corr_y: 0.05,
            cells: 100,
            radius: 0.05,
            solver: SolverKind::Spectral,
            tol: 1e-10,
            max_iter: 10_000,
            loads: LoadSet::Both,
            anchoring: Anchoring::Mean,
            diagnostics: true,
            kappa0: 1.0,
            mu0: 1.0,
            output_dir: PathBuf::new(),
        }
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl RunConfig {
    /// Parses a full config text; `output_dir` must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut saw_output = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if key == "output_dir" {
                saw_output = true;
            }
            config.set_key(key, value.trim(), line)?;
        }
        if !saw_output {
            return Err(bad(0, "missing required key `output_dir`"));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one override, e.g. from a command-line flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_key(key, value, 0)
    }

    fn set_key(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        fn num<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| bad(line, format!("invalid value `{value}` for `{key}`")))
        }
        match key {
            "dimension" => {
                let d: usize = num(value, line, key)?;
                self.dimension = Dim::from_usize(d)
                    .map_err(|_| bad(line, format!("dimension must be 2 or 3, got {d}")))?;
            }
            "grid" => self.grid = num(value, line, key)?,
            "contrast" => self.contrast = num(value, line, key)?,
            "seed" => self.seed = num(value, line, key)?,
            "generator" => {
                self.generator = match value {
                    "smooth" => GeneratorKind::Smooth,
                    "voronoi" => GeneratorKind::Voronoi,
                    "inclusion" => GeneratorKind::Inclusion,
                    _ => return Err(bad(line, format!("unknown generator `{value}`"))),
                }
            }
            "corr_x" => self.corr_x = num(value, line, key)?,
            "corr_y" => self.corr_y = num(value, line, key)?,
            "cells" => self.cells = num(value, line, key)?,
            "radius" => self.radius = num(value, line, key)?,
            "solver" => {
                self.solver = match value {
                    "spectral" => SolverKind::Spectral,
                    "fem" => SolverKind::Fem,
                    _ => return Err(bad(line, format!("unknown solver `{value}`"))),
                }
            }
            "tol" => self.tol = num(value, line, key)?,
            "max_iter" => self.max_iter = num(value, line, key)?,
            "loads" => {
                self.loads = match value {
                    "spherical" => LoadSet::Spherical,
                    "deviatoric" => LoadSet::Deviatoric,
                    "both" => LoadSet::Both,
                    _ => return Err(bad(line, format!("unknown load set `{value}`"))),
                }
            }
            "anchoring" => {
                self.anchoring = match value {
                    "mean" => Anchoring::Mean,
                    "none" => Anchoring::None,
                    _ => return Err(bad(line, format!("unknown anchoring `{value}`"))),
                }
            }
            "diagnostics" => {
                self.diagnostics = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(bad(line, format!("expected true/false, got `{value}`"))),
                }
            }
            "kappa0" => self.kappa0 = num(value, line, key)?,
            "mu0" => self.mu0 = num(value, line, key)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(bad(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Range and compatibility checks, reported as line-0 config errors.
    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 {
            return Err(bad(0, "grid must be at least 4"));
        }
        // Zero contrast means uniform maps; the generators themselves
        // require c > 0, so the pipeline special-cases it.
        if !(self.contrast >= 0.0 && self.contrast <= 1.0) {
            return Err(bad(0, "contrast must lie in [0, 1]"));
        }
        if self.tol <= 0.0 {
            return Err(bad(0, "tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(bad(0, "max_iter must be positive"));
        }
        if self.cells < 2 {
            return Err(bad(0, "cells must be at least 2"));
        }
        if !(self.radius > 0.0 && self.radius < 0.5) {
            return Err(bad(0, "radius must lie in (0, 0.5)"));
        }
        if self.corr_x <= 0.0 || self.corr_y <= 0.0 {
            return Err(bad(0, "correlation lengths must be positive"));
        }
        if self.kappa0 <= 0.0 || self.mu0 <= 0.0 {
            return Err(bad(0, "reference moduli must be positive"));
        }
        if self.solver == SolverKind::Fem && self.dimension != Dim::Two {
            return Err(bad(0, "the fem solver supports dimension = 2 only"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(bad(0, "missing required key `output_dir`"));
        }
        Ok(())
    }
}
