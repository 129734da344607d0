//! Experiment configuration: one JSON document, validated before any solve.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::{CellSpectrum, PeriodicCell};
use crate::error::{Error, Result};
use crate::grid::{SlowField, SlowGrid};
use crate::metrics::NormSpec;
use crate::potential::{bump, TwoScalePotential};
use crate::reference::MIN_POINTS_PER_PERIOD;

/// Version of the configuration and result layout.
pub const SCHEMA_VERSION: u32 = 1;

/// `a(x) b(y)` with `a` the bump `A exp(-1 / (1 - (x/R)^2))` and
/// `b(y) = sum_m cosines[m] cos(2 pi m y / L) + sines[m] sin(2 pi m y / L)`
/// (entry 0 of `cosines` is the mean, entry 0 of `sines` is ignored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub amplitude: f64,
    pub radius: f64,
    pub cosines: Vec<f64>,
    #[serde(default)]
    pub sines: Vec<f64>,
    pub max_mode: usize,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            amplitude: 5.0,
            radius: 1.0,
            cosines: vec![1.0, 1.0, 0.5],
            sines: Vec::new(),
            max_mode: 8,
        }
    }
}

/// Source `f(x) = A exp(-1 / (1 - (x/R)^2))` for the source problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub amplitude: f64,
    pub radius: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Computational window `[-X, X]`.
    pub half_width: f64,
    /// Nodes of the slow grid carrying the expansion.
    pub slow_nodes: usize,
    /// Fine-grid samples per fast period and per wavelength.
    pub points_per_period: f64,
    /// Cap on dense unknowns of one direct solve.
    pub max_unknowns: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 4.0,
            slow_nodes: 2001,
            points_per_period: 16.0,
            max_unknowns: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub stem: String,
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stem: "oscatter".into(),
            svg: true,
        }
    }
}

fn default_cell_period() -> f64 {
    1.0
}

fn default_energy() -> f64 {
    1.0
}

fn default_directions() -> Vec<f64> {
    vec![1.0, -1.0]
}

fn default_order() -> usize {
    2
}

fn default_eps() -> Vec<f64> {
    vec![0.1, 0.07, 0.05, 0.035, 0.025]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default = "default_cell_period")]
    pub cell_period: f64,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default = "default_energy")]
    pub energy: f64,
    /// Incident directions `kappa^ in {+1, -1}`.
    #[serde(default = "default_directions")]
    pub directions: Vec<f64>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Worker threads; `None` leaves the choice to the caller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            potential: PotentialSpec::default(),
            cell_period: default_cell_period(),
            source: SourceSpec::default(),
            energy: default_energy(),
            directions: default_directions(),
            order: default_order(),
            eps: default_eps(),
            grid: GridSpec::default(),
            norm: NormSpec::default(),
            output: OutputSpec::default(),
            jobs: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = &self.potential;
        if !p.amplitude.is_finite() {
            return Err(invalid("potential amplitude must be a finite real"));
        }
        if !(p.radius > 0.0) || p.radius >= self.grid.half_width {
            return Err(invalid(format!(
                "potential radius {} must lie in (0, half_width = {})",
                p.radius, self.grid.half_width
            )));
        }
        if p.cosines.is_empty() || p.cosines.len().max(p.sines.len()) > p.max_mode + 1 {
            return Err(invalid(format!(
                "{} cosine / {} sine coefficients do not fit max_mode {}",
                p.cosines.len(),
                p.sines.len(),
                p.max_mode
            )));
        }
        if p.cosines.iter().chain(&p.sines).any(|c| !c.is_finite()) {
            return Err(invalid("fast coefficients must be finite"));
        }
        if !(self.cell_period > 0.0) || !self.cell_period.is_finite() {
            return Err(invalid(format!("cell period {} must be positive", self.cell_period)));
        }
        let s = &self.source;
        if !s.amplitude.is_finite() || !(s.radius > 0.0) || s.radius >= self.grid.half_width {
            return Err(invalid(format!(
                "source amplitude {} / radius {} invalid for half_width {}",
                s.amplitude, s.radius, self.grid.half_width
            )));
        }
        if !(self.energy > 0.0) || !self.energy.is_finite() {
            return Err(invalid(format!("energy {} must be positive", self.energy)));
        }
        if self.directions.is_empty() || self.directions.iter().any(|&d| d != 1.0 && d != -1.0) {
            return Err(invalid("directions must be a non-empty list drawn from {+1, -1}"));
        }
        if self.order > crate::expansion::MAX_ORDER {
            return Err(invalid(format!(
                "order {} exceeds {}",
                self.order,
                crate::expansion::MAX_ORDER
            )));
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e <= 0.5)) {
            return Err(invalid("every eps must lie in (0, 0.5]"));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("eps list must be strictly decreasing"));
        }
        let g = &self.grid;
        if !(g.half_width > 0.0) || !g.half_width.is_finite() || g.slow_nodes < 15 {
            return Err(invalid(format!(
                "grid half_width {} / slow_nodes {} invalid",
                g.half_width, g.slow_nodes
            )));
        }
        if !(g.points_per_period >= MIN_POINTS_PER_PERIOD) {
            return Err(invalid(format!(
                "points_per_period {} below {MIN_POINTS_PER_PERIOD}",
                g.points_per_period
            )));
        }
        NormSpec::new(self.norm.s, self.norm.gamma, self.norm.window).map_err(|e| invalid(e.to_string()))?;
        if self.norm.window > g.half_width {
            return Err(invalid(format!(
                "norm window {} exceeds half_width {}",
                self.norm.window, g.half_width
            )));
        }
        if self.output.stem.is_empty() || self.output.stem.contains(['/', '\\']) {
            return Err(invalid(format!(
                "output stem {:?} is not a plain file name",
                self.output.stem
            )));
        }
        if self.jobs == Some(0) {
            return Err(invalid("jobs must be at least 1"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the configuration with the parallelism degree removed,
    /// so runs that must agree share a hash.
    pub fn hash(&self) -> String {
        let canonical = Self {
            jobs: None,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn slow_grid(&self) -> Result<SlowGrid> {
        SlowGrid::new(self.grid.half_width, self.grid.slow_nodes)
    }

    pub fn cell(&self) -> Result<PeriodicCell> {
        PeriodicCell::new(vec![self.cell_period])
    }

    pub fn fast_profile(&self) -> Result<CellSpectrum> {
        let p = &self.potential;
        CellSpectrum::from_trig(self.cell()?, p.max_mode, &p.cosines, &p.sines)
    }

    pub fn build_potential(&self) -> Result<TwoScalePotential> {
        let p = &self.potential;
        let (amplitude, radius) = (p.amplitude, p.radius);
        TwoScalePotential::separable(
            self.slow_grid()?,
            radius,
            |x| bump(amplitude, radius, x),
            &self.fast_profile()?,
        )
    }

    pub fn build_source(&self) -> Result<SlowField> {
        let s = &self.source;
        Ok(SlowField::from_real_fn(self.slow_grid()?, |x| {
            bump(s.amplitude, s.radius, x)
        }))
    }
}
