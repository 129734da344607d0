//! ε-sweeps of the asymptotic expansion against direct fine-grid solves.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{
    amplitude_partial_sum, amplitude_series, discrepancy_on, evaluate_on, expand_plane_wave, expand_source,
    AsymptoticSolution,
};
use crate::harness::config::ExperimentConfig;
use crate::metrics::{fit_rate, sup_norm, weighted_sobolev_norm, RateFit};
use crate::reference::{fine_grid, DirectProblem};

/// Accuracy floor of the direct solver; errors near it are noise.
pub const SOLVER_FLOOR: f64 = 1e-8;

/// Only errors above this multiple of [`SOLVER_FLOOR`] enter a rate fit.
pub const FIT_FLOOR_FACTOR: f64 = 10.0;

/// Largest admissible `|t|^2 + |r|^2 - 1` of a direct amplitude.
pub const FLUX_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Source,
    Amplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// Error columns are fitted and plotted; the rest are diagnostics.
    pub error: bool,
}

impl Column {
    fn error(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            error: true,
        }
    }

    fn info(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            error: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    /// One value per entry of [`SweepResult::columns`].
    pub values: Vec<f64>,
    /// Wall-clock seconds; reported in the JSON result only.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FitStatus {
    Fitted(RateFit),
    /// `q` does not depend on `y`: the expansion is exact and errors are pure solver noise.
    ExactCase,
    /// Fewer than three samples above the fit floor.
    Insufficient {
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnFit {
    pub column: String,
    #[serde(flatten)]
    pub status: FitStatus,
    /// ε values whose error was at or below the fit floor.
    pub below_floor: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub potential_sha256: String,
    pub code_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub exact_case: bool,
    pub columns: Vec<Column>,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<ColumnFit>,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// `(eps, value)` pairs of one column.
    pub fn series(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| (r.eps, r.values[i])).collect())
    }

    pub fn fit(&self, name: &str) -> Option<&ColumnFit> {
        self.fits.iter().find(|f| f.column == name)
    }

    /// Error columns at or below the fit floor in `row`.
    pub fn below_floor(&self, row: &SweepRow) -> Vec<&str> {
        self.columns
            .iter()
            .zip(&row.values)
            .filter(|(c, v)| c.error && !above_floor(**v))
            .map(|(c, _)| c.name.as_str())
            .collect()
    }
}

fn above_floor(v: f64) -> bool {
    v > FIT_FLOOR_FACTOR * SOLVER_FLOOR
}

/// Fits every error column on the rows above the floor.
pub fn fit_columns(columns: &[Column], rows: &[SweepRow], exact_case: bool) -> Vec<ColumnFit> {
    columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.error)
        .map(|(i, c)| {
            let (kept, dropped): (Vec<_>, Vec<_>) = rows
                .iter()
                .map(|r| (r.eps, r.values[i]))
                .partition(|&(_, v)| above_floor(v));
            let status = if exact_case {
                FitStatus::ExactCase
            } else {
                match fit_rate(&kept) {
                    Ok(fit) => FitStatus::Fitted(fit),
                    Err(_) => FitStatus::Insufficient { samples: kept.len() },
                }
            };
            ColumnFit {
                column: c.name.clone(),
                status,
                below_floor: dropped.into_iter().map(|(e, _)| e).collect(),
            }
        })
        .collect()
}

/// Runs `task` over `eps` with `jobs` workers; output order follows `eps`.
fn map_eps<T: Send>(eps: &[f64], jobs: usize, task: impl Fn(f64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        pool.install(|| eps.par_iter().map(|&e| task(e)).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        eps.iter().map(|&e| task(e)).collect()
    }
}

fn direct_problem(cfg: &ExperimentConfig, q: &crate::potential::TwoScalePotential, eps: f64) -> Result<DirectProblem> {
    let fine = fine_grid(
        cfg.grid.half_width,
        eps,
        q.cell(),
        cfg.energy,
        cfg.grid.points_per_period,
    )?;
    DirectProblem::new(q, eps, cfg.energy, &fine, cfg.grid.max_unknowns)
}

fn provenance(cfg: &ExperimentConfig, q: &crate::potential::TwoScalePotential) -> Provenance {
    Provenance {
        config_sha256: cfg.hash(),
        potential_sha256: q.fingerprint(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn finish(
    kind: SweepKind,
    cfg: &ExperimentConfig,
    q: &crate::potential::TwoScalePotential,
    columns: Vec<Column>,
    rows: Vec<SweepRow>,
) -> SweepResult {
    let exact_case = q.is_y_independent();
    let fits = fit_columns(&columns, &rows, exact_case);
    SweepResult {
        kind,
        config: cfg.clone(),
        provenance: provenance(cfg, q),
        exact_case,
        columns,
        rows,
        fits,
    }
}

fn source_columns(cfg: &ExperimentConfig) -> Vec<Column> {
    let mut cols = vec![Column::info("fine_nodes"), Column::info("unknowns")];
    for k in 0..=cfg.order {
        cols.push(Column::error(format!("err_h0_p{k}")));
        if cfg.norm.s > 0 {
            cols.push(Column::error(format!("err_h{}_p{k}", cfg.norm.s)));
        }
        cols.push(Column::error(format!("err_sup_p{k}")));
    }
    for k in 2..=cfg.order {
        cols.push(Column::error(format!("disc_sup_p{k}")));
    }
    cols
}

fn truncated(sol: &AsymptoticSolution, order: usize) -> AsymptoticSolution {
    let mut out = sol.clone();
    out.terms.truncate(order + 1);
    out
}

/// Field errors `psi_eps - Psi^(k)` for `k = 0..=p` and discrepancy norms over the ε list.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let q = cfg.build_potential()?;
    let f = cfg.build_source()?;
    let sol = expand_source(&q, &f, cfg.energy, cfg.order)?;
    let partials: Vec<AsymptoticSolution> = (0..=cfg.order).map(|k| truncated(&sol, k)).collect();
    let norm = cfg.norm;
    let window = norm.window;

    let rows = map_eps(&cfg.eps, cfg.jobs.unwrap_or(1), |eps| {
        let start = Instant::now();
        let direct = direct_problem(cfg, &q, eps)?;
        let fine = *direct.grid();
        let (psi, _) = direct.solve_source(&f)?;
        let mut values = vec![fine.len() as f64, direct.unknowns() as f64];
        for k in 0..=cfg.order {
            let err = psi.try_sub(&evaluate_on(&sol, k, eps, &fine)?)?;
            values.push(weighted_sobolev_norm(&err, &norm.with_s(0))?);
            if norm.s > 0 {
                values.push(weighted_sobolev_norm(&err, &norm)?);
            }
            values.push(sup_norm(&err, window));
        }
        for partial in &partials[2.min(partials.len())..] {
            values.push(sup_norm(&discrepancy_on(partial, eps, &fine)?, window));
        }
        Ok(SweepRow {
            eps,
            values,
            seconds: start.elapsed().as_secs_f64(),
        })
    })?;
    Ok(finish(SweepKind::Source, cfg, &q, source_columns(cfg), rows))
}

fn sign_label(d: f64) -> &'static str {
    if d > 0.0 {
        "p"
    } else {
        "m"
    }
}

fn amplitude_columns(cfg: &ExperimentConfig, outgoing: &[f64]) -> Vec<Column> {
    let mut cols = vec![Column::info("fine_nodes"), Column::info("flux_defect")];
    for k in 0..=cfg.order {
        cols.push(Column::error(format!("amp_sup_p{k}")));
    }
    for &inc in &cfg.directions {
        for &out in outgoing {
            cols.push(Column::error(format!(
                "amp_p{}_in{}_out{}",
                cfg.order,
                sign_label(inc),
                sign_label(out)
            )));
        }
    }
    cols
}

/// Amplitude errors `|F_eps - sum_{n <= k} eps^n F^_n|`, sup over direction pairs.
pub fn run_amplitude_table(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let q = cfg.build_potential()?;
    let series = cfg
        .directions
        .iter()
        .map(|&d| amplitude_series(&expand_plane_wave(&q, d, cfg.energy, cfg.order)?))
        .collect::<Result<Vec<_>>>()?;
    let outgoing = series[0][0].directions.clone();

    let rows = map_eps(&cfg.eps, cfg.jobs.unwrap_or(1), |eps| {
        let start = Instant::now();
        let direct = direct_problem(cfg, &q, eps)?;
        let mut flux: f64 = 0.0;
        let mut sup = vec![0.0f64; cfg.order + 1];
        let mut pairs = Vec::new();
        for (&inc, terms) in cfg.directions.iter().zip(&series) {
            let (_, amp) = direct.solve_plane_wave(inc)?;
            let defect = amp.flux_defect().unwrap_or(f64::NAN).abs();
            if !(defect <= FLUX_TOL) {
                return Err(Error::FluxDefect { defect, tol: FLUX_TOL });
            }
            flux = flux.max(defect);
            for (k, s) in sup.iter_mut().enumerate() {
                let partial = amplitude_partial_sum(terms, k, eps);
                for (a, b) in amp.values.iter().zip(&partial.values) {
                    *s = s.max((a - b).norm());
                }
            }
            let full = amplitude_partial_sum(terms, cfg.order, eps);
            for &out in &outgoing {
                let a = amp.value(out).ok_or(Error::WrongProblemKind)?;
                let b = full.value(out).ok_or(Error::WrongProblemKind)?;
                pairs.push((a - b).norm());
            }
        }
        let mut values = vec![direct.grid().len() as f64, flux];
        values.extend(sup);
        values.extend(pairs);
        Ok(SweepRow {
            eps,
            values,
            seconds: start.elapsed().as_secs_f64(),
        })
    })?;
    Ok(finish(
        SweepKind::Amplitude,
        cfg,
        &q,
        amplitude_columns(cfg, &outgoing),
        rows,
    ))
}
