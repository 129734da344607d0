//! Direct solution of the oscillatory problems on an eps-resolving grid.
//!
//! Uses the same Nystrom machinery as the slow solves, so expansion and
//! reference share one notion of outgoing radiation.

use std::f64::consts::PI;

use crate::cell::PeriodicCell;
use crate::error::{Error, Result};
use crate::grid::{SlowField, SlowGrid};
use crate::potential::TwoScalePotential;
use crate::solver::{Amplitude, RadiatingSolver};

/// Minimum samples per fast period and per wavelength.
pub const MIN_POINTS_PER_PERIOD: f64 = 10.0;

/// Samples per period used when the caller does not choose.
pub const DEFAULT_POINTS_PER_PERIOD: f64 = 16.0;

/// Default bound on the number of dense unknowns.
pub const DEFAULT_MAX_UNKNOWNS: usize = 20_000;

/// `min(eps L_min, 2 pi / sqrt(E)) / points_per_period`.
pub fn fine_spacing(eps: f64, cell: &PeriodicCell, energy: f64, points_per_period: f64) -> f64 {
    let wavelength = 2.0 * PI / energy.sqrt();
    (eps * cell.min_period()).min(wavelength) / points_per_period
}

/// Fine grid on `[-X, X]` meeting the resolution rule with `points_per_period`.
pub fn fine_grid(
    half_width: f64,
    eps: f64,
    cell: &PeriodicCell,
    energy: f64,
    points_per_period: f64,
) -> Result<SlowGrid> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if points_per_period < MIN_POINTS_PER_PERIOD {
        return Err(Error::GridTooCoarse(format!(
            "{points_per_period} points per period is below the minimum {MIN_POINTS_PER_PERIOD}"
        )));
    }
    SlowGrid::with_max_spacing(half_width, fine_spacing(eps, cell, energy, points_per_period))
}

/// Fails unless `grid` has at least ten points per fast period and per wavelength.
pub fn check_resolution(grid: &SlowGrid, eps: f64, cell: &PeriodicCell, energy: f64) -> Result<()> {
    let limit = fine_spacing(eps, cell, energy, MIN_POINTS_PER_PERIOD);
    if grid.spacing() > limit * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse(format!(
            "spacing {:.3e} exceeds {:.3e} required at eps = {eps}",
            grid.spacing(),
            limit
        )));
    }
    Ok(())
}

/// `q(x_i, x_i / eps)` on `fine`: slow dependence interpolated, fast summed exactly.
pub fn assemble_oscillatory_potential(q: &TwoScalePotential, eps: f64, fine: &SlowGrid) -> Result<SlowField> {
    check_resolution(fine, eps, q.cell(), 1e-300)?;
    let values = fine
        .nodes()
        .map(|x| q.value(x, x / eps).map(|v| num_complex::Complex64::new(v, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    SlowField::new(*fine, values)
}

/// Factored fine-grid problem for one `(q, eps, E)`.
#[derive(Debug, Clone)]
pub struct DirectProblem {
    eps: f64,
    solver: RadiatingSolver,
    potential: SlowField,
}

impl DirectProblem {
    pub fn new(q: &TwoScalePotential, eps: f64, energy: f64, fine: &SlowGrid, max_unknowns: usize) -> Result<Self> {
        check_resolution(fine, eps, q.cell(), energy)?;
        let potential = assemble_oscillatory_potential(q, eps, fine)?;
        let solver = RadiatingSolver::with_cap(&potential, energy, max_unknowns)?;
        Ok(Self { eps, solver, potential })
    }

    /// Default grid: same half-width as `q`'s slow grid, default sampling.
    pub fn with_defaults(q: &TwoScalePotential, eps: f64, energy: f64) -> Result<Self> {
        let fine = fine_grid(q.grid().half_width(), eps, q.cell(), energy, DEFAULT_POINTS_PER_PERIOD)?;
        Self::new(q, eps, energy, &fine, DEFAULT_MAX_UNKNOWNS)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn grid(&self) -> &SlowGrid {
        self.solver.grid()
    }

    pub fn unknowns(&self) -> usize {
        self.solver.unknowns()
    }

    pub fn potential(&self) -> &SlowField {
        &self.potential
    }

    pub fn solver(&self) -> &RadiatingSolver {
        &self.solver
    }

    /// Field and far-field coefficient for a source given on any grid covering the fine one.
    pub fn solve_source(&self, f: &SlowField) -> Result<(SlowField, Amplitude)> {
        let f = f.resample(self.grid())?;
        let psi = self.solver.solve_source(&f)?;
        let amp = self.solver.far_field_source(&f, &psi)?;
        Ok((psi, amp))
    }

    /// Total field and scattering amplitude for an incident plane wave.
    pub fn solve_plane_wave(&self, direction: f64) -> Result<(SlowField, Amplitude)> {
        let chi = self.solver.solve_plane_wave(direction)?;
        let amp = self.solver.far_field_plane_wave(direction, &chi)?;
        Ok((chi, amp))
    }
}

/// Direct solution of `(H_eps - E) psi = f` with outgoing radiation.
pub fn direct_solve_source(
    q: &TwoScalePotential,
    eps: f64,
    f: &SlowField,
    energy: f64,
) -> Result<(SlowField, Amplitude)> {
    DirectProblem::with_defaults(q, eps, energy)?.solve_source(f)
}

/// Direct solution of the plane-wave problem `(H_eps - E) chi = 0`.
pub fn direct_solve_plane_wave(
    q: &TwoScalePotential,
    eps: f64,
    direction: f64,
    energy: f64,
) -> Result<(SlowField, Amplitude)> {
    DirectProblem::with_defaults(q, eps, energy)?.solve_plane_wave(direction)
}
