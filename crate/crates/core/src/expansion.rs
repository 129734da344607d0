//! Formal two-scale solution `Psi(x, y, eps) = sum_n eps^n (phi_n(x, y) + psi_n(x))`.
//!
//! Substituting `psi(x) = Psi(x, x / eps)` into `(H_eps - E) psi = f` and
//! collecting powers of `eps` gives, for every order `n`,
//!
//! ```text
//! Delta_y phi_n = -2 d_x d_y phi_{n-1}
//!                 + (-d_x^2 + q - E) phi_{n-2} + (q - q^) psi_{n-2} - <q phi_{n-2}>
//! (H^ - E) psi_n = delta_{n0} f - <q phi_n>
//! ```
//!
//! where `<.>` is the cell mean and `H^ = -d_x^2 + q^`. The right-hand side
//! of the cell problem has zero mean by construction once `psi_{n-2}` solves
//! its slow equation. The plane-wave problem uses the same recurrence with
//! `f = 0` and `psi_0` the averaged total field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cell::{cell_gradient, cell_product, solve_cell_poisson_with_tol, CellSpectrum, DEFAULT_TOL_MEAN};
use crate::error::{Error, Result};
use crate::grid::{SlowDerivative, SlowField, SlowGrid};
use crate::potential::{average_potential, interpolate_spectra, TwoScalePotential};
use crate::reference::{check_resolution, fine_grid, DEFAULT_POINTS_PER_PERIOD};
use crate::solver::{Amplitude, RadiatingSolver};

/// Highest expansion order built by default.
pub const MAX_ORDER: usize = 4;

/// Cell right-hand sides must have `|mean| <= SOLVABILITY_REL * max|coeff|`.
pub const SOLVABILITY_REL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Problem {
    Source { source: SlowField },
    PlaneWave { direction: f64 },
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Source { .. } => "source",
            Problem::PlaneWave { .. } => "plane-wave",
        }
    }
}

/// `Psi_n = phi_n + psi_n` with `phi_n` zero-mean in `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub order: usize,
    pub phi: Vec<CellSpectrum>,
    pub psi: SlowField,
    /// `F^_n` for plane-wave expansions.
    pub amplitude: Option<Amplitude>,
}

impl ExpansionTerm {
    pub fn phi_is_zero(&self) -> bool {
        self.phi.iter().all(|s| s.max_abs() == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.phi_is_zero() && self.psi.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSolution {
    pub problem: Problem,
    pub energy: f64,
    pub potential: TwoScalePotential,
    pub averaged: SlowField,
    pub terms: Vec<ExpansionTerm>,
    /// Largest `|mean| / max|coeff|` over all cell right-hand sides.
    pub worst_cell_mean: f64,
}

impl AsymptoticSolution {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn grid(&self) -> &SlowGrid {
        self.averaged.grid()
    }
}

/// Apply a slow derivative coefficient-wise to a spectrum-valued field.
fn slow_derivative_spectra(d: &SlowDerivative, spectra: &[CellSpectrum]) -> Vec<CellSpectrum> {
    let mut out = spectra.to_vec();
    let width = spectra[0].coeffs().len();
    let mut column = vec![ZERO; spectra.len()];
    for c in 0..width {
        if spectra.iter().all(|s| s.coeffs()[c].norm_sqr() == 0.0) {
            continue;
        }
        for (v, s) in column.iter_mut().zip(spectra) {
            *v = s.coeffs()[c];
        }
        for (o, v) in out.iter_mut().zip(d.apply(&column)) {
            o.coeffs_mut()[c] = v;
        }
    }
    out
}

fn zero_spectra(q: &TwoScalePotential) -> Vec<CellSpectrum> {
    vec![CellSpectrum::zeros(q.cell().clone(), q.max_mode()); q.grid().len()]
}

/// Builds terms `0..=order` given the slow solution `psi_0`.
struct Recurrence<'a> {
    q: &'a TwoScalePotential,
    averaged: SlowField,
    solver: RadiatingSolver,
    d1: SlowDerivative,
    d2: SlowDerivative,
    energy: f64,
    worst_mean: f64,
}

impl<'a> Recurrence<'a> {
    fn new(q: &'a TwoScalePotential, energy: f64) -> Result<Self> {
        let averaged = average_potential(q);
        let solver = RadiatingSolver::new(&averaged, energy)?;
        Ok(Self {
            q,
            d1: SlowDerivative::new(q.grid(), 1)?,
            d2: SlowDerivative::new(q.grid(), 2)?,
            averaged,
            solver,
            energy,
            worst_mean: 0.0,
        })
    }

    /// Right-hand side of the cell problem for order `n >= 2`.
    fn cell_rhs(&self, prev: &ExpansionTerm, prev2: &ExpansionTerm) -> Result<Vec<CellSpectrum>> {
        let grid = self.q.grid();
        let radius = self.q.radius();
        let e = Complex64::new(self.energy, 0.0);
        let mut rhs = zero_spectra(self.q);

        // -2 d_x d_y phi_{n-1}
        if !prev.phi_is_zero() {
            let dx = slow_derivative_spectra(&self.d1, &prev.phi);
            for (r, s) in rhs.iter_mut().zip(&dx) {
                *r = &*r + &cell_gradient(s)[0].scale(Complex64::new(-2.0, 0.0));
            }
        }
        // (-d_x^2 + q - E) phi_{n-2} - <q phi_{n-2}>
        if !prev2.phi_is_zero() {
            let dxx = slow_derivative_spectra(&self.d2, &prev2.phi);
            for i in 0..grid.len() {
                let mut qphi = cell_product(&self.q.spectra()[i], &prev2.phi[i])?;
                let mean_idx = qphi.coeffs().len() / 2;
                qphi.coeffs_mut()[mean_idx] = ZERO;
                let term = &(&qphi - &dxx[i]) - &prev2.phi[i].scale(e);
                rhs[i] = &rhs[i] + &term;
            }
        }
        // (q - q^) psi_{n-2}
        if !prev2.psi.is_zero() {
            for (i, r) in rhs.iter_mut().enumerate() {
                let mut fluct = self.q.spectra()[i].clone();
                let mean_idx = fluct.coeffs().len() / 2;
                fluct.coeffs_mut()[mean_idx] = ZERO;
                *r = &*r + &fluct.scale(prev2.psi.values()[i]);
            }
        }
        for (x, r) in grid.nodes().zip(rhs.iter_mut()) {
            if x.abs() >= radius {
                *r = CellSpectrum::zeros(r.cell().clone(), r.max_mode());
            }
        }
        Ok(rhs)
    }

    fn solve_cells(&mut self, rhs: &[CellSpectrum]) -> Result<Vec<CellSpectrum>> {
        rhs.iter()
            .map(|g| {
                let scale = g.max_abs();
                let mean = g.mean().norm();
                if scale > 0.0 {
                    self.worst_mean = self.worst_mean.max(mean / scale);
                }
                solve_cell_poisson_with_tol(g, DEFAULT_TOL_MEAN.max(SOLVABILITY_REL * scale))
            })
            .collect()
    }

    /// `-<q phi_n>` at every node.
    fn slow_rhs(&self, phi: &[CellSpectrum]) -> Result<SlowField> {
        let values = self
            .q
            .spectra()
            .iter()
            .zip(phi)
            .map(|(q, p)| Ok(-cell_product(q, p)?.mean()))
            .collect::<Result<Vec<_>>>()?;
        SlowField::new(*self.q.grid(), values)
    }

    fn build(
        mut self,
        problem: Problem,
        order: usize,
        psi0: SlowField,
        amp0: Option<Amplitude>,
    ) -> Result<AsymptoticSolution> {
        let grid = *self.q.grid();
        let plane_wave = matches!(problem, Problem::PlaneWave { .. });
        let mut terms = vec![ExpansionTerm {
            order: 0,
            phi: zero_spectra(self.q),
            psi: psi0,
            amplitude: amp0,
        }];
        for n in 1..=order {
            let phi = if n == 1 {
                // -2 d_x d_y phi_0 = 0 and nothing at order n - 2.
                zero_spectra(self.q)
            } else {
                let rhs = self.cell_rhs(&terms[n - 1], &terms[n - 2])?;
                self.solve_cells(&rhs)?
            };
            let rhs = self.slow_rhs(&phi)?;
            let (psi, mut amplitude) = if rhs.is_zero() {
                let psi = SlowField::zeros(grid);
                let amp = plane_wave
                    .then(|| self.solver.far_field_source(&rhs, &psi))
                    .transpose()?;
                (psi, amp)
            } else {
                let psi = self.solver.solve_source(&rhs)?;
                let amp = plane_wave
                    .then(|| self.solver.far_field_source(&rhs, &psi))
                    .transpose()?;
                (psi, amp)
            };
            if let (Some(a), Problem::PlaneWave { direction }) = (amplitude.as_mut(), &problem) {
                a.incident = Some(*direction);
            }
            terms.push(ExpansionTerm {
                order: n,
                phi,
                psi,
                amplitude,
            });
        }
        Ok(AsymptoticSolution {
            problem,
            energy: self.energy,
            potential: self.q.clone(),
            averaged: self.averaged,
            terms,
            worst_cell_mean: self.worst_mean,
        })
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "expansion order {order} exceeds maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// Terms `0..=order` of the expansion for the source problem `(H_eps - E) psi = f`.
pub fn expand_source(q: &TwoScalePotential, f: &SlowField, energy: f64, order: usize) -> Result<AsymptoticSolution> {
    check_order(order)?;
    if f.grid() != q.grid() {
        return Err(Error::GridMismatch);
    }
    let rec = Recurrence::new(q, energy)?;
    let psi0 = rec.solver.solve_source(f)?;
    rec.build(Problem::Source { source: f.clone() }, order, psi0, None)
}

/// Terms `0..=order` for the plane wave `exp(i sqrt(E) direction x)`.
pub fn expand_plane_wave(
    q: &TwoScalePotential,
    direction: f64,
    energy: f64,
    order: usize,
) -> Result<AsymptoticSolution> {
    check_order(order)?;
    let rec = Recurrence::new(q, energy)?;
    let chi0 = rec.solver.solve_plane_wave(direction)?;
    let amp0 = rec.solver.far_field_plane_wave(direction, &chi0)?;
    rec.build(Problem::PlaneWave { direction }, order, chi0, Some(amp0))
}

/// Partial sum `sum_{n <= order} eps^n Psi_n(x, x / eps)` at `points`.
pub fn evaluate_partial(sol: &AsymptoticSolution, order: usize, eps: f64, points: &[f64]) -> Result<Vec<Complex64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if order > sol.order() {
        return Err(Error::InvalidArgument(format!(
            "partial order {order} above built order {}",
            sol.order()
        )));
    }
    let grid = sol.grid();
    let active: Vec<&ExpansionTerm> = sol.terms[..=order].iter().filter(|t| !t.is_zero()).collect();
    points
        .iter()
        .map(|&x| {
            let (start, w) = grid.interpolation_weights(x)?;
            let mut acc = ZERO;
            let mut pow = 1.0;
            let mut last = 0;
            for term in &active {
                pow *= eps.powi((term.order - last) as i32);
                last = term.order;
                let psi: Complex64 = w.iter().zip(&term.psi.values()[start..]).map(|(&wj, &v)| v * wj).sum();
                let phi = if term.phi_is_zero() {
                    ZERO
                } else {
                    interpolate_spectra(grid, &term.phi, x)?.eval(&[x / eps])
                };
                acc += (psi + phi) * pow;
            }
            Ok(acc)
        })
        .collect()
}

/// Full partial sum `Psi^(p)(x, eps)` of the built order.
pub fn evaluate(sol: &AsymptoticSolution, eps: f64, points: &[f64]) -> Result<Vec<Complex64>> {
    evaluate_partial(sol, sol.order(), eps, points)
}

/// [`evaluate_partial`] at every node of `grid`.
pub fn evaluate_on(sol: &AsymptoticSolution, order: usize, eps: f64, grid: &SlowGrid) -> Result<SlowField> {
    let points: Vec<f64> = grid.nodes().collect();
    SlowField::new(*grid, evaluate_partial(sol, order, eps, &points)?)
}

/// `(H_eps - E) Psi^(p) - f` on the default eps-resolving grid.
pub fn discrepancy(sol: &AsymptoticSolution, eps: f64) -> Result<SlowField> {
    let grid = fine_grid(
        sol.grid().half_width(),
        eps,
        sol.potential.cell(),
        sol.energy,
        DEFAULT_POINTS_PER_PERIOD,
    )?;
    discrepancy_on(sol, eps, &grid)
}

/// `(H_eps - E) Psi^(p) - f` sampled on `fine`.
///
/// The operator is applied in two-scale form,
/// `eps^-2 (-Delta_y) - 2 eps^-1 d_x d_y + (-d_x^2 + q - E)`, with `y`
/// derivatives spectral and `x` derivatives by slow finite differences; the
/// result is then traced on `y = x / eps`.
pub fn discrepancy_on(sol: &AsymptoticSolution, eps: f64, fine: &SlowGrid) -> Result<SlowField> {
    check_resolution(fine, eps, sol.potential.cell(), sol.energy)?;
    let q = &sol.potential;
    let grid = *q.grid();
    let d1 = SlowDerivative::new(&grid, 1)?;
    let d2 = SlowDerivative::new(&grid, 2)?;
    let e = Complex64::new(sol.energy, 0.0);
    let mut total = zero_spectra(q);
    let mean_idx = total[0].coeffs().len() / 2;

    for term in &sol.terms {
        let n = term.order as i32;
        if !term.phi_is_zero() {
            let a = eps.powi(n - 2);
            let b = eps.powi(n - 1);
            let c = eps.powi(n);
            let dx = slow_derivative_spectra(&d1, &term.phi);
            let dxx = slow_derivative_spectra(&d2, &term.phi);
            for i in 0..grid.len() {
                let phi = &term.phi[i];
                let lap = phi.laplacian().scale(Complex64::new(-a, 0.0));
                let mixed = cell_gradient(&dx[i])[0].scale(Complex64::new(-2.0 * b, 0.0));
                let slow = &(&cell_product(&q.spectra()[i], phi)? - &dxx[i]) - &phi.scale(e);
                total[i] = &(&(&total[i] + &lap) + &mixed) + &slow.scale(Complex64::new(c, 0.0));
            }
        }
        if !term.psi.is_zero() {
            let c = Complex64::new(eps.powi(n), 0.0);
            let psi = term.psi.values();
            let dxx = d2.apply(psi);
            for i in 0..grid.len() {
                let mut t = q.spectra()[i].scale(psi[i]);
                t.coeffs_mut()[mean_idx] += -dxx[i] - e * psi[i];
                total[i] = &total[i] + &t.scale(c);
            }
        }
    }
    if let Problem::Source { source } = &sol.problem {
        for (t, f) in total.iter_mut().zip(source.values()) {
            t.coeffs_mut()[mean_idx] -= f;
        }
    }

    let values = fine
        .nodes()
        .map(|x| Ok(interpolate_spectra(&grid, &total, x)?.eval(&[x / eps])))
        .collect::<Result<Vec<_>>>()?;
    SlowField::new(*fine, values)
}

/// `F^_0, ..., F^_p` of a plane-wave expansion.
pub fn amplitude_series(sol: &AsymptoticSolution) -> Result<Vec<Amplitude>> {
    if !matches!(sol.problem, Problem::PlaneWave { .. }) {
        return Err(Error::WrongProblemKind);
    }
    Ok(sol
        .terms
        .iter()
        .map(|t| t.amplitude.clone().expect("plane-wave terms carry amplitudes"))
        .collect())
}

/// `sum_{n <= order} eps^n F^_n` on the amplitude's directions.
pub fn amplitude_partial_sum(series: &[Amplitude], order: usize, eps: f64) -> Amplitude {
    let mut out = series[0].clone();
    for (n, a) in series.iter().enumerate().take(order + 1).skip(1) {
        let w = eps.powi(n as i32);
        for (o, v) in out.values.iter_mut().zip(&a.values) {
            *o += v * w;
        }
    }
    out
}
