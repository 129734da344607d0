//! Two-scale potentials `q(x, y)`: one cell spectrum per slow node.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::{cell_average, CellSpectrum, PeriodicCell, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::grid::{SlowField, SlowGrid, STENCIL};

/// Smooth compactly supported profile `A exp(-1 / (1 - (x/R)^2))` for `|x| < R`, else 0.
pub fn bump(amplitude: f64, radius: f64, x: f64) -> f64 {
    let t = x / radius;
    if t.abs() < 1.0 {
        amplitude * (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoScalePotential {
    grid: SlowGrid,
    cell: PeriodicCell,
    radius: f64,
    spectra: Vec<CellSpectrum>,
}

impl TwoScalePotential {
    /// Validates support in `|x| < R`, a shared cell and mode bound, and
    /// Hermitian symmetry (real-valued `q`).
    pub fn new(grid: SlowGrid, cell: PeriodicCell, radius: f64, spectra: Vec<CellSpectrum>) -> Result<Self> {
        if spectra.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} spectra for {} nodes",
                spectra.len(),
                grid.len()
            )));
        }
        if !(radius > 0.0) || radius > grid.half_width() {
            return Err(Error::InvalidArgument(format!(
                "support radius {radius} must lie in (0, X = {}]",
                grid.half_width()
            )));
        }
        let max_mode = spectra.first().map_or(0, |s| s.max_mode());
        for (x, s) in grid.nodes().zip(&spectra) {
            if *s.cell() != cell {
                return Err(Error::CellMismatch);
            }
            if s.max_mode() != max_mode {
                return Err(Error::ModeMismatch(max_mode, s.max_mode()));
            }
            if x.abs() >= radius && s.max_abs() != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "q(x, .) nonzero at |x| = {} >= R",
                    x.abs()
                )));
            }
            if !s.is_hermitian(HERMITIAN_TOL * (1.0 + s.max_abs())) {
                return Err(Error::InvalidArgument(format!("q(x, .) is not real-valued at x = {x}")));
            }
        }
        Ok(Self {
            grid,
            cell,
            radius,
            spectra,
        })
    }

    /// `q(x, y) = a(x) b(y)` with `a` forced to zero for `|x| >= R`.
    pub fn separable(grid: SlowGrid, radius: f64, profile: impl Fn(f64) -> f64, fast: &CellSpectrum) -> Result<Self> {
        let spectra = grid
            .nodes()
            .map(|x| {
                let a = if x.abs() < radius { profile(x) } else { 0.0 };
                fast.scale(Complex64::new(a, 0.0))
            })
            .collect();
        Self::new(grid, fast.cell().clone(), radius, spectra)
    }

    pub fn grid(&self) -> &SlowGrid {
        &self.grid
    }

    pub fn cell(&self) -> &PeriodicCell {
        &self.cell
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_mode(&self) -> usize {
        self.spectra[0].max_mode()
    }

    pub fn spectra(&self) -> &[CellSpectrum] {
        &self.spectra
    }

    /// True when every spectrum is a pure mean, i.e. `q(x, y) = q(x)`.
    pub fn is_y_independent(&self) -> bool {
        self.spectra.iter().all(|s| {
            let mean_idx = s.coeffs().len() / 2;
            s.coeffs()
                .iter()
                .enumerate()
                .all(|(i, c)| i == mean_idx || c.norm_sqr() == 0.0)
        })
    }

    /// `q(x, y)` with the slow dependence interpolated between nodes.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        if x.abs() >= self.radius {
            return Ok(0.0);
        }
        Ok(interpolate_spectra(&self.grid, &self.spectra, x)?.eval(&[y]).re)
    }

    /// Hex SHA-256 of the serialised potential, used as a cache key.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("potential serialises");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Node-wise cell mean `q^(x_i)`.
pub fn average_potential(q: &TwoScalePotential) -> SlowField {
    let values = q
        .spectra
        .iter()
        .map(|s| Complex64::new(cell_average(s).re, 0.0))
        .collect();
    SlowField::new(q.grid, values).expect("one value per node")
}

/// Local degree-6 interpolation of a spectrum-valued slow field.
pub fn interpolate_spectra(grid: &SlowGrid, spectra: &[CellSpectrum], x: f64) -> Result<CellSpectrum> {
    let (start, w) = grid.interpolation_weights(x)?;
    let mut out = CellSpectrum::zeros(spectra[start].cell().clone(), spectra[start].max_mode());
    for (wj, s) in w.iter().zip(&spectra[start..start + STENCIL]) {
        if *wj == 0.0 {
            continue;
        }
        for (o, c) in out.coeffs_mut().iter_mut().zip(s.coeffs()) {
            *o += c * wj;
        }
    }
    Ok(out)
}
