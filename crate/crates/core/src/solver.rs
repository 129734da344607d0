//! Outgoing solutions of `(-d^2/dx^2 + p(x) - E) psi = f` on the line.
//!
//! The radiation condition is built into the free outgoing kernel
//! `G(r) = i exp(i k r) / (2k)`, `k = sqrt(E)`, and the problem is solved
//! as the Lippmann-Schwinger equation
//!
//! ```text
//! psi(x) + int G(x - y) p(y) psi(y) dy = g(x),
//! ```
//!
//! with `g = G * f` for a source or `g = exp(i k kappa x)` for a plane wave.
//!
//! Discretisation is Nystrom on the uniform grid with a corrected trapezoidal
//! rule. The kernel has a derivative jump at `x = y`, which costs the plain
//! trapezoid its higher orders; the Euler-Maclaurin jump terms are known in
//! closed form and are added back on the diagonal band:
//!
//! ```text
//! int G(x_i - y) u(y) dy ~ sum_j h G(x_i - x_j) u_j
//!                          - (h^2/12 + k^2 h^4/720) u_i + h^4 u''_i / 240
//! ```
//!
//! with `u''_i` by the three-point difference. Densities are assumed smooth
//! and compactly supported inside the grid, so no endpoint terms arise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SlowField, SlowGrid};
use crate::linalg::{DenseMatrix, LuFactors};

/// Largest accepted relative max-norm residual of a Nystrom solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Kernel of the outgoing free resolvent `(-Delta - E - i0)^{-1}` at distance `r`.
///
/// `d = 1`: `i exp(i k r) / (2k)`; `d = 3`: `exp(i k r) / (4 pi r)`.
pub fn green_kernel(dim: usize, energy: f64, r: f64) -> Result<Complex64> {
    check_energy(energy)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be non-negative, got {r}"
        )));
    }
    let k = energy.sqrt();
    match dim {
        1 => Ok(I * Complex64::from_polar(1.0, k * r) / (2.0 * k)),
        3 if r == 0.0 => Err(Error::SingularEvaluation(3)),
        3 => Ok(Complex64::from_polar(1.0, k * r) / (4.0 * PI * r)),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Large-distance prefactor `c_d` of the kernel: `G ~ c_d exp(i k |x|) exp(-i k <x^, y>) / |x|^{(d-1)/2}`.
pub fn far_field_constant(dim: usize, energy: f64) -> Result<Complex64> {
    check_energy(energy)?;
    match dim {
        1 => Ok(I / (2.0 * energy.sqrt())),
        3 => Ok(Complex64::new(1.0 / (4.0 * PI), 0.0)),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn check_energy(energy: f64) -> Result<()> {
    if energy > 0.0 && energy.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("energy must be positive, got {energy}")))
    }
}

fn check_direction(direction: f64) -> Result<()> {
    if direction == 1.0 || direction == -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "direction must be +1 or -1, got {direction}"
        )))
    }
}

/// Far-field coefficients on a set of observation directions.
///
/// For a plane-wave problem `incident` holds the incoming direction and the
/// values are the scattering amplitudes `F(x^, kappa)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub energy: f64,
    pub incident: Option<f64>,
    pub directions: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Amplitude {
    pub fn value(&self, direction: f64) -> Option<Complex64> {
        self.directions
            .iter()
            .position(|&d| d == direction)
            .map(|i| self.values[i])
    }

    /// `|t|^2 + |r|^2 - 1` with `t = 1 + F(kappa, kappa)`, `r = F(-kappa, kappa)`.
    pub fn flux_defect(&self) -> Option<f64> {
        let inc = self.incident?;
        let t = Complex64::new(1.0, 0.0) + self.value(inc)?;
        let r = self.value(-inc)?;
        Some(t.norm_sqr() + r.norm_sqr() - 1.0)
    }
}

/// Index range `[lo, hi]` of the nonzero entries.
fn support(values: &[Complex64]) -> Option<(usize, usize)> {
    let lo = values.iter().position(|v| v.norm_sqr() != 0.0)?;
    let hi = values.iter().rposition(|v| v.norm_sqr() != 0.0)?;
    Some((lo, hi))
}

/// Corrected trapezoidal quadrature of the outgoing kernel on a uniform grid.
#[derive(Debug, Clone)]
struct KernelQuadrature {
    /// `h G(m h)` for `m = 0..n`.
    table: Vec<Complex64>,
    diag: Complex64,
    band: Complex64,
}

impl KernelQuadrature {
    fn new(grid: &SlowGrid, energy: f64) -> Self {
        let h = grid.spacing();
        let k = energy.sqrt();
        let scale = I * h / (2.0 * k);
        let table = (0..grid.len())
            .map(|m| scale * Complex64::from_polar(1.0, k * h * m as f64))
            .collect();
        let h2 = h * h;
        let band = Complex64::new(h2 / 240.0, 0.0);
        let diag = Complex64::new(-(h2 / 12.0 + k * k * h2 * h2 / 720.0), 0.0) - 2.0 * band;
        Self { table, diag, band }
    }

    /// Weight of density node `j` in the quadrature for evaluation node `i`.
    fn weight(&self, i: usize, j: usize) -> Complex64 {
        let m = i.abs_diff(j);
        match m {
            0 => self.table[0] + self.diag,
            1 => self.table[1] + self.band,
            _ => self.table[m],
        }
    }

    /// `(K u)_i` for every node `i` in `rows`, with `u` supported on `[lo, hi]`.
    fn apply(&self, u: &[Complex64], lo: usize, hi: usize, rows: std::ops::Range<usize>) -> Vec<Complex64> {
        let eval = |i: usize| -> Complex64 {
            let mut acc = ZERO;
            for (j, uj) in u.iter().enumerate().take(hi + 1).skip(lo) {
                acc += self.table[i.abs_diff(j)] * uj;
            }
            if i + 1 >= lo && i <= hi + 1 {
                let at = |j: usize| if j >= lo && j <= hi { u[j] } else { ZERO };
                let left = if i > 0 { at(i - 1) } else { ZERO };
                acc += self.diag * at(i) + self.band * (left + at(i + 1));
            }
            acc
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            rows.into_par_iter().map(eval).collect()
        }
        #[cfg(not(feature = "parallel"))]
        rows.map(eval).collect()
    }
}

/// Factored Nystrom system for one potential, grid and energy.
///
/// Only nodes where the potential is nonzero carry unknowns; the field
/// elsewhere follows from the integral representation.
#[derive(Debug, Clone)]
pub struct RadiatingSolver {
    grid: SlowGrid,
    energy: f64,
    potential: Vec<Complex64>,
    active: Option<(usize, usize)>,
    quadrature: KernelQuadrature,
    lu: Option<LuFactors>,
}

impl RadiatingSolver {
    pub fn new(potential: &SlowField, energy: f64) -> Result<Self> {
        Self::with_cap(potential, energy, usize::MAX)
    }

    /// As [`RadiatingSolver::new`], refusing dense systems above `max_unknowns`.
    pub fn with_cap(potential: &SlowField, energy: f64, max_unknowns: usize) -> Result<Self> {
        check_energy(energy)?;
        let grid = *potential.grid();
        let values = potential.values().to_vec();
        check_inside(&values, "potential")?;
        let active = support(&values);
        let quadrature = KernelQuadrature::new(&grid, energy);
        let lu = match active {
            None => None,
            Some((lo, hi)) => {
                let n = hi - lo + 1;
                if n > max_unknowns {
                    return Err(Error::ResourceCap {
                        requested: n,
                        cap: max_unknowns,
                    });
                }
                let matrix = DenseMatrix::from_fn(n, |a, b| {
                    let w = quadrature.weight(lo + a, lo + b) * values[lo + b];
                    if a == b {
                        w + 1.0
                    } else {
                        w
                    }
                });
                Some(matrix.lu()?)
            }
        };
        Ok(Self {
            grid,
            energy,
            potential: values,
            active,
            quadrature,
            lu,
        })
    }

    pub fn grid(&self) -> &SlowGrid {
        &self.grid
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn wavenumber(&self) -> f64 {
        self.energy.sqrt()
    }

    /// Number of dense unknowns.
    pub fn unknowns(&self) -> usize {
        self.active.map_or(0, |(lo, hi)| hi - lo + 1)
    }

    pub fn potential(&self) -> &[Complex64] {
        &self.potential
    }

    /// Outgoing free field `int G(x - y) f(y) dy` at every node.
    pub fn free_field(&self, f: &SlowField) -> Result<Vec<Complex64>> {
        self.check_grid(f)?;
        check_inside(f.values(), "source")?;
        Ok(match support(f.values()) {
            None => vec![ZERO; self.grid.len()],
            Some((lo, hi)) => self.quadrature.apply(f.values(), lo, hi, 0..self.grid.len()),
        })
    }

    /// Solve `psi + K(p psi) = g` for a right-hand side given at every node.
    pub fn solve_with_rhs(&self, rhs: &[Complex64]) -> Result<SlowField> {
        if rhs.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        let (lo, hi) = match self.active {
            None => return SlowField::new(self.grid, rhs.to_vec()),
            Some(r) => r,
        };
        let lu = self.lu.as_ref().expect("factored whenever active");
        let local = lu.solve(&rhs[lo..=hi]);
        let mut density = vec![ZERO; self.grid.len()];
        for (j, &v) in local.iter().enumerate() {
            density[lo + j] = self.potential[lo + j] * v;
        }
        let scattered = self.quadrature.apply(&density, lo, hi, 0..self.grid.len());

        let residual = (lo..=hi)
            .map(|i| (local[i - lo] + scattered[i] - rhs[i]).norm())
            .fold(0.0, f64::max);
        let scale = rhs[lo..=hi].iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale > 0.0 && residual > RESIDUAL_TOL * scale {
            return Err(Error::ResidualTooLarge {
                residual: residual / scale,
                tol: RESIDUAL_TOL,
            });
        }

        let values = (0..self.grid.len())
            .map(|i| {
                if i >= lo && i <= hi {
                    local[i - lo]
                } else {
                    rhs[i] - scattered[i]
                }
            })
            .collect();
        SlowField::new(self.grid, values)
    }

    pub fn solve_source(&self, f: &SlowField) -> Result<SlowField> {
        let rhs = self.free_field(f)?;
        self.solve_with_rhs(&rhs)
    }

    /// Total field for the incident wave `exp(i k direction x)`.
    pub fn solve_plane_wave(&self, direction: f64) -> Result<SlowField> {
        check_direction(direction)?;
        let k = self.wavenumber();
        let rhs: Vec<Complex64> = self
            .grid
            .nodes()
            .map(|x| Complex64::from_polar(1.0, k * direction * x))
            .collect();
        self.solve_with_rhs(&rhs)
    }

    /// Max-norm residual of `psi + K(p psi) - rhs` relative to `rhs`, on all nodes.
    pub fn relative_residual(&self, psi: &SlowField, rhs: &[Complex64]) -> Result<f64> {
        self.check_grid(psi)?;
        let density: Vec<Complex64> = psi.values().iter().zip(&self.potential).map(|(a, b)| a * b).collect();
        let applied = match support(&density) {
            None => vec![ZERO; self.grid.len()],
            Some((lo, hi)) => self.quadrature.apply(&density, lo, hi, 0..self.grid.len()),
        };
        let residual = psi
            .values()
            .iter()
            .zip(&applied)
            .zip(rhs)
            .map(|((p, a), r)| (p + a - r).norm())
            .fold(0.0, f64::max);
        let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(if scale > 0.0 { residual / scale } else { residual })
    }

    fn far_field_of_density(&self, density: &[Complex64], incident: Option<f64>) -> Amplitude {
        let k = self.wavenumber();
        let h = self.grid.spacing();
        let c = I / (2.0 * k);
        let directions = vec![1.0, -1.0];
        let values = directions
            .iter()
            .map(|&dir| {
                let sum: Complex64 = self
                    .grid
                    .nodes()
                    .zip(density)
                    .filter(|(_, d)| d.norm_sqr() != 0.0)
                    .map(|(y, &d)| d * Complex64::from_polar(1.0, -k * dir * y))
                    .sum();
                c * h * sum
            })
            .collect();
        Amplitude {
            energy: self.energy,
            incident,
            directions,
            values,
        }
    }

    /// `T(x^) = c_1 int exp(-i k x^ y) (f - p psi) dy`.
    pub fn far_field_source(&self, f: &SlowField, psi: &SlowField) -> Result<Amplitude> {
        self.check_grid(f)?;
        self.check_grid(psi)?;
        let density: Vec<Complex64> = (0..self.grid.len())
            .map(|i| f.values()[i] - self.potential[i] * psi.values()[i])
            .collect();
        Ok(self.far_field_of_density(&density, None))
    }

    /// Scattering amplitude `F(x^, kappa)` from the total field `chi`.
    pub fn far_field_plane_wave(&self, direction: f64, chi: &SlowField) -> Result<Amplitude> {
        check_direction(direction)?;
        self.check_grid(chi)?;
        let density: Vec<Complex64> = (0..self.grid.len())
            .map(|i| -self.potential[i] * chi.values()[i])
            .collect();
        Ok(self.far_field_of_density(&density, Some(direction)))
    }

    fn check_grid(&self, field: &SlowField) -> Result<()> {
        if *field.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn check_inside(values: &[Complex64], what: &str) -> Result<()> {
    let ends = [values.first(), values.last()];
    if ends.iter().flatten().any(|v| v.norm_sqr() != 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{what} must vanish at the grid ends (support inside [-X, X])"
        )));
    }
    Ok(())
}

/// Outgoing solution of `(-d^2/dx^2 + p - E) psi = f`.
pub fn solve_radiating(p: &SlowField, f: &SlowField, energy: f64) -> Result<SlowField> {
    if p.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    RadiatingSolver::new(p, energy)?.solve_source(f)
}

/// Total field of the plane wave `exp(i sqrt(E) direction x)` scattered by `p`.
pub fn solve_plane_wave(p: &SlowField, energy: f64, direction: f64) -> Result<SlowField> {
    check_direction(direction)?;
    RadiatingSolver::new(p, energy)?.solve_plane_wave(direction)
}

/// Far-field coefficient of a solved source problem.
pub fn far_field(p: &SlowField, f: &SlowField, psi: &SlowField, energy: f64) -> Result<Amplitude> {
    // Far-field extraction needs no factorisation: build the quadrature only.
    let solver = RadiatingSolver {
        grid: *p.grid(),
        energy,
        potential: p.values().to_vec(),
        active: None,
        quadrature: KernelQuadrature::new(p.grid(), energy),
        lu: None,
    };
    check_energy(energy)?;
    solver.far_field_source(f, psi)
}

/// Scattering amplitude of a solved plane-wave problem.
pub fn plane_wave_far_field(p: &SlowField, chi: &SlowField, energy: f64, direction: f64) -> Result<Amplitude> {
    check_energy(energy)?;
    let solver = RadiatingSolver {
        grid: *p.grid(),
        energy,
        potential: p.values().to_vec(),
        active: None,
        quadrature: KernelQuadrature::new(p.grid(), energy),
        lu: None,
    };
    solver.far_field_plane_wave(direction, chi)
}
