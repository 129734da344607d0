//! Uniform grids on `[-X, X]`, complex fields sampled on them, sixth-order
//! finite differences and local polynomial interpolation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stencil width used for differences and interpolation.
pub const STENCIL: usize = 7;

/// Uniform grid `x_i = -X + i h`, `h = 2X / (N - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowGrid {
    half_width: f64,
    nodes: usize,
}

impl SlowGrid {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if nodes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {nodes}")));
        }
        Ok(Self { half_width, nodes })
    }

    /// Smallest grid on `[-X, X]` whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(half_width: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {max_spacing}"
            )));
        }
        let intervals = (2.0 * half_width / max_spacing * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(half_width, intervals + 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |i| self.node(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.half_width;
        x >= -self.half_width - slack && x <= self.half_width + slack
    }

    /// First index of the `STENCIL`-point window used to interpolate at `x`.
    fn window_start(&self, x: f64) -> usize {
        let pos = (x + self.half_width) / self.spacing();
        let centre = pos.round() as i64 - (STENCIL as i64 / 2);
        centre.clamp(0, (self.nodes - STENCIL.min(self.nodes)) as i64) as usize
    }

    /// Lagrange weights of the local degree-6 interpolant through the window around `x`.
    pub fn interpolation_weights(&self, x: f64) -> Result<(usize, [f64; STENCIL])> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain(x));
        }
        if self.nodes < STENCIL {
            return Err(Error::GridTooCoarse(format!(
                "interpolation needs {STENCIL} nodes, grid has {}",
                self.nodes
            )));
        }
        let start = self.window_start(x);
        let h = self.spacing();
        let t = (x - self.node(start)) / h;
        let mut w = [0.0; STENCIL];
        // Exact hit: avoid 0/0 in the product form.
        let nearest = t.round();
        if (t - nearest).abs() < 1e-13 && nearest >= 0.0 && (nearest as usize) < STENCIL {
            w[nearest as usize] = 1.0;
            return Ok((start, w));
        }
        for (j, wj) in w.iter_mut().enumerate() {
            let mut prod = 1.0;
            for k in 0..STENCIL {
                if k != j {
                    prod *= (t - k as f64) / (j as f64 - k as f64);
                }
            }
            *wj = prod;
        }
        Ok((start, w))
    }
}

/// Complex samples on a [`SlowGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowField {
    grid: SlowGrid,
    values: Vec<Complex64>,
}

impl SlowField {
    pub fn new(grid: SlowGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("field contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SlowGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: SlowGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn from_real_fn(grid: SlowGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &SlowGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    /// Local degree-6 polynomial interpolation at `x`.
    pub fn interpolate(&self, x: f64) -> Result<Complex64> {
        let (start, w) = self.grid.interpolation_weights(x)?;
        Ok(w.iter()
            .zip(&self.values[start..start + STENCIL])
            .map(|(&wj, &v)| v * wj)
            .sum())
    }

    /// Resample onto another grid by local interpolation.
    pub fn resample(&self, target: &SlowGrid) -> Result<Self> {
        if *target == self.grid {
            return Ok(self.clone());
        }
        let values = target
            .nodes()
            .map(|x| self.interpolate(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: *target, values })
    }
}

/// Finite-difference weights for the `order`-th derivative at `x0` over
/// `nodes` (Fornberg's recursion).
pub fn fd_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Precomputed sixth-order stencils for one derivative order on one grid size.
struct Stencils {
    /// `(start, weights)` per node, weights already scaled by `h^-order`.
    rows: Vec<(usize, Vec<f64>)>,
}

impl Stencils {
    fn new(grid: &SlowGrid, order: usize) -> Result<Self> {
        let n = grid.len();
        if n < STENCIL {
            return Err(Error::GridTooCoarse(format!(
                "finite differences need {STENCIL} nodes, grid has {n}"
            )));
        }
        // Sixth order needs 7 points for the first derivative and 8 for a
        // one-sided second derivative; central 7 points suffice for both.
        let one_sided = if order == 2 { (STENCIL + 1).min(n) } else { STENCIL };
        let half = STENCIL / 2;
        let scale = grid.spacing().powi(order as i32).recip();
        let rows = (0..n)
            .map(|i| {
                let (start, width) = if i >= half && i + half < n {
                    (i - half, STENCIL)
                } else if i < half {
                    (0, one_sided)
                } else {
                    (n - one_sided, one_sided)
                };
                let offsets: Vec<f64> = (start..start + width).map(|j| j as f64 - i as f64).collect();
                let w = fd_weights(0.0, &offsets, order)
                    .into_iter()
                    .map(|w| w * scale)
                    .collect();
                (start, w)
            })
            .collect();
        Ok(Self { rows })
    }

    fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|(start, w)| {
                w.iter()
                    .zip(&values[*start..*start + w.len()])
                    .map(|(&wj, &v)| v * wj)
                    .sum()
            })
            .collect()
    }
}

/// Derivative operator of fixed order on a fixed grid, reusable across fields.
pub struct SlowDerivative {
    grid: SlowGrid,
    stencils: Stencils,
}

impl SlowDerivative {
    pub fn new(grid: &SlowGrid, order: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order {order} not in 1..=2")));
        }
        Ok(Self {
            grid: *grid,
            stencils: Stencils::new(grid, order)?,
        })
    }

    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.grid.len());
        self.stencils.apply(values)
    }
}

/// Sixth-order finite-difference derivative of `field` (order 1 or 2).
pub fn slow_derivative(field: &SlowField, order: usize) -> Result<SlowField> {
    let d = SlowDerivative::new(field.grid(), order)?;
    Ok(SlowField {
        grid: field.grid,
        values: d.apply(&field.values),
    })
}
