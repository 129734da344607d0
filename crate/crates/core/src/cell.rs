//! Spectral algebra on the periodicity cell.
//!
//! A periodic function of the fast variable `y` is stored as truncated
//! Fourier coefficients `c_m`, `|m_j| <= M`, normalised so that
//!
//! ```text
//! g(y) = sum_m c_m exp(i k_m . y),   k_m = 2 pi (m_1 / L_1, ..., m_d / L_d)
//! ```
//!
//! With this normalisation `c_0` is the cell mean, so averaging and the
//! solvability condition of the cell Poisson problem are coefficient reads.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `|c_0|` for a right-hand side handed to the cell solver.
pub const DEFAULT_TOL_MEAN: f64 = 1e-12;

/// Tolerance used when checking Hermitian symmetry of a "real-valued" spectrum.
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Rectangular periodicity cell `[0, L_1) x ... x [0, L_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCell {
    periods: Vec<f64>,
}

impl PeriodicCell {
    pub fn new(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        if periods.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cell periods must be positive, got {periods:?}"
            )));
        }
        Ok(Self { periods })
    }

    /// The unit cell `[0, 1)^d`.
    pub fn unit(dim: usize) -> Self {
        Self {
            periods: vec![1.0; dim.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn min_period(&self) -> f64 {
        self.periods.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Truncated Fourier spectrum of an `Omega`-periodic function.
///
/// Coefficients are stored flat, axis 0 varying fastest, each axis indexed
/// by `m_j + M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpectrum {
    cell: PeriodicCell,
    max_mode: usize,
    coeffs: Vec<Complex64>,
}

impl CellSpectrum {
    pub fn zeros(cell: PeriodicCell, max_mode: usize) -> Self {
        let len = (2 * max_mode + 1).pow(cell.dim() as u32);
        Self {
            cell,
            max_mode,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn constant(cell: PeriodicCell, max_mode: usize, value: Complex64) -> Self {
        let mut s = Self::zeros(cell, max_mode);
        let zero = s.flat_index(&vec![0; s.cell.dim()]);
        s.coeffs[zero] = value;
        s
    }

    pub fn from_coeffs(cell: PeriodicCell, max_mode: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let len = (2 * max_mode + 1).pow(cell.dim() as u32);
        if coeffs.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} coefficients for M = {max_mode}, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { cell, max_mode, coeffs })
    }

    /// Real one-dimensional profile `c_0 + sum_m a_m cos(2 pi m y / L) + b_m sin(2 pi m y / L)`.
    ///
    /// `cosines[0]` is the mean; `sines[0]` is ignored.
    pub fn from_trig(cell: PeriodicCell, max_mode: usize, cosines: &[f64], sines: &[f64]) -> Result<Self> {
        if cell.dim() != 1 {
            return Err(Error::UnsupportedDimension(cell.dim()));
        }
        let highest = cosines.len().max(sines.len()).saturating_sub(1);
        if highest > max_mode {
            return Err(Error::InvalidArgument(format!(
                "profile has mode {highest} above truncation M = {max_mode}"
            )));
        }
        let mut s = Self::zeros(cell, max_mode);
        let m0 = max_mode as i64;
        if let Some(&c0) = cosines.first() {
            s.coeffs[m0 as usize] = Complex64::new(c0, 0.0);
        }
        for m in 1..=highest {
            let a = cosines.get(m).copied().unwrap_or(0.0);
            let b = sines.get(m).copied().unwrap_or(0.0);
            // a cos + b sin = (a - i b)/2 e^{i.} + (a + i b)/2 e^{-i.}
            s.coeffs[max_mode + m] = Complex64::new(0.5 * a, -0.5 * b);
            s.coeffs[max_mode - m] = Complex64::new(0.5 * a, 0.5 * b);
        }
        Ok(s)
    }

    pub fn cell(&self) -> &PeriodicCell {
        &self.cell
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    fn side(&self) -> usize {
        2 * self.max_mode + 1
    }

    fn flat_index(&self, modes: &[i64]) -> usize {
        let side = self.side();
        let m = self.max_mode as i64;
        modes
            .iter()
            .rev()
            .fold(0usize, |acc, &mj| acc * side + (mj + m) as usize)
    }

    /// Multi-index of flat position `idx`.
    pub fn modes_of(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let m = self.max_mode as i64;
        (0..self.cell.dim())
            .map(|_| {
                let r = idx % side;
                idx /= side;
                r as i64 - m
            })
            .collect()
    }

    /// Coefficient of multi-index `modes`, zero outside the truncation box.
    pub fn coeff(&self, modes: &[i64]) -> Complex64 {
        let m = self.max_mode as i64;
        if modes.len() != self.cell.dim() || modes.iter().any(|&mj| mj.abs() > m) {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[self.flat_index(modes)]
    }

    /// Wave vector `k_m` of flat position `idx`.
    pub fn wave_vector(&self, idx: usize) -> Vec<f64> {
        self.modes_of(idx)
            .iter()
            .zip(self.cell.periods())
            .map(|(&mj, &l)| 2.0 * PI * mj as f64 / l)
            .collect()
    }

    fn zero_index(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// Cell mean `1/|Omega| int g dy`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[self.zero_index()]
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean() == Complex64::new(0.0, 0.0)
    }

    /// `c_{-m} == conj(c_m)` to within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|i| (self.coeffs[n - 1 - i] - self.coeffs[i].conj()).norm() <= tol)
    }

    /// Point value `g(y)`.
    pub fn eval(&self, y: &[f64]) -> Complex64 {
        if self.cell.dim() == 1 {
            return self.eval_1d(y[0]);
        }
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, &c)| {
                let phase: f64 = self.wave_vector(i).iter().zip(y).map(|(k, yj)| k * yj).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    fn eval_1d(&self, y: f64) -> Complex64 {
        let m = self.max_mode;
        let step = Complex64::from_polar(1.0, 2.0 * PI * y / self.cell.periods[0]);
        let mut acc = self.coeffs[m];
        let mut rot = Complex64::new(1.0, 0.0);
        for j in 1..=m {
            rot *= step;
            acc += self.coeffs[m + j] * rot + self.coeffs[m - j] * rot.conj();
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Multiply every coefficient by a mode-dependent symbol.
    pub fn map_symbol(&self, symbol: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= symbol(&self.wave_vector(i));
        }
        out
    }

    /// Spectral Laplacian: `c_m -> -|k_m|^2 c_m`.
    pub fn laplacian(&self) -> Self {
        self.map_symbol(|k| Complex64::new(-k.iter().map(|x| x * x).sum::<f64>(), 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.cell != other.cell {
            return Err(Error::CellMismatch);
        }
        if self.max_mode != other.max_mode {
            return Err(Error::ModeMismatch(self.max_mode, other.max_mode));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }
}

impl Add for &CellSpectrum {
    type Output = CellSpectrum;

    /// Panics on incompatible cells; use [`CellSpectrum::try_add`] otherwise.
    fn add(self, rhs: Self) -> CellSpectrum {
        self.try_add(rhs).expect("incompatible spectra")
    }
}

impl Sub for &CellSpectrum {
    type Output = CellSpectrum;

    fn sub(self, rhs: Self) -> CellSpectrum {
        self.try_sub(rhs).expect("incompatible spectra")
    }
}

impl Mul<Complex64> for &CellSpectrum {
    type Output = CellSpectrum;

    fn mul(self, rhs: Complex64) -> CellSpectrum {
        self.scale(rhs)
    }
}

/// Mean of `g` over the cell.
pub fn cell_average(g: &CellSpectrum) -> Complex64 {
    g.mean()
}

/// Zero-mean periodic solution of `Delta_y u = g`.
///
/// `g` must have `|c_0| <= tol_mean`; the returned spectrum has `c_0 = 0`
/// exactly and `u_m = -g_m / |k_m|^2` elsewhere.
pub fn solve_cell_poisson_with_tol(g: &CellSpectrum, tol_mean: f64) -> Result<CellSpectrum> {
    let mean = g.mean().norm();
    if mean > tol_mean {
        return Err(Error::SolvabilityViolation { mean, tol: tol_mean });
    }
    let zero = g.zero_index();
    let mut u = g.clone();
    for (i, c) in u.coeffs.iter_mut().enumerate() {
        if i == zero {
            *c = Complex64::new(0.0, 0.0);
        } else {
            let k2: f64 = g.wave_vector(i).iter().map(|k| k * k).sum();
            *c = -*c / k2;
        }
    }
    Ok(u)
}

pub fn solve_cell_poisson(g: &CellSpectrum) -> Result<CellSpectrum> {
    solve_cell_poisson_with_tol(g, DEFAULT_TOL_MEAN)
}

/// Spectral gradient `nabla_y u`, one spectrum per axis.
pub fn cell_gradient(u: &CellSpectrum) -> Vec<CellSpectrum> {
    (0..u.cell.dim())
        .map(|axis| u.map_symbol(|k| Complex64::new(0.0, k[axis])))
        .collect()
}

/// Product of two periodic functions, truncated back to the common mode bound.
///
/// The convolution is evaluated exactly on the padded `2M` box and only the
/// modes `|m_j| <= M` are kept, so there is no aliasing; the discarded modes
/// are the truncation loss.
pub fn cell_product(u: &CellSpectrum, v: &CellSpectrum) -> Result<CellSpectrum> {
    u.check_compatible(v)?;
    let m = u.max_mode as i64;
    let mut out = CellSpectrum::zeros(u.cell.clone(), u.max_mode);
    if u.cell.dim() == 1 {
        for target in -m..=m {
            let lo = (-m).max(target - m);
            let hi = m.min(target + m);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in lo..=hi {
                acc += u.coeffs[(a + m) as usize] * v.coeffs[(target - a + m) as usize];
            }
            out.coeffs[(target + m) as usize] = acc;
        }
        return Ok(out);
    }
    for (i, &ui) in u.coeffs.iter().enumerate() {
        if ui.norm_sqr() == 0.0 {
            continue;
        }
        let mi = u.modes_of(i);
        for (j, &vj) in v.coeffs.iter().enumerate() {
            if vj.norm_sqr() == 0.0 {
                continue;
            }
            let target: Vec<i64> = mi.iter().zip(v.modes_of(j)).map(|(a, b)| a + b).collect();
            if target.iter().all(|t| t.abs() <= m) {
                let idx = out.flat_index(&target);
                out.coeffs[idx] += ui * vj;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_spectrum(rng: &mut ChaCha8Rng, cell: &PeriodicCell, m: usize, hermitian: bool) -> CellSpectrum {
        let mut s = CellSpectrum::zeros(cell.clone(), m);
        let n = s.coeffs.len();
        for i in 0..n {
            s.coeffs[i] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        if hermitian {
            for i in 0..n / 2 {
                s.coeffs[n - 1 - i] = s.coeffs[i].conj();
            }
            s.coeffs[n / 2].im = 0.0;
        }
        s
    }

    #[test]
    fn average_reads_zero_mode() {
        let cell = PeriodicCell::unit(1);
        let g = CellSpectrum::from_trig(cell.clone(), 3, &[1.0, 1.0], &[]).unwrap();
        assert_eq!(cell_average(&g), c(1.0, 0.0));
        let g = CellSpectrum::from_trig(cell.clone(), 3, &[0.0, 1.0], &[]).unwrap();
        assert_eq!(cell_average(&g), c(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = random_spectrum(&mut rng, &cell, 4, false);
        let zero = g.zero_index();
        g.coeffs[zero] = c(3.0, 2.0);
        assert_eq!(cell_average(&g), c(3.0, 2.0));
    }

    #[test]
    fn trig_profile_evaluates_pointwise() {
        let cell = PeriodicCell::new(vec![2.0]).unwrap();
        let g = CellSpectrum::from_trig(cell, 4, &[0.3, 1.0, 0.5], &[0.0, -0.2, 0.0, 0.7]).unwrap();
        assert!(g.is_hermitian(HERMITIAN_TOL));
        for &y in &[0.0, 0.37, 1.1, 1.9] {
            let w = PI * y;
            let exact = 0.3 + w.cos() + 0.5 * (2.0 * w).cos() - 0.2 * w.sin() + 0.7 * (3.0 * w).sin();
            assert!((g.eval(&[y]) - c(exact, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn poisson_single_mode() {
        let cell = PeriodicCell::unit(1);
        let g = CellSpectrum::from_trig(cell.clone(), 2, &[0.0, 1.0], &[]).unwrap();
        let u = solve_cell_poisson(&g).unwrap();
        let expected = g.scale(c(-1.0 / (4.0 * PI * PI), 0.0));
        assert!(u.try_sub(&expected).unwrap().max_abs() < 1e-16);
    }

    #[test]
    fn poisson_rejects_nonzero_mean() {
        let cell = PeriodicCell::unit(1);
        let g = CellSpectrum::from_trig(cell, 2, &[0.1, 1.0], &[]).unwrap();
        assert!(matches!(
            solve_cell_poisson(&g),
            Err(Error::SolvabilityViolation { .. })
        ));
    }

    #[test]
    fn poisson_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for cell in [PeriodicCell::unit(1), PeriodicCell::new(vec![0.7, 1.3]).unwrap()] {
            let mut g = random_spectrum(&mut rng, &cell, 8, false);
            let zero = g.zero_index();
            g.coeffs[zero] = c(0.0, 0.0);
            let u = solve_cell_poisson(&g).unwrap();
            assert!(u.is_zero_mean());
            let back = u.laplacian();
            for (i, (a, b)) in back.coeffs.iter().zip(&g.coeffs).enumerate() {
                if i != zero {
                    assert!((a - b).norm() <= 1e-12 * b.norm(), "mode {i}");
                }
            }
        }
    }

    #[test]
    fn gradient_of_sine_and_constant() {
        let cell = PeriodicCell::unit(1);
        let u = CellSpectrum::from_trig(cell.clone(), 2, &[0.0], &[0.0, 1.0]).unwrap();
        let du = &cell_gradient(&u)[0];
        let expected = CellSpectrum::from_trig(cell.clone(), 2, &[0.0, 2.0 * PI], &[]).unwrap();
        assert!(du.try_sub(&expected).unwrap().max_abs() < 1e-14);
        let k = CellSpectrum::constant(cell, 2, c(4.0, 1.0));
        assert_eq!(cell_gradient(&k)[0].max_abs(), 0.0);
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cell = PeriodicCell::new(vec![1.0, 0.5]).unwrap();
        let u = random_spectrum(&mut rng, &cell, 5, false);
        let grad = cell_gradient(&u);
        let mut div = CellSpectrum::zeros(cell, 5);
        for (axis, g) in grad.iter().enumerate() {
            div = &div + &cell_gradient(g)[axis];
        }
        let lap = u.laplacian();
        for (a, b) in div.coeffs.iter().zip(&lap.coeffs) {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn product_identities() {
        let cell = PeriodicCell::unit(1);
        let one = CellSpectrum::constant(cell.clone(), 3, c(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = random_spectrum(&mut rng, &cell, 3, false);
        assert_eq!(cell_product(&one, &v).unwrap(), v);

        let cos = CellSpectrum::from_trig(cell.clone(), 3, &[0.0, 1.0], &[]).unwrap();
        let sq = cell_product(&cos, &cos).unwrap();
        let expected = CellSpectrum::from_trig(cell.clone(), 3, &[0.5, 0.0, 0.5], &[]).unwrap();
        assert!(sq.try_sub(&expected).unwrap().max_abs() < 1e-16);

        // M = 1 drops the cos(4 pi y) part.
        let cos1 = CellSpectrum::from_trig(cell.clone(), 1, &[0.0, 1.0], &[]).unwrap();
        let sq1 = cell_product(&cos1, &cos1).unwrap();
        assert_eq!(sq1, CellSpectrum::constant(cell, 1, c(0.5, 0.0)));
    }

    #[test]
    fn product_matches_pointwise_on_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cell = PeriodicCell::new(vec![1.5]).unwrap();
        let m = 6;
        // Band-limit both factors to M/2 so the product is representable.
        let mut u = random_spectrum(&mut rng, &cell, m, false);
        let mut v = random_spectrum(&mut rng, &cell, m, false);
        for s in [&mut u, &mut v] {
            for i in 0..s.coeffs.len() {
                if s.modes_of(i)[0].abs() > (m / 2) as i64 {
                    s.coeffs[i] = c(0.0, 0.0);
                }
            }
        }
        let w = cell_product(&u, &v).unwrap();
        let samples = 4 * m;
        for j in 0..samples {
            let y = 1.5 * j as f64 / samples as f64;
            let pointwise = u.eval(&[y]) * v.eval(&[y]);
            assert!((w.eval(&[y]) - pointwise).norm() < 1e-12);
        }
    }

    #[test]
    fn product_cell_mismatch() {
        let a = CellSpectrum::zeros(PeriodicCell::unit(1), 2);
        let b = CellSpectrum::zeros(PeriodicCell::new(vec![2.0]).unwrap(), 2);
        assert_eq!(cell_product(&a, &b), Err(Error::CellMismatch));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spectrum(m: usize) -> impl Strategy<Value = CellSpectrum> {
            let len = 2 * m + 1;
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |v| {
                let mut s = CellSpectrum::zeros(PeriodicCell::unit(1), m);
                for (i, (re, im)) in v.into_iter().enumerate() {
                    s.coeffs[i] = Complex64::new(re, im);
                }
                s
            })
        }

        fn hermitian(m: usize) -> impl Strategy<Value = CellSpectrum> {
            spectrum(m).prop_map(|mut s| {
                let n = s.coeffs.len();
                for i in 0..n / 2 {
                    s.coeffs[n - 1 - i] = s.coeffs[i].conj();
                }
                s.coeffs[n / 2].im = 0.0;
                s
            })
        }

        proptest! {
            #[test]
            fn poisson_preserves_zero_mean(mut g in spectrum(6)) {
                g.coeffs[6] = Complex64::new(0.0, 0.0);
                let u = solve_cell_poisson(&g).unwrap();
                prop_assert_eq!(cell_average(&u), Complex64::new(0.0, 0.0));
            }

            #[test]
            fn real_in_real_out(g in hermitian(5), h in hermitian(5)) {
                let mut g0 = g.clone();
                g0.coeffs[5] = Complex64::new(0.0, 0.0);
                prop_assert!(solve_cell_poisson(&g0).unwrap().is_hermitian(HERMITIAN_TOL));
                prop_assert!(cell_gradient(&g)[0].is_hermitian(HERMITIAN_TOL));
                prop_assert!(cell_product(&g, &h).unwrap().is_hermitian(HERMITIAN_TOL));
            }

            #[test]
            fn product_commutative_bilinear(a in spectrum(4), b in spectrum(4), c2 in spectrum(4), s in -2.0f64..2.0) {
                let ab = cell_product(&a, &b).unwrap();
                let ba = cell_product(&b, &a).unwrap();
                prop_assert!(ab.try_sub(&ba).unwrap().max_abs() <= 1e-13);
                let sc = Complex64::new(s, 0.5);
                let lhs = cell_product(&(&a.scale(sc) + &c2), &b).unwrap();
                let rhs = &ab.scale(sc) + &cell_product(&c2, &b).unwrap();
                prop_assert!(lhs.try_sub(&rhs).unwrap().max_abs() <= 1e-13 * (1.0 + rhs.max_abs()));
            }
        }
    }
}
