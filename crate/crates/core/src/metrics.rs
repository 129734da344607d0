//! Weighted Sobolev norms and log-log rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{slow_derivative, SlowField};

/// `||psi||^2 = sum_{k <= s} int_{|x| <= window} |psi^(k)|^2 (1 + x^2)^(-gamma) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: usize,
    pub gamma: f64,
    pub window: f64,
}

impl NormSpec {
    pub fn new(s: usize, gamma: f64, window: f64) -> Result<Self> {
        if s > 2 {
            return Err(Error::InvalidArgument(format!("derivative count {s} not in 0..=2")));
        }
        if !(window > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad norm window {window} or weight {gamma}"
            )));
        }
        Ok(Self { s, gamma, window })
    }

    /// Same weight and window with a different derivative count.
    pub fn with_s(self, s: usize) -> Self {
        Self { s, ..self }
    }
}

impl Default for NormSpec {
    fn default() -> Self {
        Self {
            s: 1,
            gamma: 2.0,
            window: 4.0,
        }
    }
}

/// Discrete `H^s_gamma` norm: sixth-order differences, trapezoid over the window.
pub fn weighted_sobolev_norm(field: &SlowField, spec: &NormSpec) -> Result<f64> {
    let grid = field.grid();
    if spec.window > grid.half_width() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "norm window {} exceeds grid half-width {}",
            spec.window,
            grid.half_width()
        )));
    }
    let mut derivs = vec![field.clone()];
    for k in 1..=spec.s {
        derivs.push(slow_derivative(field, k)?);
    }
    let h = grid.spacing();
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.node(i).abs() <= spec.window * (1.0 + 1e-12))
        .collect();
    let (first, last) = match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Ok(0.0),
    };
    let mut total = 0.0;
    for &i in &inside {
        let x = grid.node(i);
        let end = if i == first || i == last { 0.5 } else { 1.0 };
        let weight = end * h * (1.0 + x * x).powf(-spec.gamma);
        let pointwise: f64 = derivs.iter().map(|d| d.values()[i].norm_sqr()).sum();
        total += weight * pointwise;
    }
    Ok(total.sqrt())
}

/// `max |psi(x)|` over `|x| <= window`.
pub fn sup_norm(field: &SlowField, window: f64) -> f64 {
    field
        .grid()
        .nodes()
        .zip(field.values())
        .filter(|(x, _)| x.abs() <= window * (1.0 + 1e-12))
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
}

/// Least-squares line through `(ln eps, ln err)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
}

pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} samples, need at least 3",
            samples.len()
        )));
    }
    if let Some((e, err)) = samples.iter().find(|(e, err)| !(*e > 0.0) || !(*err > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive sample ({e}, {err})")));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(e, err)| (e.ln(), err.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all eps values coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        samples: samples.len(),
    })
}
