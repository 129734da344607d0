//! Browser bindings: compare an oscillating potential with its average, the
//! direct field with the two-scale expansion, and amplitude errors across ε.

use oscatter::expansion::{
    amplitude_partial_sum, amplitude_series, evaluate_on, expand_plane_wave, expand_source, AsymptoticSolution,
};
use oscatter::grid::SlowField;
use oscatter::harness::{ExperimentConfig, GridSpec};
use oscatter::potential::{average_potential, TwoScalePotential};
use oscatter::reference::{fine_grid, DirectProblem};
use oscatter::solver::Amplitude;
use wasm_bindgen::prelude::wasm_bindgen;

/// Sampling used by the page; coarser than the command-line defaults so each
/// direct solve stays interactive.
const SLOW_NODES: usize = 801;
const POINTS_PER_PERIOD: f64 = 12.0;
const MAX_UNKNOWNS: usize = 2500;
/// Highest order the page offers.
const ORDER: usize = 3;

fn message(e: oscatter::Error) -> String {
    e.to_string()
}

#[wasm_bindgen]
pub struct Demo {
    cfg: ExperimentConfig,
    q: TwoScalePotential,
    source: SlowField,
    expansion: AsymptoticSolution,
    /// `F^_n` for incidence `+1` and `-1`.
    series: Vec<Vec<Amplitude>>,
}

#[wasm_bindgen]
impl Demo {
    /// Potential `A bump(x) (1 + c1 cos 2 pi y + c2 cos 4 pi y)` at energy `E`.
    #[wasm_bindgen(constructor)]
    pub fn new(amplitude: f64, c1: f64, c2: f64, energy: f64) -> Result<Demo, String> {
        let mut cfg = ExperimentConfig {
            energy,
            order: ORDER,
            grid: GridSpec {
                slow_nodes: SLOW_NODES,
                points_per_period: POINTS_PER_PERIOD,
                max_unknowns: MAX_UNKNOWNS,
                ..GridSpec::default()
            },
            ..ExperimentConfig::default()
        };
        cfg.potential.amplitude = amplitude;
        cfg.potential.cosines = vec![1.0, c1, c2];
        cfg.validate().map_err(message)?;
        let q = cfg.build_potential().map_err(message)?;
        let source = cfg.build_source().map_err(message)?;
        let expansion = expand_source(&q, &source, energy, ORDER).map_err(message)?;
        let series = [1.0, -1.0]
            .iter()
            .map(|&d| amplitude_series(&expand_plane_wave(&q, d, energy, ORDER)?))
            .collect::<oscatter::Result<Vec<_>>>()
            .map_err(message)?;
        Ok(Demo {
            cfg,
            q,
            source,
            expansion,
            series,
        })
    }

    fn direct(&self, eps: f64) -> oscatter::Result<DirectProblem> {
        let g = &self.cfg.grid;
        let fine = fine_grid(g.half_width, eps, self.q.cell(), self.cfg.energy, g.points_per_period)?;
        DirectProblem::new(&self.q, eps, self.cfg.energy, &fine, g.max_unknowns)
    }

    /// Flat triples `(x, q(x, x/eps), q^(x))` over `|x| <= 1.5 R`.
    pub fn potential(&self, eps: f64) -> Result<Vec<f64>, String> {
        let g = &self.cfg.grid;
        let fine =
            fine_grid(g.half_width, eps, self.q.cell(), self.cfg.energy, g.points_per_period).map_err(message)?;
        let avg = average_potential(&self.q);
        let reach = 1.5 * self.q.radius();
        let mut out = Vec::new();
        for x in fine.nodes().filter(|x| x.abs() <= reach) {
            out.push(x);
            out.push(self.q.value(x, x / eps).map_err(message)?);
            let mean = if x.abs() < self.q.radius() {
                avg.interpolate(x).map_err(message)?.re
            } else {
                0.0
            };
            out.push(mean);
        }
        Ok(out)
    }

    /// Flat triples `(x, Re psi_eps, Re Psi^(order))` on the fine grid,
    /// followed by the sup-norm error as the last entry.
    pub fn fields(&self, eps: f64, order: usize) -> Result<Vec<f64>, String> {
        if order > ORDER {
            return Err(format!("order {order} above {ORDER}"));
        }
        let direct = self.direct(eps).map_err(message)?;
        let (psi, _) = direct.solve_source(&self.source).map_err(message)?;
        let approx = evaluate_on(&self.expansion, order, eps, direct.grid()).map_err(message)?;
        let mut out = Vec::with_capacity(3 * psi.values().len() + 1);
        let mut worst: f64 = 0.0;
        for ((x, a), b) in direct.grid().nodes().zip(psi.values()).zip(approx.values()) {
            out.extend([x, a.re, b.re]);
            worst = worst.max((a - b).norm());
        }
        out.push(worst);
        Ok(out)
    }

    /// For each `eps`: `eps` followed by the sup over direction pairs of
    /// `|F_eps - sum_{n <= k} eps^n F^_n|` for `k = 0..=3`.
    pub fn amplitude_errors(&self, eps: Vec<f64>) -> Result<Vec<f64>, String> {
        let mut out = Vec::with_capacity(eps.len() * (ORDER + 2));
        for e in eps {
            let direct = self.direct(e).map_err(message)?;
            let mut sup = [0.0f64; ORDER + 1];
            for (dir, terms) in [1.0, -1.0].iter().zip(&self.series) {
                let (_, amp) = direct.solve_plane_wave(*dir).map_err(message)?;
                for (k, s) in sup.iter_mut().enumerate() {
                    let partial = amplitude_partial_sum(terms, k, e);
                    for (a, b) in amp.values.iter().zip(&partial.values) {
                        *s = s.max((a - b).norm());
                    }
                }
            }
            out.push(e);
            out.extend(sup);
        }
        Ok(out)
    }
}
