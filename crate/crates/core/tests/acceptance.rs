//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Runs without the libtest harness so the
//! lines always reach the output.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bump, free_field_oracle, integrate, max_rel, ode_oracle};
use oscatter::cell::{solve_cell_poisson, CellSpectrum, PeriodicCell};
use oscatter::expansion::{amplitude_series, expand_plane_wave, expand_source};
use oscatter::grid::{SlowField, SlowGrid};
use oscatter::harness::{csv_string, run_amplitude_table, run_sweep, ExperimentConfig, FitStatus, SweepResult};
use oscatter::solver::{plane_wave_far_field, solve_plane_wave, solve_radiating, RadiatingSolver};
use oscatter::Error;

const JOBS: usize = 4;

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn check(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        let line = format!("{} [{id}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((pass, line));
    }
}

fn config(order: usize) -> ExperimentConfig {
    ExperimentConfig {
        order,
        jobs: Some(JOBS),
        ..Default::default()
    }
}

fn fitted(result: &SweepResult, column: &str) -> Option<(f64, f64, usize)> {
    match &result.fit(column)?.status {
        FitStatus::Fitted(f) => Some((f.slope, f.r2, f.samples)),
        _ => None,
    }
}

fn value_at(result: &SweepResult, column: &str, eps: f64) -> f64 {
    result
        .series(column)
        .unwrap()
        .into_iter()
        .find(|(e, _)| *e == eps)
        .map(|(_, v)| v)
        .unwrap()
}

fn rate_check(
    report: &mut Report,
    id: usize,
    title: &str,
    result: &SweepResult,
    column: &str,
    slope_min: f64,
    r2_min: Option<f64>,
) {
    match fitted(result, column) {
        Some((slope, r2, n)) => {
            let bound = r2_min.map_or(String::new(), |b| format!(" (>= {b})"));
            report.check(
                id,
                title,
                slope >= slope_min && r2_min.is_none_or(|b| r2 >= b),
                format!("slope {slope:.3} (>= {slope_min}), r2 {r2:.4}{bound}, {n} samples"),
            )
        }
        None => report.check(id, title, false, format!("no fit for {column}")),
    }
}

fn discrepancy_ratios(report: &mut Report, p2: &SweepResult, p3: &SweepResult) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (p, result) in [(2usize, p2), (3, p3)] {
        let column = format!("disc_sup_p{p}");
        for (a, b) in [(0.1, 0.05), (0.05, 0.025)] {
            let rate = (value_at(result, &column, a) / value_at(result, &column, b)).log2();
            let ok = (rate - (p as f64 - 1.0)).abs() <= 0.35;
            pass &= ok;
            detail.push(format!("p={p} {a}->{b}: {rate:.3}"));
        }
    }
    report.check(
        4,
        "discrepancy log2 ratios within (p-1) +- 0.35",
        pass,
        detail.join(", "),
    );
}

fn exact_case(report: &mut Report) {
    let mut cfg = config(2);
    cfg.potential.cosines = vec![1.0];
    let q = cfg.build_potential().unwrap();
    let f = cfg.build_source().unwrap();
    let sol = expand_source(&q, &f, cfg.energy, 3).unwrap();
    let pw = expand_plane_wave(&q, 1.0, cfg.energy, 3).unwrap();
    let vanish = sol.terms[1..].iter().all(|t| t.is_zero())
        && pw.terms[1..].iter().all(|t| t.is_zero())
        && amplitude_series(&pw).unwrap()[1..]
            .iter()
            .all(|a| a.values.iter().all(|v| v.norm() == 0.0));
    let field = run_sweep(&cfg).unwrap();
    let amp = run_amplitude_table(&cfg).unwrap();
    let field_err = field
        .series("err_sup_p0")
        .unwrap()
        .iter()
        .map(|p| p.1)
        .fold(0.0, f64::max);
    let amp_err = amp
        .series("amp_sup_p0")
        .unwrap()
        .iter()
        .map(|p| p.1)
        .fold(0.0, f64::max);
    let flagged = field.exact_case && amp.exact_case;
    report.check(
        5,
        "exact case for y-independent q",
        vanish && flagged && field_err <= 1e-7 && amp_err <= 1e-7,
        format!(
            "terms n>=1 vanish: {vanish}, flagged: {flagged}, sup |psi_eps - psi_0| {field_err:.2e}, |F_eps - F0| {amp_err:.2e} (<= 1e-7)"
        ),
    );
}

fn solver_oracles(report: &mut Report) {
    let grid = SlowGrid::new(3.0, 1201).unwrap();
    let src = |x: f64| bump(x, 1.0) * (1.0 + 0.5 * x);
    let psi = solve_radiating(&SlowField::zeros(grid), &SlowField::from_real_fn(grid, src), 1.0).unwrap();
    let oracle: Vec<Complex64> = grid
        .nodes()
        .map(|x| free_field_oracle(1.0, x, &src, 1.0, 1e-13))
        .collect();
    let free = max_rel(psi.values(), &oracle);

    let pot = |x: f64| -4.0 * bump(x, 1.0);
    let src = |x: f64| bump(x, 0.7);
    let psi = solve_radiating(
        &SlowField::from_real_fn(grid, pot),
        &SlowField::from_real_fn(grid, src),
        1.0,
    )
    .unwrap();
    let bvp = max_rel(psi.values(), &ode_oracle(1.0, &pot, &src, 3.0, 1201, 8));

    let delta = 1e-4;
    let p = SlowField::from_real_fn(grid, |x| delta * bump(x, 1.0));
    let chi = solve_plane_wave(&p, 1.0, 1.0).unwrap();
    let amp = plane_wave_far_field(&p, &chi, 1.0, 1.0).unwrap();
    let mass = integrate(&|y| Complex64::new(bump(y, 1.0), 0.0), -1.0, 1.0, 1e-15);
    let born = (amp.value(1.0).unwrap() + Complex64::new(0.0, 0.5) * delta * mass).norm() / (delta * delta);

    let mut flux: f64 = 0.0;
    for (a, e) in [(5.0, 1.0), (-3.0, 2.0), (20.0, 0.5)] {
        let p = SlowField::from_real_fn(grid, |x| a * bump(x, 1.0) * (1.0 + 0.3 * (7.0 * x).cos()));
        let solver = RadiatingSolver::new(&p, e).unwrap();
        for dir in [1.0, -1.0] {
            let chi = solver.solve_plane_wave(dir).unwrap();
            flux = flux.max(
                solver
                    .far_field_plane_wave(dir, &chi)
                    .unwrap()
                    .flux_defect()
                    .unwrap()
                    .abs(),
            );
        }
    }
    report.check(
        6,
        "radiating solver oracles",
        free <= 1e-8 && bvp <= 1e-6 && born <= 10.0 && flux <= 1e-8,
        format!(
            "free-space {free:.2e} (<= 1e-8), BVP {bvp:.2e} (<= 1e-6), Born defect / delta^2 {born:.3} (<= 10), flux {flux:.2e} (<= 1e-8)"
        ),
    );
}

fn cell_suite(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut round_trip: f64 = 0.0;
    let mut mean_exact = true;
    for trial in 0..20 {
        let cell = PeriodicCell::new(vec![0.5 + trial as f64 * 0.1]).unwrap();
        let m = 12;
        let coeffs: Vec<Complex64> = (0..2 * m + 1)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut u = CellSpectrum::from_coeffs(cell, m, coeffs).unwrap();
        u.coeffs_mut()[m] = Complex64::new(0.0, 0.0);
        let back = solve_cell_poisson(&u.laplacian()).unwrap();
        mean_exact &= back.mean() == Complex64::new(0.0, 0.0);
        round_trip = round_trip.max((&back - &u).max_abs() / u.max_abs());
    }
    let rejected = matches!(
        solve_cell_poisson(&CellSpectrum::from_trig(PeriodicCell::unit(1), 4, &[1e-6, 1.0], &[]).unwrap()),
        Err(Error::SolvabilityViolation { .. })
    );

    let cfg = config(2);
    let sol = expand_source(&cfg.build_potential().unwrap(), &cfg.build_source().unwrap(), 1.0, 2).unwrap();
    let psi0 = sol.terms[0].psi.values();
    let mut phi2: f64 = 0.0;
    for (i, x) in sol.grid().nodes().enumerate() {
        for y in [0.0, 0.21, 0.5, 0.77] {
            let shape = (2.0 * PI * y).cos() / (4.0 * PI * PI) + 0.5 * (4.0 * PI * y).cos() / (16.0 * PI * PI);
            let want = -psi0[i] * 5.0 * bump(x, 1.0) * shape;
            phi2 = phi2.max((sol.terms[2].phi[i].eval(&[y]) - want).norm());
        }
    }
    report.check(
        7,
        "periodic cell suite",
        round_trip <= 1e-12 && mean_exact && rejected && phi2 <= 1e-10,
        format!(
            "Laplacian round-trip {round_trip:.2e} (<= 1e-12), zero mean exact: {mean_exact}, nonzero mean rejected: {rejected}, separable phi_2 {phi2:.2e} (<= 1e-10)"
        ),
    );
}

fn determinism(report: &mut Report) {
    let cfg = ExperimentConfig {
        eps: vec![0.1, 0.07, 0.05],
        ..config(2)
    };
    let serial = ExperimentConfig {
        jobs: Some(1),
        ..cfg.clone()
    };
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, c) in [&serial, &serial, &cfg].into_iter().enumerate() {
        let result = run_sweep(c).unwrap();
        let files = oscatter::harness::emit(&result, dir.path(), &format!("run{i}"), false).unwrap();
        bytes.push(std::fs::read(&files[0]).unwrap());
        assert_eq!(bytes[i], csv_string(&result).unwrap().into_bytes());
    }
    let repeat = bytes[0] == bytes[1];
    let parallel = bytes[0] == bytes[2];
    report.check(
        8,
        "byte-identical CSV",
        repeat && parallel,
        format!("two serial runs identical: {repeat}, jobs 1 vs {JOBS} identical: {parallel}"),
    );
}

fn main() -> std::process::ExitCode {
    let mut report = Report { lines: Vec::new() };
    let p2 = run_sweep(&config(2)).unwrap();
    let p3 = run_sweep(&config(3)).unwrap();
    let amp = run_amplitude_table(&config(2)).unwrap();

    rate_check(
        &mut report,
        1,
        "p=2 field error in H1_gamma vs psi_0",
        &p2,
        "err_h1_p0",
        0.9,
        Some(0.98),
    );
    rate_check(
        &mut report,
        2,
        "p=3 field error in H1_gamma vs Psi^(3)",
        &p3,
        "err_h1_p3",
        1.8,
        Some(0.95),
    );
    rate_check(
        &mut report,
        3,
        "amplitude error sup over direction pairs vs F0",
        &amp,
        "amp_sup_p0",
        1.8,
        None,
    );
    discrepancy_ratios(&mut report, &p2, &p3);
    exact_case(&mut report);
    solver_oracles(&mut report);
    cell_suite(&mut report);
    determinism(&mut report);

    let failed = report.lines.iter().filter(|(ok, _)| !ok).count();
    println!(
        "acceptance: {} of {} criteria passed",
        report.lines.len() - failed,
        report.lines.len()
    );
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
