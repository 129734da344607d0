mod common;

use common::{bump, free_field_oracle, integrate, kernel, max_rel, ode_oracle};
use num_complex::Complex64;
use oscatter::grid::{SlowField, SlowGrid};
use oscatter::solver::{far_field, plane_wave_far_field, solve_plane_wave, solve_radiating, RadiatingSolver};

#[test]
fn free_space_matches_quadrature_oracle() {
    let grid = SlowGrid::new(3.0, 1201).unwrap();
    let src = |x: f64| bump(x, 1.0) * (1.0 + 0.5 * x);
    let f = SlowField::from_real_fn(grid, src);
    let psi = solve_radiating(&SlowField::zeros(grid), &f, 1.0).unwrap();
    let oracle: Vec<Complex64> = grid
        .nodes()
        .map(|x| free_field_oracle(1.0, x, &src, 1.0, 1e-13))
        .collect();
    let err = max_rel(psi.values(), &oracle);
    println!("free-space relative error {err:e}");
    assert!(err <= 1e-8);
}

#[test]
fn well_matches_outgoing_bvp() {
    let (x_half, n) = (3.0, 1201);
    let grid = SlowGrid::new(x_half, n).unwrap();
    let pot = |x: f64| -4.0 * bump(x, 1.0);
    let src = |x: f64| bump(x, 0.7);
    let p = SlowField::from_real_fn(grid, pot);
    let f = SlowField::from_real_fn(grid, src);
    let psi = solve_radiating(&p, &f, 1.0).unwrap();
    let oracle = ode_oracle(1.0, &pot, &src, x_half, n, 8);
    let err = max_rel(psi.values(), &oracle);
    println!("BVP relative error {err:e}");
    assert!(err <= 1e-6);
}

#[test]
fn born_limit_of_weak_bump() {
    let grid = SlowGrid::new(3.0, 1201).unwrap();
    let delta = 1e-4;
    let p = SlowField::from_real_fn(grid, |x| delta * bump(x, 1.0));
    let chi = solve_plane_wave(&p, 1.0, 1.0).unwrap();
    // First Born term of the scattered field.
    let worst = grid
        .nodes()
        .zip(chi.values())
        .step_by(50)
        .map(|(x, v)| {
            let born = -integrate(
                &|y| kernel(1.0, x - y) * delta * bump(y, 1.0) * Complex64::from_polar(1.0, y),
                -1.0,
                1.0,
                1e-15,
            );
            (v - Complex64::from_polar(1.0, x) - born).norm()
        })
        .fold(0.0, f64::max);
    println!("Born field defect {worst:e}");
    assert!(worst <= 10.0 * delta * delta);

    let amp = plane_wave_far_field(&p, &chi, 1.0, 1.0).unwrap();
    let mass = integrate(&|y| Complex64::new(bump(y, 1.0), 0.0), -1.0, 1.0, 1e-15);
    let born = -Complex64::new(0.0, 0.5) * delta * mass;
    let defect = (amp.value(1.0).unwrap() - born).norm();
    println!("Born amplitude defect {defect:e}");
    assert!(defect <= 10.0 * delta * delta);
}

#[test]
fn flux_is_conserved() {
    let grid = SlowGrid::new(2.0, 1001).unwrap();
    for (amp, e) in [(5.0, 1.0), (-3.0, 2.0), (20.0, 0.5)] {
        let p = SlowField::from_real_fn(grid, |x| amp * bump(x, 1.0) * (1.0 + 0.3 * (7.0 * x).cos()));
        let solver = RadiatingSolver::new(&p, e).unwrap();
        for dir in [1.0, -1.0] {
            let chi = solver.solve_plane_wave(dir).unwrap();
            let a = solver.far_field_plane_wave(dir, &chi).unwrap();
            let defect = a.flux_defect().unwrap().abs();
            println!("A = {amp}, E = {e}, dir = {dir}: flux defect {defect:e}");
            assert!(defect <= 1e-8);
        }
    }
}

#[test]
fn far_field_matches_large_x_field() {
    let r = 1.0;
    let x_half = 50.0 * r;
    let grid = SlowGrid::with_max_spacing(x_half, 0.005).unwrap();
    let p = SlowField::from_real_fn(grid, |x| 5.0 * bump(x, r));
    let chi = solve_plane_wave(&p, 1.0, 1.0).unwrap();
    let amp = plane_wave_far_field(&p, &chi, 1.0, 1.0).unwrap();
    let n = grid.len();
    let right = (chi.values()[n - 1] - Complex64::from_polar(1.0, x_half)) / Complex64::from_polar(1.0, x_half);
    let left = (chi.values()[0] - Complex64::from_polar(1.0, -x_half)) / Complex64::from_polar(1.0, x_half);
    assert!((right - amp.value(1.0).unwrap()).norm() <= 1e-6);
    assert!((left - amp.value(-1.0).unwrap()).norm() <= 1e-6);

    // Source form: T(x^) against psi(X) e^{-ikX}.
    let f = SlowField::from_real_fn(grid, |x| bump(x, 0.5));
    let psi = solve_radiating(&p, &f, 1.0).unwrap();
    let t = far_field(&p, &f, &psi, 1.0).unwrap();
    let at_x = psi.values()[n - 1] / Complex64::from_polar(1.0, x_half);
    assert!((at_x - t.value(1.0).unwrap()).norm() <= 1e-6);
}

#[test]
fn grid_refinement_beats_quadrature_order() {
    // Error against a fine reference drops by at least 2^4 per halving.
    let pot = |x: f64| 5.0 * bump(x, 1.0) * (1.0 + (9.0 * x).cos());
    let src = |x: f64| bump(x, 0.8);
    let solve = |n: usize| {
        let grid = SlowGrid::new(2.0, n).unwrap();
        let p = SlowField::from_real_fn(grid, pot);
        let f = SlowField::from_real_fn(grid, src);
        solve_radiating(&p, &f, 1.0).unwrap()
    };
    let reference = solve(3201);
    let errs: Vec<f64> = [101usize, 201, 401]
        .iter()
        .map(|&n| {
            let coarse = solve(n);
            let stride = 3200 / (n - 1);
            let sub: Vec<Complex64> = reference.values().iter().step_by(stride).copied().collect();
            max_rel(coarse.values(), &sub)
        })
        .collect();
    println!("refinement errors {errs:?}");
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 16.0, "{errs:?}");
    }
}
