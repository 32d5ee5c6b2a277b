mod common;

use levy_hjmm::engine::{
    coarsen, martingale_test, reduced_model, sample_increments, simulate_full, simulate_reduced, Engine,
};
use levy_hjmm::realization::{build_foliation, foliation_residual, ResidualWindow};
use levy_hjmm::rng::path_rng;
use levy_hjmm::ForwardCurve;
use rayon::prelude::*;

const RHO: f64 = 0.2;
const THETA: f64 = 1.0;
const KAPPA: f64 = 0.03;

/// `∫₀ᵗ α(x + u) du` for the Gaussian Vasicek drift
/// `α(y) = (ρ²/θ)(e^{−θy} − e^{−2θy})`.
fn integrated_vasicek_drift(x: f64, t: f64) -> f64 {
    let e1 = |y: f64| (-THETA * y).exp();
    let e2 = |y: f64| (-2.0 * THETA * y).exp();
    RHO * RHO / THETA * ((e1(x) - e1(x + t)) / THETA - (e2(x) - e2(x + t)) / (2.0 * THETA))
}

#[test]
fn vasicek_short_rate_moments() {
    let spec = common::load("vasicek").with_grid(5.0, 501);
    let engine = Engine::new(&spec).unwrap();
    let h0 = spec.initial_curve_on_grid().unwrap();
    let (horizon, n_steps, n_paths) = (1.0, 100, 10_000);
    let rates: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let incs = sample_increments(&spec.levy, horizon / n_steps as f64, n_steps, &mut path_rng(42, p));
            engine.simulate_full(&h0, horizon, &incs).unwrap().terminal().short_rate()
        })
        .collect();
    let n = n_paths as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // Ornstein–Uhlenbeck moments of r_t(0) under the HJM drift
    let exact_mean = KAPPA + integrated_vasicek_drift(0.0, horizon);
    let exact_var = RHO * RHO * (1.0 - (-2.0 * THETA * horizon).exp()) / (2.0 * THETA);
    let dt = horizon / n_steps as f64;
    assert!((mean - exact_mean).abs() < 4.0 * (var / n).sqrt(), "{mean} vs {exact_mean}");
    // sampling error of the variance plus the O(θΔt) Riemann-sum bias
    let tol = 4.0 * exact_var * (2.0 / n).sqrt() + 2.0 * THETA * dt * exact_var;
    assert!((var - exact_var).abs() < tol, "{var} vs {exact_var}");
}

#[test]
fn vasicek_foliation_matches_closed_form() {
    let spec = common::load("vasicek").with_grid(10.0, 1001);
    let h0 = spec.initial_curve_on_grid().unwrap();
    let fol = build_foliation(&spec, &h0, 1.0, 100).unwrap();
    assert_eq!(fol.psi[0], h0);
    for (psi, &t) in fol.psi.iter().zip(&fol.times).step_by(10) {
        let exact = ForwardCurve::from_fn(spec.space, |x| KAPPA + integrated_vasicek_drift(x, t));
        let valid = spec.space.x_max - t;
        let err = psi.truncated(valid).sub(&exact.truncated(valid)).sup_norm();
        // first order in Δt = 0.01 against a drift of size ρ²/θ
        assert!(err < 0.01 * RHO * RHO, "t = {t}: {err}");
    }
}

#[test]
fn reduced_paths_lie_on_the_leaves() {
    for name in ["vasicek", "hump", "cp_exponential"] {
        let spec = common::load(name).with_grid(10.0, 257);
        let h0 = spec.initial_curve_on_grid().unwrap();
        let sim = simulate_reduced(&spec, &h0, 1.0, 64, &mut path_rng(9, 0)).unwrap();
        let fol = build_foliation(&spec, &h0, 1.0, 64).unwrap();
        let res = foliation_residual(&sim, &fol, ResidualWindow::Transport).unwrap();
        assert!(res.iter().all(|&r| r < 1e-10), "{name}: {res:?}");
    }
}

#[test]
fn full_paths_stay_on_the_leaves_inside_the_domain_of_dependence() {
    let spec = common::load("hump").with_grid(10.0, 257);
    let h0 = spec.initial_curve_on_grid().unwrap();
    let fol = build_foliation(&spec, &h0, 1.0, 64).unwrap();
    let sim = simulate_full(&spec, &h0, 1.0, 64, &mut path_rng(9, 0)).unwrap();
    let res = foliation_residual(&sim, &fol, ResidualWindow::DomainOfDependence).unwrap();
    assert!(res.iter().all(|&r| r < 1e-12), "{res:?}");
}

#[test]
fn perturbed_curve_leaves_the_leaf() {
    let spec = common::load("vasicek").with_grid(10.0, 257);
    let h0 = spec.initial_curve_on_grid().unwrap();
    let fol = build_foliation(&spec, &h0, 1.0, 64).unwrap();
    let mut sim = simulate_reduced(&spec, &h0, 1.0, 64, &mut path_rng(9, 0)).unwrap();
    let bump = ForwardCurve::from_fn(spec.space, |x| 0.01 * (-5.0 * x).exp());
    for c in sim.curves.iter_mut().skip(1) {
        *c = c.add(&bump);
    }
    let res = foliation_residual(&sim, &fol, ResidualWindow::Transport).unwrap();
    // e^{−5x} against the nearest multiple of e^{−x}; H_β norm of the bump ≈ 0.01·√(25/4.5)
    assert!(res[1..].iter().all(|&r| r > 5e-3), "{res:?}");
}

#[test]
fn dropping_a_basis_vector_breaks_invariance() {
    let spec = common::load("hump").with_grid(10.0, 257);
    let h0 = spec.initial_curve_on_grid().unwrap();
    let sim = simulate_reduced(&spec, &h0, 1.0, 64, &mut path_rng(9, 0)).unwrap();
    let fol = build_foliation(&spec, &h0, 1.0, 64).unwrap();
    assert_eq!(fol.basis.len(), 2);
    for drop in 0..2 {
        let mut smaller = fol.clone();
        smaller.basis.remove(drop);
        let res = foliation_residual(&sim, &smaller, ResidualWindow::Transport).unwrap();
        let max = res.iter().fold(0.0f64, |m, &r| m.max(r));
        assert!(max > 1e-3, "dropping {drop}: {max}");
    }
}

#[test]
fn reduced_and_full_agree_along_a_common_path() {
    let spec = common::load("vasicek");
    let fine = sample_increments(&spec.levy, 1.0 / 128.0, 128, &mut path_rng(3, 0));
    let gaps: Vec<f64> = [(129, 32), (257, 64), (513, 128)]
        .iter()
        .map(|&(n_grid, n_steps)| {
            let spec = spec.with_grid(10.0, n_grid);
            let engine = Engine::new(&spec).unwrap();
            let reduced = reduced_model(&spec).unwrap();
            let h0 = spec.initial_curve_on_grid().unwrap();
            let incs = coarsen(&fine, 128 / n_steps);
            let a = engine.simulate_full(&h0, 1.0, &incs).unwrap();
            let b = reduced.simulate(&engine, &h0, 1.0, &incs).unwrap();
            a.terminal().truncated(9.0).sub(&b.terminal().truncated(9.0)).sup_norm()
        })
        .collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

#[test]
fn martingale_negative_control() {
    let spec = common::load("vasicek").with_grid(5.0, 501);
    let engine = Engine::new(&spec).unwrap();
    let h0 = spec.initial_curve_on_grid().unwrap();
    let ok = martingale_test(&engine, &h0, 2.0, 2_000, 200, 5).unwrap();
    assert!(ok.passes(3.0), "{ok:?}");
    // without the drift the z-score grows like √n_paths
    let small = martingale_test(&engine.clone().without_drift(), &h0, 2.0, 500, 200, 5).unwrap();
    let large = martingale_test(&engine.without_drift(), &h0, 2.0, 4_000, 200, 5).unwrap();
    assert!(large.z_score.abs() > small.z_score.abs() && large.z_score.abs() > 3.0, "{small:?} {large:?}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = common::load("cp_exponential").with_grid(5.0, 501);
    let engine = Engine::new(&spec).unwrap();
    let h0 = spec.initial_curve_on_grid().unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| martingale_test(&engine, &h0, 2.0, 200, 100, 17).unwrap())
    };
    assert_eq!(run(1), run(3));
}
