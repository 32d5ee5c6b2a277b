mod common;

use levy_hjmm::realization::{check_sufficient, vandermonde_rank_probe, vpsi_dimension_estimate, chebyshev_sample_points};
use levy_hjmm::rng::path_rng;
use levy_hjmm::{ForwardCurve, LevyModel};

#[test]
fn vpsi_estimate_is_monotone_in_sample_size() {
    for spec in [common::load("sigmoid_cp"), common::sigmoid_near_domain_edge()] {
        let h0 = spec.initial_curve_on_grid().unwrap();
        let ranks: Vec<usize> = (1..=10)
            .map(|m| vpsi_dimension_estimate(&spec, &h0, m, &mut path_rng(4, 0)).unwrap().rank)
            .collect();
        assert_eq!(ranks[0], 1);
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{ranks:?}");
        assert!(ranks[9] >= 4, "{ranks:?}");
    }
}

#[test]
fn rank_probe_reaches_m_on_jump_corpus_models() {
    let xs = chebyshev_sample_points(64);
    for (name, spec) in common::corpus() {
        if !spec.levy.has_jumps() {
            continue;
        }
        // scale Λ = 1 − e^{−x} so that θΛ stays inside the cumulant domain
        let d = spec.levy.domain();
        let reach = 0.9 * d.upper.min(-d.lower).min(10.0);
        let lambda = ForwardCurve::from_fn(spec.space, |x| reach * (1.0 - (-x).exp()));
        for m in 2..=4usize {
            let thetas: Vec<f64> = (0..m).map(|i| 0.4 + 0.6 * i as f64 / (m - 1) as f64).collect();
            let rank = vandermonde_rank_probe(&spec.levy, &lambda, &thetas, &xs).unwrap().rank;
            assert_eq!(rank, m, "{name}, m = {m}");
        }
    }
}

#[test]
fn brownian_rank_is_capped() {
    let xs = chebyshev_sample_points(64);
    let lambda = ForwardCurve::from_fn(Default::default(), |x| 1.0 - (-x).exp());
    let thetas = [0.2, 0.4, 0.6, 0.8, 1.0];
    assert_eq!(vandermonde_rank_probe(&LevyModel::brownian(0.0, 1.0), &lambda, &thetas, &xs).unwrap().rank, 1);
    assert_eq!(vandermonde_rank_probe(&LevyModel::brownian(0.3, 1.0), &lambda, &thetas, &xs).unwrap().rank, 2);
}

#[test]
fn report_serializes() {
    let report = check_sufficient(&common::load("hump"));
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["exists"], true);
    assert_eq!(json["dimension"], 2);
    assert_eq!(json["reason"], "realized");
    assert_eq!(json["basis"].as_array().unwrap().len(), 2);
}
