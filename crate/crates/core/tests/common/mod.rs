#![allow(dead_code)]

use std::path::PathBuf;

use levy_hjmm::{parse, ModelSpec};

pub const CORPUS: [&str; 9] = [
    "vasicek",
    "cp_point_mass",
    "cp_exponential",
    "merton",
    "gamma",
    "hump",
    "sigmoid_cp",
    "bilateral_gamma",
    "tabulated",
];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.hjmm"))
}

pub fn load(name: &str) -> ModelSpec {
    ModelSpec::from_file(&corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus() -> Vec<(&'static str, ModelSpec)> {
    CORPUS.iter().map(|&n| (n, load(n))).collect()
}

/// Short-rate-dependent volatility whose integrated volatility reaches 0.95
/// of the way to the edge of the cumulant domain. High-order cumulant terms
/// stay well above the rank threshold, but `P/B` has infinite variance, so
/// the spec is kept out of the Monte Carlo corpus.
pub fn sigmoid_near_domain_edge() -> ModelSpec {
    parse(
        "levy { kind = compound_poisson intensity = 1 jump = exponential(rate = 1) }
volatility {
  term {
    phi = sigmoid_short_rate(lo = 0.2, hi = 1, center = 0.03, slope = 50)
    lambda = exp_poly(rho = -0.95, theta = 1)
  }
}
space { beta = 0.5 beta_prime = 1 x_max = 20 n_grid = 512 }
k_interval { lo = -0.5 hi = 0.97 }
initial_curve { curve = flat(kappa = 0.03) }",
    )
    .unwrap()
}
