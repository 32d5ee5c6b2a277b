//! Monte Carlo check of the no-arbitrage property: discounted bond prices
//! `P(t,T)/B(t)` have constant expectation `P(0,T)`.

use rayon::prelude::*;
use serde::Serialize;

use super::pricing::{bank_account, bond_price};
use super::simulate::{sample_increments, Engine};
use crate::curve::ForwardCurve;
use crate::error::{Error, Result};
use crate::rng::path_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub maturity: f64,
    /// Observation time `T/2`.
    pub time: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `P(0,T)` from the initial curve.
    pub reference: f64,
    pub z_score: f64,
}

impl MartingaleReport {
    pub fn passes(&self, z_max: f64) -> bool {
        self.z_score.abs() <= z_max
    }
}

/// Simulates `n_paths` paths with time step `T/n_steps` up to `t = T/2`
/// and compares the sample mean of `P(t,T)/B(t)` to `P(0,T)`. Path `i`
/// draws from the stream `(seed, i)`, so results do not depend on the
/// thread count.
pub fn martingale_test(
    engine: &Engine,
    h0: &ForwardCurve,
    maturity: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<MartingaleReport> {
    if n_paths < 2 || n_steps < 2 {
        return Err(Error::InvalidArgument("need at least 2 paths and 2 steps".into()));
    }
    let reference = bond_price(h0, maturity)?;
    let dt = maturity / n_steps as f64;
    let steps = n_steps / 2;
    let time = steps as f64 * dt;
    let values = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let incs = sample_increments(engine.model(), dt, steps, &mut rng);
            let sim = engine.simulate_full(h0, time, &incs)?;
            let bank = bank_account(&sim.short_rates(), &sim.times)?;
            Ok(bond_price(sim.terminal(), maturity - time)? / bank)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stderr = (var / n).sqrt();
    // identical paths leave only rounding noise in the variance
    let z_score = if stderr > 1e-12 * reference {
        (mean - reference) / stderr
    } else if (mean - reference).abs() <= 1e-12 * reference {
        0.0
    } else {
        f64::INFINITY.copysign(mean - reference)
    };
    Ok(MartingaleReport {
        maturity,
        time,
        n_paths,
        n_steps,
        mean,
        stderr,
        reference,
        z_score,
    })
}
