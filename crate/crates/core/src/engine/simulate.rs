//! Grid simulation of the forward-curve dynamics and its finite-dimensional
//! reduction.
//!
//! One step of the full scheme is
//!
//! ```text
//! r_{n+1} = S_Δt ( r_n + α(r_n) Δt + σ(r_n) ΔX_n )
//! ```
//!
//! with `S_Δt` the grid shift and `σ(r_n)` evaluated at the pre-step curve.
//! The reduced scheme writes `r_n = ψ_n + Σⱼ Z_n,j vⱼ`, integrates ψ with the
//! same scheme without noise and advances the coordinates exactly through
//! the shift, `Z_{n+1} = e^{DΔt}(Z_n + s_n ΔX_n)`, where `D` is d/dx on
//! `V = span(vⱼ)` and `s_n` are the coordinates of `σ` in `V`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::drift::Volatility;
use crate::curve::{CurveSpaceConfig, ForwardCurve};
use crate::dsl::ModelSpec;
use crate::error::{Error, Result};
use crate::expoly::{coordinates, shift_matrix, ExpPoly, SPAN_TOLERANCE};
use crate::levy::LevyModel;
use crate::realization::check_sufficient;

/// Curve values beyond this magnitude abort a path.
pub const OVERFLOW_GUARD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedPath {
    pub psi: Vec<ForwardCurve>,
    /// Coordinates `Z` at each time.
    pub states: Vec<Vec<f64>>,
    pub basis: Vec<ExpPoly>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    /// Forward curves at each time; for a reduced run these are `ψ + V·Z`.
    pub curves: Vec<ForwardCurve>,
    /// Driving increments `ΔX_n`, one per step.
    pub increments: Vec<f64>,
    pub seed: Option<u64>,
    pub reduced: Option<ReducedPath>,
}

impl SimulationResult {
    pub fn terminal(&self) -> &ForwardCurve {
        self.curves.last().expect("a simulation has at least the initial curve")
    }

    pub fn short_rates(&self) -> Vec<f64> {
        self.curves.iter().map(ForwardCurve::short_rate).collect()
    }
}

/// Draws the increments of `X` over `n_steps` steps of length `dt`.
pub fn sample_increments<R: Rng + ?Sized>(model: &LevyModel, dt: f64, n_steps: usize, rng: &mut R) -> Vec<f64> {
    (0..n_steps).map(|_| model.sample_increment(dt, rng)).collect()
}

/// Sums consecutive groups of `factor` increments: the increments of the
/// same driving path on a grid `factor` times coarser.
pub fn coarsen(increments: &[f64], factor: usize) -> Vec<f64> {
    increments.chunks(factor).map(|c| c.iter().sum()).collect()
}

fn time_grid(horizon: f64, n_steps: usize) -> Result<(f64, Vec<f64>)> {
    if !(horizon > 0.0 && horizon.is_finite()) || n_steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "need horizon > 0 and n_steps > 0, got {horizon} and {n_steps}"
        )));
    }
    let dt = horizon / n_steps as f64;
    Ok((dt, (0..=n_steps).map(|n| n as f64 * dt).collect()))
}

fn guard(curve: &ForwardCurve, step: usize) -> Result<()> {
    if curve.values().iter().all(|v| v.is_finite() && v.abs() <= OVERFLOW_GUARD) {
        Ok(())
    } else {
        Err(Error::Numerics(format!(
            "curve exceeded the overflow guard {OVERFLOW_GUARD:e} at step {step}"
        )))
    }
}

/// The drift and volatility last used, reused while Φ stays unchanged.
#[derive(Debug, Clone, Default)]
pub struct DriftCache {
    weights: Vec<f64>,
    sigma: Option<ForwardCurve>,
    alpha: Option<ForwardCurve>,
}

/// Full grid simulator.
#[derive(Debug, Clone)]
pub struct Engine {
    model: LevyModel,
    volatility: Volatility,
    config: CurveSpaceConfig,
    drift_enabled: bool,
}

impl Engine {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        spec.levy.check()?;
        spec.space.check()?;
        Ok(Self {
            model: spec.levy,
            volatility: Volatility::from_spec(spec)?,
            config: spec.space,
            drift_enabled: true,
        })
    }

    /// Switches the no-arbitrage drift off. Used as a negative control:
    /// without it discounted bond prices stop being martingales.
    pub fn without_drift(mut self) -> Self {
        self.drift_enabled = false;
        self
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn volatility(&self) -> &Volatility {
        &self.volatility
    }

    pub fn config(&self) -> &CurveSpaceConfig {
        &self.config
    }

    /// `σ(h)` and the drift at `h`, reusing `cache` when the weights Φᵢ(h)
    /// are unchanged.
    pub fn sigma_and_drift<'c>(
        &self,
        h: &ForwardCurve,
        cache: &'c mut DriftCache,
    ) -> Result<(&'c ForwardCurve, &'c ForwardCurve)> {
        let weights = self.volatility.weights(h);
        if cache.sigma.is_none() || weights != cache.weights {
            let (sigma, alpha) = self.volatility.sigma_and_drift(&weights, &self.model)?;
            let alpha = if self.drift_enabled {
                alpha
            } else {
                ForwardCurve::zeros(self.config)
            };
            cache.weights = weights;
            cache.sigma = Some(sigma);
            cache.alpha = Some(alpha);
        }
        Ok((cache.sigma.as_ref().unwrap(), cache.alpha.as_ref().unwrap()))
    }

    /// One splitting step.
    pub fn step(&self, h: &ForwardCurve, dt: f64, dx: f64, cache: &mut DriftCache) -> Result<ForwardCurve> {
        let (sigma, alpha) = self.sigma_and_drift(h, cache)?;
        let mut next = h.axpy(dt, alpha);
        next.add_scaled(dx, sigma);
        Ok(next.shift(dt))
    }

    /// Full simulation driven by the given increments (`n_steps` of them).
    pub fn simulate_full(&self, h0: &ForwardCurve, horizon: f64, increments: &[f64]) -> Result<SimulationResult> {
        let (dt, times) = time_grid(horizon, increments.len())?;
        let mut cache = DriftCache::default();
        let mut curves = Vec::with_capacity(times.len());
        curves.push(h0.clone());
        for (n, &dx) in increments.iter().enumerate() {
            let next = self.step(&curves[n], dt, dx, &mut cache)?;
            guard(&next, n + 1)?;
            curves.push(next);
        }
        Ok(SimulationResult {
            times,
            curves,
            increments: increments.to_vec(),
            seed: None,
            reduced: None,
        })
    }

    /// Noiseless path `ψ` of `dψ/dt = (d/dx)ψ + α(ψ)`, integrated with the
    /// same splitting scheme.
    pub fn deterministic_path(&self, h0: &ForwardCurve, horizon: f64, n_steps: usize) -> Result<Vec<ForwardCurve>> {
        let (dt, _) = time_grid(horizon, n_steps)?;
        let mut cache = DriftCache::default();
        let mut path = Vec::with_capacity(n_steps + 1);
        path.push(h0.clone());
        for n in 0..n_steps {
            let next = self.step(&path[n], dt, 0.0, &mut cache)?;
            guard(&next, n + 1)?;
            path.push(next);
        }
        Ok(path)
    }
}

/// Data of the finite-dimensional realization: basis of `V`, the matrix
/// of d/dx on `V`, and the coordinates of every direction λᵢ in `V`.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    basis: Vec<ExpPoly>,
    basis_curves: Vec<ForwardCurve>,
    generator: DMatrix<f64>,
    loadings: Vec<DVector<f64>>,
}

impl ReducedModel {
    pub fn new(basis: Vec<ExpPoly>, directions: &[ExpPoly], config: &CurveSpaceConfig) -> Result<Self> {
        let generator = shift_matrix(&basis)?;
        let mut loadings = Vec::with_capacity(directions.len());
        for (i, lam) in directions.iter().enumerate() {
            let (c, residual) = coordinates(lam, &basis)?;
            if residual > SPAN_TOLERANCE {
                return Err(Error::NoRealization(format!(
                    "direction {} is not in the realization space (residual {residual:.3e})",
                    i + 1
                )));
            }
            loadings.push(DVector::from_vec(c));
        }
        let basis_curves = basis.iter().map(|b| b.evaluate_on_grid(config)).collect();
        Ok(Self {
            basis,
            basis_curves,
            generator,
            loadings,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ExpPoly] {
        &self.basis
    }

    pub fn basis_curves(&self) -> &[ForwardCurve] {
        &self.basis_curves
    }

    /// Matrix `D` with `vⱼ′ = Σᵢ D[i][j] vᵢ`.
    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    /// Coordinates of `σ = Σᵢ wᵢ λᵢ` in the basis.
    pub fn sigma_coordinates(&self, weights: &[f64]) -> DVector<f64> {
        let mut s = DVector::zeros(self.dimension());
        for (c, &w) in self.loadings.iter().zip(weights) {
            s.axpy(w, c, 1.0);
        }
        s
    }

    /// `ψ + Σⱼ zⱼ vⱼ` on the grid.
    pub fn reconstruct(&self, psi: &ForwardCurve, z: &[f64]) -> ForwardCurve {
        let mut out = psi.clone();
        for (v, &zj) in self.basis_curves.iter().zip(z) {
            out.add_scaled(zj, v);
        }
        out
    }

    /// Reduced simulation driven by the given increments.
    pub fn simulate(
        &self,
        engine: &Engine,
        h0: &ForwardCurve,
        horizon: f64,
        increments: &[f64],
    ) -> Result<SimulationResult> {
        let n_steps = increments.len();
        let (dt, times) = time_grid(horizon, n_steps)?;
        let propagator = (&self.generator * dt).exp();
        let mut cache = DriftCache::default();
        let mut psi = Vec::with_capacity(n_steps + 1);
        let mut states = Vec::with_capacity(n_steps + 1);
        psi.push(h0.clone());
        let mut z = DVector::zeros(self.dimension());
        states.push(z.iter().copied().collect::<Vec<f64>>());
        for (n, &dx) in increments.iter().enumerate() {
            // Φ is constant on the leaf, so σ(ψ_n + V z) = σ(ψ_n)
            let weights = engine.volatility().weights(&psi[n]);
            let s = self.sigma_coordinates(&weights);
            let next = engine.step(&psi[n], dt, 0.0, &mut cache)?;
            guard(&next, n + 1)?;
            psi.push(next);
            z = &propagator * (z + s * dx);
            states.push(z.iter().copied().collect());
        }
        let curves = psi
            .iter()
            .zip(&states)
            .map(|(p, z)| self.reconstruct(p, z))
            .collect();
        Ok(SimulationResult {
            times,
            curves,
            increments: increments.to_vec(),
            seed: None,
            reduced: Some(ReducedPath {
                psi,
                states,
                basis: self.basis.clone(),
            }),
        })
    }
}

/// Builds the reduced model of a spec, failing when no affine realization
/// is available.
pub fn reduced_model(spec: &ModelSpec) -> Result<ReducedModel> {
    let report = check_sufficient(spec);
    if !report.exists {
        return Err(Error::NoRealization(report.reason.to_string()));
    }
    let directions = spec
        .exp_poly_directions()
        .ok_or_else(|| Error::NoRealization("a direction is not an exponential polynomial".into()))?;
    ReducedModel::new(report.basis, &directions, &spec.space)
}

/// Full simulation with increments drawn from `rng`.
pub fn simulate_full<R: Rng + ?Sized>(
    spec: &ModelSpec,
    h0: &ForwardCurve,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SimulationResult> {
    let engine = Engine::new(spec)?;
    let (dt, _) = time_grid(horizon, n_steps)?;
    let increments = sample_increments(&spec.levy, dt, n_steps, rng);
    engine.simulate_full(h0, horizon, &increments)
}

/// Reduced simulation with increments drawn from `rng`. Given the same
/// stream state it consumes exactly the increments [`simulate_full`] would.
pub fn simulate_reduced<R: Rng + ?Sized>(
    spec: &ModelSpec,
    h0: &ForwardCurve,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SimulationResult> {
    let reduced = reduced_model(spec)?;
    let engine = Engine::new(spec)?;
    let (dt, _) = time_grid(horizon, n_steps)?;
    let increments = sample_increments(&spec.levy, dt, n_steps, rng);
    reduced.simulate(&engine, h0, horizon, &increments)
}
