//! The no-arbitrage drift `α = −σ Ψ′(−∫₀^• σ)` and the volatility field
//! `σ(h) = Σᵢ Φᵢ(h) λᵢ` on the grid.

use crate::curve::{CurveSpaceConfig, ForwardCurve};
use crate::dsl::{ModelSpec, PhiKind};
use crate::error::Result;
use crate::levy::LevyModel;

/// `−σ(x) Ψ′(−∫₀ˣ σ)` on the grid.
pub fn hjm_drift(sigma: &ForwardCurve, model: &LevyModel) -> Result<ForwardCurve> {
    drift_from_parts(sigma, &sigma.integral_operator(), model)
}

/// The same drift written as `(d/dx) Ψ(−∫₀ˣ σ)`, differentiated on the grid.
pub fn hjm_drift_alternative(sigma: &ForwardCurve, model: &LevyModel) -> Result<ForwardCurve> {
    let z = sigma.integral_operator();
    let psi = z
        .values()
        .iter()
        .map(|&v| model.cumulant(v))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ForwardCurve::new(*sigma.config(), psi)?.differentiate())
}

fn drift_from_parts(sigma: &ForwardCurve, integrated: &ForwardCurve, model: &LevyModel) -> Result<ForwardCurve> {
    let values = sigma
        .values()
        .iter()
        .zip(integrated.values())
        .map(|(&s, &z)| Ok(-s * model.cumulant_derivative(z)?))
        .collect::<Result<Vec<f64>>>()?;
    ForwardCurve::new(*sigma.config(), values)
}

/// Volatility directions sampled on the grid together with their images
/// under the integral operator, so that `−∫σ(h)` is a weighted sum.
#[derive(Debug, Clone)]
pub struct Volatility {
    phis: Vec<PhiKind>,
    directions: Vec<ForwardCurve>,
    integrated: Vec<ForwardCurve>,
    config: CurveSpaceConfig,
}

impl Volatility {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let mut phis = Vec::new();
        let mut directions = Vec::new();
        for term in &spec.volatility {
            phis.push(term.phi);
            directions.push(term.lambda.on_grid(&spec.space)?);
        }
        Ok(Self::new(phis, directions, spec.space))
    }

    pub fn new(phis: Vec<PhiKind>, directions: Vec<ForwardCurve>, config: CurveSpaceConfig) -> Self {
        let integrated = directions.iter().map(ForwardCurve::integral_operator).collect();
        Self {
            phis,
            directions,
            integrated,
            config,
        }
    }

    pub fn phis(&self) -> &[PhiKind] {
        &self.phis
    }

    pub fn directions(&self) -> &[ForwardCurve] {
        &self.directions
    }

    /// `Φᵢ(h)` for every term.
    pub fn weights(&self, h: &ForwardCurve) -> Vec<f64> {
        self.phis.iter().map(|p| p.evaluate(h)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.phis.iter().all(PhiKind::is_constant)
    }

    fn combine(&self, curves: &[ForwardCurve], weights: &[f64]) -> ForwardCurve {
        let mut out = ForwardCurve::zeros(self.config);
        for (c, &w) in curves.iter().zip(weights) {
            out.add_scaled(w, c);
        }
        out
    }

    pub fn sigma(&self, weights: &[f64]) -> ForwardCurve {
        self.combine(&self.directions, weights)
    }

    /// `−∫₀^• σ` for the given weights.
    pub fn integrated_sigma(&self, weights: &[f64]) -> ForwardCurve {
        self.combine(&self.integrated, weights)
    }

    /// `σ` and the drift `α` for the given weights.
    pub fn sigma_and_drift(&self, weights: &[f64], model: &LevyModel) -> Result<(ForwardCurve, ForwardCurve)> {
        let sigma = self.sigma(weights);
        let alpha = drift_from_parts(&sigma, &self.integrated_sigma(weights), model)?;
        Ok((sigma, alpha))
    }

    /// `Ψ(−∫₀^• σ(h))` as a grid curve.
    pub fn cumulant_curve(&self, h: &ForwardCurve, model: &LevyModel) -> Result<ForwardCurve> {
        let z = self.integrated_sigma(&self.weights(h));
        let values = z
            .values()
            .iter()
            .map(|&v| model.cumulant(v))
            .collect::<Result<Vec<f64>>>()?;
        ForwardCurve::new(self.config, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpDistribution;

    fn config(n: usize) -> CurveSpaceConfig {
        CurveSpaceConfig {
            n_grid: n,
            ..CurveSpaceConfig::default()
        }
    }

    #[test]
    fn zero_volatility_has_zero_drift() {
        let m = LevyModel::compound_poisson(0.1, 0.5, 2.0, JumpDistribution::Exponential { rate: 3.0 });
        let a = hjm_drift(&ForwardCurve::zeros(config(64)), &m).unwrap();
        assert_eq!(a.sup_norm(), 0.0);
    }

    #[test]
    fn vasicek_drift() {
        let (rho, theta) = (0.2, 1.0);
        let cfg = config(2048);
        let sigma = ForwardCurve::from_fn(cfg, |x| rho * (-theta * x).exp());
        let a = hjm_drift(&sigma, &LevyModel::brownian(0.0, 1.0)).unwrap();
        let exact = ForwardCurve::from_fn(cfg, |x| rho * rho / theta * ((-theta * x).exp() - (-2.0 * theta * x).exp()));
        assert!(a.sub(&exact).sup_norm() < 1e-6);
    }

    #[test]
    fn drift_forms_agree() {
        let m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::Exponential { rate: 2.0 });
        let cfg = config(512);
        let sigma = ForwardCurve::from_fn(cfg, |x| 0.3 * (-x).exp());
        let a = hjm_drift(&sigma, &m).unwrap();
        let b = hjm_drift_alternative(&sigma, &m).unwrap();
        assert!(a.sub(&b).sup_norm() <= 10.0 * cfg.dx() * cfg.dx() * a.sup_norm());
    }

    #[test]
    fn drift_at_short_end_is_minus_sigma_b() {
        let m = LevyModel::brownian(0.07, 1.0);
        let sigma = ForwardCurve::from_fn(config(64), |x| 0.3 * (-x).exp());
        let a = hjm_drift(&sigma, &m).unwrap();
        assert!((a.short_rate() + 0.3 * 0.07).abs() < 1e-15);
    }

    #[test]
    fn drift_outside_domain_is_an_error() {
        let m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::Exponential { rate: 0.5 });
        // −∫σ reaches +1 > 0.5
        let sigma = ForwardCurve::from_fn(config(64), |x| -(-x).exp());
        assert!(hjm_drift(&sigma, &m).is_err());
    }
}
