//! Forward curves sampled on a uniform grid of times-to-maturity, with the
//! weighted norm `‖h‖²_β = |h(0)|² + ∫ |h′(x)|² e^{βx} dx`.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_gram;
use crate::quadrature::{cumulative_trapezoid, trapezoid};

/// Norms above this are treated as infinite.
pub const NORM_OVERFLOW: f64 = 1e8;

/// Tolerance for the vanishing-tail test on the last decile of the grid.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Fractional grid offsets closer than this to an integer are snapped, so
/// that grid-aligned shifts are exact.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpaceConfig {
    pub beta: f64,
    pub beta_prime: f64,
    /// Grid horizon in years.
    pub x_max: f64,
    /// Number of grid points, including both ends.
    pub n_grid: usize,
}

impl Default for CurveSpaceConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            beta_prime: 1.0,
            x_max: 20.0,
            n_grid: 512,
        }
    }
}

impl CurveSpaceConfig {
    pub fn new(beta: f64, beta_prime: f64, x_max: f64, n_grid: usize) -> Result<Self> {
        let config = Self {
            beta,
            beta_prime,
            x_max,
            n_grid,
        };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < self.beta_prime && self.beta_prime.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "need 0 < beta < beta_prime, got beta = {}, beta_prime = {}",
                self.beta, self.beta_prime
            )));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::InvalidSpace(format!("x_max must be > 0, got {}", self.x_max)));
        }
        if self.n_grid < 16 {
            return Err(Error::InvalidSpace(format!("n_grid must be >= 16, got {}", self.n_grid)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.x_max / (self.n_grid - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n_grid).map(|i| self.x(i)).collect()
    }

    /// The same spacing truncated to the nodes with `x ≤ limit`.
    pub fn truncated(&self, limit: f64) -> Self {
        let last = ((limit / self.dx()) + SNAP).floor().max(1.0) as usize;
        let last = last.min(self.n_grid - 1);
        Self {
            x_max: self.x(last),
            n_grid: last + 1,
            ..*self
        }
    }
}

/// Coordinates and residual of an orthogonal projection in the β inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coordinates: Vec<f64>,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardCurve {
    config: CurveSpaceConfig,
    values: Vec<f64>,
}

impl ForwardCurve {
    pub fn new(config: CurveSpaceConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != config.n_grid {
            return Err(Error::InvalidSpace(format!(
                "curve has {} values but the grid has {} points",
                values.len(),
                config.n_grid
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerics(format!("non-finite curve value at x = {}", config.x(i))));
        }
        Ok(Self { config, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(config: CurveSpaceConfig, f: F) -> Self {
        let values = (0..config.n_grid).map(|i| f(config.x(i))).collect();
        Self { config, values }
    }

    pub fn zeros(config: CurveSpaceConfig) -> Self {
        Self::flat(config, 0.0)
    }

    pub fn flat(config: CurveSpaceConfig, kappa: f64) -> Self {
        Self {
            config,
            values: vec![kappa; config.n_grid],
        }
    }

    pub fn config(&self) -> &CurveSpaceConfig {
        &self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            config: self.config,
            values,
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_with(other, |u, v| u + a * v)
    }

    /// In-place `self += a · other`.
    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        assert_eq!(self.len(), other.len(), "curves on different grids");
        for (u, v) in self.values.iter_mut().zip(&other.values) {
            *u += a * v;
        }
    }

    fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.len(), other.len(), "curves on different grids");
        self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation at `x`, flat beyond either end of the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.values.len();
        let p = x / self.config.dx();
        if p <= 0.0 {
            return self.values[0];
        }
        let mut j = p.floor();
        let mut frac = p - j;
        if frac > 1.0 - SNAP {
            j += 1.0;
            frac = 0.0;
        } else if frac < SNAP {
            frac = 0.0;
        }
        let j = j as usize;
        if j >= n - 1 {
            return self.values[n - 1];
        }
        if frac == 0.0 {
            self.values[j]
        } else {
            self.values[j] + frac * (self.values[j + 1] - self.values[j])
        }
    }

    /// ℓ(h) = h(0).
    pub fn short_rate(&self) -> f64 {
        self.values[0]
    }

    /// The same curve restricted to the nodes with `x ≤ limit`.
    pub fn truncated(&self, limit: f64) -> Self {
        let config = self.config.truncated(limit);
        Self {
            config,
            values: self.values[..config.n_grid].to_vec(),
        }
    }

    /// Grid derivative: centered differences inside, second-order one-sided
    /// differences at both ends.
    pub fn differentiate(&self) -> Self {
        let h = &self.values;
        let n = h.len();
        let dx = self.config.dx();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (h[i + 1] - h[i - 1]) / (2.0 * dx);
        }
        d[0] = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dx);
        d[n - 1] = (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2.0 * dx);
        self.with_values(d)
    }

    /// `Tλ = −∫₀^x λ(η) dη` by the cumulative trapezoid rule.
    pub fn integral_operator(&self) -> Self {
        let mut v = cumulative_trapezoid(&self.values, self.config.dx());
        v.iter_mut().for_each(|x| *x = -*x);
        self.with_values(v)
    }

    /// Shift semigroup `(S_t h)(x) = h(x + t)`.
    pub fn shift(&self, t: f64) -> Self {
        if t == 0.0 {
            return self.clone();
        }
        let dx = self.config.dx();
        self.with_values((0..self.len()).map(|i| self.value_at(i as f64 * dx + t)).collect())
    }

    pub fn inner_product(&self, other: &Self, beta: f64) -> f64 {
        assert_eq!(self.len(), other.len(), "curves on different grids");
        let du = self.differentiate();
        let dv = other.differentiate();
        let dx = self.config.dx();
        let integrand: Vec<f64> = du
            .values
            .iter()
            .zip(&dv.values)
            .enumerate()
            .map(|(i, (a, b))| a * b * (beta * i as f64 * dx).exp())
            .collect();
        self.values[0] * other.values[0] + trapezoid(&integrand, dx)
    }

    /// ‖h‖_β on the grid.
    pub fn norm_beta(&self, beta: f64) -> f64 {
        self.inner_product(self, beta).max(0.0).sqrt()
    }

    /// Norm with the configured β.
    pub fn norm(&self) -> f64 {
        self.norm_beta(self.config.beta)
    }

    /// Membership in the decaying subspace under β′: finite norm and a tail
    /// below [`TAIL_TOLERANCE`] (relative to the curve's scale when that
    /// exceeds one) on the last tenth of the grid.
    pub fn in_h0(&self) -> bool {
        let norm = self.norm_beta(self.config.beta_prime);
        if !(norm.is_finite() && norm < NORM_OVERFLOW) {
            return false;
        }
        let n = self.len();
        let start = n - (n / 10).max(1);
        let tail = self.values[start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        tail <= TAIL_TOLERANCE * self.sup_norm().max(1.0)
    }

    /// Least-squares projection onto `span(basis)` in the β inner product.
    pub fn project_onto(&self, basis: &[ForwardCurve]) -> Result<Projection> {
        let beta = self.config.beta;
        let d = basis.len();
        let gram = DMatrix::from_fn(d, d, |i, j| basis[i].inner_product(&basis[j], beta));
        let rhs = DVector::from_fn(d, |i, _| basis[i].inner_product(self, beta));
        let coords = solve_gram(&gram, &rhs)?;
        let mut residual = self.clone();
        for (b, c) in basis.iter().zip(coords.iter()) {
            residual.add_scaled(-c, b);
        }
        Ok(Projection {
            coordinates: coords.iter().copied().collect(),
            residual_norm: residual.norm_beta(beta),
        })
    }

    /// Reads a two-column `x,value` CSV (header required) and resamples it
    /// onto the grid by linear interpolation, flat outside the sampled range.
    pub fn read_csv(path: &Path, config: CurveSpaceConfig) -> Result<Self> {
        let samples = read_samples(path)?;
        Ok(Self::from_samples(&samples, config))
    }

    /// Resamples `(x, value)` pairs with increasing `x` onto the grid.
    pub fn from_samples(samples: &[(f64, f64)], config: CurveSpaceConfig) -> Self {
        Self::from_fn(config, |x| interpolate_samples(samples, x))
    }
}

fn interpolate_samples(samples: &[(f64, f64)], x: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|s| s.0 <= x);
    let (x0, y0) = samples[k - 1];
    let (x1, y1) = samples[k];
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// Parses `x,value` rows. At least two rows with strictly increasing,
/// finite `x` are required.
pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_samples(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn parse_samples<R: BufRead>(reader: R, name: &str) -> Result<Vec<(f64, f64)>> {
    let bad = |line: usize, msg: &str| Error::Io(format!("{name}:{line}: {msg}"));
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) => {
            let cols: Vec<&str> = header.split(',').map(str::trim).collect();
            if cols != ["x", "value"] {
                return Err(bad(1, "expected header `x,value`"));
            }
        }
        Some((_, Err(e))) => return Err(Error::Io(e.to_string())),
        None => return Err(bad(1, "empty file")),
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(line_no, "expected two columns"));
        };
        let x: f64 = a.parse().map_err(|_| bad(line_no, "x is not a number"))?;
        let v: f64 = b.parse().map_err(|_| bad(line_no, "value is not a number"))?;
        if !x.is_finite() || !v.is_finite() {
            return Err(bad(line_no, "non-finite entry"));
        }
        if samples.last().is_some_and(|s| s.0 >= x) {
            return Err(bad(line_no, "x must be strictly increasing"));
        }
        samples.push((x, v));
    }
    if samples.len() < 2 {
        return Err(bad(1, "need at least two samples"));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(n: usize, x_max: f64) -> CurveSpaceConfig {
        CurveSpaceConfig {
            n_grid: n,
            x_max,
            ..CurveSpaceConfig::default()
        }
    }

    #[test]
    fn config_invariants() {
        assert!(CurveSpaceConfig::new(0.5, 0.5, 20.0, 512).is_err());
        assert!(CurveSpaceConfig::new(0.0, 0.5, 20.0, 512).is_err());
        assert!(CurveSpaceConfig::new(0.5, 1.0, 20.0, 15).is_err());
        assert!(CurveSpaceConfig::new(0.5, 1.0, -1.0, 512).is_err());
        assert!(CurveSpaceConfig::new(0.5, 1.0, 20.0, 16).is_ok());
    }

    #[test]
    fn flat_curve_norm_is_level() {
        let h = ForwardCurve::flat(CurveSpaceConfig::default(), -0.03);
        assert!((h.norm_beta(0.5) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn exponential_norm_matches_closed_form() {
        // (1 + θ²/(2θ − β))^{1/2}
        let want = (1.0f64 + 1.0 / 1.5).sqrt();
        let h = ForwardCurve::from_fn(config(4001, 40.0), |x| (-x).exp());
        assert!((h.norm_beta(0.5) - want).abs() < 1e-4, "{}", h.norm_beta(0.5));
        let coarse = ForwardCurve::from_fn(config(2001, 40.0), |x| (-x).exp());
        let err_fine = (h.norm_beta(0.5) - want).abs();
        let err_coarse = (coarse.norm_beta(0.5) - want).abs();
        assert!(err_fine < 0.3 * err_coarse);
    }

    #[test]
    fn slow_decay_norm_blows_up() {
        let beta = 0.5;
        let theta = beta / 4.0;
        let norms: Vec<f64> = [20.0, 40.0, 80.0]
            .iter()
            .map(|&x_max| ForwardCurve::from_fn(config(4096, x_max), |x| (-theta * x).exp()).norm_beta(beta))
            .collect();
        assert!(norms[1] > 2.0 * norms[0] && norms[2] > 10.0 * norms[1], "{norms:?}");
    }

    #[test]
    fn h0_membership() {
        let cfg = config(512, 40.0);
        assert!(ForwardCurve::zeros(cfg).in_h0());
        assert!(!ForwardCurve::flat(cfg, 1.0).in_h0());
        assert!(ForwardCurve::from_fn(cfg, |x| (-0.9 * x).exp()).in_h0());
        assert!(!ForwardCurve::from_fn(cfg, |x| (-0.3 * x).exp()).in_h0());
    }

    #[test]
    fn shift_examples() {
        let cfg = config(512, 20.0);
        let h = ForwardCurve::from_fn(cfg, |x| (-x).exp());
        assert_eq!(h.shift(0.0), h);
        let s = h.shift(1.0);
        let exact = ForwardCurve::from_fn(cfg, |x| (-(x + 1.0)).exp());
        assert!(s.sub(&exact).sup_norm() < cfg.dx() * cfg.dx());
        let flat = ForwardCurve::flat(cfg, 0.04);
        assert_eq!(flat.shift(3.7), flat);
    }

    #[test]
    fn grid_aligned_shifts_compose_exactly() {
        let cfg = config(501, 5.0);
        let h = ForwardCurve::from_fn(cfg, |x| (1.0 + x).ln() * (-x).exp());
        let dx = cfg.dx();
        let lhs = h.shift(3.0 * dx).shift(5.0 * dx);
        let rhs = h.shift(8.0 * dx);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn differentiate_examples() {
        let cfg = config(512, 20.0);
        assert_eq!(ForwardCurve::flat(cfg, 2.0).differentiate().sup_norm(), 0.0);
        let lin = ForwardCurve::from_fn(cfg, |x| x).differentiate();
        assert!(lin.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        for n in [256, 512] {
            let c = config(n, 20.0);
            let d = ForwardCurve::from_fn(c, |x| (-x).exp()).differentiate();
            let exact = ForwardCurve::from_fn(c, |x| -(-x).exp());
            assert!(d.sub(&exact).sup_norm() < c.dx() * c.dx());
        }
    }

    #[test]
    fn integral_operator_examples() {
        let cfg = config(2048, 20.0);
        assert_eq!(ForwardCurve::zeros(cfg).integral_operator().sup_norm(), 0.0);
        let (rho, theta) = (0.3, 1.2);
        let t = ForwardCurve::from_fn(cfg, |x| rho * (-theta * x).exp()).integral_operator();
        // oracle: Gauss–Legendre integral of the same exponential
        let rule = crate::quadrature::GaussLegendre::new(32);
        for i in (0..cfg.n_grid).step_by(97) {
            let x = cfg.x(i);
            let oracle = -rule.integrate(0.0, x, |s| rho * (-theta * s).exp());
            assert!((t.values()[i] - oracle).abs() < 1e-5);
            assert!((oracle + rho / theta * (1.0 - (-theta * x).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn short_rate_examples() {
        let cfg = CurveSpaceConfig::default();
        assert_eq!(ForwardCurve::flat(cfg, 0.02).short_rate(), 0.02);
        assert_eq!(ForwardCurve::from_fn(cfg, |x| (-x).exp()).short_rate(), 1.0);
    }

    #[test]
    fn projection_examples() {
        let cfg = CurveSpaceConfig::default();
        let e1 = ForwardCurve::from_fn(cfg, |x| (-x).exp());
        let e2 = ForwardCurve::from_fn(cfg, |x| x * (-x).exp());
        let h = e1.scale(2.0).axpy(-0.5, &e2);
        let p = h.project_onto(&[e1.clone(), e2.clone()]).unwrap();
        assert!(p.residual_norm < 1e-10);
        assert!((p.coordinates[0] - 2.0).abs() < 1e-10 && (p.coordinates[1] + 0.5).abs() < 1e-10);

        // Gram–Schmidt oracle: remove the e1 component from e2
        let c = e2.inner_product(&e1, cfg.beta) / e1.inner_product(&e1, cfg.beta);
        let orth = e2.axpy(-c, &e1);
        let p = orth.project_onto(std::slice::from_ref(&e1)).unwrap();
        assert!(p.coordinates[0].abs() < 1e-12);

        let p = h.project_onto(&[]).unwrap();
        assert!(p.coordinates.is_empty());
        assert_eq!(p.residual_norm, h.norm());

        assert!(matches!(
            h.project_onto(&[e1.clone(), e1.scale(2.0)]),
            Err(Error::DegenerateBasis { .. })
        ));
    }

    #[test]
    fn projection_residual_is_monotone() {
        let cfg = CurveSpaceConfig::default();
        let h = ForwardCurve::from_fn(cfg, |x| (-0.7 * x).exp() / (1.0 + x));
        let basis: Vec<ForwardCurve> = [0.6, 1.1, 1.9, 3.0]
            .iter()
            .map(|&t| ForwardCurve::from_fn(cfg, move |x| (-t * x).exp()))
            .collect();
        let mut last = h.norm();
        for k in 1..=basis.len() {
            let r = h.project_onto(&basis[..k]).unwrap().residual_norm;
            assert!(r <= last * (1.0 + 1e-9));
            last = r;
        }
    }

    #[test]
    fn csv_round_trip() {
        let text = "x,value\n0,1\n1,3\n2,3\n";
        let samples = parse_samples(text.as_bytes(), "inline").unwrap();
        let cfg = config(21, 4.0);
        let h = ForwardCurve::from_samples(&samples, cfg);
        assert_eq!(h.value_at(0.0), 1.0);
        assert!((h.value_at(0.4) - 1.8).abs() < 1e-12);
        assert_eq!(h.value_at(3.8), 3.0);
        assert!(parse_samples("x,y\n0,1\n1,2\n".as_bytes(), "h").is_err());
        assert!(parse_samples("x,value\n1,1\n0,2\n".as_bytes(), "h").is_err());
        assert!(parse_samples("x,value\n1,abc\n2,2\n".as_bytes(), "h").is_err());
    }

    proptest! {
        #[test]
        fn norm_is_homogeneous_and_subadditive(
            a in prop::collection::vec(-1.0f64..1.0, 16),
            b in prop::collection::vec(-1.0f64..1.0, 16),
            s in -5.0f64..5.0,
        ) {
            let cfg = config(16, 3.0);
            let u = ForwardCurve::new(cfg, a).unwrap();
            let v = ForwardCurve::new(cfg, b).unwrap();
            let nu = u.norm();
            prop_assert!((u.scale(s).norm() - s.abs() * nu).abs() <= 1e-12 * (1.0 + nu * s.abs()));
            prop_assert!(u.add(&v).norm() <= nu + v.norm() + 1e-12);
        }

        #[test]
        fn integral_operator_is_linear_and_injective(
            a in prop::collection::vec(-1.0f64..1.0, 16),
            b in prop::collection::vec(-1.0f64..1.0, 16),
            s in -3.0f64..3.0,
        ) {
            let cfg = config(16, 3.0);
            let u = ForwardCurve::new(cfg, a).unwrap();
            let v = ForwardCurve::new(cfg, b).unwrap();
            let lhs = u.axpy(s, &v).integral_operator();
            let rhs = u.integral_operator().axpy(s, &v.integral_operator());
            prop_assert!(lhs.sub(&rhs).sup_norm() < 1e-12);
            if u.sup_norm() > 1e-12 {
                prop_assert!(u.integral_operator().sup_norm() > 0.0);
            }
        }
    }
}
