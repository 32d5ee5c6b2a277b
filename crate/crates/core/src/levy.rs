//! Square-integrable Lévy drivers with parametric Lévy measures.
//!
//! The cumulant generating function is
//!
//! ```text
//! Ψ(z) = b z + c z²/2 + ∫ (e^{zx} − 1 − zx) F(dx)
//! ```
//!
//! so that `X_t = b t + √c W_t + (compensated jumps)` and `E[X_t] = b t`.
//! Every kind here has a closed form for Ψ, Ψ′, Ψ″ and for all moments of
//! `F`; the Gauss–Legendre integrals in [`LevyModel::cumulant_by_quadrature`]
//! exist only to cross-check those closed forms.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::levy_rule;

/// Relative tolerance separating a vanishing moment from a nonzero one.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

/// Tail mass ignored when truncating a Lévy-measure integral.
const TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpDistribution {
    PointMass { at: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, variance: f64 },
}

impl JumpDistribution {
    fn mgf(&self, z: f64) -> f64 {
        match *self {
            JumpDistribution::PointMass { at } => (z * at).exp(),
            JumpDistribution::Exponential { rate } => rate / (rate - z),
            JumpDistribution::Normal { mean, variance } => (mean * z + 0.5 * variance * z * z).exp(),
        }
    }

    fn mgf_d1(&self, z: f64) -> f64 {
        match *self {
            JumpDistribution::PointMass { at } => at * (z * at).exp(),
            JumpDistribution::Exponential { rate } => rate / ((rate - z) * (rate - z)),
            JumpDistribution::Normal { mean, variance } => (mean + variance * z) * self.mgf(z),
        }
    }

    fn mgf_d2(&self, z: f64) -> f64 {
        match *self {
            JumpDistribution::PointMass { at } => at * at * (z * at).exp(),
            JumpDistribution::Exponential { rate } => 2.0 * rate / (rate - z).powi(3),
            JumpDistribution::Normal { mean, variance } => {
                let m = mean + variance * z;
                (m * m + variance) * self.mgf(z)
            }
        }
    }

    /// Raw moment `E[Yⁿ]`.
    pub fn raw_moment(&self, n: usize) -> f64 {
        match *self {
            JumpDistribution::PointMass { at } => at.powi(n as i32),
            JumpDistribution::Exponential { rate } => {
                (1..=n).fold(1.0, |acc, k| acc * k as f64 / rate)
            }
            JumpDistribution::Normal { mean, variance } => {
                let (mut prev, mut cur) = (1.0, mean);
                if n == 0 {
                    return 1.0;
                }
                for k in 2..=n {
                    let next = mean * cur + (k - 1) as f64 * variance * prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
        }
    }

    fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    /// Upper bound for `E|Y|ⁿ`.
    fn abs_moment_bound(&self, n: usize) -> f64 {
        match *self {
            JumpDistribution::PointMass { at } => at.abs().powi(n as i32),
            JumpDistribution::Exponential { .. } => self.raw_moment(n),
            // Jensen: E|Y|ⁿ ≤ (E Y²ⁿ)^{1/2}
            JumpDistribution::Normal { .. } => self.raw_moment(2 * n).sqrt(),
        }
    }
}

/// Parametric Lévy measure `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpMeasure {
    None,
    CompoundPoisson {
        intensity: f64,
        jump: JumpDistribution,
    },
    /// `F(dx) = shape · x⁻¹ e^{−rate·x} dx` on `x > 0`.
    Gamma { shape: f64, rate: f64 },
    /// Difference of two independent gamma subordinators.
    BilateralGamma {
        shape_plus: f64,
        rate_plus: f64,
        shape_minus: f64,
        rate_minus: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevyKind {
    Brownian,
    CompoundPoisson,
    Merton,
    Gamma,
    BilateralGamma,
}

impl fmt::Display for LevyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LevyKind::Brownian => "brownian",
            LevyKind::CompoundPoisson => "compound_poisson",
            LevyKind::Merton => "merton",
            LevyKind::Gamma => "gamma",
            LevyKind::BilateralGamma => "bilateral_gamma",
        };
        f.write_str(s)
    }
}

/// Open interval `(lower, upper)` on which the cumulant is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantDomain {
    pub lower: f64,
    pub upper: f64,
}

impl CumulantDomain {
    pub fn contains(&self, z: f64) -> bool {
        z > self.lower && z < self.upper
    }
}

impl fmt::Display for CumulantDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

/// Taylor coefficients of Ψ at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSeries {
    pub coefficients: Vec<f64>,
    /// Radius of convergence of the series (may be infinite).
    pub radius: f64,
}

impl CumulantSeries {
    pub fn partial_sum(&self, z: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, a| acc * z + a)
    }
}

/// A real-valued Lévy process described by its characteristic triplet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    /// Drift `b` (per unit time).
    pub drift: f64,
    /// Gaussian variance rate `c`.
    pub gaussian_variance: f64,
    pub jumps: JumpMeasure,
}

impl LevyModel {
    pub fn brownian(drift: f64, gaussian_variance: f64) -> Self {
        Self {
            drift,
            gaussian_variance,
            jumps: JumpMeasure::None,
        }
    }

    pub fn compound_poisson(
        drift: f64,
        gaussian_variance: f64,
        intensity: f64,
        jump: JumpDistribution,
    ) -> Self {
        Self {
            drift,
            gaussian_variance,
            jumps: JumpMeasure::CompoundPoisson { intensity, jump },
        }
    }

    /// Compound Poisson with normally distributed jumps.
    pub fn merton(drift: f64, gaussian_variance: f64, intensity: f64, mean: f64, variance: f64) -> Self {
        Self::compound_poisson(
            drift,
            gaussian_variance,
            intensity,
            JumpDistribution::Normal { mean, variance },
        )
    }

    pub fn gamma(drift: f64, gaussian_variance: f64, shape: f64, rate: f64) -> Self {
        Self {
            drift,
            gaussian_variance,
            jumps: JumpMeasure::Gamma { shape, rate },
        }
    }

    pub fn bilateral_gamma(
        drift: f64,
        gaussian_variance: f64,
        shape_plus: f64,
        rate_plus: f64,
        shape_minus: f64,
        rate_minus: f64,
    ) -> Self {
        Self {
            drift,
            gaussian_variance,
            jumps: JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            },
        }
    }

    pub fn kind(&self) -> LevyKind {
        match self.jumps {
            JumpMeasure::None => LevyKind::Brownian,
            JumpMeasure::CompoundPoisson {
                jump: JumpDistribution::Normal { .. },
                ..
            } => LevyKind::Merton,
            JumpMeasure::CompoundPoisson { .. } => LevyKind::CompoundPoisson,
            JumpMeasure::Gamma { .. } => LevyKind::Gamma,
            JumpMeasure::BilateralGamma { .. } => LevyKind::BilateralGamma,
        }
    }

    /// Checks the model invariants: `c ≥ 0`, nonnegative intensities,
    /// positive rates, and `c + F(ℝ) > 0`.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidModel(msg.to_string()));
        if !self.drift.is_finite() {
            return bad("drift b must be finite");
        }
        if !(self.gaussian_variance.is_finite() && self.gaussian_variance >= 0.0) {
            return bad("Gaussian variance c must be finite and >= 0");
        }
        match self.jumps {
            JumpMeasure::None => {}
            JumpMeasure::CompoundPoisson { intensity, jump } => {
                if !(intensity.is_finite() && intensity >= 0.0) {
                    return bad("jump intensity must be finite and >= 0");
                }
                match jump {
                    JumpDistribution::PointMass { at } if !at.is_finite() => {
                        return bad("point-mass location must be finite")
                    }
                    JumpDistribution::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => {
                        return bad("exponential jump rate must be > 0")
                    }
                    JumpDistribution::Normal { mean, variance }
                        if !(mean.is_finite() && variance.is_finite() && variance >= 0.0) =>
                    {
                        return bad("normal jump variance must be >= 0")
                    }
                    _ => {}
                }
            }
            JumpMeasure::Gamma { shape, rate } => {
                if !(shape.is_finite() && shape >= 0.0 && rate.is_finite() && rate > 0.0) {
                    return bad("gamma shape must be >= 0 and rate > 0");
                }
            }
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => {
                let ok = [shape_plus, shape_minus].iter().all(|s| s.is_finite() && *s >= 0.0)
                    && [rate_plus, rate_minus].iter().all(|r| r.is_finite() && *r > 0.0);
                if !ok {
                    return bad("bilateral gamma shapes must be >= 0 and rates > 0");
                }
            }
        }
        if self.gaussian_variance + self.jump_mass() <= 0.0 {
            return bad("degenerate driver: c + F(R) must be > 0");
        }
        Ok(())
    }

    /// Total mass `F(ℝ)`; infinite for the gamma kinds.
    pub fn jump_mass(&self) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, .. } => intensity,
            JumpMeasure::Gamma { shape, .. } => {
                if shape > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            JumpMeasure::BilateralGamma {
                shape_plus,
                shape_minus,
                ..
            } => {
                if shape_plus + shape_minus > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    pub fn has_jumps(&self) -> bool {
        self.jump_mass() > 0.0
    }

    pub fn domain(&self) -> CumulantDomain {
        let (lower, upper) = match self.jumps {
            JumpMeasure::CompoundPoisson {
                intensity,
                jump: JumpDistribution::Exponential { rate },
            } if intensity > 0.0 => (f64::NEG_INFINITY, rate),
            JumpMeasure::Gamma { shape, rate } if shape > 0.0 => (f64::NEG_INFINITY, rate),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => {
                let upper = if shape_plus > 0.0 { rate_plus } else { f64::INFINITY };
                let lower = if shape_minus > 0.0 { -rate_minus } else { f64::NEG_INFINITY };
                (lower, upper)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        CumulantDomain { lower, upper }
    }

    /// Whether `[z_lo, z_hi]` lies inside the cumulant domain. The domain is
    /// an interval, so checking the endpoints suffices.
    pub fn domain_contains(&self, z_lo: f64, z_hi: f64) -> bool {
        let d = self.domain();
        d.contains(z_lo) && d.contains(z_hi)
    }

    fn ensure_domain(&self, z: f64) -> Result<()> {
        let d = self.domain();
        if z.is_finite() && d.contains(z) {
            Ok(())
        } else {
            Err(Error::Domain {
                z,
                domain: d.to_string(),
            })
        }
    }

    /// Ψ(z).
    pub fn cumulant(&self, z: f64) -> Result<f64> {
        self.ensure_domain(z)?;
        Ok(self.drift * z + 0.5 * self.gaussian_variance * z * z + self.jump_cumulant(z))
    }

    /// Ψ′(z).
    pub fn cumulant_derivative(&self, z: f64) -> Result<f64> {
        self.ensure_domain(z)?;
        Ok(self.drift + self.gaussian_variance * z + self.jump_cumulant_d1(z))
    }

    /// Ψ″(z).
    pub fn cumulant_second_derivative(&self, z: f64) -> Result<f64> {
        self.ensure_domain(z)?;
        Ok(self.gaussian_variance + self.jump_cumulant_d2(z))
    }

    // ∫ (e^{zx} − 1 − zx) F(dx)
    fn jump_cumulant(&self, z: f64) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, jump } => {
                intensity * (jump.mgf(z) - 1.0 - z * jump.mean())
            }
            JumpMeasure::Gamma { shape, rate } => gamma_cumulant(shape, rate, z),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => gamma_cumulant(shape_plus, rate_plus, z) + gamma_cumulant(shape_minus, rate_minus, -z),
        }
    }

    // ∫ x (e^{zx} − 1) F(dx)
    fn jump_cumulant_d1(&self, z: f64) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, jump } => intensity * (jump.mgf_d1(z) - jump.mean()),
            JumpMeasure::Gamma { shape, rate } => gamma_cumulant_d1(shape, rate, z),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => gamma_cumulant_d1(shape_plus, rate_plus, z) - gamma_cumulant_d1(shape_minus, rate_minus, -z),
        }
    }

    // ∫ x² e^{zx} F(dx)
    fn jump_cumulant_d2(&self, z: f64) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, jump } => intensity * jump.mgf_d2(z),
            JumpMeasure::Gamma { shape, rate } => shape / ((rate - z) * (rate - z)),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => {
                shape_plus / ((rate_plus - z) * (rate_plus - z))
                    + shape_minus / ((rate_minus + z) * (rate_minus + z))
            }
        }
    }

    /// `∫ xⁿ F(dx)` for `n ≥ 1` (for `n = 0` this is `F(ℝ)`).
    pub fn jump_moment(&self, n: usize) -> f64 {
        if n == 0 {
            return self.jump_mass();
        }
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, jump } => intensity * jump.raw_moment(n),
            JumpMeasure::Gamma { shape, rate } => gamma_moment(shape, rate, n),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                gamma_moment(shape_plus, rate_plus, n) + sign * gamma_moment(shape_minus, rate_minus, n)
            }
        }
    }

    /// Upper bound for `∫ |x|ⁿ F(dx)`, used to scale the vanishing test.
    fn abs_moment_bound(&self, n: usize) -> f64 {
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, jump } => intensity * jump.abs_moment_bound(n),
            JumpMeasure::Gamma { shape, rate } => gamma_moment(shape, rate, n),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => gamma_moment(shape_plus, rate_plus, n) + gamma_moment(shape_minus, rate_minus, n),
        }
    }

    /// Coefficients `a_0..=a_N` of the power series of Ψ at zero.
    pub fn taylor_coefficients(&self, order: usize) -> Result<CumulantSeries> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!(
                "Taylor order must be >= 2, got {order}"
            )));
        }
        let mut coefficients = vec![0.0, self.drift];
        let mut factorial = 2.0;
        for n in 2..=order {
            if n > 2 {
                factorial *= n as f64;
            }
            let moment = self.jump_moment(n);
            if !moment.is_finite() {
                return Err(Error::Moment { order: n });
            }
            let a = if n == 2 {
                0.5 * (self.gaussian_variance + moment)
            } else {
                moment / factorial
            };
            coefficients.push(a);
        }
        let d = self.domain();
        Ok(CumulantSeries {
            coefficients,
            radius: d.upper.min(-d.lower),
        })
    }

    /// Least `n₀` such that every moment `∫ xⁿ F(dx)`, `n₀ ≤ n ≤ n_max`, is
    /// nonzero. The tested window must contain both an odd and an even order,
    /// so a measure whose odd moments vanish (symmetric `F`) yields `None`.
    pub fn moment_nonvanishing_index(&self, n_max: usize) -> Option<usize> {
        if !self.has_jumps() || n_max < 2 {
            return None;
        }
        let nonzero: Vec<bool> = (1..=n_max)
            .map(|n| {
                let m = self.jump_moment(n);
                m.is_finite() && m.abs() > MOMENT_TOLERANCE * self.abs_moment_bound(n)
            })
            .collect();
        // scan back from n_max for the longest nonzero suffix
        let mut n0 = n_max + 1;
        for n in (1..=n_max).rev() {
            if nonzero[n - 1] {
                n0 = n;
            } else {
                break;
            }
        }
        (n0 < n_max).then_some(n0)
    }

    /// One increment `X_{t+dt} − X_t`, drawn from its exact law.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        let mut dx = self.drift * dt;
        if self.gaussian_variance > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            dx += (self.gaussian_variance * dt).sqrt() * z;
        }
        match self.jumps {
            JumpMeasure::None => {}
            JumpMeasure::CompoundPoisson { intensity, jump } => {
                let rate = intensity * dt;
                if rate > 0.0 {
                    let count = Poisson::new(rate).expect("positive Poisson rate").sample(rng) as u64;
                    let total = match jump {
                        JumpDistribution::PointMass { at } => count as f64 * at,
                        JumpDistribution::Exponential { rate } => {
                            let law = Exp::new(rate).expect("positive exponential rate");
                            (0..count).map(|_| law.sample(rng)).sum()
                        }
                        JumpDistribution::Normal { mean, variance } => {
                            let law = Normal::new(mean, variance.sqrt()).expect("valid normal jump law");
                            (0..count).map(|_| law.sample(rng)).sum()
                        }
                    };
                    dx += total - rate * jump.mean();
                }
            }
            JumpMeasure::Gamma { shape, rate } => {
                dx += sample_gamma(shape * dt, rate, rng) - shape * dt / rate;
            }
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => {
                let up = sample_gamma(shape_plus * dt, rate_plus, rng);
                let down = sample_gamma(shape_minus * dt, rate_minus, rng);
                dx += up - down - (shape_plus / rate_plus - shape_minus / rate_minus) * dt;
            }
        }
        dx
    }

    /// Ψ(z) with the jump integral evaluated by Gauss–Legendre quadrature.
    pub fn cumulant_by_quadrature(&self, z: f64) -> Result<f64> {
        self.ensure_domain(z)?;
        let jump = self.integrate_levy(|x| (z * x).exp_m1() - z * x, z, 2);
        Ok(self.drift * z + 0.5 * self.gaussian_variance * z * z + jump)
    }

    /// Ψ′(z) with the jump integral evaluated by quadrature.
    pub fn cumulant_derivative_by_quadrature(&self, z: f64) -> Result<f64> {
        self.ensure_domain(z)?;
        let jump = self.integrate_levy(|x| x * (z * x).exp_m1(), z, 2);
        Ok(self.drift + self.gaussian_variance * z + jump)
    }

    /// `∫ xⁿ F(dx)` by quadrature.
    pub fn jump_moment_by_quadrature(&self, n: usize) -> f64 {
        self.integrate_levy(|x| x.powi(n as i32), 0.0, n)
    }

    /// `∫ g dF` on the effective support of `F`. `tilt` is the exponential
    /// tilt `e^{tilt·x}` carried by `g` and `degree` its polynomial growth;
    /// both widen the truncation window.
    fn integrate_levy<G: Fn(f64) -> f64>(&self, g: G, tilt: f64, degree: usize) -> f64 {
        let rule = levy_rule();
        let tail = -TAIL_MASS.ln();
        let poly = 2.0 * degree as f64;
        match self.jumps {
            JumpMeasure::None => 0.0,
            JumpMeasure::CompoundPoisson { intensity, jump } => {
                let integral = match jump {
                    JumpDistribution::PointMass { at } => g(at),
                    JumpDistribution::Exponential { rate } => {
                        let decay = rate - tilt.max(0.0);
                        let upper = (tail + poly + 8.0) / decay;
                        rule.integrate(0.0, upper, |x| g(x) * rate * (-rate * x).exp())
                    }
                    JumpDistribution::Normal { mean, variance } => {
                        let s = variance.sqrt();
                        if s == 0.0 {
                            g(mean)
                        } else {
                            let shifted = mean + tilt * variance;
                            let width = ((2.0 * tail).sqrt() + 3.0 + poly.sqrt()) * s;
                            let lo = mean.min(shifted) - width;
                            let hi = mean.max(shifted) + width;
                            let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
                            rule.integrate(lo, hi, |x| {
                                let u = (x - mean) / s;
                                g(x) * norm * (-0.5 * u * u).exp()
                            })
                        }
                    }
                };
                intensity * integral
            }
            JumpMeasure::Gamma { shape, rate } => gamma_quadrature(&g, shape, rate, tilt, poly),
            JumpMeasure::BilateralGamma {
                shape_plus,
                rate_plus,
                shape_minus,
                rate_minus,
            } => {
                gamma_quadrature(&g, shape_plus, rate_plus, tilt, poly)
                    + gamma_quadrature(&|x: f64| g(-x), shape_minus, rate_minus, -tilt, poly)
            }
        }
    }
}

fn gamma_quadrature<G: Fn(f64) -> f64>(g: &G, shape: f64, rate: f64, tilt: f64, poly: f64) -> f64 {
    if shape == 0.0 {
        return 0.0;
    }
    let decay = rate - tilt.max(0.0);
    let upper = (-TAIL_MASS.ln() + poly + 8.0) / decay;
    // the x⁻¹ singularity of the density is cancelled by g(x) = O(x)
    levy_rule().integrate(0.0, upper, |x| g(x) / x * shape * (-rate * x).exp())
}

fn gamma_cumulant(shape: f64, rate: f64, z: f64) -> f64 {
    if shape == 0.0 {
        return 0.0;
    }
    let u = z / rate;
    -shape * ((-u).ln_1p() + u)
}

fn gamma_cumulant_d1(shape: f64, rate: f64, z: f64) -> f64 {
    shape / (rate - z) - shape / rate
}

fn gamma_moment(shape: f64, rate: f64, n: usize) -> f64 {
    // shape · (n−1)! / rateⁿ
    (1..n).fold(shape / rate, |acc, k| acc * k as f64 / rate)
}

fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    if shape <= 0.0 {
        return 0.0;
    }
    Gamma::new(shape, 1.0 / rate)
        .expect("valid gamma increment law")
        .sample(rng)
}
