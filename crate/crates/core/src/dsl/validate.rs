//! Admissibility checks for a parsed spec.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Direction, ModelSpec};
use crate::curve::ForwardCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    /// The property holds on the grid but cannot be certified beyond it.
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable machine-readable identifier of the check.
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &str, message: String) -> Self {
        Self {
            severity: Severity::Error,
            code: code.into(),
            message,
        }
    }

    fn warning(code: &str, message: String) -> Self {
        Self {
            severity: Severity::Warning,
            code: code.into(),
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}[{}]: {}", self.code, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Checks a spec:
///
/// * the Lévy triplet and curve-space invariants, including `0 < β < β′`;
/// * `0 ∈ Int K` and `K ⊂ D(Ψ)`;
/// * every direction decays fast enough to lie in the β′ subspace
///   (closed form for exponential polynomials, grid test for tables);
/// * `−∫₀ˣ σ(h)(η) dη ∈ K` for every curve `h` and grid point `x`. Since
///   `−∫σ(h) = Σᵢ Φᵢ(h) (Tλᵢ)` and each Φᵢ ranges over a known interval,
///   the sum of the per-term interval images bounds all curves at once.
pub fn validate(spec: &ModelSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if let Err(e) = spec.levy.check() {
        out.push(Diagnostic::error("levy_model", e.to_string()));
    }

    let sp = &spec.space;
    if !(sp.beta > 0.0 && sp.beta < sp.beta_prime) {
        out.push(Diagnostic::error(
            "beta_order",
            format!("need 0 < beta < beta_prime, got beta = {}, beta_prime = {}", sp.beta, sp.beta_prime),
        ));
    }
    let grid_ok = sp.x_max > 0.0 && sp.x_max.is_finite() && sp.n_grid >= 16;
    if !grid_ok {
        out.push(Diagnostic::error(
            "grid",
            format!("need x_max > 0 and n_grid >= 16, got x_max = {}, n_grid = {}", sp.x_max, sp.n_grid),
        ));
    }

    let k = spec.k_interval;
    if !(k.lo < 0.0 && 0.0 < k.hi) {
        out.push(Diagnostic::error(
            "k_interior",
            format!("K = [{}, {}] must contain 0 in its interior", k.lo, k.hi),
        ));
    }
    if !spec.levy.domain_contains(k.lo, k.hi) {
        out.push(Diagnostic::error(
            "k_domain",
            format!(
                "K = [{}, {}] is not contained in the cumulant domain {}",
                k.lo,
                k.hi,
                spec.levy.domain()
            ),
        ));
    }

    let mut curves: Vec<Option<ForwardCurve>> = Vec::new();
    for (i, term) in spec.volatility.iter().enumerate() {
        let n = i + 1;
        match &term.lambda {
            Direction::ExpPoly(f) => {
                if f.is_zero() {
                    out.push(Diagnostic::warning("lambda_zero", format!("direction {n} is identically zero")));
                } else if !f.decay_check(sp.beta_prime) {
                    out.push(Diagnostic::error(
                        "lambda_decay",
                        format!(
                            "direction {n} decays at rate {} but needs a rate above beta_prime/2 = {}",
                            f.min_rate(),
                            sp.beta_prime / 2.0
                        ),
                    ));
                }
                curves.push(grid_ok.then(|| f.evaluate_on_grid(sp)));
            }
            Direction::Tabulated(t) => match (&t.samples, grid_ok) {
                (None, _) => {
                    out.push(Diagnostic::error(
                        "table_not_loaded",
                        format!("direction {n}: table `{}` has not been loaded", t.path),
                    ));
                    curves.push(None);
                }
                (Some(_), false) => curves.push(None),
                (Some(_), true) => {
                    let curve = t.on_grid(sp).expect("samples are loaded");
                    if curve.in_h0() {
                        out.push(Diagnostic::warning(
                            "lambda_decay_grid",
                            format!("direction {n} decays on the grid; decay beyond x_max = {} is assumed", sp.x_max),
                        ));
                    } else {
                        out.push(Diagnostic::error(
                            "lambda_decay",
                            format!("direction {n} (table `{}`) does not decay on the grid", t.path),
                        ));
                    }
                    curves.push(Some(curve));
                }
            },
        }
    }

    if curves.iter().all(Option::is_some) && !curves.is_empty() {
        let integrated: Vec<ForwardCurve> = curves.iter().flatten().map(|c| c.integral_operator()).collect();
        let mut worst: Option<(f64, f64, f64)> = None;
        for j in 0..sp.n_grid {
            let (mut lo, mut hi) = (0.0, 0.0);
            for (term, big) in spec.volatility.iter().zip(&integrated) {
                let (plo, phi) = term.phi.bounds();
                let v = big.values()[j];
                lo += (plo * v).min(phi * v);
                hi += (plo * v).max(phi * v);
            }
            let excess = (k.lo - lo).max(hi - k.hi);
            if excess > 0.0 && worst.is_none_or(|w| excess > (k.lo - w.1).max(w.2 - k.hi)) {
                worst = Some((sp.x(j), lo, hi));
            }
        }
        if let Some((x, lo, hi)) = worst {
            out.push(Diagnostic::error(
                "sigma_range",
                format!(
                    "integrated volatility can reach [{lo:.6}, {hi:.6}] at x = {x:.4}, outside K = [{}, {}]",
                    k.lo, k.hi
                ),
            ));
        }
    }
    out
}
