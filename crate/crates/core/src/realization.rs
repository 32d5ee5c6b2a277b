//! Affine realizations: existence checks, the invariant foliation
//! `M_t = ψ(t) + V`, invariance residuals, and numerical probes of the
//! obstructions that rule realizations out for jump-driven models.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::curve::ForwardCurve;
use crate::dsl::{Direction, ModelSpec, PhiKind};
use crate::engine::{Engine, SimulationResult, Volatility};
use crate::error::{Error, Result};
use crate::expoly::{realization_space, ExpPoly};
use crate::levy::LevyModel;
use crate::linalg::{numerical_rank, RankEstimate, RANK_TOLERANCE};

/// Highest moment order inspected when looking for `n₀`.
pub const MOMENT_WINDOW: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Realized,
    /// Some direction is tabulated, so its derivative span cannot be shown
    /// to be finite-dimensional.
    NotQuasiExponential,
    PhiNotConstantOnLeaves,
    /// Every direction is zero.
    NoVolatility,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Realized => "affine realization generated by V",
            Verdict::NotQuasiExponential => "σ not quasi-exponential",
            Verdict::PhiNotConstantOnLeaves => "Φ not constant on h₀+V",
            Verdict::NoVolatility => "all volatility directions vanish",
        })
    }
}

/// Flags for the individual hypotheses behind the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub quasi_exponential: bool,
    pub phi_constant_on_leaves: bool,
    /// Every basis element decays faster than `e^{−β′x/2}`.
    pub decay: bool,
    /// Least `n₀` with all jump moments of order `n₀..MOMENT_WINDOW` nonzero.
    pub moment_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationReport {
    pub exists: bool,
    pub dimension: usize,
    pub basis: Vec<ExpPoly>,
    pub reason: Verdict,
    pub conditions: Conditions,
    pub necessary: Option<NecessaryConditions>,
}

/// Decides whether the model has an affine realization with `V` the sum of
/// the derivative spans of the directions. Requires every direction to be an
/// exponential polynomial and every Φᵢ to be constant on `h₀ + V`. A
/// sigmoid of the short rate is constant on the leaves only when every
/// element of `V` vanishes at 0, which is decided from the exact values.
pub fn check_sufficient(spec: &ModelSpec) -> RealizationReport {
    let directions = spec.exp_poly_directions();
    let quasi_exponential = directions.is_some();
    let basis = directions.as_deref().map(realization_space).unwrap_or_default();
    let leaves_flat = basis.iter().all(ExpPoly::vanishes_at_zero);
    let phi_constant_on_leaves = spec
        .volatility
        .iter()
        .all(|t| t.phi.is_constant() || leaves_flat);
    let decay = basis.iter().all(|b| b.decay_check(spec.space.beta_prime));
    let conditions = Conditions {
        quasi_exponential,
        phi_constant_on_leaves,
        decay,
        moment_index: spec.levy.moment_nonvanishing_index(MOMENT_WINDOW),
    };
    let reason = if !quasi_exponential {
        Verdict::NotQuasiExponential
    } else if basis.is_empty() {
        Verdict::NoVolatility
    } else if !phi_constant_on_leaves {
        Verdict::PhiNotConstantOnLeaves
    } else {
        Verdict::Realized
    };
    let necessary = (!basis.is_empty()).then(|| check_necessary(spec, &basis));
    RealizationReport {
        exists: reason == Verdict::Realized,
        dimension: if reason == Verdict::Realized { basis.len() } else { 0 },
        basis,
        reason,
        conditions,
        necessary,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryConditions {
    pub moment_index: Option<usize>,
    /// For each basis element, the largest grid `κ > 0` with the element
    /// vanishing on `[0, κ]`, if any.
    pub zero_interval: Vec<Option<f64>>,
    pub moment_condition: bool,
    pub nonvanishing_condition: bool,
    pub notes: Vec<String>,
}

impl NecessaryConditions {
    /// Whether the obstruction results for jump models apply.
    pub fn applicable(&self) -> bool {
        self.moment_condition && self.nonvanishing_condition
    }
}

/// Reports whether the hypotheses of the necessity results hold: a moment
/// index `n₀` after which no jump moment vanishes, and no element of `V`
/// vanishing identically near 0.
pub fn check_necessary(spec: &ModelSpec, basis: &[ExpPoly]) -> NecessaryConditions {
    let moment_index = spec.levy.moment_nonvanishing_index(MOMENT_WINDOW);
    let zero_interval: Vec<Option<f64>> = basis
        .iter()
        .map(|b| {
            let curve = b.evaluate_on_grid(&spec.space);
            let scale = curve.sup_norm();
            let zeros = curve.values().iter().take_while(|v| v.abs() <= 1e-14 * scale).count();
            (zeros >= 2).then(|| spec.space.x(zeros - 1))
        })
        .collect();
    let moment_condition = moment_index.is_some();
    let nonvanishing_condition = zero_interval.iter().all(Option::is_none);
    let mut notes = Vec::new();
    if !spec.levy.has_jumps() {
        notes.push("no jumps: the necessity results for jump models do not apply".to_string());
    } else if !moment_condition {
        notes.push(format!(
            "some jump moment of order <= {MOMENT_WINDOW} vanishes in every window (e.g. symmetric jumps): \
             the necessity results are not applicable"
        ));
    }
    if !nonvanishing_condition {
        notes.push("a basis element vanishes on an interval [0, κ]".to_string());
    }
    NecessaryConditions {
        moment_index,
        zero_interval,
        moment_condition,
        nonvanishing_condition,
        notes,
    }
}

/// The leaves `M_t = ψ(t) + V` along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Foliation {
    pub times: Vec<f64>,
    pub psi: Vec<ForwardCurve>,
    pub basis: Vec<ExpPoly>,
}

/// Integrates `dψ/dt = (d/dx)ψ + α(ψ)` from `h0` with the simulation
/// scheme and pairs the path with the realization space.
pub fn build_foliation(spec: &ModelSpec, h0: &ForwardCurve, horizon: f64, n_steps: usize) -> Result<Foliation> {
    let report = check_sufficient(spec);
    if !report.exists {
        return Err(Error::NoRealization(report.reason.to_string()));
    }
    let psi = Engine::new(spec)?.deterministic_path(h0, horizon, n_steps)?;
    let dt = horizon / n_steps as f64;
    Ok(Foliation {
        times: (0..=n_steps).map(|n| n as f64 * dt).collect(),
        psi,
        basis: report.basis,
    })
}

/// Maturities on which [`foliation_residual`] measures the distance to the
/// leaf. Past `x_max` the shift extrapolates flat, and that error moves
/// inward with the transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualWindow {
    /// `x ≤ x_max − t`: the maturities whose exact value depends only on
    /// data inside the grid. Linear interpolation also spreads the
    /// extrapolation error diffusively, so a thin layer inside this window
    /// is still affected.
    Transport,
    /// Nodes no extrapolated value has reached: every step reads at most
    /// `⌈Δt/dx⌉` nodes ahead, so after `n` steps `x ≤ x_max − n⌈Δt/dx⌉dx`.
    DomainOfDependence,
}

/// Distance of `r_t` from the leaf `ψ(t) + V` at every time: the norm of
/// the residual of projecting `r_t − ψ(t)` onto `V`, restricted to the
/// window.
pub fn foliation_residual(sim: &SimulationResult, fol: &Foliation, window: ResidualWindow) -> Result<Vec<f64>> {
    if sim.times.len() != fol.times.len()
        || sim.times.iter().zip(&fol.times).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
    {
        return Err(Error::InvalidArgument("simulation and foliation times differ".into()));
    }
    let dt = fol.times.get(1).map_or(0.0, |t| t - fol.times[0]);
    sim.curves
        .iter()
        .zip(&fol.psi)
        .zip(&fol.times)
        .enumerate()
        .map(|(n, ((r, psi), &t))| {
            let cfg = r.config();
            let limit = match window {
                ResidualWindow::Transport => cfg.x_max - t,
                ResidualWindow::DomainOfDependence => {
                    let reach = (dt / cfg.dx() - 1e-9).ceil().max(1.0);
                    cfg.x_max - n as f64 * reach * cfg.dx()
                }
            };
            if limit < 2.0 * cfg.dx() {
                return Err(Error::InvalidArgument(format!(
                    "no grid left to measure the residual at t = {t} (window ends at {limit})"
                )));
            }
            let diff = r.sub(psi).truncated(limit);
            let cfg = *diff.config();
            let basis: Vec<ForwardCurve> = fol.basis.iter().map(|b| b.evaluate_on_grid(&cfg)).collect();
            Ok(diff.project_onto(&basis)?.residual_norm)
        })
        .collect()
}

/// Sample maturities `x = −ln(1 − u)` at Chebyshev points `u ∈ (0, 1)`,
/// dense near 0 where `Λ` changes fastest.
pub fn chebyshev_sample_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let u = 0.5 * (1.0 - (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos());
            -(1.0 - u).ln()
        })
        .collect()
}

/// Numerical rank of `Mᵢⱼ = Ψ(θᵢ Λ(xⱼ))`. For a model with jumps and
/// pairwise distinct `|θᵢ|` the functions `Ψ(θᵢΛ)` are independent, so the
/// rank is the number of θs; a quadratic Ψ caps it at 2 (3 with a drift).
/// Rows are scaled to unit norm before the singular values are taken.
pub fn vandermonde_rank_probe(
    model: &LevyModel,
    lambda: &ForwardCurve,
    thetas: &[f64],
    sample_xs: &[f64],
) -> Result<RankEstimate> {
    let rows = thetas
        .iter()
        .map(|&theta| {
            sample_xs
                .iter()
                .map(|&x| model.cumulant(theta * lambda.value_at(x)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(numerical_rank(&rows, RANK_TOLERANCE, true))
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Estimates `dim V^Ψ = dim span{ Ψ(−∫σ(h₀ + v)) : v ∈ V }` from `m` points
/// `v ∈ V`. The points are a randomly shifted Halton sequence, so the sample
/// for `m` contains the sample for every smaller `m`. Coordinates lie in
/// `[−1, 1]`, except that when some Φ depends on the short rate the element
/// with the largest `|v(0)|` is used to place `h(0)` uniformly across the
/// sigmoid's transition (`slope·(h(0) − center) ∈ [−3, 3]`).
pub fn vpsi_dimension_estimate<R: Rng + ?Sized>(
    spec: &ModelSpec,
    h0: &ForwardCurve,
    m: usize,
    rng: &mut R,
) -> Result<RankEstimate> {
    let directions: Vec<ExpPoly> = spec
        .volatility
        .iter()
        .map(|t| match &t.lambda {
            Direction::ExpPoly(f) => Ok(f.clone()),
            Direction::Tabulated(_) => Err(Error::NoRealization(Verdict::NotQuasiExponential.to_string())),
        })
        .collect::<Result<_>>()?;
    let basis = realization_space(&directions);
    let d = basis.len();
    if d == 0 || d > PRIMES.len() {
        return Err(Error::InvalidArgument(format!("cannot sample a realization space of dimension {d}")));
    }
    let vol = Volatility::from_spec(spec)?;
    let curves: Vec<ForwardCurve> = basis.iter().map(|b| b.evaluate_on_grid(&spec.space)).collect();
    let at_zero: Vec<f64> = basis.iter().map(ExpPoly::value_at_zero).collect();
    let steer = spec.volatility.iter().find_map(|t| match t.phi {
        PhiKind::SigmoidShortRate { center, slope, .. } if !t.phi.is_constant() => Some((center, slope)),
        _ => None,
    });
    let pivot = (0..d)
        .max_by(|&a, &b| at_zero[a].abs().total_cmp(&at_zero[b].abs()))
        .filter(|&j| at_zero[j] != 0.0);
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();

    let mut rows = Vec::with_capacity(m);
    for i in 1..=m as u64 {
        let u: Vec<f64> = (0..d).map(|j| (radical_inverse(i, PRIMES[j]) + shift[j]).fract()).collect();
        let mut c: Vec<f64> = u.iter().map(|u| 2.0 * u - 1.0).collect();
        if let (Some((center, slope)), Some(p)) = (steer, pivot) {
            let target = center + (6.0 * u[p] - 3.0) / slope;
            let others: f64 = (0..d).filter(|&j| j != p).map(|j| c[j] * at_zero[j]).sum();
            c[p] = (target - h0.short_rate() - others) / at_zero[p];
        }
        let mut h = h0.clone();
        for (cj, v) in c.iter().zip(&curves) {
            h.add_scaled(*cj, v);
        }
        rows.push(vol.cumulant_curve(&h, &spec.levy)?.into_values());
    }
    Ok(numerical_rank(&rows, RANK_TOLERANCE, true))
}
