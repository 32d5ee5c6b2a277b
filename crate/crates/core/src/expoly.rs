//! Exponential polynomials `Σ ρ xᵏ e^{−θx} trig(ωx)` with exact
//! differentiation.
//!
//! This class is closed under d/dx and its elements are exactly the
//! functions whose derivatives span a finite-dimensional space. Rank
//! decisions are made on coefficient vectors over the monomials
//! `xᵏ e^{−θx} trig(ωx)`, never on sampled values.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::{CurveSpaceConfig, ForwardCurve};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, IndependenceTest};

/// Relative tolerance for linear-dependence decisions in coefficient space.
pub const SPAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Cos,
    Sin,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Cos => "cos",
            Phase::Sin => "sin",
        })
    }
}

/// One monomial `coeff · x^degree · e^{−rate·x} · trig(frequency·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub rate: f64,
    pub degree: u32,
    pub frequency: f64,
    pub phase: Phase,
}

impl Term {
    pub fn exp(coeff: f64, rate: f64) -> Self {
        Self {
            coeff,
            rate,
            degree: 0,
            frequency: 0.0,
            phase: Phase::Cos,
        }
    }

    fn key(&self) -> Key {
        Key {
            rate: self.rate,
            degree: self.degree,
            frequency: self.frequency,
            phase: self.phase,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let trig = match self.phase {
            Phase::Cos => (self.frequency * x).cos(),
            Phase::Sin => (self.frequency * x).sin(),
        };
        self.coeff * x.powi(self.degree as i32) * (-self.rate * x).exp() * trig
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    rate: f64,
    degree: u32,
    frequency: f64,
    phase: Phase,
}

impl Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rate
            .total_cmp(&other.rate)
            .then(self.frequency.total_cmp(&other.frequency))
            .then(self.degree.cmp(&other.degree))
            .then(self.phase.cmp(&other.phase))
    }
}

/// An exponential polynomial in canonical form: terms sorted by key, no
/// repeated keys, no zero coefficients, nonnegative frequencies and no
/// `sin` terms of zero frequency.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Term>", from = "Vec<Term>")]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl From<Vec<Term>> for ExpPoly {
    fn from(terms: Vec<Term>) -> Self {
        Self::new(terms)
    }
}

impl From<ExpPoly> for Vec<Term> {
    fn from(f: ExpPoly) -> Self {
        f.terms
    }
}

impl ExpPoly {
    pub fn new(terms: Vec<Term>) -> Self {
        let mut terms: Vec<Term> = terms
            .into_iter()
            .filter_map(|mut t| {
                if t.frequency < 0.0 {
                    t.frequency = -t.frequency;
                    if t.phase == Phase::Sin {
                        t.coeff = -t.coeff;
                    }
                }
                if t.frequency == 0.0 {
                    // sin(0·x) = 0; also folds −0.0 into 0.0
                    t.frequency = 0.0;
                    if t.phase == Phase::Sin {
                        return None;
                    }
                }
                Some(t)
            })
            .collect();
        terms.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.key().cmp(&t.key()) == Ordering::Equal => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Self { terms: merged }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `coeff · e^{−rate·x}`.
    pub fn exp(coeff: f64, rate: f64) -> Self {
        Self::new(vec![Term::exp(coeff, rate)])
    }

    pub fn term(coeff: f64, rate: f64, degree: u32, frequency: f64, phase: Phase) -> Self {
        Self::new(vec![Term {
            coeff,
            rate,
            degree,
            frequency,
            phase,
        }])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).copied().collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: a * t.coeff,
                    ..*t
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.evaluate(x)).sum()
    }

    pub fn evaluate_on_grid(&self, config: &CurveSpaceConfig) -> ForwardCurve {
        ForwardCurve::from_fn(*config, |x| self.evaluate(x))
    }

    /// f(0), read off the coefficients.
    pub fn value_at_zero(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.degree == 0 && t.phase == Phase::Cos)
            .map(|t| t.coeff)
            .sum()
    }

    /// Whether f(0) is zero up to cancellation error among the contributing
    /// coefficients.
    pub fn vanishes_at_zero(&self) -> bool {
        let scale: f64 = self
            .terms
            .iter()
            .filter(|t| t.degree == 0 && t.phase == Phase::Cos)
            .map(|t| t.coeff.abs())
            .sum();
        self.value_at_zero().abs() <= 1e-12 * scale
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(3 * self.terms.len());
        for t in &self.terms {
            let k = t.degree;
            if k > 0 {
                out.push(Term {
                    coeff: t.coeff * k as f64,
                    degree: k - 1,
                    ..*t
                });
            }
            out.push(Term {
                coeff: -t.coeff * t.rate,
                ..*t
            });
            if t.frequency != 0.0 {
                let (phase, sign) = match t.phase {
                    Phase::Cos => (Phase::Sin, -1.0),
                    Phase::Sin => (Phase::Cos, 1.0),
                };
                out.push(Term {
                    coeff: sign * t.coeff * t.frequency,
                    phase,
                    ..*t
                });
            }
        }
        Self::new(out)
    }

    /// Slowest decay rate among the terms (`+∞` for the zero function).
    pub fn min_rate(&self) -> f64 {
        self.terms.iter().map(|t| t.rate).fold(f64::INFINITY, f64::min)
    }

    /// Closed-form membership in the decaying subspace under β′: every
    /// exponential rate must exceed β′/2.
    pub fn decay_check(&self, beta_prime: f64) -> bool {
        self.min_rate() > beta_prime / 2.0
    }

    /// Monomials reachable from `self` by differentiation: for each
    /// (rate, frequency) group, all degrees up to the largest present and
    /// both phases when the frequency is nonzero.
    fn closure_keys(&self) -> Vec<Key> {
        let mut keys = Vec::new();
        let mut i = 0;
        while i < self.terms.len() {
            let (rate, freq) = (self.terms[i].rate, self.terms[i].frequency);
            let mut max_degree = 0;
            while i < self.terms.len() && self.terms[i].rate == rate && self.terms[i].frequency == freq {
                max_degree = max_degree.max(self.terms[i].degree);
                i += 1;
            }
            for degree in 0..=max_degree {
                let phases: &[Phase] = if freq == 0.0 { &[Phase::Cos] } else { &[Phase::Cos, Phase::Sin] };
                for &phase in phases {
                    keys.push(Key {
                        rate,
                        degree,
                        frequency: freq,
                        phase,
                    });
                }
            }
        }
        keys
    }

    /// Upper bound on the dimension of the derivative span.
    pub fn closure_dimension(&self) -> usize {
        self.closure_keys().len()
    }

    /// Basis `f, f′, …, f⁽ᵈ⁻¹⁾` of `span{ f⁽ⁿ⁾ : n ≥ 0 }`; `d` is the order of
    /// the minimal linear ODE annihilating `f`.
    pub fn derivative_span(&self) -> Vec<ExpPoly> {
        let bound = self.closure_dimension();
        let mut test = IndependenceTest::new(SPAN_TOLERANCE);
        let mut basis = Vec::new();
        let mut current = self.clone();
        while basis.len() <= bound {
            let coords = coefficient_vectors(std::slice::from_ref(&current), &self.closure_keys());
            if !test.try_add(&coords[0]) {
                break;
            }
            let next = current.derivative();
            basis.push(current);
            current = next;
        }
        basis
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", t.coeff)?;
            match t.degree {
                0 => {}
                1 => f.write_str("·x")?,
                k => write!(f, "·x^{k}")?,
            }
            if t.rate != 0.0 {
                write!(f, "·e^(-{}x)", t.rate)?;
            }
            if t.frequency != 0.0 {
                write!(f, "·{}({}x)", t.phase, t.frequency)?;
            }
        }
        Ok(())
    }
}

fn union_keys(fs: &[ExpPoly]) -> Vec<Key> {
    let mut keys: Vec<Key> = fs
        .iter()
        .flat_map(|f| f.closure_keys())
        .collect();
    keys.sort_by(|a, b| a.cmp(b));
    keys.dedup_by(|a, b| a.cmp(b) == Ordering::Equal);
    keys
}

fn coefficient_vectors(fs: &[ExpPoly], keys: &[Key]) -> Vec<Vec<f64>> {
    fs.iter()
        .map(|f| {
            let mut v = vec![0.0; keys.len()];
            for t in &f.terms {
                let pos = keys
                    .binary_search_by(|k| k.cmp(&t.key()))
                    .expect("closure keys cover every term");
                v[pos] = t.coeff;
            }
            v
        })
        .collect()
}

/// Basis of `V = Σᵢ span{ λᵢ⁽ⁿ⁾ : n ≥ 0 }`: the union of the derivative
/// spans, reduced to a maximal independent subset, each element scaled to
/// unit coefficient norm.
pub fn realization_space(lams: &[ExpPoly]) -> Vec<ExpPoly> {
    let candidates: Vec<ExpPoly> = lams.iter().flat_map(|l| l.derivative_span()).collect();
    let keys = union_keys(&candidates);
    let vectors = coefficient_vectors(&candidates, &keys);
    let mut test = IndependenceTest::new(SPAN_TOLERANCE);
    candidates
        .into_iter()
        .zip(vectors)
        .filter(|(_, v)| test.try_add(v))
        .map(|(f, v)| {
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            f.scale(1.0 / norm)
        })
        .collect()
}

/// Coordinates of `f` in `basis`, computed in coefficient space, with the
/// relative residual of the fit.
pub fn coordinates(f: &ExpPoly, basis: &[ExpPoly]) -> Result<(Vec<f64>, f64)> {
    let mut all: Vec<ExpPoly> = basis.to_vec();
    all.push(f.clone());
    let keys = union_keys(&all);
    let vectors = coefficient_vectors(&all, &keys);
    let a = DMatrix::from_fn(keys.len(), basis.len(), |i, j| vectors[j][i]);
    let b = DVector::from_vec(vectors[basis.len()].clone());
    let (x, residual) = least_squares(&a, &b)?;
    let scale = b.norm();
    let rel = if scale > 0.0 { residual / scale } else { residual };
    Ok((x.iter().copied().collect(), rel))
}

/// Matrix `D` of d/dx restricted to `span(basis)`:
/// `basisⱼ′ = Σᵢ D[i][j] · basisᵢ`.
pub fn shift_matrix(basis: &[ExpPoly]) -> Result<DMatrix<f64>> {
    let d = basis.len();
    let mut m = DMatrix::zeros(d, d);
    for (j, v) in basis.iter().enumerate() {
        let (col, residual) = coordinates(&v.derivative(), basis)?;
        if residual > SPAN_TOLERANCE {
            return Err(Error::NotInvariant { residual });
        }
        for (i, c) in col.into_iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    Ok(m)
}
