//! Model-specification files.
//!
//! A spec is a sequence of `key = value` pairs and named `{ … }` blocks:
//!
//! ```text
//! version = 1
//! levy { kind = brownian  b = 0  c = 1 }
//! volatility {
//!   term { phi = constant(value = 1)  lambda = exp_poly(rho = 0.2, theta = 1) }
//! }
//! space { beta = 0.5  beta_prime = 1  x_max = 20  n_grid = 512 }
//! k_interval { lo = -0.5  hi = 0.5 }
//! initial_curve { curve = flat(kappa = 0.03) }
//! ```
//!
//! Text is first parsed into a generic syntax tree and then lowered into a
//! [`ModelSpec`]; both stages report errors with a line and column.
//! Mathematical admissibility of a parsed spec is checked separately by
//! [`validate`].

mod lexer;
mod lower;
mod print;
mod syntax;
mod validate;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curve::{read_samples, CurveSpaceConfig, ForwardCurve};
use crate::error::{Error, Result};
use crate::expoly::ExpPoly;
use crate::levy::LevyModel;

pub use print::print;
pub use validate::{has_errors, validate, Diagnostic, Severity};

/// Default cumulant-argument interval `K` when the spec has no `k_interval`.
pub const DEFAULT_K: KInterval = KInterval { lo: -0.5, hi: 0.5 };

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Token kinds that would have been accepted here.
    pub expected: Vec<String>,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        Self {
            line,
            column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Scalar weight Φ(h) multiplying a volatility direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiKind {
    Constant {
        value: f64,
    },
    /// `lo + (hi − lo) / (1 + e^{−slope·(h(0) − center)})`.
    SigmoidShortRate {
        lo: f64,
        hi: f64,
        center: f64,
        slope: f64,
    },
}

impl PhiKind {
    pub fn evaluate(&self, h: &ForwardCurve) -> f64 {
        self.at_short_rate(h.short_rate())
    }

    pub fn at_short_rate(&self, r: f64) -> f64 {
        match *self {
            PhiKind::Constant { value } => value,
            PhiKind::SigmoidShortRate { lo, hi, center, slope } => {
                lo + (hi - lo) / (1.0 + (-slope * (r - center)).exp())
            }
        }
    }

    /// Closed interval containing every value of Φ.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            PhiKind::Constant { value } => (value, value),
            PhiKind::SigmoidShortRate { lo, hi, .. } => (lo.min(hi), lo.max(hi)),
        }
    }

    /// Lipschitz constant with respect to h(0), hence also with respect to
    /// the curve norm (|h(0)| ≤ ‖h‖).
    pub fn lipschitz(&self) -> f64 {
        match *self {
            PhiKind::Constant { .. } => 0.0,
            PhiKind::SigmoidShortRate { lo, hi, slope, .. } => 0.25 * (hi - lo).abs() * slope.abs(),
        }
    }

    /// Whether Φ ignores its argument.
    pub fn is_constant(&self) -> bool {
        match *self {
            PhiKind::Constant { .. } => true,
            PhiKind::SigmoidShortRate { lo, hi, slope, .. } => lo == hi || slope == 0.0,
        }
    }
}

/// A curve given by samples in a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub path: String,
    /// `(x, value)` samples; `None` until [`ModelSpec::load_tables`] runs.
    pub samples: Option<Vec<(f64, f64)>>,
}

impl Tabulated {
    pub fn new(path: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            samples: None,
        }
    }

    pub fn on_grid(&self, config: &CurveSpaceConfig) -> Result<ForwardCurve> {
        match &self.samples {
            Some(s) => Ok(ForwardCurve::from_samples(s, *config)),
            None => Err(Error::InvalidArgument(format!("table `{}` has not been loaded", self.path))),
        }
    }
}

/// Volatility direction λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ExpPoly(ExpPoly),
    Tabulated(Tabulated),
}

impl Direction {
    pub fn on_grid(&self, config: &CurveSpaceConfig) -> Result<ForwardCurve> {
        match self {
            Direction::ExpPoly(f) => Ok(f.evaluate_on_grid(config)),
            Direction::Tabulated(t) => t.on_grid(config),
        }
    }

    pub fn as_exp_poly(&self) -> Option<&ExpPoly> {
        match self {
            Direction::ExpPoly(f) => Some(f),
            Direction::Tabulated(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilityTerm {
    pub phi: PhiKind,
    pub lambda: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KInterval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCurve {
    Flat { kappa: f64 },
    ExpPoly(ExpPoly),
    File(Tabulated),
}

impl Default for InitialCurve {
    fn default() -> Self {
        InitialCurve::Flat { kappa: 0.0 }
    }
}

/// A complete model: driver, volatility `σ(h) = Σᵢ Φᵢ(h) λᵢ`, curve space,
/// admissible cumulant arguments `K`, and initial curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub levy: LevyModel,
    pub volatility: Vec<VolatilityTerm>,
    pub space: CurveSpaceConfig,
    pub k_interval: KInterval,
    pub initial_curve: InitialCurve,
}

impl ModelSpec {
    /// Parses a spec file and loads the tables it refers to, resolving
    /// relative paths against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut spec = parse_bytes(&text)?;
        spec.load_tables(path.parent().unwrap_or(Path::new(".")))?;
        Ok(spec)
    }

    pub fn load_tables(&mut self, base_dir: &Path) -> Result<()> {
        let load = |t: &mut Tabulated| -> Result<()> {
            if t.samples.is_none() {
                t.samples = Some(read_samples(&base_dir.join(&t.path))?);
            }
            Ok(())
        };
        for term in &mut self.volatility {
            if let Direction::Tabulated(t) = &mut term.lambda {
                load(t)?;
            }
        }
        if let InitialCurve::File(t) = &mut self.initial_curve {
            load(t)?;
        }
        Ok(())
    }

    pub fn initial_curve_on_grid(&self) -> Result<ForwardCurve> {
        match &self.initial_curve {
            InitialCurve::Flat { kappa } => Ok(ForwardCurve::flat(self.space, *kappa)),
            InitialCurve::ExpPoly(f) => Ok(f.evaluate_on_grid(&self.space)),
            InitialCurve::File(t) => t.on_grid(&self.space),
        }
    }

    /// Directions λᵢ as exponential polynomials, if all of them are.
    pub fn exp_poly_directions(&self) -> Option<Vec<ExpPoly>> {
        self.volatility.iter().map(|t| t.lambda.as_exp_poly().cloned()).collect()
    }

    /// Same model on a different grid.
    pub fn with_grid(&self, x_max: f64, n_grid: usize) -> Self {
        let mut spec = self.clone();
        spec.space.x_max = x_max;
        spec.space.n_grid = n_grid;
        spec
    }
}

/// Parses spec text.
pub fn parse(text: &str) -> std::result::Result<ModelSpec, ParseError> {
    let doc = syntax::parse_document(text)?;
    lower::lower(&doc)
}

/// Parses arbitrary bytes; invalid UTF-8 is reported at the offending byte.
pub fn parse_bytes(bytes: &[u8]) -> std::result::Result<ModelSpec, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(ParseError::new(line, column, "input is not valid UTF-8", &[]))
        }
    }
}
