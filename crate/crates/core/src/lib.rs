//! Lévy-driven Heath–Jarrow–Morton–Musiela forward-rate models.
//!
//! The crate covers the whole pipeline: parametric Lévy drivers and their
//! cumulants ([`levy`]), a discretized weighted curve space ([`curve`]),
//! exact exponential-polynomial algebra ([`expoly`]), a model-file language
//! ([`dsl`]), grid and finite-dimensional simulation ([`engine`]), affine
//! realization analysis ([`realization`]) and multivariate power-series
//! utilities ([`series`]).

pub mod curve;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod expoly;
pub mod levy;
pub mod linalg;
pub mod quadrature;
pub mod realization;
pub mod rng;
pub mod series;

pub use curve::{CurveSpaceConfig, ForwardCurve, Projection};
pub use dsl::{parse, parse_bytes, print, validate, Diagnostic, ModelSpec, ParseError, PhiKind, Severity};
pub use error::{Error, Result};
pub use expoly::{ExpPoly, Phase, Term};
pub use levy::{CumulantSeries, JumpDistribution, JumpMeasure, LevyKind, LevyModel};
