//! Canonical text form of a [`ModelSpec`]. Numbers are written with
//! Rust's shortest round-trip formatting, so `parse(print(s)) == s`.

use std::fmt::Write;

use super::{Direction, InitialCurve, ModelSpec, PhiKind};
use crate::expoly::ExpPoly;
use crate::levy::{JumpDistribution, JumpMeasure};

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn quoted(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn exp_poly(f: &ExpPoly) -> String {
    if f.is_zero() {
        return "exp_poly(rho = 0.0, theta = 0.0)".into();
    }
    f.terms()
        .iter()
        .map(|t| {
            format!(
                "exp_poly(rho = {}, theta = {}, degree = {}, omega = {}, phase = {})",
                num(t.coeff),
                num(t.rate),
                t.degree,
                num(t.frequency),
                t.phase
            )
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn print(spec: &ModelSpec) -> String {
    let mut s = String::from("version = 1\n\nlevy {\n");
    let m = &spec.levy;
    let _ = writeln!(s, "  kind = {}", m.kind());
    let _ = writeln!(s, "  b = {}", num(m.drift));
    let _ = writeln!(s, "  c = {}", num(m.gaussian_variance));
    match m.jumps {
        JumpMeasure::None => {}
        JumpMeasure::CompoundPoisson { intensity, jump } => {
            let _ = writeln!(s, "  intensity = {}", num(intensity));
            let jump = match jump {
                JumpDistribution::PointMass { at } => format!("point_mass(at = {})", num(at)),
                JumpDistribution::Exponential { rate } => format!("exponential(rate = {})", num(rate)),
                JumpDistribution::Normal { mean, variance } => {
                    format!("normal(mean = {}, variance = {})", num(mean), num(variance))
                }
            };
            let _ = writeln!(s, "  jump = {jump}");
        }
        JumpMeasure::Gamma { shape, rate } => {
            let _ = writeln!(s, "  shape = {}\n  rate = {}", num(shape), num(rate));
        }
        JumpMeasure::BilateralGamma {
            shape_plus,
            rate_plus,
            shape_minus,
            rate_minus,
        } => {
            let _ = writeln!(
                s,
                "  shape_plus = {}\n  rate_plus = {}\n  shape_minus = {}\n  rate_minus = {}",
                num(shape_plus),
                num(rate_plus),
                num(shape_minus),
                num(rate_minus)
            );
        }
    }

    s.push_str("}\n\nvolatility {\n");
    for term in &spec.volatility {
        let phi = match term.phi {
            PhiKind::Constant { value } => format!("constant(value = {})", num(value)),
            PhiKind::SigmoidShortRate { lo, hi, center, slope } => format!(
                "sigmoid_short_rate(lo = {}, hi = {}, center = {}, slope = {})",
                num(lo),
                num(hi),
                num(center),
                num(slope)
            ),
        };
        let lambda = match &term.lambda {
            Direction::ExpPoly(f) => exp_poly(f),
            Direction::Tabulated(t) => format!("tabulated(path = {})", quoted(&t.path)),
        };
        let _ = writeln!(s, "  term {{\n    phi = {phi}\n    lambda = {lambda}\n  }}");
    }

    let sp = &spec.space;
    let _ = write!(
        s,
        "}}\n\nspace {{\n  beta = {}\n  beta_prime = {}\n  x_max = {}\n  n_grid = {}\n}}\n\n",
        num(sp.beta),
        num(sp.beta_prime),
        num(sp.x_max),
        sp.n_grid
    );
    let _ = write!(
        s,
        "k_interval {{\n  lo = {}\n  hi = {}\n}}\n\n",
        num(spec.k_interval.lo),
        num(spec.k_interval.hi)
    );
    let curve = match &spec.initial_curve {
        InitialCurve::Flat { kappa } => format!("flat(kappa = {})", num(*kappa)),
        InitialCurve::ExpPoly(f) => exp_poly(f),
        InitialCurve::File(t) => format!("file(path = {})", quoted(&t.path)),
    };
    let _ = writeln!(s, "initial_curve {{\n  curve = {curve}\n}}");
    s
}

#[cfg(test)]
mod tests {
    use crate::dsl::*;

    #[test]
    fn print_parse_round_trip() {
        let text = "
levy { kind = merton b = 0.01 c = 0.04 intensity = 1 jump = normal(mean = -0.1, variance = 0.01) }
volatility {
  term { phi = constant(value = 1) lambda = exp_poly(rho = 0.01, theta = 1) + exp_poly(rho = 0.3, theta = 2, degree = 1, omega = 1.5, phase = sin) }
  term { phi = sigmoid_short_rate(lo = 0.2, hi = 1, center = 0.03, slope = 50) lambda = tabulated(path = \"a \\\"b\\\".csv\") }
}
space { beta = 0.25 beta_prime = 0.75 x_max = 10 n_grid = 257 }
k_interval { lo = -0.3 hi = 0.4 }
initial_curve { curve = exp_poly(rho = 0.03, theta = 0) + exp_poly(rho = -0.01, theta = 0.5) }
";
        let spec = parse(text).unwrap();
        let printed = print(&spec);
        let again = parse(&printed).unwrap();
        assert_eq!(spec, again);
        assert_eq!(printed, print(&again));
    }

    #[test]
    fn awkward_numbers_survive() {
        let text = "levy { kind = brownian c = 0.1 b = 1e-300 }
volatility { term { phi = constant(value = 0.30000000000000004) lambda = exp_poly(rho = 1e21, theta = 3) } }
space { beta = 0.5 beta_prime = 1 }
initial_curve { curve = file(path = \"h0.csv\") }";
        let spec = parse(text).unwrap();
        assert_eq!(parse(&print(&spec)).unwrap(), spec);
    }
}
