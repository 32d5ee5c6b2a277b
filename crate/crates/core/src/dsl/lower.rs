//! Lowering of the syntax tree into a [`ModelSpec`].

use super::lexer::Pos;
use super::syntax::{Arg, Block, Item, Value, ValueKind};
use super::{
    Direction, InitialCurve, KInterval, ModelSpec, ParseError, PhiKind, Tabulated, VolatilityTerm, DEFAULT_K,
};
use crate::curve::CurveSpaceConfig;
use crate::expoly::{ExpPoly, Phase, Term};
use crate::levy::{JumpDistribution, LevyModel};

type Res<T> = Result<T, ParseError>;

fn at(pos: Pos, msg: impl Into<String>, expected: &[&str]) -> ParseError {
    ParseError::new(pos.line, pos.column, msg, expected)
}

/// Pairs and sub-blocks of one block, with unknown and repeated names
/// rejected.
struct Fields<'a> {
    name: &'a str,
    pos: Pos,
    pairs: Vec<(&'a str, Pos, &'a Value)>,
    blocks: Vec<&'a Block>,
}

impl<'a> Fields<'a> {
    fn new(block: &'a Block, display: &'a str, keys: &[&str], blocks: &[&str]) -> Res<Self> {
        let mut pairs: Vec<(&str, Pos, &Value)> = Vec::new();
        let mut subs = Vec::new();
        for item in &block.items {
            match item {
                Item::Pair { key, pos, value } => {
                    if !keys.contains(&key.as_str()) {
                        return Err(at(*pos, format!("unknown key `{key}` in {display}"), keys));
                    }
                    if pairs.iter().any(|(k, ..)| k == key) {
                        return Err(at(*pos, format!("duplicate key `{key}` in {display}"), &[]));
                    }
                    pairs.push((key, *pos, value));
                }
                Item::Block(b) => {
                    if !blocks.contains(&b.name.as_str()) {
                        let msg = if blocks.is_empty() {
                            format!("unexpected block `{}` in {display}", b.name)
                        } else {
                            format!("unknown block `{}` in {display}", b.name)
                        };
                        return Err(at(b.pos, msg, blocks));
                    }
                    subs.push(b);
                }
            }
        }
        Ok(Self {
            name: display,
            pos: block.pos,
            pairs,
            blocks: subs,
        })
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.pairs.iter().find(|(k, ..)| *k == key).map(|(_, _, v)| *v)
    }

    fn require(&self, key: &str) -> Res<&'a Value> {
        self.get(key)
            .ok_or_else(|| at(self.pos, format!("missing `{key}` in {}", self.name), &[key]))
    }

    fn number(&self, key: &str) -> Res<f64> {
        number(self.require(key)?)
    }

    fn number_or(&self, key: &str, default: f64) -> Res<f64> {
        self.get(key).map_or(Ok(default), number)
    }

    fn block(&self, name: &str) -> Res<Option<&'a Block>> {
        let mut found = self.blocks.iter().filter(|b| b.name == name);
        let first = found.next().copied();
        if let Some(dup) = found.next() {
            return Err(at(dup.pos, format!("duplicate block `{name}`"), &[]));
        }
        Ok(first)
    }
}

fn number(v: &Value) -> Res<f64> {
    match v.kind {
        ValueKind::Number(x) if x.is_finite() => Ok(x),
        ValueKind::Number(_) => Err(at(v.pos, "number is out of range", &["finite number"])),
        _ => Err(at(v.pos, "expected a number", &["number"])),
    }
}

fn integer(v: &Value) -> Res<u32> {
    let x = number(v)?;
    if x.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&x) {
        return Err(at(v.pos, "expected a nonnegative integer", &["integer"]));
    }
    Ok(x as u32)
}

fn ident(v: &Value) -> Res<&str> {
    match &v.kind {
        ValueKind::Ident(s) => Ok(s),
        _ => Err(at(v.pos, "expected an identifier", &["identifier"])),
    }
}

fn string(v: &Value) -> Res<&str> {
    match &v.kind {
        ValueKind::Str(s) => Ok(s),
        _ => Err(at(v.pos, "expected a string", &["string"])),
    }
}

/// Named arguments of a call, with unknown and repeated names rejected.
struct Args<'a> {
    name: &'a str,
    pos: Pos,
    args: &'a [Arg],
}

impl<'a> Args<'a> {
    fn get(&self, key: &str) -> Option<&'a Value> {
        self.args.iter().find(|a| a.name == key).map(|a| &a.value)
    }

    fn number(&self, key: &str) -> Res<f64> {
        let v = self
            .get(key)
            .ok_or_else(|| at(self.pos, format!("missing argument `{key}` of {}()", self.name), &[key]))?;
        number(v)
    }

    fn number_or(&self, key: &str, default: f64) -> Res<f64> {
        self.get(key).map_or(Ok(default), number)
    }
}

fn call<'a>(v: &'a Value, allowed: &[(&str, &[&str])]) -> Res<Args<'a>> {
    let names: Vec<&str> = allowed.iter().map(|(n, _)| *n).collect();
    let ValueKind::Call { name, args } = &v.kind else {
        return Err(at(v.pos, "expected a call", &names));
    };
    let Some((_, params)) = allowed.iter().find(|(n, _)| n == name) else {
        return Err(at(v.pos, format!("unknown function `{name}`"), &names));
    };
    for (i, a) in args.iter().enumerate() {
        if !params.contains(&a.name.as_str()) {
            return Err(at(a.pos, format!("unknown argument `{}` of {name}()", a.name), params));
        }
        if args[..i].iter().any(|b| b.name == a.name) {
            return Err(at(a.pos, format!("duplicate argument `{}`", a.name), &[]));
        }
    }
    Ok(Args {
        name,
        pos: v.pos,
        args,
    })
}

const EXP_POLY_ARGS: &[&str] = &["rho", "theta", "degree", "omega", "phase"];

fn exp_poly_term(v: &Value) -> Res<Term> {
    let a = call(v, &[("exp_poly", EXP_POLY_ARGS)])?;
    let degree = a.get("degree").map_or(Ok(0), integer)?;
    let phase = match a.get("phase") {
        None => Phase::Cos,
        Some(p) => match ident(p)? {
            "cos" => Phase::Cos,
            "sin" => Phase::Sin,
            _ => return Err(at(p.pos, "unknown phase", &["cos", "sin"])),
        },
    };
    Ok(Term {
        coeff: a.number("rho")?,
        rate: a.number_or("theta", 0.0)?,
        degree,
        frequency: a.number_or("omega", 0.0)?,
        phase,
    })
}

fn exp_poly(v: &Value) -> Res<ExpPoly> {
    let parts: Vec<&Value> = match &v.kind {
        ValueKind::Sum(parts) => parts.iter().collect(),
        _ => vec![v],
    };
    let terms = parts.into_iter().map(exp_poly_term).collect::<Res<Vec<_>>>()?;
    Ok(ExpPoly::new(terms))
}

fn is_call(v: &Value, name: &str) -> bool {
    matches!(&v.kind, ValueKind::Call { name: n, .. } if n == name)
}

fn lower_levy(block: &Block) -> Res<LevyModel> {
    let kinds = ["brownian", "compound_poisson", "merton", "gamma", "bilateral_gamma"];
    let all = [
        "kind",
        "b",
        "c",
        "intensity",
        "jump",
        "shape",
        "rate",
        "shape_plus",
        "rate_plus",
        "shape_minus",
        "rate_minus",
    ];
    let f = Fields::new(block, "levy block", &all, &[])?;
    let kind_value = f.require("kind")?;
    let kind = ident(kind_value)?;
    let keys: &[&str] = match kind {
        "brownian" => &["kind", "b", "c"],
        "compound_poisson" | "merton" => &["kind", "b", "c", "intensity", "jump"],
        "gamma" => &["kind", "b", "c", "shape", "rate"],
        "bilateral_gamma" => &["kind", "b", "c", "shape_plus", "rate_plus", "shape_minus", "rate_minus"],
        _ => return Err(at(kind_value.pos, format!("unknown Lévy kind `{kind}`"), &kinds)),
    };
    if let Some((key, pos, _)) = f.pairs.iter().find(|(k, ..)| !keys.contains(k)) {
        return Err(at(*pos, format!("key `{key}` does not apply to kind `{kind}`"), keys));
    }
    let b = f.number_or("b", 0.0)?;
    let c = f.number_or("c", 0.0)?;
    Ok(match kind {
        "brownian" => LevyModel::brownian(b, c),
        "compound_poisson" | "merton" => {
            let jump_value = f.require("jump")?;
            let distributions: &[(&str, &[&str])] = if kind == "merton" {
                &[("normal", &["mean", "variance"])]
            } else {
                &[
                    ("point_mass", &["at"]),
                    ("exponential", &["rate"]),
                    ("normal", &["mean", "variance"]),
                ]
            };
            let a = call(jump_value, distributions)?;
            let jump = match a.name {
                "point_mass" => JumpDistribution::PointMass { at: a.number("at")? },
                "exponential" => JumpDistribution::Exponential { rate: a.number("rate")? },
                _ => JumpDistribution::Normal {
                    mean: a.number("mean")?,
                    variance: a.number("variance")?,
                },
            };
            LevyModel::compound_poisson(b, c, f.number("intensity")?, jump)
        }
        "gamma" => LevyModel::gamma(b, c, f.number("shape")?, f.number("rate")?),
        _ => LevyModel::bilateral_gamma(
            b,
            c,
            f.number("shape_plus")?,
            f.number("rate_plus")?,
            f.number("shape_minus")?,
            f.number("rate_minus")?,
        ),
    })
}

fn lower_term(block: &Block) -> Res<VolatilityTerm> {
    let f = Fields::new(block, "term block", &["phi", "lambda"], &[])?;
    let a = call(
        f.require("phi")?,
        &[
            ("constant", &["value"]),
            ("sigmoid_short_rate", &["lo", "hi", "center", "slope"]),
        ],
    )?;
    let phi = match a.name {
        "constant" => PhiKind::Constant { value: a.number("value")? },
        _ => PhiKind::SigmoidShortRate {
            lo: a.number("lo")?,
            hi: a.number("hi")?,
            center: a.number("center")?,
            slope: a.number("slope")?,
        },
    };
    let lam = f.require("lambda")?;
    let lambda = if is_call(lam, "tabulated") {
        let a = call(lam, &[("tabulated", &["path"])])?;
        let path = a
            .get("path")
            .ok_or_else(|| at(a.pos, "missing argument `path` of tabulated()", &["path"]))?;
        Direction::Tabulated(Tabulated::new(string(path)?))
    } else {
        match &lam.kind {
            ValueKind::Call { .. } | ValueKind::Sum(_) => Direction::ExpPoly(exp_poly(lam)?),
            _ => return Err(at(lam.pos, "expected a direction", &["exp_poly", "tabulated"])),
        }
    };
    Ok(VolatilityTerm { phi, lambda })
}

fn lower_space(block: &Block) -> Res<CurveSpaceConfig> {
    let f = Fields::new(block, "space block", &["beta", "beta_prime", "x_max", "n_grid"], &[])?;
    let defaults = CurveSpaceConfig::default();
    let n_grid = match f.get("n_grid") {
        Some(v) => integer(v)? as usize,
        None => defaults.n_grid,
    };
    Ok(CurveSpaceConfig {
        beta: f.number("beta")?,
        beta_prime: f.number("beta_prime")?,
        x_max: f.number_or("x_max", defaults.x_max)?,
        n_grid,
    })
}

fn lower_initial(block: &Block) -> Res<InitialCurve> {
    let f = Fields::new(block, "initial_curve block", &["curve"], &[])?;
    let v = f.require("curve")?;
    if is_call(v, "flat") {
        let a = call(v, &[("flat", &["kappa"])])?;
        return Ok(InitialCurve::Flat { kappa: a.number("kappa")? });
    }
    if is_call(v, "file") {
        let a = call(v, &[("file", &["path"])])?;
        let path = a
            .get("path")
            .ok_or_else(|| at(a.pos, "missing argument `path` of file()", &["path"]))?;
        return Ok(InitialCurve::File(Tabulated::new(string(path)?)));
    }
    match &v.kind {
        ValueKind::Call { .. } | ValueKind::Sum(_) => Ok(InitialCurve::ExpPoly(exp_poly(v)?)),
        _ => Err(at(v.pos, "expected an initial curve", &["flat", "exp_poly", "file"])),
    }
}

pub(super) fn lower(doc: &Block) -> Res<ModelSpec> {
    let blocks = ["levy", "volatility", "space", "k_interval", "initial_curve"];
    let top = Fields::new(doc, "spec", &["version"], &blocks)?;
    if let Some(v) = top.get("version") {
        if integer(v)? != 1 {
            return Err(at(v.pos, "unsupported version", &["1"]));
        }
    }
    let missing = |name: &str| at(doc.end, format!("missing `{name}` block"), &[name]);

    let levy = lower_levy(top.block("levy")?.ok_or_else(|| missing("levy"))?)?;

    let vol = top.block("volatility")?.ok_or_else(|| missing("volatility"))?;
    let vf = Fields::new(vol, "volatility block", &[], &["term"])?;
    if vf.blocks.is_empty() {
        return Err(at(vol.end, "volatility block needs at least one term", &["term"]));
    }
    let volatility = vf.blocks.iter().map(|b| lower_term(b)).collect::<Res<Vec<_>>>()?;

    let space = lower_space(top.block("space")?.ok_or_else(|| missing("space"))?)?;

    let k_interval = match top.block("k_interval")? {
        Some(b) => {
            let f = Fields::new(b, "k_interval block", &["lo", "hi"], &[])?;
            KInterval {
                lo: f.number("lo")?,
                hi: f.number("hi")?,
            }
        }
        None => DEFAULT_K,
    };

    let initial_curve = match top.block("initial_curve")? {
        Some(b) => lower_initial(b)?,
        None => InitialCurve::default(),
    };

    Ok(ModelSpec {
        levy,
        volatility,
        space,
        k_interval,
        initial_curve,
    })
}

#[cfg(test)]
mod tests {
    use crate::dsl::*;
    use crate::levy::{JumpDistribution, JumpMeasure, LevyKind};

    const MINIMAL: &str = "
levy { kind = brownian c = 1 }
volatility { term { phi = constant(value = 1) lambda = exp_poly(rho = 0.2, theta = 1) } }
space { beta = 0.5 beta_prime = 1 }
";

    #[test]
    fn minimal_spec() {
        let spec = parse(MINIMAL).unwrap();
        assert_eq!(spec.volatility.len(), 1);
        assert_eq!(spec.levy.kind(), LevyKind::Brownian);
        assert_eq!(spec.k_interval, DEFAULT_K);
        assert_eq!(spec.space.n_grid, 512);
        assert_eq!(spec.initial_curve, InitialCurve::Flat { kappa: 0.0 });
        assert_eq!(
            spec.volatility[0].lambda,
            Direction::ExpPoly(ExpPoly::exp(0.2, 1.0))
        );
    }

    #[test]
    fn string_where_number_expected() {
        let text = "levy { kind = brownian c = 1 }
volatility {
  term { phi = constant(value = 1)
         lambda = exp_poly(rho = 0.2, theta = \"abc\") }
}
space { beta = 0.5 beta_prime = 1 }";
        let e = parse(text).unwrap_err();
        assert_eq!((e.line, e.column), (4, 47));
        assert_eq!(e.expected, vec!["number"]);
    }

    #[test]
    fn semantic_errors_are_positioned() {
        let e = parse("levy { kind = levy_flight }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 15));
        let e = parse("levy { kind = brownian c = 1 intensity = 2 }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 30));
        let e = parse("levy { kind = brownian c = 1 c = 2 }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 30));
        let e = parse("version = 2").unwrap_err();
        assert_eq!((e.line, e.column), (1, 11));
        let e = parse("levy { kind = brownian c = 1 }").unwrap_err();
        assert!(e.message.contains("volatility"));
        let e = parse(&MINIMAL.replace("space { beta = 0.5 beta_prime = 1 }", "space { beta = 0.5 beta_prime = 1 n_grid = 3.5 }")).unwrap_err();
        assert_eq!(e.expected, vec!["integer"]);
        let e = parse(&MINIMAL.replace("c = 1", "c = 1e999")).unwrap_err();
        assert_eq!((e.line, e.column), (2, 28));
    }

    #[test]
    fn jump_kinds() {
        let cp = parse(&MINIMAL.replace(
            "kind = brownian c = 1",
            "kind = compound_poisson intensity = 3 jump = exponential(rate = 2)",
        ))
        .unwrap();
        assert_eq!(
            cp.levy.jumps,
            JumpMeasure::CompoundPoisson {
                intensity: 3.0,
                jump: JumpDistribution::Exponential { rate: 2.0 }
            }
        );
        let e = parse(&MINIMAL.replace(
            "kind = brownian c = 1",
            "kind = merton intensity = 3 jump = exponential(rate = 2)",
        ))
        .unwrap_err();
        assert_eq!(e.expected, vec!["normal"]);
        let bg = parse(&MINIMAL.replace(
            "kind = brownian c = 1",
            "kind = bilateral_gamma shape_plus = 1 rate_plus = 2 shape_minus = 1 rate_minus = 3",
        ))
        .unwrap();
        assert_eq!(bg.levy.kind(), LevyKind::BilateralGamma);
    }

    #[test]
    fn sums_and_tables() {
        let spec = parse(&MINIMAL.replace(
            "lambda = exp_poly(rho = 0.2, theta = 1)",
            "lambda = exp_poly(rho = 0.2, theta = 1) + exp_poly(rho = 1, theta = 1, degree = 1, omega = 2, phase = sin)",
        ))
        .unwrap();
        let Direction::ExpPoly(f) = &spec.volatility[0].lambda else { panic!() };
        assert_eq!(f.terms().len(), 2);
        let spec = parse(&MINIMAL.replace(
            "lambda = exp_poly(rho = 0.2, theta = 1)",
            "lambda = tabulated(path = \"lam.csv\")",
        ))
        .unwrap();
        assert_eq!(spec.volatility[0].lambda, Direction::Tabulated(Tabulated::new("lam.csv")));
    }
}
