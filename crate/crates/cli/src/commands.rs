use std::error::Error as StdError;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use levy_hjmm::dsl::has_errors;
use levy_hjmm::engine::{bond_price, martingale_test, reduced_model, sample_increments, Engine, Volatility};
use levy_hjmm::realization::{chebyshev_sample_points, check_sufficient, vandermonde_rank_probe, vpsi_dimension_estimate};
use levy_hjmm::rng::path_rng;
use levy_hjmm::series::{multivariate_eval, MultiSeries};
use levy_hjmm::{print, validate, Error, ModelSpec};

use crate::output::{csv, field, json, Manifest, Sink};
use crate::{Command, Common, Format, Mode, RunArgs};

pub enum Status {
    Ok,
    /// The command ran but its checks did not pass.
    Failed,
}

type Result<T> = std::result::Result<T, Box<dyn StdError>>;

fn load(path: &Path, common: &Common) -> Result<ModelSpec> {
    let mut spec = ModelSpec::from_file(path).map_err(|e| match e {
        Error::Parse(p) => format!("{}:{p}", path.display()),
        other => other.to_string(),
    })?;
    if common.grid_points.is_some() || common.x_max.is_some() {
        let n = common.grid_points.unwrap_or(spec.space.n_grid);
        let x_max = common.x_max.unwrap_or(spec.space.x_max);
        spec = spec.with_grid(x_max, n);
    }
    Ok(spec)
}

/// Loads a spec and refuses to continue when validation reports errors.
fn load_valid(path: &Path, common: &Common) -> Result<ModelSpec> {
    let spec = load(path, common)?;
    let diags = validate(&spec);
    for d in &diags {
        eprintln!("{}: {d}", path.display());
    }
    if has_errors(&diags) {
        return Err(format!("{} failed validation", path.display()).into());
    }
    Ok(spec)
}

fn manifest(command: &str, spec: Option<(&Path, &ModelSpec)>, seed: Option<u64>, common: &Common, parameters: serde_json::Value) -> Manifest {
    Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.map(|(p, _)| p.display().to_string()),
        spec_text: spec.map(|(_, s)| print(s)),
        seed,
        format: common.format,
        parameters,
        files: Vec::new(),
    }
}

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Check { spec, common } => check(&spec, &common),
        Command::Simulate { spec, mode, run, common } => simulate(&spec, mode, &run, &common),
        Command::Price { spec, maturity, common } => price(&spec, maturity, &common),
        Command::Martingale {
            spec,
            maturity,
            run,
            no_drift,
            common,
        } => martingale(&spec, maturity, &run, no_drift, &common),
        Command::RankProbe {
            spec,
            thetas,
            samples,
            vpsi,
            seed,
            common,
        } => rank_probe(&spec, &thetas, samples, vpsi, seed, &common),
        Command::Moments { spec, order, common } => moments(&spec, order, &common),
        Command::SeriesDemo { max_degree, common } => series_demo(max_degree, &common),
    }
}

fn check(path: &Path, common: &Common) -> Result<Status> {
    let spec = load(path, common)?;
    let diagnostics = validate(&spec);
    let report = check_sufficient(&spec);
    let mut sink = Sink::new(common.out.clone())?;
    match common.format {
        Format::Json => sink.primary(
            "check.json",
            &json(&json!({ "diagnostics": diagnostics, "realization": report })),
        )?,
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = diagnostics
                .iter()
                .map(|d| {
                    let level = if d.is_error() { "error" } else { "warning" };
                    vec![level.into(), d.code.clone(), field(&d.message)]
                })
                .collect();
            rows.push(vec![
                "info".into(),
                "realization".into(),
                field(&format!("exists={} dimension={} reason={}", report.exists, report.dimension, report.reason)),
            ]);
            sink.primary("check.csv", &csv(&["severity", "code", "message"], rows))?;
        }
    }
    sink.finish(manifest("check", Some((path, &spec)), None, common, json!({})))?;
    Ok(if has_errors(&diagnostics) { Status::Failed } else { Status::Ok })
}

#[derive(Serialize)]
struct PathSummary {
    path: usize,
    t: f64,
    short_rate_full: Option<f64>,
    short_rate_reduced: Option<f64>,
    /// Sup-norm gap of the terminal curves on `x ≤ x_max − t`.
    terminal_gap: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn simulate(path: &Path, mode: Mode, run: &RunArgs, common: &Common) -> Result<Status> {
    let spec = load_valid(path, common)?;
    let n_steps = run.steps.unwrap_or(100);
    let engine = Engine::new(&spec)?;
    let reduced = match mode {
        Mode::Full => None,
        Mode::Reduced | Mode::Both => Some(reduced_model(&spec)?),
    };
    let h0 = spec.initial_curve_on_grid()?;
    let dt = run.horizon / n_steps as f64;
    let results = (0..run.paths)
        .into_par_iter()
        .map(|p| {
            let incs = sample_increments(&spec.levy, dt, n_steps, &mut path_rng(run.seed, p as u64));
            let full = match mode {
                Mode::Full | Mode::Both => Some(engine.simulate_full(&h0, run.horizon, &incs)?),
                Mode::Reduced => None,
            };
            let red = match &reduced {
                Some(r) => Some(r.simulate(&engine, &h0, run.horizon, &incs)?),
                None => None,
            };
            Ok((full, red))
        })
        .collect::<levy_hjmm::Result<Vec<_>>>()?;

    let valid = (spec.space.x_max - run.horizon).max(spec.space.dx());
    let summaries: Vec<PathSummary> = results
        .iter()
        .enumerate()
        .map(|(p, (full, red))| PathSummary {
            path: p,
            t: run.horizon,
            short_rate_full: full.as_ref().map(|s| s.terminal().short_rate()),
            short_rate_reduced: red.as_ref().map(|s| s.terminal().short_rate()),
            terminal_gap: full.as_ref().zip(red.as_ref()).map(|(a, b)| {
                a.terminal().truncated(valid).sub(&b.terminal().truncated(valid)).sup_norm()
            }),
        })
        .collect();

    let mut sink = Sink::new(common.out.clone())?;
    if common.out.is_some() {
        if results.iter().any(|r| r.0.is_some()) {
            let mut rows = Vec::new();
            for (p, (full, _)) in results.iter().enumerate() {
                let Some(sim) = full else { continue };
                for (t, curve) in sim.times.iter().zip(&sim.curves) {
                    for (x, v) in spec.space.grid().iter().zip(curve.values()) {
                        rows.push(vec![p.to_string(), t.to_string(), x.to_string(), v.to_string()]);
                    }
                }
            }
            sink.file("full.csv", &csv(&["path", "t", "x", "value"], rows))?;
        }
        if let Some(model) = &reduced {
            let names: Vec<String> = (1..=model.dimension()).map(|j| format!("z_{j}")).collect();
            let mut header = vec!["path", "t"];
            header.extend(names.iter().map(String::as_str));
            let mut rows = Vec::new();
            let mut psi_rows = Vec::new();
            for (p, (_, red)) in results.iter().enumerate() {
                let Some(sim) = red else { continue };
                let path = sim.reduced.as_ref().expect("reduced runs carry their state");
                for (t, z) in sim.times.iter().zip(&path.states) {
                    let mut row = vec![p.to_string(), t.to_string()];
                    row.extend(z.iter().map(f64::to_string));
                    rows.push(row);
                }
                if p == 0 {
                    for (t, psi) in sim.times.iter().zip(&path.psi) {
                        for (x, v) in spec.space.grid().iter().zip(psi.values()) {
                            psi_rows.push(vec![t.to_string(), x.to_string(), v.to_string()]);
                        }
                    }
                }
            }
            sink.file("reduced.csv", &csv(&header, rows))?;
            sink.file("psi.csv", &csv(&["t", "x", "value"], psi_rows))?;
            sink.file("basis.json", &json(&model.basis()))?;
        }
    }
    match common.format {
        Format::Json => sink.primary("summary.json", &json(&summaries))?,
        Format::Csv => sink.primary(
            "summary.csv",
            &csv(
                &["path", "t", "short_rate_full", "short_rate_reduced", "terminal_gap"],
                summaries.iter().map(|s| {
                    vec![
                        s.path.to_string(),
                        s.t.to_string(),
                        opt(s.short_rate_full),
                        opt(s.short_rate_reduced),
                        opt(s.terminal_gap),
                    ]
                }),
            ),
        )?,
    }
    let mode_name = match mode {
        Mode::Full => "full",
        Mode::Reduced => "reduced",
        Mode::Both => "both",
    };
    let params = json!({ "mode": mode_name, "paths": run.paths, "steps": n_steps, "horizon": run.horizon });
    sink.finish(manifest("simulate", Some((path, &spec)), Some(run.seed), common, params))?;
    Ok(Status::Ok)
}

fn price(path: &Path, maturity: f64, common: &Common) -> Result<Status> {
    let spec = load_valid(path, common)?;
    let p = bond_price(&spec.initial_curve_on_grid()?, maturity)?;
    let mut sink = Sink::new(common.out.clone())?;
    match common.format {
        Format::Json => sink.primary("price.json", &json(&json!({ "maturity": maturity, "price": p })))?,
        Format::Csv => sink.primary(
            "price.csv",
            &csv(&["maturity", "price"], [vec![maturity.to_string(), p.to_string()]]),
        )?,
    }
    sink.finish(manifest("price", Some((path, &spec)), None, common, json!({ "maturity": maturity })))?;
    Ok(Status::Ok)
}

fn martingale(path: &Path, maturity: f64, run: &RunArgs, no_drift: bool, common: &Common) -> Result<Status> {
    let spec = load_valid(path, common)?;
    let n_steps = run.steps.unwrap_or(200);
    let mut engine = Engine::new(&spec)?;
    if no_drift {
        engine = engine.without_drift();
    }
    let h0 = spec.initial_curve_on_grid()?;
    let report = martingale_test(&engine, &h0, maturity, run.paths, n_steps, run.seed)?;
    let mut sink = Sink::new(common.out.clone())?;
    match common.format {
        Format::Json => sink.primary("martingale.json", &json(&report))?,
        Format::Csv => sink.primary(
            "martingale.csv",
            &csv(
                &["maturity", "time", "n_paths", "n_steps", "mean", "stderr", "reference", "z_score"],
                [vec![
                    report.maturity.to_string(),
                    report.time.to_string(),
                    report.n_paths.to_string(),
                    report.n_steps.to_string(),
                    report.mean.to_string(),
                    report.stderr.to_string(),
                    report.reference.to_string(),
                    report.z_score.to_string(),
                ]],
            ),
        )?,
    }
    let params = json!({ "maturity": maturity, "paths": run.paths, "steps": n_steps, "no_drift": no_drift });
    sink.finish(manifest("martingale", Some((path, &spec)), Some(run.seed), common, params))?;
    Ok(if report.passes(3.0) { Status::Ok } else { Status::Failed })
}

fn rank_probe(
    path: &Path,
    thetas: &[f64],
    samples: usize,
    vpsi: Option<usize>,
    seed: Option<u64>,
    common: &Common,
) -> Result<Status> {
    let spec = load_valid(path, common)?;
    let h0 = spec.initial_curve_on_grid()?;
    let vol = Volatility::from_spec(&spec)?;
    let lambda = vol.integrated_sigma(&vol.weights(&h0));
    let xs = chebyshev_sample_points(samples);
    let probe = vandermonde_rank_probe(&spec.levy, &lambda, thetas, &xs)?;
    let vpsi_estimate = match (vpsi, seed) {
        (Some(m), Some(seed)) => Some(vpsi_dimension_estimate(&spec, &h0, m, &mut path_rng(seed, 0))?),
        _ => None,
    };
    let mut sink = Sink::new(common.out.clone())?;
    match common.format {
        Format::Json => sink.primary(
            "rank_probe.json",
            &json(&json!({ "thetas": thetas, "samples": samples, "probe": probe, "vpsi": vpsi_estimate })),
        )?,
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = probe
                .singular_values
                .iter()
                .enumerate()
                .map(|(i, s)| vec!["probe".into(), (i + 1).to_string(), s.to_string()])
                .collect();
            if let Some(v) = &vpsi_estimate {
                rows.extend(
                    v.singular_values
                        .iter()
                        .enumerate()
                        .map(|(i, s)| vec!["vpsi".into(), (i + 1).to_string(), s.to_string()]),
                );
            }
            sink.primary("rank_probe.csv", &csv(&["matrix", "index", "singular_value"], rows))?;
        }
    }
    let params = json!({ "thetas": thetas, "samples": samples, "vpsi": vpsi });
    sink.finish(manifest("rank-probe", Some((path, &spec)), seed, common, params))?;
    Ok(Status::Ok)
}

fn moments(path: &Path, order: usize, common: &Common) -> Result<Status> {
    let spec = load(path, common)?;
    let model = &spec.levy;
    model.check()?;
    let series = model.taylor_coefficients(order.max(2))?;
    let rows: Vec<(usize, f64, f64)> = (1..=order)
        .map(|n| (n, model.jump_moment(n), series.coefficients[n]))
        .collect();
    let domain = model.domain();
    let n0 = model.moment_nonvanishing_index(order);
    let mut sink = Sink::new(common.out.clone())?;
    match common.format {
        Format::Json => sink.primary(
            "moments.json",
            &json(&json!({
                "kind": model.kind().to_string(),
                "domain": { "lower": domain.lower.to_string(), "upper": domain.upper.to_string() },
                "radius": series.radius.to_string(),
                "moment_index": n0,
                "rows": rows.iter().map(|(n, m, a)| json!({ "n": n, "moment": m, "coefficient": a })).collect::<Vec<_>>(),
            })),
        )?,
        Format::Csv => sink.primary(
            "moments.csv",
            &csv(
                &["n", "moment", "coefficient"],
                rows.iter().map(|(n, m, a)| vec![n.to_string(), m.to_string(), a.to_string()]),
            ),
        )?,
    }
    sink.finish(manifest("moments", Some((path, &spec)), None, common, json!({ "order": order })))?;
    Ok(Status::Ok)
}

/// `Σ z₁ᵃ z₂ᵇ = 1/((1 − z₁)(1 − z₂))` at `z = (½, ½)`, witness `(0.9, 0.9)`,
/// radius 0.75 (Euclidean), truncated at every degree up to `max_degree`.
fn series_demo(max_degree: u32, common: &Common) -> Result<Status> {
    let z = [0.5, 0.5];
    let exact = 4.0;
    let full = MultiSeries::from_fn(max_degree, vec![0.0, 0.0], vec![0.9, 0.9], |_| 1.0)?;
    let rows = (0..=max_degree)
        .map(|n| {
            let e = multivariate_eval(&full.truncated(n), &z, 0.75)?;
            Ok((n, e.value, e.tail_bound, (exact - e.value).abs()))
        })
        .collect::<levy_hjmm::Result<Vec<_>>>()?;
    let mut sink = Sink::new(common.out.clone())?;
    match common.format {
        Format::Json => sink.primary(
            "series.json",
            &json(
                &rows
                    .iter()
                    .map(|(n, v, b, e)| json!({ "degree": n, "value": v, "tail_bound": b, "error": e }))
                    .collect::<Vec<_>>(),
            ),
        )?,
        Format::Csv => sink.primary(
            "series.csv",
            &csv(
                &["degree", "value", "tail_bound", "error"],
                rows.iter()
                    .map(|(n, v, b, e)| vec![n.to_string(), v.to_string(), b.to_string(), e.to_string()]),
            ),
        )?,
    }
    sink.finish(manifest("series-demo", None, None, common, json!({ "max_degree": max_degree })))?;
    Ok(Status::Ok)
}
