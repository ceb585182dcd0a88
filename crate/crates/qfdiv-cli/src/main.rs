//! Command-line front end: ingest matrices and channels from JSON, run
//! divergence and discrimination computations, decide reversibility, and
//! emit JSON/CSV reports.
//!
//! Exit codes for `check`: 0 reversible/correctable, 1 not, 2
//! inconclusive (including violated hypotheses and input errors).

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use qfdiv::channels::{tomiyama_map, Channel, ChannelJson, TomiyamaKind};
use qfdiv::discrimination::{
    bayes_measure_tp, chernoff_distance, exponent_trend, hoeffding_distance, PsiCurve,
};
use qfdiv::fdiv::{f_divergence, fidelity, relative_entropy, renyi, DivergenceFunction};
use qfdiv::matcore::{MatrixJson, PsdOperator};
use qfdiv::opconvex::{CanonicalFunction, RepresentingMeasure};
use qfdiv::reversibility::{equality_report, error_correction_check, EqualityOptions, Verdict};
use qfdiv::{ExtReal, FunctionSpec};

type P = PsdOperator<f64>;

#[derive(Parser)]
#[command(
    name = "qfdiv",
    version,
    about = "Quantum f-divergences, Petz recovery and reversibility checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a distinguishability measure for a pair of states.
    Divergence(DivergenceArgs),
    /// Decide reversibility of a channel on a pair or a state set.
    Check(CheckArgs),
    /// Deterministic experiment sweeps emitting CSV.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct DivergenceArgs {
    /// Two operator files (JSON matrix format).
    #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
    pair: Vec<PathBuf>,
    /// Measure name, optionally with parameters:
    /// f_divergence | renyi:alpha=0.5 | relative_entropy | chernoff |
    /// hoeffding:r=0.05 | t_p:p=0.5 | fidelity | psi_curve
    #[arg(long)]
    measure: String,
    /// Divergence function for f_divergence: inline JSON
    /// {"kind":...,"params":{...}} or a path to such a file.
    #[arg(long)]
    function: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Channel file (JSON: d_in, d_out, kraus and/or choi).
    #[arg(long)]
    channel: PathBuf,
    /// Pair mode: two operator files A B with supp A <= supp B.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pair: Option<Vec<PathBuf>>,
    /// Code-set mode: density files (with --sigma).
    #[arg(long, num_args = 1..)]
    states: Option<Vec<PathBuf>>,
    /// Reference state dominating the code supports.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Divergence function used for the supplied-f condition; defaults
    /// to x log x.
    #[arg(long)]
    function: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// exponent_trend | quadrature_conformance | tomiyama_sweep
    #[arg(long)]
    name: String,
    /// States for exponent_trend.
    #[arg(long, num_args = 2, value_names = ["RHO", "SIGMA"])]
    pair: Option<Vec<PathBuf>>,
    /// Prior for exponent_trend.
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Dimension cap for tensor powers.
    #[arg(long, default_value_t = 4096)]
    cap: usize,
    /// Map family for tomiyama_sweep: phi | psi | lambda.
    #[arg(long, default_value = "psi")]
    map_kind: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DivergenceReport {
    measure: String,
    value: ExtReal<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimizer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    seed: u64,
    tolerance: f64,
}

#[derive(Serialize)]
struct CheckEnvelope<T: Serialize> {
    kind: &'static str,
    seed: u64,
    verdict: Verdict,
    report: T,
}

#[derive(Serialize)]
struct CheckFailure {
    kind: &'static str,
    seed: u64,
    verdict: Verdict,
    reason: String,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Divergence(args) => run_divergence(&args).map_or_else(fail, |_| 0),
        Command::Check(args) => run_check(&args).unwrap_or_else(fail),
        Command::Experiment(args) => run_experiment(&args).map_or_else(fail, |_| 0),
    };
    std::process::exit(code);
}

fn fail(err: anyhow::Error) -> i32 {
    eprintln!("error: {err:#}");
    1
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_operator(path: &Path) -> Result<P> {
    let text = read_to_string(path)?;
    let json: MatrixJson = serde_json::from_str(&text).map_err(|e| {
        anyhow!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    let matrix = json
        .to_matrix::<f64>()
        .with_context(|| format!("{}: invalid matrix", path.display()))?;
    P::new(matrix).with_context(|| format!("{}: not a PSD operator", path.display()))
}

fn load_channel(path: &Path) -> Result<Channel<f64>> {
    let text = read_to_string(path)?;
    let json: ChannelJson = serde_json::from_str(&text).map_err(|e| {
        anyhow!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    Channel::from_json(&json).with_context(|| format!("{}: invalid channel", path.display()))
}

fn load_function(spec: Option<&str>) -> Result<DivergenceFunction<f64>> {
    let Some(spec) = spec else {
        return Ok(DivergenceFunction::x_log_x());
    };
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        read_to_string(Path::new(spec))?
    };
    let parsed: FunctionSpec =
        serde_json::from_str(&text).with_context(|| "parsing divergence function spec")?;
    Ok(DivergenceFunction::build(&parsed)?)
}

/// Splits `name:key=value,key=value` into the name and a parameter map.
fn parse_measure(measure: &str) -> Result<(String, BTreeMap<String, f64>)> {
    let (name, rest) = match measure.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (measure, None),
    };
    let mut params = BTreeMap::new();
    if let Some(rest) = rest {
        for piece in rest.split(',') {
            let (k, v) = piece
                .split_once('=')
                .ok_or_else(|| anyhow!("malformed parameter {piece:?} (want key=value)"))?;
            params.insert(
                k.trim().to_string(),
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("parameter {k} is not a number"))?,
            );
        }
    }
    Ok((name.to_string(), params))
}

/// Writes atomically when a path is given, otherwise to stdout.
fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
            std::fs::rename(&tmp, path)
                .with_context(|| format!("renaming into {}", path.display()))?;
            Ok(())
        }
    }
}

fn support_note(a: &P, b: &P) -> Option<String> {
    if a.support_contained_in(b) {
        None
    } else {
        Some("supp A not contained in supp B; omega-weighted values apply".into())
    }
}

fn run_divergence(args: &DivergenceArgs) -> Result<()> {
    let a = load_operator(&args.pair[0])?;
    let b = load_operator(&args.pair[1])?;
    if a.dim() != b.dim() {
        bail!(
            "operators have different dimensions {} vs {}",
            a.dim(),
            b.dim()
        );
    }
    let (name, params) = parse_measure(&args.measure)?;

    // The psi curve is a CSV artifact regardless of --format.
    if name == "psi_curve" {
        let curve = PsiCurve::new(&a, &b)?;
        let mut csv = String::from("alpha,psi\n");
        for i in 0..=100 {
            let alpha = i as f64 / 100.0;
            csv.push_str(&format!("{alpha},{}\n", curve.psi(alpha).to_f64_lossy()));
        }
        return emit(args.out.as_ref(), &csv);
    }

    let mut alpha_star = None;
    let mut minimizer = None;
    let value: ExtReal<f64> = match name.as_str() {
        "f_divergence" => {
            let f = load_function(args.function.as_deref())?;
            f_divergence(&a, &b, &f)?
        }
        "renyi" => {
            let alpha = *params
                .get("alpha")
                .ok_or_else(|| anyhow!("renyi needs :alpha=..."))?;
            renyi(&a, &b, alpha)?
        }
        "relative_entropy" => relative_entropy(&a, &b)?,
        "chernoff" => {
            let c = chernoff_distance(&a, &b)?;
            alpha_star = Some(c.alpha_star);
            minimizer = Some(c.minimizer.clone());
            c.value
        }
        "hoeffding" => {
            let rate = *params
                .get("r")
                .ok_or_else(|| anyhow!("hoeffding needs :r=..."))?;
            let h = hoeffding_distance(&a, &b, rate)?;
            alpha_star = h.alpha_star;
            h.value
        }
        "t_p" => {
            let p = *params.get("p").ok_or_else(|| anyhow!("t_p needs :p=..."))?;
            bayes_measure_tp(&a, &b, p)?
        }
        "fidelity" => ExtReal::Finite(fidelity(&a, &b)?),
        other => bail!("unknown measure {other:?}"),
    };

    let report = DivergenceReport {
        measure: args.measure.clone(),
        value,
        alpha_star,
        minimizer,
        note: support_note(&a, &b),
        seed: args.seed,
        tolerance: args.tol,
    };
    let content = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report)? + "\n",
        "csv" => format!("measure,value\n{},{}\n", report.measure, report.value),
        other => bail!("unknown format {other:?}"),
    };
    emit(args.out.as_ref(), &content)
}

fn run_check(args: &CheckArgs) -> Result<i32> {
    let phi = load_channel(&args.channel)?;
    let f = load_function(args.function.as_deref())?;

    let write_failure = |reason: String, out: Option<&PathBuf>, seed: u64| -> Result<i32> {
        let report = CheckFailure {
            kind: "check",
            seed,
            verdict: Verdict::Inconclusive,
            reason,
        };
        emit(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        Ok(2)
    };

    if let Some(pair) = &args.pair {
        let a = load_operator(&pair[0])?;
        let b = load_operator(&pair[1])?;
        let opts = EqualityOptions {
            tol: args.tol,
            ..Default::default()
        };
        match equality_report(&phi, &a, &b, &f, &opts) {
            Ok(report) => {
                let code = report.verdict.exit_code();
                let envelope = CheckEnvelope {
                    kind: "equality",
                    seed: args.seed,
                    verdict: report.verdict,
                    report,
                };
                emit(
                    args.out.as_ref(),
                    &(serde_json::to_string_pretty(&envelope)? + "\n"),
                )?;
                Ok(code)
            }
            Err(e @ (qfdiv::Error::SupportViolation(_) | qfdiv::Error::TraceViolation(_))) => {
                write_failure(
                    format!("hypothesis violated: {e}"),
                    args.out.as_ref(),
                    args.seed,
                )
            }
            Err(e) => Err(e.into()),
        }
    } else if let Some(states) = &args.states {
        let sigma_path = args
            .sigma
            .as_ref()
            .ok_or_else(|| anyhow!("--states requires --sigma"))?;
        let sigma = load_operator(sigma_path)?;
        let code_states: Vec<P> = states
            .iter()
            .map(|p| load_operator(p))
            .collect::<Result<_>>()?;
        let r_grid = [0.01, 0.05, 0.2];
        match error_correction_check(
            &phi,
            &code_states,
            &sigma,
            &f,
            &[],
            &r_grid,
            args.tol,
            args.seed,
        ) {
            Ok(report) => {
                let verdict = if report.correctable {
                    Verdict::Reversible
                } else {
                    Verdict::NotReversible
                };
                let code = verdict.exit_code();
                let envelope = CheckEnvelope {
                    kind: "error_correction",
                    seed: args.seed,
                    verdict,
                    report,
                };
                emit(
                    args.out.as_ref(),
                    &(serde_json::to_string_pretty(&envelope)? + "\n"),
                )?;
                Ok(code)
            }
            Err(e @ (qfdiv::Error::SupportViolation(_) | qfdiv::Error::TraceViolation(_))) => {
                write_failure(
                    format!("hypothesis violated: {e}"),
                    args.out.as_ref(),
                    args.seed,
                )
            }
            Err(e) => Err(e.into()),
        }
    } else {
        bail!("check needs either --pair A B or --states ... --sigma S");
    }
}

fn run_experiment(args: &ExperimentArgs) -> Result<()> {
    let csv = match args.name.as_str() {
        "exponent_trend" => {
            let pair = args
                .pair
                .as_ref()
                .ok_or_else(|| anyhow!("exponent_trend needs --pair RHO SIGMA"))?;
            let rho = load_operator(&pair[0])?;
            let sigma = load_operator(&pair[1])?;
            let seq = exponent_trend(&rho, &sigma, args.prior, args.n_max, args.cap)?;
            let mut csv = String::from("n,rate,gap\n");
            for pt in seq {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    pt.n,
                    pt.rate.to_f64_lossy(),
                    pt.gap.map(|g| g.to_string()).unwrap_or_default()
                ));
            }
            csv
        }
        "quadrature_conformance" => {
            type Case = (RepresentingMeasure<f64>, fn(f64) -> f64, &'static str);
            let cases: Vec<Case> = vec![
                (
                    RepresentingMeasure::canonical(CanonicalFunction::XLogX)?,
                    |x| x * x.ln(),
                    "x_log_x",
                ),
                (
                    RepresentingMeasure::canonical(CanonicalFunction::NegPower(0.5))?,
                    |x| -x.sqrt(),
                    "-x^0.5",
                ),
                (
                    RepresentingMeasure::canonical(CanonicalFunction::Power(1.5))?,
                    |x| x.powf(1.5),
                    "x^1.5",
                ),
            ];
            let mut csv = String::from("function,x,value,closed_form,abs_err\n");
            for (rep, closed, name) in &cases {
                let mut x = 1e-3;
                while x <= 1e3 * (1.0 + 1e-9) {
                    let v = rep.eval(x)?;
                    let c = closed(x);
                    csv.push_str(&format!("{name},{x},{v},{c},{}\n", (v - c).abs()));
                    x *= 10f64.powf(0.25);
                }
            }
            csv
        }
        "tomiyama_sweep" => {
            let kind = match args.map_kind.as_str() {
                "phi" => TomiyamaKind::Phi,
                "psi" => TomiyamaKind::Psi,
                "lambda" => TomiyamaKind::Lambda,
                other => bail!("unknown map kind {other:?}"),
            };
            let d = args.dim;
            if d < 2 {
                bail!("tomiyama_sweep needs --dim >= 2");
            }
            let lo = args.eps_min.unwrap_or(-0.05);
            let hi = args
                .eps_max
                .unwrap_or(1.0 + 1.0 / (d as f64 - 1.0) + 0.05);
            if args.step <= 0.0 {
                bail!("--step must be positive");
            }
            let mut csv = String::from("eps,choi_min_eigenvalue,completely_positive\n");
            let mut eps = lo;
            while eps <= hi + args.step / 2.0 {
                let c = tomiyama_map::<f64>(kind, eps, d)?;
                let min_eig = c.choi_min_eigenvalue();
                csv.push_str(&format!("{eps},{min_eig},{}\n", min_eig >= -1e-12));
                eps += args.step;
            }
            csv
        }
        other => bail!("unknown experiment {other:?} (want exponent_trend, quadrature_conformance or tomiyama_sweep)"),
    };
    emit(args.out.as_ref(), &csv)
}
