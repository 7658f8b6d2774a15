use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccd_core::case_study::{bundled, case39, Case39Report};
use ccd_core::diagnostics::{has_errors, Code, Diagnostic};
use ccd_core::dsl::{self, pretty_print, validate_with_cap, Model};
use ccd_core::engine::{evaluate, saidi_routes, Evaluation, Method, SaidiRoutes};
use ccd_core::error::Error;
use ccd_core::montecarlo::{ttf_ttr_study, RenewalEstimate, RepairMode, DEFAULT_SAMPLES, DEFAULT_SEED, PRNG};
use ccd_core::oracle::cap_from_env;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod report;

use report::RunReport;

const EXIT_VALIDATION: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "ccd", version, about = "Cause-consequence diagram reliability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability of a consequence, path, fault tree or event.
    Eval(EvalArgs),
    /// Drop irrelevant decision boxes and write the minimal model.
    Reduce(ReduceArgs),
    /// Parse and validate a model.
    Check(CheckArgs),
    /// Monte-Carlo estimate of a target, or the TTF/TTR renewal study.
    Mcs(McsArgs),
    /// SAIDI of a model's loads by every route.
    Saidi(SaidiArgs),
    /// The 39-bus case study with reference values.
    Case39(Case39Args),
}

#[derive(Args)]
struct Common {
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Oracle,
    Mcs,
}

#[derive(Args)]
struct EvalArgs {
    model: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    /// Mission time in years; defaults to the model's mission line.
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReduceArgs {
    model: PathBuf,
    /// Write the reduced model here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    model: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepairModeArg {
    Verbatim,
    MeanRepairTime,
}

#[derive(Args)]
struct McsArgs {
    /// Model file; not needed for the renewal study.
    model: Option<PathBuf>,
    #[arg(long, required_unless_present = "lambda")]
    target: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    /// Failure rate per hour; selects the TTF/TTR renewal study.
    #[arg(long, requires_all = ["repair", "horizon"])]
    lambda: Option<f64>,
    /// Repair parameter for the renewal study.
    #[arg(long)]
    repair: Option<f64>,
    /// Simulated time span in hours.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_enum, default_value = "verbatim")]
    repair_mode: RepairModeArg,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SaidiArgs {
    model: PathBuf,
    #[arg(long)]
    t: Option<f64>,
    /// Skip the sampled route.
    #[arg(long)]
    no_mcs: bool,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Case39Args {
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    common: Common,
}

/// A failed run: exit code plus what to tell the user.
struct Failure {
    code: u8,
    diags: Vec<Diagnostic>,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, diags: vec![Diagnostic::error(Code::Usage, msg)] }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, diag) = match &e {
            Error::CapExceeded { .. }
            | Error::SharedLeaf(_)
            | Error::SharedLeafAcrossBoxes { .. }
            | Error::NotDisjoint(_)
            | Error::NotIndependent
            | Error::DuplicatePath(_)
            | Error::EmptyPath(_) => (EXIT_INFEASIBLE, Code::Infeasible),
            Error::UnknownTarget(_) | Error::InvalidArgument(_) | Error::NegativeTime(_) | Error::NonPositiveRate(_) => {
                (EXIT_PARSE, Code::Usage)
            }
            _ => (EXIT_VALIDATION, Code::InvalidValue),
        };
        Self { code, diags: vec![Diagnostic::error(diag, e.to_string())] }
    }
}

struct Loaded {
    model: Model,
    source: String,
    diags: Vec<Diagnostic>,
}

/// Reads, parses and validates; falls back to a bundled model when the
/// path does not exist but names one (`mcc.ccd`, `ieee39.ccd`, ...).
fn load(path: &Path, cap: usize) -> Result<Loaded, Failure> {
    let (text, source) = match std::fs::read(path) {
        Ok(bytes) => (bytes, path.display().to_string()),
        Err(e) => {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            match bundled(name) {
                Some(text) if !path.exists() => (text.as_bytes().to_vec(), format!("<bundled {name}>")),
                _ => return Err(Failure::usage(format!("cannot read {}: {e}", path.display()))),
            }
        }
    };
    let model = dsl::parse_bytes(&text).map_err(|diags| Failure { code: EXIT_PARSE, diags })?;
    let diags = validate_with_cap(&model, cap);
    if has_errors(&diags) {
        return Err(Failure { code: EXIT_VALIDATION, diags });
    }
    Ok(Loaded { model, source, diags })
}

fn mission(t: Option<f64>, model: &Model) -> Result<f64, Failure> {
    let t = t.unwrap_or_else(|| model.mission_years());
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Failure::usage(format!("mission time must be non-negative, got {t}")));
    }
    Ok(t)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// The report is returned either way; on failure its results are cleared
/// and the failure diagnostics appended.
fn run(cli: Cli) -> (RunReport, Result<String, Failure>) {
    let name = match &cli.command {
        Command::Eval(_) => "eval",
        Command::Reduce(_) => "reduce",
        Command::Check(_) => "check",
        Command::Mcs(_) => "mcs",
        Command::Saidi(_) => "saidi",
        Command::Case39(_) => "case39",
    };
    let mut report = RunReport::new(name);
    let res = (|| -> Result<String, Failure> {
        let cap = cap_from_env().map_err(Failure::from)?;
        match &cli.command {
            Command::Eval(a) => {
                let method = match a.method {
                    MethodArg::Closed => Method::Closed,
                    MethodArg::Oracle => Method::Oracle,
                    MethodArg::Mcs => Method::Mcs { samples: a.sampling.samples, seed: a.sampling.seed },
                };
                eval_cmd(&mut report, &a.model, &a.target, method, a.t, cap)
            }
            Command::Reduce(a) => reduce_cmd(&mut report, a, cap),
            Command::Check(a) => {
                let l = load(&a.model, cap)?;
                report.model = Some(l.model.name.clone());
                report.diagnostics = l.diags.clone();
                report.results = json!({ "errors": 0, "diagnostics": l.diags.len() });
                Ok(format!("{}: ok ({} diagnostics)\n", l.source, l.diags.len()))
            }
            Command::Mcs(a) => match a.lambda {
                Some(lambda) => renewal_cmd(&mut report, a, lambda),
                None => {
                    let model = a.model.as_deref().ok_or_else(|| Failure::usage("mcs needs a model file"))?;
                    let target = a.target.as_deref().unwrap_or_default();
                    let method = Method::Mcs { samples: a.sampling.samples, seed: a.sampling.seed };
                    eval_cmd(&mut report, model, target, method, a.t, cap)
                }
            },
            Command::Saidi(a) => saidi_cmd(&mut report, a, cap),
            Command::Case39(a) => {
                if !(a.t >= 0.0 && a.t.is_finite()) {
                    return Err(Failure::usage(format!("mission time must be non-negative, got {}", a.t)));
                }
                report.model = Some("IEEE 39-bus".into());
                report.set_sampling("all", a.sampling.samples, a.sampling.seed);
                report.t_years = Some(a.t);
                let r = case39(a.t, a.sampling.samples, a.sampling.seed, cap)?;
                report.results = to_value(&r);
                Ok(case39_text(&r))
            }
        }
    })();
    if let Err(f) = &res {
        report.results = Value::Null;
        report.diagnostics.extend(f.diags.iter().cloned());
    }
    (report, res)
}

fn eval_cmd(
    report: &mut RunReport,
    path: &Path,
    target: &str,
    method: Method,
    t: Option<f64>,
    cap: usize,
) -> Result<String, Failure> {
    let l = load(path, cap)?;
    let t = mission(t, &l.model)?;
    report.model = Some(l.model.name.clone());
    report.t_years = Some(t);
    report.diagnostics = l.diags;
    match method {
        Method::Mcs { samples, seed } => report.set_sampling("mcs", samples, seed),
        _ => report.method = Some(method.name()),
    }
    let e = evaluate(&l.model, target, method, t, cap)?;
    report.results = json!([to_value(&e)]);
    Ok(eval_text(&e))
}

fn eval_text(e: &Evaluation) -> String {
    let mut s = format!("{} ({:?}, {}): {:.12}\n", e.target, e.kind, e.method, e.probability);
    if let Some(m) = &e.mcs {
        s += &format!(
            "  n={} seed={} stderr={:.3e} ci95=[{:.6}, {:.6}]\n",
            m.n, m.seed, m.stderr, m.ci95[0], m.ci95[1]
        );
    }
    if let Some(r) = &e.oracle {
        s += &format!("  oracle route: {r:?}\n");
    }
    s
}

fn reduce_cmd(report: &mut RunReport, a: &ReduceArgs, cap: usize) -> Result<String, Failure> {
    let l = load(&a.model, cap)?;
    report.model = Some(l.model.name.clone());
    let (reduced, summary) = l.model.reduce();
    let text = pretty_print(&reduced);
    let mut diags = l.diags;
    for p in &summary.removed_paths {
        diags.push(Diagnostic::warning(
            Code::AllSkipPath,
            format!("path `{p}` has only irrelevant boxes and was removed"),
        ));
    }
    report.diagnostics = diags;
    let mut out = String::new();
    for (p, b) in &summary.dropped {
        out += &format!("dropped box {b} from path {p}\n");
    }
    for p in &summary.removed_paths {
        out += &format!("removed path {p}\n");
    }
    out += &format!("{} boxes dropped, {} paths removed\n", summary.dropped.len(), summary.removed_paths.len());
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            report.results = json!({ "summary": to_value(&summary), "out": path.display().to_string() });
        }
        None => {
            report.results = json!({ "summary": to_value(&summary), "model": text });
            // Reduced model on stdout, summary on stderr so the text can be piped.
            eprint!("{out}");
            out = text;
        }
    }
    Ok(out)
}

fn renewal_cmd(report: &mut RunReport, a: &McsArgs, lambda: f64) -> Result<String, Failure> {
    let mode = match a.repair_mode {
        RepairModeArg::Verbatim => RepairMode::Verbatim,
        RepairModeArg::MeanRepairTime => RepairMode::MeanRepairTime,
    };
    let (repair, horizon) = (a.repair.unwrap_or_default(), a.horizon.unwrap_or_default());
    let r: RenewalEstimate = ttf_ttr_study(lambda, repair, horizon, a.sampling.seed, mode)?;
    // One TTF draw per failure plus the final one that runs past the horizon.
    report.set_sampling("mcs", r.failures as usize + 1, a.sampling.seed);
    report.results = json!({ "renewal": to_value(&r), "lambda": lambda, "repair": repair });
    Ok(format!(
        "unavailability {:.6} over {} h ({} failures, seed {}, repair mode {:?})\n",
        r.unavailability, r.horizon_hours, r.failures, r.seed, r.repair_mode
    ))
}

fn saidi_cmd(report: &mut RunReport, a: &SaidiArgs, cap: usize) -> Result<String, Failure> {
    let l = load(&a.model, cap)?;
    let t = mission(a.t, &l.model)?;
    report.model = Some(l.model.name.clone());
    report.t_years = Some(t);
    report.diagnostics = l.diags;
    let mcs = (!a.no_mcs).then_some((a.sampling.samples, a.sampling.seed));
    match mcs {
        Some((n, seed)) => report.set_sampling("all", n, seed),
        None => report.method = Some("all"),
    }
    let r = saidi_routes(&l.model, t, cap, mcs)?;
    report.results = to_value(&r);
    Ok(saidi_text(&r))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.8}"))
}

fn saidi_text(r: &SaidiRoutes) -> String {
    let mut s = format!("t = {} years\n", r.t_years);
    s += &format!("{:<8} {:>12} {:>12} {:>12} {:>12}\n", "load", "closed", "oracle", "exactly-one", "mcs");
    for row in &r.loads {
        s += &format!(
            "{:<8} {:>12.8} {:>12.8} {:>12} {:>12}\n",
            row.label,
            row.closed,
            row.oracle,
            opt(row.exactly_one),
            opt(row.mcs.as_ref().map(|m| m.mean))
        );
    }
    s += &format!(
        "{:<8} {:>12.8} {:>12.8} {:>12} {:>12}   hours/customer\n",
        "SAIDI",
        r.closed.saidi_hours,
        r.oracle,
        opt(r.exactly_one),
        opt(r.mcs)
    );
    s
}

fn case39_text(r: &Case39Report) -> String {
    let mut s = format!("IEEE 39-bus study, t = {} years, n = {}, seed = {}\n\n", r.t_years, r.samples, r.seed);
    s += &format!(
        "{:<10} {:>12} {:>12} {:>12} {:>10} {:>12} {:>12}\n",
        "index", "closed", "oracle", "mcs", "stderr", "reference", "ref. mcs"
    );
    for row in [&r.for_pv, &r.for_steam] {
        s += &format!(
            "{:<10} {:>12.8} {:>12.8} {:>12.8} {:>10.2e} {:>12.8} {:>12.8}\n",
            row.name, row.closed, row.oracle, row.mcs.mean, row.mcs.stderr, row.reference, row.mcs_reference
        );
    }
    s += &format!(
        "{:<10} {:>12.8} {:>12.8} {:>12.8} {:>10} {:>12.8} {:>12.8}\n",
        "SAIDI", r.saidi.closed, r.saidi.oracle, r.saidi.mcs, "", r.saidi.reference, r.saidi.mcs_reference
    );
    s += &format!("SAIDI by exactly-one formula: {:.8}\n\n", r.saidi.exactly_one);
    s += &format!("{:<6} {:>12} {:>12} {:>12} {:>12}\n", "load", "closed", "oracle", "exactly-one", "mcs");
    for row in &r.loads {
        s += &format!(
            "{:<6} {:>12.8} {:>12.8} {:>12} {:>12}\n",
            row.label,
            row.closed,
            row.oracle,
            opt(row.exactly_one),
            opt(row.mcs.as_ref().map(|m| m.mean))
        );
    }
    s += &format!("\nPRNG: {PRNG}\n");
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = match &cli.command {
        Command::Eval(a) => a.common.json,
        Command::Reduce(a) => a.common.json,
        Command::Check(a) => a.common.json,
        Command::Mcs(a) => a.common.json,
        Command::Saidi(a) => a.common.json,
        Command::Case39(a) => a.common.json,
    };
    let (report, res) = run(cli);
    match res {
        Ok(text) => {
            if json_mode {
                println!("{}", report.to_json());
            } else {
                for d in &report.diagnostics {
                    eprintln!("{d}");
                }
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            if json_mode {
                println!("{}", report.to_json());
            }
            for d in &failure.diags {
                eprintln!("{d}");
            }
            ExitCode::from(failure.code)
        }
    }
}
