//! `manymeans`: shrinkage estimation for many normal means from the
//! command line. Subcommands cover shrinking a file of estimates with
//! SURE-selected ridge/lasso/pretest rules, running the seeded
//! simulation study, exporting oracle risk surfaces, fitting the
//! nonparametric empirical-Bayes mixture, and cross-validated selection
//! on panel data. Every subcommand is deterministic given its flags and
//! seed; outputs are plain CSV for external plotting.

use clap::{Args, Parser, Subcommand};
use manymeans::estimators::Kind;
use manymeans::io as mio;
use manymeans::npeb::fit_em;
use manymeans::numerics::RegParam;
use manymeans::risk::{risk_surface, RiskCurve};
use manymeans::simulate::SimConfig;
use manymeans::sure::{select_sure, SureCriterion};
use manymeans::cv::{select_cv, CvCriterion};
use manymeans::{run_study, studentize, RawEstimates};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

/// A failure with the exit code it maps to. 2 = malformed input,
/// 3 = selector incompatible with the input shape, 4 = numeric failure.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        CliError { code: EXIT_MISMATCH, message: message.into() }
    }

    fn numeric(message: impl Into<String>) -> Self {
        CliError { code: EXIT_NUMERIC, message: message.into() }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(name = "manymeans", version, about = "Componentwise shrinkage for many normal means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shrink a file of estimates, selecting λ per estimator.
    Shrink(ShrinkArgs),
    /// Run the seeded simulation study and write the results table.
    Simulate(SimulateArgs),
    /// Export the oracle-minimal risk surface over a spike-normal grid.
    Surface(SurfaceArgs),
    /// Fit the nonparametric empirical-Bayes mixture to one sample.
    Npeb(NpebArgs),
    /// Select λ by cross-validation on replicate panel data.
    Cv(CvArgs),
}

#[derive(Args)]
struct ShrinkArgs {
    /// Estimates CSV with columns id,estimate,std_error
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    output: PathBuf,
    /// Comma-separated subset of ridge,lasso,pretest,npeb
    #[arg(long, default_value = "ridge,lasso,pretest")]
    estimators: String,
    /// sure | fixed (cv selectors need panel input; use the cv subcommand)
    #[arg(long, default_value = "sure")]
    selector: String,
    /// λ for --selector fixed; accepts a float or "inf"
    #[arg(long)]
    lambda: Option<String>,
    /// Grid points for the λ search
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    /// Comma-separated ids to drop before estimation
    #[arg(long, default_value = "")]
    exclude_ids: String,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON study configuration; defaults to the built-in grid
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    output: PathBuf,
    /// Override the number of replications
    #[arg(long)]
    reps: Option<usize>,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Output CSV path
    #[arg(long)]
    output: PathBuf,
    /// Comma-separated spike probabilities
    #[arg(long, default_value = "0,0.25,0.5,0.75,0.95")]
    p: String,
    /// Comma-separated slab means
    #[arg(long, default_value = "0,2,4")]
    mu0: String,
    /// Comma-separated slab standard deviations
    #[arg(long, default_value = "2,4,6")]
    sigma0: String,
}

#[derive(Args)]
struct NpebArgs {
    /// Estimates CSV with columns id,estimate,std_error
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    output: PathBuf,
    /// Mixture support grid size
    #[arg(long, default_value_t = 300)]
    grid: usize,
    /// Comma-separated ids to drop before estimation
    #[arg(long, default_value = "")]
    exclude_ids: String,
}

#[derive(Args)]
struct CvArgs {
    /// Panel CSV with columns id,rep,value
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    output: PathBuf,
    /// Comma-separated subset of ridge,lasso,pretest
    #[arg(long, default_value = "ridge,lasso,pretest")]
    estimators: String,
    /// cv-holdout | cv-loo
    #[arg(long, default_value = "cv-loo")]
    selector: String,
    /// Grid points for the λ search
    #[arg(long, default_value_t = 1001)]
    grid: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Shrink(a) => cmd_shrink(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Surface(a) => cmd_surface(&a),
        Command::Npeb(a) => cmd_npeb(&a),
        Command::Cv(a) => cmd_cv(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.12}")
    }
}

fn parse_kinds(spec: &str) -> Result<Vec<Kind>, CliError> {
    let mut kinds = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "npeb" {
            continue; // handled separately by the callers that allow it
        }
        kinds.push(name.parse::<Kind>().map_err(CliError::input)?);
    }
    Ok(kinds)
}

fn parse_floats(spec: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let vals = vals.map_err(|e| CliError::input(format!("--{flag}: {e}")))?;
    if vals.is_empty() {
        return Err(CliError::input(format!("--{flag} must list at least one value")));
    }
    Ok(vals)
}

fn parse_lambda(spec: &str) -> Result<RegParam, CliError> {
    let lambda = if spec.eq_ignore_ascii_case("inf") {
        f64::INFINITY
    } else {
        spec.parse::<f64>().map_err(|e| CliError::input(format!("--lambda: {e}")))?
    };
    if lambda.is_nan() || lambda < 0.0 {
        return Err(CliError::input(format!("--lambda must be in [0, inf], got {spec}")));
    }
    Ok(RegParam::from_lambda(lambda))
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn make_output_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult {
    fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// Load an estimates file and drop excluded ids.
fn load_estimates(path: &Path, exclude: &str) -> Result<RawEstimates, CliError> {
    let text = read_to_string(path)?;
    let raw = mio::read_estimates(text.as_bytes()).map_err(|e| CliError::input(e.to_string()))?;
    let excluded: Vec<&str> =
        exclude.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if excluded.is_empty() {
        return Ok(raw);
    }
    let mut ids = Vec::new();
    let mut estimates = Vec::new();
    let mut std_errors = Vec::new();
    for i in 0..raw.ids.len() {
        if !excluded.contains(&raw.ids[i].as_str()) {
            ids.push(raw.ids[i].clone());
            estimates.push(raw.estimates[i]);
            std_errors.push(raw.std_errors[i]);
        }
    }
    if ids.is_empty() {
        return Err(CliError::input("--exclude-ids removed every row"));
    }
    RawEstimates::new(ids, estimates, std_errors).map_err(|e| CliError::input(e.to_string()))
}

fn cmd_shrink(args: &ShrinkArgs) -> CliResult {
    match args.selector.as_str() {
        "sure" | "fixed" => {}
        "cv-holdout" | "cv-loo" => {
            return Err(CliError::mismatch(
                "cross-validation needs replicate panel input; use the cv subcommand",
            ));
        }
        other => return Err(CliError::input(format!("unknown selector: {other}"))),
    }
    let fixed = if args.selector == "fixed" {
        let spec = args
            .lambda
            .as_deref()
            .ok_or_else(|| CliError::input("--selector fixed requires --lambda"))?;
        Some(parse_lambda(spec)?)
    } else {
        None
    };

    let kinds = parse_kinds(&args.estimators)?;
    let want_npeb = args.estimators.split(',').any(|s| s.trim() == "npeb");
    if kinds.is_empty() && !want_npeb {
        return Err(CliError::input("--estimators must name at least one estimator"));
    }
    let raw = load_estimates(&args.input, &args.exclude_ids)?;
    let (sample, scale) = studentize(&raw);
    make_output_dir(&args.output)?;

    // per-estimator λ̂ and criterion value; SURE curves for export
    let mut rows: Vec<(String, RegParam, f64)> = Vec::new();
    let mut curves: Vec<RiskCurve> = Vec::new();
    let mut estimates: Vec<(String, Vec<f64>)> = Vec::new();
    for &kind in &kinds {
        let criterion = SureCriterion::new(kind, sample.clone())
            .map_err(|e| CliError::numeric(e.to_string()))?;
        let (lambda, value) = match fixed {
            Some(l) => (l, manymeans::sure::sure_value(&criterion, l)),
            None => {
                let (l, v, curve) = select_sure(&criterion)
                    .map_err(|e| CliError::numeric(e.to_string()))?;
                curves.push(curve);
                (l, v)
            }
        };
        rows.push((kind.label().to_string(), lambda, value));
        estimates
            .push((kind.label().to_string(), sample.values().iter().map(|&x| kind.m(x, lambda)).collect()));
    }
    if want_npeb {
        let fit = fit_em(&sample, args.grid.max(2), 2000, 1e-8);
        rows.push(("npeb".to_string(), RegParam::ZERO, f64::NAN));
        estimates.push((
            "npeb".to_string(),
            sample.values().iter().map(|&x| fit.mixture.posterior_mean(x)).collect(),
        ));
    }

    // `best` is the estimator with the minimal criterion value; NPEB has
    // no comparable criterion and never competes
    let best = rows
        .iter()
        .filter(|r| r.2.is_finite())
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .map(|r| r.0.clone())
        .unwrap_or_default();

    let mut summary = String::from("estimator,lambda,t,criterion,best\n");
    for (name, lambda, value) in &rows {
        summary.push_str(&format!(
            "{name},{},{},{},{}\n",
            fmt(lambda.lambda()),
            fmt(lambda.t()),
            fmt(*value),
            *name == best
        ));
    }
    write_file(&args.output.join("summary.csv"), summary.as_bytes())?;

    // estimates in both studentized and original units
    let mut table = String::from("id,x,scale");
    for (name, _) in &estimates {
        table.push_str(&format!(",{name}_studentized,{name}"));
    }
    table.push('\n');
    for i in 0..raw.ids.len() {
        table.push_str(&format!("{},{},{}", raw.ids[i], fmt(sample.values()[i]), fmt(scale[i])));
        for (_, est) in &estimates {
            table.push_str(&format!(",{},{}", fmt(est[i]), fmt(est[i] * scale[i])));
        }
        table.push('\n');
    }
    write_file(&args.output.join("estimates.csv"), table.as_bytes())?;

    if !curves.is_empty() {
        let refs: Vec<&RiskCurve> = curves.iter().collect();
        let mut buf = Vec::new();
        mio::write_curve(&mut buf, &refs, "sure").map_err(|e| CliError::input(e.to_string()))?;
        write_file(&args.output.join("curves.csv"), &buf)?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = read_to_string(path)?;
            serde_json::from_str::<SimConfig>(&text)
                .map_err(|e| CliError::input(format!("bad config: {e}")))?
        }
        None => SimConfig::default_study(args.seed.unwrap_or(0)),
    };
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(CliError::input("--reps must be at least 1"));
        }
        cfg.reps = reps;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if cfg.dgps.is_empty() || cfg.ns.is_empty() || cfg.estimators.is_empty() || cfg.reps == 0 {
        return Err(CliError::input("config grids must be nonempty and reps >= 1"));
    }
    let result = run_study(&cfg).map_err(|e| CliError::numeric(e.to_string()))?;
    let mut buf = Vec::new();
    mio::write_sim_result(&mut buf, &result).map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.output, &buf)
}

fn cmd_surface(args: &SurfaceArgs) -> CliResult {
    let ps = parse_floats(&args.p, "p")?;
    let mu0s = parse_floats(&args.mu0, "mu0")?;
    let s0s = parse_floats(&args.sigma0, "sigma0")?;
    for &p in &ps {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::input(format!("--p values must lie in [0, 1], got {p}")));
        }
    }
    for &s0 in &s0s {
        if s0 < 0.0 {
            return Err(CliError::input(format!("--sigma0 must be nonnegative, got {s0}")));
        }
    }
    let mut grid = Vec::new();
    for &p in &ps {
        for &mu0 in &mu0s {
            for &s0 in &s0s {
                grid.push(manymeans::SpikeNormal::new(p, mu0, s0, 1.0));
            }
        }
    }
    let surface = risk_surface(&grid).map_err(|e| CliError::numeric(e.to_string()))?;
    let mut buf = Vec::new();
    mio::write_surface(&mut buf, &surface).map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.output, &buf)
}

fn cmd_npeb(args: &NpebArgs) -> CliResult {
    if args.grid < 2 {
        return Err(CliError::input("--grid must be at least 2"));
    }
    let raw = load_estimates(&args.input, &args.exclude_ids)?;
    let (sample, scale) = studentize(&raw);
    make_output_dir(&args.output)?;
    let fit = fit_em(&sample, args.grid, 2000, 1e-8);

    let mut buf = Vec::new();
    mio::write_mixture(&mut buf, &fit.mixture).map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.output.join("mixture.csv"), &buf)?;

    let mut buf = Vec::new();
    mio::write_shrinkage_grid(&mut buf, &fit.mixture)
        .map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.output.join("shrinkage.csv"), &buf)?;

    let mut table = String::from("id,x,scale,npeb_studentized,npeb\n");
    for i in 0..raw.ids.len() {
        let m = fit.mixture.posterior_mean(sample.values()[i]);
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            raw.ids[i],
            fmt(sample.values()[i]),
            fmt(scale[i]),
            fmt(m),
            fmt(m * scale[i])
        ));
    }
    write_file(&args.output.join("estimates.csv"), table.as_bytes())
}

fn cmd_cv(args: &CvArgs) -> CliResult {
    let criterion = match args.selector.as_str() {
        "cv-holdout" => CvCriterion::Holdout,
        "cv-loo" => CvCriterion::LeaveOneOut,
        "sure" | "fixed" => {
            return Err(CliError::mismatch(
                "the cv subcommand selects by cross-validation; use shrink for sure/fixed",
            ));
        }
        other => return Err(CliError::input(format!("unknown selector: {other}"))),
    };
    let kinds = parse_kinds(&args.estimators)?;
    if kinds.is_empty() {
        return Err(CliError::input("--estimators must name at least one of ridge,lasso,pretest"));
    }
    let text = read_to_string(&args.input)?;
    let (panel, ids) = mio::read_panel(text.as_bytes()).map_err(|e| match e {
        manymeans::IngestError::Panel(inner) => CliError::mismatch(format!(
            "{inner}; cross-validation requires k >= 2 replicates per unit"
        )),
        other => CliError::input(other.to_string()),
    })?;
    make_output_dir(&args.output)?;

    // evaluate the criterion on a uniform t-grid for the curve export and
    // run the full selector per estimator
    let grid: Vec<RegParam> = (0..args.grid.max(2))
        .map(|i| RegParam::from_t(i as f64 / (args.grid.max(2) - 1) as f64))
        .collect();
    let mut summary = String::from("estimator,lambda,t\n");
    let mut curves = Vec::new();
    let mut all_estimates: Vec<(Kind, Vec<f64>)> = Vec::new();
    for &kind in &kinds {
        let (lambda, estimates) =
            select_cv(&panel, kind, criterion).map_err(|e| CliError::numeric(e.to_string()))?;
        summary.push_str(&format!("{},{},{}\n", kind.label(), fmt(lambda.lambda()), fmt(lambda.t())));
        let values: Vec<Vec<f64>> = grid
            .iter()
            .map(|&l| vec![manymeans::cv::cv_value(&panel, kind, criterion, l)])
            .collect();
        curves.push(RiskCurve {
            lambdas: grid.clone(),
            labels: vec![kind.label().to_string()],
            values,
        });
        all_estimates.push((kind, estimates));
    }
    write_file(&args.output.join("summary.csv"), summary.as_bytes())?;

    let refs: Vec<&RiskCurve> = curves.iter().collect();
    let mut buf = Vec::new();
    mio::write_curve(&mut buf, &refs, "cv").map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.output.join("curves.csv"), &buf)?;

    let mut table = String::from("id,mean");
    for (kind, _) in &all_estimates {
        table.push_str(&format!(",{}", kind.label()));
    }
    table.push('\n');
    let means = panel.unit_means();
    for (i, id) in ids.iter().enumerate() {
        table.push_str(&format!("{id},{}", fmt(means[i])));
        for (_, est) in &all_estimates {
            table.push_str(&format!(",{}", fmt(est[i])));
        }
        table.push('\n');
    }
    write_file(&args.output.join("estimates.csv"), table.as_bytes())
}
