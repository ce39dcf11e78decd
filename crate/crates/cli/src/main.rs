use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use volsamp::config::{
    ConfigFile, DesignArgs, ExperimentArgs, SchemeName, DEFAULT_REPETITIONS, DEFAULT_SEED,
    DEFAULT_T_GRID,
};
use volsamp::experiment::{
    default_k_grid, run_bias_experiment, run_loss_experiment, sample_and_fit,
};
use volsamp::output::{join, open_output, write_csv, write_metadata};
use volsamp::suite::run_verify;
use volsamp::{CliError, Result, BUILD_ID};
use volsamp_core::leverage::exact_scores;
use volsamp_core::rng::derive_rng;
use volsamp_core::verify::Faults;

#[derive(Parser)]
#[command(name = "volsamp", version = BUILD_ID, about = "Volume-rescaled sampling experiments and checks")]
struct Cli {
    /// Master seed; every repetition derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample and print its rows.
    Sample(SampleArgs),
    /// Draw one sample and print the fitted weights and loss.
    Estimate(SampleArgs),
    /// Error of averaged estimators against the number averaged.
    BiasExp(ExperimentArgs),
    /// Loss of subsampled estimators against the sample size.
    LossExp(ExperimentArgs),
    /// Run the Monte Carlo verification checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, value_enum, default_value_t = SchemeName::Volume)]
    scheme: SchemeName,
    /// Sample size (default: d).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Fault {
    AdjugateSign,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only checks whose name contains this string.
    pattern: Option<String>,
    /// Multiplier on every check's trial count.
    #[arg(long, default_value_t = 1.0)]
    budget_scale: f64,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let out = cli.out.clone().or(file.out.clone());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads.or(file.threads) {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Sample(a) => sample(a, file.design(), seed, out, false),
        Command::Estimate(a) => sample(a, file.design(), seed, out, true),
        Command::BiasExp(a) => bias(a.merged(file.experiment()), seed, out),
        Command::LossExp(a) => loss(a.merged(file.experiment()), seed, out),
        Command::Verify(a) => verify(a, seed, out),
    })
}

fn base_meta(command: &str, seed: u64, design: String) -> Vec<(&'static str, String)> {
    vec![
        ("volsamp", command.to_string()),
        ("build", BUILD_ID.to_string()),
        ("seed", seed.to_string()),
        ("design", design),
    ]
}

fn sample(
    a: SampleArgs,
    file: DesignArgs,
    seed: u64,
    out: Option<PathBuf>,
    estimate: bool,
) -> Result<u8> {
    let (design, desc) = a.design.merged(file).build(seed)?;
    let d = design.dim();
    let k = a.k.unwrap_or(d);
    let profile = match design.finite() {
        Some(fd) if matches!(a.scheme, SchemeName::Lev | SchemeName::LeveragedVolume) => {
            Some(exact_scores(fd)?)
        }
        _ => None,
    };
    let (mut rng, _) = derive_rng(seed, a.scheme.as_str(), k as u64);
    let (batch, fit) = sample_and_fit(&design, profile.as_ref(), a.scheme, k, &mut rng)?;
    let mut meta = base_meta(if estimate { "estimate" } else { "sample" }, seed, desc);
    meta.push(("scheme", a.scheme.to_string()));
    meta.push(("k", k.to_string()));
    let mut w = open_output(out.as_deref())?;
    write_metadata(&mut w, &meta)?;
    let mut csv = csv::Writer::from_writer(w);
    let xs = (1..=d).map(|j| format!("x{j}"));
    if estimate {
        let ws = (1..=d).map(|j| format!("w{j}"));
        let header = ["scheme".to_string(), "k".into()]
            .into_iter()
            .chain(ws)
            .chain(["loss".into(), "loss_opt".into()]);
        csv.write_record(header)?;
        let opt = design
            .oracle()
            .optimum()
            .and_then(|w| design.oracle().loss(&w));
        let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let record = [a.scheme.to_string(), k.to_string()]
            .into_iter()
            .chain(fit.w.iter().map(f64::to_string))
            .chain([cell(fit.loss), cell(opt)]);
        csv.write_record(record)?;
    } else {
        let header = ["row".to_string(), "atom".into(), "leverage".into()]
            .into_iter()
            .chain(xs)
            .chain(["y".into()]);
        csv.write_record(header)?;
        for i in 0..batch.k() {
            let atom = batch
                .indices
                .as_ref()
                .and_then(|v| v[i])
                .map(|a| a.to_string());
            let lev = batch.leverages.as_ref().map(|l| l[i].to_string());
            let y = batch.y.as_ref().map(|y| y[i].to_string());
            let record = [
                i.to_string(),
                atom.unwrap_or_default(),
                lev.unwrap_or_default(),
            ]
            .into_iter()
            .chain(batch.x.row(i).iter().map(f64::to_string))
            .chain([y.unwrap_or_default()]);
            csv.write_record(record)?;
        }
    }
    csv.flush()?;
    Ok(0)
}

fn bias(a: ExperimentArgs, seed: u64, out: Option<PathBuf>) -> Result<u8> {
    let (design, desc) = a.design.build(seed)?;
    let d = design.dim();
    let schemes = a
        .schemes
        .unwrap_or_else(|| vec![SchemeName::Iid, SchemeName::IidVsD]);
    let k_grid = a.k_grid.unwrap_or_else(|| default_k_grid(d));
    let t_grid = a.t_grid.unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
    let reps = a.repetitions.unwrap_or(DEFAULT_REPETITIONS);
    let rows = run_bias_experiment(&design, &schemes, &k_grid, &t_grid, reps, seed)?;
    let mut meta = base_meta("bias-exp", seed, desc);
    meta.extend([
        ("schemes", join(&schemes)),
        ("k_grid", join(&k_grid)),
        ("t_grid", join(&t_grid)),
        ("repetitions", reps.to_string()),
    ]);
    write_csv(open_output(out.as_deref())?, &meta, &rows)?;
    Ok(0)
}

fn loss(a: ExperimentArgs, seed: u64, out: Option<PathBuf>) -> Result<u8> {
    let (design, desc) = a.design.build(seed)?;
    let d = design.dim();
    let schemes = a.schemes.unwrap_or_else(|| {
        vec![
            SchemeName::Volume,
            SchemeName::Lev,
            SchemeName::LeveragedVolume,
        ]
    });
    let k_grid = a.k_grid.unwrap_or_else(|| default_k_grid(d));
    let reps = a.repetitions.unwrap_or(DEFAULT_REPETITIONS);
    if a.t_grid.is_some() {
        log::warn!("--t-grid is ignored by loss-exp");
    }
    let rows = run_loss_experiment(&design, &schemes, &k_grid, reps, seed)?;
    let mut meta = base_meta("loss-exp", seed, desc);
    meta.extend([
        ("schemes", join(&schemes)),
        ("k_grid", join(&k_grid)),
        ("repetitions", reps.to_string()),
    ]);
    write_csv(open_output(out.as_deref())?, &meta, &rows)?;
    Ok(0)
}

fn verify(a: VerifyArgs, seed: u64, out: Option<PathBuf>) -> Result<u8> {
    let faults = Faults {
        adjugate_sign: matches!(a.inject_fault, Some(Fault::AdjugateSign)),
    };
    let outcome = run_verify(
        a.pattern.as_deref(),
        a.budget_scale,
        seed,
        &faults,
        open_output(out.as_deref())?,
    )?;
    let failed: Vec<&str> = outcome
        .reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check.as_str())
        .collect();
    if !failed.is_empty() {
        eprintln!("failed checks: {}", failed.join(", "));
    }
    Ok(outcome.exit_code() as u8)
}
