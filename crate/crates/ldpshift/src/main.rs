use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use ldpshift::config::{DatasetSource, ExperimentConfig};
use ldpshift::data;
use ldpshift::output::{Emitter, Line, Summary};
use ldpshift::runner;
use ldpshift_core::attacks::{Attack, SwRange};
use ldpshift_core::{BinSpec, Dataset, Protocol, RngStream, Setting};

#[derive(Parser)]
#[command(name = "ldpshift", version, about = "Poisoning attacks and detection for LDP distribution estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep attacked trials and report ASG/SGR per cell.
    Attack(SweepArgs),
    /// Half attacked, half clean trials with zero-shot and MUD detection.
    Detect(SweepArgs),
    /// Analytic against Monte-Carlo expected ASG of local hashing.
    Theory(TheoryArgs),
    /// Write a normalized Gaussian dataset.
    Synth(SynthArgs),
    /// Normalize a raw single-column file onto [0, 1].
    Ingest(IngestArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    protocol: Option<Vec<Protocol>>,
    #[arg(long, value_delimiter = ',')]
    setting: Option<Vec<Setting>>,
    /// baseline, crafted, oue-pad or sw-<range>.
    #[arg(long, value_delimiter = ',')]
    attack: Option<Vec<Attack>>,
    /// Range used by `crafted` on SW.
    #[arg(long)]
    sw_range: Option<SwRange>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    sw_bins: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// gaussian[:n[:mu:sigma]], flat[:n] or a file of normalized values.
    #[arg(long)]
    dataset: Option<DatasetSource>,
    #[arg(long)]
    olh_pool: Option<usize>,
    #[arg(long)]
    olh_range: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    detect_m: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$flag { c.$($field).+ = v.clone(); })*
            };
        }
        set!(
            protocol => protocols, setting => settings, attack => attacks, sw_range => sw_range,
            eps => eps, beta => beta, trials => trials, bins => bins, sw_bins => sw_bins,
            seed => seed, dataset => dataset, olh_pool => olh_pool, alpha => detect.alpha,
            detect_m => detect.m,
        );
        if self.olh_range.is_some() {
            c.olh_range = self.olh_range;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct TheoryArgs {
    /// olh or hst (HST uses g = 2).
    #[arg(long, default_value = "olh")]
    protocol: Protocol,
    #[arg(long, value_delimiter = ',', default_value = "user,server")]
    setting: Vec<Setting>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    g: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 32)]
    bins: usize,
    /// Users per simulated trial.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truth histogram source; uniform when absent.
    #[arg(long)]
    dataset: Option<DatasetSource>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// One value per line or a single-column CSV.
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sweep(args: &SweepArgs, detect: bool) -> Result<()> {
    let cfg = args.config()?;
    let data = data::load(&cfg.dataset, runner::dataset_seed(cfg.seed))?;
    log::info!("dataset {} with {} values, config {}", cfg.dataset, data.len(), cfg.hash());
    let records = if detect { runner::run_detect(&cfg, &data)? } else { runner::run_attack(&cfg, &data)? };
    let summary = Summary {
        command: if detect { "detect" } else { "attack" }.into(),
        config_hash: cfg.hash(),
        attack: (!detect).then(|| runner::summarize_attack(&records)),
        detect: if detect { Some(runner::summarize_detect(&records)?) } else { None },
        config: cfg,
    };
    let mut out = Emitter::open(args.out.as_deref())?;
    for r in records {
        out.emit(&Line::Trial(r))?;
    }
    out.emit(&Line::Summary(summary))?;
    out.finish()
}

fn theory(args: &TheoryArgs) -> Result<()> {
    let truth = match &args.dataset {
        Some(src) => data::load(src, runner::dataset_seed(args.seed))?.histogram(BinSpec::new(args.bins)?),
        None => runner::uniform_truth(args.bins)?,
    };
    let rows = runner::run_theory(
        args.protocol,
        &args.setting,
        &args.eps,
        &args.g,
        args.beta,
        &truth,
        args.n,
        args.trials,
        args.seed,
    )?;
    let mut out = Emitter::open(args.out.as_deref())?;
    for r in rows {
        out.emit(&Line::Theory(r))?;
    }
    out.finish()
}

fn write_dataset(values: &Dataset, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(p) => data::write_values(values.values(), std::fs::File::create(p)?)?,
        None => data::write_values(values.values(), std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Attack(a) => sweep(&a, false),
        Command::Detect(a) => sweep(&a, true),
        Command::Theory(a) => theory(&a),
        Command::Synth(a) => {
            if a.n == 0 {
                bail!("n must be at least 1");
            }
            let d = Dataset::gaussian(a.n, a.mu, a.sigma, &mut RngStream::new(a.seed))?;
            write_dataset(&d, a.out.as_deref())
        }
        Command::Ingest(a) => {
            let d = data::ingest(&data::read_values(&a.input)?)?;
            log::info!("ingested {} values from {}", d.len(), a.input.display());
            write_dataset(&d, a.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
