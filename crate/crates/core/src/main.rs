use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tempofield::bench::records::{
    to_csv_string, write_table, LossRow, RunRow, LOSS_HEADER, RUNS_HEADER,
};
use tempofield::bench::{self, datasets, fixtures_check, report, IngestRequest, RunConfig};
use tempofield::eval::{evaluate_unit, train_unit, ExperimentConfig};
use tempofield::ingest::{Discretization, Layout};
use tempofield::models::{load_checkpoint, save_checkpoint, Arch};
use tempofield::{Dtdg, Result, Tau};

/// Dynamic link prediction benchmark with temporal receptive field sweeps.
#[derive(Parser)]
#[command(name = "tempofield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and discretize a raw edge list into a dataset cache.
    Ingest {
        input: PathBuf,
        /// Dataset name; registered names fix the expected statistics and rule.
        #[arg(long)]
        name: String,
        /// Column layout, e.g. "src dst [weight] time".
        #[arg(long, default_value = "src dst [weight] time")]
        format: String,
        /// "given" or "fixed:K"; defaults to the registered rule.
        #[arg(long)]
        rule: Option<String>,
        /// Cache path; defaults to $TEMPOFIELD_DATA_DIR/<name>.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report only, write nothing.
        #[arg(long)]
        dry_run: bool,
        /// Write the cache even if the registry check fails.
        #[arg(long)]
        force: bool,
    },
    /// Run (or resume) the receptive-field sweep of a run manifest.
    Sweep {
        config: PathBuf,
        /// Write per-unit (epoch, loss) curves under loss/.
        #[arg(long)]
        emit_loss: bool,
        /// Also render AP-vs-tau charts as SVG under plots/.
        #[arg(long)]
        plots: bool,
    },
    /// Train one unit and save its checkpoint.
    Train {
        #[command(flatten)]
        unit: UnitArgs,
        #[arg(long)]
        arch: Arch,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Write the (epoch, loss) curve to this file.
        #[arg(long)]
        emit_loss: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the test range; prints runs.csv rows.
    Eval {
        #[command(flatten)]
        unit: UnitArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Render the tables of a sweep output directory.
    Report {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Recompute published correlations and gains from the embedded cells.
    FixturesCheck,
}

#[derive(Args)]
struct UnitArgs {
    /// Run manifest supplying seed, split, model and training settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: String,
    /// Explicit cache file for the dataset.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    tau: Tau,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl UnitArgs {
    fn resolve(&self) -> Result<(Dtdg, ExperimentConfig)> {
        let cfg = match &self.config {
            Some(p) => Some(RunConfig::load(p)?),
            None => None,
        };
        let explicit = self.cache.clone().or_else(|| {
            cfg.as_ref()
                .and_then(|c| c.datasets.files.get(&self.dataset).cloned())
        });
        let max_nodes = cfg
            .as_ref()
            .and_then(|c| c.datasets.max_nodes.get(&self.dataset).copied());
        let loaded = datasets::load(
            &self.dataset,
            explicit.as_deref(),
            datasets::data_dir().as_deref(),
            max_nodes,
        )?;
        if let Some(n) = &loaded.note {
            eprintln!("warning: {n}");
        }
        Ok((
            loaded.dtdg,
            cfg.map_or_else(ExperimentConfig::default, |c| c.experiment()),
        ))
    }
}

fn ingest(
    input: PathBuf,
    name: String,
    format: &str,
    rule: Option<String>,
    out: Option<PathBuf>,
    dry_run: bool,
    force: bool,
) -> Result<i32> {
    let req = IngestRequest {
        input,
        name,
        layout: format.parse::<Layout>()?,
        rule: rule.map(|r| r.parse::<Discretization>()).transpose()?,
        out,
        dry_run,
        force,
    };
    let outcome = bench::ingest(&req)?;
    println!("{}", outcome.stats);
    if let Some(v) = &outcome.validation {
        if v.passed() {
            print!("{v}");
        } else {
            eprint!("{v}");
        }
    }
    match &outcome.written {
        Some(p) => println!("wrote {}", p.display()),
        None if req.dry_run => println!("dry run: nothing written"),
        None => eprintln!("validation failed: nothing written (use --force to keep it)"),
    }
    Ok(if outcome.passed() {
        bench::EXIT_OK
    } else {
        bench::EXIT_CONFIG
    })
}

fn sweep(config: &Path, emit_loss: bool, plots: bool) -> Result<i32> {
    let mut cfg = RunConfig::load(config)?;
    cfg.output.emit_loss |= emit_loss;
    cfg.output.plots |= plots;
    let run = bench::run_sweep(&cfg)?;
    println!(
        "{} units: {} run, {} resumed, {} failed; results in {}",
        run.units_total,
        run.units_run,
        run.units_resumed,
        run.failures.len(),
        run.out_dir.display()
    );
    for f in &run.failures {
        eprintln!(
            "failed: {} {} tau={} seed={}: {}",
            f.dataset, f.arch, f.tau, f.seed, f.error
        );
    }
    Ok(run.exit_code())
}

fn train(unit: &UnitArgs, arch: Arch, checkpoint: &Path, emit_loss: Option<&Path>) -> Result<i32> {
    let (dtdg, exp) = unit.resolve()?;
    let (model, curve) = train_unit(&dtdg, arch, unit.tau, unit.seed, &exp)?;
    save_checkpoint(&model, checkpoint)?;
    if let Some(path) = emit_loss {
        let rows: Vec<LossRow> = curve
            .iter()
            .enumerate()
            .map(|(epoch, &loss)| LossRow { epoch, loss })
            .collect();
        write_table(path, LOSS_HEADER, &rows)?;
    }
    match curve.last() {
        Some(l) => println!(
            "trained {arch} on {} for {} epochs, final loss {l:.6}",
            dtdg.name(),
            curve.len()
        ),
        None => println!("{arch} has no parameters; checkpoint holds its configuration only"),
    }
    Ok(bench::EXIT_OK)
}

fn eval(unit: &UnitArgs, checkpoint: &Path) -> Result<i32> {
    let (dtdg, exp) = unit.resolve()?;
    let model = load_checkpoint(checkpoint)?;
    let result = evaluate_unit(&model, &dtdg, unit.tau, unit.seed, &exp)?;
    print!(
        "{}",
        to_csv_string(RUNS_HEADER, &RunRow::from_eval(&result, 0))?
    );
    Ok(bench::EXIT_OK)
}

fn report(dir: &Path, json: bool) -> Result<i32> {
    let doc = report::load_report(dir)?;
    if json {
        print!("{}", report::render_json(&doc)?);
    } else {
        print!("{}", report::render_text(&doc));
    }
    Ok(bench::EXIT_OK)
}

fn fixtures() -> i32 {
    let checks = fixtures_check::run_checks();
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} of {} checks pass", checks.len() - failed, checks.len());
    if failed == 0 {
        bench::EXIT_OK
    } else {
        bench::EXIT_PARTIAL
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest {
            input,
            name,
            format,
            rule,
            out,
            dry_run,
            force,
        } => ingest(input, name, &format, rule, out, dry_run, force),
        Command::Sweep {
            config,
            emit_loss,
            plots,
        } => sweep(&config, emit_loss, plots),
        Command::Train {
            unit,
            arch,
            checkpoint,
            emit_loss,
        } => train(&unit, arch, &checkpoint, emit_loss.as_deref()),
        Command::Eval { unit, checkpoint } => eval(&unit, &checkpoint),
        Command::Report { dir, json } => report(&dir, json),
        Command::FixturesCheck => Ok(fixtures()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(bench::exit_code_for(&e) as u8)
        }
    }
}
