use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use signet::dataset::{DatasetFormat, DatasetSpec};
use signet::experiment::{
    cmd_dataset_bootstrap, cmd_dataset_stats, cmd_simulate, cmd_steady_state, cmd_sweep, sweep_axes, ExperimentConfig,
    Overrides, PairStart,
};
use signet::Error;

/// `println!` that tolerates a closed stdout.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

/// Epidemic spreading coupled with structural balance on signed networks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write its time series.
    Simulate,
    /// Run an ensemble at every point of a parameter grid.
    Sweep,
    /// Solve the single-pair chain for its long-run marginals.
    SteadyState {
        /// Starting law: uniform or no-alert.
        #[arg(long, default_value = "uniform")]
        start: PairStart,
    },
    /// Inspect or sample a signed edge list.
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
}

#[derive(clap::Args)]
struct DatasetArgs {
    /// Edge-list file; defaults to the dataset in the config.
    #[arg(long)]
    input: Option<PathBuf>,
    /// snap, bitcoin or generic.
    #[arg(long)]
    format: Option<DatasetFormat>,
    /// Use only the largest connected component.
    #[arg(long)]
    largest_component: bool,
}

#[derive(Subcommand)]
enum DatasetAction {
    /// Node, link and triad counts.
    Stats {
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Draw connected subgraphs and save them as CSV edge lists.
    Bootstrap {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn dataset_spec(cfg: &ExperimentConfig, args: &DatasetArgs) -> Result<DatasetSpec, Error> {
    let from_cfg = cfg.dataset_spec();
    let path = args.input.clone().or_else(|| from_cfg.as_ref().map(|s| s.path.clone()));
    let format = args.format.or_else(|| from_cfg.as_ref().map(|s| s.format));
    match (path, format) {
        (Some(path), Some(format)) => Ok(DatasetSpec { path, format }),
        (None, _) => Err(Error::Config("no dataset given (--input or network.dataset in the config)".into())),
        (Some(_), None) => Err(Error::Config("dataset format missing (--format)".into())),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = ExperimentConfig::resolve(&cli.overrides)?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate => {
            let out = cmd_simulate(&cfg)?;
            let m = out.stats.steady_mean();
            say!(
                "{} run(s): s_inf={:.4} a_inf={:.4} rho_inf={:.4} r_inf={:.4} E={:.4}",
                out.stats.runs,
                m.s,
                m.a,
                m.rho,
                m.r,
                m.e_total
            );
            for f in out.files {
                say!("wrote {}", f.display());
            }
        }
        Command::Sweep => {
            let axes = sweep_axes(&cfg);
            eprintln!("sweep over {}: {} cells x {} runs", axes.names().join(" x "), axes.cells().len(), cfg.runs);
            let (_, path) = cmd_sweep(&cfg)?;
            say!("wrote {}", path.display());
        }
        Command::SteadyState { start } => {
            let out = cmd_steady_state(&cfg, start)?;
            say!("{}", out.report.trim_end());
            for f in out.files {
                say!("wrote {}", f.display());
            }
        }
        Command::Dataset { action } => match action {
            DatasetAction::Stats { data } => {
                let spec = dataset_spec(&cfg, &data)?;
                let out = cmd_dataset_stats(&cfg, &spec, data.largest_component)?;
                let (s, r) = (out.stats, out.report);
                say!(
                    "n={} m={} density={:.4}% triads={} (bound {:.0}) positive={:.4} balanced={:.4}",
                    s.n,
                    s.m,
                    100.0 * s.density,
                    s.triads,
                    s.triad_bound,
                    s.positive_fraction,
                    s.balanced_fraction
                );
                say!(
                    "records={} duplicates={} self_loops={} zero_weight={}",
                    r.records,
                    r.duplicates,
                    r.self_loops,
                    r.zero_weight
                );
                say!("wrote {}", out.path.display());
            }
            DatasetAction::Bootstrap { data, size, samples } => {
                let spec = dataset_spec(&cfg, &data)?;
                let out = cmd_dataset_bootstrap(&cfg, &spec, data.largest_component, size, samples)?;
                say!("{samples} samples of {size} nodes: mean density {:.4}%", 100.0 * out.mean_density);
                say!("wrote {} files to {}", out.files.len(), cfg.out.display());
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
