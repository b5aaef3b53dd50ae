use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rbm_cli::bench::{format_table, run_bench};
use rbm_cli::output::{resolved_header, run_id, write_run};
use rbm_cli::run::run_all;
use rbm_cli::{CliError, Resolved, Result, RunConfig};

#[derive(Parser)]
#[command(name = "rbm", version, about = "Random batch simulations and samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and print it with all defaults applied.
    Validate(Common),
    /// Run an experiment and write its artifacts to <out>/<run-id>/.
    Run(Common),
    /// Time the direct and random batch methods over `bench_sizes`.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output root directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of independent replicas.
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads for replicas (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<Resolved> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        cfg.resolve()
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(CliError::Invalid {
                    field: "--threads".into(),
                    message: "must be at least 1".into(),
                });
            }
            b = b.num_threads(t);
        }
        b.build().map_err(|e| CliError::Run(e.to_string()))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate(c) => {
            let cfg = c.load()?;
            print!("{}{}", resolved_header(&cfg), cfg.to_toml());
        }
        Command::Run(c) => {
            let cfg = c.load()?;
            let start = Instant::now();
            let results = c.pool()?.install(|| run_all(&cfg))?;
            let log = format!(
                "{} {} model={} method={} n={} p={} steps={} replicas={} seed={}\nwall time {:.3} s\n",
                rbm_cli::output::TOOL,
                rbm_cli::output::VERSION,
                cfg.model.name(),
                cfg.method.name(),
                cfg.n,
                cfg.p,
                cfg.steps,
                cfg.replicas,
                cfg.seed,
                start.elapsed().as_secs_f64()
            );
            let dir = write_run(&c.out, &run_id(&c.config, cfg.seed), &cfg, &results, &log)?;
            println!("{}", dir.display());
        }
        Command::Bench(c) => {
            let cfg = c.load()?;
            let rows = c.pool()?.install(|| run_bench(&cfg))?;
            print!("{}", format_table(&rows));
            let dir = c.out.join(run_id(&c.config, cfg.seed));
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io {
                path: dir.display().to_string(),
                message: e.to_string(),
            })?;
            let path = dir.join("bench.json");
            let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
            std::fs::write(&path, json + "\n").map_err(|e| CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
