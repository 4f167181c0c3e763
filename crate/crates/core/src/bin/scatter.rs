use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scatterlab::runner::{compare_runs, exit_code, run_scenario, validate_config, Status};

#[derive(Parser)]
#[command(name = "scatter", version, about = "Run scattering-lab scenarios from JSON configs")]
struct Cli {
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, global = true, env = "SCATTER_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its output directory.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Diff the metrics of two run directories.
    Compare { a: PathBuf, b: PathBuf },
    /// Parse and resolve a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    match cli.cmd {
        Cmd::Run { config, out, seed } => {
            let r = run_scenario(&config, &out, seed);
            match &r {
                Ok(o) => {
                    let s = &o.summary;
                    let tag = if s.status == Status::Pass { "PASS" } else { "FAIL" };
                    println!("{tag} {} -> {}", s.kind, o.dir.display());
                    for (k, v) in &s.metrics {
                        println!("  {k} = {v:.6e}");
                    }
                }
                Err(e) => eprintln!("error [{}]: {e}", e.code()),
            }
            ExitCode::from(exit_code(&r) as u8)
        }
        Cmd::Compare { a, b } => match compare_runs(&a, &b) {
            Ok(d) => {
                println!("{}", serde_json::to_string_pretty(&d).unwrap_or_default());
                if d.all_within() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error [{}]: {e}", e.code());
                ExitCode::from(1)
            }
        },
        Cmd::Validate { config } => match validate_config(&config) {
            Ok(c) => {
                println!("ok: {} pipeline", c.pipeline.name());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error [{}]: {e}", e.code());
                ExitCode::from(1)
            }
        },
    }
}
