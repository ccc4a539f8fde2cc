use clap::{Parser, Subcommand};
use ma_cli::pipelines::{self, exit_codes};
use ma_cli::{config, table};
use std::path::PathBuf;
use std::sync::atomic::{AtomicI32, Ordering};
use std::sync::Mutex;

#[derive(Parser)]
#[command(
    name = "ma",
    about = "Degenerate complex Monge-Ampere solver laboratory on the flat torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one or more experiment configs.
    Run {
        /// Config files; each run writes to its own output directory.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Independent configs are sharded across this many worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Merge the table rows of reports sharing a kind into one table.
    Table {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { configs, jobs } => run_many(&configs, jobs.max(1)),
        Command::Table {
            reports,
            format,
            out,
        } => match table::emit(&reports, &format, out.as_deref()) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("ma table: {e}");
                exit_codes::CONFIG
            }
        },
        Command::Validate { config } => match config::load(&config) {
            Ok(cfg) => {
                println!("ok: kind = {}, case_id = {}", cfg.kind.as_str(), cfg.case_id);
                0
            }
            Err(e) => {
                eprintln!("ma validate: {e}");
                exit_codes::CONFIG
            }
        },
    };
    std::process::exit(code);
}

fn run_one(path: &PathBuf) -> i32 {
    let cfg = match config::load(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("ma run {}: {e}", path.display());
            return exit_codes::CONFIG;
        }
    };
    match pipelines::run(&cfg) {
        Ok(outcome) => {
            let verdict = if outcome.all_passed { "pass" } else { "FAIL" };
            println!(
                "{} [{}] {verdict} -> {}",
                cfg.case_id,
                cfg.kind.as_str(),
                outcome.manifest_path.display()
            );
            if outcome.all_passed {
                0
            } else {
                exit_codes::CHECKS_FAILED
            }
        }
        Err(e) => {
            eprintln!("ma run {}: {e}", path.display());
            e.exit_code()
        }
    }
}

fn run_many(configs: &[PathBuf], jobs: usize) -> i32 {
    if configs.len() == 1 || jobs == 1 {
        let mut worst = 0;
        for path in configs {
            worst = worst.max(run_one(path));
        }
        return worst;
    }
    let queue = Mutex::new(configs.iter().cloned().collect::<Vec<_>>());
    let worst = AtomicI32::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(configs.len()) {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().pop();
                match next {
                    Some(path) => {
                        let code = run_one(&path);
                        worst.fetch_max(code, Ordering::SeqCst);
                    }
                    None => break,
                }
            });
        }
    });
    worst.load(Ordering::SeqCst)
}
