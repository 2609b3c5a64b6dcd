use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use longpath_core::{
    brute_force_lsp, generate_planted, parse_edge_list, small_suite, solve, write_edge_list, Digraph, Instance,
    SolveReport, SolverConfig, DEFAULT_ORACLE_CAP,
};

#[derive(Parser)]
#[command(name = "longpath", version, about = "Long simple paths in weighted digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a heavy simple path in an edge-list file.
    Solve {
        file: PathBuf,
        #[arg(long)]
        budget_ms: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Solver settings as TOML (or JSON, by extension).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        report: ReportFormat,
    },
    /// Write a planted instance: a hidden Hamiltonian path plus random edges.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact answer by exhaustive search, for small graphs.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        cap: usize,
    },
    /// Run one of the benchmark suites.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Planted instances, or small graphs, to run.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10000)]
        m: usize,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Planted,
    Small,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LONGPATH_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve { file, budget_ms, seed, workers, config, out, report } => {
            let mut cfg = match config {
                Some(path) => load_config(&path)?,
                None => SolverConfig::default(),
            };
            if let Some(b) = budget_ms {
                cfg.budget_ms = b;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let graph = read_graph(&file)?;
            let began = Instant::now();
            let inst = Instance::preprocess(&graph, &cfg)?;
            info!("preprocessed in {:.1} ms", began.elapsed().as_secs_f64() * 1e3);
            let result = solve(&inst, &cfg)?;
            let text = match report {
                ReportFormat::Json => serde_json::to_string_pretty(&result)? + "\n",
                ReportFormat::Text => text_report(&result),
            };
            emit(out.as_deref(), &text)
        }
        Command::Gen { n, m, seed, out } => {
            let planted = generate_planted(n, m, seed)?;
            match out {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                    write_edge_list(&planted.graph, BufWriter::new(file))?;
                }
                None => write_edge_list(&planted.graph, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Oracle { file, cap } => {
            let graph = read_graph(&file)?;
            let path = brute_force_lsp(&graph, cap)?;
            print!("{}", text_lines(path.vertices(), path.weight()));
            Ok(())
        }
        Command::Bench { suite, budget_ms, count, n, m, workers } => {
            let mut cfg = SolverConfig::default();
            if let Some(w) = workers {
                cfg.workers = w;
            }
            match suite {
                Suite::Planted => {
                    cfg.budget_ms = budget_ms.unwrap_or(10_000);
                    bench_planted(&cfg, n, m, count.unwrap_or(10))
                }
                Suite::Small => {
                    cfg.budget_ms = budget_ms.unwrap_or(100);
                    bench_small(&cfg, count.unwrap_or(200))
                }
            }
        }
    }
}

fn load_config(path: &FsPath) -> Result<SolverConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let cfg: SolverConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("bad config {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("bad config {}", path.display()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

fn read_graph(path: &FsPath) -> Result<Digraph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let parsed = parse_edge_list(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))?;
    if parsed.self_loops_dropped > 0 || parsed.duplicates_merged > 0 {
        info!("dropped {} self-loops, merged {} duplicate edges", parsed.self_loops_dropped, parsed.duplicates_merged);
    }
    Ok(parsed.graph)
}

fn text_lines(path: &[usize], weight: f64) -> String {
    let ids: Vec<String> = path.iter().map(|v| v.to_string()).collect();
    format!("{}\nweight {}\n", ids.join(" "), weight)
}

fn text_report(report: &SolveReport) -> String {
    text_lines(&report.path, report.weight)
}

fn emit(out: Option<&FsPath>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn bench_planted(cfg: &SolverConfig, n: usize, m: usize, count: usize) -> Result<()> {
    if count == 0 {
        bail!("nothing to run");
    }
    let mut hits = 0;
    let mut total_ms = 0.0;
    for seed in 0..count as u64 {
        let planted = generate_planted(n, m, seed)?;
        let cfg = SolverConfig { seed, ..cfg.clone() };
        let began = Instant::now();
        let inst = Instance::preprocess(&planted.graph, &cfg)?;
        let report = solve(&inst, &cfg)?;
        let ms = began.elapsed().as_secs_f64() * 1e3;
        total_ms += ms;
        let hit = report.weight >= planted.optimal_weight;
        hits += usize::from(hit);
        println!("seed {seed}: weight {} of {} in {ms:.0} ms", report.weight, planted.optimal_weight);
    }
    println!("planted n={n} m={m}: {hits}/{count} optimal, mean {:.0} ms", total_ms / count as f64);
    Ok(())
}

fn bench_small(cfg: &SolverConfig, count: usize) -> Result<()> {
    let mut hits = 0;
    let began = Instant::now();
    for (i, case) in small_suite(count, 1).into_iter().enumerate() {
        let cfg = SolverConfig { seed: i as u64, ..cfg.clone() };
        let inst = Instance::preprocess(&case.graph, &cfg)?;
        let report = solve(&inst, &cfg)?;
        let best = brute_force_lsp(&case.graph, DEFAULT_ORACLE_CAP)?.weight();
        if (report.weight - best).abs() <= 1e-9 * best.max(1.0) {
            hits += 1;
        } else {
            println!("case {i} (n={}, density {}): {} vs optimum {best}", case.n, case.density, report.weight);
        }
    }
    println!("small: {hits}/{count} optimal in {:.1} s", began.elapsed().as_secs_f64());
    Ok(())
}
