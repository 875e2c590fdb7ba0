use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sparsify::backtrack::SearchConfig;
use sparsify::oracle::{enumerate_optimum_tours, held_karp_on_edges, held_karp_value, MAX_ENUMERATE, MAX_HELD_KARP};
use sparsify::pipeline::{run, PipelineConfig};
use sparsify::{parse_edge_set, parse_instance, write_edge_set, Error, Instance, SparseEdgeSet};

const EXIT_PARSE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "sparsify", version, about = "Remove edges that lie in no optimum tour of a 2-D TSPLIB instance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the elimination steps and write the surviving edges.
    Eliminate {
        instance: PathBuf,
        /// Comma-separated subset of 1,2,3.
        #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3])]
        steps: Vec<u8>,
        /// Backtrack search depth.
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Vertices examined near each edge midpoint in Step 1.
        #[arg(long, default_value_t = 10)]
        candidates: usize,
        #[arg(long)]
        threads: Option<usize>,
        /// Strictness margin for floating-point certificates.
        #[arg(long)]
        margin: Option<f64>,
        /// Search nodes per edge in Step 3.
        #[arg(long, default_value_t = SearchConfig::default().node_budget)]
        node_budget: usize,
        #[arg(long, value_enum, default_value_t = Precision::F64)]
        precision: Precision,
        /// Edge file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Check an edge set against the exact optimum tours of a small instance.
    Verify {
        instance: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_n: usize,
    },
    /// Print size and degree statistics of an edge set.
    Stats {
        instance: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let input_error = err.chain().any(|e| {
                matches!(
                    e.downcast_ref::<Error>(),
                    Some(Error::Parse { .. } | Error::DuplicatePoint(..) | Error::InvalidInstance(_) | Error::DimensionMismatch { .. })
                )
            });
            ExitCode::from(if input_error { EXIT_PARSE } else { 1 })
        }
    }
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_edges(path: &Path, instance: &Instance) -> anyhow::Result<SparseEdgeSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let edges = parse_edge_set(&text).with_context(|| format!("parsing {}", path.display()))?;
    if edges.n() != instance.n() {
        return Err(Error::DimensionMismatch {
            edges: edges.n(),
            instance: instance.n(),
        })
        .context("edge file does not match instance");
    }
    Ok(edges)
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Eliminate {
            instance,
            steps,
            depth,
            candidates,
            threads,
            margin,
            node_budget,
            precision,
            out,
            stats,
        } => {
            if let Some(s) = steps.iter().find(|s| !(1..=3).contains(*s)) {
                bail!("unknown step {s}; steps are 1, 2 and 3");
            }
            if depth == 0 {
                bail!("--depth must be at least 1");
            }
            let inst = read_instance(&instance)?;
            let cfg = PipelineConfig {
                candidates,
                threads,
                margin,
                search: SearchConfig {
                    max_depth: depth,
                    node_budget,
                    ..SearchConfig::default()
                },
                ..PipelineConfig::default()
            }
            .with_steps(&steps);
            let (edges, run_stats) = match precision {
                Precision::F64 => run::<f64>(&inst, &cfg)?,
                Precision::F32 => run::<f32>(&inst, &cfg)?,
            };
            let text = write_edge_set(&inst, &edges)?;
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            let json = serde_json::to_string_pretty(&run_stats)?;
            match stats {
                Some(path) => fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => eprintln!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { instance, edges, max_n } => {
            let inst = read_instance(&instance)?;
            let set = read_edges(&edges, &inst)?;
            let limit = max_n.min(MAX_HELD_KARP);
            if inst.n() > limit {
                return Err(Error::TooLarge { n: inst.n(), limit }.into());
            }
            let optimum = held_karp_value(&inst)?;
            let restricted = held_karp_on_edges(&inst, &set)?;
            let mut missing = Vec::new();
            if inst.n() <= MAX_ENUMERATE.min(max_n) {
                for tour in enumerate_optimum_tours(&inst)? {
                    missing.extend(tour.edges().filter(|&(u, v)| !set.contains(u, v)));
                }
                missing.sort_unstable();
                missing.dedup();
            }
            let ok = restricted == Some(optimum) && missing.is_empty();
            let report = json!({
                "name": inst.name(),
                "n": inst.n(),
                "edges": set.edge_count(),
                "optimum": optimum,
                "optimum_on_edges": restricted,
                "missing_tour_edges": missing.iter().map(|&(u, v)| [u + 1, v + 1]).collect::<Vec<_>>(),
                "ok": ok,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VERIFY) })
        }
        Command::Stats { instance, edges } => {
            let inst = read_instance(&instance)?;
            let set = read_edges(&edges, &inst)?;
            let degrees: Vec<usize> = (0..inst.n()).map(|v| set.degree(v)).collect();
            let report = json!({
                "name": inst.name(),
                "n": inst.n(),
                "edges": set.edge_count(),
                "ratio": set.edge_count() as f64 / inst.n() as f64,
                "min_degree": degrees.iter().min(),
                "max_degree": degrees.iter().max(),
                "mean_degree": 2.0 * set.edge_count() as f64 / inst.n() as f64,
                "total_length": set.edges().map(|(u, v)| inst.dist(u, v)).sum::<i64>(),
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
