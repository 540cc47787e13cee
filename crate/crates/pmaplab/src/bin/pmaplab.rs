//! Command-line entry point: experiments, samplers, walk encoding, the limit
//! pipeline, stick-breaking trees, and the verification suites.
//!
//! Exit codes: 0 on pass, 1 on threshold failure, 2 on config error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pmaplab::discrete::{
    basin_decomposition, q_biased_order, sample_p_mapping, sample_p_tree, Mapping,
};
use pmaplab::experiment::{run_experiment, ExperimentConfig};
use pmaplab::icrt::stick_break;
use pmaplab::limit::{exploration, limit_z, local_time, marks_d};
use pmaplab::model::{make_hub_family, FamilySpec, RankedProb, ThetaVector};
use pmaplab::rng::{lane_stream, RngStream};
use pmaplab::suites;
use pmaplab::walks::{mapping_walk, PlaneOrders};

#[derive(Parser)]
#[command(
    name = "pmaplab",
    about = "Random p-mapping simulation laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a catalog experiment from a JSON config.
    Experiment { config: PathBuf },
    /// Sample p-trees from the hub family.
    SampleTree(SampleArgs),
    /// Sample p-mappings from the hub family.
    SampleMapping(SampleArgs),
    /// Encode sampled mappings as walks with D and ell marks.
    Walk(WalkArgs),
    /// Run the limit-process pipeline and emit per-replication statistics.
    Limit(LimitArgs),
    /// Build a stick-breaking tree and write it as JSON.
    Icrt(IcrtArgs),
    /// Run a verification suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated hub ratios, e.g. "0.5" or "0.6,0.3"; empty for none.
    #[arg(long, default_value = "")]
    theta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WalkArgs {
    /// Input file produced by sample-mapping.
    #[arg(long = "in")]
    input: PathBuf,
    /// Weight function: "uniform" or "p".
    #[arg(long, default_value = "p")]
    w: String,
    /// Basin-order bias: only "uniform" is supported.
    #[arg(long, default_value = "uniform")]
    q: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value = "")]
    theta: String,
    #[arg(long, default_value_t = 14)]
    grid_log2: u32,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IcrtArgs {
    #[arg(long, default_value = "")]
    theta: String,
    #[arg(long, default_value_t = 100)]
    leaves: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// One of: bijection, lemj, joyal, invariants.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SampleFile {
    n: usize,
    theta: Vec<f64>,
    p: Vec<f64>,
    seed: u64,
    items: Vec<serde_json::Value>,
}

fn parse_theta(text: &str) -> Result<ThetaVector, String> {
    let parts: Vec<f64> = text
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    ThetaVector::new(parts).map_err(|e| e.to_string())
}

fn family(theta: &str, n: usize) -> Result<(ThetaVector, RankedProb), String> {
    let theta = parse_theta(theta)?;
    let p = make_hub_family(&FamilySpec::new(theta.clone(), n)).map_err(|e| e.to_string())?;
    Ok((theta, p))
}

fn run() -> Result<bool, String> {
    match Cli::parse().command {
        Command::Experiment { config } => {
            let body = fs::read_to_string(&config).map_err(|e| e.to_string())?;
            let cfg: ExperimentConfig = serde_json::from_str(&body).map_err(|e| e.to_string())?;
            let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(report.pass)
        }
        Command::SampleTree(args) => {
            let (theta, p) = family(&args.theta, args.n)?;
            let items = (0..args.count)
                .map(|k| {
                    let mut rng = RngStream::new(args.seed, lane_stream(0, k as u32));
                    let t = sample_p_tree(&p, &mut rng);
                    serde_json::json!({"root": t.root(), "parent": t.parents()})
                })
                .collect();
            write_samples(&args.out, args.n, &theta, &p, args.seed, items)
        }
        Command::SampleMapping(args) => {
            let (theta, p) = family(&args.theta, args.n)?;
            let items = (0..args.count)
                .map(|k| {
                    let mut rng = RngStream::new(args.seed, lane_stream(0, k as u32));
                    let m = sample_p_mapping(&p, &mut rng);
                    serde_json::json!({"image": m.image()})
                })
                .collect();
            write_samples(&args.out, args.n, &theta, &p, args.seed, items)
        }
        Command::Walk(args) => {
            if args.q != "uniform" {
                return Err("only --q uniform is supported".into());
            }
            let body = fs::read_to_string(&args.input).map_err(|e| e.to_string())?;
            let file: SampleFile = serde_json::from_str(&body).map_err(|e| e.to_string())?;
            let p = RankedProb::new(file.p.clone()).map_err(|e| e.to_string())?;
            let w = match args.w.as_str() {
                "uniform" => vec![1.0 / file.n as f64; file.n],
                "p" => p.values().to_vec(),
                other => return Err(format!("unknown weight spec {other}")),
            };
            let q = RankedProb::uniform(file.n);
            let mut out_items = Vec::with_capacity(file.items.len());
            for (k, item) in file.items.iter().enumerate() {
                let image: Vec<usize> =
                    serde_json::from_value(item["image"].clone()).map_err(|e| e.to_string())?;
                let m = Mapping::new(image).map_err(|e| e.to_string())?;
                let mut rng = RngStream::new(args.seed, lane_stream(1, k as u32));
                let raw = basin_decomposition(&m);
                let plane = PlaneOrders::randomized(&raw, &mut rng);
                let ordered = q_biased_order(raw, &q, &mut rng);
                let (walk, marks) =
                    mapping_walk(&m, &ordered, &plane, &w).map_err(|e| e.to_string())?;
                out_items.push(serde_json::json!({"walk": walk, "ell": marks.ell}));
            }
            let doc = serde_json::json!({"w": args.w, "q": args.q, "items": out_items});
            fs::write(&args.out, serde_json::to_string_pretty(&doc).unwrap())
                .map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Limit(args) => {
            let theta = parse_theta(&args.theta)?;
            let m = 1usize << args.grid_log2;
            let mut rows = String::from("rep,statistic,value\n");
            for r in 0..args.reps {
                let mut rng = RngStream::new(args.seed, lane_stream(0, r as u32));
                let h = exploration(&theta, m, &mut rng).map_err(|e| e.to_string())?;
                let lz = limit_z(&h, &mut rng).map_err(|e| e.to_string())?;
                let l = local_time(&h, lz.u).map_err(|e| e.to_string())?;
                let d_list: Vec<f64> = lz.z.marks.iter().map(|&(_, d)| d).collect();
                let d1 = marks_d(&d_list, &mut rng, 1)[0];
                let max_h = h.values().iter().cloned().fold(0.0, f64::max);
                rows.push_str(&format!("{r},max_H,{max_h}\n"));
                rows.push_str(&format!("{r},D1,{d1}\n"));
                rows.push_str(&format!("{r},L_end,{}\n", l.values().last().unwrap()));
            }
            fs::write(&args.out, rows).map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Icrt(args) => {
            let theta = parse_theta(&args.theta)?;
            let mut rng = RngStream::new(args.seed, 0);
            let tree = stick_break(&theta, args.leaves, &mut rng).map_err(|e| e.to_string())?;
            let nodes: Vec<serde_json::Value> = (0..tree.n_nodes())
                .map(|v| {
                    let label = match tree.label(v) {
                        pmaplab::icrt::NodeLabel::Root => "root".to_string(),
                        pmaplab::icrt::NodeLabel::Leaf(j) => format!("{j}+"),
                        pmaplab::icrt::NodeLabel::Hub(i) => format!("hub{i}"),
                        pmaplab::icrt::NodeLabel::Internal => "internal".to_string(),
                    };
                    serde_json::json!({"id": v, "label": label})
                })
                .collect();
            let edges: Vec<serde_json::Value> = (0..tree.n_nodes())
                .filter_map(|v| {
                    tree.parent_of(v)
                        .map(|p| serde_json::json!([p, v, tree.edge_len(v)]))
                })
                .collect();
            let doc = serde_json::json!({"nodes": nodes, "edges": edges});
            fs::write(&args.out, serde_json::to_string_pretty(&doc).unwrap())
                .map_err(|e| e.to_string())?;
            Ok(true)
        }
        Command::Check(args) => {
            let report = match args.suite.as_str() {
                "bijection" => suites::check_bijection(),
                "lemj" => suites::check_lemj(args.seed, 1000, 50),
                "joyal" => suites::check_joyal(args.seed, 1_000_000),
                "invariants" => suites::check_invariants(args.seed, 1000),
                other => return Err(format!("unknown suite {other}")),
            }
            .map_err(|e| e.to_string())?;
            for c in &report.checks {
                println!(
                    "[{}] {} = {} (threshold {}) ... {}",
                    report.suite,
                    c.name,
                    c.value,
                    c.threshold,
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(report.pass())
        }
    }
}

fn write_samples(
    out: &PathBuf,
    n: usize,
    theta: &ThetaVector,
    p: &RankedProb,
    seed: u64,
    items: Vec<serde_json::Value>,
) -> Result<bool, String> {
    let doc = SampleFile {
        n,
        theta: theta.thetas().to_vec(),
        p: p.values().to_vec(),
        seed,
        items,
    };
    fs::write(out, serde_json::to_string_pretty(&doc).unwrap()).map_err(|e| e.to_string())?;
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
