use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpc_cli::error::{CliError, CliResult};
use cpc_cli::io::{read_jsonl, to_jsonl, write_output};
use cpc_cli::pipeline::{self, PipelineConfig};
use cpc_cli::sim;
use cpc_core::cpc::{is_valid_code, EmissionOrder};
use cpc_core::native::CostWeights;
use cpc_core::noisesim::FaultSites;
use cpc_core::route::{Layout, SwapPolicy};
use cpc_core::search::{CodeRecord, Metric};
use cpc_core::{ErrorSet, ValidityMode};

#[derive(Parser)]
#[command(name = "cpc", version, about = "Search, route and compile coherent parity check codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Total qubits.
    #[arg(long, default_value_t = 7)]
    n: usize,
    /// Data qubits.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Single-qubit error alphabet: xz or xyz.
    #[arg(long, default_value = "xz")]
    errset: String,
    /// Validity rule: detect, correct or distinct.
    #[arg(long, default_value = "correct")]
    mode: String,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Stage {
    /// Physical order such as `A,B,C,p1,p2,p3,p4`; identity when omitted.
    #[arg(long)]
    layout: Option<String>,
    /// persistent or swap-back.
    #[arg(long, default_value = "persistent")]
    policy: String,
    /// Check emission order: row-major or column-major.
    #[arg(long, default_value = "row-major")]
    order: String,
    /// Cost weights `cpc,swap,local`.
    #[arg(long, default_value = "1,1,1")]
    weights: String,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate valid codes as JSON lines.
    Search {
        #[command(flatten)]
        common: Common,
        /// Half-open index range `a:b`.
        #[arg(long)]
        range: Option<String>,
        /// Sample this many random indices instead of sweeping.
        #[arg(long)]
        samples: Option<u64>,
        /// Summary JSON destination.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// CPC-count histogram CSV destination.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Re-check every record in a JSON-lines file.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Recompute canonical keys and count symmetry classes.
    Canon {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        /// Class summary JSON destination.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Route every code onto a linear chain.
    Route {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: Stage,
        #[arg(long = "in")]
        input: PathBuf,
        /// Routed circuits as JSON lines.
        #[arg(long)]
        circuits: Option<PathBuf>,
    },
    /// Lower routed codes to native gates without simplification.
    Lower {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: Stage,
        #[arg(long = "in")]
        input: PathBuf,
        /// Native two-qubit gate; only `sp` is available.
        #[arg(long, default_value = "sp")]
        native: String,
    },
    /// Route, lower and simplify, filling the gate-count fields.
    Simplify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: Stage,
        #[arg(long = "in")]
        input: PathBuf,
        /// Simplified native circuits as JSON lines.
        #[arg(long)]
        circuits: Option<PathBuf>,
        /// Re-check equivalence of every simplified circuit.
        #[arg(long)]
        check: bool,
    },
    /// Histogram one metric over a record file.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        /// cpc, swap, two-qubit, local or total.
        #[arg(long, default_value = "cpc")]
        metric: String,
        /// Recompute weighted cost with `cpc,swap,local` weights.
        #[arg(long)]
        weights: Option<String>,
        /// Summary JSON destination.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Estimate failure rates under biased Pauli noise.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Code JSON file, or builtin:422, builtin:422-hardened, builtin:422-nocross.
        #[arg(long)]
        code: String,
        /// Comma-separated input stabilizers on the data qubits.
        #[arg(long)]
        stabs: Option<String>,
        /// Symmetric probabilities to sweep.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        px: Option<f64>,
        #[arg(long)]
        pz: Option<f64>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        exact_weight: Option<u32>,
        /// Apply single-error lookup correction and report its failure rate.
        #[arg(long)]
        lookup: bool,
    },
    /// List single faults that spread to the data register undetected.
    Faultscan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        code: String,
        #[arg(long)]
        stabs: Option<String>,
        /// gate or all.
        #[arg(long, default_value = "gate")]
        sites: String,
    },
    /// Run every missing stage and summarise the optimum and distributions.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stage: Stage,
        #[arg(long = "in")]
        input: PathBuf,
        /// Directory for per-metric histogram CSVs.
        #[arg(long)]
        hist_dir: Option<PathBuf>,
    },
}

fn config(common: &Common, stage: Option<&Stage>) -> CliResult<PipelineConfig> {
    let mut cfg = PipelineConfig::new(common.n, common.k)?;
    cfg.errset = common.errset.parse::<ErrorSet>()?;
    cfg.mode = common.mode.parse::<ValidityMode>()?;
    cfg.threads = common.threads;
    cfg.seed = common.seed;
    if common.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    if let Some(s) = stage {
        if let Some(l) = &s.layout {
            cfg.layout = Layout::parse(l, cfg.k, cfg.m)?;
        }
        cfg.policy = s.policy.parse::<SwapPolicy>()?;
        cfg.order = s.order.parse::<EmissionOrder>()?;
        cfg.weights = s.weights.parse::<CostWeights>()?;
    }
    Ok(cfg)
}

fn load_records(path: &Path) -> CliResult<Vec<CodeRecord>> {
    let loaded = read_jsonl::<CodeRecord>(path)?;
    if loaded.malformed > 0 {
        eprintln!("warning: {} malformed line(s) skipped in {}", loaded.malformed, path.display());
    }
    Ok(loaded.items)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Search { common, range, samples, summary, hist } => {
            let mut cfg = config(&common, None)?;
            cfg.range = range.as_deref().map(pipeline::parse_range).transpose()?;
            if samples.is_some() && cfg.range.is_some() {
                return Err(CliError::Config("--samples and --range are exclusive".into()));
            }
            eprintln!("searching ({},{}) {:?} {:?}", cfg.k, cfg.m, cfg.errset, cfg.mode);
            let out = pipeline::search(&cfg, samples)?;
            eprintln!("{} valid of {} checked", out.summary.valid_count, out.summary.total_checked);
            write_output(common.out.as_deref(), &to_jsonl(&out.records))?;
            if let Some(p) = summary {
                write_output(Some(&p), &json(&out.summary))?;
            }
            if let Some(p) = hist {
                let csv = pipeline::metric_histogram(&out.records, Metric::CpcCount).map(|h| h.to_csv());
                write_output(Some(&p), &csv.unwrap_or_else(|| "bin,count\n".into()))?;
            }
        }
        Command::Verify { common, input } => {
            let cfg = config(&common, None)?;
            let loaded = read_jsonl::<CodeRecord>(&input)?;
            let bad: Vec<u64> = loaded
                .items
                .iter()
                .filter(|r| (r.code.k(), r.code.m()) != (cfg.k, cfg.m) || !is_valid_code(&r.code, cfg.errset, cfg.mode))
                .map(|r| r.index)
                .collect();
            let summary = serde_json::json!({
                "records": loaded.items.len(),
                "valid": loaded.items.len() - bad.len(),
                "invalid": bad,
                "malformed_lines": loaded.malformed,
            });
            write_output(common.out.as_deref(), &json(&summary))?;
            if !bad.is_empty() {
                return Err(CliError::Data(format!("{} record(s) failed validation", bad.len())));
            }
        }
        Command::Canon { common, input, summary } => {
            let cfg = config(&common, None)?;
            let mut records = load_records(&input)?;
            let changed = pipeline::canonicalize(&cfg, &mut records)?;
            if changed > 0 {
                eprintln!("warning: {changed} stored canonical key(s) differed and were replaced");
            }
            write_output(common.out.as_deref(), &to_jsonl(&records))?;
            if let Some(p) = summary {
                let mut per_cpc = std::collections::BTreeMap::<u32, std::collections::BTreeSet<u64>>::new();
                for r in &records {
                    per_cpc.entry(r.cpc_count).or_default().insert(r.canonical_key);
                }
                let counts: std::collections::BTreeMap<u32, usize> =
                    per_cpc.iter().map(|(c, s)| (*c, s.len())).collect();
                let classes: std::collections::BTreeSet<u64> = records.iter().map(|r| r.canonical_key).collect();
                let s = serde_json::json!({ "records": records.len(), "classes": classes.len(), "classes_by_cpc": counts });
                write_output(Some(&p), &json(&s))?;
            }
        }
        Command::Route { common, stage, input, circuits } => {
            let cfg = config(&common, Some(&stage))?;
            let mut records = load_records(&input)?;
            pipeline::route_records(&cfg, &mut records)?;
            write_output(common.out.as_deref(), &to_jsonl(&records))?;
            if let Some(p) = circuits {
                let routed = cfg.install(|| {
                    records
                        .iter()
                        .map(|r| {
                            let rc = pipeline::route_one(&cfg, &r.code)?;
                            Ok(serde_json::json!({ "index": r.index, "routed": rc }))
                        })
                        .collect::<CliResult<Vec<_>>>()
                })??;
                write_output(Some(&p), &to_jsonl(&routed))?;
            }
        }
        Command::Lower { common, stage, input, native } => {
            if native != "sp" {
                return Err(CliError::Config(format!("native gate {native:?} is not available; use sp")));
            }
            let cfg = config(&common, Some(&stage))?;
            let records = load_records(&input)?;
            let lines = records
                .iter()
                .map(|r| {
                    let routed = pipeline::route_one(&cfg, &r.code)?;
                    let seq = cpc_core::native::lower_routed(&routed, &r.code.roles())?;
                    Ok(serde_json::json!({ "index": r.index, "local_count": seq.local_gate_count(), "circuit": seq }))
                })
                .collect::<CliResult<Vec<_>>>()?;
            write_output(common.out.as_deref(), &to_jsonl(&lines))?;
        }
        Command::Simplify { common, stage, input, circuits, check } => {
            let cfg = config(&common, Some(&stage))?;
            let mut records = load_records(&input)?;
            eprintln!("compiling {} code(s)", records.len());
            let failures = pipeline::compile_records(&cfg, &mut records, check)?;
            write_output(common.out.as_deref(), &to_jsonl(&records))?;
            if let Some(p) = circuits {
                let lines = records
                    .iter()
                    .map(|r| {
                        let c = pipeline::compile_one(&cfg, &r.code)?;
                        Ok(serde_json::json!({ "index": r.index, "circuit": c.simplified }))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                write_output(Some(&p), &to_jsonl(&lines))?;
            }
            if !failures.is_empty() {
                return Err(CliError::Data(format!("equivalence check failed for indices {failures:?}")));
            }
        }
        Command::Stats { common, input, metric, weights, summary } => {
            let cfg = config(&common, None)?;
            let metric: Metric = metric.parse()?;
            let mut records = load_records(&input)?;
            if let Some(w) = weights {
                pipeline::reweight(&mut records, &w.parse()?)?;
            }
            let h = pipeline::metric_histogram(&records, metric).ok_or_else(|| {
                CliError::Data(format!("metric {} is missing from some records or there are none", metric.name()))
            })?;
            write_output(common.out.as_deref(), &h.to_csv())?;
            if let Some(p) = summary {
                let min = h.min().expect("nonempty");
                let s = serde_json::json!({
                    "metric": metric.name(),
                    "records": h.total(),
                    "min": min,
                    "count_at_min": h.count_at(min),
                    "median": h.median(),
                    "optimum": pipeline::optimum(&records),
                    "shape": [cfg.k, cfg.m],
                });
                write_output(Some(&p), &json(&s))?;
            }
        }
        Command::Simulate { common, code, stabs, p, px, pz, shots, exact_weight, lookup } => {
            let cfg = config(&common, None)?;
            let memory = sim::load_memory(&code, stabs.as_deref())?;
            let points = sim::noise_points(&p, px, pz)?;
            let how = sim::estimation(shots, exact_weight, cfg.seed)?;
            let csv = cfg.install(|| sim::rate_table(&memory, &points, how, lookup))??;
            write_output(common.out.as_deref(), &csv)?;
        }
        Command::Faultscan { common, code, stabs, sites } => {
            let memory = sim::load_memory(&code, stabs.as_deref())?;
            let sites = match sites.as_str() {
                "gate" => FaultSites::GateQubits,
                "all" => FaultSites::AllQubits,
                other => return Err(CliError::Config(format!("unknown fault sites {other:?}"))),
            };
            let found = cpc_core::noisesim::fault_scan(&memory.circuit, &memory.stabilizers, sites)?;
            eprintln!("{} violating fault location(s)", found.len());
            write_output(common.out.as_deref(), &json(&found))?;
        }
        Command::Report { common, stage, input, hist_dir } => {
            let cfg = config(&common, Some(&stage))?;
            let mut records = load_records(&input)?;
            if records.iter().any(|r| r.local_count.is_none() || r.swap_count.is_none()) {
                eprintln!("compiling {} code(s)", records.len());
                pipeline::compile_records(&cfg, &mut records, false)?;
            } else {
                pipeline::reweight(&mut records, &cfg.weights)?;
            }
            let rep = pipeline::report(&cfg, &records);
            write_output(common.out.as_deref(), &json(&rep))?;
            if let Some(dir) = hist_dir {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
                for m in [Metric::CpcCount, Metric::SwapCount, Metric::TwoQubitCount, Metric::LocalCount, Metric::LTotal]
                {
                    if let Some(h) = pipeline::metric_histogram(&records, m) {
                        write_output(Some(&dir.join(format!("{}.csv", m.name()))), &h.to_csv())?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
