use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use clusterlp::core::exact::{self, solve_exact};
use clusterlp::core::gap::{build_line_graph_instance, gap_report, GapRow};
use clusterlp::core::instance::{generate_planted, generate_random, objective_clustering};
use clusterlp::core::lp::{self, solve_cluster_lp_exact, solve_pairwise_lp, ClusterLpSolution};
use clusterlp::core::precluster::{build_admissible, build_atoms, DEFAULT_BETA};
use clusterlp::core::rounding::{best_of, round_classic_pivot, round_cluster_based, RuleSet};
use clusterlp::core::sdp::{default_breakpoints, Discretization, RefineRule, DEFAULT_ALPHA};
use clusterlp::core::triangle::verify::VerifyOptions;
use clusterlp::core::triangle::BudgetSpec;
use clusterlp::core::{derive_seed, Clustering, Error as CoreError, Instance};
use clusterlp::criteria::{reproduce, Level, DEFAULT_SEED};
use clusterlp::harness::{assemble_parallel, verify_parallel, with_workers};
use clusterlp::io::{read_json, read_json_member, read_text, to_json_string, write_json, write_text, Envelope};
use clusterlp::sdpa::{sidecar_path, SdpaProblem, Sidecar};
use clusterlp::{exit_code, CriterionFailed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "clusterlp",
    version,
    about = "Correlation clustering via the cluster LP: exact solvers, rounding, certification and SDP models"
)]
struct Cli {
    /// Worker threads; defaults to the available parallelism. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Relaxation {
    Cluster,
    Pairwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundRules {
    Alg3,
    Alg4,
    /// Cluster-based rounding alone.
    Cluster,
    /// Pivot on +neighbors, ignoring the LP.
    Classic,
}

impl RoundRules {
    fn name(self) -> &'static str {
        match self {
            RoundRules::Alg3 => "alg3",
            RoundRules::Alg4 => "alg4",
            RoundRules::Cluster => "cluster",
            RoundRules::Classic => "classic",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PivotRules {
    Alg3,
    Alg4,
}

impl PivotRules {
    fn rules(self) -> RuleSet {
        match self {
            PivotRules::Alg3 => RuleSet::alg3(),
            PivotRules::Alg4 => RuleSet::alg4(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Planted,
    /// Line graph of the complete graph on `--n` vertices.
    LineGraph,
}

#[derive(Subcommand)]
enum Command {
    /// Exact optimum by enumerating all partitions.
    SolveExact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = exact::DEFAULT_MAX_N)]
        max_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solves the cluster LP (all subsets as columns) or the pairwise LP exactly.
    SolveLp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "cluster")]
        relaxation: Relaxation,
        /// Size limit; defaults to 12 for the cluster LP and 14 for the pairwise LP.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Atoms and admissible pairs.
    Precluster {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rounds a cluster-LP solution; reports the best clustering over all trials.
    Round {
        #[arg(long)]
        instance: PathBuf,
        /// Output of `solve-lp` or a bare solution document; not needed for `classic`.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "alg3")]
        rules: RoundRules,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid check of cost(T) ≤ Δ(T) over all triangle types; exit 4 when it fails.
    VerifyTriangles {
        #[arg(long, default_value_t = 1.56)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "alg3")]
        rules: PivotRules,
        /// Grid spacing, 1/N for an integer N ≤ 1000.
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        /// Restrict to triples with PSD covariance blocks.
        #[arg(long)]
        psd_region: bool,
        /// Report without failing on a violation.
        #[arg(long)]
        no_assert: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the discretized SDP in SDPA sparse format plus a JSON sidecar `<out>.json`.
    BuildSdp {
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "alg4")]
        rules: PivotRules,
        /// JSON array of breakpoints, or an object {"breakpoints": [...], "refine": [...]}.
        #[arg(long)]
        breakpoints: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluates a variable vector against a model written by `build-sdp`.
    EvalEta {
        #[arg(long)]
        model: PathBuf,
        /// JSON array, or an object with an "eta" member.
        #[arg(long)]
        eta: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrality-gap table on line graphs of complete graphs.
    Gap {
        /// Comma-separated base sizes.
        #[arg(long, value_delimiter = ',', default_value = "5,20,60")]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: TableFormat,
        /// Largest vertex count for the exact optimum and LP columns.
        #[arg(long, default_value_t = 10)]
        max_exact_vertices: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the acceptance criteria and writes `manifest.json`; exit 4 if any fails.
    Reproduce {
        #[arg(value_enum)]
        level: Level,
        #[arg(long, default_value = "reproduce-out")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Writes a random instance.
    Generate {
        #[arg(long, value_enum, default_value = "random")]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        /// +edge probability (random).
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Planted cluster count (planted).
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Flip probability (planted).
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    CoreError::Validation(msg.into()).into()
}

fn emit<T: Serialize>(out: Option<&Path>, command: &str, seed: Option<u64>, body: T) -> Result<()> {
    let env = Envelope::new(command, seed, body);
    match out {
        Some(p) => write_json(p, &env)?,
        None => print!("{}", to_json_string(&env)),
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<Instance> {
    Ok(read_json_member(path, "instance")?)
}

fn x_table(n: usize, x: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n).map(|u| (0..n).map(|v| if u == v { 0.0 } else { x(u, v) }).collect()).collect()
}

fn load_discretization(path: Option<&Path>) -> Result<Discretization> {
    let default = default_breakpoints();
    let Some(path) = path else { return Ok(default) };
    let doc: Value = read_json(path)?;
    let (bps, refine) = match &doc {
        Value::Array(_) => (doc.clone(), None),
        Value::Object(m) => (
            m.get("breakpoints")
                .cloned()
                .ok_or_else(|| invalid(format!("{}: missing \"breakpoints\"", path.display())))?,
            m.get("refine").cloned(),
        ),
        _ => return Err(invalid(format!("{}: expected an array or an object", path.display()))),
    };
    let bps: Vec<f64> =
        serde_json::from_value(bps).map_err(|e| invalid(format!("{}: breakpoints: {e}", path.display())))?;
    let refine: Vec<RefineRule> = match refine {
        Some(r) => serde_json::from_value(r).map_err(|e| invalid(format!("{}: refine: {e}", path.display())))?,
        None => default.refine_rules().to_vec(),
    };
    Ok(Discretization::new(bps, refine)?)
}

#[derive(Serialize)]
struct RoundStats {
    trials: usize,
    min: u64,
    max: u64,
    mean: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveExact { instance, max_n, out } => {
            let inst = load_instance(&instance)?;
            let r = solve_exact(&inst, max_n)?;
            emit(
                out.as_deref(),
                "solve-exact",
                None,
                json!({"opt": r.opt_value, "witness": r.witness, "partitions_enumerated": r.partitions_enumerated}),
            )
        }
        Command::SolveLp { instance, relaxation, max_n, out } => {
            let inst = load_instance(&instance)?;
            let n = inst.n();
            let body = match relaxation {
                Relaxation::Cluster => {
                    let (sol, report) = solve_cluster_lp_exact(&inst, max_n.unwrap_or(lp::cluster::DEFAULT_MAX_N))?;
                    json!({"relaxation": "cluster", "value": sol.lp_value(), "solution": sol, "x": x_table(n, |u, v| sol.x_pair(u, v)), "solver": report})
                }
                Relaxation::Pairwise => {
                    let (sol, report) = solve_pairwise_lp(&inst, max_n.unwrap_or(lp::pairwise::DEFAULT_MAX_N))?;
                    let x = x_table(n, |u, v| sol.x.get(u, v).unwrap_or(0.0));
                    json!({"relaxation": "pairwise", "value": sol.lp_value, "x": x, "solver": report})
                }
            };
            emit(out.as_deref(), "solve-lp", None, body)
        }
        Command::Precluster { instance, eps, beta, seed, out } => {
            let inst = load_instance(&instance)?;
            let atoms = build_atoms(&inst, beta, seed)?;
            let pre = build_admissible(&inst, &atoms, eps)?;
            let adm: Vec<[usize; 2]> = pre.adm.iter().map(|&(u, v)| [u, v]).collect();
            emit(
                out.as_deref(),
                "precluster",
                Some(seed),
                json!({"eps": eps, "beta": beta, "atoms": pre.atoms, "adm": adm, "e1_size": pre.e1.len(), "e2_size": pre.e2.len()}),
            )
        }
        Command::Round { instance, solution, rules, trials, seed, out } => {
            if trials == 0 {
                return Err(invalid("--trials must be positive"));
            }
            let inst = load_instance(&instance)?;
            let sol: Option<ClusterLpSolution> = match (&solution, rules) {
                (_, RoundRules::Classic) => None,
                (Some(p), _) => Some(read_json_member(p, "solution")?),
                (None, _) => return Err(invalid("--solution is required for LP-based rules")),
            };
            if let Some(s) = &sol {
                if s.n() != inst.n() {
                    return Err(invalid(format!("solution has n = {}, instance has n = {}", s.n(), inst.n())));
                }
            }
            let results = (0..trials)
                .into_par_iter()
                .map(|i| -> Result<(Clustering, u64)> {
                    let s = derive_seed(seed, i as u64);
                    Ok(match (rules, &sol) {
                        (RoundRules::Classic, _) => {
                            let c = round_classic_pivot(&inst, s);
                            let cost = objective_clustering(&inst, &c)?;
                            (c, cost)
                        }
                        (RoundRules::Cluster, Some(sol)) => {
                            let c = round_cluster_based(sol, s)?;
                            let cost = objective_clustering(&inst, &c)?;
                            (c, cost)
                        }
                        (RoundRules::Alg3, Some(sol)) => best_of(&inst, sol, &RuleSet::alg3(), 1, s)?,
                        (RoundRules::Alg4, Some(sol)) => best_of(&inst, sol, &RuleSet::alg4(), 1, s)?,
                        _ => unreachable!("solution checked above"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let costs: Vec<u64> = results.iter().map(|r| r.1).collect();
            let (best, best_cost) = results.into_iter().min_by_key(|r| r.1).expect("trials > 0");
            let stats = RoundStats {
                trials,
                min: best_cost,
                max: *costs.iter().max().expect("trials > 0"),
                mean: costs.iter().sum::<u64>() as f64 / trials as f64,
            };
            emit(
                out.as_deref(),
                "round",
                Some(seed),
                json!({"rules": rules.name(), "cost": best_cost, "clustering": best, "lp_value": sol.map(|s| s.lp_value()), "stats": stats}),
            )
        }
        Command::VerifyTriangles { alpha, rules, step, psd_region, no_assert, out } => {
            let opts = VerifyOptions { psd_region, ..VerifyOptions::new(alpha, rules.rules(), step) };
            let report = verify_parallel(&opts)?;
            let passed = report.passed();
            emit(out.as_deref(), "verify-triangles", None, json!({"passed": passed, "report": report}))?;
            if !passed && !no_assert {
                return Err(CriterionFailed(format!("min(delta - cost) = {:e} at alpha = {alpha}", report.min)).into());
            }
            Ok(())
        }
        Command::BuildSdp { alpha, rules, breakpoints, out } => {
            let disc = load_discretization(breakpoints.as_deref())?;
            let model = assemble_parallel(&disc, &rules.rules(), &BudgetSpec::new(alpha)?)?;
            let problem = SdpaProblem::from_model(&model)?;
            write_text(&out, &problem.to_sdpa_string())?;
            let side = sidecar_path(&out);
            write_json(&side, &Sidecar::from_model(&model))?;
            let summary = json!({
                "model": out, "sidecar": side, "alpha": alpha, "intervals": disc.num_intervals(),
                "cells": model.cells.len(), "vars": model.vars.len(), "coalesced": model.coalesced,
            });
            print!("{}", to_json_string(&Envelope::new("build-sdp", None, summary)));
            Ok(())
        }
        Command::EvalEta { model, eta, out } => {
            let problem = SdpaProblem::parse(&read_text(&model)?)
                .with_context(|| format!("reading model {}", model.display()))?;
            let eta: Vec<f64> = read_json_member(&eta, "eta")?;
            let ev = problem.evaluate(&eta)?;
            emit(out.as_deref(), "eval-eta", None, json!({"evaluation": ev}))
        }
        Command::Gap { n, format, max_exact_vertices, out } => {
            if n.iter().any(|&k| k < 3) {
                return Err(invalid("every --n value must be at least 3"));
            }
            let rows = gap_report(&n, max_exact_vertices)?;
            match format {
                TableFormat::Json => emit(out.as_deref(), "gap", None, json!({"rows": rows})),
                TableFormat::Csv => {
                    let csv = gap_csv(&rows)?;
                    match out {
                        Some(p) => write_text(&p, &csv)?,
                        None => print!("{csv}"),
                    }
                    Ok(())
                }
            }
        }
        Command::Reproduce { level, out, seed } => {
            let manifest = reproduce(level, seed, true);
            let path = out.join("manifest.json");
            write_json(&path, &manifest)?;
            println!("manifest: {}", path.display());
            let failed: Vec<&str> = manifest.criteria.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
            if !failed.is_empty() {
                return Err(CriterionFailed(failed.join(", ")).into());
            }
            Ok(())
        }
        Command::Generate { kind, n, p, k, noise, seed, out } => {
            let inst = match kind {
                GenKind::Random => generate_random(n, p, seed)?,
                GenKind::Planted => generate_planted(n, k, noise, seed)?,
                GenKind::LineGraph => {
                    if n < 2 {
                        return Err(invalid("line graphs need --n >= 2"));
                    }
                    build_line_graph_instance(n)?.instance
                }
            };
            emit(out.as_deref(), "generate", Some(seed), json!({"instance": inst}))
        }
    }
}

fn gap_csv(rows: &[GapRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    match with_workers(workers, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
