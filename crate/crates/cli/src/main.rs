//! `ctp`: generate reduction instances, solve and evaluate them, run the
//! verification suites and export graphs.

mod dot;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use ctp_core::model::json::{from_json_str, to_json_string};
use ctp_core::policy::{evaluate_exact, DecisionTree, Policy};
use ctp_core::reductions::{
    named_graph, qbf_to_ctp, qbf_to_ctpdep, vc_to_sensing, ReductionError, VcInstance,
    DEFAULT_PRECISION,
};
use ctp_core::solve::{parse_qdimacs, qbf_eval, solve, DEFAULT_STATE_CAP};
use ctp_core::{CtpInstance, PolicySpec, Rational, SolveError};

#[derive(Parser)]
#[command(
    name = "ctp",
    version,
    about = "Canadian Traveler Problem solvers and reduction generators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance (and its certificate) from a formula or graph.
    Reduce {
        kind: ReduceKind,
        /// QDIMACS file (ctpdep, ctp) or vertex-cover JSON (sensing).
        input: PathBuf,
        /// Instance JSON; the certificate goes next to it as `<stem>.cert.json`.
        #[arg(short, long)]
        output: PathBuf,
        /// Cost of the default s-t edge (ctpdep only).
        #[arg(long)]
        h: Option<Rational>,
        #[arg(long, default_value = "1/2")]
        alpha: Rational,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
        /// Overrides the cover budget stored in the graph file.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Optimal cost and first action, or the exact evaluation of a policy.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: usize,
        /// Reference policy ("name:k=v;k=v") or a decision-tree JSON file.
        #[arg(long)]
        policy: Option<String>,
        /// Writes the optimal decision tree as JSON.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Run a verification suite; exit status 1 if any check fails.
    Verify {
        suite: verify::Suite,
        #[command(flatten)]
        opts: verify::Options,
    },
    /// Render an instance as Graphviz DOT.
    ExportDot {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide a QDIMACS formula by game-tree search.
    Qbf { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    Ctpdep,
    Ctp,
    Sensing,
}

/// Failures mapped to exit codes.
enum Failure {
    Verify(String),
    Input(anyhow::Error),
    Cap(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<CtpInstance> {
    from_json_str(&read(path)?).with_context(|| format!("invalid instance {}", path.display()))
}

fn cert_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    output.with_file_name(format!("{stem}.cert.json"))
}

fn load_graph(path: &Path) -> anyhow::Result<VcInstance> {
    let text = path.to_string_lossy();
    if !path.exists() && matches!(text.as_ref(), "k3" | "p3") {
        return Ok(named_graph(&text, 1)?);
    }
    serde_json::from_str(&read(path)?).with_context(|| format!("invalid graph {}", path.display()))
}

fn reduce(
    kind: ReduceKind,
    input: &Path,
    output: &Path,
    h: Option<Rational>,
    alpha: &Rational,
    precision: u32,
    k: Option<usize>,
) -> Result<(), Failure> {
    let (instance, cert, violation) = match kind {
        ReduceKind::Ctpdep | ReduceKind::Ctp => {
            let formula =
                parse_qdimacs(&read(input)?).with_context(|| format!("{}", input.display()))?;
            if let ReduceKind::Ctpdep = kind {
                let r = qbf_to_ctpdep(&formula, h).map_err(anyhow::Error::from)?;
                let cert = serde_json::to_string_pretty(&r).map_err(anyhow::Error::from)?;
                println!("h = {} ({})", r.h, r.h.to_decimal(20));
                (r.instance, cert, None)
            } else {
                let r = qbf_to_ctp(&formula).map_err(anyhow::Error::from)?;
                let cert = serde_json::to_string_pretty(&r).map_err(anyhow::Error::from)?;
                let c = &r.certificate;
                println!("L = {}, h = {}", c.l.to_compact(), c.h.to_decimal(20));
                let violation = c
                    .check_bounds()
                    .err()
                    .map(|e: ReductionError| e.to_string());
                (r.instance, cert, violation)
            }
        }
        ReduceKind::Sensing => {
            let mut vc = load_graph(input)?;
            if let Some(k) = k {
                vc.k = k;
            }
            let r = vc_to_sensing(&vc, alpha, precision).map_err(anyhow::Error::from)?;
            println!(
                "epsilon = {} ({})",
                r.certificate.epsilon,
                r.certificate.epsilon.to_decimal(20)
            );
            let cert = serde_json::to_string_pretty(&r).map_err(anyhow::Error::from)?;
            (r.instance, cert, None)
        }
    };
    write(output, &to_json_string(&instance))?;
    let cp = cert_path(output);
    write(&cp, &(cert + "\n"))?;
    println!(
        "wrote {} ({} vertices, {} edges) and {}",
        output.display(),
        instance.vertex_count(),
        instance.edge_count(),
        cp.display()
    );
    match violation {
        Some(v) => Err(Failure::Verify(v)),
        None => Ok(()),
    }
}

fn load_policy(text: &str) -> anyhow::Result<Policy> {
    let path = Path::new(text);
    if path.is_file() {
        let tree = DecisionTree::from_json(&read(path)?)
            .with_context(|| format!("invalid decision tree {text}"))?;
        return Ok(Policy::Tree(tree));
    }
    Ok(Policy::Reference(text.parse::<PolicySpec>()?))
}

fn run_solve(
    path: &Path,
    cap: usize,
    policy: Option<&str>,
    tree: Option<&Path>,
) -> Result<(), Failure> {
    let inst = load_instance(path)?;
    if let Some(text) = policy {
        let policy = load_policy(text)?;
        let r = evaluate_exact(&inst, &policy).map_err(anyhow::Error::from)?;
        println!("{}", r.expected_cost.pretty());
        for o in &r.outcome_breakdown {
            println!(
                "  {}: p = {}, cost = {}",
                o.label,
                o.probability,
                o.cost.pretty()
            );
        }
        return Ok(());
    }
    let r = match solve(&inst, cap) {
        Ok(r) => r,
        Err(e @ SolveError::CapExceeded { .. }) => return Err(Failure::Cap(e.to_string())),
        Err(e) => return Err(anyhow!(e).into()),
    };
    let s = inst.source();
    let first = match &r.optimal_first_action {
        Some(a) => a.describe(&inst, s),
        None => {
            let all: Vec<String> = r
                .policy
                .first_actions()
                .iter()
                .map(|a| a.map_or("stop".to_string(), |a| a.describe(&inst, s)))
                .collect();
            format!(
                "depends on the observation at {}: {}",
                inst.vertex_name(s),
                all.join(" / ")
            )
        }
    };
    println!("{}, {first}", r.optimal_cost.pretty());
    eprintln!("{} beliefs expanded", r.stats.beliefs_expanded);
    if let Some(out) = tree {
        write(out, &r.policy.to_json())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reduce {
            kind,
            input,
            output,
            h,
            alpha,
            precision,
            k,
        } => reduce(kind, &input, &output, h, &alpha, precision, k),
        Command::Solve {
            instance,
            cap,
            policy,
            tree,
        } => run_solve(&instance, cap, policy.as_deref(), tree.as_deref()),
        Command::Verify { suite, opts } => {
            let report = verify::run(suite, &opts).map_err(|e| match e {
                verify::SuiteError::Cap(msg) => Failure::Cap(msg),
                verify::SuiteError::Input(e) => Failure::Input(e),
            })?;
            print!("{}", report.summary());
            if let Some(path) = &opts.json {
                write(path, &report.to_json())?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verify(format!("suite {} failed", report.suite)))
            }
        }
        Command::ExportDot { instance, output } => {
            let text = dot::render(&load_instance(&instance)?);
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Qbf { input } => {
            let formula =
                parse_qdimacs(&read(&input)?).with_context(|| format!("{}", input.display()))?;
            println!("{}", if qbf_eval(&formula) { "SAT" } else { "UNSAT" });
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
