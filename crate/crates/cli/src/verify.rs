//! Verification suites behind `ctp verify`.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, ValueEnum};
use ctp_core::gadgets::{baiting_c_pi, baiting_c_pi_j, baiting_harness, BaitingParams};
use ctp_core::model::random;
use ctp_core::policy::{
    evaluate_by_weathers, evaluate_exact, reference_policy, run_on_weather, simulate, Action,
};
use ctp_core::reductions::{
    compute_certificate, d_pt_weather, exam_p1, has_vertex_cover, named_graph, qbf_to_ctp,
    qbf_to_ctpdep, vc_to_sensing, VcInstance, DEFAULT_PRECISION,
};
use ctp_core::solve::{
    parse_qdimacs, qbf_eval, solve, solve_disjoint_bruteforce, OptResult, QbfFormula, SolveError,
    DEFAULT_STATE_CAP,
};
use ctp_core::{q, Cost, CtpInstance, Rational, DEFAULT_ENUMERATION_CAP};
use serde::Serialize;

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Gadgets,
    Ctpdep,
    CtpCert,
    Sensing,
    Oracle,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Gadgets => "gadgets",
            Suite::Ctpdep => "ctpdep",
            Suite::CtpCert => "ctp-cert",
            Suite::Sensing => "sensing",
            Suite::Oracle => "oracle",
        }
    }
}

#[derive(Args)]
pub struct Options {
    /// Gadget length (gadgets).
    #[arg(long = "L", default_value = "2")]
    pub l: Rational,
    /// Variables and clauses (ctp-cert).
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// QDIMACS file to check instead of the built-in formulas (ctpdep).
    #[arg(long)]
    pub formula: Option<PathBuf>,
    /// k3, p3 or a vertex-cover JSON file (sensing).
    #[arg(long, default_value = "k3")]
    pub graph: String,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "1/2")]
    pub alpha: Rational,
    #[arg(long)]
    pub h: Option<Rational>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulation trials (gadgets) or random instances (oracle).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
    /// Writes the machine-readable report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub enum SuiteError {
    Cap(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for SuiteError {
    fn from(e: anyhow::Error) -> Self {
        SuiteError::Input(e)
    }
}

#[derive(Serialize)]
pub struct Check {
    pub id: String,
    pub status: &'static str,
    pub expected: String,
    pub actual: String,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub status: &'static str,
    pub checks: Vec<Check>,
    pub wall_time_secs: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == "pass")
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: expected {}, actual {}\n",
                c.status.to_uppercase(),
                c.id,
                short(&c.expected),
                short(&c.actual)
            ));
        }
        let passed = self.checks.iter().filter(|c| c.status == "pass").count();
        out.push_str(&format!(
            "{}: {} ({passed}/{} checks)\n",
            self.suite,
            self.status,
            self.checks.len()
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Long exact values are cut in the human summary; the JSON keeps them.
fn short(s: &str) -> String {
    if s.len() <= 80 {
        s.to_string()
    } else {
        format!("{}... ({} chars)", &s[..60], s.len())
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(
        &mut self,
        id: impl Into<String>,
        ok: bool,
        expected: impl ToString,
        actual: impl ToString,
    ) {
        self.0.push(Check {
            id: id.into(),
            status: if ok { "pass" } else { "fail" },
            expected: expected.to_string(),
            actual: actual.to_string(),
        });
    }

    fn eq<T: PartialEq + ToString>(&mut self, id: impl Into<String>, expected: T, actual: T) {
        self.add(id, expected == actual, expected, actual);
    }
}

fn optimum(inst: &CtpInstance, cap: usize) -> Result<OptResult, SuiteError> {
    solve(inst, cap).map_err(|e| match e {
        SolveError::CapExceeded { .. } => SuiteError::Cap(e.to_string()),
        other => SuiteError::Input(other.into()),
    })
}

fn first(inst: &CtpInstance, r: &OptResult) -> String {
    r.optimal_first_action
        .as_ref()
        .map_or("none".into(), |a| a.describe(inst, inst.source()))
}

pub fn run(suite: Suite, opts: &Options) -> Result<VerifyReport, SuiteError> {
    let start = Instant::now();
    let mut checks = Checks::default();
    match suite {
        Suite::Gadgets => gadgets(opts, &mut checks)?,
        Suite::Ctpdep => ctpdep(opts, &mut checks)?,
        Suite::CtpCert => ctp_cert(opts, &mut checks)?,
        Suite::Sensing => sensing(opts, &mut checks)?,
        Suite::Oracle => oracle(opts, &mut checks)?,
    }
    let checks = checks.0;
    let status = if checks.iter().all(|c| c.status == "pass") {
        "pass"
    } else {
        "fail"
    };
    Ok(VerifyReport {
        suite: suite.name(),
        status,
        checks,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

fn gadgets(opts: &Options, checks: &mut Checks) -> Result<(), SuiteError> {
    let l = &opts.l;
    let inst = baiting_harness(l).context("building the gadget")?;
    let formula = Cost::Finite(baiting_c_pi(l, l).context("closed form")?);
    let r = optimum(&inst, opts.cap)?;
    checks.eq(
        "solver equals C(pi)",
        formula.clone(),
        r.optimal_cost.clone(),
    );
    let along =
        Action::Move(inst.edge_id("bg.e0").expect("gadget path")).describe(&inst, inst.source());
    checks.eq("first action", along, first(&inst, &r));
    let pi = reference_policy("baiting_pi", &[]).context("reference policy")?;
    let exact = evaluate_exact(&inst, &pi)
        .context("evaluating baiting_pi")?
        .expected_cost;
    checks.eq("baiting_pi tree evaluation", formula.clone(), exact);
    if let Ok(by_weather) = evaluate_by_weathers(&inst, &pi, DEFAULT_ENUMERATION_CAP) {
        checks.eq(
            "baiting_pi weather enumeration",
            formula.clone(),
            by_weather.expected_cost,
        );
    }
    let c = baiting_c_pi(l, l).context("closed form")?;
    let n = BaitingParams::new(l).context("gadget size")?.n;
    checks.add("C(pi) < 3/4", c < q(3, 4), "< 3/4", c.to_decimal(20));
    let worst = (1..=n)
        .filter_map(|j| {
            baiting_c_pi_j(l, j, &Rational::one())
                .ok()
                .map(|cj| (j, cj))
        })
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("N >= 1");
    checks.add(
        "C(pi) < C(pi_j) for all j",
        c < worst.1,
        format!("< {}", worst.1.to_decimal(20)),
        format!("{} (tightest j = {})", c.to_decimal(20), worst.0),
    );
    let trials = opts.trials.unwrap_or(100_000);
    let (mean, se) = simulate(&inst, &pi, trials, opts.seed).context("simulation")?;
    let z = (mean - c.to_f64()).abs() / se;
    checks.add(
        "simulation within 4 standard errors",
        z <= 4.0,
        format!("{} +- 4se", c.to_decimal(8)),
        format!("{mean:.8} (z = {z:.2})"),
    );
    Ok(())
}

const BUILT_IN_FORMULAS: [(usize, &str); 4] =
    [(2, "1 2|-1 -2"), (2, "1|2"), (2, "1 2"), (2, "2|-2")];

fn ctpdep(opts: &Options, checks: &mut Checks) -> Result<(), SuiteError> {
    let formulas: Vec<QbfFormula> = match &opts.formula {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            vec![parse_qdimacs(&text).with_context(|| path.display().to_string())?]
        }
        None => BUILT_IN_FORMULAS
            .iter()
            .map(|(n, t)| QbfFormula::from_clause_text(*n, t).expect("valid"))
            .collect(),
    };
    for f in formulas {
        let label = format!("[{}]", f.clause_text());
        let truth = qbf_eval(&f);
        let red = qbf_to_ctpdep(&f, opts.h.clone()).context("generating")?;
        let inst = &red.instance;
        let r = optimum(inst, opts.cap)?;
        let want = inst
            .edge_id(if truth { "sv1" } else { "st" })
            .expect("named edge");
        checks.eq(
            format!(
                "{label} first action ({})",
                if truth { "SAT" } else { "UNSAT" }
            ),
            Action::Move(want).describe(inst, inst.source()),
            first(inst, &r),
        );
        let cost = if truth {
            Cost::zero()
        } else {
            Cost::Finite(red.h.clone())
        };
        checks.eq(format!("{label} optimal cost"), cost, r.optimal_cost);
    }
    Ok(())
}

fn ctp_cert(opts: &Options, checks: &mut Checks) -> Result<(), SuiteError> {
    let (n, m) = (opts.n, opts.m);
    let c = compute_certificate(n, m).context("certificate")?;
    let l = Rational::integer(8 * m as i64 + 16);
    checks.eq("L = 8m+16", l.clone(), c.l.clone());
    checks.eq("p1", exam_p1(&l), c.p1.clone());
    checks.add(
        "p1 > 1 - 2/(3L+1)",
        c.p1 > &Rational::one()
            - &(&Rational::integer(2) / &(&(&l * &Rational::integer(3)) + &Rational::one())),
        "true",
        true,
    );
    let offset = &(&q(1, 4).pow(n as u32 / 2) * &Rational::integer(m as i64)) * &c.p_r0;
    checks.eq("h - B0 = (1/4)^(n/2) m P_r0", offset, &c.h - &c.b0);
    checks.add(
        "B0 < h < B1",
        c.bounds_hold(),
        "B0 < h < B1",
        format!(
            "h - B0 = {}, B1 - B0 = {}",
            (&c.h - &c.b0).to_scientific(6),
            (&c.b1 - &c.b0).to_scientific(6)
        ),
    );
    if n * m <= 16 {
        let clauses: Vec<String> = (1..=m).map(|j| format!("{}", 1 + (j - 1) % n)).collect();
        let f = QbfFormula::from_clause_text(n, &clauses.join("|")).expect("valid");
        let red = qbf_to_ctp(&f).context("generating")?;
        let policy =
            reference_policy("ctp_true_path", &[("at_r0", "stop")]).context("reference policy")?;
        let run = run_on_weather(&red.instance, &policy, &d_pt_weather(&red.instance))
            .context("walking the true path")?;
        checks.eq(
            "full-trip cost equals D_pt",
            Cost::Finite(c.d_pt.clone()),
            run.cost,
        );
    }
    Ok(())
}

fn load_graph(opts: &Options) -> anyhow::Result<VcInstance> {
    let mut vc = match opts.graph.as_str() {
        name @ ("k3" | "p3") => named_graph(name, 1)?,
        path => serde_json::from_str(
            &std::fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?,
        )?,
    };
    if let Some(k) = opts.k {
        vc.k = k;
    }
    Ok(vc)
}

fn sensing(opts: &Options, checks: &mut Checks) -> Result<(), SuiteError> {
    let vc = load_graph(opts)?;
    let red = vc_to_sensing(&vc, &opts.alpha, opts.precision).context("generating")?;
    let c = &red.certificate;
    checks.add(
        "epsilon bound",
        c.epsilon_bound_holds(),
        "(1-eps)^|E| (k+1) >= k+1-alpha",
        c.epsilon.to_decimal(20),
    );
    checks.add(
        "g_ub < 0",
        c.g_ub.is_negative(),
        "< 0",
        c.g_ub.to_decimal(20),
    );
    checks.add(
        "g'_lb > 0",
        c.g1_lb.is_positive(),
        "> 0",
        c.g1_lb.to_decimal(20),
    );
    checks.add(
        "g''_ub < 0",
        c.g2_ub.is_negative(),
        "< 0",
        c.g2_ub.to_decimal(20),
    );
    let voi = &Rational::integer(4)
        - &(&(&Rational::integer(2) * &Rational::half())
            + &(&Rational::integer(4) * &Rational::half()));
    checks.eq("value of information of xt", Rational::one(), voi);
    let inst = &red.instance;
    let r = optimum(inst, opts.cap)?;
    let cover = has_vertex_cover(&vc);
    let is_default =
        r.optimal_first_action == Some(Action::Move(inst.edge_id("st").expect("default edge")));
    checks.add(
        format!("first action is Move(s,t) iff no cover of size {}", vc.k),
        is_default != cover,
        if cover { "not Move(s,t)" } else { "Move(s,t)" },
        first(inst, &r),
    );
    Ok(())
}

fn oracle(opts: &Options, checks: &mut Checks) -> Result<(), SuiteError> {
    let trials = opts.trials.unwrap_or(25);
    let mut disagree = Vec::new();
    for i in 0..trials {
        let inst = random::disjoint_paths(opts.seed.wrapping_add(i), 4, 3);
        let brute = solve_disjoint_bruteforce(&inst)
            .context("brute force")?
            .optimal_cost;
        let exact = optimum(&inst, opts.cap)?.optimal_cost;
        if brute != exact {
            disagree.push(format!("#{i}: {brute} vs {exact}"));
        }
    }
    checks.add(
        "disjoint paths: brute force = solver",
        disagree.is_empty(),
        format!("{trials} agreements"),
        if disagree.is_empty() {
            format!("{trials} agreements")
        } else {
            disagree.join("; ")
        },
    );
    let mut disagree = Vec::new();
    let toys = trials.min(10);
    for i in 0..toys {
        let inst = random::toy(
            opts.seed.wrapping_add(1000 + i),
            2 + (i % 4) as usize,
            false,
        );
        let policy = optimum(&inst, opts.cap)?.as_policy();
        let a = evaluate_exact(&inst, &policy)
            .context("tree evaluation")?
            .expected_cost;
        let b = evaluate_by_weathers(&inst, &policy, DEFAULT_ENUMERATION_CAP)
            .context("weather enumeration")?
            .expected_cost;
        if a != b {
            disagree.push(format!("#{i}: {a} vs {b}"));
        }
    }
    checks.add(
        "tree evaluation = weather enumeration",
        disagree.is_empty(),
        format!("{toys} agreements"),
        if disagree.is_empty() {
            format!("{toys} agreements")
        } else {
            disagree.join("; ")
        },
    );
    Ok(())
}
