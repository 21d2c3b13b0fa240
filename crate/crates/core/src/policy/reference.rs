//! Named reference policies. Each rule is bound to an instance by looking
//! up the vertex and edge names its generator assigns.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eval::describe_belief;
use super::{Action, Policy, PolicyError};
use crate::gadgets::BaitingParams;
use crate::model::{Belief, CtpInstance, EdgeId, EdgeStatus, VertexId};
use crate::numeric::Rational;
use crate::solve::{decompose_paths, winning_choice, QbfFormula};

/// A deterministic belief-to-action rule bound to one instance.
///
/// `Ok(None)` declares the current belief infeasible (no way to t remains);
/// `Err(NoRule)` means the belief lies outside the rule's domain.
pub trait Rule: Send + Sync {
    fn decide(&self, inst: &CtpInstance, belief: &Belief) -> Result<Option<Action>, PolicyError>;
}

/// A reference policy by name, with string parameters.
///
/// Text form: `name` or `name:key=value;key=value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

pub const REFERENCE_NAMES: &[&str] = &[
    "baiting_pi",
    "baiting_pi_j",
    "observation_pi_g",
    "og_pi_prime",
    "og_pi_1",
    "og_pi_2",
    "exam",
    "ctp_true_path",
    "ctpdep_assignment",
    "vc_cover",
    "committing",
];

impl PolicySpec {
    pub fn new(name: impl Into<String>) -> Self {
        PolicySpec {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    fn bad(&self, param: &str, reason: impl Into<String>) -> PolicyError {
        PolicyError::BadParam {
            policy: self.name.clone(),
            param: param.to_string(),
            reason: reason.into(),
        }
    }

    fn binding(&self, reason: impl Into<String>) -> PolicyError {
        PolicyError::Binding {
            policy: self.name.clone(),
            reason: reason.into(),
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>, PolicyError> {
        self.get(key)
            .map(|v| {
                v.parse::<Rational>()
                    .map_err(|e| self.bad(key, e.to_string()))
            })
            .transpose()
    }

    fn required_rational(&self, key: &str) -> Result<Rational, PolicyError> {
        self.rational(key)?.ok_or_else(|| self.bad(key, "missing"))
    }

    fn required_u64(&self, key: &str) -> Result<u64, PolicyError> {
        let v = self.get(key).ok_or_else(|| self.bad(key, "missing"))?;
        v.parse()
            .map_err(|_| self.bad(key, format!("not a count: {v:?}")))
    }

    fn list(&self, key: &str) -> Result<Vec<String>, PolicyError> {
        let v = self.get(key).ok_or_else(|| self.bad(key, "missing"))?;
        Ok(v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect())
    }

    fn formula(&self) -> Result<QbfFormula, PolicyError> {
        let n = self.required_u64("n")? as usize;
        let text = self
            .get("clauses")
            .ok_or_else(|| self.bad("clauses", "missing"))?;
        QbfFormula::from_clause_text(n, text).map_err(|e| self.bad("clauses", e.to_string()))
    }

    /// Instance-independent parameter checks.
    pub fn check(&self) -> Result<(), PolicyError> {
        match self.name.as_str() {
            "baiting_pi" => {
                if let Some(l) = self.rational("L")? {
                    BaitingParams::new(&l).map_err(|e| self.bad("L", e.to_string()))?;
                }
            }
            "baiting_pi_j" => {
                let l = self.required_rational("L")?;
                let params = BaitingParams::new(&l).map_err(|e| self.bad("L", e.to_string()))?;
                let j = self.required_u64("j")?;
                if j == 0 || j > params.n {
                    return Err(self.bad("j", format!("must satisfy 0 < j <= N = {}", params.n)));
                }
                if self.required_rational("m_j")? < Rational::one() {
                    return Err(self.bad("m_j", "must be at least 1"));
                }
            }
            "ctp_true_path" => match self.get("at_r0").unwrap_or("exam") {
                "exam" | "stop" => {}
                other => {
                    return Err(self.bad("at_r0", format!("expected exam or stop, got {other:?}")))
                }
            },
            "ctpdep_assignment" => {
                self.formula()?;
            }
            "vc_cover" => {
                self.list("cover")?;
            }
            "committing" => {
                if self.list("order")?.is_empty() {
                    return Err(self.bad("order", "empty"));
                }
            }
            "observation_pi_g" | "og_pi_prime" | "og_pi_1" | "og_pi_2" | "exam" => {}
            other => return Err(PolicyError::UnknownPolicy(other.to_string())),
        }
        Ok(())
    }

    /// Resolves the rule's roles on `inst`.
    pub fn bind(&self, inst: &CtpInstance) -> Result<Box<dyn Rule>, PolicyError> {
        self.check()?;
        let err = |e: String| self.binding(e);
        let gadget = |default: &str| self.get("gadget").unwrap_or(default).to_string();
        Ok(match self.name.as_str() {
            "baiting_pi" => {
                let bg = Bg::bind(inst, &gadget("bg")).map_err(err)?;
                if let Some(l) = self.rational("L")? {
                    if inst.edge(bg.sv).cost.as_finite() != Some(&l) {
                        return Err(self
                            .binding(format!("gadget {} was not built with L = {l}", bg.prefix)));
                    }
                }
                Box::new(BaitingPi { bg })
            }
            "baiting_pi_j" => {
                let bg = Bg::bind(inst, &gadget("bg")).map_err(err)?;
                let j = self.required_u64("j")? as usize;
                if j > bg.coins.len() {
                    return Err(self.bad(
                        "j",
                        format!("gadget has only N = {} shortcuts", bg.coins.len()),
                    ));
                }
                Box::new(BaitingPiJ {
                    bg,
                    j,
                    m_j: self.required_rational("m_j")?,
                })
            }
            "observation_pi_g" => Box::new(ObservationPiG {
                og: Og::bind(inst, &gadget("og")).map_err(err)?,
            }),
            "og_pi_prime" | "og_pi_1" | "og_pi_2" => {
                let depth = match self.name.as_str() {
                    "og_pi_prime" => 0,
                    "og_pi_1" => 1,
                    _ => 2,
                };
                Box::new(ExamEscape::bind(inst, depth).map_err(err)?)
            }
            "exam" => Box::new(ExamOnly {
                exam: Exam::bind(inst).map_err(err)?,
            }),
            "ctp_true_path" => {
                let stop = self.get("at_r0") == Some("stop");
                Box::new(TruePath::bind(inst, stop).map_err(err)?)
            }
            "ctpdep_assignment" => Box::new(Assignment::bind(inst, self.formula()?).map_err(err)?),
            "vc_cover" => Box::new(Cover::bind(inst, &self.list("cover")?).map_err(err)?),
            "committing" => Box::new(Committing::bind(inst, &self.list("order")?).map_err(err)?),
            other => return Err(PolicyError::UnknownPolicy(other.to_string())),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ';' })?;
        }
        Ok(())
    }
}

impl FromStr for PolicySpec {
    type Err = PolicyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut spec = PolicySpec::new(name.trim());
        for part in rest.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| spec.bad(part, "expected key=value"))?;
            spec.params
                .insert(k.trim().to_string(), v.trim().to_string());
        }
        spec.check()?;
        Ok(spec)
    }
}

/// Builds a reference policy after checking its parameters.
pub fn reference_policy(name: &str, params: &[(&str, &str)]) -> Result<Policy, PolicyError> {
    let mut spec = PolicySpec::new(name);
    for (k, v) in params {
        spec.params.insert(k.to_string(), v.to_string());
    }
    spec.check()?;
    Ok(Policy::Reference(spec))
}

fn no_rule(inst: &CtpInstance, belief: &Belief) -> PolicyError {
    PolicyError::NoRule {
        belief: describe_belief(inst, belief),
    }
}

fn vertex(inst: &CtpInstance, name: &str) -> Result<VertexId, String> {
    inst.vertex_id(name)
        .ok_or_else(|| format!("no vertex named {name:?}"))
}

fn edge(inst: &CtpInstance, name: &str) -> Result<EdgeId, String> {
    inst.edge_id(name)
        .ok_or_else(|| format!("no edge named {name:?}"))
}

fn open(belief: &Belief, e: EdgeId) -> bool {
    belief.is_known_open(e)
}

fn mv(e: EdgeId) -> Option<Action> {
    Some(Action::Move(e))
}

/// Roles of a baiting gadget.
struct Bg {
    prefix: String,
    entry: VertexId,
    exit: VertexId,
    /// e0 .. eN.
    path: Vec<EdgeId>,
    /// s1 .. sN.
    coins: Vec<EdgeId>,
    sv: EdgeId,
    /// v_i → i (1-based).
    inner: HashMap<VertexId, usize>,
}

impl Bg {
    fn bind(inst: &CtpInstance, prefix: &str) -> Result<Bg, String> {
        let su = edge(inst, &format!("{prefix}.su"))?;
        let sv = edge(inst, &format!("{prefix}.sv"))?;
        let mut coins = Vec::new();
        while let Some(e) = inst.edge_id(&format!("{prefix}.s{}", coins.len() + 1)) {
            coins.push(e);
        }
        let path = (0..=coins.len())
            .map(|k| edge(inst, &format!("{prefix}.e{k}")))
            .collect::<Result<Vec<_>, _>>()?;
        let inner = coins
            .iter()
            .enumerate()
            .map(|(i, &c)| (inst.edge(c).tail, i + 1))
            .collect();
        Ok(Bg {
            prefix: prefix.to_string(),
            entry: inst.edge(su).tail,
            exit: inst.edge(sv).tail,
            path,
            coins,
            sv,
            inner,
        })
    }

    /// Forward crossing: take an open zero-cost shortcut, else advance.
    fn forward(&self, belief: &Belief) -> Option<Action> {
        let pos = belief.position;
        if pos == self.entry {
            return mv(self.path[0]);
        }
        let &i = self.inner.get(&pos)?;
        if open(belief, self.coins[i - 1]) {
            mv(self.coins[i - 1])
        } else {
            mv(self.path[i])
        }
    }

    fn contains(&self, v: VertexId) -> bool {
        self.inner.contains_key(&v)
    }
}

struct BaitingPi {
    bg: Bg,
}

impl Rule for BaitingPi {
    fn decide(&self, inst: &CtpInstance, belief: &Belief) -> Result<Option<Action>, PolicyError> {
        if belief.position == self.bg.exit {
            return Ok(mv(self.bg.sv));
        }
        self.bg
            .forward(belief)
            .map(Some)
            .ok_or_else(|| no_rule(inst, belief))
    }
}

struct BaitingPiJ {
    bg: Bg,
    j: usize,
    m_j: Rational,
}

impl Rule for BaitingPiJ {
    fn decide(&self, inst: &CtpInstance, belief: &Belief) -> Result<Option<Action>, PolicyError> {
        let pos = belief.position;
        let retreat = belief.is_known_blocked(self.bg.coins[self.j - 1]);
        if pos == self.bg.entry {
            return Ok(Some(if retreat {
                Action::GiveUpToDefault {
                    charge: self.m_j.clone(),
                }
            } else {
                Action::Move(self.bg.path[0])
            }));
        }
        let &i = self
            .bg
            .inner
            .get(&pos)
            .ok_or_else(|| no_rule(inst, belief))?;
        Ok(if open(belief, self.bg.coins[i - 1]) {
            mv(self.bg.coins[i - 1])
        } else if retreat {
            mv(self.bg.path[i - 1])
        } else {
            mv(self.bg.path[i])
        })
    }
}

/// Roles of an observation gadget.
struct Og {
    bg1: Bg,
    bg2: Bg,
    bg3: Bg,
    v1: VertexId,
    v2: VertexId,
    v3: VertexId,
    v4: VertexId,
    v1p: VertexId,
    o: VertexId,
    v2v3: EdgeId,
    v3o: EdgeId,
    ov4: EdgeId,
    v4v1: EdgeId,
    v1v1p: EdgeId,
}

impl Og {
    fn bind(inst: &CtpInstance, prefix: &str) -> Result<Og, String> {
        let v3o = edge(inst, &format!("{prefix}.v3o"))?;
        Ok(Og {
            bg1: Bg::bind(inst, &format!("{prefix}.bg1"))?,
            bg2: Bg::bind(inst, &format!("{prefix}.bg2"))?,
            bg3: Bg::bind(inst, &format!("{prefix}.bg3"))?,
            v1: vertex(inst, &format!("{prefix}.v1"))?,
            v2: vertex(inst, &format!("{prefix}.v2"))?,
            v3: vertex(inst, &format!("{prefix}.v3"))?,
            v4: vertex(inst, &format!("{prefix}.v4"))?,
            v1p: vertex(inst, &format!("{prefix}.v1p"))?,
            o: inst.edge(v3o).head,
            v2v3: edge(inst, &format!("{prefix}.v2v3"))?,
            v3o,
            ov4: edge(inst, &format!("{prefix}.ov4"))?,
            v4v1: edge(inst, &format!("{prefix}.v4v1"))?,
            v1v1p: edge(inst, &format!("{prefix}.v1v1p"))?,
        })
    }

    fn entry(&self) -> VertexId {
        self.bg1.entry
    }

    fn exit(&self) -> VertexId {
        self.bg3.exit
    }

    /// Crossing towards o with both 3/4 edges open, and not yet past it.
    fn in_progress(&self, belief: &Belief) -> bool {
        open(belief, self.v2v3)
            && open(belief, self.v4v1)
            && belief.status(self.bg3.coins[0]).is_none()
    }

    /// The gadget's reference crossing, for positions strictly inside it
    /// (the entry included, the exit and o excluded).
    fn step(&self, belief: &Belief) -> Option<Action> {
        let pos = belief.position;
        if pos == self.entry() || self.bg1.contains(pos) {
            self.bg1.forward(belief)
        } else if pos == self.v1 {
            if belief.status(self.v2v3).is_some() {
                mv(self.v1v1p)
            } else {
                mv(self.bg2.path[0])
            }
        } else if self.bg2.contains(pos) {
            self.bg2.forward(belief)
        } else if pos == self.v2 {
            if open(belief, self.v2v3) && open(belief, self.v4v1) {
                mv(self.v2v3)
            } else {
                mv(self.bg2.sv)
            }
        } else if pos == self.v3 {
            mv(self.v3o)
        } else if pos == self.v4 {
            mv(self.v4v1)
        } else if pos == self.v1p || self.bg3.contains(pos) {
            self.bg3.forward(belief)
        } else {
            None
        }
    }
}

struct ObservationPiG {
    og: Og,
}

impl Rule for ObservationPiG {
    fn decide(&self, inst: &CtpInstance, belief: &Belief) -> Result<Option<Action>, PolicyError> {
        let pos = belief.position;
        if pos == self.og.exit() {
            return Ok(mv(self.og.bg3.sv));
        }
        if pos == self.og.o && self.og.in_progress(belief) {
            return Ok(mv(self.og.ov4));
        }
        self.og
            .step(belief)
            .map(Some)
            .ok_or_else(|| no_rule(inst, belief))
    }
}

/// π′ (depth 0), π₁ (depth 1) and π₂ (depth 2) on the exam-escape harness.
struct ExamEscape {
    depth: u8,
    o: VertexId,
    r4: VertexId,
    r3: VertexId,
    r2: VertexId,
    r1p: VertexId,
    r2p: VertexId,
    c: EdgeId,
    r34: EdgeId,
    g23: EdgeId,
    cont2: EdgeId,
    r51: EdgeId,
    g12p: EdgeId,
    cont2p: EdgeId,
    fallback: EdgeId,
}

impl ExamEscape {
    fn bind(inst: &CtpInstance, depth: u8) -> Result<Self, String> {
        Ok(ExamEscape {
            depth,
            o: vertex(inst, "o")?,
            r4: vertex(inst, "r4")?,
            r3: vertex(inst, "r3")?,
            r2: vertex(inst, "r2")?,
            r1p: vertex(inst, "r1p")?,
            r2p: vertex(inst, "r2p")?,
            c: edge(inst, "c")?,
            r34: edge(inst, "r34")?,
            g23: edge(inst, "g23")?,
            cont2: edge(inst, "cont2")?,
            r51: edge(inst, "r51")?,
            g12p: edge(inst, "g12p")?,
            cont2p: edge(inst, "cont2p")?,
            fallback: edge(inst, "fallback")?,
        })
    }
}

impl Rule for ExamEscape {
    fn decide(&self, inst: &CtpInstance, b: &Belief) -> Result<Option<Action>, PolicyError> {
        let pos = b.position;
        Ok(if pos == self.o {
            if self.depth >= 1 && b.status(self.g12p).is_none() {
                mv(self.r51)
            } else if self.depth >= 2 && open(b, self.c) && b.status(self.g23).is_none() {
                mv(self.c)
            } else {
                mv(self.fallback)
            }
        } else if pos == self.r1p {
            if open(b, self.g12p) {
                mv(self.g12p)
            } else {
                mv(self.r51)
            }
        } else if pos == self.r2p {
            mv(self.cont2p)
        } else if pos == self.r4 {
            if b.status(self.g23).is_none() {
                mv(self.r34)
            } else {
                mv(self.c)
            }
        } else if pos == self.r3 {
            if open(b, self.g23) {
                mv(self.g23)
            } else {
                mv(self.r34)
            }
        } else if pos == self.r2 {
            mv(self.cont2)
        } else {
            return Err(no_rule(inst, b));
        })
    }
}

/// Roles of the exam section r0, r{i}.1 .. r{i}.5.
struct Exam {
    r0: VertexId,
    r0r1: EdgeId,
    r0t: EdgeId,
    /// Vertex → the edge that leads one step further along the exam path.
    next: HashMap<VertexId, EdgeId>,
    /// Guard and clause edges.
    uncertain: Vec<EdgeId>,
}

impl Exam {
    fn bind(inst: &CtpInstance) -> Result<Exam, String> {
        let mut next = HashMap::new();
        let mut uncertain = Vec::new();
        let mut i = 1;
        while inst.vertex_id(&format!("r{i}.1")).is_some() {
            let names = [
                format!("g{i}.a"),
                format!("g{i}.b"),
                format!("l{i}.34"),
                format!("c{i}"),
                format!("l{i}.51"),
            ];
            for (k, name) in names.iter().enumerate() {
                let e = edge(inst, name)?;
                next.insert(vertex(inst, &format!("r{i}.{}", k + 1))?, e);
                if inst.is_uncertain(e) {
                    uncertain.push(e);
                }
            }
            i += 1;
        }
        if i == 1 {
            return Err("no exam section (vertex r1.1 missing)".into());
        }
        Ok(Exam {
            r0: vertex(inst, "r0")?,
            r0r1: edge(inst, "r0r1")?,
            r0t: edge(inst, "r0t")?,
            next,
            uncertain,
        })
    }

    fn all_open(&self, belief: &Belief) -> bool {
        self.uncertain.iter().all(|&e| open(belief, e))
    }

    /// At r0: pass the exam if everything is known open, else the shortcut.
    /// On the exam path: keep walking.
    fn step(&self, belief: &Belief) -> Option<Action> {
        let pos = belief.position;
        if pos == self.r0 {
            return if self.all_open(belief) {
                mv(self.r0r1)
            } else {
                mv(self.r0t)
            };
        }
        let &e = self.next.get(&pos)?;
        if self.all_open(belief) {
            mv(e)
        } else {
            None
        }
    }
}

struct ExamOnly {
    exam: Exam,
}

impl Rule for ExamOnly {
    fn decide(&self, inst: &CtpInstance, belief: &Belief) -> Result<Option<Action>, PolicyError> {
        self.exam
            .step(belief)
            .map(Some)
            .ok_or_else(|| no_rule(inst, belief))
    }
}

struct VarRoles {
    v: VertexId,
    universal: bool,
    t_edge: EdgeId,
    f_edge: EdgeId,
    /// (gadget, junction leaving its exit) for the true then false path.
    slots: Vec<(Og, EdgeId)>,
    vp: VertexId,
    link: Option<Bg>,
}

/// π^T on the independent construction: true path whenever possible,
/// reference crossing of every gadget, then guards, then r0.
struct TruePath {
    stop_at_r0: bool,
    s: VertexId,
    sv1: EdgeId,
    vars: Vec<VarRoles>,
    zlink: EdgeId,
    guards: Vec<Bg>,
    rlink: EdgeId,
    exam: Exam,
}

impl TruePath {
    fn bind(inst: &CtpInstance, stop_at_r0: bool) -> Result<Self, String> {
        let exam = Exam::bind(inst)?;
        let m = exam.next.len() / 5 - 1;
        let mut n = 0;
        while inst.vertex_id(&format!("v{}", n + 1)).is_some() {
            n += 1;
        }
        let mut vars = Vec::with_capacity(n);
        for i in 1..=n {
            let t_edge = edge(inst, &format!("x{i}.t"))?;
            let mut slots = Vec::with_capacity(2 * m);
            for side in ["", "n"] {
                for j in 1..=m {
                    let og = Og::bind(inst, &format!("{side}og{i}.{j}"))?;
                    slots.push((og, edge(inst, &format!("{side}j{i}.{j}"))?));
                }
            }
            vars.push(VarRoles {
                v: vertex(inst, &format!("v{i}"))?,
                universal: inst.is_uncertain(t_edge),
                t_edge,
                f_edge: edge(inst, &format!("x{i}.f"))?,
                slots,
                vp: vertex(inst, &format!("vp{i}"))?,
                link: if i < n {
                    Some(Bg::bind(inst, &format!("link{i}"))?)
                } else {
                    None
                },
            });
        }
        let guards = (0..=m + 1)
            .map(|g| Bg::bind(inst, &format!("guard{g}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TruePath {
            stop_at_r0,
            s: inst.source(),
            sv1: edge(inst, "sv1")?,
            vars,
            zlink: edge(inst, "zlink")?,
            guards,
            rlink: edge(inst, "rlink")?,
            exam,
        })
    }
}

impl Rule for TruePath {
    fn decide(&self, inst: &CtpInstance, b: &Belief) -> Result<Option<Action>, PolicyError> {
        let pos = b.position;
        if pos == self.s {
            return Ok(mv(self.sv1));
        }
        for var in &self.vars {
            if pos == var.v {
                return Ok(if !var.universal || open(b, var.t_edge) {
                    mv(var.t_edge)
                } else if open(b, var.f_edge) {
                    mv(var.f_edge)
                } else {
                    None
                });
            }
            if pos == var.vp {
                return Ok(match &var.link {
                    Some(link) => mv(link.path[0]),
                    None => mv(self.zlink),
                });
            }
            for (og, junction) in &var.slots {
                if pos == og.exit() {
                    return Ok(mv(*junction));
                }
                if pos == og.o && og.in_progress(b) {
                    return Ok(mv(og.ov4));
                }
                if let Some(a) = og.step(b) {
                    return Ok(Some(a));
                }
            }
            if let Some(link) = &var.link {
                if link.contains(pos) {
                    return Ok(link.forward(b));
                }
            }
        }
        for guard in &self.guards {
            if (pos == guard.entry && b.status(guard.coins[0]).is_none()) || guard.contains(pos) {
                return Ok(guard.forward(b));
            }
        }
        if pos == self.guards[self.guards.len() - 1].exit {
            return Ok(mv(self.rlink));
        }
        if pos == self.exam.r0 && self.stop_at_r0 {
            return Ok(Some(Action::GiveUpToDefault {
                charge: Rational::zero(),
            }));
        }
        self.exam.step(b).map(Some).ok_or_else(|| no_rule(inst, b))
    }
}

/// The assignment policy on the dependent construction: universal choices
/// follow whichever edge is open, existential choices follow a winning
/// strategy of the formula (true when none exists).
struct Assignment {
    formula: QbfFormula,
    s: VertexId,
    sv1: EdgeId,
    /// Per variable: v_i, its true and false edges, and the first observation
    /// edge of its true path (known iff the true path was taken).
    vars: Vec<(VertexId, EdgeId, EdgeId, EdgeId)>,
    /// Vertex → the only way forward.
    forward: HashMap<VertexId, EdgeId>,
    r0: VertexId,
    odd0: EdgeId,
    even0: EdgeId,
    choice: [(VertexId, EdgeId, EdgeId); 2],
}

impl Assignment {
    fn bind(inst: &CtpInstance, formula: QbfFormula) -> Result<Self, String> {
        let mut n = 0;
        while inst.vertex_id(&format!("v{}", n + 1)).is_some() {
            n += 1;
        }
        if n < formula.n {
            return Err(format!("instance has {n} variables, formula {}", formula.n));
        }
        let mut forward = HashMap::new();
        let mut vars = Vec::new();
        let mut m = 0;
        while inst.vertex_id(&format!("v1.{}", m + 1)).is_some() {
            m += 1;
        }
        for i in 1..=n {
            for side in ["", "n"] {
                for l in 1..=m {
                    forward.insert(
                        vertex(inst, &format!("{side}v{i}.{l}"))?,
                        edge(inst, &format!("{side}p{i}.{l}"))?,
                    );
                }
            }
            let next = if i < n {
                format!("link{i}")
            } else {
                "vr0".to_string()
            };
            forward.insert(vertex(inst, &format!("vp{i}"))?, edge(inst, &next)?);
            vars.push((
                vertex(inst, &format!("v{i}"))?,
                edge(inst, &format!("x{i}.t"))?,
                edge(inst, &format!("x{i}.f"))?,
                edge(inst, &format!("ob{i}.1"))?,
            ));
        }
        forward.insert(vertex(inst, "r1p")?, edge(inst, "odd2")?);
        forward.insert(vertex(inst, "r2p")?, edge(inst, "even2")?);
        Ok(Assignment {
            formula,
            s: inst.source(),
            sv1: edge(inst, "sv1")?,
            vars,
            forward,
            r0: vertex(inst, "r0")?,
            odd0: edge(inst, "odd0")?,
            even0: edge(inst, "even0")?,
            choice: [
                (vertex(inst, "r1")?, edge(inst, "odd")?, edge(inst, "esc1")?),
                (
                    vertex(inst, "r2")?,
                    edge(inst, "even")?,
                    edge(inst, "esc2")?,
                ),
            ],
        })
    }
}

impl Rule for Assignment {
    fn decide(&self, inst: &CtpInstance, b: &Belief) -> Result<Option<Action>, PolicyError> {
        let pos = b.position;
        if pos == self.s {
            return Ok(mv(self.sv1));
        }
        if let Some(i) = self.vars.iter().position(|v| v.0 == pos) {
            let (_, t_edge, f_edge, _) = self.vars[i];
            if inst.is_uncertain(t_edge) {
                return Ok(if open(b, t_edge) {
                    mv(t_edge)
                } else if open(b, f_edge) {
                    mv(f_edge)
                } else {
                    None
                });
            }
            let history: Vec<bool> = self.vars[..i]
                .iter()
                .map(|v| b.status(v.3).is_some())
                .collect();
            let value = if i < self.formula.n {
                winning_choice(&self.formula, &history).unwrap_or(true)
            } else {
                true
            };
            return Ok(mv(if value { t_edge } else { f_edge }));
        }
        if let Some(&e) = self.forward.get(&pos) {
            return Ok(mv(e));
        }
        if pos == self.r0 {
            let odd = self.choice[0].1;
            let dist = inst.reveal_distribution(&b.known, &[odd]);
            let surely_blocked = dist.iter().all(|(s, _)| s[0] == EdgeStatus::Blocked);
            return Ok(mv(if surely_blocked {
                self.even0
            } else {
                self.odd0
            }));
        }
        for &(r, choice, escape) in &self.choice {
            if pos == r {
                return Ok(mv(if open(b, choice) { choice } else { escape }));
            }
        }
        Err(no_rule(inst, b))
    }
}

/// The cover policy on the sensing construction.
struct Cover {
    s: VertexId,
    st: EdgeId,
    sx: EdgeId,
    xt: EdgeId,
    x: VertexId,
    lead: EdgeId,
    /// Sensing path edges after the leader, in order.
    coins: Vec<EdgeId>,
    /// Sensing path vertices p0 .. pE.
    path: Vec<VertexId>,
    /// (f(v), s–f(v) edge, coins sensable from f(v)).
    cover: Vec<(VertexId, EdgeId, Vec<EdgeId>)>,
}

impl Cover {
    fn bind(inst: &CtpInstance, cover: &[String]) -> Result<Self, String> {
        let map = inst.sensing().ok_or("not a sensing instance")?;
        let mut coins = Vec::new();
        let mut path = vec![vertex(inst, "p0")?];
        while let Some(p) = inst.vertex_id(&format!("p{}", path.len())) {
            let prev = *path.last().unwrap();
            let e = inst
                .incident(prev)
                .iter()
                .copied()
                .find(|&e| inst.edge(e).other_end(prev) == Some(p))
                .ok_or_else(|| format!("sensing path broken at p{}", path.len()))?;
            coins.push(e);
            path.push(p);
        }
        let cover = cover
            .iter()
            .map(|v| {
                let f = vertex(inst, &format!("f.{v}"))?;
                let sensable: Vec<EdgeId> = map
                    .available_at(f)
                    .map(|(e, _)| e)
                    .filter(|e| coins.contains(e))
                    .collect();
                Ok((f, edge(inst, &format!("sf.{v}"))?, sensable))
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Cover {
            s: inst.source(),
            st: edge(inst, "st")?,
            sx: edge(inst, "sx")?,
            xt: edge(inst, "xt")?,
            x: vertex(inst, "x")?,
            lead: edge(inst, "lead")?,
            coins,
            path,
            cover,
        })
    }
}

impl Rule for Cover {
    fn decide(&self, inst: &CtpInstance, b: &Belief) -> Result<Option<Action>, PolicyError> {
        let pos = b.position;
        if pos == self.s {
            if self.coins.iter().any(|&e| b.is_known_blocked(e)) {
                return Ok(mv(self.st));
            }
            if let Some((_, go, _)) = self
                .cover
                .iter()
                .find(|(_, _, es)| es.iter().any(|&e| b.status(e).is_none()))
            {
                return Ok(mv(*go));
            }
            if self.coins.iter().any(|&e| b.status(e).is_none()) {
                return Ok(mv(self.st));
            }
            return Ok(match b.status(self.xt) {
                None => mv(self.lead),
                Some(EdgeStatus::Traversable) => mv(self.sx),
                Some(EdgeStatus::Blocked) => mv(self.st),
            });
        }
        if pos == self.x {
            return Ok(mv(self.xt));
        }
        if let Some((_, back, es)) = self.cover.iter().find(|(f, _, _)| *f == pos) {
            return Ok(match es.iter().find(|&&e| b.status(e).is_none()) {
                Some(&e) => Some(Action::Sense(e)),
                None => mv(*back),
            });
        }
        if let Some(k) = self.path.iter().position(|&p| p == pos) {
            let last = self.path.len() - 1;
            return Ok(match b.status(self.xt) {
                None if k == last => Some(Action::Sense(self.xt)),
                None => mv(self.coins[k]),
                Some(_) if k == 0 => mv(self.lead),
                Some(_) => mv(self.coins[k - 1]),
            });
        }
        Err(no_rule(inst, b))
    }
}

/// Tries edge-disjoint s–t paths in a fixed order, turning back only when
/// the current path is known to be blocked.
struct Committing {
    s: VertexId,
    /// Paths in trial order, each as its s-to-t edge sequence.
    paths: Vec<Vec<EdgeId>>,
    /// Inner vertex → (path index, number of edges before it).
    inner: HashMap<VertexId, (usize, usize)>,
}

impl Committing {
    fn bind(inst: &CtpInstance, order: &[String]) -> Result<Self, String> {
        let all = decompose_paths(inst)?;
        let mut paths = Vec::with_capacity(order.len());
        for name in order {
            let first = edge(inst, name)?;
            let p = all
                .iter()
                .find(|p| p[0] == first)
                .ok_or_else(|| format!("{name:?} does not start an s-t path"))?;
            if paths.contains(p) {
                return Err(format!("path {name:?} listed twice"));
            }
            paths.push(p.clone());
        }
        if paths.len() != all.len() {
            return Err(format!(
                "order lists {} of {} paths",
                paths.len(),
                all.len()
            ));
        }
        let mut inner = HashMap::new();
        for (i, p) in paths.iter().enumerate() {
            let mut at = inst.source();
            for (k, &e) in p.iter().enumerate().take(p.len() - 1) {
                at = inst.edge(e).other_end(at).expect("path edges chain");
                inner.insert(at, (i, k + 1));
            }
        }
        Ok(Committing {
            s: inst.source(),
            paths,
            inner,
        })
    }
}

impl Rule for Committing {
    fn decide(&self, inst: &CtpInstance, b: &Belief) -> Result<Option<Action>, PolicyError> {
        let failed = |p: &Vec<EdgeId>| p.iter().any(|&e| b.is_known_blocked(e));
        if b.position == self.s {
            return Ok(self
                .paths
                .iter()
                .find(|p| !failed(p))
                .map(|p| Action::Move(p[0])));
        }
        let &(i, k) = self
            .inner
            .get(&b.position)
            .ok_or_else(|| no_rule(inst, b))?;
        let p = &self.paths[i];
        Ok(mv(if failed(p) { p[k - 1] } else { p[k] }))
    }
}
