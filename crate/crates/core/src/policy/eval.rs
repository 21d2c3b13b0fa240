use std::collections::{BTreeMap, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Action, DecisionTree, NodeKind, Policy, PolicyError, Rule, TreeNode};
use crate::model::{Belief, CtpInstance, EdgeId, EdgeStatus, Variant, Weather};
use crate::numeric::{Cost, Rational};

/// One terminal event class of an evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub label: String,
    pub probability: Rational,
    /// Expected cost conditional on this event.
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    pub expected_cost: Cost,
    pub outcome_breakdown: Vec<Outcome>,
}

impl EvalResult {
    /// Expected cost as a rational, if finite.
    pub fn exact(&self) -> Option<&Rational> {
        self.expected_cost.as_finite()
    }

    pub fn outcome(&self, label: &str) -> Option<&Outcome> {
        self.outcome_breakdown.iter().find(|o| o.label == label)
    }

    fn from_sink(sink: BTreeMap<String, (Rational, Cost)>) -> Self {
        let mut expected = Cost::zero();
        let mut outcome_breakdown = Vec::with_capacity(sink.len());
        for (label, (probability, partial)) in sink {
            expected = expected + partial.clone();
            let cost = match partial {
                Cost::Finite(v) => Cost::Finite(v / &probability),
                Cost::Infinite => Cost::Infinite,
            };
            outcome_breakdown.push(Outcome {
                label,
                probability,
                cost,
            });
        }
        EvalResult {
            expected_cost: expected,
            outcome_breakdown,
        }
    }
}

/// The realized execution of a policy on one weather.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub cost: Cost,
    pub label: String,
    /// Every action taken, with the vertex it was taken from.
    pub actions: Vec<(crate::model::VertexId, Action)>,
}

pub(crate) fn describe_belief(inst: &CtpInstance, belief: &Belief) -> String {
    let revealed: Vec<String> = inst
        .uncertain_edges()
        .iter()
        .filter_map(|&e| {
            belief
                .status(e)
                .map(|s| format!("{}={}", inst.edge_name(e), s.short()))
        })
        .collect();
    format!(
        "at {} {{{}}}",
        inst.vertex_name(belief.position),
        revealed.join(",")
    )
}

pub(crate) fn outcome_key(inst: &CtpInstance, edges: &[EdgeId], statuses: &[EdgeStatus]) -> String {
    edges
        .iter()
        .zip(statuses)
        .map(|(&e, s)| format!("{}={}", inst.edge_name(e), s.short()))
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn check_legal(
    inst: &CtpInstance,
    belief: &Belief,
    action: &Action,
) -> Result<(), PolicyError> {
    let pos = belief.position;
    let ok = match action {
        Action::Move(e) => {
            e.0 < inst.edge_count() && {
                let spec = inst.edge(*e);
                spec.traverse_from(pos).is_some()
                    && belief.is_known_open(*e)
                    && spec.cost.is_finite()
            }
        }
        Action::Sense(e) => match inst.variant() {
            Variant::Sensing(map) => e.0 < inst.edge_count() && map.cost(pos, *e).is_finite(),
            _ => false,
        },
        Action::GiveUpToDefault { charge } => !charge.is_negative(),
        Action::Halt => pos == inst.target(),
    };
    if ok {
        Ok(())
    } else {
        Err(PolicyError::IllegalAction {
            action: action.describe(inst, pos),
            belief: describe_belief(inst, belief),
        })
    }
}

pub(crate) enum Bound<'a> {
    Tree(&'a DecisionTree),
    Rule(Box<dyn Rule + 'a>),
}

impl<'a> Bound<'a> {
    pub(crate) fn new(inst: &CtpInstance, policy: &'a Policy) -> Result<Bound<'a>, PolicyError> {
        match policy {
            Policy::Tree(t) => Ok(Bound::Tree(t)),
            Policy::Reference(spec) => Ok(Bound::Rule(spec.bind(inst)?)),
        }
    }

    fn child(
        &self,
        tree: &DecisionTree,
        node: usize,
        key: &str,
        belief: &dyn Fn() -> String,
    ) -> Result<usize, PolicyError> {
        tree.node(node)
            .children
            .get(key)
            .copied()
            .filter(|&c| c < tree.len())
            .ok_or_else(|| PolicyError::MissingBranch {
                belief: belief(),
                outcome: key.to_string(),
            })
    }

    fn after_start(
        &self,
        inst: &CtpInstance,
        belief: &Belief,
        key: &str,
    ) -> Result<usize, PolicyError> {
        match self {
            Bound::Rule(_) => Ok(0),
            Bound::Tree(tree) => match tree.node(tree.root).kind {
                NodeKind::Observe => {
                    self.child(tree, tree.root, key, &|| describe_belief(inst, belief))
                }
                _ if key.is_empty() => Ok(tree.root),
                _ => Err(PolicyError::MissingBranch {
                    belief: describe_belief(inst, belief),
                    outcome: key.to_string(),
                }),
            },
        }
    }

    fn advance(
        &self,
        inst: &CtpInstance,
        belief: &Belief,
        cursor: usize,
        key: &str,
    ) -> Result<usize, PolicyError> {
        match self {
            Bound::Rule(_) => Ok(0),
            Bound::Tree(tree) => self.child(tree, cursor, key, &|| describe_belief(inst, belief)),
        }
    }

    fn decide(
        &self,
        inst: &CtpInstance,
        belief: &Belief,
        cursor: usize,
    ) -> Result<Option<Action>, PolicyError> {
        match self {
            Bound::Rule(rule) => rule.decide(inst, belief),
            Bound::Tree(tree) => match &tree.node(cursor).kind {
                NodeKind::Act(a) => Ok(Some(a.clone())),
                NodeKind::Stuck => Ok(None),
                NodeKind::Done => Err(PolicyError::IllegalAction {
                    action: "Halt".into(),
                    belief: describe_belief(inst, belief),
                }),
                NodeKind::Observe => Err(PolicyError::NoRule {
                    belief: describe_belief(inst, belief),
                }),
            },
        }
    }
}

enum Stop {
    Terminal { label: String, cost: Cost },
    Chance { reveal: Vec<EdgeId> },
}

struct Walker<'a, 'b> {
    inst: &'a CtpInstance,
    bound: &'a Bound<'b>,
}

struct Cursor {
    node: usize,
    belief: Belief,
    acc: Rational,
    last: Option<EdgeId>,
}

impl Walker<'_, '_> {
    /// Executes actions until the policy terminates or something uncertain
    /// is about to be revealed.
    fn run_until_chance(
        &self,
        cur: &mut Cursor,
        trace: &mut Option<&mut Vec<(crate::model::VertexId, Action)>>,
    ) -> Result<Stop, PolicyError> {
        let inst = self.inst;
        let mut seen = HashSet::new();
        loop {
            let pos = cur.belief.position;
            if pos == inst.target() {
                let label = match cur.last {
                    Some(e) => format!("via {}", inst.edge_name(e)),
                    None => "at target".to_string(),
                };
                return Ok(Stop::Terminal {
                    label,
                    cost: Cost::Finite(cur.acc.clone()),
                });
            }
            if !seen.insert((cur.node, pos)) {
                return Err(PolicyError::Loop {
                    belief: describe_belief(inst, &cur.belief),
                });
            }
            let Some(action) = self.bound.decide(inst, &cur.belief, cur.node)? else {
                return Ok(Stop::Terminal {
                    label: format!("infeasible at {}", inst.vertex_name(pos)),
                    cost: Cost::Infinite,
                });
            };
            check_legal(inst, &cur.belief, &action)?;
            if let Some(t) = trace.as_mut() {
                t.push((pos, action.clone()));
            }
            match action {
                Action::Move(e) => {
                    let spec = inst.edge(e);
                    cur.acc += spec.cost.as_finite().expect("legal moves are finite");
                    let next = spec.traverse_from(pos).expect("legal move");
                    cur.belief.position = next;
                    cur.last = Some(e);
                    if next == inst.target() {
                        continue;
                    }
                    let reveal = cur.belief.unknown_incident(inst, next);
                    if !reveal.is_empty() {
                        return Ok(Stop::Chance { reveal });
                    }
                    cur.node = self.bound.advance(inst, &cur.belief, cur.node, "")?;
                }
                Action::Sense(e) => {
                    let c = inst.sensing().expect("legal sense").cost(pos, e);
                    cur.acc += c.as_finite().expect("legal sense is finite");
                    if cur.belief.status(e).is_none() {
                        return Ok(Stop::Chance { reveal: vec![e] });
                    }
                    cur.node = self.bound.advance(inst, &cur.belief, cur.node, "")?;
                }
                Action::GiveUpToDefault { charge } => {
                    return Ok(Stop::Terminal {
                        label: format!("give up at {}", inst.vertex_name(pos)),
                        cost: Cost::Finite(&cur.acc + &charge),
                    });
                }
                Action::Halt => unreachable!("Halt is only legal at the target"),
            }
        }
    }

    fn explore(
        &self,
        mut cur: Cursor,
        prob: Rational,
        sink: &mut BTreeMap<String, (Rational, Cost)>,
    ) -> Result<(), PolicyError> {
        match self.run_until_chance(&mut cur, &mut None)? {
            Stop::Terminal { label, cost } => {
                let slot = sink
                    .entry(label)
                    .or_insert_with(|| (Rational::zero(), Cost::zero()));
                slot.1 = slot.1.clone() + cost.scale(&prob);
                slot.0 += prob;
                Ok(())
            }
            Stop::Chance { reveal } => self.branch(cur, false, &reveal, prob, sink),
        }
    }

    fn branch(
        &self,
        cur: Cursor,
        start: bool,
        reveal: &[EdgeId],
        prob: Rational,
        sink: &mut BTreeMap<String, (Rational, Cost)>,
    ) -> Result<(), PolicyError> {
        let inst = self.inst;
        for (statuses, p) in inst.reveal_distribution(&cur.belief.known, reveal) {
            let mut belief = cur.belief.clone();
            for (&e, &s) in reveal.iter().zip(&statuses) {
                belief.reveal(e, s);
            }
            let key = outcome_key(inst, reveal, &statuses);
            let node = if start {
                self.bound.after_start(inst, &belief, &key)?
            } else {
                self.bound.advance(inst, &belief, cur.node, &key)?
            };
            let next = Cursor {
                node,
                belief,
                acc: cur.acc.clone(),
                last: cur.last,
            };
            self.explore(next, &prob * &p, sink)?;
        }
        Ok(())
    }

    fn run(
        &self,
        status: &[EdgeStatus],
        mut trace: Option<&mut Vec<(crate::model::VertexId, Action)>>,
    ) -> Result<(String, Cost), PolicyError> {
        let inst = self.inst;
        let mut belief = Belief::initial(inst);
        let reveal = belief.unknown_incident(inst, inst.source());
        let statuses: Vec<EdgeStatus> = reveal.iter().map(|e| status[e.0]).collect();
        for (&e, &s) in reveal.iter().zip(&statuses) {
            belief.reveal(e, s);
        }
        let node = self
            .bound
            .after_start(inst, &belief, &outcome_key(inst, &reveal, &statuses))?;
        let mut cur = Cursor {
            node,
            belief,
            acc: Rational::zero(),
            last: None,
        };
        loop {
            match self.run_until_chance(&mut cur, &mut trace)? {
                Stop::Terminal { label, cost } => return Ok((label, cost)),
                Stop::Chance { reveal } => {
                    let statuses: Vec<EdgeStatus> = reveal.iter().map(|e| status[e.0]).collect();
                    for (&e, &s) in reveal.iter().zip(&statuses) {
                        cur.belief.reveal(e, s);
                    }
                    let key = outcome_key(inst, &reveal, &statuses);
                    cur.node = self.bound.advance(inst, &cur.belief, cur.node, &key)?;
                }
            }
        }
    }
}

/// Exact expected cost by recursion over observation outcomes, weighting
/// each branch by its conditional probability (posterior for dependent
/// instances). No weather enumeration is needed.
pub fn evaluate_exact(inst: &CtpInstance, policy: &Policy) -> Result<EvalResult, PolicyError> {
    let bound = Bound::new(inst, policy)?;
    let walker = Walker {
        inst,
        bound: &bound,
    };
    let belief = Belief::initial(inst);
    let reveal = belief.unknown_incident(inst, inst.source());
    let mut sink = BTreeMap::new();
    let cur = Cursor {
        node: 0,
        belief,
        acc: Rational::zero(),
        last: None,
    };
    walker.branch(cur, true, &reveal, Rational::one(), &mut sink)?;
    Ok(EvalResult::from_sink(sink))
}

/// Exact expected cost as Σ_w p_w C(π, w) over the enumerated weathers.
pub fn evaluate_by_weathers(
    inst: &CtpInstance,
    policy: &Policy,
    cap: u64,
) -> Result<EvalResult, PolicyError> {
    let bound = Bound::new(inst, policy)?;
    let walker = Walker {
        inst,
        bound: &bound,
    };
    let mut sink: BTreeMap<String, (Rational, Cost)> = BTreeMap::new();
    for w in inst.weather_support(cap)? {
        let (label, cost) = walker.run(&w.status, None)?;
        let slot = sink
            .entry(label)
            .or_insert_with(|| (Rational::zero(), Cost::zero()));
        slot.1 = slot.1.clone() + cost.scale(&w.probability);
        slot.0 += &w.probability;
    }
    Ok(EvalResult::from_sink(sink))
}

/// Executes the policy on one weather, recording every action.
pub fn run_on_weather(
    inst: &CtpInstance,
    policy: &Policy,
    weather: &Weather,
) -> Result<RunResult, PolicyError> {
    let bound = Bound::new(inst, policy)?;
    let walker = Walker {
        inst,
        bound: &bound,
    };
    let mut actions = Vec::new();
    let (label, cost) = walker.run(&weather.status, Some(&mut actions))?;
    Ok(RunResult {
        cost,
        label,
        actions,
    })
}

/// Seeded Monte Carlo estimate of the expected cost: (mean, standard error).
/// Trial `i` draws its weather from ChaCha8 seeded with `seed` on stream `i`,
/// so results do not depend on scheduling.
pub fn simulate(
    inst: &CtpInstance,
    policy: &Policy,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64), PolicyError> {
    assert!(trials >= 1, "simulate needs at least one trial");
    let bound = Bound::new(inst, policy)?;
    let walker = Walker {
        inst,
        bound: &bound,
    };
    let costs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let status = inst.sample_statuses_with(&mut rng);
            walker.run(&status, None).map(|(_, c)| c.to_f64())
        })
        .collect::<Result<_, _>>()?;
    let n = trials as f64;
    let mean = costs.iter().sum::<f64>() / n;
    if trials == 1 || !mean.is_finite() {
        return Ok((mean, 0.0));
    }
    let var = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Materializes a policy as an explicit decision tree over its reachable
/// beliefs. Beliefs reached along several branches share one node.
pub fn to_tree(inst: &CtpInstance, policy: &Policy) -> Result<DecisionTree, PolicyError> {
    let rule = match policy {
        Policy::Tree(t) => return Ok(t.clone()),
        Policy::Reference(spec) => spec.bind(inst)?,
    };
    let mut builder = TreeBuilder {
        inst,
        rule: rule.as_ref(),
        nodes: Vec::new(),
        memo: HashMap::new(),
    };
    let start = Belief::initial(inst);
    let reveal = start.unknown_incident(inst, inst.source());
    let root = builder.push(TreeNode {
        key: describe_belief(inst, &start),
        kind: NodeKind::Observe,
        children: BTreeMap::new(),
    });
    let children = builder.outcomes(&start, &reveal)?;
    builder.nodes[root].children = children;
    Ok(DecisionTree {
        root,
        nodes: builder.nodes,
    })
}

struct TreeBuilder<'a> {
    inst: &'a CtpInstance,
    rule: &'a dyn Rule,
    nodes: Vec<TreeNode>,
    memo: HashMap<Belief, usize>,
}

impl TreeBuilder<'_> {
    fn push(&mut self, node: TreeNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn outcomes(
        &mut self,
        belief: &Belief,
        reveal: &[EdgeId],
    ) -> Result<BTreeMap<String, usize>, PolicyError> {
        let mut children = BTreeMap::new();
        if reveal.is_empty() {
            children.insert(String::new(), self.build(belief.clone())?);
            return Ok(children);
        }
        for (statuses, _) in self.inst.reveal_distribution(&belief.known, reveal) {
            let mut next = belief.clone();
            for (&e, &s) in reveal.iter().zip(&statuses) {
                next.reveal(e, s);
            }
            children.insert(outcome_key(self.inst, reveal, &statuses), self.build(next)?);
        }
        Ok(children)
    }

    fn build(&mut self, belief: Belief) -> Result<usize, PolicyError> {
        if let Some(&id) = self.memo.get(&belief) {
            return Ok(id);
        }
        let inst = self.inst;
        let key = describe_belief(inst, &belief);
        if belief.position == inst.target() {
            let id = self.push(TreeNode {
                key,
                kind: NodeKind::Done,
                children: BTreeMap::new(),
            });
            self.memo.insert(belief, id);
            return Ok(id);
        }
        let Some(action) = self.rule.decide(inst, &belief)? else {
            let id = self.push(TreeNode {
                key,
                kind: NodeKind::Stuck,
                children: BTreeMap::new(),
            });
            self.memo.insert(belief, id);
            return Ok(id);
        };
        check_legal(inst, &belief, &action)?;
        let id = self.push(TreeNode {
            key,
            kind: NodeKind::Act(action.clone()),
            children: BTreeMap::new(),
        });
        self.memo.insert(belief.clone(), id);
        let children = match action {
            Action::Move(e) => {
                let mut next = belief;
                next.position = inst
                    .edge(e)
                    .traverse_from(next.position)
                    .expect("legal move");
                let reveal = if next.position == inst.target() {
                    Vec::new()
                } else {
                    next.unknown_incident(inst, next.position)
                };
                self.outcomes(&next, &reveal)?
            }
            Action::Sense(e) => {
                let reveal = if belief.status(e).is_none() {
                    vec![e]
                } else {
                    Vec::new()
                };
                self.outcomes(&belief, &reveal)?
            }
            Action::GiveUpToDefault { .. } | Action::Halt => BTreeMap::new(),
        };
        self.nodes[id].children = children;
        Ok(id)
    }
}
