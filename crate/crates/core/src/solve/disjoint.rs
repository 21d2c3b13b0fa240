use std::collections::{BTreeMap, HashSet};

use super::{OptResult, SolveError, SolveStats};
use crate::model::{Belief, CtpInstance, EdgeId, EdgeStatus, Variant};
use crate::numeric::{Cost, Rational};
use crate::policy::{to_tree, DecisionTree, NodeKind, Policy, PolicySpec, TreeNode};

/// Largest number of paths whose orderings are enumerated.
pub const MAX_PATHS: usize = 8;

/// Splits the graph into edge-disjoint s–t paths, each listed from s.
/// Every vertex other than s and t must have degree 2.
pub fn decompose_paths(inst: &CtpInstance) -> Result<Vec<Vec<EdgeId>>, String> {
    let (s, t) = (inst.source(), inst.target());
    let mut used = HashSet::new();
    let mut paths = Vec::new();
    for &first in inst.incident(s) {
        if used.contains(&first) {
            continue;
        }
        let mut path = Vec::new();
        let mut at = s;
        let mut e = first;
        loop {
            let next = inst.edge(e).traverse_from(at).ok_or_else(|| {
                format!("edge {} cannot be crossed away from s", inst.edge_name(e))
            })?;
            used.insert(e);
            path.push(e);
            if next == t {
                break;
            }
            if next == s {
                return Err(format!("edge {} returns to s", inst.edge_name(e)));
            }
            if inst.degree(next) != 2 {
                return Err(format!(
                    "vertex {} has degree {}",
                    inst.vertex_name(next),
                    inst.degree(next)
                ));
            }
            at = next;
            e = *inst
                .incident(at)
                .iter()
                .find(|&&f| f != e)
                .expect("degree 2");
        }
        paths.push(path);
    }
    if used.len() != inst.edge_count() {
        return Err("some edges lie on no s-t path".into());
    }
    Ok(paths)
}

/// (probability the path fails, expected cost spent on it), given the
/// observed status of its first edge.
fn path_stats(inst: &CtpInstance, path: &[EdgeId], first_open: bool) -> (Rational, Rational) {
    if !first_open {
        return (Rational::one(), Rational::zero());
    }
    let cost = |e: EdgeId| {
        inst.edge(e)
            .cost
            .as_finite()
            .expect("checked finite")
            .clone()
    };
    let mut reach = Rational::one();
    let mut prefix = cost(path[0]);
    let mut expected = Rational::zero();
    for &e in &path[1..] {
        let p = &inst.edge(e).blocking_prior;
        expected += &(&reach * p) * &(&prefix * &Rational::integer(2));
        reach = &reach * &p.complement();
        prefix += &cost(e);
    }
    expected += &reach * &prefix;
    (reach.complement(), expected)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

/// Best committing policy on an edge-disjoint path graph: for every
/// outcome of the observation at s, every order of the paths is evaluated
/// in closed form and the cheapest (first in lexicographic order on ties)
/// is kept.
pub fn solve_disjoint_bruteforce(inst: &CtpInstance) -> Result<OptResult, SolveError> {
    if !matches!(inst.variant(), Variant::Independent) {
        return Err(SolveError::WrongVariant {
            solver: "solve_disjoint_bruteforce",
            expected: "independent",
            found: inst.variant().name(),
        });
    }
    let paths = decompose_paths(inst).map_err(SolveError::NotDisjoint)?;
    if paths.len() > MAX_PATHS {
        return Err(SolveError::NotDisjoint(format!(
            "{} paths exceed the limit of {MAX_PATHS}",
            paths.len()
        )));
    }
    if inst.edges().iter().any(|e| !e.cost.is_finite()) {
        return Err(SolveError::NotDisjoint(
            "infinite edge costs are not supported".into(),
        ));
    }
    let start = Belief::initial(inst);
    let reveal = start.unknown_incident(inst, inst.source());
    let orders = permutations(paths.len());
    let mut total = Cost::zero();
    let mut root_children = BTreeMap::new();
    let mut nodes = vec![TreeNode {
        key: String::new(),
        kind: NodeKind::Observe,
        children: BTreeMap::new(),
    }];
    let mut expanded = 0;
    for (statuses, p) in inst.reveal_distribution(&start.known, &reveal) {
        let mut seen = start.clone();
        for (&e, &st) in reveal.iter().zip(&statuses) {
            seen.reveal(e, st);
        }
        let stats: Vec<(Rational, Rational)> = paths
            .iter()
            .map(|path| {
                path_stats(
                    inst,
                    path,
                    seen.status(path[0]) == Some(EdgeStatus::Traversable),
                )
            })
            .collect();
        let mut best: Option<(Cost, &Vec<usize>)> = None;
        for order in &orders {
            let mut reach = Rational::one();
            let mut value = Rational::zero();
            for &i in order {
                value += &reach * &stats[i].1;
                reach = &reach * &stats[i].0;
            }
            let value = if reach.is_zero() {
                Cost::Finite(value)
            } else {
                Cost::Infinite
            };
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, order));
            }
        }
        let (value, order) = best.expect("at least one ordering");
        total = total + value.scale(&p);
        let names: Vec<&str> = order.iter().map(|&i| inst.edge_name(paths[i][0])).collect();
        let spec = PolicySpec::new("committing").with("order", names.join(","));
        let tree = to_tree(inst, &Policy::Reference(spec))?;
        expanded += tree.len();
        let key = crate::policy::outcome_key(inst, &reveal, &statuses);
        let offset = nodes.len();
        let child = tree.node(tree.root).children[&key] + offset;
        nodes.extend(tree.nodes.into_iter().map(|mut n| {
            for c in n.children.values_mut() {
                *c += offset;
            }
            n
        }));
        root_children.insert(key, child);
    }
    nodes[0].children = root_children;
    let policy = DecisionTree { root: 0, nodes };
    Ok(OptResult {
        optimal_cost: total,
        optimal_first_action: policy.first_action(),
        policy,
        stats: SolveStats {
            beliefs_expanded: expanded,
        },
    })
}
