use std::cmp::Reverse;
use std::collections::{hash_map, BTreeMap, BinaryHeap, HashMap};

use serde::Serialize;

use super::SolveError;
use crate::model::{Belief, CtpInstance, EdgeId, EdgeStatus, Variant, VertexId};
use crate::numeric::{Cost, Rational};
use crate::policy::{Action, DecisionTree, NodeKind, Policy, TreeNode};

/// Default bound on memoized belief states.
pub const DEFAULT_STATE_CAP: usize = 1 << 21;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub beliefs_expanded: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub optimal_cost: Cost,
    /// The action right after the initial observation, when it does not
    /// depend on what is seen at the source.
    pub optimal_first_action: Option<Action>,
    pub policy: DecisionTree,
    pub stats: SolveStats,
}

impl OptResult {
    pub fn as_policy(&self) -> Policy {
        Policy::Tree(self.policy.clone())
    }
}

type Key = (VertexId, Box<[u8]>);

struct Entry {
    value: Cost,
    action: Option<Action>,
}

/// Dijkstra label: smaller is better. `tie` orders by edge id, moves
/// before senses of the same edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Label {
    value: Rational,
    hops: u32,
    tie: usize,
}

pub(crate) struct Engine<'a> {
    inst: &'a CtpInstance,
    cap: usize,
    memo: HashMap<Key, Entry>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(inst: &'a CtpInstance, cap: usize) -> Self {
        Engine {
            inst,
            cap,
            memo: HashMap::new(),
        }
    }

    fn key(&self, b: &Belief) -> Key {
        let n = self.inst.uncertain_edges().len();
        let mut packed = vec![0u8; n.div_ceil(4)];
        for (i, &e) in self.inst.uncertain_edges().iter().enumerate() {
            let code = match b.status(e) {
                None => 0,
                Some(EdgeStatus::Traversable) => 1,
                Some(EdgeStatus::Blocked) => 2,
            };
            packed[i / 4] |= code << (2 * (i % 4));
        }
        (b.position, packed.into_boxed_slice())
    }

    fn is_frontier(&self, b: &Belief, v: VertexId) -> bool {
        self.inst.incident(v).iter().any(|&e| b.status(e).is_none())
    }

    /// V(b): optimal expected cost-to-go from a belief whose position has
    /// already been observed.
    fn value(&mut self, b: &Belief) -> Result<Cost, SolveError> {
        if b.position == self.inst.target() {
            return Ok(Cost::zero());
        }
        let key = self.key(b);
        if let Some(entry) = self.memo.get(&key) {
            return Ok(entry.value.clone());
        }
        self.solve_layer(b)?;
        Ok(self.memo[&key].value.clone())
    }

    /// Σ P(o | b) · V(b + o) over the joint outcomes of `reveal`.
    fn chance(&mut self, b: &Belief, reveal: &[EdgeId]) -> Result<Cost, SolveError> {
        if reveal.is_empty() {
            return self.value(b);
        }
        let mut total = Cost::zero();
        for (statuses, p) in self.inst.reveal_distribution(&b.known, reveal) {
            let mut next = b.clone();
            for (&e, &s) in reveal.iter().zip(&statuses) {
                next.reveal(e, s);
            }
            let v = self.value(&next)?;
            if !v.is_finite() {
                return Ok(Cost::Infinite);
            }
            total = total + v.scale(&p);
        }
        Ok(total)
    }

    /// Value of arriving at `v` (observing its unknown edges there).
    fn arrive(&mut self, b: &Belief, v: VertexId) -> Result<Cost, SolveError> {
        if v == self.inst.target() {
            return Ok(Cost::zero());
        }
        let mut next = b.clone();
        next.position = v;
        let reveal = next.unknown_incident(self.inst, v);
        self.chance(&next, &reveal)
    }

    /// Solves every belief sharing `b`'s knowledge that is reachable from
    /// its position without observing anything new.
    fn solve_layer(&mut self, b: &Belief) -> Result<(), SolveError> {
        let inst = self.inst;
        let t = inst.target();
        let usable = |e: EdgeId| b.is_known_open(e) && inst.edge(e).cost.is_finite();

        let mut interior = vec![b.position];
        let mut index: HashMap<VertexId, usize> = HashMap::from([(b.position, 0)]);
        let mut exits: BTreeMap<VertexId, Option<Cost>> = BTreeMap::new();
        let mut i = 0;
        while i < interior.len() {
            let x = interior[i];
            i += 1;
            for &e in inst.incident(x) {
                let Some(y) = inst.edge(e).traverse_from(x).filter(|_| usable(e)) else {
                    continue;
                };
                if y == t || self.is_frontier(b, y) {
                    exits.entry(y).or_insert(None);
                } else if let hash_map::Entry::Vacant(slot) = index.entry(y) {
                    slot.insert(interior.len());
                    interior.push(y);
                }
            }
        }
        for (&y, slot) in exits.iter_mut() {
            *slot = Some(self.arrive(b, y)?);
        }

        let mut best: Vec<Option<(Label, Action)>> = vec![None; interior.len()];
        let offer = |best: &mut Vec<Option<(Label, Action)>>,
                     idx: usize,
                     label: Label,
                     action: Action|
         -> bool {
            if best[idx].as_ref().is_none_or(|(l, _)| label < *l) {
                best[idx] = Some((label, action));
                true
            } else {
                false
            }
        };
        for (idx, &x) in interior.iter().enumerate() {
            for &e in inst.incident(x) {
                let Some(y) = inst.edge(e).traverse_from(x).filter(|_| usable(e)) else {
                    continue;
                };
                if let Some(Some(Cost::Finite(v))) = exits.get(&y) {
                    let c = inst
                        .edge(e)
                        .cost
                        .as_finite()
                        .expect("usable edges are finite");
                    offer(
                        &mut best,
                        idx,
                        Label {
                            value: c + v,
                            hops: 1,
                            tie: 2 * e.0,
                        },
                        Action::Move(e),
                    );
                }
            }
            if let Variant::Sensing(map) = inst.variant() {
                let senses: Vec<(EdgeId, Rational)> = map
                    .available_at(x)
                    .filter(|(e, _)| b.status(*e).is_none())
                    .map(|(e, c)| (e, c.clone()))
                    .collect();
                for (e, c) in senses {
                    let mut at = b.clone();
                    at.position = x;
                    if let Cost::Finite(v) = self.chance(&at, &[e])? {
                        offer(
                            &mut best,
                            idx,
                            Label {
                                value: &c + &v,
                                hops: 1,
                                tie: 2 * e.0 + 1,
                            },
                            Action::Sense(e),
                        );
                    }
                }
            }
        }

        let mut heap = BinaryHeap::new();
        for (idx, slot) in best.iter().enumerate() {
            if let Some((label, _)) = slot {
                heap.push(Reverse((label.clone(), idx)));
            }
        }
        let mut settled = vec![false; interior.len()];
        while let Some(Reverse((label, idx))) = heap.pop() {
            if settled[idx] || best[idx].as_ref().map(|(l, _)| l) != Some(&label) {
                continue;
            }
            settled[idx] = true;
            let x = interior[idx];
            for &e in inst.incident(x) {
                let spec = inst.edge(e);
                let Some(z) = spec.other_end(x) else { continue };
                if spec.traverse_from(z) != Some(x) || !usable(e) {
                    continue;
                }
                let Some(&zi) = index.get(&z) else { continue };
                if settled[zi] {
                    continue;
                }
                let c = spec.cost.as_finite().expect("usable edges are finite");
                let cand = Label {
                    value: c + &label.value,
                    hops: label.hops + 1,
                    tie: 2 * e.0,
                };
                if offer(&mut best, zi, cand.clone(), Action::Move(e)) {
                    heap.push(Reverse((cand, zi)));
                }
            }
        }

        let mut at = b.clone();
        for (x, slot) in interior.into_iter().zip(best) {
            at.position = x;
            let entry = match slot {
                Some((label, action)) => Entry {
                    value: Cost::Finite(label.value),
                    action: Some(action),
                },
                None => Entry {
                    value: Cost::Infinite,
                    action: None,
                },
            };
            let key = self.key(&at);
            self.memo.insert(key, entry);
        }
        if self.memo.len() > self.cap {
            return Err(SolveError::CapExceeded { cap: self.cap });
        }
        Ok(())
    }

    pub(crate) fn run(mut self) -> Result<OptResult, SolveError> {
        let inst = self.inst;
        let start = Belief::initial(inst);
        let reveal = start.unknown_incident(inst, inst.source());
        let optimal_cost = if inst.source() == inst.target() {
            Cost::zero()
        } else {
            self.chance(&start, &reveal)?
        };
        let mut builder = TreeBuilder {
            nodes: Vec::new(),
            ids: HashMap::new(),
        };
        let root = builder.push(TreeNode {
            key: String::new(),
            kind: NodeKind::Observe,
            children: BTreeMap::new(),
        });
        let children = self.outcomes(&mut builder, &start, &reveal)?;
        builder.nodes[root].children = children;
        let policy = DecisionTree {
            root,
            nodes: builder.nodes,
        };
        Ok(OptResult {
            optimal_cost,
            optimal_first_action: policy.first_action(),
            policy,
            stats: SolveStats {
                beliefs_expanded: self.memo.len(),
            },
        })
    }

    fn outcomes(
        &mut self,
        tb: &mut TreeBuilder,
        b: &Belief,
        reveal: &[EdgeId],
    ) -> Result<BTreeMap<String, usize>, SolveError> {
        let mut children = BTreeMap::new();
        if reveal.is_empty() {
            children.insert(String::new(), self.node(tb, b.clone())?);
            return Ok(children);
        }
        for (statuses, _) in self.inst.reveal_distribution(&b.known, reveal) {
            let mut next = b.clone();
            for (&e, &s) in reveal.iter().zip(&statuses) {
                next.reveal(e, s);
            }
            let key = crate::policy::outcome_key(self.inst, reveal, &statuses);
            children.insert(key, self.node(tb, next)?);
        }
        Ok(children)
    }

    fn node(&mut self, tb: &mut TreeBuilder, b: Belief) -> Result<usize, SolveError> {
        let inst = self.inst;
        let key = self.key(&b);
        if let Some(&id) = tb.ids.get(&key) {
            return Ok(id);
        }
        let label = crate::policy::describe_belief(inst, &b);
        if b.position == inst.target() {
            let id = tb.push(TreeNode {
                key: label,
                kind: NodeKind::Done,
                children: BTreeMap::new(),
            });
            tb.ids.insert(key, id);
            return Ok(id);
        }
        self.value(&b)?;
        let action = self.memo[&key].action.clone();
        let Some(action) = action else {
            let id = tb.push(TreeNode {
                key: label,
                kind: NodeKind::Stuck,
                children: BTreeMap::new(),
            });
            tb.ids.insert(key, id);
            return Ok(id);
        };
        let id = tb.push(TreeNode {
            key: label,
            kind: NodeKind::Act(action.clone()),
            children: BTreeMap::new(),
        });
        tb.ids.insert(key, id);
        let children = match action {
            Action::Move(e) => {
                let mut next = b;
                next.position = inst
                    .edge(e)
                    .traverse_from(next.position)
                    .expect("solver moves are legal");
                let reveal = if next.position == inst.target() {
                    Vec::new()
                } else {
                    next.unknown_incident(inst, next.position)
                };
                self.outcomes(tb, &next, &reveal)?
            }
            Action::Sense(e) => self.outcomes(tb, &b, &[e])?,
            Action::GiveUpToDefault { .. } | Action::Halt => BTreeMap::new(),
        };
        tb.nodes[id].children = children;
        Ok(id)
    }
}

struct TreeBuilder {
    nodes: Vec<TreeNode>,
    ids: HashMap<Key, usize>,
}

impl TreeBuilder {
    fn push(&mut self, node: TreeNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

/// Runs `f` on a thread with a large stack; the solver recurses once per
/// observation along a branch.
pub(crate) fn on_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}
