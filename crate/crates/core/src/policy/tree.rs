use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Action;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Chance over the observation made at the start vertex.
    Observe,
    Act(Action),
    /// The traveler stands at the target.
    Done,
    /// No feasible continuation; the branch costs infinity.
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Rendering of the belief this node was built for (informational).
    pub key: String,
    pub kind: NodeKind,
    /// Successor per observed outcome; "" when nothing new was observed.
    pub children: BTreeMap<String, usize>,
}

/// Decision tree stored as an arena. Nodes may be shared between branches
/// that reach the same belief, so the arena is in general a DAG.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: usize,
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Actions chosen right after the initial observation, one per outcome.
    pub fn first_actions(&self) -> Vec<Option<&Action>> {
        let root = self.node(self.root);
        match root.kind {
            NodeKind::Observe => root
                .children
                .values()
                .map(|&c| match &self.node(c).kind {
                    NodeKind::Act(a) => Some(a),
                    _ => None,
                })
                .collect(),
            NodeKind::Act(ref a) => vec![Some(a)],
            _ => vec![None],
        }
    }

    /// The first action if it does not depend on what is seen at the start.
    pub fn first_action(&self) -> Option<Action> {
        let actions = self.first_actions();
        let first = actions.first().copied().flatten()?;
        if actions.iter().all(|a| *a == Some(first)) {
            Some(first.clone())
        } else {
            None
        }
    }
}
