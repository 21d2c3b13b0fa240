//! Policies: explicit decision trees and named reference rules, with exact
//! evaluation (recursion over observation outcomes or over weathers) and
//! seeded Monte Carlo simulation.

mod eval;
pub mod reference;
mod tree;

pub(crate) use eval::{describe_belief, outcome_key};
pub use eval::{
    evaluate_by_weathers, evaluate_exact, run_on_weather, simulate, to_tree, EvalResult, Outcome,
    RunResult,
};
pub use reference::{reference_policy, PolicySpec, Rule, REFERENCE_NAMES};
pub use tree::{DecisionTree, NodeKind, TreeNode};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{CtpInstance, EdgeId, ModelError, VertexId};
use crate::numeric::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Move(EdgeId),
    Sense(EdgeId),
    /// Leaves the modeled region for an abstract fallback of known
    /// expected cost `charge` (a designated always-open default route).
    GiveUpToDefault {
        charge: Rational,
    },
    Halt,
}

impl Action {
    /// Human-readable form, with moves oriented away from `from`.
    pub fn describe(&self, inst: &CtpInstance, from: VertexId) -> String {
        match self {
            Action::Move(e) => {
                let spec = inst.edge(*e);
                let to = spec.other_end(from).unwrap_or(spec.head);
                let from = if spec.is_incident(from) {
                    from
                } else {
                    spec.tail
                };
                format!("Move({},{})", inst.vertex_name(from), inst.vertex_name(to))
            }
            Action::Sense(e) => format!("Sense({})", inst.edge_name(*e)),
            Action::GiveUpToDefault { charge } => {
                format!("GiveUpToDefault({})", charge.to_compact())
            }
            Action::Halt => "Halt".to_string(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Move(e) => write!(f, "Move({e})"),
            Action::Sense(e) => write!(f, "Sense({e})"),
            Action::GiveUpToDefault { charge } => write!(f, "GiveUpToDefault({charge})"),
            Action::Halt => write!(f, "Halt"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Tree(DecisionTree),
    Reference(PolicySpec),
}

impl From<DecisionTree> for Policy {
    fn from(t: DecisionTree) -> Self {
        Policy::Tree(t)
    }
}

impl From<PolicySpec> for Policy {
    fn from(s: PolicySpec) -> Self {
        Policy::Reference(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("illegal action {action} at belief {belief}")]
    IllegalAction { action: String, belief: String },
    #[error("policy has no rule for belief {belief}")]
    NoRule { belief: String },
    #[error("decision tree has no branch for outcome {outcome:?} at belief {belief}")]
    MissingBranch { belief: String, outcome: String },
    #[error("policy revisits belief {belief} without learning anything")]
    Loop { belief: String },
    #[error("unknown reference policy {0:?}")]
    UnknownPolicy(String),
    #[error("policy {policy}: bad parameter {param:?}: {reason}")]
    BadParam {
        policy: String,
        param: String,
        reason: String,
    },
    #[error("policy {policy} does not fit this instance: {reason}")]
    Binding { policy: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
