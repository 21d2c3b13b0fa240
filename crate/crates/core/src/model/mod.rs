//! Core data model shared by every CTP variant: the instance graph with
//! edge priors, the optional dependency network and sensing costs, weather
//! enumeration and sampling, and belief bookkeeping.

mod belief;
mod depnet;
mod instance;
pub mod json;
pub mod random;
mod weather;

pub use belief::Belief;
pub use depnet::{DependencyNet, NetVariable};
pub use instance::{CtpInstance, InstanceBuilder, SensingCostMap, Variant};
pub use weather::{Weather, DEFAULT_ENUMERATION_CAP};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::{Cost, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v#{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeStatus {
    Traversable,
    Blocked,
}

impl EdgeStatus {
    pub fn from_blocked(blocked: bool) -> Self {
        if blocked {
            EdgeStatus::Blocked
        } else {
            EdgeStatus::Traversable
        }
    }

    pub fn is_blocked(self) -> bool {
        self == EdgeStatus::Blocked
    }

    pub fn short(self) -> char {
        match self {
            EdgeStatus::Traversable => 'T',
            EdgeStatus::Blocked => 'B',
        }
    }
}

/// One edge of a CTP graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub name: String,
    pub tail: VertexId,
    pub head: VertexId,
    pub directed: bool,
    pub cost: Cost,
    /// Probability that the edge is blocked. 0 and 1 mean the status is
    /// known a priori.
    pub blocking_prior: Rational,
}

impl EdgeSpec {
    pub fn is_incident(&self, v: VertexId) -> bool {
        self.tail == v || self.head == v
    }

    /// Where traversing this edge from `from` leads, honoring direction.
    pub fn traverse_from(&self, from: VertexId) -> Option<VertexId> {
        if from == self.tail {
            Some(self.head)
        } else if from == self.head && !self.directed {
            Some(self.tail)
        } else {
            None
        }
    }

    /// The endpoint opposite `v`, ignoring direction.
    pub fn other_end(&self, v: VertexId) -> Option<VertexId> {
        if v == self.tail {
            Some(self.head)
        } else if v == self.head {
            Some(self.tail)
        } else {
            None
        }
    }

    /// Status fixed by the prior, if any.
    pub fn forced_status(&self) -> Option<EdgeStatus> {
        if self.blocking_prior.is_zero() {
            Some(EdgeStatus::Traversable)
        } else if self.blocking_prior.is_one() {
            Some(EdgeStatus::Blocked)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate vertex name {0:?}")]
    DuplicateVertex(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdge(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("edge {edge:?} has a dangling endpoint")]
    DanglingEndpoint { edge: String },
    #[error("edge {edge:?} is a self-loop")]
    SelfLoop { edge: String },
    #[error("edge {edge:?}: probability out of range ({value})")]
    ProbabilityOutOfRange { edge: String, value: Rational },
    #[error("edge {edge:?}: negative cost {value}")]
    NegativeCost { edge: String, value: Rational },
    #[error("source and target are missing or equal")]
    BadTerminals,
    #[error("graph is not connected")]
    Disconnected,
    #[error("target is unreachable from source even with every edge traversable")]
    TargetUnreachable,
    #[error("dependency net: unknown parent index {parent} of variable {variable:?}")]
    UnknownParent { variable: String, parent: usize },
    #[error("dependency net is cyclic")]
    CyclicDependency,
    #[error("dependency net: variable {variable:?} has in-degree {degree} above the declared bound {bound}")]
    InDegreeExceeded {
        variable: String,
        degree: usize,
        bound: usize,
    },
    #[error("dependency net: variable {variable:?} has {found} CPT rows, expected {expected}")]
    CptShape {
        variable: String,
        found: usize,
        expected: usize,
    },
    #[error(
        "dependency net: variable {variable:?}, row {row}: CPT row not normalized (sums to {sum})"
    )]
    CptNotNormalized {
        variable: String,
        row: usize,
        sum: Rational,
    },
    #[error("dependency net: variable {variable:?}, row {row}: probability out of range")]
    CptOutOfRange { variable: String, row: usize },
    #[error("dependency net: edge {edge:?} is driven by more than one variable")]
    EdgeCoveredTwice { edge: String },
    #[error("uncertain edge {edge:?} is not covered by the dependency net")]
    UncoveredEdge { edge: String },
    #[error("sensing entry ({vertex:?}, {edge:?}) has a negative cost")]
    BadSensingCost { vertex: String, edge: String },
    #[error("weather enumeration needs {required} assignments, cap allows {allowed}")]
    EnumerationCap { required: String, allowed: u64 },
    #[error("observe at {got:?} but the belief is positioned at {expected:?}")]
    VertexMismatch { expected: String, got: String },
    #[error("cannot merge {0:?} with itself")]
    MergeSame(String),
    #[error("cannot merge the source with the target")]
    MergeTerminals,
    #[error("merging would turn edge {edge:?} into a self-loop")]
    MergeSelfLoop { edge: String },
    #[error("instance JSON: {0}")]
    Json(String),
}
