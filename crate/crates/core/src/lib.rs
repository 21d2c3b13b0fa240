//! Exact solvers, reference policies, gadget formulas and hardness-reduction
//! generators for the Canadian Traveler Problem and its dependent and
//! sensing variants. All costs and probabilities are exact rationals.

pub mod gadgets;
pub mod model;
pub mod numeric;
pub mod policy;
pub mod reductions;
pub mod solve;

pub use model::{
    Belief, CtpInstance, DependencyNet, EdgeId, EdgeSpec, EdgeStatus, InstanceBuilder, ModelError,
    SensingCostMap, Variant, VertexId, Weather, DEFAULT_ENUMERATION_CAP,
};
pub use numeric::{q, Cost, Rational};
pub use policy::{Action, DecisionTree, Policy, PolicyError, PolicySpec};
pub use solve::{OptResult, QbfFormula, SolveError};
