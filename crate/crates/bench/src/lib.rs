//! Shared fixtures for the benchmarks.

use ctp_core::gadgets::baiting_harness;
use ctp_core::model::random;
use ctp_core::reductions::qbf_to_ctpdep;
use ctp_core::solve::QbfFormula;
use ctp_core::{q, CtpInstance};

/// Baiting gadget at L = 2 with the default s-t edge.
pub fn harness() -> CtpInstance {
    baiting_harness(&q(2, 1)).expect("L = 2 is valid")
}

/// Dependent-variant instance for a small true formula.
pub fn ctpdep_small() -> CtpInstance {
    let f = QbfFormula::from_clause_text(2, "1 2|-1 -2").expect("formula parses");
    qbf_to_ctpdep(&f, None).expect("reduction builds").instance
}

pub fn toy(seed: u64) -> CtpInstance {
    random::toy(seed, 5, false)
}
