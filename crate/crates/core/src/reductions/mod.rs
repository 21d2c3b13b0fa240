//! Hardness-reduction generators: QBF to dependent CTP, QBF to independent
//! CTP with its bound certificate, vertex cover to sensing CTP, and the
//! coin normalization of dyadic edges.

mod ctp;
mod ctpdep;
mod normalize;
mod sensing;

pub use ctp::{
    certificate, compute_certificate, d_pt_construction, d_pt_weather, exam_harness, exam_p1,
    qbf_to_ctp, CtpReduction, CtpReductionCertificate,
};
pub use ctpdep::{default_h, qbf_to_ctpdep, DepReduction};
pub use normalize::normalize_half_prob;
pub use sensing::{
    has_vertex_cover, named_graph, sensing_cost_bound, vc_to_sensing, SensingCertificate,
    SensingReduction, VcInstance, DEFAULT_PRECISION,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gadgets::GadgetError;
use crate::model::ModelError;
use crate::numeric::Rational;
use crate::solve::{QbfError, QbfFormula};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReductionError {
    #[error("{0}")]
    Param(String),
    #[error("bounds violated: need B0 < h < B1, got {0}")]
    BoundsViolated(Box<Bounds>),
    #[error("edge {edge}: blocking probability {p} is neither 2^-z nor 1 - 2^-z")]
    NotDyadic { edge: String, p: Rational },
    #[error(transparent)]
    Qbf(#[from] QbfError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The three values compared by the certificate check.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub b0: Rational,
    pub h: Rational,
    pub b1: Rational,
}

impl std::fmt::Display for Bounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "B0 = {} with h - B0 = {} and B1 - B0 = {}",
            self.b0.to_decimal(20),
            (&self.h - &self.b0).to_scientific(6),
            (&self.b1 - &self.b0).to_scientific(6)
        )
    }
}

/// Where a generated instance came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub version: String,
    /// SHA-256 of the canonical input text (QDIMACS or edge list).
    pub input_sha256: String,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    fn new(generator: &str, input: &str, params: &[(&str, String)]) -> Self {
        Provenance {
            generator: generator.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256: hex::encode(Sha256::digest(input.as_bytes())),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        }
    }
}

/// Appends an existential dummy variable when n is odd.
fn pad_even(formula: &QbfFormula) -> (QbfFormula, bool) {
    if formula.n.is_multiple_of(2) {
        (formula.clone(), false)
    } else {
        (
            QbfFormula {
                n: formula.n + 1,
                clauses: formula.clauses.clone(),
            },
            true,
        )
    }
}
