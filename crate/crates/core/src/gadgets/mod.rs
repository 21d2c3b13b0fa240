//! Baiting and observation gadgets, their closed-form cost statistics, and
//! small harness instances that embed one gadget between a source and t.
//!
//! Naming: a gadget built with prefix `P` owns every vertex and edge whose
//! name starts with `P.`; reference policies find their way around by name.

mod formulas;
mod harness;

pub use formulas::{
    baiting_c_pi, baiting_c_pi_j, og_shortcut_expectation, series_stats, w2_bg1, w2_og1, w2_series,
    SeriesKind, SeriesStats,
};
pub use harness::{baiting_harness, exam_escape_harness, observation_harness};

use serde::{Deserialize, Serialize};

use crate::model::{EdgeId, InstanceBuilder, ModelError, VertexId};
use crate::numeric::{q, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GadgetError {
    #[error("{0}")]
    Param(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// 2^⌈log₂ x⌉ − 1.
fn power_minus_one(x: &Rational) -> u64 {
    let exp = x.ceil_log2();
    assert!((0..63).contains(&exp), "gadget size out of range");
    (1u64 << exp) - 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaitingParams {
    pub l: Rational,
    /// Number of internal vertices; N + 1 is a power of two with N + 1 ≥ 4L.
    pub n: u64,
}

impl BaitingParams {
    pub fn new(l: &Rational) -> Result<Self, GadgetError> {
        if *l <= Rational::one() {
            return Err(GadgetError::Param(format!(
                "baiting gadget needs L > 1 (got {l})"
            )));
        }
        Ok(BaitingParams {
            l: l.clone(),
            n: power_minus_one(&(l * &Rational::integer(4))),
        })
    }

    /// Cost of one of the N + 1 path sections.
    pub fn section(&self) -> Rational {
        &self.l / &Rational::integer(self.n as i64 + 1)
    }

    /// 2^-N.
    pub fn q(&self) -> Rational {
        Rational::pow2(-(self.n as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationParams {
    pub l: Rational,
    /// 5L/8, the cost of each edge through the observation vertex.
    pub l1: Rational,
    pub n: u64,
    /// N of the inner 3L/2 gadget.
    pub n1: u64,
}

impl ObservationParams {
    pub fn new(l: &Rational) -> Result<Self, GadgetError> {
        if *l <= Rational::integer(8) {
            return Err(GadgetError::Param(format!(
                "observation gadget needs L > 8 (got {l})"
            )));
        }
        let n = BaitingParams::new(l)?.n;
        let n1 = BaitingParams::new(&(l * &q(3, 2)))?.n;
        Ok(ObservationParams {
            l: l.clone(),
            l1: l * &q(5, 8),
            n,
            n1,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GadgetKind {
    Baiting,
    Observation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetHandle {
    pub kind: GadgetKind,
    pub prefix: String,
    pub entry: VertexId,
    pub exit: VertexId,
    pub observation: Option<VertexId>,
    /// Where the shortcuts lead.
    pub target: VertexId,
    /// Vertices created by the builder.
    pub vertices: Vec<VertexId>,
    /// Edges created by the builder, in insertion order.
    pub edges: Vec<EdgeId>,
}

/// Adds BG(u, v) with parameter L: the path u, P.v1 .. P.vN, v in N + 1
/// sections of cost L/(N+1) (edges P.e0 .. P.eN), a zero-cost blocking-1/2
/// shortcut P.si from every P.vi to t, and cost-L sure shortcuts P.su, P.sv
/// from u and v.
pub fn build_baiting(
    b: &mut InstanceBuilder,
    prefix: &str,
    l: &Rational,
    u: VertexId,
    v: VertexId,
    t: VertexId,
) -> Result<GadgetHandle, GadgetError> {
    let params = BaitingParams::new(l)?;
    let section = params.section();
    let vertices: Vec<VertexId> = (1..=params.n)
        .map(|i| b.add_vertex(format!("{prefix}.v{i}")))
        .collect();
    let mut chain = Vec::with_capacity(vertices.len() + 2);
    chain.push(u);
    chain.extend(&vertices);
    chain.push(v);
    let mut edges = Vec::new();
    for (k, pair) in chain.windows(2).enumerate() {
        edges.push(b.add_sure(format!("{prefix}.e{k}"), pair[0], pair[1], section.clone()));
    }
    for (i, &vi) in vertices.iter().enumerate() {
        edges.push(b.add_uncertain(
            format!("{prefix}.s{}", i + 1),
            vi,
            t,
            Rational::zero(),
            Rational::half(),
        ));
    }
    edges.push(b.add_sure(format!("{prefix}.su"), u, t, l.clone()));
    edges.push(b.add_sure(format!("{prefix}.sv"), v, t, l.clone()));
    Ok(GadgetHandle {
        kind: GadgetKind::Baiting,
        prefix: prefix.to_string(),
        entry: u,
        exit: v,
        observation: None,
        target: t,
        vertices,
        edges,
    })
}

/// Adds OG(u, v, o) with parameter L > 8.
///
/// BG1 = BG(u, P.v1) with L, BG2 = BG(P.v1, P.v2) with 3L/2 (its P.bg2.sv
/// is the 3L/2 shortcut from v2), edges P.v2v3 (0, blocking 3/4), P.v3o and
/// P.ov4 (L1 = 5L/8, sure), P.v4v1 (0, blocking 3/4), P.v1v1p (1, sure) and
/// the closing BG3 = BG(P.v1p, v) with L. The closing gadget ends at the
/// exit v rather than at u.
pub fn build_observation(
    b: &mut InstanceBuilder,
    prefix: &str,
    l: &Rational,
    u: VertexId,
    v: VertexId,
    o: VertexId,
    t: VertexId,
) -> Result<GadgetHandle, GadgetError> {
    let params = ObservationParams::new(l)?;
    let v1 = b.add_vertex(format!("{prefix}.v1"));
    let v2 = b.add_vertex(format!("{prefix}.v2"));
    let v3 = b.add_vertex(format!("{prefix}.v3"));
    let v4 = b.add_vertex(format!("{prefix}.v4"));
    let v1p = b.add_vertex(format!("{prefix}.v1p"));
    let mut vertices = vec![v1, v2, v3, v4, v1p];
    let mut edges = Vec::new();
    let bg1 = build_baiting(b, &format!("{prefix}.bg1"), l, u, v1, t)?;
    let bg2 = build_baiting(b, &format!("{prefix}.bg2"), &(l * &q(3, 2)), v1, v2, t)?;
    for g in [&bg1, &bg2] {
        vertices.extend(&g.vertices);
        edges.extend(&g.edges);
    }
    let three_quarters = q(3, 4);
    edges.push(b.add_uncertain(
        format!("{prefix}.v2v3"),
        v2,
        v3,
        Rational::zero(),
        three_quarters.clone(),
    ));
    edges.push(b.add_sure(format!("{prefix}.v3o"), v3, o, params.l1.clone()));
    edges.push(b.add_sure(format!("{prefix}.ov4"), o, v4, params.l1.clone()));
    edges.push(b.add_uncertain(
        format!("{prefix}.v4v1"),
        v4,
        v1,
        Rational::zero(),
        three_quarters,
    ));
    edges.push(b.add_sure(format!("{prefix}.v1v1p"), v1, v1p, Rational::one()));
    let bg3 = build_baiting(b, &format!("{prefix}.bg3"), l, v1p, v, t)?;
    vertices.extend(&bg3.vertices);
    edges.extend(&bg3.edges);
    Ok(GadgetHandle {
        kind: GadgetKind::Observation,
        prefix: prefix.to_string(),
        entry: u,
        exit: v,
        observation: Some(o),
        target: t,
        vertices,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EdgeStatus;
    use crate::numeric::Cost;

    fn gadget(l: Rational) -> Result<(InstanceBuilder, GadgetHandle), GadgetError> {
        let mut b = InstanceBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        let t = b.add_vertex("t");
        let h = build_baiting(&mut b, "bg", &l, u, v, t)?;
        Ok((b, h))
    }

    #[test]
    fn baiting_counts_at_two() {
        let (b, h) = gadget(q(2, 1)).unwrap();
        assert_eq!(h.vertices.len(), 7);
        let path: Vec<_> = b
            .edges
            .iter()
            .filter(|e| e.name.starts_with("bg.e"))
            .collect();
        assert_eq!(path.len(), 8);
        assert!(path.iter().all(|e| e.cost == Cost::Finite(q(1, 4))
            && e.forced_status() == Some(EdgeStatus::Traversable)));
        let coins = b
            .edges
            .iter()
            .filter(|e| e.blocking_prior == q(1, 2))
            .count();
        assert_eq!(coins, 7);
        let shortcuts = b
            .edges
            .iter()
            .filter(|e| e.cost == Cost::Finite(q(2, 1)))
            .count();
        assert_eq!(shortcuts, 2);
    }

    #[test]
    fn baiting_n_values() {
        assert_eq!(BaitingParams::new(&q(24, 1)).unwrap().n, 127);
        assert_eq!(BaitingParams::new(&q(3, 2)).unwrap().n, 7);
        assert!(gadget(q(1, 1)).is_err());
    }

    #[test]
    fn observation_params() {
        let p = ObservationParams::new(&q(24, 1)).unwrap();
        assert_eq!((p.l1.clone(), p.n, p.n1), (q(15, 1), 127, 255));
        assert_eq!(ObservationParams::new(&q(9, 1)).unwrap().l1, q(45, 8));
        assert!(ObservationParams::new(&q(8, 1)).is_err());
    }

    #[test]
    fn observation_wiring() {
        let mut b = InstanceBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        let o = b.add_vertex("o");
        let t = b.add_vertex("t");
        let h = build_observation(&mut b, "og", &q(9, 1), u, v, o, t).unwrap();
        assert_eq!(h.entry, u);
        assert_eq!(h.exit, v);
        let e = &b.edges[b.edge("og.bg3.sv").unwrap().0];
        assert_eq!(e.tail, v);
        let e = &b.edges[b.edge("og.bg2.sv").unwrap().0];
        assert_eq!(
            (e.cost.clone(), b.vertices[e.tail.0].as_str()),
            (Cost::Finite(q(27, 2)), "og.v2")
        );
        assert_eq!(
            b.edges[b.edge("og.v4v1").unwrap().0].blocking_prior,
            q(3, 4)
        );
    }
}
