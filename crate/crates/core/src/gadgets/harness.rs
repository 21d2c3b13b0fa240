//! Isolated gadgets wired to a source and a target. Every harness adds the
//! ambient cost-1 `fallback` edge from the source to t, standing in for the
//! rest of the graph.

use super::{build_baiting, build_observation, GadgetError};
use crate::model::{CtpInstance, InstanceBuilder};
use crate::numeric::Rational;

/// BG(u, v) with prefix `bg`, source u, and the cost-L exit shortcut
/// `bg.sv` acting as the terminal charge K = L.
pub fn baiting_harness(l: &Rational) -> Result<CtpInstance, GadgetError> {
    let mut b = InstanceBuilder::new();
    let u = b.add_vertex("u");
    let v = b.add_vertex("v");
    let t = b.add_vertex("t");
    build_baiting(&mut b, "bg", l, u, v, t)?;
    b.add_sure("fallback", u, t, Rational::one());
    b.set_source(u);
    b.set_target(t);
    Ok(b.build()?)
}

/// OG(u, v, o) with prefix `og`, source u; o has no other edges.
pub fn observation_harness(l: &Rational) -> Result<CtpInstance, GadgetError> {
    let mut b = InstanceBuilder::new();
    let u = b.add_vertex("u");
    let v = b.add_vertex("v");
    let o = b.add_vertex("o");
    let t = b.add_vertex("t");
    build_observation(&mut b, "og", l, u, v, o, t)?;
    b.add_sure("fallback", u, t, Rational::one());
    b.set_source(u);
    b.set_target(t);
    Ok(b.build()?)
}

/// The exam-section neighbourhood of an observation vertex o = r5, for
/// comparing the escape `fallback` (cost C') with probing the exam path.
///
/// o -c- r4 -r34- r3 -g23- r2 -cont2- t and o -r51- r1p -g12p- r2p -cont2p- t,
/// where c, g23, g12p block with probability p1, r34 and r51 cost 1 and the
/// continuations cost `continue_cost`.
pub fn exam_escape_harness(
    p1: &Rational,
    c_prime: &Rational,
    continue_cost: &Rational,
) -> Result<CtpInstance, GadgetError> {
    if !p1.is_proper_probability() {
        return Err(GadgetError::Param(format!(
            "p1 must lie strictly between 0 and 1 (got {p1})"
        )));
    }
    let mut b = InstanceBuilder::new();
    let o = b.add_vertex("o");
    let r4 = b.add_vertex("r4");
    let r3 = b.add_vertex("r3");
    let r2 = b.add_vertex("r2");
    let r1p = b.add_vertex("r1p");
    let r2p = b.add_vertex("r2p");
    let t = b.add_vertex("t");
    b.add_uncertain("c", o, r4, Rational::zero(), p1.clone());
    b.add_sure("r34", r4, r3, Rational::one());
    b.add_uncertain("g23", r3, r2, Rational::zero(), p1.clone());
    b.add_sure("cont2", r2, t, continue_cost.clone());
    b.add_sure("r51", o, r1p, Rational::one());
    b.add_uncertain("g12p", r1p, r2p, Rational::zero(), p1.clone());
    b.add_sure("cont2p", r2p, t, continue_cost.clone());
    b.add_sure("fallback", o, t, c_prime.clone());
    b.set_source(o);
    b.set_target(t);
    Ok(b.build()?)
}
