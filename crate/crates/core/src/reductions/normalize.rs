use super::ReductionError;
use crate::model::{CtpInstance, EdgeSpec, InstanceBuilder, Variant, VertexId};
use crate::numeric::{Cost, Rational};

enum Shape {
    /// Blocking 2^-z: z fair coins side by side.
    Parallel(u32),
    /// Blocking 1 − 2^-z: z fair coins one after another.
    Series(u32),
}

fn shape(e: &EdgeSpec) -> Result<Shape, ReductionError> {
    let p = &e.blocking_prior;
    if let Some(z) = p.as_inverse_power_of_two() {
        return Ok(Shape::Parallel(z));
    }
    if let Some(z) = p.complement().as_inverse_power_of_two() {
        return Ok(Shape::Series(z));
    }
    Err(ReductionError::NotDyadic {
        edge: e.name.clone(),
        p: p.clone(),
    })
}

/// Rewrites every uncertain edge into zero-cost edges of blocking 1/2.
///
/// A positive cost c is first moved onto a sure edge `{name}.c` placed after
/// the coin part, so the edge becomes tail, coins, `{name}.mc`, head. Coins
/// are named `{name}.h{k}`; series coins meet at `{name}.m{k}`. Sure edges
/// and edges already at cost 0 and 1/2 are kept as they are.
///
/// The cost split is exact when the edge is always approached from its
/// tail side, which holds for the generated graphs; an agent standing at
/// the head of a split edge no longer sees its status.
pub fn normalize_half_prob(inst: &CtpInstance) -> Result<CtpInstance, ReductionError> {
    if !matches!(inst.variant(), Variant::Independent) {
        return Err(ReductionError::Param(format!(
            "normalization needs an independent instance, got {}",
            inst.variant().name()
        )));
    }
    let mut b = InstanceBuilder::new();
    for v in inst.vertices() {
        b.add_vertex(v.clone());
    }
    for e in inst.edges() {
        if e.forced_status().is_some() {
            b.add_edge(
                e.name.clone(),
                e.tail,
                e.head,
                e.directed,
                e.cost.clone(),
                e.blocking_prior.clone(),
            );
            continue;
        }
        let cost = match &e.cost {
            Cost::Finite(c) => c.clone(),
            Cost::Infinite => {
                return Err(ReductionError::Param(format!(
                    "edge {}: uncertain edges need a finite cost",
                    e.name
                )));
            }
        };
        let shape = shape(e)?;
        if cost.is_zero() && e.blocking_prior == Rational::half() {
            b.add_edge(
                e.name.clone(),
                e.tail,
                e.head,
                e.directed,
                e.cost.clone(),
                e.blocking_prior.clone(),
            );
            continue;
        }
        let end = if cost.is_zero() {
            e.head
        } else {
            b.add_vertex(format!("{}.mc", e.name))
        };
        let coin = |b: &mut InstanceBuilder, k: u32, from: VertexId, to: VertexId| {
            b.add_edge(
                format!("{}.h{k}", e.name),
                from,
                to,
                e.directed,
                Cost::zero(),
                Rational::half(),
            );
        };
        match shape {
            Shape::Parallel(z) => (1..=z).for_each(|k| coin(&mut b, k, e.tail, end)),
            Shape::Series(z) => {
                let mut at = e.tail;
                for k in 1..=z {
                    let next = if k == z {
                        end
                    } else {
                        b.add_vertex(format!("{}.m{k}", e.name))
                    };
                    coin(&mut b, k, at, next);
                    at = next;
                }
            }
        }
        if !cost.is_zero() {
            b.add_edge(
                format!("{}.c", e.name),
                end,
                e.head,
                e.directed,
                Cost::Finite(cost),
                Rational::zero(),
            );
        }
    }
    b.set_source(inst.source());
    b.set_target(inst.target());
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::q;
    use crate::solve::solve_independent;

    fn single(p: Rational, cost: Rational) -> CtpInstance {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_uncertain("e", s, t, cost, p);
        b.add_sure("st", s, t, q(5, 1));
        b.set_source(s);
        b.set_target(t);
        b.build().unwrap()
    }

    fn only_fair_coins(inst: &CtpInstance) -> bool {
        inst.uncertain_edges().iter().all(|&e| {
            let spec = inst.edge(e);
            spec.blocking_prior == Rational::half() && spec.cost == Cost::zero()
        })
    }

    #[test]
    fn three_quarters_becomes_two_in_series() {
        let inst = single(q(3, 4), q(0, 1));
        let out = normalize_half_prob(&inst).unwrap();
        assert_eq!(out.uncertain_edges().len(), 2);
        assert!(out.vertex_id("e.m1").is_some());
        assert!(only_fair_coins(&out));
        assert_eq!(
            solve_independent(&out).unwrap().optimal_cost,
            solve_independent(&inst).unwrap().optimal_cost
        );
    }

    #[test]
    fn quarter_becomes_two_in_parallel() {
        let inst = single(q(1, 4), q(1, 1));
        let out = normalize_half_prob(&inst).unwrap();
        assert_eq!(out.uncertain_edges().len(), 2);
        assert!(only_fair_coins(&out));
        assert_eq!(
            solve_independent(&out).unwrap().optimal_cost,
            solve_independent(&inst).unwrap().optimal_cost
        );
    }

    #[test]
    fn half_is_unchanged() {
        let inst = single(q(1, 2), q(0, 1));
        assert_eq!(normalize_half_prob(&inst).unwrap(), inst);
    }

    #[test]
    fn third_is_rejected() {
        let err = normalize_half_prob(&single(q(1, 3), q(0, 1))).unwrap_err();
        assert!(matches!(err, ReductionError::NotDyadic { .. }));
    }
}
