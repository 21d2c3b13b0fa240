use serde::Serialize;

use super::{pad_even, Provenance, ReductionError};
use crate::model::{CtpInstance, DependencyNet, InstanceBuilder, Variant};
use crate::numeric::Rational;
use crate::solve::QbfFormula;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepReduction {
    #[serde(skip)]
    pub instance: CtpInstance,
    pub h: Rational,
    /// The formula actually encoded (after padding).
    pub formula: QbfFormula,
    pub padded: bool,
    pub provenance: Provenance,
}

/// 2^(-n/2-2) for even n.
pub fn default_h(n: usize) -> Rational {
    Rational::pow2(-(n as i64 / 2 + 2))
}

/// The dependent construction. All edges are directed.
///
/// s → v1; per variable i a true path v{i} → v{i}.1 → … → vp{i} (edges
/// x{i}.t, p{i}.l) and a false path through nv{i}.l (x{i}.f, np{i}.l), with
/// an observation edge o{i}.l → v{i}.l (ob{i}.l, nob{i}.l on the false side);
/// vp{i} → v{i+1} (link{i}) and vp{n} → r0 (vr0). From r0 an odd path
/// r0 → r1 → r1p → t (odd0, odd, odd2) and an even path through r2, r2p
/// (even0, even, even2); escapes r1 → t and r2 → t cost 1; st costs h.
///
/// Universal x.t/x.f are exactly one open. Each clause has a hidden coin
/// copied onto the observation edges of its literals; the parity of the
/// clause coins decides which choice edge (odd or even) is open. Other
/// observation edges are independent fair coins.
pub fn qbf_to_ctpdep(
    formula: &QbfFormula,
    h: Option<Rational>,
) -> Result<DepReduction, ReductionError> {
    let (f, padded) = pad_even(formula);
    let (n, m) = (f.n, f.m());
    if m == 0 {
        return Err(ReductionError::Param(
            "formula needs at least one clause".into(),
        ));
    }
    let bound = Rational::pow2(-(n as i64 / 2 + 1));
    let h = h.unwrap_or_else(|| default_h(n));
    if !h.is_positive() || h >= bound {
        return Err(ReductionError::Param(format!(
            "h must lie in (0, {bound}), got {h}"
        )));
    }
    let zero = Rational::zero;
    let half = Rational::half;
    let mut b = InstanceBuilder::new();
    let s = b.add_vertex("s");
    let t = b.add_vertex("t");
    let mut vars = Vec::new();
    for i in 1..=n {
        let v = b.add_vertex(format!("v{i}"));
        let mut sides = Vec::new();
        for side in ["", "n"] {
            let path: Vec<_> = (1..=m)
                .map(|l| b.add_vertex(format!("{side}v{i}.{l}")))
                .collect();
            let obs: Vec<_> = (1..=m)
                .map(|l| b.add_vertex(format!("{side}o{i}.{l}")))
                .collect();
            sides.push((path, obs));
        }
        let vp = b.add_vertex(format!("vp{i}"));
        vars.push((v, sides, vp));
    }
    let r0 = b.add_vertex("r0");
    let r1 = b.add_vertex("r1");
    let r1p = b.add_vertex("r1p");
    let r2 = b.add_vertex("r2");
    let r2p = b.add_vertex("r2p");

    let mut net = DependencyNet::new(2);
    let clause_coins: Vec<usize> = (1..=m)
        .map(|l| net.add_coin(format!("c{l}"), None, half()))
        .collect();
    b.add_sure("st", s, t, h.clone());
    b.add_edge("sv1", s, vars[0].0, true, zero().into(), zero());
    for (i, (v, sides, vp)) in vars.iter().enumerate() {
        let i = i + 1;
        let universal = QbfFormula::is_universal(i);
        let prior = if universal { half() } else { zero() };
        let xt = b.add_edge(
            format!("x{i}.t"),
            *v,
            sides[0].0[0],
            true,
            zero().into(),
            prior.clone(),
        );
        let xf = b.add_edge(
            format!("x{i}.f"),
            *v,
            sides[1].0[0],
            true,
            zero().into(),
            prior,
        );
        if universal {
            let u = net.add_coin(format!("u{i}"), Some(xt), half());
            net.add_copy(format!("nu{i}"), Some(xf), u, true);
        }
        for (k, side) in ["", "n"].iter().enumerate() {
            let literal = if k == 0 { i as i32 } else { -(i as i32) };
            let (path, obs) = &sides[k];
            for l in 1..=m {
                let next = if l < m { path[l] } else { *vp };
                b.add_edge(
                    format!("{side}p{i}.{l}"),
                    path[l - 1],
                    next,
                    true,
                    zero().into(),
                    zero(),
                );
                let ob = b.add_edge(
                    format!("{side}ob{i}.{l}"),
                    obs[l - 1],
                    path[l - 1],
                    true,
                    zero().into(),
                    half(),
                );
                if f.clauses[l - 1].contains(&literal) {
                    net.add_copy(
                        format!("{side}ob{i}.{l}"),
                        Some(ob),
                        clause_coins[l - 1],
                        false,
                    );
                } else {
                    net.add_coin(format!("{side}ob{i}.{l}"), Some(ob), half());
                }
            }
        }
        if i < n {
            b.add_edge(
                format!("link{i}"),
                *vp,
                vars[i].0,
                true,
                zero().into(),
                zero(),
            );
        } else {
            b.add_edge("vr0", *vp, r0, true, zero().into(), zero());
        }
    }
    b.add_edge("odd0", r0, r1, true, zero().into(), zero());
    let odd = b.add_edge("odd", r1, r1p, true, zero().into(), half());
    b.add_edge("odd2", r1p, t, true, zero().into(), zero());
    b.add_edge("even0", r0, r2, true, zero().into(), zero());
    let even = b.add_edge("even", r2, r2p, true, zero().into(), half());
    b.add_edge("even2", r2p, t, true, zero().into(), zero());
    b.add_edge("esc1", r1, t, true, Rational::one().into(), zero());
    b.add_edge("esc2", r2, t, true, Rational::one().into(), zero());

    // p1 = ¬c1, p_l = p_{l-1} xor ¬c_l; odd is blocked iff ¬p_m.
    let mut parity = net.add_copy("p1", None, clause_coins[0], true);
    for (l, &c) in clause_coins.iter().enumerate().skip(1) {
        parity = net.add_xor(format!("p{}", l + 1), None, parity, c, true);
    }
    net.add_copy("odd", Some(odd), parity, true);
    net.add_copy("even", Some(even), parity, false);
    b.set_variant(Variant::Dependent(net));
    b.set_source(s);
    b.set_target(t);
    let instance = b.build()?;
    let provenance = Provenance::new(
        "qbf_to_ctpdep",
        &f.to_qdimacs(),
        &[
            ("n", n.to_string()),
            ("m", m.to_string()),
            ("h", h.to_string()),
            ("padded", padded.to_string()),
        ],
    );
    Ok(DepReduction {
        instance,
        h,
        formula: f,
        padded,
        provenance,
    })
}
