use serde::{Deserialize, Serialize};

use super::{Provenance, ReductionError};
use crate::model::{CtpInstance, InstanceBuilder, SensingCostMap, Variant};
use crate::numeric::{Cost, Rational};

/// Denominator exponent used when searching for a dyadic ε.
pub const DEFAULT_PRECISION: u32 = 32;

/// A vertex cover question: does `edges` have a cover of at most `k`
/// vertices?
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcInstance {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub k: usize,
}

impl VcInstance {
    pub fn validate(&self) -> Result<(), ReductionError> {
        let mut seen = std::collections::BTreeSet::new();
        for &(u, v) in &self.edges {
            if u >= self.vertices.len() || v >= self.vertices.len() {
                return Err(ReductionError::Param(format!(
                    "edge ({u}, {v}) names a missing vertex"
                )));
            }
            if u == v {
                return Err(ReductionError::Param(format!(
                    "self-loop at {}",
                    self.vertices[u]
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(ReductionError::Param(format!(
                    "repeated edge {}-{}",
                    self.vertices[u], self.vertices[v]
                )));
            }
        }
        if self.edges.is_empty() {
            return Err(ReductionError::Param(
                "graph needs at least one edge".into(),
            ));
        }
        Ok(())
    }
}

/// "k3" (triangle a, b, c) or "p3" (path a - b - c).
pub fn named_graph(name: &str, k: usize) -> Result<VcInstance, ReductionError> {
    let vertices = ["a", "b", "c"].map(String::from).to_vec();
    let edges = match name {
        "k3" => vec![(0, 1), (1, 2), (0, 2)],
        "p3" => vec![(0, 1), (1, 2)],
        other => {
            return Err(ReductionError::Param(format!(
                "unknown graph {other:?} (expected k3 or p3)"
            )))
        }
    };
    Ok(VcInstance { vertices, edges, k })
}

/// Subset enumeration; fine for the toy graphs this is used on.
pub fn has_vertex_cover(vc: &VcInstance) -> bool {
    let n = vc.vertices.len();
    assert!(n < 32, "too many vertices to enumerate");
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize <= vc.k)
        .any(|mask| {
            vc.edges
                .iter()
                .all(|&(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1)
        })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingCertificate {
    pub epsilon: Rational,
    pub c: Rational,
    pub l: Rational,
    pub alpha: Rational,
    pub k: usize,
    pub edge_count: usize,
    pub g_ub: Rational,
    pub g1_lb: Rational,
    pub g2_ub: Rational,
}

impl SensingCertificate {
    /// (1−ε)^|E|·(k+1) ≥ k+1−α.
    pub fn epsilon_bound_holds(&self) -> bool {
        epsilon_ok(&self.epsilon, self.edge_count, self.k, &self.alpha)
    }

    pub fn holds(&self) -> bool {
        self.epsilon.is_positive()
            && self.epsilon_bound_holds()
            && self.g_ub.is_negative()
            && self.g1_lb.is_positive()
            && self.g2_ub.is_negative()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensingReduction {
    #[serde(skip)]
    pub instance: CtpInstance,
    pub certificate: SensingCertificate,
    pub graph: VcInstance,
    pub provenance: Provenance,
}

fn int(n: usize) -> Rational {
    Rational::integer(n as i64)
}

fn epsilon_ok(eps: &Rational, edges: usize, k: usize, alpha: &Rational) -> bool {
    &eps.complement().pow(edges as u32) * &int(k + 1) >= &int(k + 1) - alpha
}

/// Largest j/2^precision satisfying the ε bound.
fn dyadic_epsilon(
    edges: usize,
    k: usize,
    alpha: &Rational,
    precision: u32,
) -> Result<Rational, ReductionError> {
    if !(1..=62).contains(&precision) {
        return Err(ReductionError::Param(format!(
            "precision must lie in 1..=62, got {precision}"
        )));
    }
    let scale = 1i64 << precision;
    let at = |j: i64| Rational::new(j, scale);
    let (mut lo, mut hi) = (0i64, scale);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if epsilon_ok(&at(mid), edges, k, alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0 {
        return Err(ReductionError::Param(format!(
            "no positive epsilon at precision 2^-{precision}"
        )));
    }
    Ok(at(lo))
}

/// Sensing instance for a vertex cover question.
///
/// s–t (st) costs 4. Per graph vertex v a node f.v with a sure edge sf.v of
/// cost C from s and an infinite edge ft.v to t. The sensing path starts
/// with the sure leader s–p0 (lead, cost L), then one zero-cost coin of
/// blocking ε per graph edge (p{k-1}–p{k}), then an infinite edge ut from
/// the last vertex to t. The uncertain path is s–x (sx, 2) and x–t (xt, 0,
/// blocking 1/2). Sensing is free from f.v for the coins of edges at v and
/// from the end of the sensing path for xt; nothing else can be sensed.
pub fn vc_to_sensing(
    vc: &VcInstance,
    alpha: &Rational,
    precision: u32,
) -> Result<SensingReduction, ReductionError> {
    vc.validate()?;
    if !alpha.is_proper_probability() {
        return Err(ReductionError::Param(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let e = vc.edges.len();
    let k = vc.k;
    let eps = dyadic_epsilon(e, k, alpha, precision)?;
    let survive = eps.complement().pow(e as u32);
    let denom = &int(2 * k + 1) - alpha;
    let l = &Rational::half() - &(&eps * &Rational::new(1, 4));
    let c = &(&eps * &survive) / &(&denom * &int(2));
    let scale = &eps * &survive;
    let g_ub = &Rational::zero() - &(&eps * &Rational::half());
    let g1_lb = &scale * &(&Rational::half() - &(&int(2 * k) / &(&denom * &int(2))));
    let slack = &int(k + 1) - alpha;
    let g2_ub = &scale * &(&Rational::half() - &(&(&slack * &int(2)) / &(&denom * &int(2))));
    let certificate = SensingCertificate {
        epsilon: eps.clone(),
        c: c.clone(),
        l: l.clone(),
        alpha: alpha.clone(),
        k,
        edge_count: e,
        g_ub,
        g1_lb,
        g2_ub,
    };

    let mut b = InstanceBuilder::new();
    let s = b.add_vertex("s");
    let t = b.add_vertex("t");
    b.add_sure("st", s, t, Rational::integer(4));
    let fs: Vec<_> = vc
        .vertices
        .iter()
        .map(|v| b.add_vertex(format!("f.{v}")))
        .collect();
    for (v, &f) in vc.vertices.iter().zip(&fs) {
        b.add_sure(format!("sf.{v}"), s, f, c.clone());
        b.add_edge(
            format!("ft.{v}"),
            f,
            t,
            false,
            Cost::Infinite,
            Rational::zero(),
        );
    }
    let path: Vec<_> = (0..=e).map(|i| b.add_vertex(format!("p{i}"))).collect();
    b.add_sure("lead", s, path[0], l.clone());
    let mut map = SensingCostMap::new();
    for (i, &(u, v)) in vc.edges.iter().enumerate() {
        let coin = b.add_uncertain(
            format!("c.{}-{}", vc.vertices[u], vc.vertices[v]),
            path[i],
            path[i + 1],
            Rational::zero(),
            eps.clone(),
        );
        map.insert(fs[u], coin, Cost::zero());
        map.insert(fs[v], coin, Cost::zero());
    }
    b.add_edge("ut", path[e], t, false, Cost::Infinite, Rational::zero());
    let x = b.add_vertex("x");
    b.add_sure("sx", s, x, Rational::integer(2));
    let xt = b.add_uncertain("xt", x, t, Rational::zero(), Rational::half());
    map.insert(path[e], xt, Cost::zero());
    b.set_variant(Variant::Sensing(map));
    b.set_source(s);
    b.set_target(t);
    let instance = b.build()?;
    let text: String = vc
        .edges
        .iter()
        .map(|&(u, v)| format!("{} {}\n", vc.vertices[u], vc.vertices[v]))
        .collect();
    let provenance = Provenance::new(
        "vc_to_sensing",
        &text,
        &[
            ("k", k.to_string()),
            ("alpha", alpha.to_string()),
            ("precision", precision.to_string()),
        ],
    );
    Ok(SensingReduction {
        instance,
        certificate,
        graph: vc.clone(),
        provenance,
    })
}

/// Lower bound 2C·k′·(1−ε)^|E| on the sensing spent by a policy that
/// visits k′ cover nodes.
pub fn sensing_cost_bound(cover_size: usize, cert: &SensingCertificate) -> Rational {
    &(&(&cert.c * &int(2)) * &int(cover_size))
        * &cert.epsilon.complement().pow(cert.edge_count as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::q;

    #[test]
    fn cover_enumeration() {
        assert!(!has_vertex_cover(&named_graph("k3", 1).unwrap()));
        assert!(has_vertex_cover(&named_graph("k3", 2).unwrap()));
        assert!(has_vertex_cover(&named_graph("p3", 1).unwrap()));
        assert!(named_graph("k4", 1).is_err());
    }

    #[test]
    fn epsilon_is_the_largest_dyadic() {
        let vc = named_graph("k3", 2).unwrap();
        let r = vc_to_sensing(&vc, &q(1, 2), 16).unwrap();
        let c = &r.certificate;
        assert!(c.epsilon_bound_holds());
        // (1-ε)^3 ≥ 5/6
        assert!(c.epsilon.complement().pow(3) >= q(5, 6));
        let next = &c.epsilon + &Rational::pow2(-16);
        assert!(next.complement().pow(3) < q(5, 6));
    }

    #[test]
    fn gains_have_the_right_signs() {
        for name in ["k3", "p3"] {
            let r =
                vc_to_sensing(&named_graph(name, 1).unwrap(), &q(1, 2), DEFAULT_PRECISION).unwrap();
            assert!(r.certificate.holds(), "{name}");
        }
    }

    #[test]
    fn bound_at_k_plus_one() {
        let r = vc_to_sensing(&named_graph("k3", 1).unwrap(), &q(1, 2), DEFAULT_PRECISION).unwrap();
        let c = &r.certificate;
        assert!(sensing_cost_bound(2, c) >= &(&c.c * &q(2, 1)) * &q(3, 2));
        assert!(sensing_cost_bound(1, c) <= &c.c * &q(2, 1));
        assert_eq!(sensing_cost_bound(0, c), Rational::zero());
    }

    #[test]
    fn rejects_bad_input() {
        let vc = named_graph("p3", 1).unwrap();
        assert!(vc_to_sensing(&vc, &q(1, 1), 32).is_err());
        let looped = VcInstance {
            vertices: vec!["a".into()],
            edges: vec![(0, 0)],
            k: 0,
        };
        assert!(vc_to_sensing(&looped, &q(1, 2), 32).is_err());
    }
}
