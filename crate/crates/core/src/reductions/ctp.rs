use serde::{Deserialize, Serialize};

use super::{pad_even, Bounds, Provenance, ReductionError};
use crate::gadgets::{
    build_baiting, build_observation, series_stats, w2_bg1, w2_series, BaitingParams,
    ObservationParams, SeriesKind,
};
use crate::model::{CtpInstance, EdgeStatus, InstanceBuilder, VertexId, Weather};
use crate::numeric::{q, Rational};
use crate::solve::QbfFormula;

/// Parameters and bound chain of the independent construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtpReductionCertificate {
    pub n: usize,
    pub m: usize,
    pub l: Rational,
    pub p1: Rational,
    pub h: Rational,
    pub d_pt: Rational,
    pub d_st: Rational,
    pub p_r0: Rational,
    pub p_rt: Rational,
    pub b0: Rational,
    pub b1: Rational,
    pub q_st: Rational,
    pub w_st: Rational,
    pub z_st: Rational,
    /// Filled in when an instance is generated.
    pub vertices: Option<usize>,
    pub edges: Option<usize>,
    /// A dummy existential variable was appended to make n even.
    pub padded: bool,
}

impl CtpReductionCertificate {
    pub fn bounds_hold(&self) -> bool {
        self.b0 < self.h && self.h < self.b1
    }

    pub fn check_bounds(&self) -> Result<(), ReductionError> {
        if self.bounds_hold() {
            Ok(())
        } else {
            Err(ReductionError::BoundsViolated(Box::new(Bounds {
                b0: self.b0.clone(),
                h: self.h.clone(),
                b1: self.b1.clone(),
            })))
        }
    }
}

/// p1 = 1 − 2^-⌈log2((3L+1)/2)⌉.
pub fn exam_p1(l: &Rational) -> Rational {
    let z = (&(&(l * &Rational::integer(3)) + &Rational::one()) * &Rational::half()).ceil_log2();
    Rational::pow2(-z).complement()
}

fn int(n: usize) -> Rational {
    Rational::integer(n as i64)
}

/// The full bound chain for (n, m) without checking B0 < h < B1.
pub fn compute_certificate(n: usize, m: usize) -> Result<CtpReductionCertificate, ReductionError> {
    if !n.is_multiple_of(2) {
        return Err(ReductionError::Param("n must be even".into()));
    }
    if n < 2 || m < 1 {
        return Err(ReductionError::Param(format!(
            "need n >= 2 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    let l = int(8 * m + 16);
    let op = ObservationParams::new(&l)?;
    let bp = BaitingParams::new(&l)?;
    let p1 = exam_p1(&l);
    let bg = SeriesKind::Baiting(l.clone());
    let og = SeriesKind::Observation(l.clone());
    let bg1 = series_stats(&bg, 1)?;
    let og1 = series_stats(&og, 1)?;
    let ogm = series_stats(&og, m as u64)?;
    let q_bg_m2 = series_stats(&bg, m as u64 + 2)?.q;
    let w2_ogm = w2_series(&og, m as u64)?;
    let w2_bgm1 = w2_series(&bg, m as u64 + 1)?;
    let w2_l = w2_bg1(&l)?;
    let three_q = q(3, 4);
    let half_n = n / 2;

    let pair = &(&(&(&bg1.q * &ogm.q) * &three_q) * &bg1.q) * &ogm.q;
    let p_r0 = &pair.pow(half_n as u32) * &q_bg_m2;
    let q_st = &(&(&(&bg1.q * &three_q) * &ogm.q) * &bg1.q) * &ogm.q;
    let w_st = &(&(&l * &int(2)) + &int(4)) + &(&int(2 * m) * &og1.w1);
    let inner_tail = &(&(&(&bg1.w1 + &Rational::one()) + &w2_ogm) + &ogm.q) + &Rational::one();
    let inner = &(&(&(&ogm.w1 + &Rational::one()) + &w2_l) + &(&bp.q() * &inner_tail)) * &ogm.q;
    let after = &(&Rational::one() + &w2_ogm) + &inner;
    let z_st = &w2_l + &(&bp.q() * &(&(&bg1.w1 + &(&l * &q(1, 4))) + &(&three_q * &after)));
    let base = &z_st + &(&q_st * &w_st);
    let mut d = base.clone();
    for _ in 1..half_n {
        d = &base + &(&q_st * &d);
    }
    let d_st = &d + &(&q_st.pow(half_n as u32) * &w2_bgm1);
    let d_pt = &(&Rational::one()
        + &(&(&int(2) + &(&(&(&l * &int(19 * m)) + &int(4)) * &q(1, 4))) * &int(n)))
        + &(&int(n + m + 1) * &l);
    let p_rt = p1.complement().pow(3 * m as u32 + 2);
    let exam_len = int(2 * (m + 1));
    let escape = &(&p_rt * &exam_len) + &(&p_rt.complement() * &l);
    let b0 = &d_st + &(&p_r0 * &(&d_pt + &escape));
    let third = q(1, 3).pow(half_n as u32);
    let b1 = &d_st + &(&p_r0 * &(&(&d_pt + &(&third * &l)) + &(&third.complement() * &escape)));
    let h = &b0 + &(&(&q(1, 4).pow(half_n as u32) * &int(m)) * &p_r0);
    debug_assert_eq!(op.l1, &l * &q(5, 8));
    Ok(CtpReductionCertificate {
        n,
        m,
        l,
        p1,
        h,
        d_pt,
        d_st,
        p_r0,
        p_rt,
        b0,
        b1,
        q_st,
        w_st,
        z_st,
        vertices: None,
        edges: None,
        padded: false,
    })
}

/// The bound chain, failing unless B0 < h < B1.
pub fn certificate(n: usize, m: usize) -> Result<CtpReductionCertificate, ReductionError> {
    let c = compute_certificate(n, m)?;
    c.check_bounds()?;
    Ok(c)
}

/// Cost of the deterministic full trip s → r0 as built: the cost-1 edge
/// s–v1, one cost-1 variable edge and m observation gadgets per variable,
/// n − 1 link gadgets and m + 2 guard gadgets.
pub fn d_pt_construction(n: usize, m: usize) -> Rational {
    let l = int(8 * m + 16);
    let og = &(&(&l * &int(19)) + &int(4)) * &q(1, 4);
    &(&(&Rational::one() + &int(n)) + &(&int(n * m) * &og)) + &(&int(n + m + 1) * &l)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CtpReduction {
    #[serde(skip)]
    pub instance: CtpInstance,
    pub certificate: CtpReductionCertificate,
    pub formula: QbfFormula,
    pub provenance: Provenance,
}

struct Exam {
    r0: VertexId,
    /// r{i}.1 .. r{i}.5 for i = 1..=m+1.
    blocks: Vec<[VertexId; 5]>,
}

fn build_exam(b: &mut InstanceBuilder, m: usize, l: &Rational, p1: &Rational, t: VertexId) -> Exam {
    let r0 = b.add_vertex("r0");
    let blocks: Vec<[VertexId; 5]> = (1..=m + 1)
        .map(|i| std::array::from_fn(|k| b.add_vertex(format!("r{i}.{}", k + 1))))
        .collect();
    b.add_sure("r0r1", r0, blocks[0][0], Rational::one());
    b.add_sure("r0t", r0, t, l.clone());
    for (idx, r) in blocks.iter().enumerate() {
        let i = idx + 1;
        b.add_uncertain(format!("g{i}.a"), r[0], r[1], Rational::zero(), p1.clone());
        b.add_uncertain(format!("g{i}.b"), r[1], r[2], Rational::zero(), p1.clone());
        b.add_sure(format!("l{i}.34"), r[2], r[3], Rational::one());
        if i <= m {
            b.add_uncertain(format!("c{i}"), r[3], r[4], Rational::zero(), p1.clone());
            b.add_sure(
                format!("l{i}.51"),
                r[4],
                blocks[idx + 1][0],
                Rational::one(),
            );
        } else {
            b.add_sure(format!("c{i}"), r[3], r[4], Rational::zero());
            b.add_sure(format!("l{i}.51"), r[4], t, Rational::zero());
        }
    }
    Exam { r0, blocks }
}

/// The exam section alone, entered at r0 with the cost-L shortcut to t.
pub fn exam_harness(m: usize) -> Result<CtpInstance, ReductionError> {
    if m < 1 {
        return Err(ReductionError::Param("need m >= 1".into()));
    }
    let l = int(8 * m + 16);
    let mut b = InstanceBuilder::new();
    let t = b.add_vertex("t");
    let exam = build_exam(&mut b, m, &l, &exam_p1(&l), t);
    b.set_source(exam.r0);
    b.set_target(t);
    Ok(b.build()?)
}

/// The independent construction.
///
/// s–t costs h and s–v1 costs 1. Variable i: cost-1 edges x{i}.t and x{i}.f
/// (blocking 1/2 when universal) lead to the true path og{i}.1 … og{i}.m and
/// the false path nog{i}.1 … nog{i}.m of observation gadgets, chained by
/// zero-cost junctions j{i}.j / nj{i}.j into vp{i}; link{i} = BG(vp{i},
/// v{i+1}). The observation vertex of og{i}.j is r{j}.5 when x_i occurs in
/// clause j (¬x_i for nog), otherwise a private dead end. vp{n} → z0
/// (zlink), guards BG(z_g, z_{g+1}) for g = 0..=m+1 with z_g = r{g}.2, then
/// z{m+2} → r0 (rlink) and the exam section.
pub fn qbf_to_ctp(formula: &QbfFormula) -> Result<CtpReduction, ReductionError> {
    let (f, padded) = pad_even(formula);
    let (n, m) = (f.n, f.m());
    let mut cert = compute_certificate(n, m)?;
    cert.padded = padded;
    let l = cert.l.clone();
    let zero = Rational::zero;
    let one = Rational::one;

    let mut b = InstanceBuilder::new();
    let s = b.add_vertex("s");
    let t = b.add_vertex("t");
    let exam = build_exam(&mut b, m, &l, &cert.p1, t);
    b.add_sure("st", s, t, cert.h.clone());
    let entries: Vec<VertexId> = (1..=n).map(|i| b.add_vertex(format!("v{i}"))).collect();
    b.add_sure("sv1", s, entries[0], one());
    let mut exits = Vec::with_capacity(n);
    for i in 1..=n {
        let v = entries[i - 1];
        let vp = b.add_vertex(format!("vp{i}"));
        let prior = if QbfFormula::is_universal(i) {
            Rational::half()
        } else {
            zero()
        };
        for (side, literal, label) in [("", i as i32, "t"), ("n", -(i as i32), "f")] {
            let slots: Vec<(VertexId, VertexId)> = (1..=m)
                .map(|j| {
                    (
                        b.add_vertex(format!("{side}v{i}.{j}")),
                        b.add_vertex(format!("{side}vp{i}.{j}")),
                    )
                })
                .collect();
            b.add_uncertain(format!("x{i}.{label}"), v, slots[0].0, one(), prior.clone());
            for j in 1..=m {
                let (entry, exit) = slots[j - 1];
                let o = if f.clauses[j - 1].contains(&literal) {
                    exam.blocks[j - 1][4]
                } else {
                    b.add_vertex(format!("{side}o{i}.{j}"))
                };
                build_observation(&mut b, &format!("{side}og{i}.{j}"), &l, entry, exit, o, t)?;
                let next = if j < m { slots[j].0 } else { vp };
                b.add_sure(format!("{side}j{i}.{j}"), exit, next, zero());
            }
        }
        exits.push(vp);
    }
    for i in 1..n {
        build_baiting(&mut b, &format!("link{i}"), &l, exits[i - 1], entries[i], t)?;
    }
    let z0 = b.add_vertex("z0");
    let z_last = b.add_vertex(format!("z{}", m + 2));
    b.add_sure("zlink", exits[n - 1], z0, zero());
    let mut zs = vec![z0];
    zs.extend(exam.blocks.iter().map(|r| r[1]));
    zs.push(z_last);
    for g in 0..=m + 1 {
        build_baiting(&mut b, &format!("guard{g}"), &l, zs[g], zs[g + 1], t)?;
    }
    b.add_sure("rlink", z_last, exam.r0, zero());
    b.set_source(s);
    b.set_target(t);
    let instance = b.build()?;
    cert.vertices = Some(instance.vertex_count());
    cert.edges = Some(instance.edge_count());
    let provenance = Provenance::new(
        "qbf_to_ctp",
        &f.to_qdimacs(),
        &[
            ("n", n.to_string()),
            ("m", m.to_string()),
            ("L", l.to_string()),
            ("padded", padded.to_string()),
        ],
    );
    Ok(CtpReduction {
        instance,
        certificate: cert,
        formula: f,
        provenance,
    })
}

/// The weather under which the true-path traversal pays exactly its
/// deterministic cost: every fair coin and every exam edge blocked,
/// universal true edges and every 3/4 edge open.
pub fn d_pt_weather(inst: &CtpInstance) -> Weather {
    let status = inst
        .edges()
        .iter()
        .map(|e| match e.forced_status() {
            Some(s) => s,
            None if e.blocking_prior == Rational::half()
                && e.name.ends_with(".t")
                && e.name.starts_with('x') =>
            {
                EdgeStatus::Traversable
            }
            None if e.blocking_prior == q(3, 4) => EdgeStatus::Traversable,
            None => EdgeStatus::Blocked,
        })
        .collect::<Vec<_>>();
    let probability = inst.weather_probability(&status);
    Weather {
        status,
        probability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_at_two_one() {
        let c = compute_certificate(2, 1).unwrap();
        assert_eq!(c.l, q(24, 1));
        assert_eq!(c.p1, q(63, 64));
        assert!(c.p1 > Rational::one() - q(2, 73));
        assert_eq!(c.d_pt, q(331, 1));
        assert_eq!(d_pt_construction(2, 1), q(329, 1));
        assert_eq!(d_pt_construction(2, 2), c_dpt(2, 2));
        assert_eq!(d_pt_construction(4, 2), c_dpt(4, 2));
    }

    fn c_dpt(n: usize, m: usize) -> Rational {
        compute_certificate(n, m).unwrap().d_pt
    }

    #[test]
    fn h_offset_is_exact() {
        let c = compute_certificate(4, 3).unwrap();
        assert_eq!(&c.h - &c.b0, &(&q(1, 16) * &q(3, 1)) * &c.p_r0);
        assert_eq!(c.p_rt, c.p1.complement().pow(11));
    }

    #[test]
    fn odd_n_rejected() {
        assert_eq!(
            compute_certificate(3, 1).unwrap_err().to_string(),
            "n must be even"
        );
        assert!(compute_certificate(2, 0).is_err());
    }
}
