use super::{BaitingParams, GadgetError, ObservationParams};
use crate::numeric::{q, Rational};

fn int(n: u64) -> Rational {
    Rational::integer(n as i64)
}

/// Expected cost of crossing BG(L) forward and paying K at the exit:
/// 2L/(N+1)·(1 − 2^-(N+1)) + 2^-N·K.
pub fn baiting_c_pi(l: &Rational, k: &Rational) -> Result<Rational, GadgetError> {
    let p = BaitingParams::new(l)?;
    if k.is_negative() || k > l {
        return Err(GadgetError::Param(format!(
            "terminal charge K must lie in [0, L] (got {k})"
        )));
    }
    let two_sec = &p.section() * &int(2);
    Ok(&two_sec * &Rational::pow2(-(p.n as i64 + 1)).complement() + &p.q() * k)
}

/// Expected cost of walking to v_j, retreating to u if every shortcut up to
/// s_j was blocked, and paying M_j there:
/// 2L/(N+1)·(1 − 2^-j) + 2^-j·jL/(N+1) + 2^-j·M_j.
pub fn baiting_c_pi_j(l: &Rational, j: u64, m_j: &Rational) -> Result<Rational, GadgetError> {
    let p = BaitingParams::new(l)?;
    if j == 0 || j > p.n {
        return Err(GadgetError::Param(format!(
            "j must satisfy 0 < j <= N = {} (got {j})",
            p.n
        )));
    }
    if *m_j < Rational::one() {
        return Err(GadgetError::Param(format!(
            "M_j must be at least 1 (got {m_j})"
        )));
    }
    let sec = p.section();
    let pj = Rational::pow2(-(j as i64));
    Ok(&(&sec * &int(2)) * &pj.complement() + &(&pj * &int(j)) * &sec + &pj * m_j)
}

/// A series of k identical gadgets, entry of each glued to the exit of the
/// previous one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Baiting(Rational),
    Observation(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesStats {
    /// Probability of reaching the last exit.
    pub q: Rational,
    /// Traversal cost when the last exit is reached.
    pub w1: Rational,
}

pub fn series_stats(kind: &SeriesKind, k: u64) -> Result<SeriesStats, GadgetError> {
    if k == 0 {
        return Err(GadgetError::Param("series needs k >= 1".into()));
    }
    Ok(match kind {
        SeriesKind::Baiting(l) => {
            let p = BaitingParams::new(l)?;
            SeriesStats {
                q: Rational::pow2(-((k * p.n) as i64)),
                w1: l * &int(k),
            }
        }
        SeriesKind::Observation(l) => {
            let p = ObservationParams::new(l)?;
            SeriesStats {
                q: Rational::pow2(-((k * (2 * p.n + p.n1 + 4)) as i64)),
                w1: &(&(l * &int(19)) + &int(4)) * &q(k as i64, 4),
            }
        }
    })
}

/// Partial expectation of BG(L) over the outcomes that leave by a zero-cost
/// shortcut: 2L/(N+1)·(1 − 2^-(N+1)) − 2^-N·L.
pub fn w2_bg1(l: &Rational) -> Result<Rational, GadgetError> {
    let p = BaitingParams::new(l)?;
    let two_sec = &p.section() * &int(2);
    Ok(&two_sec * &Rational::pow2(-(p.n as i64 + 1)).complement() - &p.q() * l)
}

/// The nested shortcut expression for one observation gadget, evaluated
/// literally:
/// w2(BG(L)) + 2^-N(L + 2^-N(w2(BG(3L/2)) + 2^-(N+N1)·3L/2
///   + 2^-(N+N1+4)(2L1 + 1 + w2(BG(L))))).
pub fn w2_og1(l: &Rational) -> Result<Rational, GadgetError> {
    let p = ObservationParams::new(l)?;
    let (n, n1) = (p.n as i64, p.n1 as i64);
    let w2l = w2_bg1(l)?;
    let three_halves = l * &q(3, 2);
    let closing = &(&(&p.l1 * &int(2)) + &Rational::one()) + &w2l;
    let inner = &(&w2_bg1(&three_halves)? + &(&Rational::pow2(-(n + n1)) * &three_halves))
        + &(&Rational::pow2(-(n + n1 + 4)) * &closing);
    let middle = l + &(&Rational::pow2(-n) * &inner);
    Ok(&w2l + &(&Rational::pow2(-n) * &middle))
}

/// Partial expectation of crossing one observation gadget by its reference
/// policy over the outcomes that end in a shortcut (zero-cost coins, or the
/// 3L/2 shortcut at v2 when one of the 3/4 edges is blocked):
/// w2(L) + 2^-N[(1 − 2^-N1)L + w2(3L/2) + 2^-N1·(15/16)·4L
///   + 2^-(N1+4)((1 − 2^-N)(L + 3L/2 + 2L1 + 1) + w2(L))].
pub fn og_shortcut_expectation(l: &Rational) -> Result<Rational, GadgetError> {
    let p = ObservationParams::new(l)?;
    let (n, n1) = (p.n as i64, p.n1 as i64);
    let w2l = w2_bg1(l)?;
    let three_halves = l * &q(3, 2);
    let to_v1p = &(&(l + &three_halves) + &(&p.l1 * &int(2))) + &Rational::one();
    let closing = &(&Rational::pow2(-n).complement() * &to_v1p) + &w2l;
    let inside = &(&(&(&Rational::pow2(-n1).complement() * l) + &w2_bg1(&three_halves)?)
        + &(&(&Rational::pow2(-n1) * &q(15, 16)) * &(l * &int(4))))
        + &(&Rational::pow2(-(n1 + 4)) * &closing);
    Ok(&w2l + &(&Rational::pow2(-n) * &inside))
}

/// w2(G(k)) = w2(G(1)) + q(G(1))(w1(G(1)) + w2(G(k−1))).
pub fn w2_series(kind: &SeriesKind, k: u64) -> Result<Rational, GadgetError> {
    let one = series_stats(kind, 1)?;
    if k == 0 {
        return Err(GadgetError::Param("series needs k >= 1".into()));
    }
    let base = match kind {
        SeriesKind::Baiting(l) => w2_bg1(l)?,
        SeriesKind::Observation(l) => w2_og1(l)?,
    };
    let mut value = base.clone();
    for _ in 1..k {
        value = &base + &(&one.q * &(&one.w1 + &value));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn baiting_values_at_two() {
        let two = q(2, 1);
        assert_eq!(baiting_c_pi(&two, &two).unwrap(), q(263, 512));
        assert_eq!(baiting_c_pi(&two, &Rational::zero()).unwrap(), q(255, 512));
        assert_eq!(baiting_c_pi(&q(3, 2), &q(3, 2)).unwrap(), q(789, 2048));
        assert!(baiting_c_pi(&two, &q(3, 1)).is_err());
    }

    #[test]
    fn retreat_values() {
        let two = q(2, 1);
        assert_eq!(baiting_c_pi_j(&two, 1, &Rational::one()).unwrap(), q(7, 8));
        assert!(
            baiting_c_pi_j(&two, 7, &Rational::one()).unwrap() > baiting_c_pi(&two, &two).unwrap()
        );
        assert!(baiting_c_pi_j(&two, 0, &Rational::one()).is_err());
        assert!(baiting_c_pi_j(&two, 8, &Rational::one()).is_err());
        assert!(baiting_c_pi_j(&two, 1, &q(1, 2)).is_err());
    }

    #[test]
    fn series_values() {
        let bg = SeriesKind::Baiting(q(2, 1));
        assert_eq!(
            series_stats(&bg, 1).unwrap(),
            SeriesStats {
                q: q(1, 128),
                w1: q(2, 1)
            }
        );
        assert_eq!(
            series_stats(&bg, 3).unwrap(),
            SeriesStats {
                q: Rational::pow2(-21),
                w1: q(6, 1)
            }
        );
        assert_eq!(
            series_stats(&SeriesKind::Observation(q(24, 1)), 1)
                .unwrap()
                .w1,
            q(115, 1)
        );
        assert!(series_stats(&bg, 0).is_err());
    }

    #[test]
    fn w2_values() {
        let two = q(2, 1);
        assert_eq!(w2_bg1(&two).unwrap(), q(247, 512));
        let bg = SeriesKind::Baiting(two.clone());
        assert_eq!(w2_series(&bg, 1).unwrap(), q(247, 512));
        assert_eq!(
            w2_series(&bg, 2).unwrap(),
            q(247, 512) + q(1, 128) * (q(2, 1) + q(247, 512))
        );
        let two_steps = q(247, 512) + q(1, 128) * (q(2, 1) + w2_series(&bg, 2).unwrap());
        assert_eq!(w2_series(&bg, 3).unwrap(), two_steps);
        assert!(w2_bg1(&Rational::one()).is_err());
    }

    #[test]
    fn w2_og1_frozen() {
        // Independent Fraction computation of the nested expression.
        let v = w2_og1(&q(24, 1)).unwrap();
        assert_eq!(v, W2_OG1_24.trim().parse::<Rational>().unwrap());
        assert!(w2_og1(&q(9, 1)).unwrap() < v);
        assert!(w2_og1(&q(8, 1)).is_err());
        let ob = SeriesKind::Observation(q(24, 1));
        assert_eq!(w2_series(&ob, 1).unwrap(), v);
    }

    #[test]
    fn og_shortcut_frozen() {
        let v = og_shortcut_expectation(&q(24, 1)).unwrap();
        assert_eq!(v, OG_SHORTCUT_24.trim().parse::<Rational>().unwrap());
        assert_ne!(v, w2_og1(&q(24, 1)).unwrap());
    }

    const W2_OG1_24: &str = include_str!("../../tests/data/w2_og1_24.txt");
    const OG_SHORTCUT_24: &str = include_str!("../../tests/data/og_shortcut_24.txt");

    proptest! {
        #[test]
        fn identity_and_bounds(num in 5i64..400, den in 1i64..4, kn in 0i64..=8) {
            let l = q(num, den * 4);
            prop_assume!(l > Rational::one());
            let k = &l * &q(kn, 8);
            let p = BaitingParams::new(&l).unwrap();
            let lhs = baiting_c_pi(&l, &k).unwrap();
            prop_assert_eq!(lhs.clone(), w2_bg1(&l).unwrap() + p.q() * (&l + &k));
            let full = baiting_c_pi(&l, &l).unwrap();
            prop_assert!(full < q(3, 4));
            for j in [1, 2, p.n / 2 + 1, p.n] {
                prop_assert!(full < baiting_c_pi_j(&l, j, &Rational::one()).unwrap());
            }
        }
    }
}
