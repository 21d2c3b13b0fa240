use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CtpInstance, EdgeId, EdgeStatus, ModelError, Variant};
use crate::numeric::Rational;

/// Default enumeration cap: 2^20 weathers.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// A complete status assignment to every edge, with its probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weather {
    pub status: Vec<EdgeStatus>,
    pub probability: Rational,
}

impl Weather {
    pub fn status(&self, e: EdgeId) -> EdgeStatus {
        self.status[e.0]
    }

    pub fn is_blocked(&self, e: EdgeId) -> bool {
        self.status[e.0].is_blocked()
    }

    /// Compact key over the uncertain edges, e.g. "TBT".
    pub fn key(&self, inst: &CtpInstance) -> String {
        inst.uncertain_edges()
            .iter()
            .map(|&e| self.status[e.0].short())
            .collect()
    }
}

/// Exact Bernoulli draw: true with probability `p`.
pub(crate) fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: &Rational) -> bool {
    if p.is_zero() {
        return false;
    }
    if p.is_one() {
        return true;
    }
    let den = p.denom().to_biguint().expect("positive denominator");
    let num = p.numer().to_biguint().expect("probability is non-negative");
    rng.gen_biguint_below(&den) < num
}

impl CtpInstance {
    fn forced_statuses(&self) -> Vec<EdgeStatus> {
        self.edges()
            .iter()
            .map(|e| e.forced_status().unwrap_or(EdgeStatus::Traversable))
            .collect()
    }

    /// Upper bound on the number of weathers enumeration has to visit.
    pub fn enumeration_size(&self) -> BigUint {
        let exp = match self.variant() {
            Variant::Dependent(net) => net.stochastic_count(),
            _ => self.uncertain_edges().len(),
        };
        BigUint::from(1u8) << exp
    }

    /// Every positive-probability weather. Probabilities sum to exactly 1.
    pub fn weather_support(&self, cap: u64) -> Result<Vec<Weather>, ModelError> {
        let required = self.enumeration_size();
        if required > BigUint::from(cap) {
            return Err(ModelError::EnumerationCap {
                required: required.to_string(),
                allowed: cap,
            });
        }
        let base = self.forced_statuses();
        match self.variant() {
            Variant::Dependent(net) => Ok(net
                .edge_marginals()
                .into_iter()
                .map(|(assign, probability)| {
                    let mut status = base.clone();
                    for (e, blocked) in assign {
                        // Nets may also drive edges whose prior is fixed.
                        if self.is_uncertain(e) {
                            status[e.0] = EdgeStatus::from_blocked(blocked);
                        }
                    }
                    Weather {
                        status,
                        probability,
                    }
                })
                .collect()),
            _ => {
                let known = vec![None; self.edge_count()];
                Ok(self
                    .reveal_distribution(&known, self.uncertain_edges())
                    .into_iter()
                    .map(|(statuses, probability)| {
                        let mut status = base.clone();
                        for (&e, s) in self.uncertain_edges().iter().zip(statuses) {
                            status[e.0] = s;
                        }
                        Weather {
                            status,
                            probability,
                        }
                    })
                    .collect())
            }
        }
    }

    /// Samples one weather together with its exact probability; dependent
    /// instances use ancestral sampling.
    pub fn sample_weather_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Weather {
        let status = self.sample_statuses_with(rng);
        let probability = self.weather_probability(&status);
        Weather {
            status,
            probability,
        }
    }

    /// Samples edge statuses only, skipping the probability computation.
    pub fn sample_statuses_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<EdgeStatus> {
        let mut status = self.forced_statuses();
        match self.variant() {
            Variant::Dependent(net) => {
                for (e, blocked) in net.sample(rng) {
                    if self.is_uncertain(e) {
                        status[e.0] = EdgeStatus::from_blocked(blocked);
                    }
                }
            }
            _ => {
                for &e in self.uncertain_edges() {
                    status[e.0] =
                        EdgeStatus::from_blocked(bernoulli(rng, &self.edge(e).blocking_prior));
                }
            }
        }
        status
    }

    pub fn sample_weather(&self, seed: u64) -> Weather {
        self.sample_weather_with(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Probability of a full status assignment.
    pub fn weather_probability(&self, status: &[EdgeStatus]) -> Rational {
        let reveal = self.uncertain_edges();
        match self.variant() {
            Variant::Dependent(net) => {
                let evidence: Vec<(EdgeId, EdgeStatus)> =
                    reveal.iter().map(|&e| (e, status[e.0])).collect();
                net.joint(&evidence, &[]).1
            }
            _ => reveal
                .iter()
                .map(|&e| {
                    let p = &self.edge(e).blocking_prior;
                    if status[e.0].is_blocked() {
                        p.clone()
                    } else {
                        p.complement()
                    }
                })
                .fold(Rational::one(), |acc, p| acc * p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DependencyNet, InstanceBuilder};
    use crate::numeric::q;

    fn coins(priors: &[Rational]) -> CtpInstance {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_sure("st", s, t, q(5, 1));
        for (i, p) in priors.iter().enumerate() {
            b.add_uncertain(format!("c{i}"), s, t, q(1, 1), p.clone());
        }
        b.set_source(s);
        b.set_target(t);
        b.build().unwrap()
    }

    #[test]
    fn single_coin_support() {
        let w = coins(&[q(1, 2)])
            .weather_support(DEFAULT_ENUMERATION_CAP)
            .unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|w| w.probability == q(1, 2)));
    }

    #[test]
    fn two_coin_product_support() {
        let w = coins(&[q(1, 2), q(3, 4)])
            .weather_support(DEFAULT_ENUMERATION_CAP)
            .unwrap();
        let probs: Vec<Rational> = w.iter().map(|w| w.probability.clone()).collect();
        assert_eq!(probs, vec![q(1, 8), q(3, 8), q(1, 8), q(3, 8)]);
        assert_eq!(probs.iter().sum::<Rational>(), Rational::one());
    }

    #[test]
    fn cap_reports_counts() {
        let inst = coins(&[q(1, 2), q(1, 2), q(1, 2)]);
        match inst.weather_support(4) {
            Err(ModelError::EnumerationCap { required, allowed }) => {
                assert_eq!(required, "8");
                assert_eq!(allowed, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let inst = coins(&[q(1, 2), q(1, 3)]);
        assert_eq!(inst.sample_weather(17), inst.sample_weather(17));
    }

    #[test]
    fn exclusive_pair_support() {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_sure("st", s, t, q(1, 1));
        let e0 = b.add_uncertain("x", s, t, Rational::zero(), q(1, 2));
        let e1 = b.add_uncertain("nx", s, t, Rational::zero(), q(1, 2));
        let mut net = DependencyNet::new(1);
        let c = net.add_coin("u", Some(e0), q(1, 2));
        net.add_copy("nu", Some(e1), c, true);
        b.set_variant(Variant::Dependent(net));
        b.set_source(s);
        b.set_target(t);
        let inst = b.build().unwrap();
        let w = inst.weather_support(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(w.len(), 2);
        for w in &w {
            assert_eq!(w.probability, q(1, 2));
            assert_ne!(w.status(e0), w.status(e1));
        }
        for seed in 0..50 {
            let w = inst.sample_weather(seed);
            assert_ne!(w.status(e0), w.status(e1));
            assert_eq!(w.probability, q(1, 2));
        }
    }
}
