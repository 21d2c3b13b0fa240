//! Seeded random toy instances for oracle comparisons, property tests and
//! benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CtpInstance, InstanceBuilder};
use crate::numeric::{q, Rational};

/// Blocking probabilities of the form 2^-z or 1 - 2^-z.
const DYADIC: [(i64, i64); 6] = [(1, 2), (1, 4), (3, 4), (1, 8), (7, 8), (1, 2)];

fn dyadic<R: Rng>(rng: &mut R) -> Rational {
    let (n, d) = *DYADIC.choose(rng).unwrap();
    q(n, d)
}

/// Edge-disjoint s-t paths: up to `max_paths` paths of 1..=`max_len` edges.
/// The last path is sometimes all sure so that not every instance can fail.
pub fn disjoint_paths_with<R: Rng>(rng: &mut R, max_paths: usize, max_len: usize) -> CtpInstance {
    let mut b = InstanceBuilder::new();
    let s = b.add_vertex("s");
    let t = b.add_vertex("t");
    let paths = rng.gen_range(1..=max_paths);
    for p in 0..paths {
        let len = rng.gen_range(1..=max_len);
        let sure_path = p == paths - 1 && rng.gen_bool(0.5);
        let mut at = s;
        for k in 0..len {
            let next = if k + 1 == len {
                t
            } else {
                b.add_vertex(format!("p{p}.{k}"))
            };
            let cost = q(rng.gen_range(1..=4), 1);
            let name = format!("e{p}.{k}");
            if sure_path || rng.gen_bool(0.3) {
                b.add_sure(name, at, next, cost);
            } else {
                b.add_uncertain(name, at, next, cost, dyadic(rng));
            }
            at = next;
        }
    }
    b.set_source(s);
    b.set_target(t);
    b.build().unwrap()
}

/// A small general graph on s, a, b, c, t with a sure s-t edge.
///
/// With `normal_form` every uncertain edge either costs 0 or ends at t, the
/// shape the coin normalization handles exactly.
pub fn toy_with<R: Rng>(rng: &mut R, uncertain: usize, normal_form: bool) -> CtpInstance {
    let mut b = InstanceBuilder::new();
    let names = ["s", "a", "b", "c", "t"];
    let vs: Vec<_> = names.iter().map(|n| b.add_vertex(*n)).collect();
    let (s, t) = (vs[0], vs[4]);
    b.add_sure("st", s, t, q(rng.gen_range(6..=12), 1));
    // a sure spine keeps every vertex connected
    for k in 1..4 {
        b.add_sure(
            format!("spine{k}"),
            vs[k - 1],
            vs[k],
            q(rng.gen_range(1..=3), 1),
        );
    }
    for k in 0..uncertain {
        let a = rng.gen_range(0..4);
        let mut z = rng.gen_range(1..5);
        if z == a {
            z = 4;
        }
        let (a, z) = (vs[a], vs[z]);
        let cost = if normal_form && z != t {
            Rational::zero()
        } else {
            q(rng.gen_range(0..=3), 1)
        };
        b.add_uncertain(format!("u{k}"), a, z, cost, dyadic(rng));
    }
    b.set_source(s);
    b.set_target(t);
    b.build().unwrap()
}

pub fn disjoint_paths(seed: u64, max_paths: usize, max_len: usize) -> CtpInstance {
    disjoint_paths_with(&mut ChaCha8Rng::seed_from_u64(seed), max_paths, max_len)
}

pub fn toy(seed: u64, uncertain: usize, normal_form: bool) -> CtpInstance {
    toy_with(&mut ChaCha8Rng::seed_from_u64(seed), uncertain, normal_form)
}
