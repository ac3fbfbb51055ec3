//! Instances shared by the integration tests.
#![allow(dead_code)]

use interval_greedy::{GreedyProblem, Interval, ScpInstance};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

pub fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

/// A random set cover with at most 12 items and 8 sets. Each weight has a
/// mean in [1, 10] and a radius drawn from [0, mean / 2].
pub fn random_scp(seed: u64) -> ScpInstance {
    let mut rng = Pcg64::seed_from_u64(seed);
    let m = rng.gen_range(2..=12);
    let n = rng.gen_range(2..=8);
    let mut sets: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut s: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.35)).collect();
            if s.is_empty() {
                s.push(rng.gen_range(0..m));
            }
            s
        })
        .collect();
    for u in 0..m {
        if !sets.iter().any(|s| s.contains(&u)) {
            let k = rng.gen_range(0..n);
            sets[k].push(u);
            sets[k].sort_unstable();
        }
    }
    let weights = (0..n)
        .map(|_| {
            let mean: f64 = rng.gen_range(1.0..10.0);
            let r = rng.gen_range(0.0..mean / 2.0);
            iv(mean - r, mean + r)
        })
        .collect();
    ScpInstance::new(m, sets, weights).unwrap()
}

/// Random instance whose weights are all degenerate and distinct, so every
/// greedy step has a unique minimum.
pub fn random_degenerate_scp(seed: u64) -> ScpInstance {
    let base = random_scp(seed);
    let mut rng = Pcg64::seed_from_u64(seed ^ 0x5eed);
    let weights = (0..base.len())
        .map(|_| {
            let v: f64 = rng.gen_range(1.0..10.0);
            iv(v, v)
        })
        .collect();
    base.with_weights(weights).unwrap()
}

/// Fixed regression instances: five small hand-built covers followed by
/// generator seeds 1000 to 1004.
pub fn regression_instances() -> Vec<(String, ScpInstance)> {
    let mut out = vec![
        (
            "two singletons".to_string(),
            ScpInstance::new(2, vec![vec![0], vec![1]], vec![iv(1.0, 3.0), iv(2.0, 4.0)]).unwrap(),
        ),
        (
            "three singletons".to_string(),
            ScpInstance::new(
                3,
                vec![vec![0], vec![1], vec![2]],
                vec![iv(1.0, 5.0), iv(3.0, 7.0), iv(6.0, 11.0)],
            )
            .unwrap(),
        ),
        (
            "pair and singletons".to_string(),
            ScpInstance::new(
                4,
                vec![vec![0], vec![1, 2], vec![3]],
                vec![iv(1.0, 5.0), iv(6.0, 14.0), iv(6.0, 11.0)],
            )
            .unwrap(),
        ),
        (
            "staggered singletons".to_string(),
            ScpInstance::new(
                3,
                vec![vec![0], vec![1], vec![2]],
                vec![iv(1.0, 4.0), iv(3.0, 6.0), iv(2.0, 5.0)],
            )
            .unwrap(),
        ),
        (
            "cycle with chord".to_string(),
            ScpInstance::new(
                4,
                vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![0, 2]],
                vec![
                    iv(2.0, 4.0),
                    iv(1.5, 3.5),
                    iv(2.5, 3.0),
                    iv(1.0, 4.5),
                    iv(1.8, 2.6),
                ],
            )
            .unwrap(),
        ),
    ];
    for seed in 1000..1005 {
        out.push((format!("random seed {seed}"), random_scp(seed)));
    }
    out
}
