//! Brute-force and Monte Carlo checks of the enumeration: sampled scenarios
//! are replayed through the classical greedy algorithm and the outcomes
//! compared with the enumerated solutions and their probabilities.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::InstanceError;
use crate::greedy::{classical_greedy, OrderedSolution, SolutionSet};
use crate::probability::WeightLaw;
use crate::problem::{GreedyProblem, Scenario, SelectionContext};
use crate::strong::ExactSolver;
use crate::Interval;

/// Largest instance the scenario-box grid search accepts.
pub const GRID_SEARCH_LIMIT: usize = 5;

/// Slack allowed when comparing selection values in the tie-permissive check.
const TIE_TOLERANCE: f64 = 1e-12;

/// Draws `n` scenarios, each coordinate independently from `law` on the
/// element's interval. The stream depends only on `seed`.
pub fn sample_scenarios(
    weights: &[Interval],
    law: &WeightLaw,
    n: usize,
    seed: u64,
) -> Vec<Scenario> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let densities: Vec<_> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| law.element_density(i, w))
        .collect();
    (0..n)
        .map(|_| Scenario {
            values: weights
                .iter()
                .zip(&densities)
                .map(|(w, d)| {
                    let u: f64 = rng.gen();
                    d.quantile_in(w, u)
                })
                .collect(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservedSolution {
    pub order: Vec<usize>,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyDeviation {
    pub order: Vec<usize>,
    pub probability: f64,
    pub frequency: f64,
    /// `frequency - probability`.
    pub deviation: f64,
    /// Deviation in binomial standard errors. Infinite when the probability
    /// is 0 or 1 and the frequency differs from it.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    /// Ordered greedy outputs seen, sorted by order.
    pub observed_solutions: Vec<ObservedSolution>,
    /// Observed orders absent from the enumerated set.
    pub missing_from_enumeration: Vec<Vec<usize>>,
    /// One entry per enumerated solution carrying a probability.
    pub frequency_deviations: Vec<FrequencyDeviation>,
    /// Largest greedy/optimal value ratio over the samples, if audited.
    pub worst_ratio: Option<f64>,
    pub ratio_bound: Option<f64>,
    /// Samples whose ratio exceeded the bound.
    pub ratio_violations: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.missing_from_enumeration.is_empty() && self.ratio_violations == 0
    }

    pub fn max_abs_z(&self) -> f64 {
        self.frequency_deviations
            .iter()
            .map(|d| d.z.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ReplayOptions {
    pub samples: usize,
    pub seed: u64,
    /// Compare every greedy value with the exact optimum.
    pub audit_ratio: bool,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            samples: 10_000,
            seed: 0,
            audit_ratio: false,
        }
    }
}

/// Replays sampled scenarios through the classical greedy algorithm and
/// tabulates the outcomes against `set`, which should have been enumerated
/// without pruning.
pub fn replay_validate<P: ExactSolver>(
    problem: &P,
    set: &SolutionSet,
    law: &WeightLaw,
    options: &ReplayOptions,
) -> Result<ValidationReport, InstanceError> {
    let scenarios = sample_scenarios(problem.weights(), law, options.samples, options.seed);
    let outcomes: Vec<(Vec<usize>, Option<f64>)> = scenarios
        .par_iter()
        .map(|w| {
            let run = classical_greedy(problem, w)?;
            let ratio = if options.audit_ratio {
                let (opt, _) = problem.exact_optimum(w)?;
                Some(run.weight.lo() / opt)
            } else {
                None
            };
            Ok((run.order, ratio))
        })
        .collect::<Result<_, InstanceError>>()?;

    let n = options.samples;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut worst_ratio: Option<f64> = None;
    let bound = options.audit_ratio.then(|| problem.greedy_ratio_bound());
    let mut ratio_violations = 0;
    for (order, ratio) in outcomes {
        *counts.entry(order).or_default() += 1;
        if let (Some(r), Some(b)) = (ratio, bound) {
            worst_ratio = Some(worst_ratio.map_or(r, |w: f64| w.max(r)));
            if r > b * (1.0 + 1e-12) {
                ratio_violations += 1;
            }
        }
    }

    let frequency = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let missing_from_enumeration = counts
        .keys()
        .filter(|order| !set.contains(order))
        .cloned()
        .collect();
    let frequency_deviations = set
        .solutions
        .iter()
        .filter_map(|s| {
            let p = s.probability?;
            let f = frequency(counts.get(&s.order).copied().unwrap_or(0));
            Some(FrequencyDeviation {
                order: s.order.clone(),
                probability: p,
                frequency: f,
                deviation: f - p,
                z: z_score(f, p, n),
            })
        })
        .collect();
    let observed_solutions = counts
        .into_iter()
        .map(|(order, count)| ObservedSolution {
            order,
            count,
            frequency: frequency(count),
        })
        .collect();
    Ok(ValidationReport {
        samples: n,
        seed: options.seed,
        observed_solutions,
        missing_from_enumeration,
        frequency_deviations,
        worst_ratio,
        ratio_bound: bound,
        ratio_violations,
    })
}

fn z_score(frequency: f64, probability: f64, n: usize) -> f64 {
    let dev = frequency - probability;
    let se = (probability * (1.0 - probability) / n as f64).sqrt();
    if se > 0.0 {
        dev / se
    } else if dev == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(dev)
    }
}

/// Whether some tie-breaking rule lets the classical greedy algorithm return
/// exactly `order` at `scenario`: every step must take an element whose
/// selection value is minimal, and the solution must become feasible exactly
/// at the last step.
pub fn greedy_admits<P: GreedyProblem>(problem: &P, scenario: &Scenario, order: &[usize]) -> bool {
    let mut ctx = SelectionContext::with_weights(problem, scenario.as_box());
    for &id in order {
        if ctx.is_feasible() || !ctx.is_selectable(id) {
            return false;
        }
        let own = scenario.values[id] / ctx.divisor(id);
        let min = ctx
            .selectable()
            .map(|j| scenario.values[j] / ctx.divisor(j))
            .fold(f64::INFINITY, f64::min);
        if own > min + TIE_TOLERANCE * min.abs().max(1.0) {
            return false;
        }
        if ctx.reduce_in_place(id).is_err() {
            return false;
        }
    }
    ctx.is_feasible()
}

fn grid(interval: Interval, points: usize) -> Vec<f64> {
    if interval.is_degenerate() || points <= 1 {
        return vec![interval.midpoint()];
    }
    (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            (interval.lo() + t * interval.width()).min(interval.hi())
        })
        .collect()
}

/// Searches the grid of scenarios with `w_element = value` and every other
/// coordinate on a grid of its original interval for one admitting `order`.
pub fn find_witness<P: GreedyProblem>(
    problem: &P,
    order: &[usize],
    element: usize,
    value: f64,
    points: usize,
) -> Option<Scenario> {
    let axes: Vec<Vec<f64>> = problem
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if i == element {
                vec![value]
            } else {
                grid(w, points)
            }
        })
        .collect();
    let mut index = vec![0usize; axes.len()];
    loop {
        let scenario = Scenario {
            values: index.iter().zip(&axes).map(|(&k, a)| a[k]).collect(),
        };
        if greedy_admits(problem, &scenario, order) {
            return Some(scenario);
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == axes.len() {
                return None;
            }
            index[d] += 1;
            if index[d] < axes[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCheckReport {
    pub order: Vec<usize>,
    pub grid_points: usize,
    /// Number of (element, value) pairs checked.
    pub checked: usize,
    /// Pairs for which no witness scenario was found.
    pub unwitnessed: Vec<(usize, f64)>,
}

impl BoxCheckReport {
    pub fn passed(&self) -> bool {
        self.unwitnessed.is_empty()
    }
}

/// For each chosen element and each grid value of its scenario-box interval,
/// looks for a grid scenario with that value on which the greedy algorithm can
/// return `solution`.
pub fn brute_force_scenario_box<P: GreedyProblem>(
    problem: &P,
    solution: &OrderedSolution,
    points: usize,
) -> Result<BoxCheckReport, InstanceError> {
    if problem.len() > GRID_SEARCH_LIMIT {
        return Err(InstanceError::TooLarge {
            what: "scenario box grid search",
            limit: GRID_SEARCH_LIMIT,
            actual: problem.len(),
        });
    }
    let pairs: Vec<(usize, f64)> = solution
        .order
        .iter()
        .flat_map(|&i| {
            grid(solution.scenario_box[i], points)
                .into_iter()
                .map(move |v| (i, v))
        })
        .collect();
    let unwitnessed = pairs
        .par_iter()
        .filter(|&&(i, v)| find_witness(problem, &solution.order, i, v, points).is_none())
        .copied()
        .collect();
    Ok(BoxCheckReport {
        order: solution.order.clone(),
        grid_points: points,
        checked: pairs.len(),
        unwitnessed,
    })
}
