//! Strong solutions: a feasible solution is optimal for every scenario in the
//! weight box exactly when it is optimal for its worst scenario, where its own
//! elements sit at their upper bounds and every other element at its lower
//! bound. Certifying a solution therefore takes one exact solve.

use serde::Serialize;

use crate::error::InstanceError;
use crate::problem::{GreedyProblem, MstInstance, Scenario, ScpInstance};
use crate::Interval;

/// Largest set-cover instance the exhaustive solver accepts.
pub const EXACT_SCP_LIMIT: usize = 25;

/// Relative slack when comparing objective values summed in different orders.
const VALUE_TOLERANCE: f64 = 1e-12;

/// Problems that can be solved exactly at small scale.
pub trait ExactSolver: GreedyProblem {
    /// Whether `ids` is a feasible solution of the underlying problem.
    fn is_feasible_set(&self, ids: &[usize]) -> bool;

    /// Minimum objective value at `scenario` and one minimizer (sorted ids).
    fn exact_optimum(&self, scenario: &Scenario) -> Result<(f64, Vec<usize>), InstanceError>;

    /// Bound on the ratio of a classical greedy solution's value to the
    /// optimum, for any scenario.
    fn greedy_ratio_bound(&self) -> f64;
}

/// `H(m) = 1 + 1/2 + ... + 1/m`.
pub fn harmonic(m: usize) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum()
}

impl ExactSolver for ScpInstance {
    fn is_feasible_set(&self, ids: &[usize]) -> bool {
        ids.iter().all(|&i| i < self.len()) && self.covers(ids)
    }

    fn exact_optimum(&self, scenario: &Scenario) -> Result<(f64, Vec<usize>), InstanceError> {
        if self.len() > EXACT_SCP_LIMIT {
            return Err(InstanceError::TooLarge {
                what: "exact set cover",
                limit: EXACT_SCP_LIMIT,
                actual: self.len(),
            });
        }
        check_length(scenario, self.len())?;
        let mut containing = vec![Vec::new(); self.universe()];
        for (s, items) in self.sets().iter().enumerate() {
            for &u in items {
                containing[u].push(s);
            }
        }
        // cheapest sets first so that good covers are found early
        for list in &mut containing {
            list.sort_by(|&a, &b| {
                scenario.values[a]
                    .total_cmp(&scenario.values[b])
                    .then(a.cmp(&b))
            });
        }
        let mut search = CoverSearch {
            scp: self,
            values: &scenario.values,
            containing: &containing,
            covered: vec![0; self.universe()],
            picked: Vec::new(),
            best: f64::INFINITY,
            best_set: Vec::new(),
        };
        search.run(0.0);
        let mut best = search.best_set;
        best.sort_unstable();
        Ok((search.best, best))
    }

    fn greedy_ratio_bound(&self) -> f64 {
        harmonic(self.universe())
    }
}

/// Branches on the sets covering the lowest uncovered item.
struct CoverSearch<'a> {
    scp: &'a ScpInstance,
    values: &'a [f64],
    containing: &'a [Vec<usize>],
    covered: Vec<u32>,
    picked: Vec<usize>,
    best: f64,
    best_set: Vec<usize>,
}

impl CoverSearch<'_> {
    fn run(&mut self, cost: f64) {
        if cost >= self.best {
            return;
        }
        let Some(item) = self.covered.iter().position(|&c| c == 0) else {
            self.best = cost;
            self.best_set = self.picked.clone();
            return;
        };
        for k in 0..self.containing[item].len() {
            let s = self.containing[item][k];
            for &u in &self.scp.sets()[s] {
                self.covered[u] += 1;
            }
            self.picked.push(s);
            self.run(cost + self.values[s]);
            self.picked.pop();
            for &u in &self.scp.sets()[s] {
                self.covered[u] -= 1;
            }
        }
    }
}

impl ExactSolver for MstInstance {
    fn is_feasible_set(&self, ids: &[usize]) -> bool {
        ids.iter().all(|&i| i < self.len()) && self.is_spanning_tree(ids)
    }

    fn exact_optimum(&self, scenario: &Scenario) -> Result<(f64, Vec<usize>), InstanceError> {
        check_length(scenario, self.len())?;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            scenario.values[a]
                .total_cmp(&scenario.values[b])
                .then(a.cmp(&b))
        });
        let mut parent: Vec<usize> = (0..self.vertices()).collect();
        fn root(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut tree = Vec::with_capacity(self.vertices().saturating_sub(1));
        for e in order {
            let (u, v) = self.edges()[e];
            let (ru, rv) = (root(&mut parent, u), root(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                tree.push(e);
            }
        }
        tree.sort_unstable();
        Ok((scenario.value_of(&tree), tree))
    }

    /// Greedy edge selection is Kruskal's algorithm.
    fn greedy_ratio_bound(&self) -> f64 {
        1.0
    }
}

fn check_length(scenario: &Scenario, len: usize) -> Result<(), InstanceError> {
    if scenario.values.len() != len {
        return Err(InstanceError::ScenarioLength {
            expected: len,
            actual: scenario.values.len(),
        });
    }
    Ok(())
}

/// Upper bounds on the elements of `x`, lower bounds elsewhere.
pub fn worst_scenario(weights: &[Interval], x: &[usize]) -> Scenario {
    let mut s = Scenario::lower(weights);
    for &i in x {
        s.values[i] = weights[i].hi();
    }
    s
}

/// Lower bounds on the elements of `x`, upper bounds elsewhere: the scenario
/// most favorable to `x` against every other solution.
pub fn best_scenario(weights: &[Interval], x: &[usize]) -> Scenario {
    let mut s = Scenario::upper(weights);
    for &i in x {
        s.values[i] = weights[i].lo();
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    /// Optimal for every scenario.
    Strong,
    /// Optimal for some scenario but not for its worst one.
    WeakOnly,
    /// Infeasible, or optimal for no scenario.
    NotWeakVerified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub solution: Vec<usize>,
    pub status: Strength,
    pub worst_scenario: Scenario,
    /// `None` when the solution is infeasible.
    pub value_at_worst: Option<f64>,
    pub optimal_value_at_worst: f64,
    pub optimal_solution_at_worst: Vec<usize>,
    /// A scenario at which the solution is optimal, if there is one.
    pub weak_witness: Option<Scenario>,
}

impl Certificate {
    pub fn is_strong(&self) -> bool {
        self.status == Strength::Strong
    }
}

fn at_most(value: f64, optimum: f64) -> bool {
    value <= optimum + VALUE_TOLERANCE * optimum.abs().max(1.0)
}

/// Classifies `x` (an unordered set of element ids) by the worst-scenario
/// test. A feasible `x` that fails it is checked at its best scenario, which
/// decides weak optimality exactly: moving any weight towards that scenario
/// can only improve `x` relative to every other solution.
pub fn certify<P: ExactSolver>(problem: &P, x: &[usize]) -> Result<Certificate, InstanceError> {
    let len = problem.len();
    if let Some(&bad) = x.iter().find(|&&i| i >= len) {
        return Err(InstanceError::NoSuchElement { index: bad, len });
    }
    let mut solution = x.to_vec();
    solution.sort_unstable();
    solution.dedup();

    let weights = problem.weights();
    let worst = worst_scenario(weights, &solution);
    let (optimum, argmin) = problem.exact_optimum(&worst)?;
    let feasible = problem.is_feasible_set(&solution);
    let value = feasible.then(|| worst.value_of(&solution));

    let mut status = Strength::NotWeakVerified;
    let mut weak_witness = None;
    if let Some(v) = value {
        if at_most(v, optimum) {
            status = Strength::Strong;
            weak_witness = Some(worst.clone());
        } else {
            let best = best_scenario(weights, &solution);
            let (best_opt, _) = problem.exact_optimum(&best)?;
            if at_most(best.value_of(&solution), best_opt) {
                status = Strength::WeakOnly;
                weak_witness = Some(best);
            }
        }
    }
    Ok(Certificate {
        solution,
        status,
        worst_scenario: worst,
        value_at_worst: value,
        optimal_value_at_worst: optimum,
        optimal_solution_at_worst: argmin,
        weak_witness,
    })
}
