//! The classical greedy algorithm for one scenario and the backtracking
//! interval greedy algorithm that enumerates every ordered solution the
//! classical algorithm can produce over the weight box.
//!
//! Each enumerated solution carries its scenario box: the chosen elements'
//! weight intervals narrowed to the values compatible with the choices made
//! along the branch. The solution's weight interval is the endpoint sum of
//! the box entries of its chosen elements.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EnumerateError, InstanceError, ProbabilityError};
use crate::probability::WeightLaw;
use crate::problem::{GreedyProblem, Scenario, SelectionContext};
use crate::Interval;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Subtrees below this depth are explored sequentially even in parallel mode.
const PARALLEL_DEPTH: usize = 4;

/// An ordered greedy solution with the scenario box that produces it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderedSolution {
    pub order: Vec<usize>,
    /// One interval per ground element. Chosen elements hold their narrowed
    /// intervals, the others the box in force when the branch ended.
    pub scenario_box: Vec<Interval>,
    pub weight: Interval,
    pub probability: Option<f64>,
    #[serde(skip)]
    pub trace: Vec<BranchStep>,
}

impl OrderedSolution {
    /// Chosen element ids, ascending.
    pub fn elements(&self) -> Vec<usize> {
        let mut ids = self.order.clone();
        ids.sort_unstable();
        ids
    }

    /// Endpoint sum of the box entries of the chosen elements.
    pub fn box_weight(&self) -> Interval {
        self.order.iter().map(|&i| self.scenario_box[i]).sum()
    }
}

/// One branching decision: the candidate set at a node and the element taken.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchStep {
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    pub probability: Option<f64>,
}

/// A candidate at a node, with its weight interval at that node and the
/// divisor that turns weights into selection values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub id: usize,
    pub weight: Interval,
    pub divisor: f64,
}

impl Candidate {
    pub fn selection(&self) -> Interval {
        self.weight
            .divide(self.divisor)
            .expect("candidate divisors are positive")
    }
}

/// The united approximate solution set plus its grouping into unordered
/// solutions.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolutionSet {
    pub solutions: Vec<OrderedSolution>,
    pub groups: Vec<SolutionGroup>,
}

/// Ordered solutions sharing one element set. The scenario boxes of the
/// members are kept separately; their union may be disconnected.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionGroup {
    pub elements: Vec<usize>,
    pub solutions: Vec<usize>,
}

impl SolutionSet {
    pub fn new(solutions: Vec<OrderedSolution>) -> Self {
        let mut by_elements: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (idx, s) in solutions.iter().enumerate() {
            by_elements.entry(s.elements()).or_default().push(idx);
        }
        let groups = by_elements
            .into_iter()
            .map(|(elements, solutions)| SolutionGroup {
                elements,
                solutions,
            })
            .collect();
        SolutionSet { solutions, groups }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn find(&self, order: &[usize]) -> Option<&OrderedSolution> {
        self.solutions.iter().find(|s| s.order == order)
    }

    pub fn contains(&self, order: &[usize]) -> bool {
        self.find(order).is_some()
    }

    /// Sum of the attached probabilities, if every solution has one.
    pub fn total_probability(&self) -> Option<f64> {
        self.solutions.iter().map(|s| s.probability).sum()
    }

    /// Keeps only the solutions with `P(x) >= threshold`.
    pub fn filtered(&self, threshold: f64) -> SolutionSet {
        SolutionSet::new(
            self.solutions
                .iter()
                .filter(|s| s.probability.is_some_and(|p| p >= threshold))
                .cloned()
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    /// Branches whose running probability falls below this are pruned.
    /// Only used when `law` is set.
    pub threshold: f64,
    /// Distribution of the weights; when set, probabilities are attached.
    pub law: Option<WeightLaw>,
    pub node_budget: usize,
    pub parallel: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            threshold: 0.0,
            law: None,
            node_budget: DEFAULT_NODE_BUDGET,
            parallel: false,
        }
    }
}

impl EnumerateOptions {
    pub fn with_law(law: WeightLaw) -> Self {
        EnumerateOptions {
            law: Some(law),
            ..Default::default()
        }
    }
}

/// Runs the classical greedy algorithm for one scenario. Ties are broken
/// towards the lowest element id.
pub fn classical_greedy<P: GreedyProblem>(
    problem: &P,
    scenario: &Scenario,
) -> Result<OrderedSolution, InstanceError> {
    let checked = Scenario::new(scenario.values.clone(), problem.weights())?;
    let mut ctx = SelectionContext::with_weights(problem, checked.as_box());
    while !ctx.is_feasible() {
        let mut best: Option<(usize, f64)> = None;
        for id in ctx.selectable() {
            let score = checked.values[id] / ctx.divisor(id);
            if best.is_none_or(|(_, b)| score < b) {
                best = Some((id, score));
            }
        }
        let (id, _) = best.ok_or(InstanceError::Stuck)?;
        ctx.reduce_in_place(id)?;
    }
    let order = ctx.chosen().to_vec();
    let weight = Interval::point(checked.value_of(&order));
    Ok(OrderedSolution {
        order,
        scenario_box: checked.as_box(),
        weight,
        probability: None,
        trace: Vec::new(),
    })
}

/// Elements that have the minimum selection value for at least one scenario
/// of the current box: `lo(phi_i) <= min_j hi(phi_j)`. Ascending ids.
pub fn select_candidates<P: GreedyProblem>(
    ctx: &SelectionContext<'_, P>,
) -> Result<Vec<usize>, InstanceError> {
    let values: Vec<(usize, Interval)> = ctx
        .selectable()
        .map(|id| ctx.selection_value(id).map(|v| (id, v)))
        .collect::<Result<_, _>>()?;
    let bound = values
        .iter()
        .map(|(_, v)| v.hi())
        .min_by(f64::total_cmp)
        .ok_or(InstanceError::Stuck)?;
    Ok(values
        .into_iter()
        .filter(|(_, v)| v.lo() <= bound)
        .map(|(id, _)| id)
        .collect())
}

/// Weight interval of `q` narrowed to the values under which `q` can win
/// against the other candidates: its selection value may not exceed the
/// smallest upper selection value among them.
pub fn restrict_selected<P: GreedyProblem>(
    ctx: &SelectionContext<'_, P>,
    q: usize,
    candidates: &[usize],
) -> Result<Interval, InstanceError> {
    let bound = candidates
        .iter()
        .filter(|&&i| i != q)
        .map(|&i| ctx.selection_value(i).map(|v| v.hi()))
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))?;
    let own = ctx.selection_value(q)?;
    let w = ctx.weight(q);
    if own.hi() > bound {
        Ok(w.with_cap(ctx.divisor(q) * bound))
    } else {
        Ok(w)
    }
}

/// Takes `q` and returns the child node: every other selectable element whose
/// lower selection value lies below that of `q` gets its weight floor raised
/// to match, then the problem state is reduced by `q`.
///
/// The floor uses the divisors in force before the reduction.
pub fn modify_instance<'a, P: GreedyProblem>(
    ctx: &SelectionContext<'a, P>,
    q: usize,
) -> Result<SelectionContext<'a, P>, InstanceError> {
    let floor = ctx.selection_value(q)?.lo();
    let mut next = ctx.clone();
    for i in ctx.selectable().filter(|&i| i != q) {
        if ctx.selection_value(i)?.lo() < floor {
            next.set_weight(i, ctx.weight(i).with_floor(ctx.divisor(i) * floor));
        }
    }
    next.reduce_in_place(q)?;
    Ok(next)
}

/// Enumerates the united approximate solution set by depth-first
/// backtracking, branching on the candidates of each node in ascending id
/// order.
pub fn enumerate<P: GreedyProblem>(
    problem: &P,
    options: &EnumerateOptions,
) -> Result<SolutionSet, EnumerateError> {
    let search = Search {
        options,
        nodes: AtomicUsize::new(0),
    };
    let root = SelectionContext::new(problem);
    let mut out = Vec::new();
    let result = search.explore(root, 1.0, Vec::new(), 0, &mut out);
    match result {
        Ok(()) => Ok(SolutionSet::new(out)),
        Err(Halt::Budget) => Err(EnumerateError::BudgetExceeded {
            budget: options.node_budget,
            partial: Box::new(SolutionSet::new(out)),
        }),
        Err(Halt::Instance(e)) => Err(e.into()),
        Err(Halt::Probability(e)) => Err(e.into()),
    }
}

enum Halt {
    Budget,
    Instance(InstanceError),
    Probability(ProbabilityError),
}

impl From<InstanceError> for Halt {
    fn from(e: InstanceError) -> Self {
        Halt::Instance(e)
    }
}

impl From<ProbabilityError> for Halt {
    fn from(e: ProbabilityError) -> Self {
        Halt::Probability(e)
    }
}

struct Search<'o> {
    options: &'o EnumerateOptions,
    nodes: AtomicUsize,
}

impl Search<'_> {
    fn explore<P: GreedyProblem>(
        &self,
        ctx: SelectionContext<'_, P>,
        running: f64,
        trace: Vec<BranchStep>,
        depth: usize,
        out: &mut Vec<OrderedSolution>,
    ) -> Result<(), Halt> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.options.node_budget {
            return Err(Halt::Budget);
        }
        if ctx.is_feasible() {
            let order = ctx.chosen().to_vec();
            let scenario_box = ctx.weights().to_vec();
            let weight = order.iter().map(|&i| scenario_box[i]).sum();
            out.push(OrderedSolution {
                order,
                scenario_box,
                weight,
                probability: self.options.law.as_ref().map(|_| running),
                trace,
            });
            return Ok(());
        }

        let q_set = select_candidates(&ctx)?;
        let candidates: Vec<Candidate> = q_set
            .iter()
            .map(|&id| Candidate {
                id,
                weight: ctx.weight(id),
                divisor: ctx.divisor(id),
            })
            .collect();
        let step_probs = match &self.options.law {
            Some(law) => Some(law.step_probabilities(&candidates)?),
            None => None,
        };

        let mut children = Vec::with_capacity(q_set.len());
        for (k, &q) in q_set.iter().enumerate() {
            let step = step_probs.as_ref().map(|p| p[k]);
            let next_running = running * step.unwrap_or(1.0);
            if step.is_some()
                && self.options.threshold > 0.0
                && next_running < self.options.threshold
            {
                continue;
            }
            let restricted = restrict_selected(&ctx, q, &q_set)?;
            let mut child = modify_instance(&ctx, q)?;
            child.set_weight(q, restricted);
            let mut child_trace = trace.clone();
            child_trace.push(BranchStep {
                candidates: candidates.clone(),
                chosen: q,
                probability: step,
            });
            children.push((child, next_running, child_trace));
        }

        if self.options.parallel && depth < PARALLEL_DEPTH && children.len() > 1 {
            let results: Vec<(Vec<OrderedSolution>, Result<(), Halt>)> = children
                .into_par_iter()
                .map(|(child, p, t)| {
                    let mut local = Vec::new();
                    let r = self.explore(child, p, t, depth + 1, &mut local);
                    (local, r)
                })
                .collect();
            let mut halt = None;
            for (local, r) in results {
                out.extend(local);
                if let Err(e) = r {
                    halt.get_or_insert(e);
                }
            }
            return halt.map_or(Ok(()), Err);
        }

        for (child, p, t) in children {
            self.explore(child, p, t, depth + 1, out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{MstInstance, ScpInstance};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    /// Three single-item sets with relative weights [1,5], [3,7], [6,11].
    fn three_unit_sets() -> ScpInstance {
        ScpInstance::new(
            3,
            vec![vec![0], vec![1], vec![2]],
            vec![iv(1.0, 5.0), iv(3.0, 7.0), iv(6.0, 11.0)],
        )
        .unwrap()
    }

    fn both_needed() -> ScpInstance {
        ScpInstance::new(2, vec![vec![0], vec![1]], vec![iv(1.0, 3.0), iv(2.0, 4.0)]).unwrap()
    }

    #[test]
    fn candidates_follow_the_upper_bound_rule() {
        let p = three_unit_sets();
        assert_eq!(
            select_candidates(&SelectionContext::new(&p)).unwrap(),
            vec![0, 1]
        );

        let tied =
            ScpInstance::new(2, vec![vec![0, 1], vec![0, 1]], vec![iv(2.0, 2.0); 2]).unwrap();
        assert_eq!(
            select_candidates(&SelectionContext::new(&tied)).unwrap(),
            vec![0, 1]
        );

        let ctx = SelectionContext::new(&p)
            .reduce(0)
            .unwrap()
            .reduce(1)
            .unwrap();
        assert_eq!(select_candidates(&ctx).unwrap(), vec![2]);

        let done = ctx.reduce(2).unwrap();
        assert_eq!(select_candidates(&done), Err(InstanceError::Stuck));
    }

    #[test]
    fn restriction_caps_the_selected_weight() {
        // S1 has two items and weight [6,14], i.e. relative weight [3,7]
        let p = ScpInstance::new(
            4,
            vec![vec![0], vec![1, 2], vec![3]],
            vec![iv(1.0, 5.0), iv(6.0, 14.0), iv(6.0, 11.0)],
        )
        .unwrap();
        let ctx = SelectionContext::new(&p);
        let q = select_candidates(&ctx).unwrap();
        assert_eq!(q, vec![0, 1]);
        assert_eq!(restrict_selected(&ctx, 1, &q).unwrap(), iv(6.0, 10.0));
        // S0 already lies below every competitor's upper bound
        assert_eq!(restrict_selected(&ctx, 0, &q).unwrap(), iv(1.0, 5.0));
        // no competitors, no restriction
        assert_eq!(restrict_selected(&ctx, 1, &[1]).unwrap(), iv(6.0, 14.0));
    }

    #[test]
    fn modification_raises_floors_of_cheaper_elements() {
        let p = three_unit_sets();
        let ctx = SelectionContext::new(&p);
        let child = modify_instance(&ctx, 1).unwrap();
        assert_eq!(child.weight(0), iv(3.0, 5.0));
        assert_eq!(child.weight(2), iv(6.0, 11.0));
        assert_eq!(child.chosen(), &[1]);

        // nothing below S0's floor, nothing changes
        let child = modify_instance(&ctx, 0).unwrap();
        assert_eq!(child.weight(1), iv(3.0, 7.0));
    }

    #[test]
    fn modification_uses_sizes_before_reduction() {
        // S0 = {0,1} with weight [2,8] (relative [1,4]); S1 = {1} weight [3,4].
        // Taking S1 raises S0's floor to 2 * 3 = 6 even though S0 then has one
        // uncovered item left.
        let p = ScpInstance::new(
            2,
            vec![vec![0, 1], vec![1]],
            vec![iv(2.0, 8.0), iv(3.0, 4.0)],
        )
        .unwrap();
        let child = modify_instance(&SelectionContext::new(&p), 1).unwrap();
        assert_eq!(child.weight(0), iv(6.0, 8.0));
    }

    #[test]
    fn emptied_elements_stay_but_are_not_selectable() {
        let p = ScpInstance::new(
            2,
            vec![vec![0, 1], vec![0], vec![1]],
            vec![iv(1.0, 2.0), iv(1.0, 2.0), iv(1.0, 2.0)],
        )
        .unwrap();
        let child = modify_instance(&SelectionContext::new(&p), 0).unwrap();
        assert_eq!(child.weights().len(), 3);
        assert!(!child.is_selectable(1));
        assert!(!child.is_selectable(2));
        assert!(child.is_feasible());
    }

    #[test]
    fn classical_examples() {
        let p = ScpInstance::new(
            2,
            vec![vec![0, 1], vec![0], vec![1]],
            vec![iv(1.0, 1.0), iv(1.0, 1.0), iv(1.0, 1.0)],
        )
        .unwrap();
        let s = classical_greedy(&p, &Scenario::lower(p.weights())).unwrap();
        assert_eq!(s.order, vec![0]);

        let p = three_unit_sets();
        let w = Scenario::new(vec![2.0, 4.0, 7.0], p.weights()).unwrap();
        let s = classical_greedy(&p, &w).unwrap();
        assert_eq!(s.order[0], 0);
        assert_eq!(s.weight, Interval::point(13.0));

        let tri = MstInstance::new(
            3,
            vec![(0, 1), (1, 2), (0, 2)],
            vec![iv(1.0, 1.0), iv(2.0, 2.0), iv(3.0, 3.0)],
        )
        .unwrap();
        let s = classical_greedy(&tri, &Scenario::lower(tri.weights())).unwrap();
        assert_eq!(s.order, vec![0, 1]);

        let outside = Scenario {
            values: vec![0.5, 4.0, 7.0],
        };
        assert!(classical_greedy(&p, &outside).is_err());
    }

    #[test]
    fn degenerate_weights_reduce_to_classical() {
        let p = ScpInstance::new(
            4,
            vec![vec![0, 1], vec![1, 2, 3], vec![3], vec![0, 2]],
            vec![iv(2.0, 2.0), iv(4.0, 4.0), iv(1.5, 1.5), iv(3.0, 3.0)],
        )
        .unwrap();
        let set = enumerate(&p, &EnumerateOptions::default()).unwrap();
        let classical = classical_greedy(&p, &Scenario::lower(p.weights())).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.solutions[0].order, classical.order);
        assert_eq!(set.solutions[0].weight, classical.weight);
    }

    #[test]
    fn root_branches_on_two_candidates() {
        let p = three_unit_sets();
        let set = enumerate(&p, &EnumerateOptions::default()).unwrap();
        let firsts: std::collections::BTreeSet<usize> =
            set.solutions.iter().map(|s| s.order[0]).collect();
        assert_eq!(firsts.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn both_orders_of_two_required_sets() {
        let p = both_needed();
        let set = enumerate(&p, &EnumerateOptions::default()).unwrap();
        let orders: Vec<_> = set.solutions.iter().map(|s| s.order.clone()).collect();
        assert_eq!(orders, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(set.groups.len(), 1);
        assert_eq!(set.groups[0].solutions, vec![0, 1]);
        // taking S1 first forces w1 <= 3 and w0 >= 2
        let second = &set.solutions[1];
        assert_eq!(second.scenario_box, vec![iv(2.0, 3.0), iv(2.0, 3.0)]);
        assert_eq!(second.weight, iv(4.0, 6.0));
        assert!(set.solutions.iter().all(|s| s.probability.is_none()));
    }

    #[test]
    fn probabilities_along_branches() {
        let p = both_needed();
        let set = enumerate(&p, &EnumerateOptions::with_law(WeightLaw::Uniform)).unwrap();
        let probs: Vec<f64> = set
            .solutions
            .iter()
            .map(|s| s.probability.unwrap())
            .collect();
        assert!((probs[0] - 7.0 / 8.0).abs() < 1e-15);
        assert!((probs[1] - 1.0 / 8.0).abs() < 1e-15);
        assert_eq!(set.solutions[0].trace.len(), 2);
    }

    #[test]
    fn threshold_prunes_unlikely_branches() {
        let p = both_needed();
        let mut options = EnumerateOptions::with_law(WeightLaw::Uniform);
        options.threshold = 0.2;
        let set = enumerate(&p, &options).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.solutions[0].order, vec![0, 1]);
    }

    #[test]
    fn budget_exhaustion_returns_partial_results() {
        let p = three_unit_sets();
        let options = EnumerateOptions {
            node_budget: 4,
            ..Default::default()
        };
        match enumerate(&p, &options) {
            Err(EnumerateError::BudgetExceeded { budget, partial }) => {
                assert_eq!(budget, 4);
                assert!(!partial.is_empty());
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = ScpInstance::new(
            5,
            vec![
                vec![0, 1],
                vec![1, 2],
                vec![2, 3],
                vec![3, 4],
                vec![4, 0],
                vec![0, 2, 4],
            ],
            vec![
                iv(1.0, 3.0),
                iv(1.5, 2.5),
                iv(1.0, 4.0),
                iv(2.0, 3.0),
                iv(0.5, 3.5),
                iv(2.0, 5.0),
            ],
        )
        .unwrap();
        let mut options = EnumerateOptions::with_law(WeightLaw::Uniform);
        let seq = enumerate(&p, &options).unwrap();
        options.parallel = true;
        let par = enumerate(&p, &options).unwrap();
        assert_eq!(seq, par);
    }
}
