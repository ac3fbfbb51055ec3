//! Problems of the form "pick elements of a ground set until the pick is
//! feasible, minimizing the summed weight", with interval weights.
//!
//! An instantiation supplies only a selection divisor, a selectability test,
//! a feasibility test and a state reduction. The greedy score of an element is
//! `phi(e) = w(e) / divisor(e)`, so an interval weight maps to the interval
//! score `w(e) / divisor(e)` and every bound on the score maps back to a bound
//! on the weight.

mod mst;
mod scp;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use mst::{MstInstance, MstState};
pub use scp::{ScpInstance, ScpState};

use crate::error::InstanceError;
use crate::Interval;

pub trait GreedyProblem: Sync {
    type State: Clone + fmt::Debug + Send + Sync;

    /// Interval weights of the ground elements, indexed by element id.
    fn weights(&self) -> &[Interval];

    fn initial_state(&self) -> Self::State;

    /// Divisor of the selection function for `id` in `state`.
    ///
    /// Only meaningful when `id` is selectable; it is then strictly positive.
    fn selection_divisor(&self, state: &Self::State, id: usize) -> f64;

    fn is_selectable(&self, state: &Self::State, id: usize) -> bool;

    fn is_feasible(&self, state: &Self::State) -> bool;

    /// Records the choice of `id`. Weights are not touched here.
    fn reduce(&self, state: &mut Self::State, id: usize);

    fn len(&self) -> usize {
        self.weights().len()
    }

    fn is_empty(&self) -> bool {
        self.weights().is_empty()
    }
}

/// A real-valued weight vector drawn from the weight box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scenario {
    pub values: Vec<f64>,
}

impl Scenario {
    /// Builds a scenario after checking that it lies in `weights`.
    pub fn new(values: Vec<f64>, weights: &[Interval]) -> Result<Self, InstanceError> {
        if values.len() != weights.len() {
            return Err(InstanceError::ScenarioLength {
                expected: weights.len(),
                actual: values.len(),
            });
        }
        for (index, (&value, interval)) in values.iter().zip(weights).enumerate() {
            if !interval.contains(value) {
                return Err(InstanceError::ScenarioOutOfBox {
                    index,
                    value,
                    interval: *interval,
                });
            }
        }
        Ok(Scenario { values })
    }

    pub fn lower(weights: &[Interval]) -> Self {
        Scenario {
            values: weights.iter().map(Interval::lo).collect(),
        }
    }

    pub fn upper(weights: &[Interval]) -> Self {
        Scenario {
            values: weights.iter().map(Interval::hi).collect(),
        }
    }

    pub fn midpoint(weights: &[Interval]) -> Self {
        Scenario {
            values: weights.iter().map(Interval::midpoint).collect(),
        }
    }

    /// The degenerate box of this scenario.
    pub fn as_box(&self) -> Vec<Interval> {
        self.values.iter().map(|&v| Interval::point(v)).collect()
    }

    /// Objective value `sum of w(e)` over `ids`.
    pub fn value_of(&self, ids: &[usize]) -> f64 {
        ids.iter().map(|&i| self.values[i]).sum()
    }
}

/// A node of the greedy search: the current (possibly modified) weight box,
/// the problem state and the ordered list of elements chosen so far.
#[derive(Debug)]
pub struct SelectionContext<'a, P: GreedyProblem> {
    problem: &'a P,
    state: P::State,
    weights: Vec<Interval>,
    chosen: Vec<usize>,
}

impl<P: GreedyProblem> Clone for SelectionContext<'_, P> {
    fn clone(&self) -> Self {
        SelectionContext {
            problem: self.problem,
            state: self.state.clone(),
            weights: self.weights.clone(),
            chosen: self.chosen.clone(),
        }
    }
}

impl<'a, P: GreedyProblem> SelectionContext<'a, P> {
    pub fn new(problem: &'a P) -> Self {
        Self::with_weights(problem, problem.weights().to_vec())
    }

    /// Starts from a box other than the instance's own, e.g. a degenerate
    /// scenario box.
    pub fn with_weights(problem: &'a P, weights: Vec<Interval>) -> Self {
        debug_assert_eq!(weights.len(), problem.len());
        SelectionContext {
            problem,
            state: problem.initial_state(),
            weights,
            chosen: Vec::new(),
        }
    }

    pub fn problem(&self) -> &'a P {
        self.problem
    }

    pub fn state(&self) -> &P::State {
        &self.state
    }

    pub fn weights(&self) -> &[Interval] {
        &self.weights
    }

    pub fn weight(&self, id: usize) -> Interval {
        self.weights[id]
    }

    pub(crate) fn set_weight(&mut self, id: usize, w: Interval) {
        self.weights[id] = w;
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn is_selectable(&self, id: usize) -> bool {
        id < self.problem.len()
            && !self.chosen.contains(&id)
            && self.problem.is_selectable(&self.state, id)
    }

    pub fn is_feasible(&self) -> bool {
        self.problem.is_feasible(&self.state)
    }

    pub fn selectable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.problem.len()).filter(move |&i| self.is_selectable(i))
    }

    pub fn divisor(&self, id: usize) -> f64 {
        self.problem.selection_divisor(&self.state, id)
    }

    /// Interval of selection-function values of `id` over the current box.
    pub fn selection_value(&self, id: usize) -> Result<Interval, InstanceError> {
        if id >= self.problem.len() {
            return Err(InstanceError::NoSuchElement {
                index: id,
                len: self.problem.len(),
            });
        }
        if !self.is_selectable(id) {
            return Err(InstanceError::NotSelectable(id));
        }
        Ok(self.weights[id].divide(self.divisor(id))?)
    }

    /// Appends `id` to the chosen list and reduces the problem state.
    pub fn reduce(&self, id: usize) -> Result<Self, InstanceError> {
        let mut next = self.clone();
        next.reduce_in_place(id)?;
        Ok(next)
    }

    pub(crate) fn reduce_in_place(&mut self, id: usize) -> Result<(), InstanceError> {
        if !self.is_selectable(id) {
            return Err(InstanceError::NotSelectable(id));
        }
        self.problem.reduce(&mut self.state, id);
        self.chosen.push(id);
        Ok(())
    }
}

/// A parsed instance of one of the supported problem types.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Instance {
    Scp(ScpInstance),
    Mst(MstInstance),
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn weights(&self) -> &[Interval] {
        match self {
            Instance::Scp(p) => p.weights(),
            Instance::Mst(p) => p.weights(),
        }
    }
}

pub(crate) fn check_weights(weights: &[Interval]) -> Result<(), InstanceError> {
    for (index, w) in weights.iter().enumerate() {
        if !(w.lo() > 0.0) {
            return Err(InstanceError::NonPositiveWeight { index, lo: w.lo() });
        }
    }
    Ok(())
}
