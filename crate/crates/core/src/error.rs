use thiserror::Error;

use crate::greedy::SolutionSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval endpoints must be finite, got [{lo}, {hi}]")]
    NotFinite { lo: f64, hi: f64 },
    #[error("interval lower bound {lo} exceeds upper bound {hi}")]
    Reversed { lo: f64, hi: f64 },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
}

/// Problems with an instance or with a request made against it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("weight {index} must have a positive lower bound, got {lo}")]
    NonPositiveWeight { index: usize, lo: f64 },
    #[error("expected {expected} weights, got {actual}")]
    WeightCount { expected: usize, actual: usize },
    #[error("set {set} references item {item} outside the universe of size {universe}")]
    ItemOutOfRange {
        set: usize,
        item: usize,
        universe: usize,
    },
    #[error("items {0:?} are not covered by any set")]
    Uncoverable(Vec<usize>),
    #[error("edge {edge} references vertex {vertex} but the graph has {vertices} vertices")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("the graph is not connected, so no spanning tree exists")]
    Disconnected,
    #[error("element {0} is not selectable in the current state")]
    NotSelectable(usize),
    #[error("element {index} does not exist (instance has {len} elements)")]
    NoSuchElement { index: usize, len: usize },
    #[error("no selectable element remains but the partial solution is infeasible")]
    Stuck,
    #[error("scenario has {actual} values, instance has {expected} elements")]
    ScenarioLength { expected: usize, actual: usize },
    #[error(
        "scenario value {value} for element {index} lies outside its weight interval {interval}"
    )]
    ScenarioOutOfBox {
        index: usize,
        value: f64,
        interval: crate::Interval,
    },
    #[error("{what} supports at most {limit} elements, instance has {actual}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("density for element {index} integrates to {mass} over {interval}, expected 1")]
    NotNormalized {
        index: usize,
        mass: f64,
        interval: crate::Interval,
    },
    #[error("density for element {index}: {reason}")]
    Invalid { index: usize, reason: String },
}

#[derive(Debug, Clone, Error)]
pub enum EnumerateError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
    #[error("node budget of {budget} exceeded after {} solutions", partial.solutions.len())]
    BudgetExceeded {
        budget: usize,
        partial: Box<SolutionSet>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbabilityError {
    #[error("element {0} has a degenerate selection interval; use the degenerate formula")]
    Degenerate(usize),
    #[error("element {0} is not among the candidates")]
    NotCandidate(usize),
    #[error("solution {0} carries no branching trace")]
    MissingTrace(usize),
    #[error("solution probabilities are missing")]
    Missing,
    #[error(transparent)]
    Density(#[from] DensityError),
}
