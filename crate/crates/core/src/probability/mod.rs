//! Probabilities of the enumerated solutions.
//!
//! At each branching node every candidate gets the probability that its
//! selection value is the smallest, with the weights independent and
//! distributed on their current intervals. A solution's probability is the
//! product of the step probabilities along its branch.

mod density;
mod partition;
mod uniform;

pub use density::{
    selection_probability_density, DensityKind, DensityModel, ElementDensity, SelectionLaw,
    NORMALIZATION_TOLERANCE,
};
pub use partition::{build_partition, PartitionTable};
pub use uniform::{selection_probability_degenerate, selection_probability_uniform};

use crate::error::{DensityError, ProbabilityError};
use crate::greedy::{Candidate, SolutionSet};
use crate::Interval;

/// How the weights are distributed on their intervals.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightLaw {
    /// Uniform on every interval, evaluated with the closed-form length ratios.
    Uniform,
    /// Per-element densities, evaluated through their CDFs.
    Density(Vec<ElementDensity>),
}

impl WeightLaw {
    /// The law for `model` on `weights`. Uniform models still go through the
    /// density engine; use [`WeightLaw::Uniform`] for the closed form.
    pub fn from_model(model: &DensityModel, weights: &[Interval]) -> Result<Self, DensityError> {
        Ok(WeightLaw::Density(model.resolve(weights)?))
    }

    /// The closed form when every density is uniform, the density engine
    /// otherwise.
    pub fn preferred(model: &DensityModel, weights: &[Interval]) -> Result<Self, DensityError> {
        if model.is_uniform() {
            Ok(WeightLaw::Uniform)
        } else {
            Self::from_model(model, weights)
        }
    }

    /// The density of element `id` on its original interval `support`.
    pub fn element_density(&self, id: usize, support: Interval) -> ElementDensity {
        match self {
            WeightLaw::Uniform => ElementDensity::uniform(support),
            WeightLaw::Density(ds) => ds[id].clone(),
        }
    }

    /// Selection probability of every candidate, in candidate order.
    pub fn step_probabilities(
        &self,
        candidates: &[Candidate],
    ) -> Result<Vec<f64>, ProbabilityError> {
        let entries: Vec<(usize, Interval)> =
            candidates.iter().map(|c| (c.id, c.selection())).collect();
        let table = build_partition(&entries);
        match self {
            WeightLaw::Uniform => entries
                .iter()
                .map(|&(id, v)| {
                    if v.is_degenerate() {
                        selection_probability_degenerate(&entries, id)
                    } else {
                        selection_probability_uniform(&table, id)
                    }
                })
                .collect(),
            WeightLaw::Density(densities) => {
                let laws: Vec<SelectionLaw<'_>> = candidates
                    .iter()
                    .map(|c| SelectionLaw {
                        density: &densities[c.id],
                        window: c.weight,
                        divisor: c.divisor,
                    })
                    .collect();
                entries
                    .iter()
                    .map(|&(id, _)| selection_probability_density(&table, id, &laws))
                    .collect()
            }
        }
    }
}

/// Recomputes every solution's probability from its branching trace.
pub fn attach_probabilities(
    solutions: &mut SolutionSet,
    law: &WeightLaw,
) -> Result<(), ProbabilityError> {
    for (idx, s) in solutions.solutions.iter_mut().enumerate() {
        if s.trace.len() != s.order.len() {
            return Err(ProbabilityError::MissingTrace(idx));
        }
        let mut p = 1.0;
        for step in s.trace.iter_mut() {
            let probs = law.step_probabilities(&step.candidates)?;
            let k = step
                .candidates
                .iter()
                .position(|c| c.id == step.chosen)
                .ok_or(ProbabilityError::NotCandidate(step.chosen))?;
            step.probability = Some(probs[k]);
            p *= probs[k];
        }
        s.probability = Some(p);
    }
    Ok(())
}
