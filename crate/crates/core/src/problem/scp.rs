use serde::{Deserialize, Serialize};

use super::{check_weights, GreedyProblem};
use crate::error::InstanceError;
use crate::Interval;

/// Weighted set cover with interval weights.
///
/// The selection function is the relative weight `w_i / |S_i'|`, where `S_i'`
/// is the part of `S_i` not yet covered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScpSpec", into = "ScpSpec")]
pub struct ScpInstance {
    universe: usize,
    sets: Vec<Vec<usize>>,
    masks: Vec<Bits>,
    weights: Vec<Interval>,
}

#[derive(Serialize, Deserialize)]
struct ScpSpec {
    universe: usize,
    sets: Vec<Vec<usize>>,
    weights: Vec<Interval>,
}

impl TryFrom<ScpSpec> for ScpInstance {
    type Error = InstanceError;

    fn try_from(spec: ScpSpec) -> Result<Self, Self::Error> {
        ScpInstance::new(spec.universe, spec.sets, spec.weights)
    }
}

impl From<ScpInstance> for ScpSpec {
    fn from(p: ScpInstance) -> Self {
        ScpSpec {
            universe: p.universe,
            sets: p.sets,
            weights: p.weights,
        }
    }
}

impl ScpInstance {
    pub fn new(
        universe: usize,
        sets: Vec<Vec<usize>>,
        weights: Vec<Interval>,
    ) -> Result<Self, InstanceError> {
        if sets.len() != weights.len() {
            return Err(InstanceError::WeightCount {
                expected: sets.len(),
                actual: weights.len(),
            });
        }
        check_weights(&weights)?;
        let mut masks = Vec::with_capacity(sets.len());
        let mut union = Bits::new(universe);
        for (set, items) in sets.iter().enumerate() {
            let mut mask = Bits::new(universe);
            for &item in items {
                if item >= universe {
                    return Err(InstanceError::ItemOutOfRange {
                        set,
                        item,
                        universe,
                    });
                }
                mask.insert(item);
            }
            union.union_with(&mask);
            masks.push(mask);
        }
        let missing: Vec<usize> = (0..universe).filter(|&i| !union.contains(i)).collect();
        if !missing.is_empty() {
            return Err(InstanceError::Uncoverable(missing));
        }
        let sets = masks.iter().map(|m| m.iter().collect()).collect();
        Ok(ScpInstance {
            universe,
            sets,
            masks,
            weights,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Whether the sets `ids` together cover the universe.
    pub fn covers(&self, ids: &[usize]) -> bool {
        let mut union = Bits::new(self.universe);
        for &i in ids {
            union.union_with(&self.masks[i]);
        }
        union.count() == self.universe
    }

    /// Same sets with a different weight vector.
    pub fn with_weights(&self, weights: Vec<Interval>) -> Result<Self, InstanceError> {
        Self::new(self.universe, self.sets.clone(), weights)
    }
}

/// Items covered so far.
#[derive(Clone, Debug, PartialEq)]
pub struct ScpState {
    covered: Bits,
    remaining: usize,
}

impl ScpState {
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    /// Uncovered items, ascending.
    pub fn uncovered(&self) -> Vec<usize> {
        (0..self.covered.len)
            .filter(|&i| !self.covered.contains(i))
            .collect()
    }
}

impl ScpInstance {
    /// Size of the residual set `S_id` minus the covered items.
    pub fn residual_size(&self, state: &ScpState, id: usize) -> usize {
        self.masks[id].count_minus(&state.covered)
    }
}

impl GreedyProblem for ScpInstance {
    type State = ScpState;

    fn weights(&self) -> &[Interval] {
        &self.weights
    }

    fn initial_state(&self) -> ScpState {
        ScpState {
            covered: Bits::new(self.universe),
            remaining: self.universe,
        }
    }

    fn selection_divisor(&self, state: &ScpState, id: usize) -> f64 {
        self.residual_size(state, id) as f64
    }

    fn is_selectable(&self, state: &ScpState, id: usize) -> bool {
        self.residual_size(state, id) > 0
    }

    fn is_feasible(&self, state: &ScpState) -> bool {
        state.remaining == 0
    }

    fn reduce(&self, state: &mut ScpState, id: usize) {
        state.covered.union_with(&self.masks[id]);
        state.remaining = self.universe - state.covered.count();
    }
}

/// Fixed-size bit set over `0..len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub(crate) fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub(crate) fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub(crate) fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|self \ other|`
    pub(crate) fn count_minus(&self, other: &Bits) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }
}
