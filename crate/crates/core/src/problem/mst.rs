use serde::{Deserialize, Serialize};

use super::{check_weights, GreedyProblem};
use crate::error::InstanceError;
use crate::Interval;

/// Minimum spanning tree with interval edge weights. The selection function
/// is the edge weight itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MstSpec", into = "MstSpec")]
pub struct MstInstance {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<Interval>,
}

#[derive(Serialize, Deserialize)]
struct MstSpec {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<Interval>,
}

impl TryFrom<MstSpec> for MstInstance {
    type Error = InstanceError;

    fn try_from(spec: MstSpec) -> Result<Self, Self::Error> {
        MstInstance::new(spec.vertices, spec.edges, spec.weights)
    }
}

impl From<MstInstance> for MstSpec {
    fn from(p: MstInstance) -> Self {
        MstSpec {
            vertices: p.vertices,
            edges: p.edges,
            weights: p.weights,
        }
    }
}

impl MstInstance {
    pub fn new(
        vertices: usize,
        edges: Vec<(usize, usize)>,
        weights: Vec<Interval>,
    ) -> Result<Self, InstanceError> {
        if edges.len() != weights.len() {
            return Err(InstanceError::WeightCount {
                expected: edges.len(),
                actual: weights.len(),
            });
        }
        check_weights(&weights)?;
        for (edge, &(u, v)) in edges.iter().enumerate() {
            for vertex in [u, v] {
                if vertex >= vertices {
                    return Err(InstanceError::VertexOutOfRange {
                        edge,
                        vertex,
                        vertices,
                    });
                }
            }
        }
        let p = MstInstance {
            vertices,
            edges,
            weights,
        };
        let mut forest = p.initial_state();
        for id in 0..p.edges.len() {
            if p.is_selectable(&forest, id) {
                p.reduce(&mut forest, id);
            }
        }
        if !p.is_feasible(&forest) {
            return Err(InstanceError::Disconnected);
        }
        Ok(p)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Whether `ids` is a spanning tree: `|V| - 1` edges and no cycle.
    pub fn is_spanning_tree(&self, ids: &[usize]) -> bool {
        if ids.len() + 1 != self.vertices.max(1) {
            return false;
        }
        let mut forest = self.initial_state();
        for &id in ids {
            if id >= self.edges.len() || !self.is_selectable(&forest, id) {
                return false;
            }
            self.reduce(&mut forest, id);
        }
        self.is_feasible(&forest)
    }
}

/// Component labels of the partial forest.
#[derive(Clone, Debug, PartialEq)]
pub struct MstState {
    component: Vec<usize>,
    tree_edges: usize,
}

impl MstState {
    pub fn same_component(&self, u: usize, v: usize) -> bool {
        self.component[u] == self.component[v]
    }
}

impl GreedyProblem for MstInstance {
    type State = MstState;

    fn weights(&self) -> &[Interval] {
        &self.weights
    }

    fn initial_state(&self) -> MstState {
        MstState {
            component: (0..self.vertices).collect(),
            tree_edges: 0,
        }
    }

    fn selection_divisor(&self, _state: &MstState, _id: usize) -> f64 {
        1.0
    }

    fn is_selectable(&self, state: &MstState, id: usize) -> bool {
        let (u, v) = self.edges[id];
        !state.same_component(u, v)
    }

    fn is_feasible(&self, state: &MstState) -> bool {
        state.tree_edges + 1 >= self.vertices
    }

    fn reduce(&self, state: &mut MstState, id: usize) {
        let (u, v) = self.edges[id];
        let (keep, drop) = (state.component[u], state.component[v]);
        if keep == drop {
            return;
        }
        for c in state.component.iter_mut() {
            if *c == drop {
                *c = keep;
            }
        }
        state.tree_edges += 1;
    }
}
