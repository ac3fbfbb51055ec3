//! Greedy algorithms for discrete optimization problems whose objective
//! coefficients are intervals.
//!
//! Given a problem with interval weights (set cover and minimum spanning tree
//! are built in), the crate enumerates every ordered solution the classical
//! greedy algorithm can return for some scenario in the weight box, together
//! with the scenario box and weight interval of each solution. For a given
//! distribution of the weights it attaches solution probabilities, derives
//! the distribution of the objective value, and certifies solutions as
//! strong via the worst-scenario test.
//!
//! ```
//! use interval_greedy::{enumerate, EnumerateOptions, Interval, ScpInstance, WeightLaw};
//!
//! let iv = |lo, hi| Interval::new(lo, hi).unwrap();
//! // two single-item sets, both needed for a cover
//! let scp = ScpInstance::new(2, vec![vec![0], vec![1]], vec![iv(1.0, 3.0), iv(2.0, 4.0)]).unwrap();
//! let set = enumerate(&scp, &EnumerateOptions::with_law(WeightLaw::Uniform)).unwrap();
//! assert_eq!(set.len(), 2);
//! assert_eq!(set.solutions[0].order, vec![0, 1]);
//! assert!((set.solutions[0].probability.unwrap() - 0.875).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod error;
pub mod greedy;
mod interval;
pub mod probability;
pub mod problem;
pub mod quad;
pub mod strong;
pub mod validation;

pub use error::{DensityError, EnumerateError, InstanceError, IntervalError, ProbabilityError};
pub use greedy::{
    classical_greedy, enumerate, modify_instance, restrict_selected, select_candidates,
    EnumerateOptions, OrderedSolution, SolutionSet,
};
pub use interval::Interval;
pub use probability::{attach_probabilities, DensityKind, DensityModel, WeightLaw};
pub use problem::{GreedyProblem, Instance, MstInstance, Scenario, ScpInstance, SelectionContext};
