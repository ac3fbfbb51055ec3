//! Closed-form selection probabilities for weights uniform on their
//! current intervals.

use super::partition::PartitionTable;
use crate::error::ProbabilityError;
use crate::Interval;

/// `sum over subsets r of R of 1/(|r|+1) * prod_{i in r} p_i * prod_{i not in r} q_i`
/// for `pairs = [(p_i, q_i)]`.
///
/// Grouping the subsets by size turns the sum into the coefficients of
/// `prod (q_i + t p_i)`, so the cost is quadratic in `|R|` instead of
/// exponential.
pub(crate) fn tie_share(pairs: &[(f64, f64)]) -> f64 {
    let mut coeffs = vec![1.0];
    for &(p, q) in pairs {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k] += c * q;
            next[k + 1] += c * p;
        }
        coeffs = next;
    }
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c / (k as f64 + 1.0))
        .sum()
}

/// Probability that candidate `q` has the smallest selection value, with
/// every candidate's value uniform on its original interval.
///
/// Sums over the cells of `q`: the chance that `v_q` falls in the cell
/// times the chance that it beats the candidates sharing that cell, where a
/// competitor either lands in the same cell (ties split evenly among the
/// values landing there) or lies above it.
pub fn selection_probability_uniform(
    table: &PartitionTable,
    q: usize,
) -> Result<f64, ProbabilityError> {
    let pos = table.position(q).ok_or(ProbabilityError::NotCandidate(q))?;
    let own = table.originals[pos];
    if own.is_degenerate() {
        return Err(ProbabilityError::Degenerate(q));
    }
    let mut total = 0.0;
    for cell in &table.cells[pos] {
        let in_cell = cell.width() / own.width();
        let pairs: Vec<(f64, f64)> = (0..table.ids.len())
            .filter(|&j| j != pos && table.has_cell(j, cell))
            .map(|j| {
                let v = table.originals[j];
                (cell.width() / v.width(), (v.hi() - cell.hi()) / v.width())
            })
            .collect();
        total += tie_share(&pairs) * in_cell;
    }
    Ok(total)
}

/// Probability that candidate `q`, whose selection value is known exactly,
/// is taken: the product over the other candidates of the chance that their
/// value exceeds `v_q`.
///
/// Degenerate competitors equal to `v_q` contribute factor 1 each, and the
/// result is divided by the number of tied degenerate candidates (including
/// `q`) so that tied candidates share the probability evenly.
pub fn selection_probability_degenerate(
    candidates: &[(usize, Interval)],
    q: usize,
) -> Result<f64, ProbabilityError> {
    let own = candidates
        .iter()
        .find(|(id, _)| *id == q)
        .map(|(_, v)| *v)
        .ok_or(ProbabilityError::NotCandidate(q))?;
    let value = own.lo();
    let mut product = 1.0;
    let mut tied = 1usize;
    for &(id, v) in candidates {
        if id == q {
            continue;
        }
        if v.is_degenerate() {
            if v.lo() == value {
                tied += 1;
            } else if v.lo() < value {
                return Ok(0.0);
            }
        } else {
            product *= ((v.hi() - value) / v.width()).clamp(0.0, 1.0);
        }
    }
    Ok(product / tied as f64)
}

#[cfg(test)]
mod tests {
    use super::super::partition::build_partition;
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    /// Literal subset enumeration of the tie-sharing sum.
    fn tie_share_by_subsets(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len();
        (0u32..1 << n)
            .map(|mask| {
                let size = mask.count_ones() as f64;
                let prod: f64 = (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            pairs[i].0
                        } else {
                            pairs[i].1
                        }
                    })
                    .product();
                prod / (size + 1.0)
            })
            .sum()
    }

    #[test]
    fn tie_share_matches_subset_enumeration() {
        let pairs = [
            (0.2, 0.7),
            (0.5, 0.5),
            (0.1, 0.3),
            (0.9, 0.05),
            (0.25, 0.75),
        ];
        for k in 0..=pairs.len() {
            let a = tie_share(&pairs[..k]);
            let b = tie_share_by_subsets(&pairs[..k]);
            assert!((a - b).abs() < 1e-15, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn tie_share_identical_full_cells() {
        // p = 1 for k competitors: uniform argmin among k+1 values
        for k in 0..8 {
            let pairs = vec![(1.0, 0.0); k];
            assert!((tie_share(&pairs) - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn overlapping_pair_gives_seven_eighths() {
        let t = build_partition(&[(0, iv(1.0, 3.0)), (1, iv(2.0, 4.0))]);
        let p0 = selection_probability_uniform(&t, 0).unwrap();
        let p1 = selection_probability_uniform(&t, 1).unwrap();
        assert!((p0 - 7.0 / 8.0).abs() < 1e-15);
        assert!((p1 - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn identical_intervals_split_evenly() {
        let t = build_partition(&[(0, iv(2.0, 5.0)), (1, iv(2.0, 5.0))]);
        assert_eq!(selection_probability_uniform(&t, 0).unwrap(), 0.5);
        assert_eq!(selection_probability_uniform(&t, 1).unwrap(), 0.5);
    }

    #[test]
    fn lone_candidate_is_certain() {
        let t = build_partition(&[(3, iv(2.0, 5.0))]);
        assert_eq!(selection_probability_uniform(&t, 3).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_candidate_rejected_by_uniform_formula() {
        let t = build_partition(&[(0, iv(2.0, 2.0)), (1, iv(1.0, 5.0))]);
        assert_eq!(
            selection_probability_uniform(&t, 0),
            Err(ProbabilityError::Degenerate(0))
        );
        assert_eq!(
            selection_probability_uniform(&t, 9),
            Err(ProbabilityError::NotCandidate(9))
        );
    }

    #[test]
    fn degenerate_examples() {
        let c = [(0, iv(2.0, 2.0)), (1, iv(1.0, 5.0))];
        assert_eq!(selection_probability_degenerate(&c, 0).unwrap(), 0.75);
        let c = [(0, iv(2.0, 2.0)), (1, iv(3.0, 5.0))];
        assert_eq!(selection_probability_degenerate(&c, 0).unwrap(), 1.0);
        let c = [(0, iv(2.0, 2.0)), (1, iv(2.0, 2.0)), (2, iv(2.0, 2.0))];
        for q in 0..3 {
            assert!((selection_probability_degenerate(&c, q).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mixed_degenerate_and_interval_candidates_sum_to_one() {
        // v0 = {2}, v1 = [1,5]: P(v1 < 2) = 1/4 goes to element 1
        let c = [(0, iv(2.0, 2.0)), (1, iv(1.0, 5.0))];
        let t = build_partition(&c);
        let p0 = selection_probability_degenerate(&c, 0).unwrap();
        let p1 = selection_probability_uniform(&t, 1).unwrap();
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
        assert!((p1 - 0.25).abs() < 1e-15);
    }
}
