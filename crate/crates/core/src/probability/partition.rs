use serde::Serialize;

use crate::Interval;

/// Cell decomposition of the candidates' selection intervals.
///
/// Every interval is cut at `v_r`, the smallest upper endpoint among the
/// candidates; the lower endpoints together with `v_r` form the breakpoint
/// list `points`, and each candidate's cells are the consecutive breakpoints
/// inside its truncated interval. The untruncated intervals are kept in
/// `originals` because the probability formulas normalize by them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionTable {
    pub points: Vec<f64>,
    pub ids: Vec<usize>,
    pub cells: Vec<Vec<Interval>>,
    pub originals: Vec<Interval>,
}

impl PartitionTable {
    /// Right end of every cell.
    pub fn cut(&self) -> f64 {
        *self
            .points
            .last()
            .expect("partition of an empty candidate set")
    }

    pub fn position(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    /// Whether the candidate at `pos` has `cell` among its cells.
    pub(crate) fn has_cell(&self, pos: usize, cell: &Interval) -> bool {
        self.cells[pos].iter().any(|c| c == cell)
    }
}

/// Builds the partition for candidates given as `(id, selection interval)`.
pub fn build_partition(candidates: &[(usize, Interval)]) -> PartitionTable {
    assert!(
        !candidates.is_empty(),
        "partition needs at least one candidate"
    );
    let cut = candidates
        .iter()
        .map(|(_, v)| v.hi())
        .min_by(f64::total_cmp)
        .unwrap();

    let mut points: Vec<f64> = candidates
        .iter()
        .map(|(_, v)| v.lo().min(cut))
        .chain(std::iter::once(cut))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let cells = candidates
        .iter()
        .map(|(_, v)| {
            let inside: Vec<f64> = points
                .iter()
                .copied()
                .filter(|&p| v.lo() <= p && p <= cut)
                .collect();
            inside
                .windows(2)
                .map(|w| Interval::new(w[0], w[1]).expect("breakpoints are sorted"))
                .collect()
        })
        .collect();

    PartitionTable {
        points,
        ids: candidates.iter().map(|(id, _)| *id).collect(),
        cells,
        originals: candidates.iter().map(|(_, v)| *v).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn three_interval_layout() {
        // v1 = [1,4], v2 = [3,6], v3 = [2,5]: cut at 4, breakpoints 1 < 2 < 3 < 4
        let t = build_partition(&[(1, iv(1.0, 4.0)), (2, iv(3.0, 6.0)), (3, iv(2.0, 5.0))]);
        assert_eq!(t.points, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.cells[0], vec![iv(1.0, 2.0), iv(2.0, 3.0), iv(3.0, 4.0)]);
        assert_eq!(t.cells[1], vec![iv(3.0, 4.0)]);
        assert_eq!(t.cells[2], vec![iv(2.0, 3.0), iv(3.0, 4.0)]);
        assert_eq!(t.originals[1], iv(3.0, 6.0));
    }

    #[test]
    fn two_interval_layout() {
        let t = build_partition(&[(0, iv(1.0, 3.0)), (1, iv(2.0, 4.0))]);
        assert_eq!(t.cut(), 3.0);
        assert_eq!(t.points, vec![1.0, 2.0, 3.0]);
        assert_eq!(t.cells[0], vec![iv(1.0, 2.0), iv(2.0, 3.0)]);
        assert_eq!(t.cells[1], vec![iv(2.0, 3.0)]);
    }

    #[test]
    fn single_candidate_is_one_cell() {
        let t = build_partition(&[(4, iv(1.5, 2.5))]);
        assert_eq!(t.cells, vec![vec![iv(1.5, 2.5)]]);
    }

    #[test]
    fn degenerate_candidate_has_no_cells() {
        let t = build_partition(&[(0, iv(1.0, 3.0)), (1, iv(2.0, 2.0))]);
        assert_eq!(t.cut(), 2.0);
        assert_eq!(t.cells[0], vec![iv(1.0, 2.0)]);
        assert!(t.cells[1].is_empty());
    }
}
