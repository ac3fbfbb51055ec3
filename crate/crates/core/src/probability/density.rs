//! Weight densities on the element intervals and the selection
//! probabilities they induce.
//!
//! Along a branch an element's interval may shrink; its law there is the
//! original density truncated to the current interval and renormalized.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::partition::PartitionTable;
use super::uniform::tie_share;
use crate::error::{DensityError, ProbabilityError};
use crate::quad::integrate_piecewise;
use crate::Interval;

/// Tolerance on the total mass of a density over its interval.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DensityKind {
    #[default]
    Uniform,
    /// Constant `values[k]` on `[breaks[k], breaks[k+1]]`, zero elsewhere.
    /// Breaks are absolute weight values.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    /// Triangular on the element's interval with peak at `mode`.
    Triangular { mode: f64 },
}

/// A default density plus per-element overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    #[serde(default)]
    pub default: DensityKind,
    #[serde(default)]
    pub overrides: BTreeMap<usize, DensityKind>,
}

impl DensityModel {
    pub fn uniform() -> Self {
        DensityModel::default()
    }

    /// Parses either a single density object applied to every element or a
    /// `{"default": ..., "overrides": {"<id>": ...}}` map.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        // untagged enums buffer map keys as strings, so dispatch by hand
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("kind").is_some() {
            Ok(DensityModel {
                default: serde_json::from_value(value)?,
                overrides: BTreeMap::new(),
            })
        } else {
            serde_json::from_value(value)
        }
    }

    pub fn kind_for(&self, id: usize) -> &DensityKind {
        self.overrides.get(&id).unwrap_or(&self.default)
    }

    pub fn is_uniform(&self) -> bool {
        self.default == DensityKind::Uniform
            && self.overrides.values().all(|k| *k == DensityKind::Uniform)
    }

    /// Binds the model to the instance's weight intervals, validating every
    /// density.
    pub fn resolve(&self, weights: &[Interval]) -> Result<Vec<ElementDensity>, DensityError> {
        if let Some(&index) = self.overrides.keys().find(|&&i| i >= weights.len()) {
            return Err(DensityError::Invalid {
                index,
                reason: format!(
                    "override for a nonexistent element ({} elements)",
                    weights.len()
                ),
            });
        }
        weights
            .iter()
            .enumerate()
            .map(|(index, &w)| ElementDensity::new(self.kind_for(index).clone(), w, index))
            .collect()
    }
}

/// A validated density on one element's original weight interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementDensity {
    kind: DensityKind,
    support: Interval,
}

impl ElementDensity {
    pub fn uniform(support: Interval) -> Self {
        ElementDensity {
            kind: DensityKind::Uniform,
            support,
        }
    }

    pub fn new(kind: DensityKind, support: Interval, index: usize) -> Result<Self, DensityError> {
        let invalid = |reason: String| DensityError::Invalid { index, reason };
        match &kind {
            DensityKind::Uniform => {}
            DensityKind::Piecewise { breaks, values } => {
                if breaks.len() != values.len() + 1 || values.is_empty() {
                    return Err(invalid(format!(
                        "piecewise density needs one more break than values, got {} and {}",
                        breaks.len(),
                        values.len()
                    )));
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1]))
                    || breaks.iter().any(|b| !b.is_finite())
                {
                    return Err(invalid(
                        "piecewise breaks must be finite and increasing".into(),
                    ));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(invalid(
                        "piecewise values must be finite and non-negative".into(),
                    ));
                }
            }
            DensityKind::Triangular { mode } => {
                if !support.contains(*mode) {
                    return Err(invalid(format!(
                        "triangular mode {mode} lies outside {support}"
                    )));
                }
            }
        }
        let density = ElementDensity { kind, support };
        if !support.is_degenerate() {
            let mass = integrate_piecewise(
                &|t| density.pdf(t),
                support.lo(),
                support.hi(),
                &density.breakpoints(),
                1e-12,
            );
            if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(DensityError::NotNormalized {
                    index,
                    mass,
                    interval: support,
                });
            }
        }
        Ok(density)
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn is_uniform(&self) -> bool {
        self.kind == DensityKind::Uniform
    }

    pub fn pdf(&self, t: f64) -> f64 {
        let (a, b) = (self.support.lo(), self.support.hi());
        if t < a || t > b || a == b {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Uniform => 1.0 / (b - a),
            DensityKind::Piecewise { breaks, values } => breaks
                .windows(2)
                .zip(values)
                .find(|(w, _)| w[0] <= t && t < w[1])
                .map_or_else(
                    || {
                        // right end of the last piece
                        if t == *breaks.last().unwrap() {
                            *values.last().unwrap()
                        } else {
                            0.0
                        }
                    },
                    |(_, &v)| v,
                ),
            &DensityKind::Triangular { mode: c } => {
                if t < c || (t == c && c > a) {
                    2.0 * (t - a) / ((b - a) * (c - a))
                } else {
                    2.0 * (b - t) / ((b - a) * (b - c))
                }
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let (a, b) = (self.support.lo(), self.support.hi());
        if t < a {
            return 0.0;
        }
        if t >= b {
            return 1.0;
        }
        match &self.kind {
            DensityKind::Uniform => (t - a) / (b - a),
            DensityKind::Piecewise { breaks, values } => breaks
                .windows(2)
                .zip(values)
                .map(|(w, &v)| v * (t.clamp(w[0], w[1]) - w[0]))
                .sum::<f64>()
                .min(1.0),
            &DensityKind::Triangular { mode: c } => {
                if t <= c && c > a {
                    (t - a) * (t - a) / ((b - a) * (c - a))
                } else {
                    1.0 - (b - t) * (b - t) / ((b - a) * (b - c))
                }
            }
        }
    }

    /// Points where the density has a jump or a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.support.lo(), self.support.hi()];
        match &self.kind {
            DensityKind::Uniform => {}
            DensityKind::Piecewise { breaks, .. } => pts.extend(breaks),
            DensityKind::Triangular { mode } => pts.push(*mode),
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn window_mass(&self, window: &Interval) -> f64 {
        self.cdf(window.hi()) - self.cdf(window.lo())
    }

    /// `P(w in [a, b] | w in window)`.
    ///
    /// A window carrying no mass falls back to the uniform law on it.
    pub fn conditional_mass(&self, window: &Interval, a: f64, b: f64) -> f64 {
        let lo = a.max(window.lo());
        let hi = b.min(window.hi());
        if hi <= lo {
            return 0.0;
        }
        let total = self.window_mass(window);
        if self.is_uniform() || !(total > 0.0) {
            return (hi - lo) / window.width();
        }
        ((self.cdf(hi) - self.cdf(lo)) / total).clamp(0.0, 1.0)
    }

    /// Inverse of the truncated CDF on `window` at level `u` in `[0, 1]`.
    pub fn quantile_in(&self, window: &Interval, u: f64) -> f64 {
        if window.is_degenerate() {
            return window.lo();
        }
        let base = self.cdf(window.lo());
        let total = self.window_mass(window);
        if self.is_uniform() || !(total > 0.0) {
            return (window.lo() + u * window.width()).min(window.hi());
        }
        let target = base + u * total;
        let (a, b) = (self.support.lo(), self.support.hi());
        let x = match &self.kind {
            DensityKind::Uniform => unreachable!(),
            DensityKind::Piecewise { breaks, values } => {
                let mut cum = 0.0;
                let mut x = b;
                for (w, &v) in breaks.windows(2).zip(values) {
                    let piece = v * (w[1] - w[0]);
                    if v > 0.0 && cum + piece >= target {
                        x = w[0] + (target - cum) / v;
                        break;
                    }
                    cum += piece;
                }
                x
            }
            &DensityKind::Triangular { mode: c } => {
                let at_mode = (c - a) / (b - a);
                if target <= at_mode && c > a {
                    a + (target * (b - a) * (c - a)).sqrt()
                } else {
                    b - ((1.0 - target).max(0.0) * (b - a) * (b - c)).sqrt()
                }
            }
        };
        x.clamp(window.lo(), window.hi())
    }

    /// Mean and variance of the density truncated to `window`.
    pub fn truncated_moments(&self, window: &Interval) -> (f64, f64) {
        if window.is_degenerate() {
            return (window.lo(), 0.0);
        }
        let total = self.window_mass(window);
        if self.is_uniform() || !(total > 0.0) {
            return (window.midpoint(), window.width() * window.width() / 12.0);
        }
        let breaks = self.breakpoints();
        let m1 = integrate_piecewise(
            &|t| t * self.pdf(t),
            window.lo(),
            window.hi(),
            &breaks,
            1e-13,
        ) / total;
        let m2 = integrate_piecewise(
            &|t| (t - m1) * (t - m1) * self.pdf(t),
            window.lo(),
            window.hi(),
            &breaks,
            1e-13,
        ) / total;
        (m1, m2.max(0.0))
    }

    /// Density of the law truncated to `window`, at `t`.
    pub fn truncated_pdf(&self, window: &Interval, t: f64) -> f64 {
        if !window.contains(t) || window.is_degenerate() {
            return 0.0;
        }
        let total = self.window_mass(window);
        if self.is_uniform() || !(total > 0.0) {
            return 1.0 / window.width();
        }
        self.pdf(t) / total
    }
}

/// The law of one candidate's selection value at a node: its density,
/// truncated to the current weight interval, seen through the divisor.
#[derive(Clone, Copy, Debug)]
pub struct SelectionLaw<'a> {
    pub density: &'a ElementDensity,
    pub window: Interval,
    pub divisor: f64,
}

impl SelectionLaw<'_> {
    /// `P(phi in [a, b])` for selection values `a <= b`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.density
            .conditional_mass(&self.window, a * self.divisor, b * self.divisor)
    }
}

/// Selection probability of `q` under arbitrary densities.
///
/// Same cell-by-cell structure as the uniform formula, with every length
/// ratio replaced by the mass the candidate's law puts on the range. `laws`
/// is indexed like the partition's candidates.
pub fn selection_probability_density(
    table: &PartitionTable,
    q: usize,
    laws: &[SelectionLaw<'_>],
) -> Result<f64, ProbabilityError> {
    let pos = table.position(q).ok_or(ProbabilityError::NotCandidate(q))?;
    let own = table.originals[pos];

    if own.is_degenerate() {
        let value = own.lo();
        let mut product = 1.0;
        let mut tied = 1usize;
        for (j, v) in table.originals.iter().enumerate() {
            if j == pos {
                continue;
            }
            if v.is_degenerate() {
                if v.lo() == value {
                    tied += 1;
                } else if v.lo() < value {
                    return Ok(0.0);
                }
            } else {
                product *= laws[j].mass(value, v.hi());
            }
        }
        return Ok(product / tied as f64);
    }

    let mut total = 0.0;
    for cell in &table.cells[pos] {
        let in_cell = laws[pos].mass(cell.lo(), cell.hi());
        let pairs: Vec<(f64, f64)> = (0..table.ids.len())
            .filter(|&j| j != pos && table.has_cell(j, cell))
            .map(|j| {
                let v = table.originals[j];
                (
                    laws[j].mass(cell.lo(), cell.hi()),
                    laws[j].mass(cell.hi(), v.hi()),
                )
            })
            .collect();
        total += tie_share(&pairs) * in_cell;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::partition::build_partition;
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn parses_single_and_model_forms() {
        let m = DensityModel::from_json(r#"{"kind":"uniform"}"#).unwrap();
        assert!(m.is_uniform());
        let m = DensityModel::from_json(r#"{"kind":"triangular","mode":2.5}"#).unwrap();
        assert_eq!(m.default, DensityKind::Triangular { mode: 2.5 });
        let m = DensityModel::from_json(
            r#"{"default":{"kind":"uniform"},"overrides":{"1":{"kind":"piecewise","breaks":[2,3,4],"values":[1,0]}}}"#,
        )
        .unwrap();
        assert!(!m.is_uniform());
        assert!(matches!(m.kind_for(1), DensityKind::Piecewise { .. }));
        assert_eq!(m.kind_for(0), &DensityKind::Uniform);
    }

    #[test]
    fn validation() {
        let w = iv(2.0, 4.0);
        let bad = DensityKind::Piecewise {
            breaks: vec![2.0, 3.0, 4.0],
            values: vec![1.0, 1.0],
        };
        assert!(matches!(
            ElementDensity::new(bad, w, 3),
            Err(DensityError::NotNormalized { index: 3, .. })
        ));
        let bad = DensityKind::Triangular { mode: 5.0 };
        assert!(matches!(
            ElementDensity::new(bad, w, 0),
            Err(DensityError::Invalid { .. })
        ));
        let bad = DensityKind::Piecewise {
            breaks: vec![2.0, 4.0],
            values: vec![0.25, 0.25],
        };
        assert!(ElementDensity::new(bad, w, 0).is_err());
        let ok = DensityKind::Piecewise {
            breaks: vec![2.0, 3.0, 4.0],
            values: vec![0.75, 0.25],
        };
        assert!(ElementDensity::new(ok, w, 0).is_ok());
        assert!(ElementDensity::new(DensityKind::Triangular { mode: 2.0 }, w, 0).is_ok());
        assert!(ElementDensity::new(DensityKind::Triangular { mode: 4.0 }, w, 0).is_ok());
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        let w = iv(1.0, 5.0);
        for kind in [
            DensityKind::Uniform,
            DensityKind::Triangular { mode: 2.0 },
            DensityKind::Triangular { mode: 1.0 },
            DensityKind::Piecewise {
                breaks: vec![1.0, 2.0, 5.0],
                values: vec![0.4, 0.2],
            },
        ] {
            let d = ElementDensity::new(kind, w, 0).unwrap();
            for t in [1.0, 1.5, 2.0, 3.3, 4.9, 5.0] {
                let num = integrate_piecewise(&|s| d.pdf(s), 1.0, t, &d.breakpoints(), 1e-13);
                assert!((num - d.cdf(t)).abs() < 1e-10, "{:?} at {t}", d.kind());
            }
        }
    }

    #[test]
    fn quantile_inverts_truncated_cdf() {
        let w = iv(1.0, 5.0);
        let window = iv(1.5, 4.5);
        for kind in [
            DensityKind::Uniform,
            DensityKind::Triangular { mode: 3.0 },
            DensityKind::Piecewise {
                breaks: vec![1.0, 2.0, 5.0],
                values: vec![0.4, 0.2],
            },
        ] {
            let d = ElementDensity::new(kind, w, 0).unwrap();
            for u in [0.0, 0.1, 0.5, 0.77, 1.0] {
                let x = d.quantile_in(&window, u);
                let back = d.conditional_mass(&window, window.lo(), x);
                assert!((back - u).abs() < 1e-12, "{:?} u={u}", d.kind());
            }
        }
    }

    #[test]
    fn truncated_moments_of_uniform() {
        let d = ElementDensity::uniform(iv(0.0, 4.0));
        let (m, v) = d.truncated_moments(&iv(1.0, 3.0));
        assert_eq!(m, 2.0);
        assert!((v - 4.0 / 12.0).abs() < 1e-15);
        let t =
            ElementDensity::new(DensityKind::Triangular { mode: 2.0 }, iv(0.0, 4.0), 0).unwrap();
        let (m, v) = t.truncated_moments(&iv(0.0, 4.0));
        assert!((m - 2.0).abs() < 1e-12);
        // symmetric triangular on [0,4]: variance 16/24
        assert!((v - 16.0 / 24.0).abs() < 1e-12);
    }

    fn laws<'a>(ds: &'a [ElementDensity], windows: &[Interval]) -> Vec<SelectionLaw<'a>> {
        ds.iter()
            .zip(windows)
            .map(|(d, &w)| SelectionLaw {
                density: d,
                window: w,
                divisor: 1.0,
            })
            .collect()
    }

    #[test]
    fn concentrated_competitor_gives_three_quarters() {
        let windows = [iv(1.0, 3.0), iv(2.0, 4.0)];
        let ds = [
            ElementDensity::uniform(windows[0]),
            ElementDensity::new(
                DensityKind::Piecewise {
                    breaks: vec![2.0, 3.0, 4.0],
                    values: vec![1.0, 0.0],
                },
                windows[1],
                1,
            )
            .unwrap(),
        ];
        let table = build_partition(&[(0, windows[0]), (1, windows[1])]);
        let l = laws(&ds, &windows);
        let p0 = selection_probability_density(&table, 0, &l).unwrap();
        let p1 = selection_probability_density(&table, 1, &l).unwrap();
        assert!((p0 - 0.75).abs() < 1e-12);
        assert!((p0 + p1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_triangular_against_uniform_is_even() {
        let w = iv(2.0, 6.0);
        let ds = [
            ElementDensity::new(DensityKind::Triangular { mode: 4.0 }, w, 0).unwrap(),
            ElementDensity::uniform(w),
        ];
        let table = build_partition(&[(0, w), (1, w)]);
        let l = laws(&ds, &[w, w]);
        let p0 = selection_probability_density(&table, 0, &l).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_candidate_uses_tail_masses() {
        let windows = [iv(2.0, 2.0), iv(1.0, 5.0)];
        let ds = [
            ElementDensity::uniform(windows[0]),
            ElementDensity::uniform(windows[1]),
        ];
        let table = build_partition(&[(0, windows[0]), (1, windows[1])]);
        let p0 = selection_probability_density(&table, 0, &laws(&ds, &windows)).unwrap();
        assert!((p0 - 0.75).abs() < 1e-15);
    }
}
