//! Distribution of the objective value over the enumerated solutions.
//!
//! The value density is a mixture of per-solution densities weighted by the
//! solution probabilities. Within a solution the chosen weights are taken as
//! independent, each distributed as its element density truncated to the
//! solution's scenario box, so a solution's value density is a convolution.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::ProbabilityError;
use crate::greedy::{OrderedSolution, SolutionSet};
use crate::probability::{ElementDensity, WeightLaw};
use crate::quad::integrate_piecewise;
use crate::Interval;

/// Most terms summed with the exact convolution formula.
pub const EXACT_TERMS: usize = 8;
/// Number of points of the reported density grid.
pub const GRID_POINTS: usize = 2048;
/// Cells of the numeric convolution grid.
const CONVOLUTION_CELLS: usize = 4096;
const MONTE_CARLO_BINS: usize = 256;

/// How a solution's value density is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Method {
    /// Exact for up to [`EXACT_TERMS`] terms (closed form for uniform terms,
    /// numeric convolution otherwise), normal approximation beyond.
    #[default]
    Auto,
    /// Exact or numeric convolution regardless of the number of terms.
    Convolution,
    Normal,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

/// Density of a sum of independent terms.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueDensity {
    /// Every term is degenerate: a point mass.
    Atom(f64),
    /// Sum of uniforms on intervals of the given widths, shifted by `offset`.
    UniformSum { offset: f64, widths: Vec<f64> },
    /// Normal density restricted to `support` and renormalized there.
    Normal {
        mean: f64,
        sd: f64,
        support: Interval,
        mass: f64,
    },
    /// Piecewise-constant density: `masses[k]` on `[start + k*step, start + (k+1)*step)`.
    Grid {
        start: f64,
        step: f64,
        masses: Vec<f64>,
    },
}

impl ValueDensity {
    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            ValueDensity::Atom(_) => 0.0,
            ValueDensity::UniformSum { offset, widths } => uniform_sum_pdf(t - offset, widths),
            ValueDensity::Normal {
                mean,
                sd,
                support,
                mass,
            } => {
                if !support.contains(t) {
                    return 0.0;
                }
                let z = (t - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt()) / mass
            }
            ValueDensity::Grid {
                start,
                step,
                masses,
            } => {
                let k = ((t - start) / step).floor();
                if k < 0.0 || t > start + step * masses.len() as f64 {
                    return 0.0;
                }
                let k = (k as usize).min(masses.len() - 1);
                masses[k] / step
            }
        }
    }

    /// Points where the density or one of its low derivatives jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ValueDensity::Atom(v) => vec![*v],
            ValueDensity::UniformSum { offset, widths } => {
                let mut pts = vec![0.0];
                for &w in widths {
                    let shifted: Vec<f64> = pts.iter().map(|p| p + w).collect();
                    pts.extend(shifted);
                }
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts.into_iter().map(|p| p + offset).collect()
            }
            ValueDensity::Normal { support, .. } => vec![support.lo(), support.hi()],
            ValueDensity::Grid {
                start,
                step,
                masses,
            } => (0..=masses.len())
                .map(|k| start + step * k as f64)
                .collect(),
        }
    }
}

/// Generalized Irwin-Hall density of `sum U[0, w_i]` at `t`, for positive
/// widths.
fn uniform_sum_pdf(t: f64, widths: &[f64]) -> f64 {
    let total: f64 = widths.iter().sum();
    if t < 0.0 || t > total {
        return 0.0;
    }
    let k = widths.len();
    if k == 1 {
        return 1.0 / widths[0];
    }
    // the density is symmetric; the lower half needs fewer terms
    let t = t.min(total - t);
    let mut factorial = 1.0;
    for j in 2..k {
        factorial *= j as f64;
    }
    let norm = factorial * widths.iter().product::<f64>();
    let mut sum = 0.0;
    for mask in 0u32..1 << k {
        let shift: f64 = (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| widths[i])
            .sum();
        let x = t - shift;
        if x > 0.0 {
            let sign = if mask.count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            sum += sign * x.powi(k as i32 - 1);
        }
    }
    (sum / norm).max(0.0)
}

fn normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

/// Value density of one solution together with its exact moments.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionValue {
    pub density: ValueDensity,
    pub support: Interval,
    pub mean: f64,
    pub variance: f64,
}

struct Term {
    density: ElementDensity,
    window: Interval,
}

fn terms(x: &OrderedSolution, law: &WeightLaw, originals: &[Interval]) -> Vec<Term> {
    x.elements()
        .into_iter()
        .map(|i| Term {
            density: law.element_density(i, originals[i]),
            window: x.scenario_box[i],
        })
        .collect()
}

/// Density of `sum of w(e)` over the elements of `x` on its scenario box.
/// `originals` are the instance's weight intervals, on which the element
/// densities of `law` are defined.
pub fn solution_value_density(
    x: &OrderedSolution,
    law: &WeightLaw,
    originals: &[Interval],
    method: Method,
) -> SolutionValue {
    let terms = terms(x, law, originals);
    let (mut mean, mut variance) = (0.0, 0.0);
    for t in &terms {
        let (m, v) = t.density.truncated_moments(&t.window);
        mean += m;
        variance += v;
    }
    let support: Interval = terms.iter().map(|t| t.window).sum();
    let spread: Vec<&Term> = terms.iter().filter(|t| !t.window.is_degenerate()).collect();
    let density = if spread.is_empty() {
        ValueDensity::Atom(support.lo())
    } else {
        let all_uniform = spread.iter().all(|t| t.density.is_uniform());
        let method = match method {
            Method::Auto if spread.len() > EXACT_TERMS => Method::Normal,
            Method::Auto => Method::Convolution,
            m => m,
        };
        match method {
            Method::Convolution if all_uniform => ValueDensity::UniformSum {
                offset: support.lo(),
                widths: spread.iter().map(|t| t.window.width()).collect(),
            },
            Method::Convolution | Method::Auto => numeric_convolution(&spread, support),
            Method::Normal => {
                let sd = variance.sqrt();
                let mass =
                    normal_cdf((support.hi() - mean) / sd) - normal_cdf((support.lo() - mean) / sd);
                ValueDensity::Normal {
                    mean,
                    sd,
                    support,
                    mass,
                }
            }
            Method::MonteCarlo { samples, seed } => monte_carlo(&terms, support, samples, seed),
        }
    };
    SolutionValue {
        density,
        support,
        mean,
        variance,
    }
}

/// Convolves the cell masses of every term on a common grid.
fn numeric_convolution(terms: &[&Term], support: Interval) -> ValueDensity {
    let step = support.width() / CONVOLUTION_CELLS as f64;
    let mut acc = vec![1.0];
    for t in terms {
        let cells = (t.window.width() / step).ceil().max(1.0) as usize;
        let cell = t.window.width() / cells as f64;
        // spread each cell's mass over the common step, keeping its mass
        let own: Vec<f64> = (0..cells)
            .map(|k| {
                let a = t.window.lo() + cell * k as f64;
                t.density.conditional_mass(&t.window, a, a + cell)
            })
            .collect();
        let rebinned = rebin(&own, cell, step);
        let mut next = vec![0.0; acc.len() + rebinned.len() - 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rebinned.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    let total: f64 = acc.iter().sum();
    ValueDensity::Grid {
        start: support.lo(),
        step: support.width() / acc.len() as f64,
        masses: acc.into_iter().map(|m| m / total).collect(),
    }
}

/// Redistributes masses on cells of width `from` onto cells of width `to`,
/// assuming each source cell's mass is spread evenly.
fn rebin(masses: &[f64], from: f64, to: f64) -> Vec<f64> {
    let len = ((masses.len() as f64 * from) / to).round().max(1.0) as usize;
    let to = masses.len() as f64 * from / len as f64;
    let mut out = vec![0.0; len];
    for (k, &m) in masses.iter().enumerate() {
        let (a, b) = (k as f64 * from, (k + 1) as f64 * from);
        let first = ((a / to).floor() as usize).min(len - 1);
        let last = (((b / to).ceil() as usize).max(first + 1)).min(len);
        for (j, slot) in out.iter_mut().enumerate().take(last).skip(first) {
            let lo = a.max(j as f64 * to);
            let hi = b.min((j + 1) as f64 * to);
            if hi > lo {
                *slot += m * (hi - lo) / from;
            }
        }
    }
    out
}

fn monte_carlo(terms: &[Term], support: Interval, samples: usize, seed: u64) -> ValueDensity {
    let mut rng = Pcg64::seed_from_u64(seed);
    let step = support.width() / MONTE_CARLO_BINS as f64;
    let mut counts = vec![0.0; MONTE_CARLO_BINS];
    for _ in 0..samples {
        let s: f64 = terms
            .iter()
            .map(|t| t.density.quantile_in(&t.window, rng.gen()))
            .sum();
        let k = (((s - support.lo()) / step) as usize).min(MONTE_CARLO_BINS - 1);
        counts[k] += 1.0;
    }
    ValueDensity::Grid {
        start: support.lo(),
        step,
        masses: counts
            .into_iter()
            .map(|c| c / samples.max(1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub points: Vec<f64>,
    /// Density of the continuous part.
    pub density: Vec<f64>,
    /// Cumulative distribution, point masses included.
    pub cdf: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointMass {
    pub value: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueDistribution {
    /// Disjoint pieces of the union of the solutions' weight intervals.
    pub support_pieces: Vec<Interval>,
    /// Solutions whose value is known exactly contribute point masses.
    pub atoms: Vec<PointMass>,
    pub grid: DensityGrid,
    pub mean: f64,
    pub variance: f64,
    /// Quadrature mass of the density plus the point masses.
    pub mass: f64,
    /// Sum of the solution probabilities the mixture was normalized by.
    pub probability_mass: f64,
}

/// The objective-value distribution of `set`, whose solutions must carry
/// probabilities. Weights are renormalized by their sum, which is below one
/// only when the enumeration was pruned.
pub fn mixture_density(
    set: &SolutionSet,
    law: &WeightLaw,
    originals: &[Interval],
    method: Method,
) -> Result<ValueDistribution, ProbabilityError> {
    let probs: Vec<f64> = set
        .solutions
        .iter()
        .map(|s| s.probability.ok_or(ProbabilityError::Missing))
        .collect::<Result<_, _>>()?;
    let total: f64 = probs.iter().sum();
    if set.is_empty() || !(total > 0.0) {
        return Err(ProbabilityError::Missing);
    }
    let parts: Vec<(f64, SolutionValue)> = set
        .solutions
        .iter()
        .zip(&probs)
        .map(|(s, &p)| (p / total, solution_value_density(s, law, originals, method)))
        .collect();

    let mean: f64 = parts.iter().map(|(p, v)| p * v.mean).sum();
    let second: f64 = parts
        .iter()
        .map(|(p, v)| p * (v.variance + v.mean * v.mean))
        .sum();
    let variance = (second - mean * mean).max(0.0);

    let mut atoms: Vec<PointMass> = Vec::new();
    for (p, v) in &parts {
        if let ValueDensity::Atom(value) = v.density {
            match atoms.iter_mut().find(|a| a.value == value) {
                Some(a) => a.mass += p,
                None => atoms.push(PointMass { value, mass: *p }),
            }
        }
    }
    atoms.sort_by(|a, b| a.value.total_cmp(&b.value));

    let pdf = |t: f64| -> f64 { parts.iter().map(|(p, v)| p * v.density.pdf(t)).sum() };
    let support_pieces = merge(parts.iter().map(|(_, v)| v.support).collect());
    let hull = Interval::new(
        support_pieces[0].lo(),
        support_pieces[support_pieces.len() - 1].hi(),
    )
    .expect("pieces are sorted");

    let mut breaks: Vec<f64> = parts
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .flat_map(|(_, v)| v.density.breakpoints())
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let continuous = if hull.is_degenerate() {
        0.0
    } else {
        integrate_piecewise(&pdf, hull.lo(), hull.hi(), &breaks, 1e-10)
    };
    let mass = continuous + atoms.iter().map(|a| a.mass).sum::<f64>();

    let grid = sample_grid(&pdf, hull, &atoms);
    Ok(ValueDistribution {
        support_pieces,
        atoms,
        grid,
        mean,
        variance,
        mass,
        probability_mass: total,
    })
}

fn sample_grid<F: Fn(f64) -> f64>(pdf: &F, hull: Interval, atoms: &[PointMass]) -> DensityGrid {
    if hull.is_degenerate() {
        return DensityGrid {
            points: vec![hull.lo()],
            density: vec![0.0],
            cdf: vec![atoms.iter().map(|a| a.mass).sum()],
        };
    }
    let n = GRID_POINTS;
    let points: Vec<f64> = (0..n)
        .map(|k| hull.lo() + hull.width() * k as f64 / (n - 1) as f64)
        .collect();
    let density: Vec<f64> = points.iter().map(|&t| pdf(t)).collect();
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut next_atom = 0;
    for k in 0..n {
        if k > 0 {
            let h = points[k] - points[k - 1];
            acc += 0.5 * h * (density[k] + density[k - 1]);
        }
        while next_atom < atoms.len() && atoms[next_atom].value <= points[k] {
            acc += atoms[next_atom].mass;
            next_atom += 1;
        }
        cdf.push(acc.min(1.0));
    }
    DensityGrid {
        points,
        density,
        cdf,
    }
}

/// Sorts and merges overlapping intervals.
fn merge(mut pieces: Vec<Interval>) -> Vec<Interval> {
    pieces.sort_by(|a, b| a.lo().total_cmp(&b.lo()));
    let mut out: Vec<Interval> = Vec::new();
    for p in pieces {
        match out.last_mut() {
            Some(last) if p.lo() <= last.hi() => {
                if p.hi() > last.hi() {
                    *last = Interval::new(last.lo(), p.hi()).expect("ordered");
                }
            }
            _ => out.push(p),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{DensityKind, ElementDensity};
    use crate::quad::adaptive_simpson;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn solution(boxes: Vec<Interval>, probability: f64) -> OrderedSolution {
        let order = (0..boxes.len()).collect();
        let weight = boxes.iter().copied().sum();
        OrderedSolution {
            order,
            scenario_box: boxes,
            weight,
            probability: Some(probability),
            trace: Vec::new(),
        }
    }

    fn value(boxes: Vec<Interval>, method: Method) -> SolutionValue {
        let x = solution(boxes.clone(), 1.0);
        solution_value_density(&x, &WeightLaw::Uniform, &boxes, method)
    }

    #[test]
    fn single_uniform_term() {
        let v = value(vec![iv(1.0, 3.0)], Method::Auto);
        assert_eq!(v.density.pdf(2.0), 0.5);
        assert_eq!(v.density.pdf(0.5), 0.0);
        assert_eq!(v.mean, 2.0);
    }

    #[test]
    fn two_unit_uniforms_are_triangular() {
        let v = value(vec![iv(0.0, 1.0), iv(0.0, 1.0)], Method::Auto);
        for &(t, f) in &[
            (0.25, 0.25),
            (1.0, 1.0),
            (1.5, 0.5),
            (2.0, 0.0),
            (-0.1, 0.0),
        ] {
            assert!((v.density.pdf(t) - f).abs() < 1e-14, "{t}");
        }
    }

    #[test]
    fn unequal_widths_against_direct_convolution() {
        // U[0,1] + U[0,3]: trapezoid rising on [0,1], flat 1/3 on [1,3]
        let v = value(vec![iv(2.0, 3.0), iv(1.0, 4.0)], Method::Auto);
        let direct = |t: f64| {
            let s = t - 3.0;
            adaptive_simpson(
                &|u: f64| {
                    if (0.0..=3.0).contains(&(s - u)) {
                        1.0 / 3.0
                    } else {
                        0.0
                    }
                },
                0.0,
                1.0,
                1e-12,
            )
        };
        for &t in &[3.2, 3.7, 4.5, 5.9, 6.6] {
            assert!((v.density.pdf(t) - direct(t)).abs() < 1e-6, "{t}");
        }
        let mass = integrate_piecewise(
            &|t| v.density.pdf(t),
            3.0,
            7.0,
            &v.density.breakpoints(),
            1e-12,
        );
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn twelve_uniforms_normal_moments() {
        let v = value(vec![iv(0.0, 1.0); 12], Method::Auto);
        assert!(matches!(v.density, ValueDensity::Normal { .. }));
        assert!((v.mean - 6.0).abs() < 1e-12);
        assert!((v.variance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_close_to_exact_at_eight_terms() {
        let boxes = vec![iv(0.0, 1.0); 8];
        let exact = value(boxes.clone(), Method::Convolution);
        let normal = value(boxes, Method::Normal);
        let tv = 0.5
            * adaptive_simpson(
                &|t| (exact.density.pdf(t) - normal.density.pdf(t)).abs(),
                0.0,
                8.0,
                1e-9,
            );
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn numeric_convolution_matches_closed_form() {
        let boxes = vec![iv(1.0, 2.0), iv(0.0, 3.0), iv(2.0, 2.5)];
        let exact = value(boxes.clone(), Method::Auto);
        let spread: Vec<Term> = boxes
            .iter()
            .map(|&w| Term {
                density: ElementDensity::uniform(w),
                window: w,
            })
            .collect();
        let refs: Vec<&Term> = spread.iter().collect();
        let numeric = numeric_convolution(&refs, exact.support);
        for &t in &[3.3, 4.0, 5.1, 6.2, 7.0] {
            assert!((numeric.pdf(t) - exact.density.pdf(t)).abs() < 5e-3, "{t}");
        }
    }

    #[test]
    fn monte_carlo_histogram_is_close() {
        let boxes = vec![iv(0.0, 1.0), iv(0.0, 1.0)];
        let v = value(
            boxes,
            Method::MonteCarlo {
                samples: 200_000,
                seed: 9,
            },
        );
        assert!((v.density.pdf(1.0) - 1.0).abs() < 0.05);
        assert!((v.density.pdf(0.5) - 0.5).abs() < 0.05);
    }

    #[test]
    fn truncated_non_uniform_terms() {
        let w = iv(0.0, 2.0);
        let tri = ElementDensity::new(DensityKind::Triangular { mode: 0.0 }, w, 0).unwrap();
        let law = WeightLaw::Density(vec![tri.clone(), tri]);
        let x = solution(vec![iv(0.0, 1.0), iv(0.0, 1.0)], 1.0);
        let v = solution_value_density(&x, &law, &[w, w], Method::Auto);
        // each term has density 2(2-t)/3 on [0,1]: mean 4/9
        assert!((v.mean - 8.0 / 9.0).abs() < 1e-9);
        let mass = integrate_piecewise(
            &|t| v.density.pdf(t),
            0.0,
            2.0,
            &v.density.breakpoints(),
            1e-9,
        );
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_solution_mixture() {
        let boxes = vec![iv(1.0, 3.0)];
        let set = SolutionSet::new(vec![solution(boxes.clone(), 1.0)]);
        let d = mixture_density(&set, &WeightLaw::Uniform, &boxes, Method::Auto).unwrap();
        assert!((d.mass - 1.0).abs() < 1e-6);
        assert_eq!(d.support_pieces, vec![iv(1.0, 3.0)]);
        assert_eq!(d.grid.points.len(), GRID_POINTS);
        assert_eq!(d.grid.density[GRID_POINTS / 2], 0.5);
        assert!((d.grid.cdf[GRID_POINTS - 1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bimodal_mixture() {
        let originals = vec![iv(1.0, 2.0), iv(5.0, 6.0)];
        let a = OrderedSolution {
            order: vec![0],
            scenario_box: originals.clone(),
            weight: iv(1.0, 2.0),
            probability: Some(0.5),
            trace: Vec::new(),
        };
        let b = OrderedSolution {
            order: vec![1],
            weight: iv(5.0, 6.0),
            ..a.clone()
        };
        let set = SolutionSet::new(vec![a, b]);
        let d = mixture_density(&set, &WeightLaw::Uniform, &originals, Method::Auto).unwrap();
        assert_eq!(d.support_pieces, vec![iv(1.0, 2.0), iv(5.0, 6.0)]);
        let pdf = |t: f64| {
            0.5 * (if (1.0..=2.0).contains(&t) { 1.0 } else { 0.0 })
                + 0.5 * (if (5.0..=6.0).contains(&t) { 1.0 } else { 0.0 })
        };
        let left = integrate_piecewise(&pdf, 0.0, 3.5, &[1.0, 2.0], 1e-12);
        assert!((left - 0.5).abs() < 1e-9);
        assert!((d.mass - 1.0).abs() < 1e-6);
        assert!((d.mean - 3.5).abs() < 1e-12);
        // mixture variance: 1/12 + 4
        assert!((d.variance - (1.0 / 12.0 + 4.0)).abs() < 1e-12);
        let mid = d.grid.points.iter().position(|&t| t > 3.5).unwrap();
        assert_eq!(d.grid.density[mid], 0.0);
    }

    #[test]
    fn degenerate_solutions_are_point_masses() {
        let boxes = vec![iv(2.0, 2.0), iv(3.0, 3.0)];
        let set = SolutionSet::new(vec![solution(boxes.clone(), 1.0)]);
        let d = mixture_density(&set, &WeightLaw::Uniform, &boxes, Method::Auto).unwrap();
        assert_eq!(
            d.atoms,
            vec![PointMass {
                value: 5.0,
                mass: 1.0
            }]
        );
        assert_eq!(d.mass, 1.0);
        assert_eq!(d.variance, 0.0);
    }

    #[test]
    fn missing_probabilities_are_rejected() {
        let boxes = vec![iv(1.0, 3.0)];
        let mut x = solution(boxes.clone(), 1.0);
        x.probability = None;
        let set = SolutionSet::new(vec![x]);
        assert_eq!(
            mixture_density(&set, &WeightLaw::Uniform, &boxes, Method::Auto),
            Err(ProbabilityError::Missing)
        );
    }
}
