//! Empirical estimation of the limit densities from simulated graphs,
//! recursion grids, or limit samples, plus the KS comparison metric.
//!
//! Both estimation strategies histogram the transformed ratio
//! `arctan(out / in^a)`, which compactifies the support to `[0, pi/2]`:
//! conditioning either on a large in-degree (ratio histograms) or on a large
//! standardized radius `out² + in^(2a)` (angular histograms). Thresholds use
//! the nearest-rank quantile convention, `rank = ceil(q n)`; grid-weighted
//! variants take the smallest value whose cumulative mass reaches `q`.

use crate::params::ModelParams;
use crate::recursion::DegreeGrid;
use crate::sampler::DegreeSample;
use crate::scalar::Real;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("empty input")]
    EmptyInput,
    #[error("quantile q = {0} must lie in (0, 1)")]
    BadQuantile(f64),
    #[error("no exceedances above threshold {threshold}")]
    NoExceedances { threshold: f64 },
    #[error("bins must be positive")]
    NoBins,
    #[error("support mismatch: histogram has {edges} edges, cdf has {cdf} values")]
    SupportMismatch { edges: usize, cdf: usize },
}

/// What the histogram conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    /// Nodes (or cells) with in-degree above the threshold.
    InDegree,
    /// Nodes (or cells) with `out² + in^(2a)` above the threshold.
    Radius,
}

/// Histogram of `arctan(out/in^a)` over the conditioning set, masses
/// normalized to one.
#[derive(Debug, Clone)]
pub struct ConditionalHistogram<T> {
    pub bin_edges: Vec<T>,
    pub masses: Vec<T>,
    /// Number of contributing units: nodes for count-based sources, cells
    /// with positive weight for grid-based ones.
    pub n_exceedances: u64,
    pub threshold: T,
    pub conditioning: Conditioning,
}

impl<T: Real> ConditionalHistogram<T> {
    /// Cumulative masses at the bin edges (starting at zero).
    pub fn cdf_at_edges(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.masses.len() + 1);
        let mut acc = T::zero();
        out.push(acc);
        for &m in &self.masses {
            acc += m;
            out.push(acc);
        }
        out
    }
}

/// Nearest-rank empirical quantile: the element of rank `ceil(q n)` in the
/// sorted sample.
pub fn threshold_quantile<V>(values: &[V], q: f64) -> Result<V, EstimatorError>
where
    V: PartialOrd + Copy,
{
    if values.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(EstimatorError::BadQuantile(q));
    }
    let mut sorted: Vec<V> = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Smallest value whose cumulative weight reaches `q` of the total.
fn weighted_quantile<T: Real>(pairs: &mut [(T, T)], q: f64) -> Result<T, EstimatorError> {
    if pairs.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(EstimatorError::BadQuantile(q));
    }
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable values"));
    let total: T = pairs.iter().fold(T::zero(), |s, &(_, w)| s + w);
    let target = total * T::of(q);
    let mut acc = T::zero();
    for &(v, w) in pairs.iter() {
        acc += w;
        if acc >= target {
            return Ok(v);
        }
    }
    Ok(pairs.last().expect("nonempty").0)
}

fn build_histogram<T: Real>(
    entries: impl Iterator<Item = (T, T)>, // (angle, weight)
    bins: usize,
    threshold: T,
    conditioning: Conditioning,
    n_exceedances: u64,
) -> Result<ConditionalHistogram<T>, EstimatorError> {
    if bins == 0 {
        return Err(EstimatorError::NoBins);
    }
    let hi = T::FRAC_PI_2();
    let width = hi / T::of_usize(bins);
    let mut masses = vec![T::zero(); bins];
    let mut total = T::zero();
    for (angle, weight) in entries {
        let mut idx = (angle / width).to_usize().unwrap_or(0);
        if idx >= bins {
            idx = bins - 1;
        }
        masses[idx] += weight;
        total += weight;
    }
    if !(total > T::zero()) {
        return Err(EstimatorError::NoExceedances {
            threshold: threshold.as_f64(),
        });
    }
    for m in &mut masses {
        *m /= total;
    }
    let bin_edges = (0..=bins).map(|k| T::of_usize(k) * width).collect();
    Ok(ConditionalHistogram {
        bin_edges,
        masses,
        n_exceedances,
        threshold,
        conditioning,
    })
}

fn angle_of<T: Real>(i: u32, o: u32, a: T) -> T {
    // arctan(out / in^a) via atan2, so in-degree zero lands at pi/2
    T::of_usize(o as usize).atan2(T::of_usize(i as usize).powf(a))
}

/// Strategy 1: histogram of `arctan(out/in^a)` over the nodes of a simulated
/// graph whose in-degree exceeds the `q`-quantile of all in-degrees.
pub fn ratio_histogram_sim<T: Real>(
    counts: &BTreeMap<(u32, u32), u64>,
    params: &ModelParams<T>,
    q: f64,
    bins: usize,
) -> Result<ConditionalHistogram<T>, EstimatorError> {
    if counts.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    let mut in_degrees: Vec<u32> = Vec::new();
    for (&(i, _), &c) in counts {
        for _ in 0..c {
            in_degrees.push(i);
        }
    }
    let m = threshold_quantile(&in_degrees, q)?;
    ratio_histogram_sim_at(counts, params, m, bins)
}

/// [`ratio_histogram_sim`] with an explicit in-degree threshold.
pub fn ratio_histogram_sim_at<T: Real>(
    counts: &BTreeMap<(u32, u32), u64>,
    params: &ModelParams<T>,
    m: u32,
    bins: usize,
) -> Result<ConditionalHistogram<T>, EstimatorError> {
    if counts.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    let a = params.derive().a;
    let n_exceedances: u64 = counts
        .iter()
        .filter(|(&(i, _), _)| i > m)
        .map(|(_, &c)| c)
        .sum();
    if n_exceedances == 0 {
        return Err(EstimatorError::NoExceedances {
            threshold: m as f64,
        });
    }
    let entries = counts
        .iter()
        .filter(move |(&(i, _), _)| i > m)
        .map(move |(&(i, o), &c)| (angle_of(i, o, a), T::of(c as f64)));
    build_histogram(entries, bins, T::of(m as f64), Conditioning::InDegree, n_exceedances)
}

/// Strategy 2: histogram of `arctan(j/i^a)` weighted by the recursion
/// probabilities over grid cells with `i > m`, renormalized on that set.
pub fn ratio_density_recursion<T: Real>(
    grid: &DegreeGrid<T>,
    m: usize,
    bins: usize,
) -> Result<ConditionalHistogram<T>, EstimatorError> {
    let a = grid.params().derive().a;
    let mut n_cells = 0u64;
    let entries: Vec<(T, T)> = grid
        .cells()
        .filter(|&(i, _, p)| i > m && p > T::zero())
        .map(|(i, j, p)| {
            n_cells += 1;
            (angle_of(i as u32, j as u32, a), p)
        })
        .collect();
    build_histogram(
        entries.into_iter(),
        bins,
        T::of_usize(m),
        Conditioning::InDegree,
        n_cells,
    )
}

/// Degree data feeding an angular histogram: node counts from a simulation
/// (or sampler), or recursion-grid cell masses.
#[derive(Clone, Copy)]
pub enum DegreeSource<'a, T> {
    Counts(&'a BTreeMap<(u32, u32), u64>),
    Grid(&'a DegreeGrid<T>),
}

impl<T: Real> DegreeSource<'_, T> {
    fn for_each_unit(&self, mut f: impl FnMut(u32, u32, T)) {
        match self {
            DegreeSource::Counts(counts) => {
                for (&(i, o), &c) in counts.iter() {
                    f(i, o, T::of(c as f64));
                }
            }
            DegreeSource::Grid(grid) => {
                for (i, j, p) in grid.cells() {
                    if p > T::zero() {
                        f(i as u32, j as u32, p);
                    }
                }
            }
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            DegreeSource::Counts(counts) => counts.is_empty(),
            DegreeSource::Grid(_) => false,
        }
    }
}

/// Histogram of `arctan(out/in^a)` over units whose standardized radius
/// `out² + in^(2a)` exceeds its weighted `q`-quantile. Two passes over the
/// source: one for the threshold, one for the conditioned masses, so large
/// grids never get materialized as unit lists.
pub fn angular_histogram<T: Real>(
    source: DegreeSource<'_, T>,
    params: &ModelParams<T>,
    q: f64,
    bins: usize,
) -> Result<ConditionalHistogram<T>, EstimatorError> {
    if source.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    let a = params.derive().a;
    let two_a = a + a;
    let radius = |i: u32, o: u32| -> T {
        let o = T::of_usize(o as usize);
        o * o + T::of_usize(i as usize).powf(two_a)
    };
    let mut weighted: Vec<(T, T)> = Vec::new();
    source.for_each_unit(|i, o, w| weighted.push((radius(i, o), w)));
    let m = weighted_quantile(&mut weighted, q)?;
    drop(weighted);
    if bins == 0 {
        return Err(EstimatorError::NoBins);
    }
    let hi = T::FRAC_PI_2();
    let width = hi / T::of_usize(bins);
    let mut masses = vec![T::zero(); bins];
    let mut total = T::zero();
    let mut n_exceedances = 0u64;
    source.for_each_unit(|i, o, w| {
        if radius(i, o) > m {
            n_exceedances += 1;
            let mut idx = (angle_of(i, o, a) / width).to_usize().unwrap_or(0);
            if idx >= bins {
                idx = bins - 1;
            }
            masses[idx] += w;
            total += w;
        }
    });
    if !(total > T::zero()) {
        return Err(EstimatorError::NoExceedances {
            threshold: m.as_f64(),
        });
    }
    for mass in &mut masses {
        *mass /= total;
    }
    Ok(ConditionalHistogram {
        bin_edges: (0..=bins).map(|k| T::of_usize(k) * width).collect(),
        masses,
        n_exceedances,
        threshold: m,
        conditioning: Conditioning::Radius,
    })
}

/// Kolmogorov–Smirnov distance at the bin edges: the sup over edges of
/// |empirical CDF − theoretical CDF|. The `cdf` slice must carry one value
/// per edge.
pub fn ks_distance<T: Real>(
    hist: &ConditionalHistogram<T>,
    cdf: &[T],
) -> Result<T, EstimatorError> {
    if cdf.len() != hist.bin_edges.len() {
        return Err(EstimatorError::SupportMismatch {
            edges: hist.bin_edges.len(),
            cdf: cdf.len(),
        });
    }
    let empirical = hist.cdf_at_edges();
    let mut sup = T::zero();
    for (e, t) in empirical.iter().zip(cdf.iter()) {
        sup = sup.max((*e - *t).abs());
    }
    Ok(sup)
}

/// Collects limit-sampler draws into the sparse degree-count map the
/// estimators consume.
pub fn degree_counts_from_samples(samples: &[DegreeSample]) -> BTreeMap<(u32, u32), u64> {
    let mut counts = BTreeMap::new();
    for s in samples {
        let key = (s.i.min(u32::MAX as u64) as u32, s.o.min(u32::MAX as u64) as u32);
        *counts.entry(key).or_insert(0u64) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::solve_grid;
    use approx::assert_relative_eq;

    fn p0() -> ModelParams<f64> {
        ModelParams::new(0.5, 0.5, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn nearest_rank_quantiles() {
        let values: Vec<u32> = (1..=10_000).collect();
        assert_eq!(threshold_quantile(&values, 0.9995).unwrap(), 9995);
        assert_eq!(threshold_quantile(&[7u32, 7, 7], 0.25).unwrap(), 7);
        assert_eq!(threshold_quantile(&[1u32, 2, 3], 0.5).unwrap(), 2);
        assert!(matches!(
            threshold_quantile::<u32>(&[], 0.5),
            Err(EstimatorError::EmptyInput)
        ));
        assert!(matches!(
            threshold_quantile(&[1u32], 1.0),
            Err(EstimatorError::BadQuantile(_))
        ));
    }

    #[test]
    fn histogram_masses_sum_to_one() {
        let mut counts = BTreeMap::new();
        counts.insert((10u32, 3u32), 5u64);
        counts.insert((20, 1), 2);
        counts.insert((3, 4), 100);
        let h = ratio_histogram_sim(&counts, &p0(), 0.5, 16).unwrap();
        let total: f64 = h.masses.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        assert_eq!(h.bin_edges.len(), 17);
    }

    #[test]
    fn all_zero_out_degrees_land_in_first_bin() {
        let mut counts = BTreeMap::new();
        counts.insert((50u32, 0u32), 40u64); // exceedances, angle 0
        counts.insert((1, 1), 1000);
        let h = ratio_histogram_sim(&counts, &p0(), 0.9, 64).unwrap();
        assert_relative_eq!(h.masses[0], 1.0, epsilon = 1e-12);
        assert_eq!(h.n_exceedances, 40);
    }

    #[test]
    fn recursion_histogram_single_cell() {
        let grid = solve_grid(&p0(), 8, 8).unwrap();
        // with m = 7 only row 8 contributes; all its mass lands somewhere
        let h = ratio_density_recursion(&grid, 7, 32).unwrap();
        let total: f64 = h.masses.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn no_exceedances_is_an_error() {
        let grid = solve_grid(&p0(), 8, 8).unwrap();
        assert!(matches!(
            ratio_density_recursion(&grid, 8, 32),
            Err(EstimatorError::NoExceedances { .. })
        ));
    }

    #[test]
    fn degenerate_one_unit_angular_histogram() {
        let mut counts = BTreeMap::new();
        counts.insert((2u32, 3u32), 9u64);
        counts.insert((40, 40), 1); // the single exceedance
        let h = angular_histogram(DegreeSource::Counts(&counts), &p0(), 0.5, 64).unwrap();
        assert_eq!(h.n_exceedances, 1);
        assert_eq!(h.conditioning, Conditioning::Radius);
        let nonzero: Vec<_> = h.masses.iter().filter(|m| **m > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_relative_eq!(*nonzero[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_distance_examples() {
        // identical distributions -> 0
        let mut counts = BTreeMap::new();
        counts.insert((5u32, 2u32), 10u64);
        counts.insert((9, 1), 10);
        let h = ratio_histogram_sim(&counts, &p0(), 0.01, 8).unwrap();
        let self_cdf = h.cdf_at_edges();
        assert_eq!(ks_distance(&h, &self_cdf).unwrap(), 0.0);

        // point mass at zero vs the uniform CDF on [0, pi/2]:
        // sup is 1 minus the first interior edge's uniform CDF value
        let mut counts = BTreeMap::new();
        counts.insert((50u32, 0u32), 10u64);
        counts.insert((1, 0), 1);
        let h = ratio_histogram_sim(&counts, &p0(), 0.05, 4).unwrap();
        let hi = std::f64::consts::FRAC_PI_2;
        let uniform: Vec<f64> = h.bin_edges.iter().map(|e| e / hi).collect();
        let expected = 1.0 - h.bin_edges[1] / hi;
        assert_relative_eq!(ks_distance(&h, &uniform).unwrap(), expected, epsilon = 1e-12);

        // two-bin 50/50 vs uniform: |0.5 - edge/hi| at the middle edge
        let h2 = ConditionalHistogram {
            bin_edges: vec![0.0, 0.6, hi],
            masses: vec![0.5, 0.5],
            n_exceedances: 2,
            threshold: 0.0,
            conditioning: Conditioning::InDegree,
        };
        let uniform2: Vec<f64> = h2.bin_edges.iter().map(|e| e / hi).collect();
        assert_relative_eq!(
            ks_distance(&h2, &uniform2).unwrap(),
            (0.5 - 0.6 / hi).abs(),
            epsilon = 1e-12
        );

        // support mismatch
        assert!(matches!(
            ks_distance(&h2, &uniform2[..2]),
            Err(EstimatorError::SupportMismatch { .. })
        ));
    }

    #[test]
    fn weighted_quantile_reaches_target_mass() {
        let mut pairs = vec![(1.0f64, 0.25), (2.0, 0.25), (3.0, 0.5)];
        assert_eq!(weighted_quantile(&mut pairs, 0.5).unwrap(), 2.0);
        let mut pairs = vec![(1.0f64, 0.9), (5.0, 0.1)];
        assert_eq!(weighted_quantile(&mut pairs, 0.95).unwrap(), 5.0);
    }
}
