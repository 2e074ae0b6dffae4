//! Hash-based point predictors: weighted mean and weighted median of the
//! bin midpoints under Count-Min sketch weights.

use crate::error::{Error, Result};
use crate::sketch::CmsHistogram;

/// Which of the two hash-based predictors to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbpVariant {
    Mean,
    Median,
}

/// Weighted mean of bin midpoints with raw weights `est(k) / n`.
///
/// The weights are used exactly as defined even though overestimation can
/// make them sum above 1; the median variant is the normalized one.
pub fn predict_mean(sketch: &CmsHistogram) -> Result<f64> {
    if sketch.n() == 0 {
        return Err(Error::EmptySketch);
    }
    let n = sketch.n() as f64;
    let mut acc = 0.0;
    for k in 1..=sketch.partition.k {
        let w = sketch.estimate_bin(k) as f64 / n;
        if w > 0.0 {
            acc += sketch.partition.midpoint(k) * w;
        }
    }
    Ok(acc)
}

/// Weighted median of bin midpoints with normalized weights.
///
/// Indexing runs over the bins with positive weight: with support midpoints
/// `s_1 < ... < s_r`, take the largest `q` with `sum_{i<=q} w_i <= 1/2` and
/// return `(s_q + s_{q+1}) / 2`, clamping `s_0 := s_1` and `s_{r+1} := s_r`.
/// A point mass therefore returns its own midpoint.
pub fn predict_median(sketch: &CmsHistogram) -> Result<f64> {
    if sketch.n() == 0 {
        return Err(Error::EmptySketch);
    }
    let weights: Vec<(f64, u64)> = (1..=sketch.partition.k)
        .map(|k| (sketch.partition.midpoint(k), sketch.estimate_bin(k)))
        .filter(|&(_, c)| c > 0)
        .collect();
    let total: u64 = weights.iter().map(|&(_, c)| c).sum();
    weighted_median(&weights, total)
}

/// Median under the support-indexed rule above; shared with the exact
/// histogram oracle in tests.
pub(crate) fn weighted_median(support: &[(f64, u64)], total: u64) -> Result<f64> {
    if support.is_empty() || total == 0 {
        return Err(Error::EmptySketch);
    }
    let half = total as f64 / 2.0;
    // Largest q (0-based count of support bins at or below the median cut)
    // with cumulative weight <= 1/2.
    let mut q = 0usize;
    let mut cum = 0u64;
    for (i, &(_, c)) in support.iter().enumerate() {
        if cum as f64 + c as f64 <= half {
            cum += c;
            q = i + 1;
        } else {
            break;
        }
    }
    let r = support.len();
    let lo = support[q.saturating_sub(1).min(r - 1)].0; // s_q, clamped s_0 := s_1
    let hi = support[q.min(r - 1)].0; // s_{q+1}, clamped s_{r+1} := s_r
    Ok((lo + hi) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{next_prime, CmsHistogram, HashRow, IntervalPartition};
    use proptest::prelude::*;

    fn injective_sketch(m: f64, big_m: f64, k: usize) -> CmsHistogram {
        let part = IntervalPartition::new(m, big_m, k).unwrap();
        let p = next_prime(k as u64);
        let row = HashRow::new(1, 0, p, p as usize).unwrap();
        CmsHistogram::with_rows(part, vec![row]).unwrap()
    }

    #[test]
    fn mean_point_mass() {
        let mut s = injective_sketch(0.0, 10.0, 10);
        for _ in 0..7 {
            s.update(2.2).unwrap();
        }
        assert!((predict_mean(&s).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn mean_two_bins() {
        // K=2 over (0,2], counts (3,1): 0.5*3/4 + 1.5*1/4 = 0.75.
        let mut s = injective_sketch(0.0, 2.0, 2);
        for _ in 0..3 {
            s.update(0.5).unwrap();
        }
        s.update(1.5).unwrap();
        assert!((predict_mean(&s).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn median_point_mass_returns_midpoint() {
        let mut s = injective_sketch(0.0, 10.0, 10);
        for _ in 0..5 {
            s.update(2.2).unwrap();
        }
        assert!((predict_median(&s).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn median_uniform_four_bins() {
        let mut s = injective_sketch(0.0, 4.0, 4);
        for y in [0.5, 1.5, 2.5, 3.5] {
            s.update(y).unwrap();
        }
        assert!((predict_median(&s).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn median_skewed_weights() {
        // Weights (0.2, 0.2, 0.6) on K=3 over (0,3]: cumulative 0.2, 0.4
        // against 1/2 gives q=2, so (m_2 + m_3)/2 = 2.0.
        let mut s = injective_sketch(0.0, 3.0, 3);
        for _ in 0..2 {
            s.update(0.5).unwrap();
        }
        for _ in 0..2 {
            s.update(1.5).unwrap();
        }
        for _ in 0..6 {
            s.update(2.5).unwrap();
        }
        assert!((predict_median(&s).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sketch_errors() {
        let s = injective_sketch(0.0, 10.0, 10);
        assert!(predict_mean(&s).is_err());
        assert!(predict_median(&s).is_err());
    }

    /// Exact histogram predictors used as the brute-force oracle.
    fn oracle_predictions(m: f64, big_m: f64, k: usize, data: &[f64]) -> (f64, f64) {
        let part = IntervalPartition::new(m, big_m, k).unwrap();
        let mut counts = vec![0u64; k];
        for &y in data {
            counts[part.bin_index(y).unwrap() - 1] += 1;
        }
        let n = data.len() as f64;
        let mean = (0..k)
            .map(|i| part.midpoint(i + 1) * counts[i] as f64 / n)
            .sum();
        let support: Vec<(f64, u64)> = (0..k)
            .filter(|&i| counts[i] > 0)
            .map(|i| (part.midpoint(i + 1), counts[i]))
            .collect();
        let median = weighted_median(&support, data.len() as u64).unwrap();
        (mean, median)
    }

    proptest! {
        /// With injective rows both predictors match the exact histogram oracle.
        #[test]
        fn injective_matches_oracle(values in prop::collection::vec(0.001f64..10.0, 1..300)) {
            let mut s = injective_sketch(0.0, 10.0, 10);
            for &y in &values {
                s.update(y).unwrap();
            }
            let (mean, median) = oracle_predictions(0.0, 10.0, 10, &values);
            prop_assert!((predict_mean(&s).unwrap() - mean).abs() < 1e-10);
            prop_assert!((predict_median(&s).unwrap() - median).abs() < 1e-10);
        }

        /// Median always lies inside [m, M]; mean does when rows are injective.
        #[test]
        fn predictions_in_range(values in prop::collection::vec(0.001f64..10.0, 1..200)) {
            let mut s = injective_sketch(0.0, 10.0, 10);
            for &y in &values {
                s.update(y).unwrap();
            }
            let mean = predict_mean(&s).unwrap();
            let median = predict_median(&s).unwrap();
            prop_assert!((0.0..=10.0).contains(&mean));
            prop_assert!((0.0..=10.0).contains(&median));
        }

        /// Shifting the partition and all data by c shifts both predictions
        /// by exactly c (bin-resolution equivariance).
        #[test]
        fn shift_equivariance(values in prop::collection::vec(0.001f64..10.0, 1..200), c in -5.0f64..5.0) {
            let mut s0 = injective_sketch(0.0, 10.0, 10);
            let mut s1 = injective_sketch(c, 10.0 + c, 10);
            for &y in &values {
                s0.update(y).unwrap();
                s1.update(y + c).unwrap();
            }
            let dm = predict_mean(&s1).unwrap() - predict_mean(&s0).unwrap();
            let dq = predict_median(&s1).unwrap() - predict_median(&s0).unwrap();
            prop_assert!((dm - c).abs() < 1e-9);
            prop_assert!((dq - c).abs() < 1e-9);
        }
    }
}
