//! One-dimensional streaming K-means (MacQueen's rule) used to maintain a
//! small representative subset of the stream.

use crate::error::{Error, Result};

/// A center together with how many points it has absorbed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Center {
    pub value: f64,
    pub count: u64,
}

/// Sequential K-means: the first `k_max` distinct arrivals seed the centers
/// in order; every later point moves its nearest center by `1/count`.
///
/// Centers keep their creation-slot order. Ties on distance go to the
/// lowest-index center.
#[derive(Debug, Clone)]
pub struct StreamKMeans {
    k_max: usize,
    centers: Vec<Center>,
}

impl StreamKMeans {
    pub fn new(k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidConfig("k_max must be >= 1".into()));
        }
        Ok(StreamKMeans {
            k_max,
            centers: Vec::with_capacity(k_max),
        })
    }

    pub fn observe(&mut self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {y}")));
        }
        if self.centers.len() < self.k_max {
            self.centers.push(Center { value: y, count: 1 });
            return Ok(());
        }
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centers.iter().enumerate() {
            let d = (y - c.value).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let c = &mut self.centers[best];
        c.count += 1;
        c.value += (y - c.value) / c.count as f64;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Copy of the current centers in creation-slot order.
    pub fn snapshot(&self) -> Vec<Center> {
        self.centers.clone()
    }

    /// Center values only, in creation-slot order.
    pub fn values(&self) -> Vec<f64> {
        self.centers.iter().map(|c| c.value).collect()
    }

    /// Center values sorted ascending.
    pub fn values_sorted(&self) -> Vec<f64> {
        let mut v = self.values();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}
