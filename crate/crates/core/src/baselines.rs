//! Reference predictors: a Dirichlet-process posterior mean and the running
//! sample mean suggested by the normal-model Shtarkov integral.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Dirichlet-process predictor with a uniform base measure over the
/// empirical range.
///
/// Observed values are counted at fixed decimal precision so ties register
/// as repeats; the base-measure contribution uses the midpoint of the
/// streaming min/max range.
#[derive(Debug, Clone)]
pub struct DppState {
    mass: f64,
    precision: u32,
    scale: f64,
    counts: BTreeMap<i64, u64>,
    n: u64,
    min: f64,
    max: f64,
}

impl DppState {
    pub fn new(mass: f64, precision: u32) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "prior mass must be positive and finite, got {mass}"
            )));
        }
        Ok(DppState {
            mass,
            precision,
            scale: 10f64.powi(precision as i32),
            counts: BTreeMap::new(),
            n: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        })
    }

    fn key(&self, y: f64) -> i64 {
        (y * self.scale).round() as i64
    }

    pub fn observe(&mut self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {y}")));
        }
        *self.counts.entry(self.key(y)).or_insert(0) += 1;
        self.n += 1;
        self.min = self.min.min(y);
        self.max = self.max.max(y);
        Ok(())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `sum_j y'_j n_j / (M + n) + (M / (M + n)) * midpoint(range)`.
    pub fn predict(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::ColdStart);
        }
        let denom = self.mass + self.n as f64;
        let mut emp = 0.0;
        for (&k, &c) in &self.counts {
            emp += (k as f64 / self.scale) * c as f64;
        }
        let base = (self.min + self.max) / 2.0;
        Ok(emp / denom + self.mass / denom * base)
    }
}

/// Running mean with compensated (Kahan) summation; the point prediction
/// that the Shtarkov/NML view of the fixed-variance normal model reduces to.
#[derive(Debug, Clone, Default)]
pub struct ShtarkovState {
    sum: f64,
    comp: f64,
    n: u64,
}

impl ShtarkovState {
    pub fn new() -> Self {
        ShtarkovState::default()
    }

    pub fn observe(&mut self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {y}")));
        }
        let t = y - self.comp;
        let s = self.sum + t;
        self.comp = (s - self.sum) - t;
        self.sum = s;
        self.n += 1;
        Ok(())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn predict(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::ColdStart);
        }
        Ok(self.sum / self.n as f64)
    }
}
