//! Interval-partitioned Count-Min sketch over bounded reals.
//!
//! The value range `(m, M]` is split into `K` equal intervals; each update
//! hashes the interval id through `d` Carter-Wegman rows into `W` buckets.
//! Frequency queries take the minimum across rows, so estimates never
//! undercount.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Format version tag for serialized sketch state.
pub const SKETCH_FORMAT_VERSION: u32 = 1;

/// Equal-width partition of `(m, M]` into `K` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalPartition {
    pub m: f64,
    pub big_m: f64,
    pub k: usize,
}

impl IntervalPartition {
    pub fn new(m: f64, big_m: f64, k: usize) -> Result<Self> {
        if !m.is_finite() || !big_m.is_finite() {
            return Err(Error::InvalidInput("partition bounds must be finite".into()));
        }
        if big_m <= m {
            return Err(Error::InvalidInput(format!(
                "upper bound {big_m} must exceed lower bound {m}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidInput("bin count must be positive".into()));
        }
        Ok(Self { m, big_m, k })
    }

    /// Bin id in `1..=K` for a value. Values at or below `m` clamp to bin 1,
    /// values above `M` clamp to bin `K`; right endpoints belong to their own
    /// bin. The mapped-index form avoids floating-point boundary drift.
    pub fn bin_index(&self, y: f64) -> Result<usize> {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite value {y}")));
        }
        let scaled = (self.k as f64) * (y - self.m) / (self.big_m - self.m);
        let idx = scaled.ceil() as i64;
        Ok(idx.clamp(1, self.k as i64) as usize)
    }

    /// True when the value lies outside `(m, M]` and would be clamped.
    pub fn out_of_range(&self, y: f64) -> bool {
        y <= self.m || y > self.big_m
    }

    /// Midpoint of bin `k` (1-based).
    pub fn midpoint(&self, k: usize) -> f64 {
        let width = (self.big_m - self.m) / self.k as f64;
        self.m + (k as f64 - 0.5) * width
    }

    /// Right endpoint of bin `k` (1-based).
    pub fn boundary(&self, k: usize) -> f64 {
        self.m + (self.big_m - self.m) * k as f64 / self.k as f64
    }
}

/// One Carter-Wegman hash row `k -> ((a*k + b) mod p) mod W + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashRow {
    pub a: u64,
    pub b: u64,
    pub p: u64,
    pub w: usize,
}

impl HashRow {
    pub fn new(a: u64, b: u64, p: u64, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidInput("hash range must be positive".into()));
        }
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if a == 0 || a >= p || b >= p {
            return Err(Error::InvalidInput(
                "hash coefficients must satisfy 1 <= a <= p-1, 0 <= b <= p-1".into(),
            ));
        }
        Ok(Self { a, b, p, w })
    }

    /// Bucket in `1..=W` for bin id `k`.
    pub fn eval(&self, k: usize) -> usize {
        (((self.a.wrapping_mul(k as u64).wrapping_add(self.b)) % self.p) % self.w as u64) as usize
            + 1
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Count-Min sketch over an interval partition: `d` rows of `W` counters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CmsHistogram {
    pub version: u32,
    pub partition: IntervalPartition,
    pub rows: Vec<HashRow>,
    counters: Vec<Vec<u64>>,
    n: u64,
    clamped: u64,
}

impl CmsHistogram {
    /// Build a sketch with `d` independent rows into `1..=W`, drawn from a
    /// seeded PRNG. The modulus is the smallest prime above `max(K, W)`.
    pub fn new(partition: IntervalPartition, d: usize, w: usize, seed: u64) -> Result<Self> {
        if d == 0 || w == 0 {
            return Err(Error::InvalidInput("depth and width must be positive".into()));
        }
        let p = next_prime(partition.k.max(w) as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..d)
            .map(|_| {
                let a = rng.gen_range(1..p);
                let b = rng.gen_range(0..p);
                HashRow::new(a, b, p, w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            version: SKETCH_FORMAT_VERSION,
            partition,
            counters: vec![vec![0; w]; d],
            rows,
            n: 0,
            clamped: 0,
        })
    }

    /// Build a sketch with explicitly supplied rows (tests use injective rows).
    pub fn with_rows(partition: IntervalPartition, rows: Vec<HashRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("at least one hash row required".into()));
        }
        let w = rows[0].w;
        if rows.iter().any(|r| r.w != w) {
            return Err(Error::InvalidInput("all rows must share the same width".into()));
        }
        Ok(Self {
            version: SKETCH_FORMAT_VERSION,
            partition,
            counters: vec![vec![0; w]; rows.len()],
            rows,
            n: 0,
            clamped: 0,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of observed values that fell outside `(m, M]` and were clamped
    /// to an edge bin.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows[0].w
    }

    /// Record one value: increment one counter per row.
    pub fn update(&mut self, y: f64) -> Result<()> {
        let k = self.partition.bin_index(y)?;
        if self.partition.out_of_range(y) {
            self.clamped += 1;
        }
        for (j, row) in self.rows.iter().enumerate() {
            self.counters[j][row.eval(k) - 1] += 1;
        }
        self.n += 1;
        Ok(())
    }

    /// Reset counters without changing the partition or rows.
    pub fn clear(&mut self) {
        for row in &mut self.counters {
            row.fill(0);
        }
        self.n = 0;
        self.clamped = 0;
    }

    /// Frequency estimate for bin `k`: minimum counter across rows. Never
    /// undercounts the true bin frequency.
    pub fn estimate_bin(&self, k: usize) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(j, row)| self.counters[j][row.eval(k) - 1])
            .min()
            .unwrap_or(0)
    }

    /// Estimated empirical distribution function at `y`:
    /// `sum_{k <= bin(y)} est(k) / n`. Unclamped; overestimation can push the
    /// value above 1.
    pub fn eedf(&self, y: f64) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::EmptySketch);
        }
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite value {y}")));
        }
        if y <= self.partition.m {
            return Ok(0.0);
        }
        let kq = self.partition.bin_index(y)?;
        let total: u64 = (1..=kq).map(|k| self.estimate_bin(k)).sum();
        Ok(total as f64 / self.n as f64)
    }

    /// Serialize sketch state to a self-describing JSON blob.
    pub fn to_blob(&self) -> String {
        serde_json::to_string(self).expect("sketch state is serializable")
    }

    /// Restore sketch state from [`to_blob`](Self::to_blob) output.
    pub fn from_blob(blob: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(blob)
            .map_err(|e| Error::Ingestion(format!("bad sketch blob: {e}")))?;
        if s.version != SKETCH_FORMAT_VERSION {
            return Err(Error::Ingestion(format!(
                "unsupported sketch format version {}",
                s.version
            )));
        }
        Ok(s)
    }
}
