//! Prequential evaluation: burn-in, predict-then-observe scoring with a
//! cumulative L1 ledger, and the one-pass / representative execution modes.

use crate::baselines::{DppState, ShtarkovState};
use crate::error::{Error, Result};
use crate::gp::{
    build_ar1, estimate_alpha_beta, estimate_gamma, gpp_mean, rb_predict, whiten_moments, RbHyper,
};
use crate::hbp::{self, HbpVariant};
use crate::kmeans::StreamKMeans;
use crate::sketch::{CmsHistogram, IntervalPartition};

/// FNV-1a over a byte string; used for component ids and config hashing.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; one step is enough to decorrelate seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-component seed derived from the master seed, so adding a method
/// never perturbs another method's randomness.
pub fn component_seed(master: u64, component: &str) -> u64 {
    splitmix64(master ^ fnv1a(component.as_bytes()))
}

/// The six predictors under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    HbpMean,
    HbpMedian,
    Shtarkov,
    Dpp,
    GppRb,
    GppNorb,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::HbpMean,
        Method::HbpMedian,
        Method::Shtarkov,
        Method::Dpp,
        Method::GppRb,
        Method::GppNorb,
    ];

    pub const ONE_PASS: [Method; 4] = [
        Method::HbpMean,
        Method::HbpMedian,
        Method::Shtarkov,
        Method::Dpp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::HbpMean => "hbp_mean",
            Method::HbpMedian => "hbp_median",
            Method::Shtarkov => "shtarkov",
            Method::Dpp => "dpp",
            Method::GppRb => "gpp_rb",
            Method::GppNorb => "gpp_norb",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "hbp_mean" => Ok(Method::HbpMean),
            "hbp_median" => Ok(Method::HbpMedian),
            "shtarkov" => Ok(Method::Shtarkov),
            "dpp" => Ok(Method::Dpp),
            "gpp_rb" => Ok(Method::GppRb),
            "gpp_norb" => Ok(Method::GppNorb),
            _ => Err(Error::InvalidConfig(format!(
                "unknown method '{s}'; valid: hbp_mean, hbp_median, shtarkov, dpp, gpp_rb, gpp_norb"
            ))),
        }
    }

    pub fn one_pass_capable(self) -> bool {
        !matches!(self, Method::GppRb | Method::GppNorb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    OnePass,
    Representative,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::OnePass => "onepass",
            Mode::Representative => "representative",
        }
    }
}

/// Order in which K-means centers are handed to the GP methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterOrder {
    Slot,
    Sorted,
}

impl CenterOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            CenterOrder::Slot => "slot",
            CenterOrder::Sorted => "sorted",
        }
    }
}

/// Cumulative L1 error via the recursion
/// `CPE(n+1) = (n CPE(n) + |e|) / (n+1)`; the sum is kept alongside.
#[derive(Debug, Clone, Copy, Default)]
pub struct CpeLedger {
    n: u64,
    cpe_mean: f64,
    cpe_sum: f64,
}

impl CpeLedger {
    pub fn new() -> Self {
        CpeLedger::default()
    }

    pub fn update(&mut self, y_true: f64, y_pred: f64) -> Result<()> {
        if !(y_true.is_finite() && y_pred.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite ledger inputs ({y_true}, {y_pred})"
            )));
        }
        let e = (y_true - y_pred).abs();
        self.cpe_mean = (self.n as f64 * self.cpe_mean + e) / (self.n as f64 + 1.0);
        self.cpe_sum += e;
        self.n += 1;
        Ok(())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn cpe_mean(&self) -> f64 {
        self.cpe_mean
    }

    pub fn cpe_sum(&self) -> f64 {
        self.cpe_sum
    }
}

/// All knobs of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub burnin_frac: f64,
    pub k_intervals: usize,
    pub depth: usize,
    pub width: usize,
    pub rho: f64,
    /// Bias-variance inflation delta^2 of the random-bias model.
    pub delta2: f64,
    pub kmeans_k: usize,
    pub dpp_mass: f64,
    pub seed: u64,
    /// Decimal places at which the DPP merges repeated values.
    pub precision: u32,
    /// Fraction of the burn-in span added on each side of the sketch range.
    pub range_expand: f64,
    /// Re-estimate GP hyperparameters every step (true) or once (false).
    pub hyper_refit: bool,
    pub center_order: CenterOrder,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            burnin_frac: 0.1,
            k_intervals: 100,
            depth: 10,
            width: 50,
            rho: 0.8,
            delta2: crate::gp::DEFAULT_DELTA2,
            kmeans_k: 200,
            dpp_mass: 1.0,
            seed: 0,
            precision: 1,
            range_expand: 0.05,
            hyper_refit: true,
            center_order: CenterOrder::Slot,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.burnin_frac > 0.0 && self.burnin_frac < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "burnin_frac must be in (0, 1), got {}",
                self.burnin_frac
            )));
        }
        if self.k_intervals == 0 || self.depth == 0 || self.width == 0 || self.kmeans_k == 0 {
            return Err(Error::InvalidConfig("all capacities must be positive".into()));
        }
        if !(self.rho.is_finite() && self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if self.delta2 <= 0.0 || self.dpp_mass <= 0.0 {
            return Err(Error::InvalidConfig(
                "delta2 and dpp_mass must be positive".into(),
            ));
        }
        if self.range_expand < 0.0 {
            return Err(Error::InvalidConfig("range_expand must be >= 0".into()));
        }
        Ok(())
    }

    /// Stable hash over the semantic fields, in a fixed canonical order.
    pub fn config_hash(&self) -> String {
        let canon = format!(
            "burnin_frac={};k={};d={};w={};rho={};delta2={};kmeans_k={};dpp_mass={};seed={};precision={};range_expand={};hyper_refit={};center_order={}",
            self.burnin_frac,
            self.k_intervals,
            self.depth,
            self.width,
            self.rho,
            self.delta2,
            self.kmeans_k,
            self.dpp_mass,
            self.seed,
            self.precision,
            self.range_expand,
            self.hyper_refit,
            self.center_order.as_str(),
        );
        format!("{:016x}", fnv1a(canon.as_bytes()))
    }

    /// Burn-in length for a stream of `n` values: `ceil(frac * n)`, at
    /// least 1, and strictly less than `n`.
    pub fn burnin_len(&self, n: usize) -> Result<usize> {
        let b = ((self.burnin_frac * n as f64).ceil() as usize).max(1);
        if b >= n {
            return Err(Error::Ingestion(format!(
                "stream of {n} values leaves nothing to score after burn-in of {b}"
            )));
        }
        Ok(b)
    }

    /// Sketch support from the burn-in: min/max expanded by
    /// `range_expand` of the span on each side.
    pub fn sketch_range(&self, burnin: &[f64]) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &y in burnin {
            if !y.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite value {y}")));
            }
            lo = lo.min(y);
            hi = hi.max(y);
        }
        if burnin.is_empty() {
            return Err(Error::Ingestion("empty burn-in".into()));
        }
        let mut span = hi - lo;
        if span <= 0.0 {
            // constant burn-in: fall back to a unit-scale span
            span = hi.abs().max(1.0);
        }
        Ok((lo - self.range_expand * span, hi + self.range_expand * span))
    }
}

/// One line of the report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub dataset: String,
    pub segment: String,
    pub method: Method,
    pub mode: Mode,
    pub n_total: usize,
    pub n_scored: u64,
    pub cpe_mean: f64,
    pub cpe_sum: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// A per-step prediction, recorded when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// 0-based index into the stream of the value being predicted.
    pub step: usize,
    pub method: Method,
    pub prediction: f64,
}

/// One predictor with uniform observe/predict, as used by the one-pass loop.
pub struct PredictorHandle {
    method: Method,
    state: OnePassState,
}

enum OnePassState {
    Sketch(CmsHistogram, HbpVariant),
    Shtarkov(ShtarkovState),
    Dpp(DppState),
}

impl PredictorHandle {
    /// One-pass handle. The sketch range `(m, big_m)` comes from
    /// [`ExperimentConfig::sketch_range`] over the burn-in.
    pub fn new_one_pass(
        method: Method,
        config: &ExperimentConfig,
        m: f64,
        big_m: f64,
    ) -> Result<Self> {
        config.validate()?;
        let state = match method {
            Method::HbpMean | Method::HbpMedian => {
                let seed = component_seed(config.seed, method.as_str());
                let part = IntervalPartition::new(m, big_m, config.k_intervals)?;
                let sketch = CmsHistogram::new(part, config.depth, config.width, seed)?;
                let variant = if method == Method::HbpMean {
                    HbpVariant::Mean
                } else {
                    HbpVariant::Median
                };
                OnePassState::Sketch(sketch, variant)
            }
            Method::Shtarkov => OnePassState::Shtarkov(ShtarkovState::new()),
            Method::Dpp => OnePassState::Dpp(DppState::new(config.dpp_mass, config.precision)?),
            Method::GppRb | Method::GppNorb => {
                return Err(Error::InvalidConfig(format!(
                    "{} cannot run one-pass; use representative mode",
                    method.as_str()
                )))
            }
        };
        Ok(PredictorHandle { method, state })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn observe(&mut self, y: f64) -> Result<()> {
        match &mut self.state {
            OnePassState::Sketch(s, _) => s.update(y),
            OnePassState::Shtarkov(s) => s.observe(y),
            OnePassState::Dpp(s) => s.observe(y),
        }
    }

    pub fn predict(&self) -> Result<f64> {
        match &self.state {
            OnePassState::Sketch(s, HbpVariant::Mean) => hbp::predict_mean(s),
            OnePassState::Sketch(s, HbpVariant::Median) => hbp::predict_median(s),
            OnePassState::Shtarkov(s) => s.predict(),
            OnePassState::Dpp(s) => s.predict(),
        }
    }
}

/// Labels attached to every row of a run.
#[derive(Debug, Clone, Copy)]
pub struct RunLabels<'a> {
    pub dataset: &'a str,
    pub segment: &'a str,
}

impl Default for RunLabels<'_> {
    fn default() -> Self {
        RunLabels {
            dataset: "-",
            segment: "full",
        }
    }
}

fn make_rows(
    labels: RunLabels,
    mode: Mode,
    n_total: usize,
    config: &ExperimentConfig,
    ledgers: &[(Method, CpeLedger)],
) -> Vec<ReportRow> {
    let hash = config.config_hash();
    ledgers
        .iter()
        .map(|(m, l)| ReportRow {
            dataset: labels.dataset.to_string(),
            segment: labels.segment.to_string(),
            method: *m,
            mode,
            n_total,
            n_scored: l.n(),
            cpe_mean: l.cpe_mean(),
            cpe_sum: l.cpe_sum(),
            seed: config.seed,
            config_hash: hash.clone(),
        })
        .collect()
}

/// Score the one-pass-capable methods over `stream`: burn-in builds state
/// unscored, then each step predicts before observing.
pub fn run_one_pass(
    stream: &[f64],
    methods: &[Method],
    config: &ExperimentConfig,
    labels: RunLabels,
) -> Result<Vec<ReportRow>> {
    run_one_pass_traced(stream, methods, config, labels, None)
}

/// One-pass run with an optional per-step prediction trace.
pub fn run_one_pass_traced(
    stream: &[f64],
    methods: &[Method],
    config: &ExperimentConfig,
    labels: RunLabels,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<Vec<ReportRow>> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::Ingestion("empty stream".into()));
    }
    for m in methods {
        if !m.one_pass_capable() {
            return Err(Error::InvalidConfig(format!(
                "{} cannot run one-pass",
                m.as_str()
            )));
        }
    }
    let b = config.burnin_len(stream.len())?;
    let (m, big_m) = config.sketch_range(&stream[..b])?;

    let mut handles: Vec<PredictorHandle> = methods
        .iter()
        .map(|&meth| PredictorHandle::new_one_pass(meth, config, m, big_m))
        .collect::<Result<_>>()?;
    let mut ledgers: Vec<(Method, CpeLedger)> =
        methods.iter().map(|&meth| (meth, CpeLedger::new())).collect();

    for &y in &stream[..b] {
        for h in &mut handles {
            h.observe(y)?;
        }
    }
    for (step, &y) in stream.iter().enumerate().skip(b) {
        for (h, (_, ledger)) in handles.iter().zip(ledgers.iter_mut()) {
            let pred = h.predict()?;
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceEntry {
                    step,
                    method: h.method,
                    prediction: pred,
                });
            }
            ledger.update(y, pred)?;
        }
        for h in &mut handles {
            h.observe(y)?;
        }
    }

    Ok(make_rows(labels, Mode::OnePass, stream.len(), config, &ledgers))
}

/// Rebuilds one method's prediction from a center snapshot each step.
///
/// The HBP sketch is built once (fixed hash rows) and cleared per snapshot;
/// the GP hyperparameter fit is redone per snapshot unless frozen.
pub struct RepPredictor {
    method: Method,
    rho: f64,
    delta2: f64,
    dpp_mass: f64,
    precision: u32,
    hyper_refit: bool,
    sketch: Option<CmsHistogram>,
    frozen: Option<RbHyper>,
}

impl RepPredictor {
    pub fn new(method: Method, config: &ExperimentConfig, m: f64, big_m: f64) -> Result<Self> {
        config.validate()?;
        let sketch = match method {
            Method::HbpMean | Method::HbpMedian => {
                let seed = component_seed(config.seed, method.as_str());
                let part = IntervalPartition::new(m, big_m, config.k_intervals)?;
                Some(CmsHistogram::new(part, config.depth, config.width, seed)?)
            }
            _ => None,
        };
        Ok(RepPredictor {
            method,
            rho: config.rho,
            delta2: config.delta2,
            dpp_mass: config.dpp_mass,
            precision: config.precision,
            hyper_refit: config.hyper_refit,
            sketch,
            frozen: None,
        })
    }

    /// Hyperparameters for the random-bias model, fit from the centers:
    /// `sigma^2 = S2`, moment-matched `(alpha, beta)` with a
    /// `(3, 2 S2)` fallback, and the closed-form `gamma` with a zero
    /// fallback.
    pub fn fit_rb_hyper(&self, centers: &[f64]) -> Result<RbHyper> {
        let n = centers.len();
        if n < 2 {
            return Ok(RbHyper {
                alpha: 3.0,
                beta: 2.0,
                gamma: 0.0,
                delta2: self.delta2,
                sigma2: 1.0,
            });
        }
        let k = build_ar1(n, self.rho)?;
        let (s2, s4) = whiten_moments(centers, &k)?;
        let (sigma2, alpha, beta) = if s2 > 0.0 {
            match estimate_alpha_beta(s2, s4, false) {
                Ok((a, b)) => (s2, a, b),
                Err(Error::DegenerateMoments) => (s2, 3.0, 2.0 * s2),
                Err(e) => return Err(e),
            }
        } else {
            (1.0, 3.0, 2.0)
        };
        let gamma = estimate_gamma(centers, &k, self.delta2).unwrap_or(0.0);
        Ok(RbHyper {
            alpha,
            beta,
            gamma,
            delta2: self.delta2,
            sigma2,
        })
    }

    /// Prediction from the snapshot alone.
    pub fn predict_from_centers(&mut self, centers: &[f64]) -> Result<f64> {
        if centers.is_empty() {
            return Err(Error::ColdStart);
        }
        match self.method {
            Method::HbpMean | Method::HbpMedian => {
                let sketch = self.sketch.as_mut().expect("sketch present for hbp");
                sketch.clear();
                for &c in centers {
                    sketch.update(c)?;
                }
                if self.method == Method::HbpMean {
                    hbp::predict_mean(sketch)
                } else {
                    hbp::predict_median(sketch)
                }
            }
            Method::Shtarkov => {
                Ok(centers.iter().sum::<f64>() / centers.len() as f64)
            }
            Method::Dpp => {
                let mut state = DppState::new(self.dpp_mass, self.precision)?;
                for &c in centers {
                    state.observe(c)?;
                }
                state.predict()
            }
            Method::GppNorb => gpp_mean(centers, self.rho),
            Method::GppRb => {
                let hyper = match (&self.frozen, self.hyper_refit) {
                    (Some(h), false) => *h,
                    _ => {
                        let h = self.fit_rb_hyper(centers)?;
                        if !self.hyper_refit {
                            self.frozen = Some(h);
                        }
                        h
                    }
                };
                rb_predict(centers, self.rho, &hyper)
            }
        }
    }
}

/// Representative-mode run: a shared streaming K-means summarizes the whole
/// history; every method re-predicts from the current center snapshot.
///
/// A method whose snapshot prediction fails numerically falls back to the
/// snapshot mean for that step.
pub fn run_representative(
    stream: &[f64],
    methods: &[Method],
    config: &ExperimentConfig,
    labels: RunLabels,
) -> Result<Vec<ReportRow>> {
    run_representative_traced(stream, methods, config, labels, None)
}

pub fn run_representative_traced(
    stream: &[f64],
    methods: &[Method],
    config: &ExperimentConfig,
    labels: RunLabels,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<Vec<ReportRow>> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::Ingestion("empty stream".into()));
    }
    let b = config.burnin_len(stream.len())?;
    let (m, big_m) = config.sketch_range(&stream[..b])?;

    let mut km = StreamKMeans::new(config.kmeans_k)?;
    let mut predictors: Vec<RepPredictor> = methods
        .iter()
        .map(|&meth| RepPredictor::new(meth, config, m, big_m))
        .collect::<Result<_>>()?;
    let mut ledgers: Vec<(Method, CpeLedger)> =
        methods.iter().map(|&meth| (meth, CpeLedger::new())).collect();

    for &y in &stream[..b] {
        km.observe(y)?;
    }
    for (step, &y) in stream.iter().enumerate().skip(b) {
        let centers = match config.center_order {
            CenterOrder::Slot => km.values(),
            CenterOrder::Sorted => km.values_sorted(),
        };
        let mean = centers.iter().sum::<f64>() / centers.len() as f64;
        for (p, (meth, ledger)) in predictors.iter_mut().zip(ledgers.iter_mut()) {
            let pred = match p.predict_from_centers(&centers) {
                Ok(v) if v.is_finite() => v,
                _ => mean,
            };
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceEntry {
                    step,
                    method: *meth,
                    prediction: pred,
                });
            }
            ledger.update(y, pred)?;
        }
        km.observe(y)?;
    }

    Ok(make_rows(
        labels,
        Mode::Representative,
        stream.len(),
        config,
        &ledgers,
    ))
}

/// Four contiguous segments of equal length (±1), earlier segments larger.
pub fn quarter_split(stream: &[f64]) -> Result<[&[f64]; 4]> {
    let n = stream.len();
    if n < 4 {
        return Err(Error::Ingestion(format!(
            "need at least 4 values to split into quarters, got {n}"
        )));
    }
    let base = n / 4;
    let rem = n % 4;
    let mut out: [&[f64]; 4] = [&[]; 4];
    let mut start = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let len = base + usize::from(i < rem);
        *slot = &stream[start..start + len];
        start += len;
    }
    Ok(out)
}
