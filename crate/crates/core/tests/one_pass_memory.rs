//! One-pass memory bound: scoring never holds live memory proportional to
//! the stream length beyond the fixed sketch and ledger structures.
//!
//! A counting global allocator tracks live bytes; the high-water mark of
//! the scoring loop must not grow with n.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicIsize, AtomicUsize, Ordering};

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use streampred::harness::{CpeLedger, ExperimentConfig, Method, PredictorHandle};

struct CountingAlloc;

static LIVE: AtomicIsize = AtomicIsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let live = LIVE.fetch_add(layout.size() as isize, Ordering::SeqCst)
                + layout.size() as isize;
            PEAK.fetch_max(live.max(0) as usize, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, p: *mut u8, layout: Layout) {
        LIVE.fetch_sub(layout.size() as isize, Ordering::SeqCst);
        System.dealloc(p, layout);
    }
}

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

/// Live bytes at entry plus the scoring loop's high-water mark above it.
fn scoring_headroom(n: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let stream: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
    let cfg = ExperimentConfig::default();
    let b = cfg.burnin_len(n).unwrap();
    let (m, big_m) = cfg.sketch_range(&stream[..b]).unwrap();

    let mut handles: Vec<PredictorHandle> = [Method::HbpMean, Method::HbpMedian]
        .iter()
        .map(|&meth| PredictorHandle::new_one_pass(meth, &cfg, m, big_m).unwrap())
        .collect();
    let mut ledgers = [CpeLedger::new(), CpeLedger::new()];
    for &y in &stream[..b] {
        for h in &mut handles {
            h.observe(y).unwrap();
        }
    }

    // measure only the scoring loop
    let base = LIVE.load(Ordering::SeqCst).max(0) as usize;
    PEAK.store(base, Ordering::SeqCst);
    for &y in &stream[b..] {
        for (h, l) in handles.iter().zip(ledgers.iter_mut()) {
            l.update(y, h.predict().unwrap()).unwrap();
        }
        for h in &mut handles {
            h.observe(y).unwrap();
        }
    }
    PEAK.load(Ordering::SeqCst) - base
}

#[test]
fn hbp_scoring_memory_does_not_grow_with_n() {
    let small = scoring_headroom(2_000);
    let large = scoring_headroom(40_000);
    // headroom covers the per-call scratch of the median (support vector,
    // at most K entries); it must not scale with the 20x larger stream
    assert!(
        large <= small + 16 * 1024,
        "scoring headroom grew with n: {small} bytes at n=2e3, {large} bytes at n=4e4"
    );
    assert!(
        large < 1 << 20,
        "scoring headroom unexpectedly large: {large} bytes"
    );
}
