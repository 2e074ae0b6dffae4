//! Streaming point prediction for bounded real-valued data streams with no
//! assumed generating model.
//!
//! The pieces: a Count-Min sketch over an interval partition with an
//! estimated empirical distribution function ([`sketch`]), hash-based
//! point predictors over it ([`hbp`]), Gaussian-process predictors with an
//! optional random additive bias ([`gp`]), Dirichlet-process and
//! running-mean baselines ([`baselines`]), streaming K-means for
//! representative subsets ([`kmeans`]), and a prequential evaluation
//! harness scoring cumulative L1 error ([`harness`]).

pub mod baselines;
pub mod error;
pub mod gp;
pub mod harness;
pub mod hbp;
pub mod io;
pub mod kmeans;
pub mod linalg;
pub mod sketch;

pub use error::{Error, Result};
