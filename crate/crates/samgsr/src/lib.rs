//! Pathway-based feature selection by gene-set reduction, with an optional
//! connectivity-weighted statistic.
//!
//! The pipeline screens gene sets for differential expression with a
//! permutation-tested sum of squared moderated per-gene statistics, then
//! reduces each significant set to a core prefix of its magnitude ordering
//! and unions the cores into a gene signature. The weighted variant
//! multiplies each gene's statistic by a normalized connectivity weight
//! (`1 + degree` in a protein-interaction graph), favoring hub genes with
//! subtle expression changes.
//!
//! The numeric core is generic over the scalar type ([`num::Real`], i.e.
//! `f32` or `f64`); the aliases below fix the common `f64` instantiation.

pub mod classify;
pub mod connectivity;
pub mod data;
pub mod error;
pub mod io;
pub mod metrics;
pub mod num;
pub mod permutation;
pub mod reduction;
pub mod report;
pub mod sam;
pub mod sim;

pub use error::{Error, Result};
pub use num::Real;

/// Genes-by-samples expression matrix over `f64`.
pub type Matrix = data::ExpressionMatrix<f64>;
/// Labeled expression dataset over `f64`.
pub type Dataset = data::ExpressionDataset<f64>;
/// Per-gene connectivity weights over `f64`.
pub type Weights = connectivity::WeightVector<f64>;
/// Per-gene moderated statistics over `f64`.
pub type Statistics = sam::SamStatistics<f64>;
/// Selection-run configuration over `f64`.
pub type Config = reduction::SamgsrConfig<f64>;
/// Selection-run output over `f64`.
pub type Outcome = reduction::SamgsrOutcome<f64>;
/// Linear classifier over `f64`.
pub type Classifier = classify::LinearClassifier<f64>;
/// Class-probability rows over `f64`.
pub type Posteriors = classify::PosteriorMatrix<f64>;
/// Threshold-tuning output over `f64`.
pub type Tuning = classify::TuningResult<f64>;
/// Metric bundle over `f64`.
pub type Evaluation = metrics::EvalReport<f64>;
/// Simulation scenario over `f64`.
pub type Simulation = sim::SimConfig<f64>;
