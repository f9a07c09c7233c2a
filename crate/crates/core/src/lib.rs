//! Online unsupervised domain adaptation on the Grassmann manifold.
//!
//! A labelled source set is summarised by its PCA subspace. Unlabelled
//! target mini-batches arrive one at a time; each batch's subspace is folded
//! into a running mean subspace, and a geodesic flow kernel from the source
//! subspace to that mean maps the batch towards the source before the fixed
//! source classifier labels it. Optionally the previous kernel is applied to
//! the next batch before its subspace is taken.
//!
//! Modules, bottom up: [`manifold`] (subspaces, principal angles,
//! geodesics), [`icms`] (incremental and Karcher means), [`gfk`] (closed-form
//! kernel and its quadrature oracle), [`classify`], [`pipeline`],
//! [`datastream`] (CSV and synthetic streams) and [`verify`].
//!
//! Runnable examples live in `examples/`:
//!
//! - `geodesic_interpolation`: angles along a geodesic
//! - `incremental_mean`: running mean against the Karcher mean
//! - `flow_kernel`: closed form against quadrature, then applied to data
//! - `classifiers`: k-NN and linear SVM on waveform data
//! - `online_adaptation`: the five-variant ladder with and without drift
//! - `waveform_stream`: batch-by-batch processing with diagnostics
//! - `csv_stream`: loading and adapting over a CSV stream
//! - `verification`: the oracle suite, including a deliberate fault
//!
//! ```
//! use ouda::classify::ClassifierKind;
//! use ouda::datastream::{gen_rotating_drift, StreamSpec};
//! use ouda::pipeline::{run_stream, PipelineConfig, Variant};
//!
//! let spec = StreamSpec { batch_size: 40, batch_count: 10, source_size: 200, seed: 0 };
//! let data = gen_rotating_drift(&spec, 2, 10, 0.8)?;
//! let config = PipelineConfig::for_variant(Variant::GfkGmeanFb, 3, ClassifierKind::Knn);
//! let trace = run_stream(&data.source, &data.stream, &config)?;
//! assert_eq!(trace.per_batch.len(), 10);
//! # Ok::<(), ouda::Error>(())
//! ```

pub mod classify;
pub mod cli;
pub mod datastream;
pub mod error;
pub mod gfk;
pub mod icms;
pub mod linalg;
pub mod manifold;
pub mod pipeline;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
