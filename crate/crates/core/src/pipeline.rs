//! The online adaptation loop.
//!
//! For each arriving mini-batch:
//!
//! 1. feedback: multiply the batch by the previous kernel `G_{n-1}` (if enabled
//!    and one exists),
//! 2. subspace: PCA of the preprocessed batch,
//! 3. mean: fold the batch subspace into the running mean subspace (if enabled),
//! 4. adaptation: geodesic flow kernel from the source subspace to the
//!    adaptation target, applied to the preprocessed batch (if enabled),
//! 5. prediction with the classifier trained once on the raw source data.
//!
//! The state carries only the source model, the running mean and the last
//! kernel, so its size does not grow with the number of batches.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::{accuracy, train, ClassifierKind, ClassifierModel, ClassifierParams, LabeledSet};
use crate::error::{Error, Result};
use crate::gfk::{apply_transform, gfk_kernel, TransformKernel};
use crate::icms::{init_mean, MeanSubspaceState};
use crate::manifold::{complement, pca_subspace, principal_angles, Matrix, Subspace};

/// Angles above this are flagged as nearly orthogonal in diagnostics.
pub const NEAR_ORTHOGONAL: f64 = FRAC_PI_2 - 0.01;

/// The ablation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Pca,
    Gfk,
    GfkFb,
    GfkGmean,
    GfkGmeanFb,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Pca,
        Variant::Gfk,
        Variant::GfkFb,
        Variant::GfkGmean,
        Variant::GfkGmeanFb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Pca => "pca",
            Variant::Gfk => "gfk",
            Variant::GfkFb => "gfk_fb",
            Variant::GfkGmean => "gfk_gmean",
            Variant::GfkGmeanFb => "gfk_gmean_fb",
        }
    }

    /// `(use_gfk, use_gmean, use_feedback)`
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            Variant::Pca => (false, false, false),
            Variant::Gfk => (true, false, false),
            Variant::GfkFb => (true, false, true),
            Variant::GfkGmean => (true, true, false),
            Variant::GfkGmeanFb => (true, true, true),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// Accepts the canonical names, the same names without the `gfk_` prefix
    /// (`gmean_fb`), and `+`-joined forms such as `PCA+GFK+Gmean+FB`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['+', '-'], "_");
        let norm = match norm.strip_prefix("pca_") {
            Some(rest) => rest.to_string(),
            None => norm,
        };
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == norm || v.name().strip_prefix("gfk_") == Some(norm.as_str()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub use_gfk: bool,
    pub use_gmean: bool,
    pub use_feedback: bool,
    pub classifier: ClassifierKind,
    pub params: ClassifierParams,
    pub diagnostics: bool,
}

impl PipelineConfig {
    pub fn for_variant(variant: Variant, k: usize, classifier: ClassifierKind) -> Self {
        let (use_gfk, use_gmean, use_feedback) = variant.flags();
        PipelineConfig {
            k,
            use_gfk,
            use_gmean,
            use_feedback,
            classifier,
            params: ClassifierParams::default(),
            diagnostics: false,
        }
    }

    pub fn with_params(mut self, params: ClassifierParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.use_feedback && !self.use_gfk {
            return Err(Error::InvalidConfig("feedback requires the GFK step".into()));
        }
        if self.k == 0 || 2 * self.k >= d {
            return Err(Error::DimensionViolation { k: self.k, d });
        }
        Ok(())
    }
}

/// One unlabelled target batch; labels are only used for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniBatch {
    pub x: Matrix,
    pub labels: Option<Vec<usize>>,
}

impl MiniBatch {
    pub fn new(x: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(Error::InsufficientData(format!(
                "a mini-batch needs at least 2 rows, got {}",
                x.nrows()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != x.nrows() {
                return Err(Error::mismatch(format!("{} labels", x.nrows()), l.len()));
            }
        }
        Ok(MiniBatch { x, labels })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }
}

/// Wall-clock seconds spent in each step of one batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTimings {
    pub pca: f64,
    pub mean: f64,
    pub gfk: f64,
    pub predict: f64,
}

impl StepTimings {
    pub fn total(&self) -> f64 {
        self.pca + self.mean + self.gfk + self.predict
    }

    fn accumulate(&mut self, other: &StepTimings) {
        self.pca += other.pca;
        self.mean += other.mean;
        self.gfk += other.gfk;
        self.predict += other.predict;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Principal angles between the source subspace and the adaptation target.
    pub source_target_angles: Vec<f64>,
    pub near_orthogonal: bool,
    /// Largest angle between the previous mean and the batch subspace.
    pub mean_step_max_angle: Option<f64>,
    pub mean_step_near_orthogonal: bool,
}

/// Everything produced while processing one batch.
#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub predictions: Vec<usize>,
    /// The batch after feedback, before adaptation.
    pub preprocessed: Matrix,
    pub batch_subspace: Subspace,
    pub adaptation_target: Subspace,
    pub kernel: Option<TransformKernel>,
    pub diagnostics: Option<Diagnostics>,
    pub timings: StepTimings,
}

/// Source model plus the constant-size running state of one stream.
#[derive(Debug, Clone)]
pub struct PipelineState {
    config: PipelineConfig,
    source_subspace: Subspace,
    source_complement: Subspace,
    classifier: ClassifierModel,
    mean: Option<MeanSubspaceState>,
    last_kernel: Option<TransformKernel>,
    batches: usize,
}

pub fn init_pipeline(source: &LabeledSet, config: PipelineConfig) -> Result<PipelineState> {
    PipelineState::new(source, config)
}

impl PipelineState {
    pub fn new(source: &LabeledSet, config: PipelineConfig) -> Result<Self> {
        config.validate(source.dim())?;
        let source_subspace = pca_subspace(source.x(), config.k)?;
        let source_complement = complement(&source_subspace);
        let classifier = train(source, config.classifier, &config.params)?;
        Ok(PipelineState {
            config,
            source_subspace,
            source_complement,
            classifier,
            mean: None,
            last_kernel: None,
            batches: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn source_subspace(&self) -> &Subspace {
        &self.source_subspace
    }

    pub fn classifier(&self) -> &ClassifierModel {
        &self.classifier
    }

    pub fn mean(&self) -> Option<&MeanSubspaceState> {
        self.mean.as_ref()
    }

    pub fn last_kernel(&self) -> Option<&TransformKernel> {
        self.last_kernel.as_ref()
    }

    /// Number of batches processed successfully.
    pub fn batches(&self) -> usize {
        self.batches
    }

    /// Runs the four steps on `batch`. On error the state is left untouched.
    pub fn process_batch(&mut self, batch: &MiniBatch) -> Result<BatchOutcome> {
        let d = self.source_subspace.ambient_dim();
        if batch.x.ncols() != d {
            return Err(Error::mismatch(
                format!("{d} columns"),
                format!("{} columns", batch.x.ncols()),
            ));
        }
        let cfg = &self.config;
        let mut timings = StepTimings::default();

        let clock = Instant::now();
        let preprocessed = match (&self.last_kernel, cfg.use_feedback) {
            (Some(g), true) => apply_transform(&batch.x, g)?,
            _ => batch.x.clone(),
        };
        let batch_subspace = pca_subspace(&preprocessed, cfg.k)?;
        timings.pca = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let mut mean_step_max_angle = None;
        let mean = if cfg.use_gmean {
            Some(match &self.mean {
                None => init_mean(&batch_subspace),
                Some(state) => {
                    if cfg.diagnostics {
                        let angles = principal_angles(state.mean(), &batch_subspace)?;
                        mean_step_max_angle = angles.last().copied();
                    }
                    state.update(&batch_subspace)?
                }
            })
        } else {
            None
        };
        let target = mean.as_ref().map_or(&batch_subspace, |m| m.mean()).clone();
        timings.mean = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let kernel = if cfg.use_gfk {
            Some(gfk_kernel(&self.source_subspace, &self.source_complement, &target)?)
        } else {
            None
        };
        let adapted = match &kernel {
            Some(g) => apply_transform(&preprocessed, g)?,
            None => preprocessed.clone(),
        };
        timings.gfk = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let predictions = self.classifier.predict(&adapted)?;
        timings.predict = clock.elapsed().as_secs_f64();

        let diagnostics = if cfg.diagnostics {
            let angles = principal_angles(&self.source_subspace, &target)?;
            let max = angles.last().copied().unwrap_or(0.0);
            Some(Diagnostics {
                near_orthogonal: max > NEAR_ORTHOGONAL,
                source_target_angles: angles,
                mean_step_near_orthogonal: mean_step_max_angle.is_some_and(|a| a > NEAR_ORTHOGONAL),
                mean_step_max_angle,
            })
        } else {
            None
        };

        if cfg.use_gmean {
            self.mean = mean;
        }
        if cfg.use_feedback {
            self.last_kernel = kernel.clone();
        }
        self.batches += 1;

        Ok(BatchOutcome {
            predictions,
            preprocessed,
            batch_subspace,
            adaptation_target: target,
            kernel,
            diagnostics,
            timings,
        })
    }
}

/// Per-batch accuracies `a(n)` and running means `A(n)`.
///
/// Skipped batches are `None` in `per_batch` and do not count towards the
/// running denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTrace {
    pub per_batch: Vec<Option<f64>>,
    pub running: Vec<Option<f64>>,
    pub timings: Vec<Option<StepTimings>>,
}

impl AccuracyTrace {
    pub fn from_accuracies(per_batch: Vec<Option<f64>>) -> Self {
        let mut sum = 0.0;
        let mut seen = 0usize;
        let running = per_batch
            .iter()
            .map(|a| {
                if let Some(a) = a {
                    sum += a;
                    seen += 1;
                }
                (seen > 0).then(|| sum / seen as f64)
            })
            .collect();
        let timings = vec![None; per_batch.len()];
        AccuracyTrace {
            per_batch,
            running,
            timings,
        }
    }

    /// `A(B)`, the last defined running accuracy.
    pub fn final_accuracy(&self) -> Option<f64> {
        self.running.iter().rev().find_map(|a| *a)
    }

    /// Summed step timings over processed batches.
    pub fn step_totals(&self) -> StepTimings {
        let mut total = StepTimings::default();
        for t in self.timings.iter().flatten() {
            total.accumulate(t);
        }
        total
    }

    pub fn skipped(&self) -> usize {
        self.per_batch.iter().filter(|a| a.is_none()).count()
    }
}

/// Full record of a stream run.
#[derive(Debug, Clone)]
pub struct StreamRun {
    pub trace: AccuracyTrace,
    /// `None` for skipped batches.
    pub predictions: Vec<Option<Vec<usize>>>,
    pub diagnostics: Vec<Option<Diagnostics>>,
}

/// Processes `stream` in order and scores each batch against its labels.
pub fn run_stream(source: &LabeledSet, stream: &[MiniBatch], config: &PipelineConfig) -> Result<AccuracyTrace> {
    Ok(run_stream_detailed(source, stream, config)?.trace)
}

pub fn run_stream_detailed(source: &LabeledSet, stream: &[MiniBatch], config: &PipelineConfig) -> Result<StreamRun> {
    let mut state = PipelineState::new(source, config.clone())?;
    let mut per_batch = Vec::with_capacity(stream.len());
    let mut timings = Vec::with_capacity(stream.len());
    let mut predictions = Vec::with_capacity(stream.len());
    let mut diagnostics = Vec::with_capacity(stream.len());
    for (n, batch) in stream.iter().enumerate() {
        let labels = batch
            .labels
            .as_ref()
            .ok_or_else(|| Error::InsufficientData(format!("batch {} has no labels to score", n + 1)))?;
        match state.process_batch(batch) {
            Ok(out) => {
                per_batch.push(Some(accuracy(&out.predictions, labels)));
                timings.push(Some(out.timings));
                predictions.push(Some(out.predictions));
                diagnostics.push(out.diagnostics);
            }
            Err(Error::RankDeficient(_)) => {
                per_batch.push(None);
                timings.push(None);
                predictions.push(None);
                diagnostics.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let mut trace = AccuracyTrace::from_accuracies(per_batch);
    trace.timings = timings;
    Ok(StreamRun {
        trace,
        predictions,
        diagnostics,
    })
}
