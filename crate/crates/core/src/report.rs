//! JSON trace written by the command-line runs.
//!
//! Field order and variant order are fixed, so identical runs serialize to
//! identical bytes. Wall-clock fields are `null` unless timing was requested.

use serde::{Deserialize, Serialize};

use crate::pipeline::{AccuracyTrace, Diagnostics, StepTimings, StreamRun, Variant};

/// Echo of the settings that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub command: String,
    /// `csv` or a generator name.
    pub data: String,
    pub csv: Option<String>,
    pub dim: usize,
    pub classes: usize,
    pub k: usize,
    pub batch: usize,
    pub batches: usize,
    pub source_rows: usize,
    pub source_frac: Option<f64>,
    pub rotation: Option<f64>,
    pub neighbors: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub diagnostics: bool,
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepSeconds {
    pub pca: f64,
    pub mean: f64,
    pub gfk: f64,
    pub predict: f64,
}

impl From<StepTimings> for StepSeconds {
    fn from(t: StepTimings) -> Self {
        StepSeconds {
            pca: t.pca,
            mean: t.mean,
            gfk: t.gfk,
            predict: t.predict,
        }
    }
}

/// Per-variant summary of the diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    /// Largest source-to-target principal angle per batch (`null` if skipped).
    pub max_angle: Vec<Option<f64>>,
    pub near_orthogonal_batches: usize,
    pub near_orthogonal_mean_steps: usize,
}

impl DiagnosticsSummary {
    pub fn from_batches(diagnostics: &[Option<Diagnostics>]) -> Self {
        let max_angle = diagnostics
            .iter()
            .map(|d| {
                d.as_ref()
                    .map(|d| d.source_target_angles.iter().copied().fold(0.0, f64::max))
            })
            .collect();
        let flagged = |f: fn(&Diagnostics) -> bool| diagnostics.iter().flatten().filter(|d| f(d)).count();
        DiagnosticsSummary {
            max_angle,
            near_orthogonal_batches: flagged(|d| d.near_orthogonal),
            near_orthogonal_mean_steps: flagged(|d| d.mean_step_near_orthogonal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub classifier: String,
    pub per_batch: Vec<Option<f64>>,
    pub running: Vec<Option<f64>>,
    #[serde(rename = "final")]
    pub final_accuracy: Option<f64>,
    pub seconds_total: Option<f64>,
    pub seconds_per_step: Option<StepSeconds>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<DiagnosticsSummary>,
}

impl VariantReport {
    pub fn new(variant: Variant, classifier: &str, run: &StreamRun, timings: bool) -> Self {
        let trace: &AccuracyTrace = &run.trace;
        let (seconds_total, seconds_per_step) = if timings {
            let steps = StepSeconds::from(trace.step_totals());
            (Some(steps.pca + steps.mean + steps.gfk + steps.predict), Some(steps))
        } else {
            (None, None)
        };
        let diagnostics = run
            .diagnostics
            .iter()
            .any(Option::is_some)
            .then(|| DiagnosticsSummary::from_batches(&run.diagnostics));
        VariantReport {
            name: variant.name().to_string(),
            classifier: classifier.to_string(),
            per_batch: trace.per_batch.clone(),
            running: trace.running.clone(),
            final_accuracy: trace.final_accuracy(),
            seconds_total,
            seconds_per_step,
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub variants: Vec<VariantReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are always serializable");
        s.push('\n');
        s
    }
}
