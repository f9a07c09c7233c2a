//! Step through a waveform stream batch by batch, printing the principal
//! angles between the source subspace and each adaptation target.

use ouda::classify::{accuracy, ClassifierKind};
use ouda::datastream::{gen_waveform, StreamSpec, WaveformVariant};
use ouda::pipeline::{PipelineConfig, PipelineState, Variant};

fn main() -> ouda::Result<()> {
    let spec = StreamSpec {
        batch_size: 60,
        batch_count: 12,
        source_size: 800,
        seed: 4,
    };
    let data = gen_waveform(&spec, WaveformVariant::W40)?;
    let config = PipelineConfig::for_variant(Variant::GfkGmeanFb, 4, ClassifierKind::LinearSvm).with_diagnostics(true);
    let mut state = PipelineState::new(&data.source, config)?;

    for (n, batch) in data.stream.iter().enumerate() {
        let out = state.process_batch(batch)?;
        let acc = accuracy(&out.predictions, batch.labels.as_deref().unwrap_or_default());
        let angles = out.diagnostics.map(|d| d.source_target_angles).unwrap_or_default();
        println!("batch {:>2}  accuracy {acc:.3}  angles {angles:.3?}", n + 1);
    }
    Ok(())
}
