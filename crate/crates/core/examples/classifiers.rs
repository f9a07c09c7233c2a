//! Train 1-NN, 5-NN and a linear SVM on waveform data and score them on
//! later batches of the same stream.

use ouda::classify::{accuracy, train, ClassifierKind, ClassifierParams};
use ouda::datastream::{gen_waveform, StreamSpec, WaveformVariant};

fn main() -> ouda::Result<()> {
    let spec = StreamSpec {
        batch_size: 200,
        batch_count: 5,
        source_size: 600,
        seed: 0,
    };
    let data = gen_waveform(&spec, WaveformVariant::W21)?;
    let setups = [
        ("1-nn", ClassifierKind::Knn, ClassifierParams::default()),
        (
            "5-nn",
            ClassifierKind::Knn,
            ClassifierParams {
                neighbors: 5,
                ..ClassifierParams::default()
            },
        ),
        ("svm", ClassifierKind::LinearSvm, ClassifierParams::default()),
    ];
    for (name, kind, params) in setups {
        let model = train(&data.source, kind, &params)?;
        let scores: Vec<String> = data
            .stream
            .iter()
            .map(|b| {
                let predicted = model.predict(&b.x)?;
                Ok(format!(
                    "{:.3}",
                    accuracy(&predicted, b.labels.as_deref().unwrap_or_default())
                ))
            })
            .collect::<ouda::Result<_>>()?;
        println!("{name:<5} {}", scores.join("  "));
    }
    Ok(())
}
