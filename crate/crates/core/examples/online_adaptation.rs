//! The five-variant ladder on a slowly rotating Gaussian stream, with and
//! without drift. Pass a rotation in radians to override pi/3.

use std::f64::consts::FRAC_PI_3;

use ouda::classify::ClassifierKind;
use ouda::cli::DEFAULT_SOURCE_SIZE;
use ouda::datastream::{gen_rotating_drift, StreamSpec};
use ouda::pipeline::{run_stream, PipelineConfig, Variant};

fn main() -> ouda::Result<()> {
    let rotation = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(FRAC_PI_3);
    let spec = StreamSpec {
        batch_size: 50,
        batch_count: 60,
        source_size: DEFAULT_SOURCE_SIZE,
        seed: 0,
    };

    println!("{:<14} {:>10} {:>10}", "variant", "drift", "no drift");
    let drifting = gen_rotating_drift(&spec, 2, 10, rotation)?;
    let still = gen_rotating_drift(&spec, 2, 10, 0.0)?;
    for variant in Variant::ALL {
        let config = PipelineConfig::for_variant(variant, 3, ClassifierKind::Knn);
        let a = run_stream(&drifting.source, &drifting.stream, &config)?;
        let b = run_stream(&still.source, &still.stream, &config)?;
        println!(
            "{:<14} {:>10.4} {:>10.4}",
            variant.name(),
            a.final_accuracy().unwrap_or(f64::NAN),
            b.final_accuracy().unwrap_or(f64::NAN)
        );
    }

    // running accuracy every ten batches for the full method
    let config = PipelineConfig::for_variant(Variant::GfkGmeanFb, 3, ClassifierKind::Knn);
    let trace = run_stream(&drifting.source, &drifting.stream, &config)?;
    for (n, a) in trace.running.iter().enumerate().filter(|(n, _)| (n + 1) % 10 == 0) {
        println!("A({}) = {:.4}", n + 1, a.unwrap_or(f64::NAN));
    }
    Ok(())
}
