//! Write a small drifting stream to CSV, read it back and adapt over it.
//! Pass a path to use your own file (features then an integer label).

use std::fmt::Write as _;

use ouda::classify::ClassifierKind;
use ouda::datastream::{gen_rotating_drift, load_csv, CsvSchema, StreamSpec};
use ouda::pipeline::{run_stream, PipelineConfig, Variant};

fn main() -> ouda::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let spec = StreamSpec {
                batch_size: 40,
                batch_count: 20,
                source_size: 200,
                seed: 2,
            };
            let data = gen_rotating_drift(&spec, 3, 8, 1.0)?;
            let mut text = String::new();
            let mut emit = |x: &ouda::manifold::Matrix, y: &[usize]| {
                for (row, label) in x.row_iter().zip(y) {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
                    writeln!(text, "{},{label}", cells.join(",")).unwrap();
                }
            };
            emit(data.source.x(), data.source.y());
            for b in &data.stream {
                emit(&b.x, b.labels.as_deref().unwrap_or_default());
            }
            let path = std::env::temp_dir().join("ouda_csv_stream.csv");
            std::fs::write(&path, text).map_err(|source| ouda::Error::Io {
                path: path.clone(),
                source,
            })?;
            path
        }
    };

    let schema = CsvSchema {
        dim: None,
        source_fraction: 0.2,
        batch_size: 40,
        has_header: false,
    };
    let data = load_csv(&path, &schema)?;
    println!(
        "{}: d={} source {} rows, {} batches of {}",
        path.display(),
        data.dim(),
        data.source.len(),
        data.stream.len(),
        schema.batch_size
    );
    for variant in [Variant::Pca, Variant::GfkGmean, Variant::GfkGmeanFb] {
        let config = PipelineConfig::for_variant(variant, 2, ClassifierKind::Knn);
        let trace = run_stream(&data.source, &data.stream, &config)?;
        println!(
            "{:<14} final {:.4}",
            variant.name(),
            trace.final_accuracy().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
