use std::f64::consts::FRAC_PI_2;

use ouda::classify::{accuracy, train, ClassifierKind, ClassifierParams};
use ouda::cli::DEFAULT_SOURCE_SIZE;
use ouda::datastream::{gen_rotating_drift, StreamSpec};
use ouda::manifold::{pca_subspace, principal_angles};

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    for (rank, &i) in idx.iter().enumerate() {
        r[i] = rank as f64;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - mean) * (y - mean)).sum();
    let var: f64 = ra.iter().map(|x| (x - mean) * (x - mean)).sum();
    cov / var
}

#[test]
fn quarter_turn_hurts_the_source_classifier() {
    let spec = StreamSpec {
        batch_size: 50,
        batch_count: 60,
        source_size: DEFAULT_SOURCE_SIZE,
        seed: 0,
    };
    let bundle = gen_rotating_drift(&spec, 2, 10, FRAC_PI_2).unwrap();
    let model = train(&bundle.source, ClassifierKind::Knn, &ClassifierParams::default()).unwrap();
    let score = |i: usize| {
        let b = &bundle.stream[i];
        accuracy(&model.predict(&b.x).unwrap(), b.labels.as_ref().unwrap())
    };
    let (first, last) = (score(0), score(59));
    assert!(last < first, "first {first}, last {last}");
}

#[test]
fn source_to_batch_angle_grows_with_time() {
    for (seed, batch_size) in [(0, 100), (1, 100), (2, 200)] {
        let spec = StreamSpec {
            batch_size,
            batch_count: 30,
            source_size: DEFAULT_SOURCE_SIZE,
            seed,
        };
        let bundle = gen_rotating_drift(&spec, 2, 10, FRAC_PI_2).unwrap();
        let ps = pca_subspace(bundle.source.x(), 3).unwrap();
        let largest: Vec<f64> = bundle
            .stream
            .iter()
            .map(|b| {
                let pt = pca_subspace(&b.x, 3).unwrap();
                principal_angles(&ps, &pt).unwrap().into_iter().fold(0.0, f64::max)
            })
            .collect();
        let time: Vec<f64> = (0..largest.len()).map(|i| i as f64).collect();
        let rho = spearman(&time, &largest);
        assert!(rho > 0.9, "seed {seed}, N_T {batch_size}: spearman {rho}");
    }
}
