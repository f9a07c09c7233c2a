//! Build the geodesic flow kernel between two subspaces, check it against
//! Simpson quadrature, and apply it to a few target rows.

use nalgebra::DMatrix;
use ouda::gfk::{apply_transform, flow_integrals, gfk_kernel, quadrature_kernel};
use ouda::manifold::{complement, max_abs, principal_angles, random_subspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> ouda::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (d, k) = (10, 3);
    let ps = random_subspace(&mut rng, d, k)?;
    let pt = random_subspace(&mut rng, d, k)?;
    let rs = complement(&ps);

    for theta in principal_angles(&ps, &pt)? {
        let (cc, cs, ss) = flow_integrals(theta);
        println!("theta {theta:.4}: int cos^2 {cc:.4}  int cos*sin {cs:.4}  int sin^2 {ss:.4}");
    }

    let g = gfk_kernel(&ps, &rs, &pt)?;
    for nodes in [10, 100, 1000, 10_000] {
        let q = quadrature_kernel(&ps, &rs, &pt, nodes)?;
        println!(
            "simpson with {nodes:>5} nodes: max |G - Q| = {:.2e}",
            max_abs(&(g.matrix() - q.matrix()))
        );
    }
    let spectrum = g.spectrum();
    println!(
        "spectrum in [{:.4}, {:.4}], asymmetry {:.1e}",
        spectrum.iter().copied().fold(f64::MAX, f64::min),
        spectrum.iter().copied().fold(f64::MIN, f64::max),
        g.asymmetry()
    );

    let x = DMatrix::from_fn(4, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let adapted = apply_transform(&x, &g)?;
    for (before, after) in x.row_iter().zip(adapted.row_iter()) {
        println!("row norm {:.3} -> {:.3}", before.norm(), after.norm());
    }
    Ok(())
}
