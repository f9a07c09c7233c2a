//! Feed a sequence of noisy subspaces to the incremental mean and compare it
//! with the batch Karcher mean of everything seen so far.

use nalgebra::DMatrix;
use ouda::icms::{init_mean, karcher_mean, KarcherOptions};
use ouda::manifold::{exp_map, geodesic_distance, random_subspace, Subspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn jitter(rng: &mut ChaCha8Rng, center: &Subspace, radius: f64) -> ouda::Result<Subspace> {
    let p = center.basis();
    let g = DMatrix::from_fn(p.nrows(), p.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let h = &g - p * (p.transpose() * &g);
    exp_map(center, &h.scale(radius / h.norm()))
}

fn main() -> ouda::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let center = random_subspace(&mut rng, 12, 3)?;
    let opts = KarcherOptions::default();

    let mut seen = vec![jitter(&mut rng, &center, 0.4)?];
    let mut state = init_mean(&seen[0]);
    println!(
        "{:>3}  {:>12}  {:>12}  {:>14}",
        "n", "to center", "moved", "icms-karcher"
    );
    for n in 2..=20 {
        let radius = 0.4 * rng.random::<f64>();
        let p = jitter(&mut rng, &center, radius)?;
        let next = state.update(&p)?;
        let moved = geodesic_distance(state.mean(), next.mean())?;
        state = next;
        seen.push(p);
        let karcher = karcher_mean(&seen, opts.tol, opts.max_iter)?;
        println!(
            "{n:>3}  {:>12.5}  {moved:>12.5}  {:>14.3e}",
            geodesic_distance(state.mean(), &center)?,
            geodesic_distance(state.mean(), &karcher)?
        );
    }
    Ok(())
}
