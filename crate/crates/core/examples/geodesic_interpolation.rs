//! Walk the geodesic between two random planes in R^8 and watch the
//! principal angles to each endpoint change linearly with t.

use ouda::manifold::{evaluate, geodesic, principal_angles, random_subspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ouda::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_subspace(&mut rng, 8, 2)?;
    let b = random_subspace(&mut rng, 8, 2)?;
    let flow = geodesic(&a, &b)?;
    println!(
        "principal angles a->b: {:.4?}  (length {:.4})",
        principal_angles(&a, &b)?,
        flow.length()
    );

    println!("{:>5}  {:>18}  {:>18}", "t", "angles to a", "angles to b");
    for i in 0..=8 {
        let t = i as f64 / 8.0;
        let p = evaluate(&flow, t)?;
        println!(
            "{t:>5.3}  {:>18}  {:>18}",
            format!("{:.4?}", principal_angles(&p, &a)?),
            format!("{:.4?}", principal_angles(&p, &b)?)
        );
    }
    Ok(())
}
