//! Oracle suite: checks the closed-form pieces against independent
//! constructions on seeded random instances.
//!
//! Each property runs a number of instances, records the worst observed error
//! and the instance seed that produced it, and passes when that error is below
//! the property's tolerance.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::gfk::{gfk_kernel_with_cross_sign, quadrature_kernel};
use crate::icms::{init_mean, karcher_mean, KarcherOptions, MeanSubspaceState};
use crate::manifold::{
    complement, exp_map, geodesic, geodesic_distance, max_abs, orthonormality_error, principal_angles, random_subspace,
    Matrix, Subspace,
};

/// Simpson intervals used for the quadrature oracle.
pub const QUADRATURE_NODES: usize = 10_000;

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides every property's default instance count.
    pub instances: Option<usize>,
    /// Flip the sign of the GFK cross block, to prove the harness notices.
    pub inject_fault: bool,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub property: &'static str,
    pub instances: usize,
    pub worst: f64,
    pub tolerance: f64,
    /// Seed of the instance with the largest error.
    pub worst_seed: u64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    /// Largest ICMS-to-Karcher distance over the small-ball sets.
    pub karcher_deviation: f64,
    /// Smallest diameter among those sets.
    pub min_set_diameter: f64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<28} {:>9} {:>12} {:>10} {:>6}  status",
            "property", "instances", "worst", "tolerance", "seed"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<28} {:>9} {:>12.3e} {:>10.1e} {:>6}  {}",
                c.property,
                c.instances,
                c.worst,
                c.tolerance,
                c.worst_seed,
                if c.passed { "pass" } else { "FAIL" }
            )?;
        }
        write!(
            f,
            "icms vs karcher deviation: {:.3e} rad (smallest set diameter {:.3e})",
            self.karcher_deviation, self.min_set_diameter
        )
    }
}

struct Tracker {
    property: &'static str,
    tolerance: f64,
    instances: usize,
    worst: f64,
    worst_seed: u64,
}

impl Tracker {
    fn new(property: &'static str, tolerance: f64) -> Self {
        Tracker {
            property,
            tolerance,
            instances: 0,
            worst: 0.0,
            worst_seed: 0,
        }
    }

    fn record(&mut self, seed: u64, error: f64) {
        self.instances += 1;
        // NaN counts as the worst possible outcome
        let error = if error.is_nan() { f64::INFINITY } else { error };
        if error > self.worst {
            self.worst = error;
            self.worst_seed = seed;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            property: self.property,
            instances: self.instances,
            worst: self.worst,
            tolerance: self.tolerance,
            worst_seed: self.worst_seed,
            passed: self.worst < self.tolerance,
        }
    }
}

fn max_angle(a: &Subspace, b: &Subspace) -> Result<f64> {
    Ok(principal_angles(a, b)?.into_iter().fold(0.0, f64::max))
}

/// A subspace at geodesic distance `radius` from `center` in a random direction.
fn nearby<R: Rng>(rng: &mut R, center: &Subspace, radius: f64) -> Result<Subspace> {
    let (d, k) = (center.ambient_dim(), center.sub_dim());
    let z = Matrix::from_fn(d, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut h = &z - center.basis() * (center.basis().transpose() * &z);
    let norm = h.norm();
    h *= radius / norm;
    exp_map(center, &h)
}

const GEODESIC_SHAPES: [(usize, usize); 9] = [
    (10, 2),
    (10, 3),
    (20, 2),
    (20, 3),
    (20, 5),
    (40, 2),
    (40, 3),
    (40, 5),
    (10, 4),
];

fn geodesic_checks(opts: &VerifyOptions, out: &mut Vec<CheckResult>) -> Result<()> {
    let n = opts.instances.unwrap_or(200);
    let mut ortho = Tracker::new("geodesic_orthonormality", 1e-8);
    let mut ends = Tracker::new("geodesic_endpoints", 1e-7);
    for i in 0..n {
        let seed = opts.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, k) = GEODESIC_SHAPES[i % GEODESIC_SHAPES.len()];
        let a = random_subspace(&mut rng, d, k)?;
        let b = random_subspace(&mut rng, d, k)?;
        let flow = geodesic(&a, &b)?;
        let mut worst: f64 = 0.0;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            worst = worst.max(orthonormality_error(flow.evaluate(t)?.basis()));
        }
        ortho.record(seed, worst);
        let start = max_angle(&flow.evaluate(0.0)?, &a)?;
        let end = max_angle(&flow.evaluate(1.0)?, &b)?;
        ends.record(seed, start.max(end));
    }
    out.push(ortho.finish());
    out.push(ends.finish());
    Ok(())
}

fn icms_checks(opts: &VerifyOptions, out: &mut Vec<CheckResult>) -> Result<(f64, f64)> {
    let base = opts.seed.wrapping_add(10_000);

    let mut fixed = Tracker::new("icms_fixed_point", 1e-8);
    for i in 0..opts.instances.unwrap_or(10) {
        let seed = base.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_subspace(&mut rng, 12, 3)?;
        let mut state = init_mean(&s);
        let mut worst: f64 = 0.0;
        for _ in 1..50 {
            state = state.update(&s)?;
            worst = worst.max(max_angle(state.mean(), &s)?);
        }
        fixed.record(seed, worst);
    }
    out.push(fixed.finish());

    let karcher = KarcherOptions::default();
    let mut two = Tracker::new("icms_two_point_karcher", 1e-6);
    for i in 0..opts.instances.unwrap_or(20) {
        let seed = base.wrapping_add(1_000 + i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_subspace(&mut rng, 10, 3)?;
        let radius = rng.random_range(0.05..1.2);
        let b = nearby(&mut rng, &a, radius)?;
        let icms = init_mean(&a).update(&b)?;
        let reference = karcher_mean(&[a, b], karcher.tol, karcher.max_iter)?;
        two.record(seed, max_angle(icms.mean(), &reference)?);
    }
    out.push(two.finish());

    let mut step = Tracker::new("icms_step_law", 1e-8);
    for i in 0..opts.instances.unwrap_or(20) {
        let seed = base.wrapping_add(2_000 + i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.random_range(1..12usize);
        let mut state: MeanSubspaceState = init_mean(&random_subspace(&mut rng, 15, 3)?);
        for _ in 1..count {
            state = state.update(&random_subspace(&mut rng, 15, 3)?)?;
        }
        let p = random_subspace(&mut rng, 15, 3)?;
        let expected = geodesic_distance(state.mean(), &p)? / (count + 1) as f64;
        let next = state.update(&p)?;
        let moved = geodesic_distance(state.mean(), next.mean())?;
        step.record(seed, (moved - expected).abs());
    }
    out.push(step.finish());

    // No reference bound exists for the sequential estimate; it must merely
    // stay finite and inside the spread of its own inputs.
    let mut ball = Tracker::new("icms_karcher_within_diameter", 1.0);
    let mut deviation: f64 = 0.0;
    let mut min_diameter = f64::INFINITY;
    for i in 0..opts.instances.unwrap_or(20) {
        let seed = base.wrapping_add(3_000 + i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = random_subspace(&mut rng, 12, 3)?;
        let set = (0..8)
            .map(|_| {
                let r = 0.3 * rng.random::<f64>();
                nearby(&mut rng, &center, r)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut diameter: f64 = 0.0;
        for (j, a) in set.iter().enumerate() {
            for b in &set[j + 1..] {
                diameter = diameter.max(geodesic_distance(a, b)?);
            }
        }
        let mut state = init_mean(&set[0]);
        for s in &set[1..] {
            state = state.update(s)?;
        }
        let reference = karcher_mean(&set, karcher.tol, karcher.max_iter)?;
        let dev = geodesic_distance(state.mean(), &reference)?;
        deviation = deviation.max(dev);
        min_diameter = min_diameter.min(diameter);
        // ratio below one means the deviation is smaller than the set diameter
        ball.record(seed, if dev.is_finite() { dev / diameter } else { f64::INFINITY });
    }
    out.push(ball.finish());
    Ok((deviation, min_diameter))
}

const GFK_SHAPES: [(usize, usize); 6] = [(10, 1), (10, 3), (30, 1), (30, 3), (30, 5), (10, 4)];

fn gfk_checks(opts: &VerifyOptions, out: &mut Vec<CheckResult>) -> Result<()> {
    let base = opts.seed.wrapping_add(20_000);
    let sign = if opts.inject_fault { 1.0 } else { -1.0 };

    let mut quad = Tracker::new("gfk_quadrature_equivalence", 1e-8);
    let mut sym = Tracker::new("gfk_symmetry", 1e-12);
    let mut spec = Tracker::new("gfk_spectrum_in_unit_range", 1e-9);
    for i in 0..opts.instances.unwrap_or(50) {
        let seed = base.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, k) = GFK_SHAPES[i % GFK_SHAPES.len()];
        let p_s = random_subspace(&mut rng, d, k)?;
        let r_s = complement(&p_s);
        let p_t = random_subspace(&mut rng, d, k)?;
        let closed = gfk_kernel_with_cross_sign(&p_s, &r_s, &p_t, sign)?;
        let oracle = quadrature_kernel(&p_s, &r_s, &p_t, QUADRATURE_NODES)?;
        quad.record(seed, max_abs(&(closed.matrix() - oracle.matrix())));
        sym.record(seed, closed.asymmetry());
        let eig = closed.spectrum();
        let below = -eig.first().copied().unwrap_or(0.0);
        let above = eig.last().copied().unwrap_or(0.0) - 1.0;
        spec.record(seed, below.max(above).max(0.0));
    }
    out.push(quad.finish());
    out.push(sym.finish());
    out.push(spec.finish());

    let mut zero = Tracker::new("gfk_zero_angle_projector", 1e-9);
    for i in 0..opts.instances.unwrap_or(10) {
        let seed = base.wrapping_add(1_000 + i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, k) = GFK_SHAPES[i % GFK_SHAPES.len()];
        let p_s = random_subspace(&mut rng, d, k)?;
        // same span, different basis
        let q = Matrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal))
            .qr()
            .q();
        let p_t = p_s.rotated(&q)?;
        let g = gfk_kernel_with_cross_sign(&p_s, &complement(&p_s), &p_t, sign)?;
        zero.record(seed, max_abs(&(g.matrix() - p_s.projector())));
    }
    out.push(zero.finish());
    Ok(())
}

/// Runs every oracle property.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    geodesic_checks(opts, &mut checks)?;
    let (karcher_deviation, min_set_diameter) = icms_checks(opts, &mut checks)?;
    gfk_checks(opts, &mut checks)?;
    Ok(VerifyReport {
        checks,
        karcher_deviation,
        min_set_diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = run_verification(&VerifyOptions {
            seed: 3,
            instances: Some(3),
            inject_fault: false,
        })
        .unwrap();
        assert!(report.all_passed(), "{report}");
        assert!(report.checks.iter().all(|c| c.instances == 3));
    }

    #[test]
    fn flipped_cross_sign_is_caught() {
        let report = run_verification(&VerifyOptions {
            seed: 0,
            instances: Some(2),
            inject_fault: true,
        })
        .unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.property).collect();
        assert!(failed.contains(&"gfk_quadrature_equivalence"), "{failed:?}");
    }
}
