//! Incremental computation of the mean target subspace.
//!
//! The running mean after `n` subspaces sits `1/n` of the way along the
//! geodesic from the previous mean to the newest subspace, mirroring the
//! Euclidean update `m_n = ((n-1) m_{n-1} + x_n) / n`. An iterative Karcher
//! mean is kept alongside purely as a reference to check against.

use crate::error::{Error, Result};
use crate::manifold::{exp_map, geodesic, log_map, Matrix, Subspace};

/// Running mean subspace and the number of subspaces folded into it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSubspaceState {
    mean: Subspace,
    count: usize,
}

impl MeanSubspaceState {
    pub fn mean(&self) -> &Subspace {
        &self.mean
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Folds `p` into the mean, returning the new state.
    pub fn update(&self, p: &Subspace) -> Result<Self> {
        update_mean(self, p)
    }
}

/// The mean of a single subspace is that subspace.
pub fn init_mean(p1: &Subspace) -> MeanSubspaceState {
    MeanSubspaceState {
        mean: p1.clone(),
        count: 1,
    }
}

pub fn update_mean(state: &MeanSubspaceState, p_n: &Subspace) -> Result<MeanSubspaceState> {
    let n = state.count + 1;
    let mean = geodesic(&state.mean, p_n)?.evaluate(1.0 / n as f64)?;
    Ok(MeanSubspaceState { mean, count: n })
}

/// Defaults for [`karcher_mean`].
#[derive(Debug, Clone, Copy)]
pub struct KarcherOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KarcherOptions {
    fn default() -> Self {
        KarcherOptions {
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Frechet mean by fixed-point iteration: average the log maps at the current
/// estimate, step along the exponential, repeat until the mean tangent is
/// shorter than `tol`.
pub fn karcher_mean(subspaces: &[Subspace], tol: f64, max_iter: usize) -> Result<Subspace> {
    let first = subspaces
        .first()
        .ok_or_else(|| Error::InsufficientData("Karcher mean of an empty set".into()))?;
    let mut estimate = first.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iter {
        let mut tangent = Matrix::zeros(first.ambient_dim(), first.sub_dim());
        for s in subspaces {
            tangent += log_map(&estimate, s)?;
        }
        tangent /= subspaces.len() as f64;
        residual = tangent.norm();
        if residual < tol {
            return Ok(estimate);
        }
        estimate = exp_map(&estimate, &tangent)?;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{geodesic_distance, principal_angles, random_subspace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_at(d: usize, phi: f64) -> Subspace {
        let mut m = Matrix::zeros(d, 1);
        m[(0, 0)] = phi.cos();
        m[(1, 0)] = phi.sin();
        Subspace::new(m).unwrap()
    }

    fn max_angle(a: &Subspace, b: &Subspace) -> f64 {
        principal_angles(a, b).unwrap().into_iter().fold(0.0, f64::max)
    }

    #[test]
    fn init_is_the_base_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = random_subspace(&mut rng, 10, 2).unwrap();
        let state = init_mean(&p);
        assert_eq!(state.count(), 1);
        assert_eq!(state.mean(), &p);
        let next = state.update(&p).unwrap();
        assert_eq!(next.count(), 2);
        assert!(max_angle(next.mean(), &p) < 1e-8);
    }

    #[test]
    fn second_subspace_lands_on_midpoint() {
        let phi = 0.7;
        let a = line_at(5, 0.0);
        let b = line_at(5, phi);
        let state = update_mean(&init_mean(&a), &b).unwrap();
        assert!((max_angle(state.mean(), &a) - phi / 2.0).abs() < 1e-9);
        assert!((max_angle(state.mean(), &b) - phi / 2.0).abs() < 1e-9);
    }

    #[test]
    fn fourth_update_moves_a_quarter_of_the_way() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut state = init_mean(&random_subspace(&mut rng, 12, 3).unwrap());
        for _ in 0..2 {
            state = state.update(&random_subspace(&mut rng, 12, 3).unwrap()).unwrap();
        }
        assert_eq!(state.count(), 3);
        let p4 = random_subspace(&mut rng, 12, 3).unwrap();
        let delta = geodesic_distance(state.mean(), &p4).unwrap();
        let next = state.update(&p4).unwrap();
        let moved = geodesic_distance(state.mean(), next.mean()).unwrap();
        assert!((moved - delta / 4.0).abs() < 1e-8, "{moved} vs {}", delta / 4.0);
    }

    #[test]
    fn karcher_of_identical_inputs_is_immediate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_subspace(&mut rng, 9, 2).unwrap();
        let got = karcher_mean(&[p.clone(), p.clone(), p.clone()], 1e-8, 0).unwrap();
        assert!(max_angle(&got, &p) < 1e-10);
    }

    #[test]
    fn karcher_of_two_is_the_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_subspace(&mut rng, 10, 3).unwrap();
        let b = random_subspace(&mut rng, 10, 3).unwrap();
        let opts = KarcherOptions::default();
        let km = karcher_mean(&[a.clone(), b.clone()], opts.tol, opts.max_iter).unwrap();
        let mid = geodesic(&a, &b).unwrap().evaluate(0.5).unwrap();
        assert!(max_angle(&km, &mid) < 1e-6);
    }

    #[test]
    fn karcher_in_a_plane_is_the_scalar_mean() {
        let phi = 0.2;
        let lines: Vec<_> = [0.0, phi, 2.0 * phi].iter().map(|&t| line_at(6, t)).collect();
        let km = karcher_mean(&lines, 1e-10, 200).unwrap();
        assert!((max_angle(&km, &lines[0]) - phi).abs() < 1e-6);
        assert!(max_angle(&km, &lines[1]) < 1e-6);
    }

    #[test]
    fn karcher_reports_non_convergence() {
        let lines: Vec<_> = [0.0, 0.3].iter().map(|&t| line_at(5, t)).collect();
        assert!(matches!(
            karcher_mean(&lines, 1e-12, 0),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn karcher_of_nothing_is_an_error() {
        assert!(karcher_mean(&[], 1e-8, 10).is_err());
    }
}
