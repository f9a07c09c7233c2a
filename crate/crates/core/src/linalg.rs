//! One-sided Jacobi SVD.
//!
//! The subspace code leans on SVDs of small `k x k` products whose singular
//! values cluster near 1; Jacobi rotations keep full relative accuracy there.

use nalgebra::DVector;

use crate::manifold::{orthonormal_extension, Matrix};

const SWEEP_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `m = U diag(s) V^T`, singular values descending.
///
/// For an `r x c` input, `U` is `r x min(r, c)` and `V` is `c x min(r, c)`;
/// both always have orthonormal columns, including those paired with zero
/// singular values.
pub fn svd(m: &Matrix) -> (Matrix, DVector<f64>, Matrix) {
    if m.nrows() < m.ncols() {
        let (u, s, v) = svd(&m.transpose());
        return (v, s, u);
    }
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = Matrix::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= SWEEP_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.column_iter().map(|col| col.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let largest = norms.iter().copied().fold(0.0, f64::max);
    let floor = 1e-14 * largest.max(1.0);

    let rows = a.nrows();
    let mut u = Matrix::zeros(rows, n);
    let mut placed: Vec<usize> = Vec::new();
    let mut missing: Vec<usize> = Vec::new();
    for (slot, &i) in order.iter().enumerate() {
        if norms[i] > floor {
            u.set_column(slot, &(a.column(i) / norms[i]));
            placed.push(slot);
        } else {
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        let known = Matrix::from_fn(rows, placed.len(), |r, c| u[(r, placed[c])]);
        let ext = orthonormal_extension(&known, missing.len());
        for (slot, col) in missing.iter().zip(ext.column_iter()) {
            u.set_column(*slot, &col);
        }
    }
    let s = DVector::from_iterator(n, order.iter().map(|&i| norms[i]));
    let v = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (u, s, v)
}

/// Singular values only, descending.
pub fn singular_values(m: &Matrix) -> DVector<f64> {
    svd(m).1
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (mp, mq) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = c * mp - s * mq;
        m[(r, q)] = s * mp + c * mq;
    }
}
