//! Dense subspace primitives on the Grassmann manifold `G(k, d)`.
//!
//! A point of the manifold is stored as an orthonormal `d x k` basis. Two bases
//! spanning the same subspace are the same point, so every comparison in this
//! crate goes through [`principal_angles`] rather than entry-wise equality.
//!
//! The geodesic between two subspaces `A` and `B` is
//!
//! ```text
//! Psi(t) = A U1 cos(t Theta) - R U2 sin(t Theta),     t in [0, 1]
//! ```
//!
//! where `R` spans the orthogonal complement of `A` and the factors come from
//! the pair of decompositions `A^T B = U1 cos(Theta) V^T` and
//! `R^T B = -U2 [sin(Theta); 0] V^T` sharing the same `V`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;

/// Row-major semantics, column-major storage; rows are samples.
pub type Matrix = DMatrix<f64>;

/// Max-abs deviation from orthonormality tolerated by [`Subspace::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Relative singular value threshold below which a matrix is rank deficient.
pub const RANK_RTOL: f64 = 1e-12;
/// Sines at or below this value are treated as zero when building `U2`.
pub const SIN_EPS: f64 = 1e-9;
/// Largest cosine overshoot above one that is silently clamped.
pub const COS_OVERSHOOT: f64 = 1e-8;
/// Reconstruction residual allowed for a [`PrincipalSystem`].
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// One point on the Grassmann manifold, represented by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wraps an orthonormal basis, checking `B^T B = I` and `1 <= k < d/2`.
    pub fn new(basis: Matrix) -> Result<Self> {
        check_block_size(basis.ncols(), basis.nrows())?;
        check_finite(&basis, "subspace basis")?;
        let dev = orthonormality_error(&basis);
        if dev >= ORTHONORMAL_TOL {
            return Err(Error::NumericalHealth(format!(
                "basis is not orthonormal (max deviation {dev:e})"
            )));
        }
        Ok(Subspace { basis })
    }

    /// Used for complements and internally produced bases that are orthonormal
    /// by construction.
    pub(crate) fn from_basis_unchecked(basis: Matrix) -> Self {
        Subspace { basis }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    /// `d`
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `k`
    pub fn sub_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector `B B^T` onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Same subspace with the basis rotated in place, `B Q`.
    ///
    /// `q` must be a `k x k` orthogonal matrix.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        if q.nrows() != self.sub_dim() || q.ncols() != self.sub_dim() {
            return Err(Error::mismatch(
                format!("{k}x{k} rotation", k = self.sub_dim()),
                format!("{}x{}", q.nrows(), q.ncols()),
            ));
        }
        let basis = &self.basis * q;
        let dev = orthonormality_error(&basis);
        if dev >= ORTHONORMAL_TOL {
            return Err(Error::NumericalHealth(format!(
                "rotation is not orthogonal (max deviation {dev:e})"
            )));
        }
        Ok(Subspace { basis })
    }

    fn check_same_shape(&self, other: &Subspace) -> Result<()> {
        if self.basis.shape() != other.basis.shape() {
            return Err(Error::mismatch(
                format!("{}x{} basis", self.ambient_dim(), self.sub_dim()),
                format!("{}x{} basis", other.ambient_dim(), other.sub_dim()),
            ));
        }
        Ok(())
    }
}

/// Paired decomposition between two subspaces with a shared right factor.
#[derive(Debug, Clone)]
pub struct PrincipalSystem {
    /// `k x k`
    pub u1: Matrix,
    /// `(d-k) x (d-k)`
    pub u2: Matrix,
    /// `k x k`
    pub v: Matrix,
    /// Principal angles in `[0, pi/2]`, ordered by descending cosine.
    pub angles: DVector<f64>,
}

impl PrincipalSystem {
    pub fn cosines(&self) -> DVector<f64> {
        self.angles.map(f64::cos)
    }

    pub fn sines(&self) -> DVector<f64> {
        self.angles.map(f64::sin)
    }

    /// Max-abs residuals of `A^T B = U1 cos V^T` and `R^T B = -U2 Sigma V^T`.
    pub fn reconstruction_error(&self, a: &Subspace, b: &Subspace, r_a: &Subspace) -> (f64, f64) {
        let k = self.angles.len();
        let ab = a.basis().transpose() * b.basis();
        let cos = Matrix::from_diagonal(&self.cosines());
        let first = max_abs(&(ab - &self.u1 * cos * self.v.transpose()));

        let rb = r_a.basis().transpose() * b.basis();
        let sin = Matrix::from_diagonal(&self.sines());
        let lead = self.u2.columns(0, k) * sin * self.v.transpose();
        let second = max_abs(&(rb + lead));
        (first, second)
    }
}

/// Geodesic `t -> Psi(t)` from `base` (t = 0) to a target subspace (t = 1).
#[derive(Debug, Clone)]
pub struct GeodesicFlow {
    base: Subspace,
    base_complement: Subspace,
    system: PrincipalSystem,
    // A U1 and R U2[:, ..k], cached for repeated evaluation.
    anchor: Matrix,
    direction: Matrix,
}

impl GeodesicFlow {
    /// Builds the flow from `base` to `target` using a precomputed complement.
    pub fn with_complement(base: &Subspace, base_complement: &Subspace, target: &Subspace) -> Result<Self> {
        let system = principal_system(base, target, base_complement)?;
        let k = base.sub_dim();
        let anchor = base.basis() * &system.u1;
        let direction = base_complement.basis() * system.u2.columns(0, k);
        Ok(GeodesicFlow {
            base: base.clone(),
            base_complement: base_complement.clone(),
            system,
            anchor,
            direction,
        })
    }

    pub fn base(&self) -> &Subspace {
        &self.base
    }

    pub fn base_complement(&self) -> &Subspace {
        &self.base_complement
    }

    pub fn system(&self) -> &PrincipalSystem {
        &self.system
    }

    /// `A U1`, the `t = 0` basis of the flow.
    pub fn anchor(&self) -> &Matrix {
        &self.anchor
    }

    /// `R U2[:, ..k]`, the unit departure directions paired with each angle.
    pub fn direction(&self) -> &Matrix {
        &self.direction
    }

    /// Geodesic length, the l2 norm of the principal angles.
    pub fn length(&self) -> f64 {
        self.system.angles.norm()
    }

    /// `Psi(t)`.
    pub fn evaluate(&self, t: f64) -> Result<Subspace> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        let mut out = self.anchor.clone();
        for (i, theta) in self.system.angles.iter().enumerate() {
            let (s, c) = (t * theta).sin_cos();
            let mut col = out.column_mut(i);
            col *= c;
            col.axpy(-s, &self.direction.column(i), 1.0);
        }
        Ok(Subspace::from_basis_unchecked(polish(out)))
    }
}

/// Orthonormal basis for the column space of `m`.
pub fn orthonormalize(m: &Matrix) -> Result<Subspace> {
    check_block_size(m.ncols(), m.nrows())?;
    check_finite(m, "matrix")?;
    let sv = linalg::singular_values(m);
    let largest = sv.max();
    let smallest = sv.min();
    if largest == 0.0 || smallest < RANK_RTOL * largest {
        return Err(Error::RankDeficient(format!(
            "smallest singular value {smallest:e} vs largest {largest:e} for a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let q = m.clone().qr().q();
    Ok(Subspace::from_basis_unchecked(q))
}

/// Orthonormal basis `R` of the orthogonal complement, `d x (d-k)`.
pub fn complement(s: &Subspace) -> Subspace {
    let extra = s.ambient_dim() - s.sub_dim();
    Subspace::from_basis_unchecked(orthonormal_extension(s.basis(), extra))
}

/// Computes the shared-`V` principal system of `(a, b)` with `r_a = complement(a)`.
///
/// `U1`, the cosines and `V` come from one SVD of `a^T b`. The leading columns
/// of `U2` are then read off `M = r_a^T b V` (column `i` of `-M` has norm
/// `sin theta_i`), so both reconstruction identities hold by construction.
/// Columns whose sine is negligible, and the trailing `d - 2k` columns, are
/// filled by orthonormal extension.
pub fn principal_system(a: &Subspace, b: &Subspace, r_a: &Subspace) -> Result<PrincipalSystem> {
    a.check_same_shape(b)?;
    let (d, k) = (a.ambient_dim(), a.sub_dim());
    if r_a.ambient_dim() != d || r_a.sub_dim() != d - k {
        return Err(Error::mismatch(
            format!("{d}x{} complement", d - k),
            format!("{}x{}", r_a.ambient_dim(), r_a.sub_dim()),
        ));
    }

    let ab = a.basis().transpose() * b.basis();
    let pair = pair_factors(&ab, |v| r_a.basis().transpose() * (b.basis() * v))?;
    let angles = pair.angles();

    let mut last_residual = f64::INFINITY;
    for passes in [1, 3] {
        let u2 = shared_complement_factor(&pair.directions, &pair.sines, passes);
        let system = PrincipalSystem {
            u1: pair.u1.clone(),
            u2,
            v: pair.v.clone(),
            angles: angles.clone(),
        };
        let (e1, e2) = system.reconstruction_error(a, b, r_a);
        last_residual = e1.max(e2);
        if last_residual < RECONSTRUCTION_TOL {
            return Ok(system);
        }
    }
    Err(Error::SharedFactorFailure {
        residual: last_residual,
        tolerance: RECONSTRUCTION_TOL,
    })
}

/// Principal angles between `a` and `b`, ascending (descending cosine).
///
/// Cosines come from the singular values of `a^T b`; sines from the residual
/// of `b V` after projecting out `a`. Pairing them through `atan2` keeps
/// small angles accurate where `arccos` alone loses half the digits.
pub fn principal_angles(a: &Subspace, b: &Subspace) -> Result<Vec<f64>> {
    a.check_same_shape(b)?;
    let ab = a.basis().transpose() * b.basis();
    let pair = pair_factors(&ab, |v| {
        let bv = b.basis() * v;
        &bv - a.basis() * (&ab * v)
    })?;
    let mut angles: Vec<f64> = pair.angles().iter().copied().collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Geodesic distance, the l2 norm of the principal-angle vector.
pub fn geodesic_distance(a: &Subspace, b: &Subspace) -> Result<f64> {
    Ok(principal_angles(a, b)?.iter().map(|t| t * t).sum::<f64>().sqrt())
}

/// Geodesic flow from `a` to `b`, anchored at `a`.
pub fn geodesic(a: &Subspace, b: &Subspace) -> Result<GeodesicFlow> {
    a.check_same_shape(b)?;
    GeodesicFlow::with_complement(a, &complement(a), b)
}

/// Free-function form of [`GeodesicFlow::evaluate`].
pub fn evaluate(flow: &GeodesicFlow, t: f64) -> Result<Subspace> {
    flow.evaluate(t)
}

/// Riemannian log map: the tangent `H` at `x` (with `x^T H = 0`) whose
/// exponential reaches `y`. Its Frobenius norm is the geodesic distance.
pub fn log_map(x: &Subspace, y: &Subspace) -> Result<Matrix> {
    x.check_same_shape(y)?;
    let xy = x.basis().transpose() * y.basis();
    let (u1, cos, v) = sorted_svd(&xy);
    check_cosines(&cos)?;
    let mut h = y.basis() * &v - x.basis() * (&xy * &v);
    for (i, c) in cos.iter().enumerate() {
        let mut col = h.column_mut(i);
        let s = col.norm();
        let theta = s.atan2(c.min(1.0));
        // theta / sin(theta) -> 1 as theta -> 0
        let scale = if s > 1e-15 { theta / s } else { 1.0 };
        col *= scale;
    }
    Ok(h * u1.transpose())
}

/// Riemannian exponential map at `x` along the horizontal tangent `h`.
pub fn exp_map(x: &Subspace, h: &Matrix) -> Result<Subspace> {
    if h.shape() != x.basis().shape() {
        return Err(Error::mismatch(
            format!("{}x{} tangent", x.ambient_dim(), x.sub_dim()),
            format!("{}x{}", h.nrows(), h.ncols()),
        ));
    }
    let (q, s, z) = linalg::svd(h);
    let z_t = z.transpose();
    let cos = Matrix::from_diagonal(&s.map(f64::cos));
    let sin = Matrix::from_diagonal(&s.map(f64::sin));
    let moved = x.basis() * &z * cos * &z_t + q * sin * z_t;
    // Re-orthonormalize to stop drift; the span is unchanged.
    let basis = moved.qr().q();
    Ok(Subspace::from_basis_unchecked(basis))
}

/// Top-`k` principal subspace of the row-centered data `x` (`N x d`).
///
/// Each basis vector is flipped so its largest-magnitude entry is positive.
pub fn pca_subspace(x: &Matrix, k: usize) -> Result<Subspace> {
    check_block_size(k, x.ncols())?;
    if x.nrows() < 2 {
        return Err(Error::RankDeficient(format!(
            "PCA needs at least 2 rows, got {}",
            x.nrows()
        )));
    }
    check_finite(x, "data")?;
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let (_, sv, v) = sorted_svd(&centered);
    let largest = sv.max();
    let rank = sv.iter().filter(|&&s| s > RANK_RTOL * largest).count();
    if largest == 0.0 || rank < k {
        return Err(Error::RankDeficient(format!(
            "centered data has rank {rank}, need at least {k}"
        )));
    }
    let mut basis = v.columns(0, k).into_owned();
    for mut col in basis.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, e| if e.abs() > best.abs() { e } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    Ok(Subspace::from_basis_unchecked(basis))
}

/// Uniformly distributed random subspace of `G(k, d)`.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Result<Subspace> {
    let g = Matrix::from_fn(d, k, |_, _| rng.sample(StandardNormal));
    orthonormalize(&g)
}

/// Max-abs entry of `B^T B - I`.
pub fn orthonormality_error(basis: &Matrix) -> f64 {
    let gram = basis.transpose() * basis;
    max_abs(&(gram - Matrix::identity(basis.ncols(), basis.ncols())))
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()))
}

fn check_block_size(k: usize, d: usize) -> Result<()> {
    if k == 0 || 2 * k >= d {
        return Err(Error::DimensionViolation { k, d });
    }
    Ok(())
}

fn check_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalHealth(format!("{what} contains non-finite entries")))
    }
}

fn check_cosines(cos: &DVector<f64>) -> Result<()> {
    match cos.iter().copied().find(|&c| c > 1.0 + COS_OVERSHOOT || !c.is_finite()) {
        Some(c) => Err(Error::NumericalHealth(format!(
            "singular value {c} of A^T B exceeds 1; inputs are not orthonormal"
        ))),
        None => Ok(()),
    }
}

/// Thin SVD with singular values in descending order.
pub(crate) fn sorted_svd(m: &Matrix) -> (Matrix, DVector<f64>, Matrix) {
    linalg::svd(m)
}

/// Cosine and sine sides of a principal system, sharing `v`.
struct Pairing {
    u1: Matrix,
    cos: DVector<f64>,
    v: Matrix,
    /// Unit directions of the part of `B v_i` outside `A`, in the caller's frame.
    directions: Matrix,
    sines: Vec<f64>,
}

impl Pairing {
    fn angles(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.sines.len(),
            self.cos.iter().zip(&self.sines).map(|(c, s)| s.atan2(c.min(1.0))),
        )
    }
}

/// Builds the shared right factor from `ab = A^T B` and `outside(V)`, the
/// component of `B V` orthogonal to `A`.
///
/// Below 45 degrees the cosines cluster near one and cannot separate the
/// singular directions, so that block of `V` is re-resolved from the SVD of
/// the small residual instead. Above 45 degrees the cosine side is kept.
fn pair_factors(ab: &Matrix, outside: impl Fn(&Matrix) -> Matrix) -> Result<Pairing> {
    let (u1c, cos_c, vc) = sorted_svd(ab);
    check_cosines(&cos_c)?;
    let k = cos_c.len();
    let small = cos_c.iter().take_while(|c| *c * *c >= 0.5).count();

    let (y, s_small, z) = sorted_svd(&outside(&vc.columns(0, small).into_owned()));
    // ascending sine = descending cosine
    let y = reverse_columns(&y);
    let v_small = vc.columns(0, small) * reverse_columns(&z);
    let w = ab * &v_small;

    let v_large = vc.columns(small, k - small).into_owned();
    let e_large = outside(&v_large);

    let n = y.nrows().max(e_large.nrows());
    let mut u1 = Matrix::zeros(k, k);
    let mut v = Matrix::zeros(k, k);
    let mut directions = Matrix::zeros(n, k);
    let mut cos = DVector::zeros(k);
    let mut sines = vec![0.0; k];
    for i in 0..small {
        let c = w.column(i).norm();
        u1.set_column(i, &(w.column(i) / c));
        cos[i] = c;
        v.set_column(i, &v_small.column(i));
        directions.set_column(i, &y.column(i));
        sines[i] = s_small[small - 1 - i];
    }
    for j in 0..k - small {
        let i = small + j;
        let sn = e_large.column(j).norm();
        u1.set_column(i, &u1c.column(i));
        cos[i] = cos_c[i];
        v.set_column(i, &v_large.column(j));
        directions.set_column(i, &(e_large.column(j) / sn));
        sines[i] = sn;
    }

    let mut pair = Pairing {
        u1: polish(u1),
        cos,
        v,
        directions,
        sines,
    };
    let angles = pair.angles();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| angles[i].total_cmp(&angles[j]));
    if order.iter().enumerate().any(|(slot, &i)| slot != i) {
        let pick = |m: &Matrix| Matrix::from_fn(m.nrows(), k, |r, c| m[(r, order[c])]);
        pair = Pairing {
            u1: pick(&pair.u1),
            cos: DVector::from_iterator(k, order.iter().map(|&i| pair.cos[i])),
            v: pick(&pair.v),
            directions: pick(&pair.directions),
            sines: order.iter().map(|&i| pair.sines[i]).collect(),
        };
    }
    Ok(pair)
}

/// Two passes of modified Gram-Schmidt in column order. Columns keep their
/// sign and move by no more than their current orthogonality error.
pub(crate) fn polish(mut m: Matrix) -> Matrix {
    for _ in 0..2 {
        for i in 0..m.ncols() {
            for j in 0..i {
                let p = m.column(j).dot(&m.column(i));
                let prev = m.column(j).into_owned();
                m.column_mut(i).axpy(-p, &prev, 1.0);
            }
            let n = m.column(i).norm();
            m.column_mut(i).unscale_mut(n);
        }
    }
    m
}

fn reverse_columns(m: &Matrix) -> Matrix {
    let c = m.ncols();
    Matrix::from_fn(m.nrows(), c, |r, j| m[(r, c - 1 - j)])
}

/// Full `(d-k) x (d-k)` orthonormal factor whose column `i` is `-directions_i`
/// wherever `sin_i > SIN_EPS`.
fn shared_complement_factor(directions: &Matrix, sines: &[f64], passes: usize) -> Matrix {
    let (n, k) = directions.shape();
    let mut u2 = Matrix::zeros(n, n);
    // Largest sines are the most accurate directions; fix them first.
    let mut fixed: Vec<usize> = (0..k).filter(|&i| sines[i] > SIN_EPS).collect();
    fixed.sort_by(|&i, &j| sines[j].total_cmp(&sines[i]));

    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(n);
    for &i in &fixed {
        let mut w: DVector<f64> = -directions.column(i);
        for _ in 0..passes {
            for q in &accepted {
                let p = q.dot(&w);
                w.axpy(-p, q, 1.0);
            }
        }
        w.normalize_mut();
        u2.set_column(i, &w);
        accepted.push(w);
    }

    let known = if accepted.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&accepted)
    };
    let free: Vec<usize> = (0..k).filter(|i| !fixed.contains(i)).chain(k..n).collect();
    let ext = orthonormal_extension(&known, free.len());
    for (slot, col) in free.iter().zip(ext.column_iter()) {
        u2.set_column(*slot, &col);
    }
    u2
}

/// `count` orthonormal columns orthogonal to the orthonormal columns of `fixed`.
///
/// Greedy Gram-Schmidt over the canonical axes, always taking the axis with
/// the largest residual so no candidate is ever nearly dependent.
pub(crate) fn orthonormal_extension(fixed: &Matrix, count: usize) -> Matrix {
    let n = fixed.nrows();
    assert!(fixed.ncols() + count <= n, "cannot extend beyond the ambient dimension");
    let mut basis: Vec<DVector<f64>> = fixed.column_iter().map(|c| c.into_owned()).collect();
    let mut residual: Vec<f64> = (0..n).map(|j| 1.0 - fixed.row(j).norm_squared()).collect();
    let mut out = Matrix::zeros(n, count);
    for c in 0..count {
        let (axis, _) =
            residual.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (j, &r)| if r > best.1 { (j, r) } else { best },
            );
        let mut w = DVector::zeros(n);
        w[axis] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&w);
                w.axpy(-p, q, 1.0);
            }
        }
        w.normalize_mut();
        for (r, wi) in residual.iter_mut().zip(w.iter()) {
            *r -= wi * wi;
        }
        out.set_column(c, &w);
        basis.push(w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn axes(d: usize, idx: &[usize]) -> Subspace {
        let mut m = Matrix::zeros(d, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            m[(i, c)] = 1.0;
        }
        Subspace::new(m).unwrap()
    }

    /// Unit vector at angle `phi` in the (e_0, e_1) plane.
    fn line_at(d: usize, phi: f64) -> Subspace {
        let mut m = Matrix::zeros(d, 1);
        m[(0, 0)] = phi.cos();
        m[(1, 0)] = phi.sin();
        Subspace::new(m).unwrap()
    }

    #[test]
    fn orthonormalize_keeps_identity_block() {
        let mut m = Matrix::zeros(7, 3);
        m.fill_diagonal(1.0);
        let s = orthonormalize(&m).unwrap();
        for i in 0..7 {
            for j in 0..3 {
                assert!((s.basis()[(i, j)].abs() - m[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn orthonormalize_rejects_repeated_columns() {
        let mut m = Matrix::zeros(8, 2);
        m[(0, 0)] = 1.0;
        m[(3, 0)] = 2.0;
        m.set_column(1, &m.column(0).into_owned());
        assert!(matches!(orthonormalize(&m), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn orthonormalize_rejects_wide_blocks() {
        let m = Matrix::from_fn(6, 3, |i, j| (i * 3 + j) as f64);
        assert!(matches!(
            orthonormalize(&m),
            Err(Error::DimensionViolation { k: 3, d: 6 })
        ));
    }

    #[test]
    fn orthonormalize_random_gaussian_spans_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Matrix::from_fn(10, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let s = orthonormalize(&m).unwrap();
        assert!(orthonormality_error(s.basis()) < 1e-12);
        let residual = &m - s.projector() * &m;
        assert!(max_abs(&residual) < 1e-12);
    }

    #[test]
    fn complement_of_canonical_axes() {
        let s = axes(6, &[0, 1]);
        let r = complement(&s);
        assert_eq!(r.sub_dim(), 4);
        assert!(orthonormality_error(r.basis()) < 1e-12);
        assert!(max_abs(&(r.basis().transpose() * s.basis())) < 1e-12);
        // rows 0 and 1 of R must vanish
        assert!(r.basis().rows(0, 2).iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn complement_resolves_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_subspace(&mut rng, 12, 3).unwrap();
        let r = complement(&s);
        assert!(orthonormality_error(r.basis()) < 1e-10);
        assert!(max_abs(&(r.basis().transpose() * s.basis())) < 1e-10);
        let total = s.projector() + r.projector();
        assert!(max_abs(&(total - Matrix::identity(12, 12))) < 1e-9);
    }

    #[test]
    fn principal_system_of_identical_subspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_subspace(&mut rng, 9, 3).unwrap();
        let r = complement(&a);
        let sys = principal_system(&a, &a, &r).unwrap();
        assert!(sys.angles.iter().all(|t| t.abs() < 1e-12));
        assert!(max_abs(&(&sys.u1 - &sys.v)) < 1e-10);
        let (e1, e2) = sys.reconstruction_error(&a, &a, &r);
        assert!(e1 < 1e-12 && e2 < 1e-12);
        assert!(orthonormality_error(&sys.u2) < 1e-10);
    }

    #[test]
    fn principal_system_of_orthogonal_lines() {
        let a = axes(5, &[0]);
        let b = axes(5, &[1]);
        let sys = principal_system(&a, &b, &complement(&a)).unwrap();
        assert!((sys.angles[0] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn principal_system_matches_independent_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let a = random_subspace(&mut rng, 20, 4).unwrap();
        let b = random_subspace(&mut rng, 20, 4).unwrap();
        let r = complement(&a);
        let sys = principal_system(&a, &b, &r).unwrap();
        let mut sv: Vec<f64> = (a.basis().transpose() * b.basis())
            .singular_values()
            .iter()
            .copied()
            .collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        for (c, s) in sys.cosines().iter().zip(&sv) {
            assert!((c - s).abs() < 1e-10);
        }
        for m in [&sys.u1, &sys.u2, &sys.v] {
            assert!(orthonormality_error(m) < 1e-10);
        }
        let (e1, e2) = sys.reconstruction_error(&a, &b, &r);
        assert!(e1 < 1e-9 && e2 < 1e-9, "{e1:e} {e2:e}");
    }

    fn rotated_pair(d: usize, angles: &[f64], seed: u64) -> (Subspace, Subspace) {
        // span{e_i} against span{cos e_i + sin e_(k+i)}, then a random rotation of R^d
        let k = angles.len();
        let a = Matrix::from_fn(d, k, |r, c| if r == c { 1.0 } else { 0.0 });
        let b = Matrix::from_fn(d, k, |r, c| {
            if r == c {
                angles[c].cos()
            } else if r == k + c {
                angles[c].sin()
            } else {
                0.0
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Matrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let rot = g.qr().q();
        (Subspace::new(&rot * a).unwrap(), Subspace::new(&rot * b).unwrap())
    }

    #[test]
    fn principal_system_with_clustered_small_angles() {
        let truth = [1e-8, 1.0001e-8, 2e-8, 0.7];
        for seed in 0..20 {
            let (a, b) = rotated_pair(11, &truth, seed);
            let r = complement(&a);
            let sys = principal_system(&a, &b, &r).unwrap();
            let (e1, e2) = sys.reconstruction_error(&a, &b, &r);
            assert!(e1 < 1e-12 && e2 < 1e-12, "{e1:e} {e2:e}");
            for m in [&sys.u1, &sys.u2, &sys.v] {
                assert!(orthonormality_error(m) < 1e-12);
            }
            for (got, want) in sys.angles.iter().zip(truth) {
                assert!((got - want).abs() < 1e-14 + 1e-6 * want, "{got:e} vs {want:e}");
            }
            let angles = principal_angles(&a, &b).unwrap();
            for (got, want) in angles.iter().zip(truth) {
                assert!((got - want).abs() < 1e-14 + 1e-6 * want, "{got:e} vs {want:e}");
            }
        }
    }

    #[test]
    fn principal_system_rejects_foreign_complement() {
        let a = axes(8, &[0, 1]);
        let b = axes(8, &[2, 3]);
        let wrong = complement(&axes(8, &[0]));
        assert!(matches!(
            principal_system(&a, &b, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn principal_angles_basic_cases() {
        let a = axes(5, &[0, 2]);
        assert!(principal_angles(&a, &a).unwrap().iter().all(|t| *t == 0.0));
        let e1 = axes(5, &[0]);
        let e2 = axes(5, &[1]);
        assert_eq!(principal_angles(&e1, &e2).unwrap(), vec![FRAC_PI_2]);
    }

    #[test]
    fn principal_angle_of_givens_rotation() {
        for phi in [1e-9, 1e-4, 0.3, 1.2, FRAC_PI_2 - 1e-6] {
            let got = principal_angles(&line_at(6, 0.0), &line_at(6, phi)).unwrap();
            assert!((got[0] - phi).abs() < 1e-10, "phi={phi} got={}", got[0]);
        }
    }

    #[test]
    fn evaluate_rejects_out_of_range_t() {
        let flow = geodesic(&line_at(4, 0.0), &line_at(4, 0.5)).unwrap();
        assert!(matches!(flow.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(flow.evaluate(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluate_hits_both_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_subspace(&mut rng, 15, 3).unwrap();
        let b = random_subspace(&mut rng, 15, 3).unwrap();
        let flow = geodesic(&a, &b).unwrap();
        let start = flow.evaluate(0.0).unwrap();
        let end = flow.evaluate(1.0).unwrap();
        assert!(principal_angles(&start, &a).unwrap().iter().all(|t| *t < 1e-7));
        assert!(principal_angles(&end, &b).unwrap().iter().all(|t| *t < 1e-7));
    }

    #[test]
    fn evaluate_midpoint_between_lines() {
        let phi = 0.9;
        let a = line_at(7, 0.0);
        let b = line_at(7, phi);
        let mid = geodesic(&a, &b).unwrap().evaluate(0.5).unwrap();
        let to_a = principal_angles(&mid, &a).unwrap()[0];
        let to_b = principal_angles(&mid, &b).unwrap()[0];
        assert!((to_a - phi / 2.0).abs() < 1e-9);
        assert!((to_b - phi / 2.0).abs() < 1e-9);
    }

    #[test]
    fn pca_recovers_noiseless_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plane = random_subspace(&mut rng, 8, 2).unwrap();
        let offset = Matrix::from_fn(1, 8, |_, j| 3.0 + j as f64);
        let coeffs = Matrix::from_fn(40, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x = coeffs * plane.basis().transpose();
        for mut row in x.row_iter_mut() {
            row += &offset;
        }
        let got = pca_subspace(&x, 2).unwrap();
        assert!(principal_angles(&got, &plane).unwrap().iter().all(|t| *t < 1e-8));
    }

    #[test]
    fn pca_finds_largest_variance_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let stds = [3.0, 2.0, 1.0, 0.5, 0.5, 0.5, 0.5];
        let x = Matrix::from_fn(1000, 7, |_, j| stds[j] * rng.sample::<f64, _>(StandardNormal));
        let got = pca_subspace(&x, 1).unwrap();
        let angle = got.basis()[(0, 0)].abs().min(1.0).acos();
        assert!(angle < 0.1, "angle {angle}");
        // sign convention
        assert!(got.basis()[(0, 0)] > 0.0);
    }

    #[test]
    fn pca_rejects_single_row() {
        let x = Matrix::from_element(1, 6, 1.0);
        assert!(matches!(pca_subspace(&x, 2), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn log_and_exp_are_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_subspace(&mut rng, 10, 2).unwrap();
        let y = random_subspace(&mut rng, 10, 2).unwrap();
        let h = log_map(&x, &y).unwrap();
        assert!(max_abs(&(x.basis().transpose() * &h)) < 1e-12);
        assert!((h.norm() - geodesic_distance(&x, &y).unwrap()).abs() < 1e-10);
        let back = exp_map(&x, &h).unwrap();
        assert!(principal_angles(&back, &y).unwrap().iter().all(|t| *t < 1e-8));
    }

    #[test]
    fn geodesic_length_is_distance() {
        let a = line_at(5, 0.0);
        let b = line_at(5, PI / 5.0);
        let flow = geodesic(&a, &b).unwrap();
        assert!((flow.length() - PI / 5.0).abs() < 1e-12);
    }
}
