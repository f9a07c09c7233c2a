//! Geodesic flow kernel from the source subspace to a target subspace.
//!
//! The kernel is `G = int_0^1 Phi(t) Phi(t)^T dt` over the geodesic `Phi`
//! from the source subspace to the target. Writing `Phi(t) = A cos(t Theta) -
//! Q sin(t Theta)` with `A = P_S U3` and `Q = R_S U4[:, ..k]`, every term is a
//! rank-one product of matching columns, so the integral reduces to three
//! scalar integrals per principal angle:
//!
//! ```text
//! int cos^2(t theta)        = 1/2 + sin(2 theta) / (4 theta)
//! int cos(t theta) sin(..)  = sin^2(theta) / (2 theta)
//! int sin^2(t theta)        = 1/2 - sin(2 theta) / (4 theta)
//! ```
//!
//! and `G = A L1 A^T - A L2 Q^T - Q L2 A^T + Q L3 Q^T`.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::manifold::{GeodesicFlow, Matrix, Subspace};

/// Below this angle the integrals take their `theta -> 0` limits.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Symmetric PSD `d x d` transform `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformKernel {
    g: Matrix,
    source_sub_dim: usize,
}

impl TransformKernel {
    /// Wraps an arbitrary square matrix, e.g. the identity for a no-op transform.
    pub fn from_matrix(g: Matrix, source_sub_dim: usize) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::mismatch("square kernel", format!("{}x{}", g.nrows(), g.ncols())));
        }
        Ok(TransformKernel { g, source_sub_dim })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn source_sub_dim(&self) -> usize {
        self.source_sub_dim
    }

    /// Max-abs entry of `G - G^T`.
    pub fn asymmetry(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.g.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `(int cos^2, int cos*sin, int sin^2)` of `t * theta` over `t in [0, 1]`.
pub fn flow_integrals(theta: f64) -> (f64, f64, f64) {
    if theta < SMALL_ANGLE {
        return (1.0, 0.0, 0.0);
    }
    let half_sinc = (2.0 * theta).sin() / (4.0 * theta);
    let sin = theta.sin();
    (0.5 + half_sinc, sin * sin / (2.0 * theta), 0.5 - half_sinc)
}

/// Closed-form kernel for the flow from `p_s` (complement `r_s`) to `p_t`.
pub fn gfk_kernel(p_s: &Subspace, r_s: &Subspace, p_t: &Subspace) -> Result<TransformKernel> {
    gfk_kernel_with_cross_sign(p_s, r_s, p_t, -1.0)
}

/// Closed form with the sign of the cross block exposed, so the verification
/// harness can inject a known fault. The correct sign is `-1`.
#[doc(hidden)]
pub fn gfk_kernel_with_cross_sign(
    p_s: &Subspace,
    r_s: &Subspace,
    p_t: &Subspace,
    cross_sign: f64,
) -> Result<TransformKernel> {
    let flow = GeodesicFlow::with_complement(p_s, r_s, p_t)?;
    let (a, q) = (flow.anchor(), flow.direction());
    let k = p_s.sub_dim();

    let mut a_scaled = a.clone();
    let mut q_scaled = q.clone();
    let mut a_cross = a.clone();
    for (i, &theta) in flow.system().angles.iter().enumerate() {
        let (l1, l2, l3) = flow_integrals(theta);
        a_scaled.column_mut(i).scale_mut(l1);
        q_scaled.column_mut(i).scale_mut(l3);
        a_cross.column_mut(i).scale_mut(cross_sign * l2);
    }
    debug_assert_eq!(a.ncols(), k);

    let cross = &a_cross * q.transpose();
    let mut g = &a_scaled * a.transpose() + &q_scaled * q.transpose();
    g += &cross;
    g += cross.transpose();
    let g = (&g + g.transpose()) * 0.5;
    Ok(TransformKernel { g, source_sub_dim: k })
}

/// Composite Simpson approximation of the kernel integral using `nodes`
/// intervals (even, at least 2) and the flow evaluated at each node.
pub fn quadrature_kernel(p_s: &Subspace, r_s: &Subspace, p_t: &Subspace, nodes: usize) -> Result<TransformKernel> {
    if nodes < 2 || !nodes.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "Simpson rule needs an even number of intervals >= 2, got {nodes}"
        )));
    }
    let flow = GeodesicFlow::with_complement(p_s, r_s, p_t)?;
    let d = p_s.ambient_dim();
    let h = 1.0 / nodes as f64;
    let mut g = Matrix::zeros(d, d);
    for i in 0..=nodes {
        let weight = match i {
            0 => 1.0,
            i if i == nodes => 1.0,
            i if i % 2 == 1 => 4.0,
            _ => 2.0,
        };
        let phi = flow.evaluate(i as f64 * h)?;
        g.gemm(weight * h / 3.0, phi.basis(), &phi.basis().transpose(), 1.0);
    }
    let g = (&g + g.transpose()) * 0.5;
    Ok(TransformKernel {
        g,
        source_sub_dim: p_s.sub_dim(),
    })
}

/// `x G` for row-sample data `x`.
pub fn apply_transform(x: &Matrix, kernel: &TransformKernel) -> Result<Matrix> {
    if x.ncols() != kernel.dim() {
        return Err(Error::mismatch(
            format!("{} columns", kernel.dim()),
            format!("{} columns", x.ncols()),
        ));
    }
    Ok(x * kernel.matrix())
}
