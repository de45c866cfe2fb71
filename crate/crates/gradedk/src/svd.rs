//! Thresholded singular value decomposition with kernel and cokernel
//! projections.
//!
//! The decomposition goes through the Hermitian eigenproblem of the block
//! dilation `[[0, M*], [M, 0]]` rather than the Gram matrix, so small singular
//! values are not squared away. Eigenvectors for eigenvalues inside `(-tau,
//! tau)` span `ker M + ker M*`; that subspace is block-aligned, so its
//! projection splits into the kernel and cokernel projections directly.

use crate::eigen::eig_hermitian;
use crate::matrix::{ComplexMatrix, KernelError};
use num_complex::Complex64;

/// Relative factor for the default rank threshold `tau = 1e-8 * ||M||`.
pub const DEFAULT_RANK_FACTOR: f64 = 1e-8;

/// Result of [`svd_threshold`].
#[derive(Clone, Debug)]
pub struct SvdThreshold {
    /// Singular values, descending, `min(rows, cols)` of them.
    pub singular_values: Vec<f64>,
    /// Projection onto the numerical kernel (domain side, `cols x cols`).
    pub kernel_projection: ComplexMatrix,
    /// Projection onto the numerical cokernel (codomain side, `rows x rows`).
    pub cokernel_projection: ComplexMatrix,
    /// Number of singular values at or above the threshold.
    pub rank: usize,
    /// Threshold actually used.
    pub threshold: f64,
    /// Set when a singular value falls in `[tau/10, 10 tau]`: the cut sits
    /// inside a cluster and the rank call is not trustworthy.
    pub threshold_ambiguous: bool,
    /// Orthonormal columns spanning the numerical row space (`cols x rank`).
    pub right_basis: ComplexMatrix,
    /// Orthonormal columns spanning the numerical range (`rows x rank`).
    pub left_basis: ComplexMatrix,
}

impl SvdThreshold {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_projection.rows() - self.rank.min(self.kernel_projection.rows())
    }

    pub fn cokernel_dim(&self) -> usize {
        self.cokernel_projection.rows() - self.rank.min(self.cokernel_projection.rows())
    }
}

/// Singular values, numerical rank, and kernel/cokernel projections of `m`.
///
/// `tau` defaults to `1e-8 * ||m||` and must be positive when supplied.
pub fn svd_threshold(m: &ComplexMatrix, tau: Option<f64>) -> Result<SvdThreshold, KernelError> {
    if let Some(t) = tau {
        if !(t > 0.0) || !t.is_finite() {
            return Err(KernelError::BadThreshold { tau: t });
        }
    }
    let rows = m.rows();
    let cols = m.cols();
    let dim = rows + cols;
    let k = rows.min(cols);

    // Dilation acting on (x, y): (M* y, M x).
    let mut b = ComplexMatrix::zeros(dim, dim);
    b.set_block(0, cols, &m.adjoint());
    b.set_block(cols, 0, m);
    let sys = eig_hermitian(&b)?;

    let mut abs_desc: Vec<f64> = sys.eigenvalues().iter().map(|x| x.abs()).collect();
    abs_desc.sort_by(|a, b| b.total_cmp(a));
    let top = abs_desc.first().copied().unwrap_or(0.0);

    if top <= 1e-300 {
        // Zero matrix: everything is kernel.
        return Ok(SvdThreshold {
            singular_values: vec![0.0; k],
            kernel_projection: ComplexMatrix::identity(cols),
            cokernel_projection: ComplexMatrix::identity(rows),
            rank: 0,
            threshold: tau.unwrap_or(DEFAULT_RANK_FACTOR),
            threshold_ambiguous: false,
            right_basis: ComplexMatrix::zeros(cols, 0),
            left_basis: ComplexMatrix::zeros(rows, 0),
        });
    }
    let threshold = tau.unwrap_or(DEFAULT_RANK_FACTOR * top);

    // Eigenvalues of the dilation come in +/- sigma pairs (plus structural
    // zeros); adjacent pair averages give the singular values.
    let mut singular_values = Vec::with_capacity(k);
    for i in 0..k {
        singular_values.push(0.5 * (abs_desc[2 * i] + abs_desc[2 * i + 1]));
    }

    let threshold_ambiguous = singular_values
        .iter()
        .any(|&s| s >= threshold / 10.0 && s <= threshold * 10.0);

    // Null side: |lambda| < tau. The projection onto the span splits into the
    // domain and codomain blocks.
    let null_cols: Vec<usize> = (0..dim)
        .filter(|&j| sys.eigenvalues()[j].abs() < threshold)
        .collect();
    let mut null_basis = ComplexMatrix::zeros(dim, null_cols.len());
    for (jj, &j) in null_cols.iter().enumerate() {
        for i in 0..dim {
            null_basis[(i, jj)] = sys.basis()[(i, j)];
        }
    }
    let null_proj = null_basis.mul(&null_basis.adjoint());
    let kernel_projection = null_proj.block(0, 0, cols, cols);
    let cokernel_projection = null_proj.block(cols, cols, rows, rows);

    // Positive side at or above the threshold: eigenvector (v; u)/sqrt(2)
    // carries the right/left singular pair. Ordered descending to match the
    // singular value list.
    let pos_cols: Vec<usize> = (0..dim)
        .rev()
        .filter(|&j| sys.eigenvalues()[j] >= threshold)
        .collect();
    let rank = pos_cols.len();
    let sqrt2 = Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let mut right_basis = ComplexMatrix::zeros(cols, rank);
    let mut left_basis = ComplexMatrix::zeros(rows, rank);
    for (jj, &j) in pos_cols.iter().enumerate() {
        for i in 0..cols {
            right_basis[(i, jj)] = sys.basis()[(i, j)] * sqrt2;
        }
        for i in 0..rows {
            left_basis[(i, jj)] = sys.basis()[(cols + i, j)] * sqrt2;
        }
    }

    Ok(SvdThreshold {
        singular_values,
        kernel_projection,
        cokernel_projection,
        rank,
        threshold,
        threshold_ambiguous,
        right_basis,
        left_basis,
    })
}

/// The truncated raising map on `count` modes: `e_i -> e_{i+1}` as a
/// `(count+1) x count` matrix, every image mode kept.
pub fn truncated_shift(count: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(count + 1, count, |i, j| {
        if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::op_norm;
    use crate::random::{random_complex, rng_from_seed};

    #[test]
    fn identity_has_full_rank_and_zero_projections() {
        let m = ComplexMatrix::identity(5);
        let svd = svd_threshold(&m, Some(1e-8)).unwrap();
        assert_eq!(svd.rank, 5);
        assert!(svd.kernel_projection.frobenius_norm() < 1e-12);
        assert!(svd.cokernel_projection.frobenius_norm() < 1e-12);
        assert!(!svd.threshold_ambiguous);
        assert!(svd.singular_values.iter().all(|&s| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rank_one_diagonal() {
        let m = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let svd = svd_threshold(&m, Some(1e-8)).unwrap();
        assert_eq!(svd.rank, 1);
        let expected = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert!(svd.kernel_projection.approx_eq(&expected, 1e-12));
        assert!(svd.cokernel_projection.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn truncated_shift_has_cokernel_only() {
        // e_i -> e_{i+1} on 64 modes: injective, misses the first codomain mode.
        let s = truncated_shift(64);
        let svd = svd_threshold(&s, None).unwrap();
        assert_eq!(svd.rank, 64);
        assert!(svd.kernel_projection.frobenius_norm() < 1e-12);
        // Explicit null-space enumeration: only e_0 in the codomain is missed.
        let coker_trace = svd.cokernel_projection.trace().re;
        assert!((coker_trace - 1.0).abs() < 1e-10);
        assert!((svd.cokernel_projection[(0, 0)].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn projections_are_hermitian_idempotent() {
        let mut rng = rng_from_seed(9);
        for (rows, cols) in [(6, 6), (8, 5), (4, 9)] {
            let full = random_complex(&mut rng, rows, cols, 1.0);
            // Force a nontrivial kernel by zeroing two right-singular directions.
            let svd_full = svd_threshold(&full, None).unwrap();
            let m = if svd_full.rank >= 2 {
                let r = svd_full.rank - 2;
                let mut cut = ComplexMatrix::zeros(rows, cols);
                for t in 0..r {
                    let sv = svd_full.singular_values[t];
                    let u = svd_full.left_basis.block(0, t, rows, 1);
                    let v = svd_full.right_basis.block(0, t, cols, 1);
                    cut = &cut + &u.mul(&v.adjoint()).scaled_re(sv);
                }
                cut
            } else {
                full
            };
            let svd = svd_threshold(&m, None).unwrap();
            for p in [&svd.kernel_projection, &svd.cokernel_projection] {
                assert!(p.hermitian_defect() < 1e-12);
                assert!(p.mul(p).approx_eq(p, 1e-12));
            }
            let k_rank = svd.kernel_projection.trace().re.round() as usize;
            assert_eq!(k_rank, cols - svd.rank);
        }
    }

    #[test]
    fn reconstruction_from_bases() {
        let mut rng = rng_from_seed(14);
        let m = random_complex(&mut rng, 7, 5, 1.0);
        let svd = svd_threshold(&m, None).unwrap();
        let mut rebuilt = ComplexMatrix::zeros(7, 5);
        for t in 0..svd.rank {
            let u = svd.left_basis.block(0, t, 7, 1);
            let v = svd.right_basis.block(0, t, 5, 1);
            rebuilt = &rebuilt + &u.mul(&v.adjoint()).scaled_re(svd.singular_values[t]);
        }
        assert!(rebuilt.approx_eq(&m, 1e-10 * op_norm(&m).max(1.0)));
    }

    #[test]
    fn threshold_inside_cluster_is_flagged() {
        let m = ComplexMatrix::diag_real(&[1.0, 3e-6, 0.0]);
        let svd = svd_threshold(&m, Some(1e-6)).unwrap();
        assert!(svd.threshold_ambiguous);
        let clean = svd_threshold(&m, Some(1e-9)).unwrap();
        assert!(!clean.threshold_ambiguous);
        assert_eq!(clean.rank, 2);
    }

    #[test]
    fn rejects_bad_threshold() {
        let m = ComplexMatrix::identity(2);
        assert!(matches!(
            svd_threshold(&m, Some(0.0)),
            Err(KernelError::BadThreshold { .. })
        ));
        assert!(matches!(
            svd_threshold(&m, Some(-1.0)),
            Err(KernelError::BadThreshold { .. })
        ));
    }

    #[test]
    fn op_norm_agrees_with_dilation_top_singular_value() {
        let mut rng = rng_from_seed(21);
        let m = random_complex(&mut rng, 10, 10, 1.0);
        let svd = svd_threshold(&m, None).unwrap();
        let via_dilation = svd.singular_values[0];
        let via_gram = op_norm(&m);
        assert!((via_dilation - via_gram).abs() < 1e-10 * via_gram.max(1.0));
    }
}
