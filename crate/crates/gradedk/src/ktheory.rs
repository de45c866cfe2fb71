//! K-theory of finite-dimensional C*-algebras through projections and graded
//! homomorphism classes.
//!
//! The zeroth K-group of a finite direct sum of matrix algebras is a vector of
//! integers, one per block, read off as projection traces. Classes convert to
//! graded homomorphisms through `mu` (support on the ranges of the two
//! projections, zero operator, doubled grading) and back through `nu`
//! (projections associated to the grading and to the Cayley unitary). The
//! inverse of a class is conjugation by the block swap of the doubled space,
//! witnessed numerically by coupled-operator and compression homotopies.

use crate::eigen::{eig_hermitian, eigvals_hermitian, op_norm};
use crate::func::FunctionSpec;
use crate::graded::{GradedError, GradingOperator};
use crate::hom::{bounded_transform, cayley_unitary, HomError, SpectralHom};
use crate::matrix::{ComplexMatrix, KernelError};
use crate::svd::{svd_threshold, SvdThreshold};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KTheoryError {
    #[error("matrix is not a self-adjoint involution (defect {defect:.3e})")]
    NotInvolution { defect: f64 },
    #[error("matrix is not a projection (defect {defect:.3e})")]
    NotProjection { defect: f64 },
    #[error("projection trace {trace} is not integral within 1e-9")]
    NonIntegralRank { trace: f64 },
    #[error("block count mismatch: {0} vs {1}")]
    BlockMismatch(usize, usize),
    #[error("ambient grading is not a standard double")]
    AmbientNotDoubled,
    #[error("class difference leaks outside the support blocks (norm {norm:.3e})")]
    UnitizedLeak { norm: f64 },
    #[error("homotopy grid must be nonempty and strictly monotone")]
    BadGrid,
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Tolerance for involution and projection inputs.
const INVOLUTION_TOL: f64 = 1e-10;
/// Projection traces must be this close to integers.
const RANK_TOL: f64 = 1e-9;

/// A finite-dimensional C*-algebra: a direct sum of full matrix algebras.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteCStar {
    blocks: Vec<usize>,
}

impl FiniteCStar {
    pub fn new(blocks: Vec<usize>) -> Self {
        assert!(
            !blocks.is_empty() && blocks.iter().all(|&m| m >= 1),
            "blocks must be nonempty sizes"
        );
        Self { blocks }
    }

    pub fn scalars() -> Self {
        Self::new(vec![1])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

/// Formal difference of projections over an algebra, reduced per block to an
/// integer rank vector (the complete invariant at this scale).
#[derive(Clone, Debug, Serialize)]
pub struct KZeroClass {
    pub algebra: FiniteCStar,
    pub plus: Vec<ComplexMatrix>,
    pub minus: Vec<ComplexMatrix>,
    pub rank_vector: Vec<i64>,
}

fn projection_rank(p: &ComplexMatrix) -> Result<i64, KTheoryError> {
    let scale = p.frobenius_norm().max(1.0);
    let idem = p.mul(p).distance(p);
    let herm = p.hermitian_defect();
    let defect = idem.max(herm);
    if defect > 1e-12 * scale.max((p.rows() as f64).sqrt()) {
        return Err(KTheoryError::NotProjection {
            defect: defect / scale,
        });
    }
    let trace = p.trace().re;
    if (trace - trace.round()).abs() > RANK_TOL {
        return Err(KTheoryError::NonIntegralRank { trace });
    }
    Ok(trace.round() as i64)
}

impl KZeroClass {
    /// Validates the projections blockwise and records the rank vector.
    pub fn from_projections(
        algebra: FiniteCStar,
        plus: Vec<ComplexMatrix>,
        minus: Vec<ComplexMatrix>,
    ) -> Result<Self, KTheoryError> {
        if plus.len() != algebra.block_count() || minus.len() != algebra.block_count() {
            return Err(KTheoryError::BlockMismatch(
                plus.len().max(minus.len()),
                algebra.block_count(),
            ));
        }
        let mut rank_vector = Vec::with_capacity(algebra.block_count());
        for (p, q) in plus.iter().zip(&minus) {
            rank_vector.push(projection_rank(p)? - projection_rank(q)?);
        }
        Ok(Self {
            algebra,
            plus,
            minus,
            rank_vector,
        })
    }

    pub fn zero(algebra: FiniteCStar) -> Self {
        let blanks: Vec<ComplexMatrix> = algebra
            .blocks()
            .iter()
            .map(|&m| ComplexMatrix::zeros(m, m))
            .collect();
        let rank_vector = vec![0; algebra.block_count()];
        Self {
            algebra,
            plus: blanks.clone(),
            minus: blanks,
            rank_vector,
        }
    }
}

/// Projection associated to a self-adjoint involution: `p(w) = (w + 1)/2`.
pub fn proj_from_involution(w: &ComplexMatrix) -> Result<ComplexMatrix, KTheoryError> {
    let n = w.dim().map_err(KTheoryError::Kernel)?;
    let scale = (n as f64).sqrt().max(1.0);
    let herm = w.hermitian_defect();
    let sq = w.mul(w).distance(&ComplexMatrix::identity(n));
    let defect = herm.max(sq);
    if defect > INVOLUTION_TOL * scale {
        return Err(KTheoryError::NotInvolution {
            defect: defect / scale,
        });
    }
    Ok((&ComplexMatrix::identity(n) + w).scaled_re(0.5))
}

/// Graded homomorphism attached to a formal difference of projections, one
/// ambient block per algebra block.
///
/// Per block the ambient space is doubled: grading `diag(+1, -1)`, support
/// `diag(p, q)`, operator zero. Even functions evaluate to `f(0) diag(p, q)`;
/// odd functions evaluate to zero.
#[derive(Clone, Debug)]
pub struct BlockHom {
    pub algebra: FiniteCStar,
    pub parts: Vec<SpectralHom>,
}

impl BlockHom {
    pub fn new(algebra: FiniteCStar, parts: Vec<SpectralHom>) -> Result<Self, KTheoryError> {
        if parts.len() != algebra.block_count() {
            return Err(KTheoryError::BlockMismatch(
                parts.len(),
                algebra.block_count(),
            ));
        }
        Ok(Self { algebra, parts })
    }
}

/// Single-block `mu`: the homomorphism of the class `[p] - [q]`.
pub fn mu_block(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<SpectralHom, KTheoryError> {
    let np = p.dim().map_err(KTheoryError::Kernel)?;
    let nq = q.dim().map_err(KTheoryError::Kernel)?;
    let n = np.max(nq);
    let pad = |m: &ComplexMatrix| {
        let mut out = ComplexMatrix::zeros(n, n);
        out.set_block(0, 0, m);
        out
    };
    let support = pad(p).direct_sum(&pad(q));
    let grading = GradingOperator::standard(n, n);
    let operator = ComplexMatrix::zeros(2 * n, 2 * n);
    Ok(SpectralHom::new(grading, support, operator)?)
}

/// `mu`: class to graded homomorphism, blockwise.
pub fn mu(x: &KZeroClass) -> Result<BlockHom, KTheoryError> {
    let parts = x
        .plus
        .iter()
        .zip(&x.minus)
        .map(|(p, q)| mu_block(p, q))
        .collect::<Result<Vec<_>, _>>()?;
    BlockHom::new(x.algebra.clone(), parts)
}

/// Single-block `nu`: the pair of projections `(p(eps), p(eps u_phi))` and
/// their rank difference.
///
/// Also verifies that the difference of the two projections is supported in
/// the homomorphism's support blocks, the finite surrogate for landing in the
/// non-unitized part.
pub fn nu_block(phi: &SpectralHom) -> Result<(ComplexMatrix, ComplexMatrix, i64), KTheoryError> {
    let u = cayley_unitary(phi)?;
    let eps = phi.grading().matrix();
    let plus = proj_from_involution(eps)?;
    let eu = eps.mul(u.matrix());
    let minus = proj_from_involution(&eu)?;

    let diff = &plus - &minus;
    let p_supp = phi.support();
    let inside = p_supp.mul(&diff).mul(p_supp);
    let leak = diff.distance(&inside);
    if leak > 1e-10 * diff.frobenius_norm().max(1.0) {
        return Err(KTheoryError::UnitizedLeak { norm: leak });
    }

    let rank = projection_rank(&plus)? - projection_rank(&minus)?;
    Ok((plus, minus, rank))
}

/// `nu`: graded homomorphism class to rank data, blockwise.
pub fn nu(phi: &BlockHom) -> Result<KZeroClass, KTheoryError> {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut rank_vector = Vec::new();
    for part in &phi.parts {
        let (p, m, r) = nu_block(part)?;
        plus.push(p);
        minus.push(m);
        rank_vector.push(r);
    }
    Ok(KZeroClass {
        algebra: phi.algebra.clone(),
        plus,
        minus,
        rank_vector,
    })
}

/// Checks `nu(mu(x)) = x` on rank vectors; exact integer equality.
pub fn roundtrip_check(x: &KZeroClass) -> Result<bool, KTheoryError> {
    let back = nu(&mu(x)?)?;
    Ok(back.rank_vector == x.rank_vector)
}

/// Blockwise direct sum of homomorphism classes over the same algebra.
pub fn hom_direct_sum(phi: &BlockHom, psi: &BlockHom) -> Result<BlockHom, KTheoryError> {
    if phi.algebra != psi.algebra {
        return Err(KTheoryError::BlockMismatch(
            phi.algebra.block_count(),
            psi.algebra.block_count(),
        ));
    }
    let parts = phi
        .parts
        .iter()
        .zip(&psi.parts)
        .map(|(a, b)| a.direct_sum(b))
        .collect();
    BlockHom::new(phi.algebra.clone(), parts)
}

/// The swap unitary `[[0, 1], [1, 0]]` of a doubled space.
fn swap_unitary(half: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(2 * half, 2 * half);
    for i in 0..half {
        u[(i, half + i)] = Complex64::new(1.0, 0.0);
        u[(half + i, i)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Requires the grading to have the standard-double block form
/// `diag(eps0, -eps0)` and returns the half dimension.
fn doubled_half_dim(grading: &GradingOperator) -> Result<usize, KTheoryError> {
    let n = grading.dim();
    if n % 2 != 0 {
        return Err(KTheoryError::AmbientNotDoubled);
    }
    let half = n / 2;
    let eps = grading.matrix();
    let top = eps.block(0, 0, half, half);
    let bottom = eps.block(half, half, half, half);
    let off1 = eps.block(0, half, half, half);
    let off2 = eps.block(half, 0, half, half);
    let defect = top
        .distance(&bottom.map(|z| -z))
        .max(off1.frobenius_norm())
        .max(off2.frobenius_norm());
    if defect > 1e-12 * (n as f64).sqrt() {
        return Err(KTheoryError::AmbientNotDoubled);
    }
    Ok(half)
}

/// Inverse class: conjugation of the homomorphism by the degree-one swap of
/// the standard double. Requires the ambient grading to be a standard double.
pub fn hom_inverse(phi: &SpectralHom) -> Result<SpectralHom, KTheoryError> {
    let half = doubled_half_dim(phi.grading())?;
    let u = swap_unitary(half);
    Ok(phi.conjugated_raw(&u))
}

/// Numerical witness for a homotopy: norms measured along a parameter grid.
#[derive(Clone, Debug, Serialize)]
pub struct HomotopyTrace {
    pub t_grid: Vec<f64>,
    pub norms: Vec<f64>,
    /// Smallest |eigenvalue| of the coupled operator on its support, per t
    /// (present for the coupled-inverse homotopy).
    pub spectral_gaps: Option<Vec<f64>>,
    /// Per-t spectral upper bounds `sup { |f(x)| : |x| >= t }`.
    pub bounds: Option<Vec<f64>>,
    pub verdict: HomotopyVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyVerdict {
    /// Norms never increase along the grid direction of the experiment.
    pub monotone: bool,
    /// Every gap/bound condition requested by the experiment held.
    pub bounds_hold: bool,
    /// Norm at the last grid point.
    pub terminal_norm: f64,
}

fn validate_grid(t_grid: &[f64], increasing: bool) -> Result<(), KTheoryError> {
    if t_grid.is_empty() {
        return Err(KTheoryError::BadGrid);
    }
    let ok = t_grid.windows(2).all(|w| {
        if increasing {
            w[1] > w[0]
        } else {
            w[1] < w[0]
        }
    }) && t_grid.iter().all(|t| t.is_finite() && *t >= 0.0);
    if ok {
        Ok(())
    } else {
        Err(KTheoryError::BadGrid)
    }
}

/// The coupled operator implementing the inverse-class homotopy at coupling
/// `t`, as a homomorphism on the doubled-again ambient space.
///
/// With `E` the ambient grading, `P` the support, `u` the block swap and `D`
/// the generator, the coupled generator is
/// `[[D, t E P u], [t u P E, u D u]]` with grading `diag(E, E)` and support
/// `diag(P, u P u)`. At `t = 0` this is exactly `phi (+) u phi u*`; its square
/// is block diagonal `diag(D^2 + t^2 P, u (D^2 + t^2 P) u)`, so the spectrum
/// on the support stays outside `(-t, t)`.
pub fn coupled_inverse_hom(phi: &SpectralHom, t: f64) -> Result<SpectralHom, KTheoryError> {
    let half = doubled_half_dim(phi.grading())?;
    let n = 2 * half;
    let u = swap_unitary(half);
    let e = phi.grading().matrix();
    let p = phi.support();
    let d = phi.operator();
    let inverse_part = phi.conjugated_raw(&u);

    let corner = e.mul(p).mul(&u).scaled_re(t);
    let mut operator = ComplexMatrix::zeros(2 * n, 2 * n);
    operator.set_block(0, 0, d);
    operator.set_block(0, n, &corner);
    operator.set_block(n, 0, &corner.adjoint());
    operator.set_block(n, n, inverse_part.operator());

    let grading = phi.grading().direct_sum(phi.grading());
    let support = p.direct_sum(inverse_part.support());
    Ok(SpectralHom::new(grading, support, operator)?)
}

/// Measures `||f(coupled operator at t)||` along an increasing grid, recording
/// the spectral gaps and the tail bounds `sup_{|x| >= t} |f|`.
pub fn inverse_homotopy_norms(
    phi: &SpectralHom,
    f: &FunctionSpec,
    t_grid: &[f64],
) -> Result<HomotopyTrace, KTheoryError> {
    validate_grid(t_grid, true)?;
    let mut norms = Vec::with_capacity(t_grid.len());
    let mut gaps = Vec::with_capacity(t_grid.len());
    let mut bounds = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let coupled = coupled_inverse_hom(phi, t)?;
        let image = coupled.apply(f)?;
        norms.push(op_norm(image.value()));

        // Spectrum of the coupled operator restricted to its support.
        let gap = support_spectrum_abs_min(&coupled)?;
        gaps.push(gap);
        let spectrum = eigvals_hermitian(coupled.operator())?;
        bounds.push(f.tail_sup(t, &spectrum));
    }
    let monotone = norms.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let bounds_hold = t_grid
        .iter()
        .zip(&gaps)
        .all(|(&t, &g)| g >= t - 1e-9)
        && norms
            .iter()
            .zip(&bounds)
            .all(|(&n, &b)| n <= b + 1e-10);
    let terminal_norm = *norms.last().unwrap();
    Ok(HomotopyTrace {
        t_grid: t_grid.to_vec(),
        norms,
        spectral_gaps: Some(gaps),
        bounds: Some(bounds),
        verdict: HomotopyVerdict {
            monotone,
            bounds_hold,
            terminal_norm,
        },
    })
}

/// Smallest |eigenvalue| of the operator compressed to its support range;
/// infinity for zero support.
fn support_spectrum_abs_min(phi: &SpectralHom) -> Result<f64, KTheoryError> {
    let svd = svd_threshold(phi.support(), Some(0.5))?;
    if svd.rank == 0 {
        return Ok(f64::INFINITY);
    }
    let basis = &svd.left_basis;
    let compressed = basis.adjoint().mul(phi.operator()).mul(basis);
    let vals = eigvals_hermitian(&compressed)?;
    Ok(vals.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs())))
}

/// Fredholm index data of an off-diagonal corner: kernel and cokernel
/// projections as a class over the scalars.
pub fn fredholm_index(
    corner: &ComplexMatrix,
    tau: Option<f64>,
) -> Result<(KZeroClass, SvdThreshold), KTheoryError> {
    let svd = svd_threshold(corner, tau)?;
    let class = KZeroClass::from_projections(
        FiniteCStar::scalars(),
        vec![svd.kernel_projection.clone()],
        vec![svd.cokernel_projection.clone()],
    )?;
    Ok((class, svd))
}

/// Endpoint homomorphism of the compression homotopy: support on the kernel
/// of the bounded transform (kernel of the corner plus kernel of its
/// adjoint), zero operator.
pub fn compression_endpoint(phi: &SpectralHom) -> Result<SpectralHom, KTheoryError> {
    let eps = phi.grading();
    let g = bounded_transform(phi.operator(), eps)?;
    let (even_basis, odd_basis) = grading_eigenbases(eps)?;
    // Corner of the degree-one G: odd <- even.
    let corner = odd_basis.adjoint().mul(&g).mul(&even_basis);
    let svd = svd_threshold(&corner, None)?;
    let kernel_full = even_basis
        .mul(&svd.kernel_projection)
        .mul(&even_basis.adjoint());
    let cokernel_full = odd_basis
        .mul(&svd.cokernel_projection)
        .mul(&odd_basis.adjoint());
    let support = &kernel_full + &cokernel_full;
    let n = eps.dim();
    Ok(SpectralHom::new(
        eps.clone(),
        support,
        ComplexMatrix::zeros(n, n),
    )?)
}

/// Orthonormal bases of the even and odd eigenspaces of a grading.
pub(crate) fn grading_eigenbases(
    eps: &GradingOperator,
) -> Result<(ComplexMatrix, ComplexMatrix), KTheoryError> {
    let sys = eig_hermitian(eps.matrix())?;
    let n = eps.dim();
    let mut even_cols = Vec::new();
    let mut odd_cols = Vec::new();
    for j in 0..n {
        if sys.eigenvalues()[j] > 0.0 {
            even_cols.push(j);
        } else {
            odd_cols.push(j);
        }
    }
    let collect = |cols: &[usize]| {
        let mut m = ComplexMatrix::zeros(n, cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, jj)] = sys.basis()[(i, j)];
            }
        }
        m
    };
    Ok((collect(&even_cols), collect(&odd_cols)))
}

/// Measures `||f(t^{-1} G(D)) - phi_x(f)||` along a grid descending toward
/// zero, where `phi_x` is the compression endpoint.
pub fn compression_homotopy(
    phi: &SpectralHom,
    f: &FunctionSpec,
    t_grid: &[f64],
) -> Result<HomotopyTrace, KTheoryError> {
    validate_grid(t_grid, false)?;
    let eps = phi.grading();
    let g = bounded_transform(phi.operator(), eps)?;
    let g_sys = eig_hermitian(&g)?;
    let endpoint = compression_endpoint(phi)?;
    let target = endpoint.apply(f)?;

    let mut norms = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let evaluated = if t == 0.0 {
            target.value().clone()
        } else {
            g_sys.apply(|x| f.eval(x / t))?
        };
        norms.push(op_norm(&(&evaluated - target.value())));
    }
    let monotone = norms.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let terminal_norm = *norms.last().unwrap();
    Ok(HomotopyTrace {
        t_grid: t_grid.to_vec(),
        norms,
        spectral_gaps: None,
        bounds: None,
        verdict: HomotopyVerdict {
            monotone,
            bounds_hold: true,
            terminal_norm,
        },
    })
}
