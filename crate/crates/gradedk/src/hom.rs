//! Finite-dimensional graded *-homomorphisms out of the functions vanishing
//! at infinity on the line.
//!
//! A homomorphism is stored in its converse-functional-calculus normal form:
//! an ambient grading `eps`, a graded support projection `P`, and a degree-one
//! Hermitian operator `D` supported on `range(P)`. Evaluation is
//! `phi(f) = f(D) P`, zero on the complement of the support. Storing the
//! normal form instead of function images makes the homomorphism laws
//! automatic and keeps recovery lossless.

use crate::eigen::{apply_function, eig_hermitian, op_norm};
use crate::func::{resolvent_minus, FunctionError, FunctionSpec};
use crate::graded::{GradedError, GradedMatrix, GradingOperator};
use crate::matrix::{ComplexMatrix, KernelError};
use crate::svd::svd_threshold;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HomError {
    #[error("support is not a graded projection (defect {defect:.3e})")]
    InvalidSupport { defect: f64 },
    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitianOperator { defect: f64 },
    #[error("operator is not degree one (defect {defect:.3e})")]
    NotDegreeOne { defect: f64 },
    #[error("operator leaks outside the support (defect {defect:.3e})")]
    UnsupportedOperator { defect: f64 },
    #[error("matrix is not the resolvent image of a self-adjoint operator (Hermiticity defect {defect:.3e})")]
    NotResolventImage { defect: f64 },
    #[error("Cayley transform fails the unitary involution laws (defect {defect:.3e})")]
    CayleyDefect { defect: f64 },
    #[error("ambient dimensions disagree: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Validation tolerance (relative) for the stored normal form.
const FORM_TOL: f64 = 1e-9;

/// A graded *-homomorphism in normal form `(eps, P, D)`.
#[derive(Clone, Debug)]
pub struct SpectralHom {
    grading: GradingOperator,
    support: ComplexMatrix,
    operator: ComplexMatrix,
}

impl SpectralHom {
    /// Validates the normal form and canonicalizes the operator onto the
    /// degree-one Hermitian manifold (the projection moves it by no more than
    /// the validation tolerance).
    pub fn new(
        grading: GradingOperator,
        support: ComplexMatrix,
        operator: ComplexMatrix,
    ) -> Result<Self, HomError> {
        let n = grading.dim();
        if support.rows() != n || !support.is_square() {
            return Err(HomError::AmbientMismatch(support.rows(), n));
        }
        if operator.rows() != n || !operator.is_square() {
            return Err(HomError::AmbientMismatch(operator.rows(), n));
        }
        let scale_p = support.frobenius_norm().max(1.0);
        let idem = support.mul(&support).distance(&support);
        let herm = support.hermitian_defect();
        let graded_defect = grading.conjugate(&support).distance(&support);
        let p_defect = idem.max(herm).max(graded_defect);
        if p_defect > FORM_TOL * scale_p {
            return Err(HomError::InvalidSupport {
                defect: p_defect / scale_p,
            });
        }

        let scale_d = operator.frobenius_norm().max(1.0);
        let herm_d = operator.hermitian_defect();
        if herm_d > FORM_TOL * scale_d {
            return Err(HomError::NotHermitianOperator {
                defect: herm_d / scale_d,
            });
        }
        let odd_defect = grading
            .conjugate(&operator)
            .distance(&operator.map(|z| -z));
        if odd_defect > FORM_TOL * scale_d {
            return Err(HomError::NotDegreeOne {
                defect: odd_defect / scale_d,
            });
        }
        let compressed = support.mul(&operator).mul(&support);
        let leak = compressed.distance(&operator);
        if leak > FORM_TOL * scale_d {
            return Err(HomError::UnsupportedOperator {
                defect: leak / scale_d,
            });
        }

        // Canonicalize: compress, symmetrize, project to odd parity. For valid
        // input this moves the operator by at most the tolerance and makes the
        // stored invariants hold to machine precision.
        let herm = compressed.hermitian_part();
        let odd = (&herm - &grading.conjugate(&herm)).scaled_re(0.5);
        Ok(Self {
            grading,
            support,
            operator: odd,
        })
    }

    /// The zero homomorphism on the given ambient space.
    pub fn zero(grading: GradingOperator) -> Self {
        let n = grading.dim();
        Self {
            grading,
            support: ComplexMatrix::zeros(n, n),
            operator: ComplexMatrix::zeros(n, n),
        }
    }

    /// Full-support homomorphism generated by a degree-one Hermitian operator.
    pub fn from_operator(
        grading: GradingOperator,
        operator: ComplexMatrix,
    ) -> Result<Self, HomError> {
        let n = grading.dim();
        Self::new(grading, ComplexMatrix::identity(n), operator)
    }

    pub fn ambient_dim(&self) -> usize {
        self.grading.dim()
    }

    pub fn grading(&self) -> &GradingOperator {
        &self.grading
    }

    pub fn support(&self) -> &ComplexMatrix {
        &self.support
    }

    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }

    pub fn support_rank(&self) -> usize {
        self.support.trace().re.round().max(0.0) as usize
    }

    pub fn is_zero(&self) -> bool {
        self.support.frobenius_norm() < 1e-12
    }

    /// Evaluates the homomorphism: `f(D) P`, zero on the support complement.
    pub fn apply(&self, f: &FunctionSpec) -> Result<GradedMatrix, HomError> {
        let fd = apply_function(&self.operator, |x| f.eval(x))?;
        let value = fd.mul(&self.support);
        Ok(GradedMatrix::new(value, self.grading.clone())?)
    }

    /// Evaluates a raw callable through the same rule; used where the
    /// argument is deliberately not a vanishing-at-infinity spec.
    pub fn apply_raw(
        &self,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<ComplexMatrix, HomError> {
        let fd = apply_function(&self.operator, f)?;
        Ok(fd.mul(&self.support))
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &SpectralHom) -> SpectralHom {
        SpectralHom {
            grading: self.grading.direct_sum(&other.grading),
            support: self.support.direct_sum(&other.support),
            operator: self.operator.direct_sum(&other.operator),
        }
    }

    /// Conjugation by a unitary of the ambient space (grading unchanged).
    pub(crate) fn conjugated_raw(&self, u: &ComplexMatrix) -> SpectralHom {
        let ua = u.adjoint();
        SpectralHom {
            grading: self.grading.clone(),
            support: u.mul(&self.support).mul(&ua),
            operator: u.mul(&self.operator).mul(&ua),
        }
    }
}

impl Serialize for SpectralHom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            epsilon: &'a ComplexMatrix,
            support: &'a ComplexMatrix,
            operator: &'a ComplexMatrix,
        }
        Wire {
            epsilon: self.grading.matrix(),
            support: &self.support,
            operator: &self.operator,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralHom {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            epsilon: ComplexMatrix,
            support: ComplexMatrix,
            operator: ComplexMatrix,
        }
        let w = Wire::deserialize(deserializer)?;
        let grading = GradingOperator::new(w.epsilon).map_err(D::Error::custom)?;
        SpectralHom::new(grading, w.support, w.operator).map_err(D::Error::custom)
    }
}

/// Evaluation of a homomorphism on a function spec.
pub fn hom_apply(phi: &SpectralHom, f: &FunctionSpec) -> Result<GradedMatrix, HomError> {
    phi.apply(f)
}

/// Recovers the normal form `(P, D)` from the image of the resolvent
/// `r_-(x) = (x - i)^{-1}` under an unknown graded *-homomorphism.
///
/// The support is the range of the image; on that range the operator is the
/// inverse of the restriction plus `i`. Inputs that are not resolvent images
/// of a self-adjoint operator are detected through the Hermiticity of the
/// recovered operator.
pub fn recover_operator(
    resolvent_image: &ComplexMatrix,
    grading: &GradingOperator,
) -> Result<SpectralHom, HomError> {
    let n = resolvent_image.dim().map_err(HomError::Kernel)?;
    if n != grading.dim() {
        return Err(HomError::AmbientMismatch(n, grading.dim()));
    }
    let svd = svd_threshold(resolvent_image, None)?;
    if svd.rank == 0 {
        return Ok(SpectralHom::zero(grading.clone()));
    }
    // Orthonormal basis of the range.
    let q = &svd.left_basis;
    let restricted = q.adjoint().mul(resolvent_image).mul(q);
    let mut d_small = restricted.inverse()?;
    for i in 0..svd.rank {
        d_small[(i, i)] += Complex64::new(0.0, 1.0);
    }
    let herm_defect = d_small.hermitian_defect();
    if herm_defect > 1e-8 * d_small.frobenius_norm().max(1.0) {
        return Err(HomError::NotResolventImage {
            defect: herm_defect / d_small.frobenius_norm().max(1.0),
        });
    }
    let support = q.mul(&q.adjoint());
    let operator = q.mul(&d_small).mul(&q.adjoint());
    SpectralHom::new(grading.clone(), support, operator)
}

/// Cayley unitary of a homomorphism on the unitized ambient algebra.
#[derive(Clone, Debug)]
pub struct CayleyUnitary {
    u: ComplexMatrix,
}

impl CayleyUnitary {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }
}

/// `u = 1 + 2i phi(r_-)`, the image of the Cayley transform `(t+i)/(t-i)`
/// under the unitized homomorphism.
///
/// Validates that `u` is unitary and that `eps u` is a self-adjoint
/// involution; failure means `phi` was not a graded homomorphism.
pub fn cayley_unitary(phi: &SpectralHom) -> Result<CayleyUnitary, HomError> {
    let n = phi.ambient_dim();
    let rm = resolvent_minus();
    let image = phi.apply(&rm)?;
    let u = &ComplexMatrix::identity(n) + &image.value().scaled(Complex64::new(0.0, 2.0));

    let eye = ComplexMatrix::identity(n);
    let scale = (n as f64).sqrt().max(1.0);
    let unitary_defect = u.adjoint().mul(&u).distance(&eye);
    let eu = phi.grading().matrix().mul(&u);
    let invol_defect = eu.mul(&eu).distance(&eye).max(eu.hermitian_defect());
    let defect = unitary_defect.max(invol_defect);
    if defect > 1e-10 * scale {
        return Err(HomError::CayleyDefect {
            defect: defect / scale,
        });
    }
    Ok(CayleyUnitary { u })
}

/// Bounded transform `G(D) = D (D^2 + 1)^{-1/2}` of a degree-one Hermitian
/// operator: Hermitian, degree one, norm strictly below one.
pub fn bounded_transform(
    operator: &ComplexMatrix,
    grading: &GradingOperator,
) -> Result<ComplexMatrix, HomError> {
    let n = operator.dim().map_err(HomError::Kernel)?;
    if n != grading.dim() {
        return Err(HomError::AmbientMismatch(n, grading.dim()));
    }
    let scale = operator.frobenius_norm().max(1.0);
    let odd_defect = grading
        .conjugate(operator)
        .distance(&operator.map(|z| -z));
    if odd_defect > FORM_TOL * scale {
        return Err(HomError::NotDegreeOne {
            defect: odd_defect / scale,
        });
    }
    Ok(apply_function(operator, |x| {
        Complex64::new(x / (x * x + 1.0).sqrt(), 0.0)
    })?)
}

/// Spectral radius of the generator of a homomorphism.
pub fn operator_spectral_radius(phi: &SpectralHom) -> Result<f64, HomError> {
    Ok(eig_hermitian(phi.operator())?.spectral_radius())
}

/// Convenience: `||phi(f)||` through the operator norm.
pub fn hom_apply_norm(phi: &SpectralHom, f: &FunctionSpec) -> Result<f64, HomError> {
    Ok(op_norm(phi.apply(f)?.value()))
}
