//! Graded matrix *-algebras: grading operators, parity decomposition, and the
//! Koszul-signed graded tensor product.
//!
//! Every grading here is even and carried by an explicit self-adjoint unitary
//! `epsilon`; conjugation by it is the grading automorphism. The graded tensor
//! product of elements over two graded algebras is realized concretely on the
//! Kronecker-product space: for `b` homogeneous,
//! `a (x) b  ->  (a eps_1^{deg b}) (x) b`, extended bilinearly over parity
//! parts. With this twist the product and involution obey the sign rules
//! `(a(x)b)(a'(x)b') = (-1)^{deg b deg a'} (aa')(x)(bb')` and
//! `(a(x)b)* = (-1)^{deg a deg b} (a*)(x)(b*)`.

use crate::matrix::{ComplexMatrix, KernelError};
use serde::de::Error as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute per-scale tolerance for grading-operator invariants.
pub const GRADING_TOL: f64 = 1e-12;

/// Relative tolerance under which an element counts as homogeneous.
pub const HOMOGENEITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GradedError {
    #[error("grading operator fails epsilon* = epsilon or epsilon^2 = 1 (defect {defect:.3e})")]
    InvalidGrading { defect: f64 },
    #[error("element is not homogeneous: even norm {even:.3e}, odd norm {odd:.3e}")]
    NotHomogeneous { even: f64, odd: f64 },
    #[error("grading dimension {grading} does not match element dimension {element}")]
    GradingMismatch { grading: usize, element: usize },
    #[error("factor dimensions {0} x {1} do not assemble to product dimension {2}")]
    FactorMismatch(usize, usize, usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// A self-adjoint unitary implementing an even grading by conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct GradingOperator {
    epsilon: ComplexMatrix,
}

impl GradingOperator {
    pub fn new(epsilon: ComplexMatrix) -> Result<Self, GradedError> {
        let n = epsilon.dim().map_err(GradedError::Kernel)?;
        let scale = (n as f64).sqrt().max(1.0);
        let herm = epsilon.hermitian_defect();
        let sq = epsilon
            .mul(&epsilon)
            .distance(&ComplexMatrix::identity(n));
        let defect = herm.max(sq);
        if defect > GRADING_TOL * scale {
            return Err(GradedError::InvalidGrading {
                defect: defect / scale,
            });
        }
        Ok(Self { epsilon })
    }

    /// Trivial grading: everything even.
    pub fn trivial(n: usize) -> Self {
        Self {
            epsilon: ComplexMatrix::identity(n),
        }
    }

    /// `diag(+1 x p, -1 x q)`.
    pub fn standard(p: usize, q: usize) -> Self {
        let mut signs = vec![1.0; p];
        signs.extend(std::iter::repeat(-1.0).take(q));
        Self {
            epsilon: ComplexMatrix::diag_real(&signs),
        }
    }

    pub fn dim(&self) -> usize {
        self.epsilon.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.epsilon
    }

    /// The grading automorphism `a -> eps a eps`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.epsilon.mul(a).mul(&self.epsilon)
    }

    /// Projection onto the even (+1) eigenspace.
    pub fn even_projection(&self) -> ComplexMatrix {
        (&ComplexMatrix::identity(self.dim()) + &self.epsilon).scaled_re(0.5)
    }

    /// Projection onto the odd (-1) eigenspace.
    pub fn odd_projection(&self) -> ComplexMatrix {
        (&ComplexMatrix::identity(self.dim()) - &self.epsilon).scaled_re(0.5)
    }

    /// Grading of the Kronecker-product space.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            epsilon: self.epsilon.kron(&other.epsilon),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            epsilon: self.epsilon.direct_sum(&other.epsilon),
        }
    }
}

/// Grading of the doubled space: `diag(eps, -eps)`.
pub fn standard_double(eps: &GradingOperator) -> GradingOperator {
    GradingOperator {
        epsilon: eps.matrix().direct_sum(&-eps.matrix()),
    }
}

/// A matrix together with the ambient grading it is measured against.
#[derive(Clone, Debug)]
pub struct GradedMatrix {
    value: ComplexMatrix,
    grading: GradingOperator,
}

/// Parity tag of a homogeneous element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Even,
    Odd,
}

impl Degree {
    pub fn as_u8(self) -> u8 {
        match self {
            Degree::Even => 0,
            Degree::Odd => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Degree::Even => Degree::Odd,
            Degree::Odd => Degree::Even,
        }
    }

    /// Degree additivity under products and tensors.
    pub fn add(self, other: Self) -> Self {
        if self == other {
            Degree::Even
        } else {
            Degree::Odd
        }
    }
}

impl GradedMatrix {
    pub fn new(value: ComplexMatrix, grading: GradingOperator) -> Result<Self, GradedError> {
        let n = value.dim().map_err(GradedError::Kernel)?;
        if n != grading.dim() {
            return Err(GradedError::GradingMismatch {
                grading: grading.dim(),
                element: n,
            });
        }
        Ok(Self { value, grading })
    }

    pub fn value(&self) -> &ComplexMatrix {
        &self.value
    }

    pub fn grading(&self) -> &GradingOperator {
        &self.grading
    }

    /// Even and odd parts: `(a + eps a eps)/2` and `(a - eps a eps)/2`.
    pub fn parity_parts(&self) -> (ComplexMatrix, ComplexMatrix) {
        let conj = self.grading.conjugate(&self.value);
        let even = (&self.value + &conj).scaled_re(0.5);
        let odd = (&self.value - &conj).scaled_re(0.5);
        (even, odd)
    }

    /// Parity of the element, when one part dominates within
    /// [`HOMOGENEITY_TOL`]; `None` for genuinely mixed elements.
    pub fn degree(&self) -> Option<Degree> {
        let (even, odd) = self.parity_parts();
        let scale = self.value.frobenius_norm();
        if scale == 0.0 {
            return Some(Degree::Even);
        }
        if odd.frobenius_norm() <= HOMOGENEITY_TOL * scale {
            Some(Degree::Even)
        } else if even.frobenius_norm() <= HOMOGENEITY_TOL * scale {
            Some(Degree::Odd)
        } else {
            None
        }
    }

    pub fn homogeneous_degree(&self) -> Result<Degree, GradedError> {
        self.degree().ok_or_else(|| {
            let (even, odd) = self.parity_parts();
            GradedError::NotHomogeneous {
                even: even.frobenius_norm(),
                odd: odd.frobenius_norm(),
            }
        })
    }
}

impl Serialize for GradedMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            rows: usize,
            cols: usize,
            re: Vec<f64>,
            im: Vec<f64>,
            epsilon: &'a ComplexMatrix,
        }
        Wire {
            rows: self.value.rows(),
            cols: self.value.cols(),
            re: self.value.entries().iter().map(|z| z.re).collect(),
            im: self.value.entries().iter().map(|z| z.im).collect(),
            epsilon: self.grading.matrix(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GradedMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            rows: usize,
            cols: usize,
            re: Vec<f64>,
            im: Vec<f64>,
            epsilon: ComplexMatrix,
        }
        let w = Wire::deserialize(deserializer)?;
        if w.re.len() != w.im.len() {
            return Err(D::Error::custom("re/im length mismatch"));
        }
        let data = w
            .re
            .iter()
            .zip(&w.im)
            .map(|(&re, &im)| num_complex::Complex64::new(re, im))
            .collect();
        let value = ComplexMatrix::new(w.rows, w.cols, data).map_err(D::Error::custom)?;
        let grading = GradingOperator::new(w.epsilon).map_err(D::Error::custom)?;
        GradedMatrix::new(value, grading).map_err(D::Error::custom)
    }
}

/// Graded (Koszul-signed) tensor product, extended bilinearly over parity
/// parts: the represented matrix is `a (x) b_even + (a eps_1) (x) b_odd` on
/// the Kronecker space graded by `eps_1 (x) eps_2`.
pub fn graded_tensor(a: &GradedMatrix, b: &GradedMatrix) -> GradedMatrix {
    let (b_even, b_odd) = b.parity_parts();
    let twisted = a.value().mul(a.grading().matrix());
    let value = &a.value().kron(&b_even) + &twisted.kron(&b_odd);
    GradedMatrix {
        value,
        grading: a.grading().tensor(b.grading()),
    }
}

/// Graded tensor product of homogeneous elements; errors when either factor
/// is not homogeneous within tolerance.
pub fn graded_tensor_homogeneous(
    a: &GradedMatrix,
    b: &GradedMatrix,
) -> Result<GradedMatrix, GradedError> {
    a.homogeneous_degree()?;
    b.homogeneous_degree()?;
    Ok(graded_tensor(a, b))
}

/// Moves a represented graded tensor into the plain (ungraded) tensor product
/// by conjugating with the self-adjoint block unitary
/// `V = P_even(eps_1) (x) 1 + P_odd(eps_1) (x) eps_B`.
///
/// On homogeneous generators the image is `a (x) eps_B^{deg a} b`, and the
/// image algebra multiplies with ordinary (unsigned) matrix products.
pub fn even_grading_reblock(
    product: &ComplexMatrix,
    eps_a: &GradingOperator,
    eps_b: &GradingOperator,
) -> Result<ComplexMatrix, GradedError> {
    let n = product.dim().map_err(GradedError::Kernel)?;
    if eps_a.dim() * eps_b.dim() != n {
        return Err(GradedError::FactorMismatch(eps_a.dim(), eps_b.dim(), n));
    }
    let eye_b = ComplexMatrix::identity(eps_b.dim());
    let v = &eps_a.even_projection().kron(&eye_b)
        + &eps_a.odd_projection().kron(eps_b.matrix());
    Ok(v.mul(product).mul(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_complex, random_homogeneous, rng_from_seed, LabRng};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn grading_operator_validation() {
        assert!(GradingOperator::new(ComplexMatrix::diag_real(&[1.0, -1.0])).is_ok());
        assert!(matches!(
            GradingOperator::new(ComplexMatrix::diag_real(&[1.0, -0.5])),
            Err(GradedError::InvalidGrading { .. })
        ));
    }

    #[test]
    fn parity_parts_under_standard_grading() {
        let eps = GradingOperator::standard(1, 1);
        let off = GradedMatrix::new(pauli_x(), eps.clone()).unwrap();
        let (even, odd) = off.parity_parts();
        assert!(even.frobenius_norm() < 1e-15);
        assert!(odd.approx_eq(&pauli_x(), 1e-15));
        assert_eq!(off.degree(), Some(Degree::Odd));

        let diag = GradedMatrix::new(ComplexMatrix::diag_real(&[2.0, 3.0]), eps).unwrap();
        let (even, odd) = diag.parity_parts();
        assert!(odd.frobenius_norm() < 1e-15);
        assert!(even.approx_eq(diag.value(), 1e-15));
        assert_eq!(diag.degree(), Some(Degree::Even));
    }

    #[test]
    fn parity_parts_conjugation_oracle() {
        let mut rng = rng_from_seed(2);
        let eps = GradingOperator::standard(2, 2);
        let a = GradedMatrix::new(random_complex(&mut rng, 4, 4, 1.0), eps.clone()).unwrap();
        let (even, odd) = a.parity_parts();
        assert!((&even + &odd).approx_eq(a.value(), 1e-14));
        assert!(eps.conjugate(&even).approx_eq(&even, 1e-13));
        assert!(eps.conjugate(&odd).approx_eq(&odd.map(|z| -z), 1e-13));
    }

    #[test]
    fn degree_one_squares_pick_up_the_koszul_sign() {
        let eps = GradingOperator::standard(1, 1);
        let x = GradedMatrix::new(pauli_x(), eps).unwrap();
        let xx = graded_tensor_homogeneous(&x, &x).unwrap();
        let sq = xx.value().mul(xx.value());
        let expected = ComplexMatrix::identity(4).scaled_re(-1.0);
        assert!(sq.approx_eq(&expected, 1e-14), "X (x) X should square to -1");
    }

    #[test]
    fn involution_sign_for_odd_odd() {
        let mut rng = rng_from_seed(8);
        let eps1 = GradingOperator::standard(2, 1);
        let eps2 = GradingOperator::standard(1, 2);
        let a = random_homogeneous(&mut rng, &eps1, Degree::Odd);
        let b = random_homogeneous(&mut rng, &eps2, Degree::Odd);
        let ab = graded_tensor(&a, &b);
        let a_star = GradedMatrix::new(a.value().adjoint(), eps1).unwrap();
        let b_star = GradedMatrix::new(b.value().adjoint(), eps2).unwrap();
        let star_tensor = graded_tensor(&a_star, &b_star);
        // deg a * deg b = 1: adjoint of the product is minus the product of adjoints.
        assert!(ab
            .value()
            .adjoint()
            .approx_eq(&star_tensor.value().map(|z| -z), 1e-13));
    }

    #[test]
    fn degree_zero_factor_reduces_to_plain_kron() {
        let mut rng = rng_from_seed(12);
        let eps1 = GradingOperator::standard(2, 2);
        let eps2 = GradingOperator::standard(2, 1);
        let a = random_homogeneous(&mut rng, &eps1, Degree::Even);
        let b = GradedMatrix::new(random_complex(&mut rng, 3, 3, 1.0), eps2).unwrap();
        let graded = graded_tensor(&a, &b);
        // The twist acts on the left factor by eps^{deg b}; for the product
        // rule test the degree-zero case must coincide with the plain kron
        // when b is even, and in general a (x) b with a even is untwisted in
        // the reblocked picture. Here check the direct statement: for even b
        // parts the twist is absent.
        let (b_even, _) = b.parity_parts();
        let untwisted = a.value().kron(&b_even);
        let b_even_graded = GradedMatrix::new(b_even, b.grading().clone()).unwrap();
        let graded_even = graded_tensor(&a, &b_even_graded);
        assert!(graded_even.value().approx_eq(&untwisted, 1e-13));
        drop(graded);
    }

    #[test]
    fn product_rule_and_degree_additivity() {
        let mut rng = rng_from_seed(3);
        let eps1 = GradingOperator::standard(2, 1);
        let eps2 = GradingOperator::standard(1, 1);
        for (da, db, da2, db2) in [
            (Degree::Even, Degree::Odd, Degree::Odd, Degree::Even),
            (Degree::Odd, Degree::Odd, Degree::Odd, Degree::Odd),
            (Degree::Even, Degree::Even, Degree::Odd, Degree::Odd),
        ] {
            let a = random_homogeneous(&mut rng, &eps1, da);
            let b = random_homogeneous(&mut rng, &eps2, db);
            let a2 = random_homogeneous(&mut rng, &eps1, da2);
            let b2 = random_homogeneous(&mut rng, &eps2, db2);
            let lhs = graded_tensor(&a, &b).value().mul(graded_tensor(&a2, &b2).value());
            let aa2 = GradedMatrix::new(a.value().mul(a2.value()), eps1.clone()).unwrap();
            let bb2 = GradedMatrix::new(b.value().mul(b2.value()), eps2.clone()).unwrap();
            let sign = if db == Degree::Odd && da2 == Degree::Odd {
                -1.0
            } else {
                1.0
            };
            let rhs = graded_tensor(&aa2, &bb2).value().scaled_re(sign);
            assert!(lhs.approx_eq(&rhs, 1e-12), "product rule {da:?}{db:?}{da2:?}{db2:?}");

            // Degree additivity via the tensor grading.
            let t = graded_tensor(&a, &b);
            assert_eq!(t.degree(), Some(da.add(db)));
        }
    }

    #[test]
    fn standard_double_patterns() {
        let scalar = GradingOperator::trivial(1);
        let d = standard_double(&scalar);
        assert!(d.matrix().approx_eq(&ComplexMatrix::diag_real(&[1.0, -1.0]), 0.0));

        let eps = GradingOperator::standard(1, 1);
        let d2 = standard_double(&eps);
        assert!(d2
            .matrix()
            .approx_eq(&ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]), 0.0));

        // Doubling twice follows the (eps, -eps, -eps, eps) block pattern.
        let d4 = standard_double(&d2);
        let expected = ComplexMatrix::diag_real(&[
            1.0, -1.0, -1.0, 1.0, //
            -1.0, 1.0, 1.0, -1.0,
        ]);
        assert!(d4.matrix().approx_eq(&expected, 0.0));
    }

    #[test]
    fn reblock_of_grading_operator_is_even_block_diagonal() {
        let mut rng = rng_from_seed(31);
        let eps1 = GradingOperator::standard(1, 1);
        let eps2 = GradingOperator::standard(2, 1);
        let a = random_homogeneous(&mut rng, &eps1, Degree::Even);
        let b = GradedMatrix::new(eps2.matrix().clone(), eps2.clone()).unwrap();
        let t = graded_tensor(&a, &b);
        let image = even_grading_reblock(t.value(), &eps1, &eps2).unwrap();
        // Image is a (x) eps_B: block diagonal in the eps_B eigenbasis and even.
        assert!(image.approx_eq(&a.value().kron(eps2.matrix()), 1e-13));
        let big = eps1.tensor(&eps2);
        assert!(big.conjugate(&image).approx_eq(&image, 1e-12));
    }

    #[test]
    fn reblock_is_identity_for_even_left_factor() {
        let mut rng = rng_from_seed(17);
        let eps1 = GradingOperator::standard(2, 1);
        let eps2 = GradingOperator::standard(1, 1);
        let a = random_homogeneous(&mut rng, &eps1, Degree::Even);
        let b = GradedMatrix::new(random_complex(&mut rng, 2, 2, 1.0), eps2.clone()).unwrap();
        let t = graded_tensor(&a, &b);
        let image = even_grading_reblock(t.value(), &eps1, &eps2).unwrap();
        assert!(image.approx_eq(&a.value().kron(b.value()), 1e-12));
    }

    #[test]
    fn reblock_turns_graded_products_into_plain_products() {
        let mut rng = rng_from_seed(19);
        let eps1 = GradingOperator::standard(1, 2);
        let eps2 = GradingOperator::standard(1, 1);
        for _ in 0..8 {
            let degs = [Degree::Even, Degree::Odd];
            let (da, db) = (degs[rng_pick(&mut rng)], degs[rng_pick(&mut rng)]);
            let (da2, db2) = (degs[rng_pick(&mut rng)], degs[rng_pick(&mut rng)]);
            let a = random_homogeneous(&mut rng, &eps1, da);
            let b = random_homogeneous(&mut rng, &eps2, db);
            let a2 = random_homogeneous(&mut rng, &eps1, da2);
            let b2 = random_homogeneous(&mut rng, &eps2, db2);
            let x = graded_tensor(&a, &b);
            let y = graded_tensor(&a2, &b2);
            let graded_product = x.value().mul(y.value());
            let lhs = even_grading_reblock(&graded_product, &eps1, &eps2).unwrap();
            let rhs = even_grading_reblock(x.value(), &eps1, &eps2)
                .unwrap()
                .mul(&even_grading_reblock(y.value(), &eps1, &eps2).unwrap());
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
    }

    fn rng_pick(rng: &mut LabRng) -> usize {
        use rand::Rng;
        rng.gen_range(0..2)
    }

    #[test]
    fn reblock_rejects_mismatched_factors() {
        let eps1 = GradingOperator::standard(1, 1);
        let eps2 = GradingOperator::standard(1, 1);
        let m = ComplexMatrix::identity(6);
        assert!(matches!(
            even_grading_reblock(&m, &eps1, &eps2),
            Err(GradedError::FactorMismatch(..))
        ));
    }

    #[test]
    fn function_parity_splitter_reproduces_the_function() {
        // The model grading on functions of a real variable: even/odd split.
        let f = |x: f64| 1.0 / c(x, -1.0);
        let even = |x: f64| (f(x) + f(-x)) * 0.5;
        let odd = |x: f64| (f(x) - f(-x)) * 0.5;
        for &x in &[0.0, 0.3, -1.7, 4.2] {
            assert!((even(x) + odd(x) - f(x)).norm() < 1e-15);
            assert!((even(-x) - even(x)).norm() < 1e-15);
            assert!((odd(-x) + odd(x)).norm() < 1e-15);
        }
        // And the even part of the resolvent is i times the Lorentzian.
        for &x in &[0.5, 2.0] {
            let lor = 1.0 / (x * x + 1.0);
            assert!((even(x) - c(0.0, lor)).norm() < 1e-15);
            assert!((odd(x) - c(x * lor, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn graded_matrix_json_includes_epsilon() {
        let eps = GradingOperator::standard(1, 1);
        let g = GradedMatrix::new(pauli_x(), eps).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"epsilon\""));
        let back: GradedMatrix = serde_json::from_str(&text).unwrap();
        assert!(back.value().approx_eq(g.value(), 0.0));
        assert!(back.grading().matrix().approx_eq(g.grading().matrix(), 0.0));
    }
}
