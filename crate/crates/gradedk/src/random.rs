//! Seeded generators for random operators used by experiments and tests.
//!
//! Everything routes through a ChaCha stream cipher so that a fixed seed
//! reproduces byte-identical experiment reports on any platform.

use crate::eigen::eig_hermitian;
use crate::graded::{Degree, GradedMatrix, GradingOperator};
use crate::matrix::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

pub use rand::Rng as RngExt;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense matrix with entries uniform in the centered box of half-width `scale`.
pub fn random_complex(rng: &mut LabRng, rows: usize, cols: usize, scale: f64) -> ComplexMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(Complex64::new(
            rng.gen_range(-scale..=scale),
            rng.gen_range(-scale..=scale),
        ));
    }
    ComplexMatrix::new(rows, cols, data).expect("finite random entries")
}

pub fn random_hermitian(rng: &mut LabRng, n: usize, scale: f64) -> ComplexMatrix {
    random_complex(rng, n, n, scale).hermitian_part()
}

/// Haar-like random unitary: the eigenbasis of a random Hermitian matrix.
pub fn random_unitary(rng: &mut LabRng, n: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, n, 1.0);
    eig_hermitian(&h).expect("random Hermitian").basis().clone()
}

/// Rank-`rank` orthogonal projection in a random basis.
pub fn random_projection(rng: &mut LabRng, n: usize, rank: usize) -> ComplexMatrix {
    assert!(rank <= n, "rank {rank} exceeds dimension {n}");
    let u = random_unitary(rng, n);
    let mut d = vec![0.0; n];
    for x in d.iter_mut().take(rank) {
        *x = 1.0;
    }
    let diag = ComplexMatrix::diag_real(&d);
    u.mul(&diag).mul(&u.adjoint())
}

/// Degree-one Hermitian matrix: the odd part of a random Hermitian draw.
pub fn random_degree_one(rng: &mut LabRng, grading: &GradingOperator, scale: f64) -> ComplexMatrix {
    let h = random_hermitian(rng, grading.dim(), scale);
    (&h - &grading.conjugate(&h)).scaled_re(0.5)
}

/// Random homogeneous element of the requested parity, unit Frobenius norm.
pub fn random_homogeneous(
    rng: &mut LabRng,
    grading: &GradingOperator,
    degree: Degree,
) -> GradedMatrix {
    let n = grading.dim();
    loop {
        let raw = random_complex(rng, n, n, 1.0);
        let g = GradedMatrix::new(raw, grading.clone()).expect("matching dimensions");
        let (even, odd) = g.parity_parts();
        let part = match degree {
            Degree::Even => even,
            Degree::Odd => odd,
        };
        let norm = part.frobenius_norm();
        if norm > 1e-3 {
            return GradedMatrix::new(part.scaled_re(1.0 / norm), grading.clone())
                .expect("matching dimensions");
        }
    }
}

/// Projection commuting with the grading, built blockwise inside the even and
/// odd eigenspaces with the requested ranks.
pub fn random_graded_projection(
    rng: &mut LabRng,
    grading: &GradingOperator,
    even_rank: usize,
    odd_rank: usize,
) -> ComplexMatrix {
    let p_even = grading.even_projection();
    let p_odd = grading.odd_projection();
    let block = |rng: &mut LabRng, side: &ComplexMatrix, rank: usize| {
        // Random Hermitian compressed to the eigenspace; eigenvectors with
        // nonzero eigenvalue live inside range(side), so ranking by magnitude
        // picks an orthonormal family there.
        let n = side.rows();
        let h = side.mul(&random_hermitian(rng, n, 1.0)).mul(side);
        let sys = eig_hermitian(&h).expect("compressed Hermitian");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            sys.eigenvalues()[b]
                .abs()
                .total_cmp(&sys.eigenvalues()[a].abs())
        });
        let mut p = ComplexMatrix::zeros(n, n);
        for &j in order.iter().take(rank) {
            let col = sys.basis().block(0, j, n, 1);
            p = &p + &col.mul(&col.adjoint());
        }
        p
    };
    let even_dim = p_even.trace().re.round() as usize;
    let odd_dim = p_odd.trace().re.round() as usize;
    assert!(even_rank <= even_dim && odd_rank <= odd_dim, "rank exceeds eigenspace");
    &block(rng, &p_even, even_rank) + &block(rng, &p_odd, odd_rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary_and_seeded() {
        let mut rng = rng_from_seed(3);
        let u = random_unitary(&mut rng, 6);
        let gram = u.adjoint().mul(&u);
        assert!(gram.approx_eq(&ComplexMatrix::identity(6), 1e-12));

        let mut rng2 = rng_from_seed(3);
        let u2 = random_unitary(&mut rng2, 6);
        assert!(u.approx_eq(&u2, 0.0));
    }

    #[test]
    fn projection_has_requested_rank() {
        let mut rng = rng_from_seed(4);
        let p = random_projection(&mut rng, 5, 2);
        assert!((p.trace().re - 2.0).abs() < 1e-12);
        assert!(p.mul(&p).approx_eq(&p, 1e-12));
        assert!(p.hermitian_defect() < 1e-12);
    }
}
