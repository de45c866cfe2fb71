use gradedk::matrix::ComplexMatrix;
use gradedk::random::{random_hermitian, rng_from_seed, random_complex};
use gradedk::{eig_hermitian, eigvals_hermitian, op_norm};
use std::time::Instant;

fn main() {
    let mut rng = rng_from_seed(1);
    for n in [258usize, 514, 1026] {
        let h = random_hermitian(&mut rng, n, 1.0);
        let t0 = Instant::now();
        let sys = eig_hermitian(&h).unwrap();
        let t_full = t0.elapsed().as_secs_f64();
        let resid = sys.reconstruct().distance(&h) / h.frobenius_norm();
        let t0 = Instant::now();
        let _vals = eigvals_hermitian(&h).unwrap();
        let t_vals = t0.elapsed().as_secs_f64();
        let m = random_complex(&mut rng, n, n, 1.0);
        let t0 = Instant::now();
        let nm = op_norm(&m);
        let t_norm = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let _p = m.mul(&m);
        let t_mul = t0.elapsed().as_secs_f64();
        println!("n={n}: eig {t_full:.2}s (resid {resid:.2e}), vals {t_vals:.2}s, op_norm {t_norm:.2}s ({nm:.3}), matmul {t_mul:.2}s");
    }
}
