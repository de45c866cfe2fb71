//! One-time high-resolution oracle run for the quantization-convergence
//! thresholds.
//!
//! The calibration operator (`a = 1`, `b = cos theta`) truncates to a real
//! symmetric tridiagonal corner, so an independent evaluation path is
//! available: eigendecompose the tridiagonal directly, build `f(t^{-1} D)`
//! from even/odd function parts in closed block form, quantize the symbol
//! with the library path, and measure the difference norm by power iteration.
//! Nothing here shares the dense Hermitian pipeline the experiments use, so
//! agreement at small sizes validates both.
//!
//! Run with `cargo run --release -p gradedk --example calibrate_quantize [N...]`.

use gradedk::eigen::eig_symmetric_tridiagonal;
use gradedk::elliptic::{quantize, CalculusSymbol, CircleOperatorSpec, QuantizationConfig, SymbolField};
use gradedk::func::{gaussian, odd_gaussian_scaled, FunctionSpec};
use gradedk::matrix::ComplexMatrix;
use num_complex::Complex64;

fn catalog() -> Vec<FunctionSpec> {
    vec![
        gaussian(1.0),
        odd_gaussian_scaled(1.0, 1.0),
        gaussian(2.0),
        odd_gaussian_scaled(2.0, 0.5),
    ]
}

/// Power iteration for the largest singular value of a dense matrix.
fn power_norm(m: &ComplexMatrix, iters: usize) -> f64 {
    let n = m.cols();
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new((0.37 * i as f64).sin() + 1.1, (0.71 * i as f64).cos()))
        .collect();
    let norm2 = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm2(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut sigma = 0.0;
    for _ in 0..iters {
        // w = M v, u = M* w.
        let mut w = vec![Complex64::new(0.0, 0.0); m.rows()];
        for i in 0..m.rows() {
            let row = m.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(&v) {
                acc += a * b;
            }
            w[i] = acc;
        }
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..m.rows() {
            let row = m.row(i);
            let wi = w[i].conj();
            for (uj, a) in u.iter_mut().zip(row) {
                *uj += (wi * a).conj();
            }
        }
        let nu = norm2(&u);
        if nu == 0.0 {
            return 0.0;
        }
        sigma = nu.sqrt();
        u.iter_mut().for_each(|z| *z /= nu);
        v = u;
    }
    sigma
}

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("mode count"))
        .collect();
    let sizes = if args.is_empty() {
        vec![256usize, 512, 1024]
    } else {
        args
    };
    let t_grid = [4.0, 8.0, 16.0, 32.0, 64.0];

    for n_modes in sizes {
        let p = 4 * n_modes;
        let modes = 2 * n_modes + 1;
        println!("== N = {n_modes} (corner side {modes}, doubled {}) ==", 2 * modes);

        // Tridiagonal corner of a=1, b=cos theta: diag n, off-diagonals 1/2.
        let diag: Vec<f64> = (0..modes).map(|i| i as f64 - n_modes as f64).collect();
        let off = vec![0.5f64; modes - 1];
        let t0 = std::time::Instant::now();
        let (vals, vecs_rows) = eig_symmetric_tridiagonal(&diag, &off).expect("tridiagonal");
        println!("   tridiagonal eig: {:.1}s", t0.elapsed().as_secs_f64());

        // f(t^{-1} DD) for DD = [[0, D], [D, 0]] with real symmetric D has the
        // block form [[fe(D/t), fo(D/t)], [fo(D/t), fe(D/t)]] with fe/fo the
        // even and odd parts of f. One pass over the spectrum builds both.
        let f_parts = |f: &FunctionSpec, t: f64| -> (ComplexMatrix, ComplexMatrix) {
            let mut even = ComplexMatrix::zeros(modes, modes);
            let mut odd = ComplexMatrix::zeros(modes, modes);
            for (j, &lam) in vals.iter().enumerate() {
                let fp = f.eval(lam / t);
                let fm = f.eval(-lam / t);
                let we = (fp + fm) * 0.5;
                let wo = (fp - fm) * 0.5;
                if we.norm() < 1e-18 && wo.norm() < 1e-18 {
                    continue;
                }
                let z = &vecs_rows[j * modes..(j + 1) * modes];
                for r in 0..modes {
                    if z[r].abs() < 1e-300 {
                        continue;
                    }
                    let ze = we * z[r];
                    let zo = wo * z[r];
                    let erow = even.row_mut(r);
                    for (dst, &zc) in erow.iter_mut().zip(z) {
                        *dst += ze * zc;
                    }
                    let orow = odd.row_mut(r);
                    for (dst, &zc) in orow.iter_mut().zip(z) {
                        *dst += zo * zc;
                    }
                }
            }
            (even, odd)
        };

        let spec = CircleOperatorSpec::scalar(p, |_| Complex64::new(1.0, 0.0), |th| {
            Complex64::new(th.cos(), 0.0)
        })
        .expect("spec");
        let config = QuantizationConfig::new(n_modes, p, 1e-3).expect("config");
        let field = SymbolField::from_spec(&spec, n_modes as f64 / t_grid[0], 9).expect("field");

        for f in catalog() {
            let mut errs = Vec::new();
            for &t in &t_grid {
                let sym = CalculusSymbol { field: &field, f: &f };
                let quantized = quantize(&sym, t, &config).expect("quantize");
                let (fe, fo) = f_parts(&f, t);
                let mut spectral = ComplexMatrix::zeros(2 * modes, 2 * modes);
                spectral.set_block(0, 0, &fe);
                spectral.set_block(modes, modes, &fe);
                spectral.set_block(0, modes, &fo);
                spectral.set_block(modes, 0, &fo);
                let diff = &quantized - &spectral;
                errs.push(power_norm(&diff, 120));
            }
            let slope = gradedk::experiments::fit_decay_exponent(&t_grid, &errs);
            println!(
                "   {:<22} e(t) = {:?}  slope = {:?}",
                f.name(),
                errs.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>(),
                slope
            );
        }
    }
}
