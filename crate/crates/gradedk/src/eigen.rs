//! Hermitian eigendecomposition and spectral functional calculus.
//!
//! Two dense direct solvers sit behind [`eig_hermitian`]: cyclic Jacobi
//! rotations for small matrices (unconditionally stable, and the reference
//! implementation the rest of the crate is validated against), and complex
//! Householder tridiagonalization followed by implicit-shift QL for the large
//! Fourier-truncation sizes, where Jacobi's sweep count is too expensive.
//! Both paths are cross-checked in the test suite.

use crate::matrix::{ComplexMatrix, KernelError};
use num_complex::Complex64;
use rayon::prelude::*;

/// Relative Hermiticity tolerance accepted by the solvers.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Largest dimension handled by the Jacobi path.
const JACOBI_CUTOFF: usize = 128;

const MAX_JACOBI_SWEEPS: usize = 60;
const MAX_QL_ITER: usize = 80;

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// a unitary basis of column eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    basis: ComplexMatrix,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// `U diag(eigenvalues) U*`, for reconstruction checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let scaled = scale_columns(&self.basis, |j| {
            Complex64::new(self.eigenvalues[j], 0.0)
        });
        scaled.mul(&self.basis.adjoint())
    }

    /// Evaluates `f` on the spectrum: `U diag(f(lambda)) U*`.
    ///
    /// Errors if `f` returns a non-finite value at any eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix, KernelError> {
        let values: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&x| {
                let fx = f(x);
                if fx.re.is_finite() && fx.im.is_finite() {
                    Ok(fx)
                } else {
                    Err(KernelError::NonFiniteFunctionValue { point: x })
                }
            })
            .collect::<Result<_, _>>()?;
        let scaled = scale_columns(&self.basis, |j| values[j]);
        Ok(scaled.mul(&self.basis.adjoint()))
    }
}

fn scale_columns(m: &ComplexMatrix, f: impl Fn(usize) -> Complex64) -> ComplexMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        let row = out.row_mut(i);
        for (j, z) in row.iter_mut().enumerate() {
            *z *= f(j);
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized internally; inputs farther than
/// [`HERMITICITY_TOL`] (relative) from Hermitian are rejected.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<EigenSystem, KernelError> {
    let n = h.dim()?;
    check_hermitian(h)?;
    if n == 0 {
        return Ok(EigenSystem {
            eigenvalues: vec![],
            basis: ComplexMatrix::zeros(0, 0),
        });
    }
    let a = h.hermitian_part();
    // Normalize the scale: keeps the tridiagonal iteration away from the
    // denormal range when the input is at roundoff level.
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(EigenSystem {
            eigenvalues: vec![0.0; n],
            basis: ComplexMatrix::identity(n),
        });
    }
    let a = a.scaled_re(1.0 / scale);
    let (mut vals, mut basis) = if n <= JACOBI_CUTOFF {
        jacobi(a, true)?
    } else {
        householder_ql(a, true)?
    };
    for v in vals.iter_mut() {
        *v *= scale;
    }
    let basis = basis.take().expect("basis requested");
    let (vals, basis) = sort_and_fix_phases(&mut vals, basis);
    Ok(EigenSystem {
        eigenvalues: vals,
        basis,
    })
}

/// Eigenvalues only, ascending. Much cheaper than [`eig_hermitian`] for large
/// matrices since no transform is accumulated.
pub fn eigvals_hermitian(h: &ComplexMatrix) -> Result<Vec<f64>, KernelError> {
    let n = h.dim()?;
    check_hermitian(h)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let a = h.hermitian_part();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let a = a.scaled_re(1.0 / scale);
    let (mut vals, _) = if n <= JACOBI_CUTOFF {
        jacobi(a, false)?
    } else {
        householder_ql(a, false)?
    };
    for v in vals.iter_mut() {
        *v *= scale;
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Evaluates a real function of a Hermitian matrix through its spectrum.
pub fn apply_function(
    h: &ComplexMatrix,
    f: impl Fn(f64) -> Complex64,
) -> Result<ComplexMatrix, KernelError> {
    eig_hermitian(h)?.apply(f)
}

/// Largest singular value.
///
/// Hermitian inputs take the direct spectral route; general inputs go through
/// the Gram matrix, which is accurate for the top of the singular spectrum.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    if m.is_square() && m.hermitian_defect() <= 1e-13 * m.frobenius_norm().max(1.0) {
        let vals = eigvals_hermitian(m).expect("symmetrized input");
        return vals.iter().fold(0.0, |a, &v| a.max(v.abs()));
    }
    let gram = if m.rows() <= m.cols() {
        m.mul(&m.adjoint())
    } else {
        m.adjoint().mul(m)
    };
    let vals = eigvals_hermitian(&gram).expect("Gram matrix is Hermitian");
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Eigendecomposition of a real symmetric tridiagonal matrix given by its
/// diagonal and subdiagonal. Returns ascending eigenvalues and a flat
/// row-major matrix whose row `j` holds the eigenvector for eigenvalue `j`.
pub fn eig_symmetric_tridiagonal(
    diag: &[f64],
    off: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), KernelError> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1), "off-diagonal length");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut zt = vec![0.0f64; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(&mut zt), n)?;
    // Sort ascending, permuting eigenvector rows alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut rows = vec![0.0f64; n * n];
    for (new_i, &old_i) in order.iter().enumerate() {
        rows[new_i * n..(new_i + 1) * n].copy_from_slice(&zt[old_i * n..(old_i + 1) * n]);
    }
    Ok((vals, rows))
}

fn check_hermitian(h: &ComplexMatrix) -> Result<(), KernelError> {
    let scale = h.frobenius_norm().max(1.0);
    let defect = h.hermitian_defect();
    if defect > HERMITICITY_TOL * scale {
        return Err(KernelError::NotHermitian {
            defect: defect / scale,
        });
    }
    Ok(())
}

fn sort_and_fix_phases(vals: &mut [f64], basis: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted = ComplexMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        // Deterministic phase: first component above threshold made real positive.
        let mut phase = Complex64::new(1.0, 0.0);
        for i in 0..n {
            let v = basis[(i, old_j)];
            if v.norm() > 1e-8 {
                phase = v.conj() / v.norm();
                break;
            }
        }
        for i in 0..n {
            sorted[(i, new_j)] = basis[(i, old_j)] * phase;
        }
    }
    (sorted_vals, sorted)
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi for complex Hermitian matrices.
// ---------------------------------------------------------------------------

fn off_diagonal_sq(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc
}

fn jacobi(
    mut a: ComplexMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>), KernelError> {
    let n = a.rows();
    let mut v = if want_vectors {
        Some(ComplexMatrix::identity(n))
    } else {
        None
    };
    let fro = a.frobenius_norm().max(1e-300);
    let stop = (1e-14 * fro).powi(2);
    let skip = 1e-18 * fro;

    let mut sweeps = 0;
    while off_diagonal_sq(&a) > stop {
        sweeps += 1;
        if sweeps > MAX_JACOBI_SWEEPS {
            return Err(KernelError::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let abs_b = b.norm();
                if abs_b <= skip {
                    continue;
                }
                let phase = b / abs_b;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * abs_b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_phase = phase * s;

                // Rows p,q of U*A.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * s_phase;
                    a[(q, j)] = apj * s_phase.conj() + aqj * c;
                }
                // Columns p,q of (U*A)U.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * s_phase.conj();
                    a[(i, q)] = aip * s_phase + aiq * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                if let Some(v) = v.as_mut() {
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * c - viq * s_phase.conj();
                        v[(i, q)] = vip * s_phase + viq * c;
                    }
                }
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((vals, v))
}

// ---------------------------------------------------------------------------
// Householder tridiagonalization + implicit-shift QL for large matrices.
// ---------------------------------------------------------------------------

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Unitary with `A = Q T Q*`; present only when vectors are wanted.
    q: Option<ComplexMatrix>,
}

fn householder_ql(
    a: ComplexMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>), KernelError> {
    let n = a.rows();
    let tri = tridiagonalize(a, want_vectors);
    let mut d = tri.diag;
    let mut e = tri.off;
    e.push(0.0);
    if want_vectors {
        // Real rotations accumulate into Z^T (rows are eigenvector coordinates
        // in the tridiagonal basis), composed with Q afterwards.
        let mut zt = vec![0.0f64; n * n];
        for i in 0..n {
            zt[i * n + i] = 1.0;
        }
        ql_implicit(&mut d, &mut e, Some(&mut zt), n)?;
        let q = tri.q.expect("accumulated transform");
        let basis = q.mul_real_transposed(&zt, n);
        Ok((d, Some(basis)))
    } else {
        ql_implicit(&mut d, &mut e, None, n)?;
        Ok((d, None))
    }
}

/// Reduces a Hermitian matrix to real symmetric tridiagonal form with complex
/// Householder reflectors, then rescales the off-diagonal phases away.
fn tridiagonalize(mut a: ComplexMatrix, want_q: bool) -> Tridiagonal {
    let n = a.rows();
    let mut reflectors: Vec<(Vec<Complex64>, f64)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let tail_sq: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        let alpha = a[(k + 1, k)];
        if tail_sq <= 1e-300 {
            if want_q {
                reflectors.push((Vec::new(), 0.0));
            }
            continue;
        }
        let xnorm = (alpha.norm_sqr() + tail_sq).sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let beta = -phase * xnorm;

        let mut v = vec![Complex64::new(0.0, 0.0); m];
        v[0] = alpha - beta;
        for i in 1..m {
            v[i] = a[(k + 1 + i, k)];
        }
        let vsq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vsq <= 1e-300 {
            if want_q {
                reflectors.push((Vec::new(), 0.0));
            }
            continue;
        }
        // Unit-normalize the reflector; tau = 2 keeps every intermediate at
        // the scale of the matrix regardless of how small the subcolumn is.
        let vnorm = vsq.sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        let tau = 2.0;

        // Two-sided update of the trailing block: B <- B - v w* - w v*.
        let mut y = vec![Complex64::new(0.0, 0.0); m];
        let compute_y = |i: usize| -> Complex64 {
            let row = &a.row(k + 1 + i)[k + 1..];
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, vv) in row.iter().zip(&v) {
                acc += b * vv;
            }
            acc
        };
        if m * m >= 1 << 18 {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = compute_y(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = compute_y(i);
            }
        }
        let mu: f64 = v
            .iter()
            .zip(&y)
            .map(|(vv, yy)| (vv.conj() * yy).re)
            .sum();
        let w: Vec<Complex64> = y
            .iter()
            .zip(&v)
            .map(|(yy, vv)| yy * tau - vv * (tau * tau * mu / 2.0))
            .collect();

        {
            let base = k + 1;
            let row_update = |i: usize, row: &mut [Complex64]| {
                let vi = v[i];
                let wi = w[i];
                for j in 0..m {
                    row[j] -= vi * w[j].conj() + wi * v[j].conj();
                }
            };
            if m * m >= 1 << 18 {
                let cols = a.cols();
                a.entries_mut()
                    .par_chunks_mut(cols)
                    .skip(base)
                    .take(m)
                    .enumerate()
                    .for_each(|(i, full_row)| row_update(i, &mut full_row[base..]));
            } else {
                for i in 0..m {
                    let full_row = a.row_mut(base + i);
                    row_update(i, &mut full_row[base..]);
                }
            }
        }

        a[(k + 1, k)] = beta;
        a[(k, k + 1)] = beta.conj();
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
            a[(k, i)] = Complex64::new(0.0, 0.0);
        }
        if want_q {
            reflectors.push((v, tau));
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let off_c: Vec<Complex64> = (0..n.saturating_sub(1)).map(|k| a[(k + 1, k)]).collect();

    // Phase-scale the off-diagonal to be real nonnegative.
    let mut delta = vec![Complex64::new(1.0, 0.0); n];
    let mut off = vec![0.0f64; off_c.len()];
    for k in 0..off_c.len() {
        let mag = off_c[k].norm();
        off[k] = mag;
        delta[k + 1] = if mag > 0.0 {
            off_c[k] * delta[k] / mag
        } else {
            delta[k]
        };
    }

    let q = want_q.then(|| {
        let mut q = ComplexMatrix::identity(n);
        for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let base = k + 1;
            let m = v.len();
            // w = v* Q over the active block, then rank-1 update.
            let mut wrow = vec![Complex64::new(0.0, 0.0); n - base];
            for (i, vv) in v.iter().enumerate() {
                let row = &q.row(base + i)[base..];
                let vc = vv.conj();
                for (acc, qe) in wrow.iter_mut().zip(row) {
                    *acc += vc * qe;
                }
            }
            for i in 0..m {
                let f = v[i] * *tau;
                let row = &mut q.row_mut(base + i)[base..];
                for (qe, we) in row.iter_mut().zip(&wrow) {
                    *qe -= f * we;
                }
            }
        }
        for j in 0..n {
            if delta[j] != Complex64::new(1.0, 0.0) {
                for i in 0..n {
                    q[(i, j)] *= delta[j];
                }
            }
        }
        q
    });

    Tridiagonal { diag, off, q }
}

/// Implicit-shift QL on a real symmetric tridiagonal, optionally accumulating
/// the real rotations into `zt` (row `i` of `zt` is tridiagonal coordinate `i`).
///
/// Convention: `e[i]` couples coordinates `i` and `i+1`; `e[n-1]` must be zero.
fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    mut zt: Option<&mut [f64]>,
    n: usize,
) -> Result<(), KernelError> {
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut f_shift = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(KernelError::NoConvergence { sweeps: iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in l + 2..n {
                    d[i] -= h;
                }
                f_shift += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gg = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gg;
                    d[i + 1] = h + s * (c * gg + s * d[i]);

                    if let Some(zt) = zt.as_deref_mut() {
                        let (lo, hi) = zt.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_i1 = &mut hi[..n];
                        for k in 0..n {
                            let hh = row_i1[k];
                            row_i1[k] = s * row_i[k] + c * hh;
                            row_i[k] = c * row_i[k] - s * hh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f_shift;
        e[l] = 0.0;
    }
    Ok(())
}
