//! First-order elliptic operators on the circle at finite Fourier truncation:
//! coefficient sampling, assembled doubled operators, symbol fields, resolvent
//! decay, Cayley symbol classes, and Kohn-Nirenberg quantization.
//!
//! Conventions. The operator is `D = a(theta) (-i d/dtheta) + b(theta)` acting
//! on sections of a trivial rank-k bundle, truncated to Fourier modes
//! `|n| <= N`. Vectors are indexed fiber-major: component `c`, mode `n` sits
//! at `c (2N+1) + (n + N)`. The doubled operator `[[0, D*], [D, 0]]` lives on
//! two such blocks with grading `diag(+1, -1)` and the principal symbol is
//! `sigma(theta, xi) = xi a(theta)` (the zeroth-order term is excluded, which
//! is what makes the quantization comparison nontrivial).

use crate::eigen::{eig_hermitian, op_norm};
use crate::func::FunctionSpec;
use crate::graded::GradingOperator;
use crate::hom::HomError;
use crate::ktheory::KTheoryError;
use crate::matrix::{ComplexMatrix, KernelError};
use crate::svd::svd_threshold;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Smallest admissible singular value of the leading coefficient.
pub const ELLIPTICITY_FLOOR: f64 = 1e-6;

/// Default tolerance for tail and boundary conditions.
pub const DEFAULT_TAIL_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("leading coefficient is not elliptic: min singular value {min_sv:.3e} at theta index {at}")]
    EllipticityViolation { min_sv: f64, at: usize },
    #[error("theta grid of {p} points is too small (need at least {needed})")]
    GridTooSmall { p: usize, needed: usize },
    #[error("xi window {xi_max} does not cover the requested evaluation at {needed}")]
    CoverageMismatch { needed: f64, xi_max: f64 },
    #[error("truncation tail contamination: bound {bound:.3e} exceeds tolerance {tol:.3e}; rerun with a larger mode count")]
    TailContamination { bound: f64, tol: f64 },
    #[error("symbol vanishes on the sample grid at theta index {at}")]
    SymbolVanishes { at: usize },
    #[error("winding estimate {estimate} is not close to an integer; refine the theta grid")]
    WindingUnresolved { estimate: f64 },
    #[error("mode count {n_modes} cannot absorb winding {winding}")]
    WindingExceedsTruncation { n_modes: usize, winding: i64 },
    #[error("parameter must be positive: {name} = {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("symbol-class projections have unequal fiber ranks (max defect {defect})")]
    RankMismatch { defect: i64 },
    #[error("theta grids disagree: {0} vs {1}")]
    ThetaGridMismatch(usize, usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    KTheory(#[from] KTheoryError),
}

/// Uniform angle grid point `2 pi j / p`.
pub fn theta_at(j: usize, p: usize) -> f64 {
    2.0 * PI * (j as f64) / (p as f64)
}

/// Normalized DFT bins of a sampled sequence: bin `r mod p` holds the Fourier
/// coefficient `(1/p) sum_j v_j exp(-i r theta_j)`.
pub fn fourier_bins(samples: &[Complex64]) -> Vec<Complex64> {
    let p = samples.len();
    let mut buf: Vec<rustfft::num_complex::Complex64> = samples
        .iter()
        .map(|z| rustfft::num_complex::Complex64::new(z.re, z.im))
        .collect();
    FftPlanner::new().plan_fft_forward(p).process(&mut buf);
    buf.into_iter()
        .map(|z| Complex64::new(z.re / p as f64, z.im / p as f64))
        .collect()
}

fn bin(r: i64, p: usize) -> usize {
    (r.rem_euclid(p as i64)) as usize
}

/// Sampled coefficients of a first-order circle operator with matrix fibers.
#[derive(Clone, Debug)]
pub struct CircleOperatorSpec {
    fiber_dim: usize,
    a_samples: Vec<ComplexMatrix>,
    b_samples: Vec<ComplexMatrix>,
    min_singular: f64,
}

impl CircleOperatorSpec {
    /// Samples `a` and `b` on a uniform grid of `theta_count` points and
    /// verifies ellipticity of the leading coefficient at every point.
    pub fn from_fns(
        fiber_dim: usize,
        theta_count: usize,
        a: impl Fn(f64) -> ComplexMatrix,
        b: impl Fn(f64) -> ComplexMatrix,
    ) -> Result<Self, EllipticError> {
        if theta_count < 4 {
            return Err(EllipticError::GridTooSmall {
                p: theta_count,
                needed: 4,
            });
        }
        let mut a_samples = Vec::with_capacity(theta_count);
        let mut b_samples = Vec::with_capacity(theta_count);
        let mut min_singular = f64::INFINITY;
        for j in 0..theta_count {
            let th = theta_at(j, theta_count);
            let aj = a(th);
            let bj = b(th);
            assert_eq!(aj.rows(), fiber_dim, "a(theta) has wrong fiber dimension");
            assert_eq!(bj.rows(), fiber_dim, "b(theta) has wrong fiber dimension");
            let svd = svd_threshold(&aj, Some(ELLIPTICITY_FLOOR))?;
            let smin = svd
                .singular_values
                .last()
                .copied()
                .unwrap_or(0.0);
            if smin <= ELLIPTICITY_FLOOR {
                return Err(EllipticError::EllipticityViolation { min_sv: smin, at: j });
            }
            min_singular = min_singular.min(smin);
            a_samples.push(aj);
            b_samples.push(bj);
        }
        Ok(Self {
            fiber_dim,
            a_samples,
            b_samples,
            min_singular,
        })
    }

    /// Scalar-coefficient convenience constructor (`k = 1`).
    pub fn scalar(
        theta_count: usize,
        a: impl Fn(f64) -> Complex64,
        b: impl Fn(f64) -> Complex64,
    ) -> Result<Self, EllipticError> {
        Self::from_fns(
            1,
            theta_count,
            |th| ComplexMatrix::diag(&[a(th)]),
            |th| ComplexMatrix::diag(&[b(th)]),
        )
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn theta_count(&self) -> usize {
        self.a_samples.len()
    }

    /// Ellipticity margin: smallest singular value of `a` over the grid.
    pub fn min_singular(&self) -> f64 {
        self.min_singular
    }

    pub fn leading(&self, j: usize) -> &ComplexMatrix {
        &self.a_samples[j]
    }

    /// Spec with both coefficients scaled by a positive constant.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            fiber_dim: self.fiber_dim,
            a_samples: self.a_samples.iter().map(|m| m.scaled_re(c)).collect(),
            b_samples: self.b_samples.iter().map(|m| m.scaled_re(c)).collect(),
            min_singular: self.min_singular * c,
        }
    }
}

/// Assembled doubled operator on the truncated Fourier space.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    /// `[[0, D*], [D, 0]]`, Hermitian and degree one; side `2 k (2N+1)`.
    pub matrix: ComplexMatrix,
    /// Block grading `diag(+1, -1)`.
    pub grading: GradingOperator,
    /// The corner `D` mapping the even block to the odd block.
    pub corner: ComplexMatrix,
    pub n_modes: usize,
    pub fiber_dim: usize,
}

/// Assembles the truncation of `D = a (-i d/dtheta) + b` to modes `|n| <= N`
/// together with its doubled Hermitian extension.
///
/// Matrix elements couple modes through the Fourier coefficients of the
/// sampled coefficients; the grid must hold at least `4 N` points so the
/// needed bands are alias-free.
pub fn assemble_operator(
    spec: &CircleOperatorSpec,
    n_modes: usize,
) -> Result<AssembledOperator, EllipticError> {
    let p = spec.theta_count();
    if p < 4 * n_modes {
        return Err(EllipticError::GridTooSmall {
            p,
            needed: 4 * n_modes,
        });
    }
    let k = spec.fiber_dim;
    let modes = 2 * n_modes + 1;
    let side = k * modes;

    // Per-entry Fourier bins of the coefficient samples.
    let coeff_bins = |samples: &Vec<ComplexMatrix>| -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(k * k);
        for c in 0..k {
            for c2 in 0..k {
                let seq: Vec<Complex64> = samples.iter().map(|m| m[(c, c2)]).collect();
                out.push(fourier_bins(&seq));
            }
        }
        out
    };
    let a_bins = coeff_bins(&spec.a_samples);
    let b_bins = coeff_bins(&spec.b_samples);

    let mut corner = ComplexMatrix::zeros(side, side);
    for c in 0..k {
        for c2 in 0..k {
            let ab = &a_bins[c * k + c2];
            let bb = &b_bins[c * k + c2];
            for mi in 0..modes {
                let m = mi as i64 - n_modes as i64;
                for ni in 0..modes {
                    let n = ni as i64 - n_modes as i64;
                    let r = bin(m - n, p);
                    let val = ab[r] * (n as f64) + bb[r];
                    corner[(c * modes + mi, c2 * modes + ni)] = val;
                }
            }
        }
    }

    let mut matrix = ComplexMatrix::zeros(2 * side, 2 * side);
    matrix.set_block(0, side, &corner.adjoint());
    matrix.set_block(side, 0, &corner);
    let grading = GradingOperator::standard(side, side);
    Ok(AssembledOperator {
        matrix,
        grading,
        corner,
        n_modes,
        fiber_dim: k,
    })
}

/// Principal symbol field `sigma(theta, xi) = xi a(theta)` sampled over the
/// angle grid, with a finite frequency window `[-xi_max, xi_max]`.
#[derive(Clone, Debug)]
pub struct SymbolField {
    fiber_dim: usize,
    a_samples: Vec<ComplexMatrix>,
    min_singular: f64,
    xi_max: f64,
    xi_count: usize,
}

impl SymbolField {
    pub fn from_spec(
        spec: &CircleOperatorSpec,
        xi_max: f64,
        xi_count: usize,
    ) -> Result<Self, EllipticError> {
        if !(xi_max > 0.0) {
            return Err(EllipticError::BadParameter {
                name: "xi_max",
                value: xi_max,
            });
        }
        if xi_count < 3 {
            return Err(EllipticError::BadParameter {
                name: "xi_count",
                value: xi_count as f64,
            });
        }
        Ok(Self {
            fiber_dim: spec.fiber_dim,
            a_samples: spec.a_samples.clone(),
            min_singular: spec.min_singular,
            xi_max,
            xi_count,
        })
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn theta_count(&self) -> usize {
        self.a_samples.len()
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn min_singular(&self) -> f64 {
        self.min_singular
    }

    /// Uniform frequency grid including both endpoints.
    pub fn xi_grid(&self) -> Vec<f64> {
        let q = self.xi_count;
        (0..q)
            .map(|l| -self.xi_max + 2.0 * self.xi_max * (l as f64) / ((q - 1) as f64))
            .collect()
    }

    /// `sigma(theta_j, xi) = xi a(theta_j)`.
    pub fn sigma(&self, j: usize, xi: f64) -> ComplexMatrix {
        self.a_samples[j].scaled_re(xi)
    }

    /// Doubled Hermitian fiber symbol `[[0, sigma*], [sigma, 0]]`, degree one
    /// for the fiber grading.
    pub fn doubled(&self, j: usize, xi: f64) -> ComplexMatrix {
        let s = self.sigma(j, xi);
        let mut out = ComplexMatrix::zeros(2 * self.fiber_dim, 2 * self.fiber_dim);
        out.set_block(0, self.fiber_dim, &s.adjoint());
        out.set_block(self.fiber_dim, 0, &s);
        out
    }

    /// Fiber grading `diag(+1 x k, -1 x k)` of the doubled bundle.
    pub fn fiber_grading(&self) -> GradingOperator {
        GradingOperator::standard(self.fiber_dim, self.fiber_dim)
    }

    /// Resolvent-decay constant `C = 1 + 1 / min singular value of a`.
    pub fn decay_constant(&self) -> f64 {
        1.0 + 1.0 / self.min_singular
    }

    /// Cayley transform of the doubled symbol at a grid point:
    /// `u = 1 + 2i (doubled - i)^{-1}`.
    pub fn cayley(&self, j: usize, xi: f64) -> Result<ComplexMatrix, EllipticError> {
        let d = self.doubled(j, xi);
        let n = d.rows();
        let shifted = &d - &ComplexMatrix::identity(n).scaled(Complex64::new(0.0, 1.0));
        let res = shifted.inverse().map_err(EllipticError::Kernel)?;
        Ok(&ComplexMatrix::identity(n) + &res.scaled(Complex64::new(0.0, 2.0)))
    }
}

/// One row of the resolvent-decay table.
#[derive(Clone, Debug, Serialize)]
pub struct DecayEntry {
    pub theta_index: usize,
    pub xi: f64,
    pub norm_minus: f64,
    pub norm_plus: f64,
}

/// Resolvent decay measurements with the ellipticity-derived bound.
#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub bound_constant: f64,
    pub entries: Vec<DecayEntry>,
    /// Largest observed `norm (1 + |xi|) / C`; at most one when the bound holds.
    pub worst_ratio: f64,
    pub verified: bool,
}

/// Tabulates `||(doubled symbol +- i)^{-1}||` over the grid and checks the
/// bound `C / (1 + |xi|)` with `C = 1 + 1/min_sv(a)`.
pub fn symbol_resolvent_decay(field: &SymbolField) -> Result<DecayTable, EllipticError> {
    let c_bound = field.decay_constant();
    let eye = ComplexMatrix::identity(2 * field.fiber_dim());
    let mut entries = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..field.theta_count() {
        for &xi in &field.xi_grid() {
            let d = field.doubled(j, xi);
            let minus = (&d - &eye.scaled(Complex64::new(0.0, 1.0))).inverse()?;
            let plus = (&d + &eye.scaled(Complex64::new(0.0, 1.0))).inverse()?;
            let norm_minus = op_norm(&minus);
            let norm_plus = op_norm(&plus);
            let ratio = norm_minus.max(norm_plus) * (1.0 + xi.abs()) / c_bound;
            worst = worst.max(ratio);
            entries.push(DecayEntry {
                theta_index: j,
                xi,
                norm_minus,
                norm_plus,
            });
        }
    }
    Ok(DecayTable {
        bound_constant: c_bound,
        entries,
        worst_ratio: worst,
        verified: worst <= 1.0 + 1e-12,
    })
}

/// Summary of the fiberwise symbol-class construction.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolClassReport {
    /// Frequency window actually used (enlarged until the Cayley transform is
    /// within `tail_tol` of the identity at the boundary).
    pub xi_max_used: f64,
    /// Largest `||u - 1||` at the window boundary.
    pub boundary_deviation: f64,
    /// Largest projection defect of `p(eps)` and `p(u eps)` over the grid.
    pub projection_defect: f64,
    /// Largest pointwise rank difference between the two projections.
    pub rank_difference_max: i64,
    /// Largest anticommutator norm of odd-function images with the grading.
    pub odd_parity_defect: f64,
    pub tail_tol: f64,
}

/// Builds the fiberwise class data of the symbol: Cayley unitaries, the two
/// projection families, their pointwise ranks, and parity of functional
/// images. The frequency window is enlarged automatically so the Cayley
/// transform closes up at infinity within `tail_tol`.
pub fn symbol_class(
    field: &SymbolField,
    catalog: &[FunctionSpec],
    tail_tol: f64,
) -> Result<SymbolClassReport, EllipticError> {
    if !(tail_tol > 0.0) {
        return Err(EllipticError::BadParameter {
            name: "tail_tol",
            value: tail_tol,
        });
    }
    let c_bound = field.decay_constant();
    let xi_needed = (2.0 * c_bound / tail_tol - 1.0).max(field.xi_max());
    let class_field = SymbolField {
        fiber_dim: field.fiber_dim,
        a_samples: field.a_samples.clone(),
        min_singular: field.min_singular,
        xi_max: xi_needed,
        xi_count: field.xi_count,
    };

    let eps = class_field.fiber_grading();
    let eye = ComplexMatrix::identity(2 * class_field.fiber_dim());
    let fiber_k = class_field.fiber_dim() as i64;

    let mut boundary_deviation: f64 = 0.0;
    let mut projection_defect: f64 = 0.0;
    let mut rank_difference_max: i64 = 0;
    let mut odd_parity_defect: f64 = 0.0;

    for j in 0..class_field.theta_count() {
        for &xi in &class_field.xi_grid() {
            let u = class_field.cayley(j, xi)?;
            if (xi.abs() - class_field.xi_max).abs() < 1e-12 {
                boundary_deviation = boundary_deviation.max((&u - &eye).frobenius_norm());
            }
            let ueps = u.mul(eps.matrix());
            for w in [eps.matrix().clone(), ueps] {
                let proj = (&w + &eye).scaled_re(0.5);
                let defect = proj
                    .mul(&proj)
                    .distance(&proj)
                    .max(proj.hermitian_defect());
                projection_defect = projection_defect.max(defect);
                let rank = proj.trace().re.round() as i64;
                rank_difference_max = rank_difference_max.max((rank - fiber_k).abs());
            }

            // Parity of fiberwise functional images.
            let doubled = class_field.doubled(j, xi);
            let sys = eig_hermitian(&doubled)?;
            for f in catalog {
                if f.parity() == crate::func::Parity::Odd {
                    let img = sys.apply(|x| f.eval(x))?;
                    odd_parity_defect = odd_parity_defect
                        .max(eps.matrix().anticommutator(&img).frobenius_norm());
                }
            }
        }
    }

    if boundary_deviation > tail_tol {
        return Err(EllipticError::TailContamination {
            bound: boundary_deviation,
            tol: tail_tol,
        });
    }
    Ok(SymbolClassReport {
        xi_max_used: class_field.xi_max,
        boundary_deviation,
        projection_defect,
        rank_difference_max,
        odd_parity_defect,
        tail_tol,
    })
}

/// A matrix-valued symbol that can be evaluated at grid angles and arbitrary
/// frequencies, the input side of the quantization.
pub trait FiberSymbol: Sync {
    fn fiber_dim(&self) -> usize;
    fn theta_count(&self) -> usize;
    fn xi_max(&self) -> f64;
    fn eval(&self, theta_index: usize, xi: f64) -> ComplexMatrix;
}

impl FiberSymbol for SymbolField {
    fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }
    fn theta_count(&self) -> usize {
        self.a_samples.len()
    }
    fn xi_max(&self) -> f64 {
        self.xi_max
    }
    fn eval(&self, theta_index: usize, xi: f64) -> ComplexMatrix {
        self.sigma(theta_index, xi)
    }
}

/// Fiberwise functional calculus of the doubled symbol: `f(doubled sigma)`.
pub struct CalculusSymbol<'a> {
    pub field: &'a SymbolField,
    pub f: &'a FunctionSpec,
}

impl FiberSymbol for CalculusSymbol<'_> {
    fn fiber_dim(&self) -> usize {
        2 * self.field.fiber_dim
    }
    fn theta_count(&self) -> usize {
        self.field.theta_count()
    }
    fn xi_max(&self) -> f64 {
        self.field.xi_max
    }
    fn eval(&self, theta_index: usize, xi: f64) -> ComplexMatrix {
        if self.field.fiber_dim == 1 {
            // Closed form on a 2x2 off-diagonal Hermitian fiber.
            let s = self.field.a_samples[theta_index][(0, 0)] * xi;
            let m = s.norm();
            let phase = if m > 0.0 {
                s / m
            } else {
                Complex64::new(1.0, 0.0)
            };
            let fp = self.f.eval(m);
            let fm = self.f.eval(-m);
            let fe = (fp + fm) * 0.5;
            let fo = (fp - fm) * 0.5;
            return ComplexMatrix::new(
                2,
                2,
                vec![fe, fo * phase.conj(), fo * phase, fe],
            )
            .expect("finite catalog values");
        }
        let doubled = self.field.doubled(theta_index, xi);
        eig_hermitian(&doubled)
            .and_then(|sys| sys.apply(|x| self.f.eval(x)))
            .expect("fiber calculus on a Hermitian fiber")
    }
}

/// An explicit sampled symbol given by a closure; mostly a test utility.
pub struct FnSymbol<F: Fn(f64, f64) -> ComplexMatrix + Sync> {
    pub fiber_dim: usize,
    pub theta_count: usize,
    pub xi_max: f64,
    pub eval_fn: F,
}

impl<F: Fn(f64, f64) -> ComplexMatrix + Sync> FiberSymbol for FnSymbol<F> {
    fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }
    fn theta_count(&self) -> usize {
        self.theta_count
    }
    fn xi_max(&self) -> f64 {
        self.xi_max
    }
    fn eval(&self, theta_index: usize, xi: f64) -> ComplexMatrix {
        (self.eval_fn)(theta_at(theta_index, self.theta_count), xi)
    }
}

/// Truncation and grid parameters of a quantization run.
#[derive(Clone, Debug, Serialize)]
pub struct QuantizationConfig {
    pub n_modes: usize,
    pub theta_count: usize,
    pub tail_tol: f64,
}

impl QuantizationConfig {
    pub fn new(n_modes: usize, theta_count: usize, tail_tol: f64) -> Result<Self, EllipticError> {
        if theta_count < 4 * n_modes || theta_count == 0 {
            return Err(EllipticError::GridTooSmall {
                p: theta_count,
                needed: 4 * n_modes,
            });
        }
        if !(tail_tol > 0.0) {
            return Err(EllipticError::BadParameter {
                name: "tail_tol",
                value: tail_tol,
            });
        }
        Ok(Self {
            n_modes,
            theta_count,
            tail_tol,
        })
    }

    /// Checks that every catalog function is below the tail tolerance beyond
    /// the mode window at every scale in the grid: the truncation-error
    /// control `sup_{|n| > N} |f(n/t)| < tail_tol`.
    pub fn validate_tails(
        &self,
        catalog: &[FunctionSpec],
        t_grid: &[f64],
    ) -> Result<(), EllipticError> {
        for f in catalog {
            for &t in t_grid {
                if t <= 0.0 {
                    return Err(EllipticError::BadParameter {
                        name: "t",
                        value: t,
                    });
                }
                let edge = (self.n_modes as f64 + 1.0) / t;
                let bound = f.tail_sup(edge, &[]);
                if bound >= self.tail_tol {
                    return Err(EllipticError::TailContamination {
                        bound,
                        tol: self.tail_tol,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Kohn-Nirenberg quantization of a symbol at scale `t` on the truncated
/// Fourier basis: the matrix element between modes `m` and `n` is the
/// `(m - n)`-th angular Fourier coefficient of `theta -> symbol(theta, n/t)`.
///
/// For an angle-independent symbol the result is exactly mode-diagonal with
/// entries `symbol(n/t)`.
pub fn quantize(
    symbol: &dyn FiberSymbol,
    t: f64,
    config: &QuantizationConfig,
) -> Result<ComplexMatrix, EllipticError> {
    if !(t > 0.0) {
        return Err(EllipticError::BadParameter { name: "t", value: t });
    }
    let p = config.theta_count;
    if p != symbol.theta_count() {
        return Err(EllipticError::ThetaGridMismatch(p, symbol.theta_count()));
    }
    let n_modes = config.n_modes;
    let needed = n_modes as f64 / t;
    if needed > symbol.xi_max() + 1e-12 {
        return Err(EllipticError::CoverageMismatch {
            needed,
            xi_max: symbol.xi_max(),
        });
    }
    let d = symbol.fiber_dim();
    let modes = 2 * n_modes + 1;
    let side = d * modes;

    // Column blocks per incoming mode, computed independently.
    let columns: Vec<Vec<Vec<Complex64>>> = (0..modes)
        .into_par_iter()
        .map(|ni| {
            let n = ni as i64 - n_modes as i64;
            let xi = n as f64 / t;
            let fibers: Vec<ComplexMatrix> =
                (0..p).map(|j| symbol.eval(j, xi)).collect();
            // Per fiber entry: Fourier bins over the angle grid.
            let mut bins = Vec::with_capacity(d * d);
            for c in 0..d {
                for c2 in 0..d {
                    let seq: Vec<Complex64> = fibers.iter().map(|m| m[(c, c2)]).collect();
                    bins.push(fourier_bins(&seq));
                }
            }
            bins
        })
        .collect();

    let mut out = ComplexMatrix::zeros(side, side);
    for ni in 0..modes {
        let n = ni as i64 - n_modes as i64;
        let bins = &columns[ni];
        for c in 0..d {
            for c2 in 0..d {
                let coeffs = &bins[c * d + c2];
                for mi in 0..modes {
                    let m = mi as i64 - n_modes as i64;
                    out[(c * modes + mi, c2 * modes + ni)] = coeffs[bin(m - n, p)];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigvals_hermitian;
    use crate::func::gaussian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_spec(p: usize) -> CircleOperatorSpec {
        CircleOperatorSpec::scalar(p, |_| c(1.0, 0.0), |_| c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn ellipticity_is_enforced() {
        let res = CircleOperatorSpec::scalar(64, |th| c(th.sin(), 0.0), |_| c(0.0, 0.0));
        assert!(matches!(
            res,
            Err(EllipticError::EllipticityViolation { .. })
        ));
    }

    #[test]
    fn free_operator_spectrum_is_symmetric_integers() {
        let spec = free_spec(64);
        let op = assemble_operator(&spec, 8).unwrap();
        assert!(op.matrix.hermitian_defect() < 1e-12);
        // Degree one for the block grading.
        let anti = op.grading.matrix().anticommutator(&op.matrix);
        assert!(anti.frobenius_norm() < 1e-12);
        let vals = eigvals_hermitian(&op.matrix).unwrap();
        // Eigenvalues are {±n : |n| <= 8} with doubled multiplicity for n != 0.
        let mut expected: Vec<f64> = Vec::new();
        for n in -8i64..=8 {
            expected.push(n as f64);
            expected.push(-(n as f64));
        }
        expected.sort_by(f64::total_cmp);
        for (v, e) in vals.iter().zip(&expected) {
            assert!((v - e).abs() < 1e-10, "{v} vs {e}");
        }
    }

    #[test]
    fn constant_zeroth_order_shifts_the_spectrum() {
        let lambda = 0.37;
        let spec = CircleOperatorSpec::scalar(64, |_| c(1.0, 0.0), move |_| c(lambda, 0.0)).unwrap();
        let op = assemble_operator(&spec, 6).unwrap();
        let vals = eigvals_hermitian(&op.matrix).unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for n in -6i64..=6 {
            let s = n as f64 + lambda;
            expected.push(s.abs());
            expected.push(-s.abs());
        }
        expected.sort_by(f64::total_cmp);
        for (v, e) in vals.iter().zip(&expected) {
            assert!((v - e).abs() < 1e-10, "{v} vs {e}");
        }
    }

    #[test]
    fn cosine_potential_is_hermitian_with_real_spectrum() {
        let spec = CircleOperatorSpec::scalar(128, |_| c(1.0, 0.0), |th| c(th.cos(), 0.0)).unwrap();
        let op = assemble_operator(&spec, 16).unwrap();
        assert!(op.matrix.hermitian_defect() < 1e-12);
        let vals = eigvals_hermitian(&op.matrix).unwrap();
        assert!(vals.iter().all(|v| v.is_finite()));
        // The corner itself is the (odd <- even) block.
        let side = op.corner.rows();
        assert!(op.matrix.block(side, 0, side, side).approx_eq(&op.corner, 0.0));
    }

    #[test]
    fn grid_must_resolve_the_bands() {
        let spec = free_spec(16);
        assert!(matches!(
            assemble_operator(&spec, 8),
            Err(EllipticError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn scalar_resolvent_decay_is_exact() {
        let spec = free_spec(32);
        let field = SymbolField::from_spec(&spec, 8.0, 9).unwrap();
        let table = symbol_resolvent_decay(&field).unwrap();
        assert!(table.verified);
        for e in &table.entries {
            let expected = 1.0 / (e.xi * e.xi + 1.0).sqrt();
            assert!((e.norm_minus - expected).abs() < 1e-10);
            assert!((e.norm_plus - expected).abs() < 1e-10);
            if e.xi == 0.0 {
                assert!((e.norm_minus - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_decay_bound_matches_svd_oracle() {
        let spec = CircleOperatorSpec::from_fns(
            2,
            32,
            |th| {
                ComplexMatrix::new(
                    2,
                    2,
                    vec![
                        c(2.0 + th.cos(), 0.0),
                        c(0.3, 0.1 * th.sin()),
                        c(0.3, -0.1 * th.sin()),
                        c(1.5, 0.0),
                    ],
                )
                .unwrap()
            },
            |_| ComplexMatrix::zeros(2, 2),
        )
        .unwrap();
        let field = SymbolField::from_spec(&spec, 6.0, 7).unwrap();
        let table = symbol_resolvent_decay(&field).unwrap();
        assert!(table.verified, "worst ratio {}", table.worst_ratio);
        // Oracle: the norm is (s_min(sigma)^2 + 1)^(-1/2) via the SVD of sigma.
        for e in table.entries.iter().step_by(5) {
            let sigma = field.sigma(e.theta_index, e.xi);
            let svd = svd_threshold(&sigma, Some(1e-14)).unwrap();
            let smin = svd.singular_values.last().copied().unwrap_or(0.0);
            let oracle = 1.0 / (smin * smin + 1.0).sqrt();
            assert!((e.norm_minus - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn symbol_class_boundary_and_ranks() {
        let spec = free_spec(16);
        let field = SymbolField::from_spec(&spec, 4.0, 5).unwrap();
        let cat = vec![gaussian(1.0), crate::func::odd_gaussian(1.0)];
        let report = symbol_class(&field, &cat, 1e-3).unwrap();
        // The window is enlarged to meet the boundary tolerance.
        assert!(report.xi_max_used >= 2.0 * field.decay_constant() / 1e-3 - 1.0);
        assert!(report.boundary_deviation <= 1e-3);
        assert!(report.projection_defect < 1e-10);
        assert_eq!(report.rank_difference_max, 0);
        assert!(report.odd_parity_defect < 1e-10);
    }

    #[test]
    fn cayley_at_zero_frequency_is_minus_one() {
        let spec = free_spec(16);
        let field = SymbolField::from_spec(&spec, 4.0, 5).unwrap();
        let u = field.cayley(3, 0.0).unwrap();
        assert!(u.approx_eq(&ComplexMatrix::identity(2).scaled_re(-1.0), 1e-13));
        // p(u eps) = 1 - p(eps) there.
        let eps = field.fiber_grading();
        let ueps = u.mul(eps.matrix());
        let p_ueps = (&ueps + &ComplexMatrix::identity(2)).scaled_re(0.5);
        let p_eps = eps.even_projection();
        assert!(p_ueps.approx_eq(&(&ComplexMatrix::identity(2) - &p_eps), 1e-13));
    }

    #[test]
    fn quantize_frequency_multiplier_is_diagonal() {
        let p = 64;
        let g = gaussian(1.0);
        let sym = FnSymbol {
            fiber_dim: 1,
            theta_count: p,
            xi_max: 16.0,
            eval_fn: |_th: f64, xi: f64| {
                ComplexMatrix::diag(&[Complex64::new((-xi * xi).exp(), 0.0)])
            },
        };
        let config = QuantizationConfig::new(8, p, 1e-3).unwrap();
        let q = quantize(&sym, 2.0, &config).unwrap();
        for mi in 0..17usize {
            for ni in 0..17usize {
                let m = mi as i64 - 8;
                let n = ni as i64 - 8;
                let expected = if m == n {
                    g.eval(n as f64 / 2.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((q[(mi, ni)] - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn quantize_single_angular_mode_is_one_band() {
        let p = 64;
        let sym = FnSymbol {
            fiber_dim: 1,
            theta_count: p,
            xi_max: 16.0,
            eval_fn: |th: f64, xi: f64| {
                ComplexMatrix::diag(&[Complex64::from_polar(1.0, th)
                    * Complex64::new((-xi * xi).exp(), 0.0)])
            },
        };
        let config = QuantizationConfig::new(8, p, 1e-3).unwrap();
        let q = quantize(&sym, 2.0, &config).unwrap();
        for mi in 0..17usize {
            for ni in 0..17usize {
                let m = mi as i64 - 8;
                let n = ni as i64 - 8;
                let expected = if m == n + 1 {
                    Complex64::new((-(n as f64 / 2.0).powi(2)).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!(
                    (q[(mi, ni)] - expected).norm() < 1e-13,
                    "entry ({mi},{ni})"
                );
            }
        }
    }

    #[test]
    fn quantize_asymptotic_multiplicativity() {
        // || Psi_t(ab) - Psi_t(a) Psi_t(b) || decays like 1/t.
        let p = 128;
        let make = |phase: f64| FnSymbol {
            fiber_dim: 1,
            theta_count: p,
            xi_max: 64.0,
            eval_fn: move |th: f64, xi: f64| {
                ComplexMatrix::diag(&[Complex64::from_polar(1.0, phase * th.sin())
                    * Complex64::new((-xi * xi).exp(), 0.0)])
            },
        };
        let a = make(1.0);
        let b = make(-0.7);
        let ab = FnSymbol {
            fiber_dim: 1,
            theta_count: p,
            xi_max: 64.0,
            eval_fn: |th: f64, xi: f64| {
                ComplexMatrix::diag(&[Complex64::from_polar(1.0, 0.3 * th.sin())
                    * Complex64::new((-2.0 * xi * xi).exp(), 0.0)])
            },
        };
        let config = QuantizationConfig::new(32, p, 1e-2).unwrap();
        let mut defects = Vec::new();
        for t in [2.0, 4.0, 8.0] {
            let qa = quantize(&a, t, &config).unwrap();
            let qb = quantize(&b, t, &config).unwrap();
            let qab = quantize(&ab, t, &config).unwrap();
            defects.push(op_norm(&(&qab - &qa.mul(&qb))));
        }
        assert!(defects[1] < defects[0] && defects[2] < defects[1], "{defects:?}");
        // Roughly first-order decay.
        assert!(defects[2] < defects[0] / 2.5, "{defects:?}");
    }

    #[test]
    fn quantize_norm_bounded_by_sup_plus_order_one_over_t() {
        let p = 64;
        let sym = FnSymbol {
            fiber_dim: 1,
            theta_count: p,
            xi_max: 32.0,
            eval_fn: |th: f64, xi: f64| {
                ComplexMatrix::diag(&[Complex64::new(
                    (2.0 + th.cos()) * (-xi * xi).exp(),
                    0.0,
                )])
            },
        };
        let sup = 3.0; // max over theta, xi of |values|
        let config = QuantizationConfig::new(8, p, 1e-2).unwrap();
        let margin = |t: f64| {
            let q = quantize(&sym, t, &config).unwrap();
            (op_norm(&q) - sup).max(0.0)
        };
        let m4 = margin(4.0);
        let m16 = margin(16.0);
        assert!(m16 <= m4 + 1e-12);
        assert!(m16 < 0.2);
    }

    #[test]
    fn config_rejects_tail_contamination() {
        // Slow Gaussian at large t: the tail at (N+1)/t is too fat.
        let config = QuantizationConfig::new(8, 64, 1e-3).unwrap();
        let res = config.validate_tails(&[gaussian(4.0)], &[8.0]);
        assert!(matches!(res, Err(EllipticError::TailContamination { .. })));
        // Fast decay passes.
        config.validate_tails(&[gaussian(1.0)], &[2.0]).unwrap();
    }

    #[test]
    fn coverage_mismatch_is_caught() {
        let spec = free_spec(64);
        let field = SymbolField::from_spec(&spec, 2.0, 5).unwrap();
        let config = QuantizationConfig::new(16, 64, 1e-3).unwrap();
        let g = gaussian(1.0);
        let cal = CalculusSymbol { field: &field, f: &g };
        assert!(matches!(
            quantize(&cal, 1.0, &config),
            Err(EllipticError::CoverageMismatch { .. })
        ));
    }

    #[test]
    fn symbol_homogeneity_is_exact_on_samples() {
        let spec = CircleOperatorSpec::scalar(32, |th| c(1.5 + 0.5 * th.cos(), 0.0), |_| c(0.0, 0.0))
            .unwrap();
        let field = SymbolField::from_spec(&spec, 4.0, 5).unwrap();
        for j in [0usize, 7, 19] {
            for xi in [0.5, 1.0, 2.0] {
                for s in [2.0, 3.0] {
                    let lhs = field.sigma(j, s * xi);
                    let rhs = field.sigma(j, xi).scaled_re(s);
                    assert!(lhs.approx_eq(&rhs, 1e-14));
                }
            }
        }
    }
}
