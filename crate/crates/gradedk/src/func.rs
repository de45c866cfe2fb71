//! Function specifications: callables on the real line with a declared parity
//! and sampled decay witnesses standing in for membership in the functions
//! vanishing at infinity.
//!
//! Nothing symbolic happens here; every identity the crate relies on is
//! checked pointwise on spectra. A spec validates at construction, so a
//! `FunctionSpec` that exists is usable.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Sample points (in absolute value) at which decay witnesses are recorded.
pub const DECAY_SAMPLES: [f64; 3] = [10.0, 100.0, 1000.0];

const PARITY_GRID: [f64; 8] = [0.1, 0.37, 0.8, 1.3, 2.1, 3.7, 5.0, 8.5];
const PARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FunctionError {
    #[error("function '{name}' violates declared parity at x={at} (defect {defect:.3e})")]
    ParityViolation { name: String, at: f64, defect: f64 },
    #[error("function '{name}' lacks a decay witness: |f| at (10,100,1000) = {witness:?}")]
    DecayViolation { name: String, witness: [f64; 3] },
    #[error("function '{name}' returned a non-finite value at x={at}")]
    NonFinite { name: String, at: f64 },
}

/// Declared parity of a function under `x -> -x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    General,
}

impl Parity {
    fn combine(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Even, p) | (p, Parity::Even) => p,
            (Parity::Odd, Parity::Odd) => Parity::Even,
            _ => Parity::General,
        }
    }
}

type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A function on the line with declared parity and verified decay.
#[derive(Clone)]
pub struct FunctionSpec {
    name: String,
    parity: Parity,
    eval: Evaluator,
    decay_witness: [f64; 3],
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("parity", &self.parity)
            .field("decay_witness", &self.decay_witness)
            .finish()
    }
}

impl FunctionSpec {
    /// Validates parity on a sample grid and decay at the witness points.
    pub fn new(
        name: impl Into<String>,
        parity: Parity,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self, FunctionError> {
        let name = name.into();
        let eval: Evaluator = Arc::new(eval);

        for &x in &PARITY_GRID {
            let fx = eval(x);
            let fmx = eval(-x);
            for (v, at) in [(fx, x), (fmx, -x)] {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(FunctionError::NonFinite { name, at });
                }
            }
            let defect = match parity {
                Parity::Even => (fmx - fx).norm(),
                Parity::Odd => (fmx + fx).norm(),
                Parity::General => 0.0,
            };
            if defect > PARITY_TOL * fx.norm().max(1.0) {
                return Err(FunctionError::ParityViolation {
                    name,
                    at: x,
                    defect,
                });
            }
        }

        let mut witness = [0.0f64; 3];
        for (w, &x) in witness.iter_mut().zip(&DECAY_SAMPLES) {
            *w = eval(x).norm().max(eval(-x).norm());
        }
        let slack = 1e-12;
        let decreasing = witness[1] <= witness[0] + slack && witness[2] <= witness[1] + slack;
        let vanishing = witness[2] <= (witness[0] / 2.0).max(slack);
        if !(decreasing && vanishing) {
            return Err(FunctionError::DecayViolation { name, witness });
        }

        Ok(Self {
            name,
            parity,
            eval,
            decay_witness: witness,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn decay_witness(&self) -> [f64; 3] {
        self.decay_witness
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    /// Pointwise complex conjugate, same parity.
    pub fn conjugate(&self) -> FunctionSpec {
        let inner = self.eval.clone();
        FunctionSpec::new(format!("conj({})", self.name), self.parity, move |x| {
            inner(x).conj()
        })
        .expect("conjugate preserves parity and decay")
    }

    /// Pointwise product; parities combine, decay only improves.
    pub fn product(&self, other: &FunctionSpec) -> FunctionSpec {
        let f = self.eval.clone();
        let g = other.eval.clone();
        FunctionSpec::new(
            format!("{}*{}", self.name, other.name),
            self.parity.combine(other.parity),
            move |x| f(x) * g(x),
        )
        .expect("products of valid specs stay valid")
    }

    /// Sampled upper bound for `sup { |f(x)| : |x| >= t }`.
    ///
    /// The sample set is a dense linear grid near `t` plus a geometric tail;
    /// callers may supply extra points (spectra, typically) that must be
    /// included in the sampling.
    pub fn tail_sup(&self, t: f64, extra: &[f64]) -> f64 {
        let mut best = 0.0f64;
        let mut probe = |x: f64| {
            if x.abs() >= t {
                best = best.max((self.eval)(x).norm());
            }
        };
        let span = (t.abs().max(1.0)) * 4.0 + 40.0;
        let steps = 3000;
        for k in 0..=steps {
            let x = t + span * (k as f64) / (steps as f64);
            probe(x);
            probe(-x);
        }
        // Geometric tail out to 1e6.
        let mut x = t.max(1e-3);
        while x < 1e6 {
            probe(x);
            probe(-x);
            x *= 1.25;
        }
        for &x in extra {
            probe(x);
        }
        best
    }
}

/// `r_-(x) = (x - i)^{-1}`.
pub fn resolvent_minus() -> FunctionSpec {
    FunctionSpec::new("resolvent_minus", Parity::General, |x| {
        Complex64::new(1.0, 0.0) / Complex64::new(x, -1.0)
    })
    .expect("valid spec")
}

/// `r_+(x) = (x + i)^{-1}`.
pub fn resolvent_plus() -> FunctionSpec {
    FunctionSpec::new("resolvent_plus", Parity::General, |x| {
        Complex64::new(1.0, 0.0) / Complex64::new(x, 1.0)
    })
    .expect("valid spec")
}

/// `h(x) = (x^2 + 1)^{-1} = r_+ r_-`.
pub fn lorentzian() -> FunctionSpec {
    FunctionSpec::new("lorentzian", Parity::Even, |x| {
        Complex64::new(1.0 / (x * x + 1.0), 0.0)
    })
    .expect("valid spec")
}

/// `x (x^2 + 1)^{-1}`, the odd part of the resolvent pair.
pub fn odd_lorentzian() -> FunctionSpec {
    FunctionSpec::new("odd_lorentzian", Parity::Odd, |x| {
        Complex64::new(x / (x * x + 1.0), 0.0)
    })
    .expect("valid spec")
}

/// `exp(-x^2 / s)`.
pub fn gaussian(s: f64) -> FunctionSpec {
    FunctionSpec::new(format!("gauss[{s}]"), Parity::Even, move |x| {
        Complex64::new((-x * x / s).exp(), 0.0)
    })
    .expect("valid spec")
}

/// `a x exp(-x^2 / s)`.
pub fn odd_gaussian_scaled(s: f64, a: f64) -> FunctionSpec {
    FunctionSpec::new(format!("odd_gauss[{s}x{a}]"), Parity::Odd, move |x| {
        Complex64::new(a * x * (-x * x / s).exp(), 0.0)
    })
    .expect("valid spec")
}

pub fn odd_gaussian(s: f64) -> FunctionSpec {
    odd_gaussian_scaled(s, 1.0)
}

/// Smooth bump supported on `[-2, 2]`.
pub fn bump() -> FunctionSpec {
    FunctionSpec::new("bump", Parity::Even, |x| {
        let u = x / 2.0;
        if u.abs() < 1.0 {
            Complex64::new((-1.0 / (1.0 - u * u)).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("valid spec")
}

/// Odd bump `x * bump(x)`.
pub fn odd_bump() -> FunctionSpec {
    FunctionSpec::new("odd_bump", Parity::Odd, |x| {
        let u = x / 2.0;
        if u.abs() < 1.0 {
            Complex64::new(x * (-1.0 / (1.0 - u * u)).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("valid spec")
}

/// The twelve-function catalog exercised by the homomorphism laws and the
/// decay experiments: resolvents, their products, Gaussians, odd Gaussians,
/// and bumps.
pub fn catalog() -> Vec<FunctionSpec> {
    let rm = resolvent_minus();
    let rp = resolvent_plus();
    vec![
        rm.clone(),
        rp.clone(),
        rm.product(&rm),
        rp.product(&rp),
        lorentzian(),
        odd_lorentzian(),
        gaussian(1.0),
        gaussian(4.0),
        odd_gaussian(1.0),
        odd_gaussian(4.0),
        bump(),
        odd_bump(),
    ]
}
