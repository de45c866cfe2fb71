//! gradedk: a numerical laboratory for graded matrix algebras and index theory
//! on the circle.
//!
//! The crate builds everything from one dense complex kernel:
//!
//! - [`matrix`], [`eigen`], [`svd`] — self-contained linear algebra: Hermitian
//!   eigendecomposition, functional calculus, thresholded SVD with kernel and
//!   cokernel projections, operator norms.
//! - [`graded`] — grading operators, parity decomposition, and the
//!   Koszul-signed graded tensor product.
//! - [`func`], [`hom`] — function specifications with declared parity and
//!   decay, finite-dimensional graded *-homomorphisms out of functions on the
//!   line, the converse functional calculus, Cayley and bounded transforms.
//! - [`ktheory`] — K-theory of finite-dimensional C*-algebras as rank vectors,
//!   the mu/nu correspondence with spectral homomorphisms, direct sums,
//!   inverses, coupled-operator and compression homotopies, Fredholm indices.
//! - [`elliptic`], [`experiments`] — first-order operators on the circle at
//!   finite Fourier truncation, symbol fields, Kohn-Nirenberg quantization,
//!   quantization-convergence and Toeplitz index experiments.
//! - [`audit`] — identity audits that pin down the algebraically forced form
//!   of a handful of delicate sign and normalization conventions.

pub mod audit;
pub mod eigen;
pub mod elliptic;
pub mod experiments;
pub mod func;
pub mod graded;
pub mod hom;
pub mod ktheory;
pub mod matrix;
pub mod random;
pub mod svd;

pub use eigen::{apply_function, eig_hermitian, eigvals_hermitian, op_norm, EigenSystem};
pub use matrix::{ComplexMatrix, KernelError};
pub use svd::{svd_threshold, SvdThreshold};
