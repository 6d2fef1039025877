//! Spectral computations for one-dimensional Dirac operators
//! `B y' + P y = λ y` on `[0, π]`, `B = diag(-i, i)`, with two-point
//! boundary conditions `C y(0) + D y(π) = 0`.
//!
//! The crate is organised bottom-up: [`bcond`] handles the boundary matrix
//! and the unperturbed problem, [`potential`] the coefficient data,
//! [`evolve`] the fundamental matrix, [`chardet`] the characteristic
//! determinant, [`spectrum`] the eigenvalues, [`resolvent`] Green's
//! function and spectral projectors, and [`basis`] eigenfunction families.

pub mod basis;
pub mod bcond;
pub mod chardet;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod matrix2;
pub mod operator;
pub mod potential;
pub mod quadrature;
pub mod resolvent;
pub mod spectrum;

pub use error::{DiracError, Result};
pub use matrix2::{c64, Matrix2, Vector2};
pub use num_complex::Complex64;
pub use operator::DiracOperator;
