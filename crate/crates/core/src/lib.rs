//! Transseries solutions of nonlinear ODE systems
//! `x^{1+γ} Y′ = F0(x) + A(x) Y + F(x, Y)` at an irregular singular point.
//!
//! The pipeline runs in stages:
//!
//! 1. [`reduction`] removes `F(0, Y) ≠ 0`, computes the formal particular
//!    solution `K(x)` and recentres the system around it;
//! 2. [`spectral`] checks the eigenvalue conditions and picks a summation
//!    direction;
//! 3. [`gauge`] brings the linear part to diagonal form;
//! 4. [`transseries`] computes the conjugating map `Φ(x, Z)` and evaluates
//!    solutions with [`borel_laplace`] summation along the chosen ray;
//! 5. [`painleve`] packages Painlevé II and IV as ready-made systems.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod borel_laplace;
pub mod error;
pub mod formal_series;
pub mod gauge;
pub mod linalg;
pub mod painleve;
pub mod reduction;
pub mod samples;
pub mod scalar;
pub mod spectral;
pub mod transseries;

pub use error::{Error, ErrorClass, Result};
pub use scalar::{Cx, Real};

/// Double-precision complex scalar.
pub type C64 = Cx<f64>;
/// Truncated power series over `f64`.
pub type XSeries = formal_series::Series<f64>;
/// Borel transform over `f64`.
pub type BorelSeries = borel_laplace::BorelSeries<f64>;
/// Nonlinear system over `f64`.
pub type NonlinearSystem = reduction::NonlinearSystem<f64>;
/// Spectral data over `f64`.
pub type SpectralData = spectral::SpectralData<f64>;
/// Transseries solution over `f64`.
pub type TransseriesSolution = transseries::TransseriesSolution<f64>;
