//! Seeded random inputs for property checks and the CLI `verify` batteries.
//!
//! Everything here is `f64`; callers own the RNG so that runs are
//! reproducible from a seed.

use rand::Rng;

use crate::formal_series::{MatSeries, MultiIndex, Nonlinearity, Series};
use crate::linalg::CMat;
use crate::reduction::NonlinearSystem;
use crate::scalar::{cx, Cx};
use crate::transseries::DiagonalSystem;

fn unit<R: Rng + ?Sized>(rng: &mut R) -> Cx<f64> {
    cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Coefficients uniform in the unit square times `scale`; `c_0 = 0` when
/// `zero_constant`.
pub fn series<R: Rng + ?Sized>(rng: &mut R, order: usize, zero_constant: bool, scale: f64) -> Series<f64> {
    let coeffs = (0..=order)
        .map(|m| if m == 0 && zero_constant { cx(0.0, 0.0) } else { unit(rng) * scale })
        .collect();
    Series::new(coeffs).expect("finite coefficients")
}

/// `A(x)` whose leading matrix has well separated eigenvalues near
/// `1, 2, …, n`.
pub fn matrix_series<R: Rng + ?Sized>(rng: &mut R, n: usize, order: usize) -> MatSeries<f64> {
    let coeffs = (0..=order)
        .map(|m| {
            CMat::from_fn(n, n, |i, j| match (m, i == j) {
                (0, true) => cx(1.0 + i as f64 + rng.gen_range(0.0..0.5), rng.gen_range(-0.5..0.5)),
                (0, false) => unit(rng) * 0.5,
                _ => unit(rng),
            })
        })
        .collect();
    MatSeries::from_coeffs(coeffs).expect("consistent orders")
}

/// Full system with random `F0`, `A` and quadratic plus cubic `F`.
pub fn nonlinear_system<R: Rng + ?Sized>(rng: &mut R, n: usize, gamma: u32, order: usize) -> NonlinearSystem<f64> {
    let a = matrix_series(rng, n, order);
    let f0 = (0..n).map(|_| series(rng, order, true, 1.0)).collect();
    let mut f = Nonlinearity::zero(n);
    for i in 0..n {
        for m in MultiIndex::with_total_between(n, 2, 3) {
            f.add_term(i, m, series(rng, order, false, 0.3)).expect("degree ≥ 2");
        }
    }
    NonlinearSystem::new(gamma, f0, a, f).expect("consistent shapes")
}

/// Diagonal system with `F(0, Y) = 0` whose first `n_sub` eigenvalues sit in `Re λ ∈ [1, 1.8]`
/// and the rest on the negative side, so the subset is certifiable: sums of
/// two or more subset eigenvalues have real part at least 2.
pub fn diagonal_system<R: Rng + ?Sized>(rng: &mut R, n: usize, n_sub: usize, gamma: u32, order: usize) -> DiagonalSystem<f64> {
    let lambda = (0..n)
        .map(|i| {
            let lead = if i < n_sub {
                cx(rng.gen_range(1.0..1.8), rng.gen_range(-0.3..0.3))
            } else {
                cx(-rng.gen_range(1.0..2.0), rng.gen_range(-0.3..0.3))
            };
            let mut coeffs = vec![cx(0.0, 0.0); order + 1];
            coeffs[0] = lead;
            for c in coeffs.iter_mut().take(gamma as usize + 1).skip(1) {
                *c = unit(rng) * 0.2;
            }
            Series::new(coeffs).expect("finite coefficients")
        })
        .collect();
    let mut f = Nonlinearity::zero(n);
    for i in 0..n {
        for m in MultiIndex::with_total_between(n, 2, 3) {
            f.add_term(i, m, series(rng, order, true, 0.3)).expect("degree ≥ 2");
        }
    }
    DiagonalSystem::new(gamma, lambda, f).expect("valid diagonal system")
}
