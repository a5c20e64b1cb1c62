use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use transseries::formal_series::{MatSeries, MultiIndex, Nonlinearity, Series};
use transseries::linalg::CMat;
use transseries::reduction::{
    formal_particular_solution, leading_matrix, normalize_constant_in_y, prepare, recentre, NonlinearSystem,
};
use transseries::samples;
use transseries::scalar::cx;
use transseries::spectral::eigen_data;
use transseries::C64;

fn c(v: f64) -> C64 {
    cx(v, 0.0)
}

/// With `K = 0` recentring is the substitution `Y = xW`:
/// `x^{1+γ}W′ = (F(x, xW) − x^{1+γ}W) / x` on the original right side.
#[test]
fn recentring_at_zero_is_the_scaling_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let gamma = 1;
    let sys = samples::nonlinear_system(&mut rng, 2, gamma, 10);
    let zero = vec![Series::zero(10); 2];
    let moved = recentre(&sys, &zero).unwrap();
    let scaled = normalize_constant_in_y(&sys).unwrap();
    let x = cx(0.07, 0.02);
    let w = [cx(0.01, -0.02), cx(0.03, 0.0)];
    let y: Vec<C64> = w.iter().map(|v| v * x).collect();
    let orig = sys.rhs(x, &y);
    let xg = x.powi(gamma as i32 + 1);
    for ((a, b), (o, wi)) in moved.rhs(x, &w).iter().zip(scaled.rhs(x, &w)).zip(orig.iter().zip(&w)) {
        let expected = (o - xg * wi) / x;
        assert!((a - b).norm() < 1e-14);
        assert!((a - expected).norm() < 1e-12 * (1.0 + expected.norm()), "{a} vs {expected}");
    }
}

#[test]
fn prepare_passes_through_recentred_systems() {
    let order = 8;
    let a = MatSeries::constant(CMat::diag(&[c(1.0), c(-2.0)]), order);
    let mut f = Nonlinearity::zero(2);
    f.add_term(0, MultiIndex::new(vec![2, 0]), Series::monomial(c(1.0), 1, order)).unwrap();
    let sys = NonlinearSystem::new(1, vec![Series::zero(order); 2], a, f).unwrap();
    let (same, k, scaled) = prepare(&sys).unwrap();
    assert!(!scaled);
    assert!(k.iter().all(Series::is_zero));
    assert_eq!(same.a(), sys.a());
}

#[test]
fn normalization_absorbs_the_constant_nonlinearity() {
    // x²y′ = y + y² with Y = xZ: x²Z′ = (1 − x)Z + xZ²
    let order = 6;
    let a = MatSeries::constant(CMat::diag(&[c(1.0)]), order);
    let mut f = Nonlinearity::zero(1);
    f.add_term(0, MultiIndex::new(vec![2]), Series::one(order)).unwrap();
    let sys = NonlinearSystem::new(1, vec![Series::zero(order)], a, f).unwrap();
    let z = normalize_constant_in_y(&sys).unwrap();
    assert_eq!(z.a().coeff(1)[(0, 0)], c(-1.0));
    let g = z.nonlinearity().component(0).get(&MultiIndex::new(vec![2])).unwrap();
    assert_eq!(g.coeff(1), c(1.0));
    assert!(z.nonlinearity_vanishes_at_origin());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Shifting by the formal solution moves it to the origin: `W = 0` solves
    /// the recentred system.
    #[test]
    fn recentred_system_has_no_forcing(seed in 0u64..10_000, n in 1usize..4, gamma in 1u32..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = samples::nonlinear_system(&mut rng, n, gamma, 14);
        prop_assume!(eigen_data(&leading_matrix(&sys), gamma).is_ok());
        let (reduced, k, _) = prepare(&sys).unwrap();
        prop_assert!(reduced.f0_is_zero() || reduced.f0().iter().all(|s| s.max_abs() < 1e-9 * (1.0 + k.iter().map(|s| s.max_abs()).fold(0.0, f64::max))));
        prop_assert!(reduced.nonlinearity_vanishes_at_origin());
        let direct = formal_particular_solution(&sys, 14).unwrap();
        let res = sys.formal_residual(&direct).unwrap();
        let scale = direct.iter().map(|s| s.max_abs()).fold(1.0, f64::max);
        prop_assert!(res.iter().all(|r| r.max_abs() < 1e-10 * scale * 14.0));
    }
}
