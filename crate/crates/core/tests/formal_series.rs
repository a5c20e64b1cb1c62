use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use transseries::formal_series::{substitute_nonlinearity, MatSeries, MultiIndex, Nonlinearity, Series};
use transseries::samples;
use transseries::scalar::cx;
use transseries::C64;

fn c(v: f64) -> C64 {
    cx(v, 0.0)
}

#[test]
fn substitution_matches_pointwise_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let order = 30;
    let mut f = Nonlinearity::zero(2);
    for i in 0..2 {
        for m in MultiIndex::with_total_between(2, 2, 3) {
            f.add_term(i, m, samples::series(&mut rng, 4, false, 1.0)).unwrap();
        }
    }
    let f = f.map_series(|s| Series::polynomial(s.coeffs(), order)).unwrap();
    let y: Vec<Series<f64>> = (0..2)
        .map(|_| Series::polynomial(samples::series(&mut rng, 3, false, 1.0).coeffs(), order).unwrap())
        .collect();
    let formal = substitute_nonlinearity(&f, &y).unwrap();
    // polynomial data of total degree ≤ 4 + 3·3 stays below the truncation
    let x = cx(0.3, -0.2);
    let yx: Vec<C64> = y.iter().map(|s| s.eval(x)).collect();
    for (a, b) in formal.iter().zip(f.eval(x, &yx)) {
        assert!((a.eval(x) - b).norm() < 1e-12 * (1.0 + b.norm()));
    }
}

#[test]
fn matrix_inverse_and_euler_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = samples::matrix_series(&mut rng, 3, 12);
    let inv = a.inverse().unwrap();
    let id = MatSeries::identity(3, 12);
    assert!(a.mul(&inv).sub(&id).max_abs() < 1e-12);
    // x^{1+γ}(A A⁻¹)′ = 0 splits by the product rule
    let lhs = a.euler_apply(2).unwrap().mul(&inv).add(&a.mul(&inv.euler_apply(2).unwrap()));
    assert!(lhs.max_abs() < 1e-11);
}

#[test]
fn truncation_follows_the_shorter_operand() {
    let a = Series::polynomial(&[c(1.0), c(1.0)], 6).unwrap();
    let b = Series::polynomial(&[c(1.0), c(-1.0)], 2).unwrap();
    let p = &a * &b;
    assert_eq!(p.order(), 2);
    assert_eq!(p.coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
}

fn arb_series(order: usize) -> impl Strategy<Value = Series<f64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), order + 1)
        .prop_map(|v| Series::new(v.into_iter().map(|(a, b)| cx(a, b)).collect()).unwrap())
}

proptest! {
    #[test]
    fn euler_operator_obeys_leibniz(f in arb_series(10), g in arb_series(10), gamma in 1u32..4) {
        let lhs = (&f * &g).euler_apply(gamma).unwrap();
        let rhs = &(&f.euler_apply(gamma).unwrap() * &g) + &(&f * &g.euler_apply(gamma).unwrap());
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn reciprocal_is_inverse(mut f in arb_series(10)) {
        let mut coeffs = f.coeffs().to_vec();
        coeffs[0] = c(1.0) + coeffs[0] * 0.1;
        f = Series::new(coeffs).unwrap();
        let one = &f * &f.recip().unwrap();
        prop_assert!(one.approx_eq(&Series::one(10), 1e-10));
    }
}
