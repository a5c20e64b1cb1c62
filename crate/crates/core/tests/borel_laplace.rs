use std::f64::consts::PI;

use proptest::prelude::*;

use transseries::borel_laplace::{
    borel_transform, check_growth_bound, convolve, gevrey_estimate, laplace_evaluate, laplace_formal, BorelSeries,
    GrowthBound, SectorSpec, SeriesSum, SummationOptions,
};
use transseries::formal_series::Series;
use transseries::scalar::{cis, cx};
use transseries::{Error, C64};

fn c(v: f64) -> C64 {
    cx(v, 0.0)
}

/// `−Σ_{m ≥ 1} (m−1)! x^m`, the formal solution of `x²y′ = y + x`.
fn euler_series(order: usize) -> Series<f64> {
    let mut coeffs = vec![c(0.0)];
    let mut fact = 1.0;
    for m in 1..=order {
        if m > 1 {
            fact *= (m - 1) as f64;
        }
        coeffs.push(c(-fact));
    }
    Series::new(coeffs).unwrap()
}

#[test]
fn convergent_series_sums_to_its_closed_form() {
    // x/(1 − x) has the entire Borel transform e^ξ
    let f = Series::new((0..=24).map(|m| c(if m == 0 { 0.0 } else { 1.0 })).collect()).unwrap();
    for theta in [-0.6, 0.0, 0.9] {
        let sum = SeriesSum::new(&f, 1, theta, &SummationOptions::default()).unwrap();
        let x = cis(theta) * 0.1;
        let exact = x / (c(1.0) - x);
        assert!((sum.eval(x).unwrap() - exact).norm() < 1e-10, "θ = {theta}");
    }
}

#[test]
fn borel_sum_is_multiplicative() {
    let f = euler_series(24);
    let opts = SummationOptions::default();
    let single = SeriesSum::new(&f, 1, PI, &opts).unwrap();
    let square = SeriesSum::new(&(&f * &f), 1, PI, &opts).unwrap();
    for x in [c(-0.05), c(-0.1), cx(-0.1, 0.02)] {
        let a = single.eval(x).unwrap();
        let b = square.eval(x).unwrap();
        assert!((a * a - b).norm() < 1e-9 * (1.0 + b.norm()), "x = {x}");
    }
}

#[test]
fn euler_series_is_gevrey_one_and_bounded_on_its_ray() {
    let f = euler_series(24);
    let est = gevrey_estimate(f.coeffs()).unwrap();
    assert!((est.kappa - 1.0).abs() < 0.15, "{est:?}");
    let b = borel_transform(&f, 1).unwrap();
    let ray: Vec<C64> = (1..40).map(|k| c(-0.25 * k as f64)).collect();
    assert!(check_growth_bound(&b, &GrowthBound { m: 1.0, c: 0.0, s: 1.0 }, &ray).unwrap().passed);
}

#[test]
fn evaluation_outside_the_half_sector_is_rejected() {
    let b = borel_transform(&Series::from_real(&[0.0, 1.0, 1.0]).unwrap(), 2).unwrap();
    let err = laplace_evaluate(&b, cis(1.0) * 0.1, &SectorSpec::ray(0.0), None, 1e-12);
    assert!(matches!(err, Err(Error::OutsideRegion(_))));
    assert!(matches!(borel_transform(&Series::from_real(&[1.0]).unwrap(), 1), Err(Error::Precondition(_))));
}

fn arb_series(order: usize) -> impl Strategy<Value = Series<f64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), order).prop_map(|v| {
        let coeffs = std::iter::once(c(0.0)).chain(v.into_iter().map(|(a, b)| cx(a, b))).collect();
        Series::new(coeffs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_is_commutative_and_associative(
        f in arb_series(10), g in arb_series(10), h in arb_series(10), kappa in 1u32..4,
    ) {
        let [a, b, d] = [&f, &g, &h].map(|s| borel_transform(s, kappa).unwrap());
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        prop_assert!(ab.regular().approx_eq(ba.regular(), 1e-13));
        let left = convolve(&ab, &d).unwrap();
        let right = convolve(&a, &convolve(&b, &d).unwrap()).unwrap();
        let scale = left.regular().max_abs().max(1.0);
        prop_assert!(left.regular().approx_eq(right.regular(), 1e-12 * scale));
    }

    #[test]
    fn formal_laplace_inverts_the_transform(f in arb_series(16), kappa in 1u32..4) {
        let b = borel_transform(&f, kappa).unwrap();
        let rebuilt = BorelSeries::new(kappa, b.regular().clone()).unwrap();
        prop_assert!(laplace_formal(&rebuilt).approx_eq(&f, 1e-14));
    }
}
