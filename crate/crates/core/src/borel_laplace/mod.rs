//! κ-Borel transform, κ-convolution and κ-Laplace summation.
//!
//! A [`BorelSeries`] stores the regular part `r(ξ) = Σ a_n ξ^{n−1}/Γ(n/κ)` of
//! the transform `f̂(ξ) = ξ^{1−κ} r(ξ)` of `f(x) = Σ_{n≥1} a_n x^n`.
//! Numerical summation continues `r` by a Padé approximant and integrates
//! `κ ∫_0^{∞e^{iθ}} e^{−(ξ/x)^κ} r(ξ) dξ` with adaptive Gauss–Kronrod.

mod pade;
mod quad;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal_series::Series;
use crate::scalar::{angle_diff, beta, cis, czero, from_usize, gamma, lit, to_f64, Cx, Real};

pub use pade::Pade;
pub use quad::{integrate, Quadrature};

/// Borel transform `ξ^{1−κ}·regular(ξ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorelSeries<T: Real> {
    kappa: u32,
    regular: Series<T>,
}

/// Certified growth `|φ(ξ)| ≤ M |ξ|^{s−κ} e^{c|ξ|^κ} / Γ(s/κ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthBound<T: Real> {
    pub m: T,
    pub c: T,
    pub s: T,
}

/// Open sector `|arg − theta| < half_width`, optionally bounded in modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectorSpec<T: Real> {
    pub theta: T,
    pub half_width: T,
    pub radius: Option<T>,
}

impl<T: Real> SectorSpec<T> {
    pub fn new(theta: T, half_width: T, radius: Option<T>) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::Precondition("sector half-width must be positive".into()));
        }
        if let Some(r) = radius {
            if !(r > T::zero()) {
                return Err(Error::Precondition("sector radius must be positive".into()));
            }
        }
        Ok(SectorSpec {
            theta,
            half_width,
            radius,
        })
    }

    /// Direction-only sector used to name an integration ray.
    pub fn ray(theta: T) -> Self {
        SectorSpec {
            theta,
            half_width: lit(1e-9),
            radius: None,
        }
    }

    /// Whether direction `arg` lies in the open angular range.
    pub fn contains_direction(&self, arg: T) -> bool {
        angle_diff(arg, self.theta).abs() < self.half_width
    }

    pub fn contains(&self, z: Cx<T>) -> bool {
        self.contains_direction(z.arg()) && self.radius.is_none_or(|r| z.norm() < r)
    }

    pub fn lower(&self) -> T {
        self.theta - self.half_width
    }

    pub fn upper(&self) -> T {
        self.theta + self.half_width
    }
}

/// Numerical options for Padé–Laplace summation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SummationOptions<T: Real> {
    pub pade_order: Option<(usize, usize)>,
    pub quad_tol: T,
    pub pole_tol: T,
}

impl<T: Real> Default for SummationOptions<T> {
    fn default() -> Self {
        SummationOptions {
            pade_order: None,
            quad_tol: lit(1e-12),
            pole_tol: lit(1e-3),
        }
    }
}

impl<T: Real> BorelSeries<T> {
    pub fn new(kappa: u32, regular: Series<T>) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::Precondition("kappa must be positive".into()));
        }
        Ok(BorelSeries { kappa, regular })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn regular(&self) -> &Series<T> {
        &self.regular
    }

    pub fn zero(kappa: u32, order: usize) -> Self {
        BorelSeries {
            kappa,
            regular: Series::zero(order),
        }
    }

    /// Padé continuation of the regular part.
    pub fn pade(&self, order: Option<(usize, usize)>) -> Result<Pade<T>> {
        Pade::new(self.regular.coeffs(), order)
    }

    /// `f̂(ξ)` from the truncated Taylor polynomial of the regular part.
    pub fn eval_taylor(&self, xi: Cx<T>) -> Cx<T> {
        xi.powf(T::one() - from_usize::<T>(self.kappa as usize)) * self.regular.eval(xi)
    }
}

/// `Σ_{n≥1} a_n x^n ↦ Σ a_n ξ^{n−1}/Γ(n/κ)` (regular part).
pub fn borel_transform<T: Real>(f: &Series<T>, kappa: u32) -> Result<BorelSeries<T>> {
    if kappa == 0 {
        return Err(Error::Precondition("kappa must be positive".into()));
    }
    if f.coeff(0) != czero() {
        return Err(Error::Precondition(
            "Borel transform needs a zero constant term".into(),
        ));
    }
    let k = from_usize::<T>(kappa as usize);
    let coeffs: Vec<Cx<T>> = if f.order() == 0 {
        vec![czero()]
    } else {
        (1..=f.order())
            .map(|n| f.coeff(n) / gamma(from_usize::<T>(n) / k))
            .collect()
    };
    Ok(BorelSeries {
        kappa,
        regular: Series::new(coeffs)?,
    })
}

/// Formal inverse of [`borel_transform`].
pub fn laplace_formal<T: Real>(b: &BorelSeries<T>) -> Series<T> {
    let k = from_usize::<T>(b.kappa as usize);
    let mut coeffs = vec![czero()];
    coeffs.extend(
        b.regular
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c * gamma(from_usize::<T>(i + 1) / k)),
    );
    Series::from_vec(coeffs)
}

/// κ-convolution: the transform of the product of the Laplace images.
pub fn convolve<T: Real>(a: &BorelSeries<T>, b: &BorelSeries<T>) -> Result<BorelSeries<T>> {
    if a.kappa != b.kappa {
        return Err(Error::KappaMismatch(a.kappa, b.kappa));
    }
    let k = from_usize::<T>(a.kappa as usize);
    let na = a.regular.order();
    let nb = b.regular.order();
    let order = na.min(nb) + 1;
    let mut out = vec![czero(); order + 1];
    for (i, ai) in a.regular.coeffs().iter().enumerate() {
        if *ai == czero() {
            continue;
        }
        let n = i + 1;
        for (j, bj) in b.regular.coeffs().iter().enumerate() {
            let m = j + 1;
            if n + m - 1 > order {
                break;
            }
            let w = beta(from_usize::<T>(n) / k, from_usize::<T>(m) / k);
            out[n + m - 1] += ai * bj * w;
        }
    }
    Ok(BorelSeries {
        kappa: a.kappa,
        regular: Series::new(out)?,
    })
}

/// Closed form of `ξ^{s₁−κ} ∗ ξ^{s₂−κ}` as a coefficient on `ξ^{s₁+s₂−κ}`.
pub fn monomial_convolution<T: Real>(s1: T, s2: T, kappa: u32) -> T {
    let k = from_usize::<T>(kappa as usize);
    beta(s1 / k, s2 / k)
}

/// Precomputed Padé–Laplace sum of one Borel transform along a fixed ray.
#[derive(Clone, Debug)]
pub struct BorelSum<T: Real> {
    kappa: u32,
    theta: T,
    pade: Pade<T>,
    quad_tol: T,
}

impl<T: Real> BorelSum<T> {
    pub fn new(b: &BorelSeries<T>, theta: T, opts: &SummationOptions<T>) -> Result<Self> {
        let pade = match opts.pade_order {
            Some(order) => {
                let p = b.pade(Some(order))?;
                p.check_ray(theta, opts.pole_tol)?;
                p
            }
            None => ray_clear_pade(b.regular.coeffs(), theta, opts.pole_tol)?,
        };
        Ok(BorelSum {
            kappa: b.kappa,
            theta,
            pade,
            quad_tol: opts.quad_tol,
        })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn pade(&self) -> &Pade<T> {
        &self.pade
    }

    /// Whether `x` lies in the half-width `π/(2κ)` window around the ray.
    pub fn admits(&self, x: Cx<T>) -> bool {
        let k = from_usize::<T>(self.kappa as usize);
        let phi = k * angle_diff(self.theta, x.arg());
        phi.cos() > T::zero()
    }

    pub fn eval(&self, x: Cx<T>) -> Result<Cx<T>> {
        laplace_integral(&self.pade, self.kappa, self.theta, x, self.quad_tol)
    }
}

/// Neighbouring denominator degrees tried when the diagonal approximant
/// puts a pole on the ray.
const PADE_RETRIES: usize = 6;

/// Near-diagonal Padé approximant without poles on the ray. Spurious poles
/// (for instance the ring an entire function produces) move with the degree;
/// genuine singularities persist and are reported.
fn ray_clear_pade<T: Real>(coeffs: &[Cx<T>], theta: T, pole_tol: T) -> Result<Pade<T>> {
    let first = Pade::new(coeffs, None)?;
    let err = match first.check_ray(theta, pole_tol) {
        Ok(()) => return Ok(first),
        Err(e) => e,
    };
    let n = coeffs.len();
    let m0 = (n - 1) / 2;
    for d in 1..=PADE_RETRIES {
        for m in [m0.checked_sub(d), Some(m0 + d).filter(|&m| m < n)].into_iter().flatten() {
            let p = Pade::new(coeffs, Some((n - 1 - m, m)))?;
            if p.check_ray(theta, pole_tol).is_ok() {
                log::debug!("Padé [{}/{}] clears the ray {}", n - 1 - m, m, to_f64(theta));
                return Ok(p);
            }
        }
    }
    Err(err)
}

fn laplace_integral<T: Real>(pade: &Pade<T>, kappa: u32, theta: T, x: Cx<T>, tol: T) -> Result<Cx<T>> {
    if x == czero() {
        return Ok(czero());
    }
    let k = from_usize::<T>(kappa as usize);
    let phi = k * angle_diff(theta, x.arg());
    let cphi = phi.cos();
    if !(cphi > lit(1e-12)) {
        return Err(Error::OutsideRegion(format!(
            "arg x = {} is outside the Laplace window of ray {}",
            to_f64(x.arg()),
            to_f64(theta)
        )));
    }
    let r = x.norm();
    let dir = cis(theta);
    let rot = cis(phi);
    let integrand = |s: T| -> Cx<T> {
        let u = rot * s.powf(k);
        pade.eval(dir * (s * r)) * (-u).exp()
    };
    let cutoff = (lit::<T>(36.0) / cphi).powf(T::one() / k);
    let mut total = integrate(integrand, T::zero(), cutoff, tol)?.value;
    let mut a = cutoff;
    for _ in 0..8 {
        let b = a * lit(2.0);
        let tail = integrate(integrand, a, b, tol)?.value;
        total += tail;
        if tail.norm() <= tol * total.norm() * lit(1e-2) {
            break;
        }
        a = b;
    }
    Ok(total * dir * (k * r))
}

/// Numerical Borel sum of `b` at `x` along `ray.theta`.
pub fn laplace_evaluate<T: Real>(
    b: &BorelSeries<T>,
    x: Cx<T>,
    ray: &SectorSpec<T>,
    pade_order: Option<(usize, usize)>,
    quad_tol: T,
) -> Result<Cx<T>> {
    let opts = SummationOptions {
        pade_order,
        quad_tol,
        ..SummationOptions::default()
    };
    let k = from_usize::<T>(b.kappa as usize);
    if angle_diff(x.arg(), ray.theta).abs() >= T::FRAC_PI_2() / k {
        return Err(Error::OutsideRegion(format!(
            "|arg x − θ| must be below π/(2κ); arg x = {}, θ = {}",
            to_f64(x.arg()),
            to_f64(ray.theta)
        )));
    }
    BorelSum::new(b, ray.theta, &opts)?.eval(x)
}

/// Borel sum of a series with arbitrary constant term: `c_0 + L[B(f − c_0)]`.
#[derive(Clone, Debug)]
pub struct SeriesSum<T: Real> {
    constant: Cx<T>,
    sum: Option<BorelSum<T>>,
}

impl<T: Real> SeriesSum<T> {
    pub fn new(f: &Series<T>, kappa: u32, theta: T, opts: &SummationOptions<T>) -> Result<Self> {
        let constant = f.coeff(0);
        let rest = Series::from_vec(
            std::iter::once(czero())
                .chain(f.coeffs().iter().skip(1).copied())
                .collect(),
        );
        let sum = if rest.is_zero() {
            None
        } else {
            Some(BorelSum::new(&borel_transform(&rest, kappa)?, theta, opts)?)
        };
        Ok(SeriesSum { constant, sum })
    }

    pub fn eval(&self, x: Cx<T>) -> Result<Cx<T>> {
        Ok(self.constant
            + match &self.sum {
                Some(s) => s.eval(x)?,
                None => czero(),
            })
    }
}

/// Fitted Gevrey order of a coefficient sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GevreyEstimate<T: Real> {
    /// Estimated `κ` in `|a_N| ≈ M C^N Γ(N/κ + 1)`; infinite when no
    /// factorial growth is detected.
    pub kappa: T,
    /// Fitted coefficient of `N log N` (equals `1/κ`).
    pub slope: T,
    /// Fitted geometric rate `C`.
    pub rate: T,
    /// True when the slope is indistinguishable from zero.
    pub convergent: bool,
    pub samples: usize,
}

/// Least-squares fit of `log|a_N|` against `N log N`, `N`, `1` over the
/// tail half of the nonzero coefficients (index = power).
pub fn gevrey_estimate<T: Real>(coeffs: &[Cx<T>]) -> Result<GevreyEstimate<T>> {
    let nonzero: Vec<(usize, T)> = coeffs
        .iter()
        .enumerate()
        .filter(|(n, c)| *n >= 1 && c.norm() > T::zero())
        .map(|(n, c)| (n, c.norm()))
        .collect();
    if nonzero.is_empty() {
        return Err(Error::NoSignal);
    }
    if nonzero.len() < 8 {
        return Err(Error::Precondition(format!(
            "Gevrey fit needs at least 8 nonzero coefficients, got {}",
            nonzero.len()
        )));
    }
    let tail = &nonzero[nonzero.len() / 2..];
    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for &(n, a) in tail {
        let nn = from_usize::<T>(n);
        let row = [nn * nn.ln(), nn, T::one()];
        let y = a.ln();
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let sol = solve3(ata, atb).ok_or(Error::NoSignal)?;
    let slope = sol[0];
    let convergent = slope <= lit(1e-3);
    let kappa = if convergent { T::infinity() } else { T::one() / slope };
    Ok(GevreyEstimate {
        kappa,
        slope,
        rate: sol[1].exp(),
        convergent,
        samples: tail.len(),
    })
}

fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < T::min_positive_value() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..3).rev() {
        let mut acc = b[r];
        for c in r + 1..3 {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Outcome of [`check_growth_bound`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport<T: Real> {
    pub max_ratio: T,
    pub passed: bool,
    pub ratios: Vec<T>,
}

/// Slack allowed on the bound ratio for rounding in the comparison.
const GROWTH_SLACK: f64 = 1e-12;

/// Compare `|b(ξ)|` (Padé-continued) against the bound at each sample.
pub fn check_growth_bound<T: Real>(
    b: &BorelSeries<T>,
    bound: &GrowthBound<T>,
    samples: &[Cx<T>],
) -> Result<GrowthReport<T>> {
    let pade = b.pade(None)?;
    let k = from_usize::<T>(b.kappa as usize);
    let g = gamma(bound.s / k);
    let ratios: Vec<T> = samples
        .iter()
        .map(|&xi| {
            let r = xi.norm();
            let value = r.powf(T::one() - k) * pade.eval(xi).norm();
            let limit = bound.m * r.powf(bound.s - k) * (bound.c * r.powf(k)).exp() / g;
            if limit > T::zero() {
                value / limit
            } else if value == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        })
        .map(|v| if v.is_nan() { T::infinity() } else { v })
        .collect();
    let max_ratio = ratios.iter().copied().fold(T::zero(), T::max);
    Ok(GrowthReport {
        max_ratio,
        passed: max_ratio <= T::one() + lit(GROWTH_SLACK),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn s(v: &[f64]) -> Series<f64> {
        Series::from_real(v).unwrap()
    }

    #[test]
    fn transform_examples() {
        let b = borel_transform(&s(&[0.0, 1.0]), 1).unwrap();
        assert_eq!(b.regular().coeffs(), &[cx(1.0, 0.0)]);
        let b = borel_transform(&s(&[0.0, 0.0, 0.0, 1.0]), 1).unwrap();
        assert!((b.regular().coeff(2) - cx(0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(borel_transform(&s(&[1.0, 1.0]), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn euler_series_transform_is_geometric() {
        // −Σ (m−1)! x^m  ↦  −Σ ξ^{m−1}
        let mut c = vec![cx(0.0, 0.0)];
        let mut f = 1.0;
        for m in 1..=20 {
            if m > 1 {
                f *= (m - 1) as f64;
            }
            c.push(cx(-f, 0.0));
        }
        let b = borel_transform(&Series::new(c).unwrap(), 1).unwrap();
        for coeff in b.regular().coeffs() {
            assert!((coeff - cx(-1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn laplace_formal_examples() {
        let b = BorelSeries::new(1, s(&[1.0])).unwrap();
        assert_eq!(laplace_formal(&b), s(&[0.0, 1.0]));
        let b = BorelSeries::new(1, s(&[0.0, 0.0, 0.5])).unwrap();
        assert!(laplace_formal(&b).approx_eq(&s(&[0.0, 0.0, 0.0, 1.0]), 1e-15));
    }

    #[test]
    fn convolution_examples() {
        let one = BorelSeries::new(1, s(&[1.0, 0.0])).unwrap();
        let c = convolve(&one, &one).unwrap();
        assert!((c.regular().coeff(1) - cx(1.0, 0.0)).norm() < 1e-15);
        let z = BorelSeries::zero(1, 3);
        assert!(convolve(&one, &z).unwrap().regular().is_zero());
        // κ = 2, s₁ = s₂ = 2: ξ^0 ∗ ξ^0 = ξ^2 with weight Γ(1)Γ(1)/Γ(2)
        let a = BorelSeries::new(2, s(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        let c = convolve(&a, &a).unwrap();
        assert!((c.regular().coeff(3) - cx(1.0, 0.0)).norm() < 1e-14);
        assert!((monomial_convolution(2.0f64, 2.0, 2) - 1.0).abs() < 1e-15);
        let other = BorelSeries::new(2, s(&[1.0])).unwrap();
        assert!(matches!(convolve(&one, &other), Err(Error::KappaMismatch(1, 2))));
    }

    #[test]
    fn evaluate_entire_transform() {
        let b = borel_transform(&s(&[0.0, 1.0, 1.0]), 1).unwrap();
        let v = laplace_evaluate(&b, cx(0.1, 0.0), &SectorSpec::ray(0.0), None, 1e-13).unwrap();
        assert!((v - cx(0.11, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn evaluate_geometric_against_direct_quadrature() {
        let b = BorelSeries::new(1, Series::new(vec![cx(-1.0, 0.0); 20]).unwrap()).unwrap();
        let x = cx(-0.2, 0.0);
        let v = laplace_evaluate(&b, x, &SectorSpec::ray(PI), None, 1e-13).unwrap();
        // −∫_0^{∞e^{iπ}} e^{−ξ/x}/(1−ξ) dξ with ξ = −t
        let direct = integrate(|t: f64| cx((-t / 0.2).exp() / (1.0 + t), 0.0), 0.0, 40.0, 1e-14)
            .unwrap()
            .value;
        assert!((v - direct).norm() < 1e-8, "{v} vs {direct}");
        let err = laplace_evaluate(&b, cx(0.2, 0.0), &SectorSpec::ray(0.0), None, 1e-12);
        assert!(matches!(err, Err(Error::RayObstruction { .. })));
    }

    #[test]
    fn gevrey_examples() {
        let fact: Vec<Cx<f64>> = (0..=24)
            .map(|n| if n == 0 { cx(0.0, 0.0) } else { cx(gamma(n as f64), 0.0) })
            .collect();
        let est = gevrey_estimate(&fact).unwrap();
        assert!((est.kappa - 1.0).abs() < 0.15);
        let g3: Vec<Cx<f64>> = (0..=24).map(|n| cx(gamma(n as f64 / 3.0 + 1.0), 0.0)).collect();
        assert!((gevrey_estimate(&g3).unwrap().kappa - 3.0).abs() < 0.45);
        let ones: Vec<Cx<f64>> = (0..=24).map(|_| cx(1.0, 0.0)).collect();
        assert!(gevrey_estimate(&ones).unwrap().convergent);
        assert!(matches!(gevrey_estimate(&[cx(0.0, 0.0); 10]), Err(Error::NoSignal)));
    }

    #[test]
    fn growth_bound_examples() {
        let one = BorelSeries::new(1, s(&[1.0])).unwrap();
        let samples: Vec<Cx<f64>> = (1..20).map(|k| cx(0.1 * k as f64, 0.0)).collect();
        let rep = check_growth_bound(&one, &GrowthBound { m: 1.0, c: 0.0, s: 1.0 }, &samples).unwrap();
        assert!(rep.passed);
        let geo = BorelSeries::new(1, Series::new(vec![cx(-1.0, 0.0); 20]).unwrap()).unwrap();
        let on_pi: Vec<Cx<f64>> = (1..50).map(|k| cx(-0.2 * k as f64, 0.0)).collect();
        assert!(check_growth_bound(&geo, &GrowthBound { m: 1.0, c: 0.0, s: 1.0 }, &on_pi).unwrap().passed);
        let near_pole: Vec<Cx<f64>> = [0.5, 0.9, 0.99, 0.999].iter().map(|&r| cx(r, 0.0)).collect();
        assert!(!check_growth_bound(&geo, &GrowthBound { m: 10.0, c: 0.0, s: 1.0 }, &near_pole).unwrap().passed);
    }

    fn arb_series(n: usize) -> impl Strategy<Value = Series<f64>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(|v| {
            let mut c: Vec<Cx<f64>> = v.into_iter().map(|(a, b)| cx(a, b)).collect();
            c[0] = cx(0.0, 0.0);
            Series::new(c).unwrap()
        })
    }

    proptest! {
        #[test]
        fn roundtrip(f in arb_series(16), kappa in 1u32..5) {
            let back = laplace_formal(&borel_transform(&f, kappa).unwrap());
            for m in 0..=f.order() {
                let scale = f.coeff(m).norm().max(1e-300);
                prop_assert!((back.coeff(m) - f.coeff(m)).norm() <= 1e-14 * scale.max(1.0));
            }
        }

        #[test]
        fn convolution_symmetric_and_homomorphic(f in arb_series(12), g in arb_series(12), kappa in 1u32..5) {
            let a = borel_transform(&f, kappa).unwrap();
            let b = borel_transform(&g, kappa).unwrap();
            let ab = convolve(&a, &b).unwrap();
            let ba = convolve(&b, &a).unwrap();
            prop_assert!(ab.regular().approx_eq(ba.regular(), 1e-13));
            let prod = &f * &g;
            let back = laplace_formal(&ab);
            prop_assert!(back.truncate(prod.order()).approx_eq(&prod, 1e-12));
        }

        #[test]
        fn numerical_homomorphism(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, d1 in -1.0f64..1.0, d2 in -1.0f64..1.0, kappa in 1u32..4) {
            let f = s(&[0.0, c1, c2, 0.0, 0.0, 0.0, 0.0]);
            let g = s(&[0.0, d1, d2, 0.0, 0.0, 0.0, 0.0]);
            let a = borel_transform(&f, kappa).unwrap();
            let b = borel_transform(&g, kappa).unwrap();
            let ab = convolve(&a, &b).unwrap();
            let x = cx(0.15, 0.02);
            let ray = SectorSpec::ray(0.0);
            let lhs = laplace_evaluate(&ab, x, &ray, None, 1e-13).unwrap();
            let rhs = laplace_evaluate(&a, x, &ray, None, 1e-13).unwrap() * laplace_evaluate(&b, x, &ray, None, 1e-13).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-8);
        }

        #[test]
        fn bound_propagates_through_convolution(m1 in 0.1f64..2.0, m2 in 0.1f64..2.0, s1 in 1u32..4, s2 in 1u32..4, kappa in 1u32..4) {
            // monomials saturating their bounds: m·ξ^{s−κ}/Γ(s/κ)
            let k = kappa as f64;
            let mono = |m: f64, sx: u32| {
                let mut c = vec![cx(0.0, 0.0); 12];
                c[sx as usize - 1] = cx(m / gamma(sx as f64 / k), 0.0);
                BorelSeries::new(kappa, Series::new(c).unwrap()).unwrap()
            };
            let a = mono(m1, s1);
            let b = mono(m2, s2);
            let ab = convolve(&a, &b).unwrap();
            let samples: Vec<Cx<f64>> = (1..10).map(|j| cx(0.1 * j as f64, 0.05 * j as f64)).collect();
            let bound = GrowthBound { m: m1 * m2, c: 0.0, s: (s1 + s2) as f64 };
            prop_assert!(check_growth_bound(&ab, &bound, &samples).unwrap().passed);
        }
    }
}
