//! Padé approximants of a power series in a rescaled variable, with pole
//! extraction and Froissart-doublet filtering.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{poly_roots, CMat};
use crate::scalar::{czero, from_usize, lit, Cx, Real};

/// Rational approximant `p(t)/q(t)` with `t = ξ/scale`.
#[derive(Clone, Debug, Serialize)]
pub struct Pade<T: Real> {
    scale: T,
    num: Vec<Cx<T>>,
    den: Vec<Cx<T>>,
    poles: Vec<Cx<T>>,
}

/// Relative tolerance of the rank test on the Toeplitz system.
const RANK_TOL: f64 = 1e-12;
/// Relative size below which trailing coefficients are dropped.
const TRIM_TOL: f64 = 1e-14;

fn horner<T: Real>(c: &[Cx<T>], t: Cx<T>) -> Cx<T> {
    c.iter().rev().fold(czero(), |acc, a| acc * t + a)
}

/// Root-test estimate of the radius of convergence from the coefficient tail.
fn radius_estimate<T: Real>(coeffs: &[Cx<T>]) -> T {
    let n = coeffs.len();
    let start = (n / 2).max(1);
    let mut best = T::zero();
    for (k, c) in coeffs.iter().enumerate().skip(start) {
        let a = c.norm();
        if a > T::zero() {
            best = best.max(a.powf(T::one() / from_usize::<T>(k)));
        }
    }
    if best > T::zero() && best.is_finite() {
        (T::one() / best).max(lit(1e-3)).min(lit(1e3))
    } else {
        T::one()
    }
}

impl<T: Real> Pade<T> {
    /// `[L/M]` approximant from `coeffs` (lowest degree first). With `order`
    /// absent, `M = ⌊(N−1)/2⌋` and `L = N−1−M`. The denominator degree drops
    /// until the Toeplitz system has full numerical rank.
    pub fn new(coeffs: &[Cx<T>], order: Option<(usize, usize)>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 {
            return Err(Error::DegenerateOrder("Padé of an empty series".into()));
        }
        let scale = radius_estimate(coeffs);
        let a: Vec<Cx<T>> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * scale.powi(k as i32))
            .collect();
        let (mut l, mut m) = order.unwrap_or_else(|| {
            let m = (n - 1) / 2;
            (n - 1 - m, m)
        });
        if l + m + 1 > n {
            return Err(Error::DegenerateOrder(format!(
                "Padé [{l}/{m}] needs {} coefficients, have {n}",
                l + m + 1
            )));
        }
        let at = |k: isize| -> Cx<T> {
            if k < 0 {
                czero()
            } else {
                a[k as usize]
            }
        };
        let den = loop {
            if m == 0 {
                break vec![Cx::new(T::one(), T::zero())];
            }
            let sys = CMat::from_fn(m, m, |r, c| at((l + 1 + r) as isize - (c + 1) as isize));
            let rank = sys.rank(lit(RANK_TOL));
            if rank < m {
                // a lower-type approximant reproduces the data; shrink both degrees
                l = l.saturating_sub(m - rank);
                m = rank;
                continue;
            }
            let rhs: Vec<Cx<T>> = (0..m).map(|r| -at((l + 1 + r) as isize)).collect();
            match sys.solve(&rhs) {
                Ok(q) => {
                    let mut den = vec![Cx::new(T::one(), T::zero())];
                    den.extend(q);
                    break den;
                }
                Err(_) => {
                    l += 1;
                    m -= 1;
                }
            }
        };
        let mut den = den;
        let mut num: Vec<Cx<T>> = (0..=l)
            .map(|k| {
                (0..den.len().min(k + 1))
                    .map(|j| den[j] * at(k as isize - j as isize))
                    .fold(czero(), |acc, v| acc + v)
            })
            .collect();
        trim(&mut num);
        trim(&mut den);
        let poles_t = poly_roots(&den)?;
        let zeros_t = poly_roots(&num)?;
        let num_scale = num.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let poles = poles_t
            .into_iter()
            .filter(|&t| !is_doublet(t, &zeros_t, &num, &den, num_scale))
            .map(|t| t * scale)
            .collect();
        Ok(Pade {
            scale,
            num,
            den,
            poles,
        })
    }

    pub fn eval(&self, xi: Cx<T>) -> Cx<T> {
        let t = xi / self.scale;
        horner(&self.num, t) / horner(&self.den, t)
    }

    /// Genuine poles in the `ξ` variable (doublets removed).
    pub fn poles(&self) -> &[Cx<T>] {
        &self.poles
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.num.len() - 1, self.den.len() - 1)
    }

    /// Fail if a genuine pole lies within `pole_tol·|pole|` of the ray
    /// `{r e^{iθ} : r ≥ 0}`.
    pub fn check_ray(&self, theta: T, pole_tol: T) -> Result<()> {
        let rot = Cx::from_polar(T::one(), -theta);
        for &p in &self.poles {
            let w = p * rot;
            let dist = if w.re <= T::zero() { p.norm() } else { w.im.abs() };
            if dist < pole_tol * p.norm() {
                return Err(Error::RayObstruction {
                    re: crate::scalar::to_f64(p.re),
                    im: crate::scalar::to_f64(p.im),
                    distance: crate::scalar::to_f64(dist),
                });
            }
        }
        Ok(())
    }
}

/// Drop trailing coefficients at rounding level; they only add noise far
/// from the origin.
fn trim<T: Real>(c: &mut Vec<Cx<T>>) {
    let top = c.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    while c.len() > 1 && c.last().is_some_and(|v| v.norm() <= lit::<T>(TRIM_TOL) * top) {
        c.pop();
    }
}

/// A pole paired with a nearby numerator zero, or with negligible residue.
fn is_doublet<T: Real>(t: Cx<T>, zeros: &[Cx<T>], num: &[Cx<T>], den: &[Cx<T>], num_scale: T) -> bool {
    let near = lit::<T>(1e-6) * t.norm().max(T::one());
    if zeros.iter().any(|z| (z - t).norm() < near) {
        return true;
    }
    let dq: Vec<Cx<T>> = den
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * from_usize::<T>(k))
        .collect();
    let dqv = horner(&dq, t);
    if dqv == czero() {
        return false;
    }
    let residue = (horner(num, t) / dqv).norm();
    residue < lit::<T>(1e-13) * num_scale.max(T::min_positive_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn geometric_series_is_exact() {
        let c: Vec<Cx<f64>> = (0..20).map(|_| cx(-1.0, 0.0)).collect();
        let p = Pade::new(&c, None).unwrap();
        assert_eq!(p.degrees().1, 1);
        assert_eq!(p.poles().len(), 1);
        assert!((p.poles()[0] - cx(1.0, 0.0)).norm() < 1e-12);
        let z = cx(-3.0, 0.5);
        assert!((p.eval(z) - (-1.0 / (cx(1.0, 0.0) - z))).norm() < 1e-12);
        assert!(matches!(p.check_ray(0.0, 1e-3), Err(Error::RayObstruction { .. })));
        assert!(p.check_ray(std::f64::consts::PI, 1e-3).is_ok());
    }

    #[test]
    fn polynomials_have_no_poles() {
        let c = vec![cx(1.0, 0.0), cx(0.5, 0.0), cx(0.25, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        let p = Pade::new(&c, None).unwrap();
        assert!(p.poles().is_empty());
        assert!((p.eval(cx(2.0, 1.0)) - (cx(1.0, 0.0) + cx(1.0, 0.5) + cx(0.25, 0.0) * cx(2.0, 1.0) * cx(2.0, 1.0))).norm() < 1e-12);
    }

    #[test]
    fn exponential_continuation() {
        let mut c = Vec::new();
        let mut f = 1.0;
        for k in 0..24 {
            if k > 0 {
                f *= k as f64;
            }
            c.push(cx(1.0 / f, 0.0));
        }
        let p = Pade::new(&c, None).unwrap();
        let z = cx(3.0, 1.0);
        assert!((p.eval(z) - z.exp()).norm() < 1e-10 * z.exp().norm());
    }
}
