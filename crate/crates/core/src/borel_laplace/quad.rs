//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use crate::error::{Error, Result};
use crate::scalar::{czero, lit, Cx, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<T: Real> {
    a: T,
    b: T,
    value: Cx<T>,
    error: T,
    l1: T,
}

fn gk15<T: Real>(f: &mut impl FnMut(T) -> Cx<T>, a: T, b: T) -> Panel<T> {
    let half = lit::<T>(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kron = fc * lit::<T>(WGK[7]);
    let mut gauss = fc * lit::<T>(WG[3]);
    let mut l1 = fc.norm() * lit::<T>(WGK[7]);
    for j in 0..7 {
        let dx = h * lit::<T>(XGK[j]);
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += (f1 + f2) * lit::<T>(WGK[j]);
        l1 += (f1.norm() + f2.norm()) * lit::<T>(WGK[j]);
        if j % 2 == 1 {
            gauss += (f1 + f2) * lit::<T>(WG[j / 2]);
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).norm();
    Panel {
        a,
        b,
        value,
        error,
        l1: l1 * h.abs(),
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T: Real> {
    pub value: Cx<T>,
    pub error: T,
    pub l1: T,
}

/// Integrate `f` over `[a, b]` until the estimated error is below
/// `tol·max(|I|, ε·∫|f|)`.
pub fn integrate<T: Real>(mut f: impl FnMut(T) -> Cx<T>, a: T, b: T, tol: T) -> Result<Quadrature<T>> {
    const MAX_PANELS: usize = 4000;
    let mut panels = vec![gk15(&mut f, a, b)];
    loop {
        let value: Cx<T> = panels.iter().fold(czero(), |acc, p| acc + p.value);
        let error: T = panels.iter().map(|p| p.error).sum();
        let l1: T = panels.iter().map(|p| p.l1).sum();
        let target = tol * value.norm().max(T::epsilon() * l1);
        if error <= target || l1 == T::zero() {
            return Ok(Quadrature { value, error, l1 });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Tolerance(format!(
                "adaptive quadrature stalled at error {:e} (target {:e})",
                crate::scalar::to_f64(error),
                crate::scalar::to_f64(target)
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty panel list");
        let p = panels.swap_remove(idx);
        let mid = (p.a + p.b) * lit::<T>(0.5);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Tolerance("quadrature panel collapsed".into()));
        }
        panels.push(gk15(&mut f, p.a, mid));
        panels.push(gk15(&mut f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn polynomial_and_oscillatory() {
        let q = integrate(|t: f64| cx(t * t, 0.0), 0.0, 3.0, 1e-13).unwrap();
        assert!((q.value.re - 9.0).abs() < 1e-12);
        let q = integrate(|t: f64| cx(0.0, t).exp(), 0.0, 10.0, 1e-12).unwrap();
        let exact = (cx(0.0, 10.0f64).exp() - cx(1.0, 0.0)) / cx(0.0, 1.0);
        assert!((q.value - exact).norm() < 1e-11);
    }

    #[test]
    fn peaked_integrand() {
        let q = integrate(|t: f64| cx(1.0 / (1e-4 + (t - 0.3) * (t - 0.3)), 0.0), 0.0, 1.0, 1e-10).unwrap();
        let exact = ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan()) / 1e-2;
        assert!((q.value.re - exact).abs() < 1e-8 * exact);
    }
}
