//! Scalar trait bundle and special functions shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real field the solver is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + NumAssign
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`].
pub type Cx<T> = Complex<T>;

/// Convert an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("literal representable in scalar type")
}

/// Convert a count into `T`.
#[inline]
pub fn from_usize<T: Real>(v: usize) -> T {
    T::from_usize(v).expect("integer representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn creal<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn is_finite_c<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut t = theta % two_pi;
    if t < T::zero() {
        t += two_pi;
    }
    if t >= two_pi {
        t -= two_pi;
    }
    t
}

/// Signed angular difference `a − b` reduced to `(−π, π]`.
pub fn angle_diff<T: Real>(a: T, b: T) -> T {
    let mut d = wrap_angle(a - b);
    if d > T::PI() {
        d -= T::TAU();
    }
    d
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(x: T) -> T {
    let mut acc = lit::<T>(LANCZOS[0]);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += lit::<T>(*c) / (x + from_usize::<T>(k));
    }
    acc
}

/// Gamma function on the real line (Lanczos approximation with reflection).
pub fn gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    if x > lit(140.0) {
        return ln_gamma(x).exp();
    }
    if x == x.round() && x <= lit(30.0) {
        // exact factorial for small integers
        let mut acc = T::one();
        let mut k = lit::<T>(2.0);
        while k < x {
            acc *= k;
            k += T::one();
        }
        return acc;
    }
    let xm = x - T::one();
    let t = xm + lit::<T>(LANCZOS_G) + half;
    (T::TAU()).sqrt() * t.powf(xm + half) * (-t).exp() * lanczos_sum(xm)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let xm = x - T::one();
    let t = xm + lit::<T>(LANCZOS_G) + half;
    half * T::TAU().ln() + (xm + half) * t.ln() - t + lanczos_sum(xm).ln()
}

/// `Γ(a)Γ(b)/Γ(a+b)` for positive arguments, robust against overflow.
pub fn beta<T: Real>(a: T, b: T) -> T {
    let direct = gamma(a) * gamma(b) / gamma(a + b);
    if direct.is_finite() && direct > T::zero() {
        direct
    } else {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }
}
