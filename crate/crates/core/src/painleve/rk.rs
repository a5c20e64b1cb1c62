//! Adaptive Dormand–Prince 5(4) integration of a complex second-order ODE
//! along a straight segment of the complex plane.
//!
//! This is deliberately independent of the series machinery: it serves as
//! the classical oracle for the assembled systems and the summed solutions.

use crate::error::{Error, Result};
use crate::scalar::{lit, Cx, Real};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-size control of [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 200_000,
        }
    }
}

/// Integrate `y″ = f(t, y, y′)` from `t0` to `t1` along the segment joining
/// them; `state = [y, y′]`.
pub fn integrate<T: Real, F>(f: F, t0: Cx<T>, state: [Cx<T>; 2], t1: Cx<T>, opts: &RkOptions) -> Result<[Cx<T>; 2]>
where
    F: Fn(Cx<T>, Cx<T>, Cx<T>) -> Cx<T>,
{
    let span = t1 - t0;
    // dY/dτ on τ ∈ [0, 1]
    let rhs = |tau: T, y: &[Cx<T>; 2]| -> [Cx<T>; 2] {
        let t = t0 + span * tau;
        [span * y[1], span * f(t, y[0], y[1])]
    };
    let mut tau = T::zero();
    let mut y = state;
    let mut h = lit::<T>(1e-3);
    let rtol = lit::<T>(opts.rtol);
    let atol = lit::<T>(opts.atol);
    for _ in 0..opts.max_steps {
        if tau >= T::one() {
            return Ok(y);
        }
        h = h.min(T::one() - tau);
        let mut k = [[Cx::new(T::zero(), T::zero()); 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = lit::<T>(A[s][j]);
                for c in 0..2 {
                    ys[c] += kj[c] * h * a;
                }
            }
            k[s] = rhs(tau + h * lit::<T>(C[s]), &ys);
        }
        let mut y5 = y;
        let mut err = T::zero();
        for c in 0..2 {
            let mut e = Cx::new(T::zero(), T::zero());
            for s in 0..7 {
                y5[c] += k[s][c] * h * lit::<T>(B5[s]);
                e += k[s][c] * h * lit::<T>(B5[s] - B4[s]);
            }
            let scale = atol + rtol * y[c].norm().max(y5[c].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Tolerance(format!("integration blew up at τ = {tau}")));
        }
        if err <= T::one() {
            tau += h;
            y = y5;
        }
        let factor = if err > T::zero() {
            lit::<T>(0.9) * err.powf(lit(-0.2))
        } else {
            lit(5.0)
        };
        h *= factor.max(lit(0.2)).min(lit(5.0));
        if h < lit(1e-14) {
            return Err(Error::Tolerance(format!("step size underflow at τ = {tau}")));
        }
    }
    Err(Error::Tolerance(format!("no convergence within {} steps", opts.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn harmonic_oscillator_on_a_complex_segment() {
        // y″ = −y, y = sin t
        let t0 = cx(0.0, 0.0);
        let t1 = cx(2.0, 0.7);
        let out = integrate(|_, y, _| -y, t0, [cx(0.0, 0.0), cx(1.0, 0.0)], t1, &RkOptions::default()).unwrap();
        assert!((out[0] - t1.sin()).norm() < 1e-11);
        assert!((out[1] - t1.cos()).norm() < 1e-11);
    }

    #[test]
    fn exponential_growth_is_tracked() {
        let t1 = cx(3.0, -1.0);
        let out = integrate(|_, y, _| y, cx(0.0, 0.0), [cx(1.0, 0.0), cx(1.0, 0.0)], t1, &RkOptions::default()).unwrap();
        assert!((out[0] - t1.exp()).norm() / t1.exp().norm() < 1e-11);
    }
}
