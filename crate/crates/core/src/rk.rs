//! Dormand-Prince 5(4) stepping with a PI step-size controller.

use crate::error::Result;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Result of one trial step.
pub(crate) struct Trial<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub f_new: [f64; N],
    /// Scaled RMS error; `<= 1` means accept.
    pub err: f64,
}

#[inline]
fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One Dormand-Prince trial step from `(t, y)` with first stage `k1`.
pub(crate) fn dopri_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trial<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &combine(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(
        t + C5 * h,
        &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        t + h,
        &combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = combine(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new)?;

    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale) * (e / scale);
    }
    let err = (sum / N as f64).sqrt();
    Ok(Trial {
        y: y_new,
        f_new: k7,
        err,
    })
}

/// Proportional-integral step controller with the classic Dopri5 constants.
#[derive(Debug, Clone)]
pub(crate) struct PiController {
    fac_old: f64,
    last_rejected: bool,
}

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SHRINK_LIMIT: f64 = 5.0; // 1 / smallest factor 0.2
const GROW_LIMIT: f64 = 0.1; // 1 / largest factor 10

impl PiController {
    pub fn new() -> Self {
        Self {
            fac_old: 1e-4,
            last_rejected: false,
        }
    }

    /// Forget the integral memory, e.g. after a derivative discontinuity.
    pub fn reset(&mut self) {
        *self = Self::new();
    }

    /// Step size to use after an accepted step of size `h` with error `err`.
    pub fn accept(&mut self, err: f64, h: f64) -> f64 {
        let fac11 = err.powf(EXPO1);
        let fac = (fac11 / self.fac_old.powf(BETA) / SAFE).clamp(GROW_LIMIT, SHRINK_LIMIT);
        self.fac_old = err.max(1e-4);
        let mut h_new = h / fac;
        if self.last_rejected {
            h_new = h_new.min(h);
        }
        self.last_rejected = false;
        h_new
    }

    /// Step size to retry with after a rejected step.
    pub fn reject(&mut self, err: f64, h: f64) -> f64 {
        self.last_rejected = true;
        if !err.is_finite() {
            return h / SHRINK_LIMIT;
        }
        let fac11 = err.powf(EXPO1);
        h / (fac11 / SAFE).min(SHRINK_LIMIT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifth_order_on_exponential() {
        // Global error of a single step should scale like h^6 locally.
        let mut f = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        let mut local = |h: f64| {
            let tr = dopri_step(&mut f, 0.0, &[1.0], &[1.0], h, 1e-6, 1e-9).unwrap();
            (tr.y[0] - h.exp()).abs()
        };
        let e1 = local(0.1);
        let e2 = local(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 5.5, "observed local order {order}");
    }

    #[test]
    fn controller_shrinks_on_large_error() {
        let mut pi = PiController::new();
        let h = pi.reject(100.0, 1.0);
        assert!(h < 1.0 && h >= 0.2);
        let h = pi.accept(0.5, h);
        assert!(h <= 1.0);
    }

    #[test]
    fn non_finite_error_shrinks_by_limit() {
        let mut pi = PiController::new();
        assert_eq!(pi.reject(f64::NAN, 1.0), 0.2);
    }
}
