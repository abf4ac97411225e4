//! Smooth time cutoff: `phi = 1` on `[-1/2, 1/2]`, `phi = 0` outside `(-1, 1)`.
//!
//! With `f(x) = exp(-1/x)` for `x > 0` and `f(x) = 0` otherwise, the step
//! `s(x) = f(x) / (f(x) + f(1 - x))` rises from 0 at `x = 0` to 1 at `x = 1`,
//! and `phi(t) = s(2 (1 - |t|))`.

#[inline]
fn f(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step on `[0, 1]`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = f(x);
        a / (a + f(1.0 - x))
    }
}

#[inline]
pub fn phi(t: f64) -> f64 {
    smooth_step(2.0 * (1.0 - t.abs()))
}

/// `phi(t / delta)`.
#[inline]
pub fn phi_delta(t: f64, delta: f64) -> f64 {
    phi(t / delta)
}
