//! Dormand–Prince 5(4) stepping shared by the geodesic and Legendre solvers.

use crate::error::{Error, Result};

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

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) struct Step<const N: usize> {
    pub y: [f64; N],
    pub err: [f64; N],
    pub k_end: [f64; N],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One autonomous DP5 step. `f` returns `None` outside its domain.
pub(crate) fn dp5_step<const N: usize, F>(f: &F, y: &[f64; N], k1: &[f64; N], h: f64) -> Option<Step<N>>
where
    F: Fn(&[f64; N]) -> Option<[f64; N]>,
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y5 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    if y5.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let k7 = f(&y5)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Some(Step { y: y5, err, k_end: k7 })
}

pub(crate) fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], rtol: f64, atol: f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        m = m.max((err[i] / sc).abs());
    }
    m
}

pub(crate) fn next_step_factor(e: f64) -> f64 {
    if e <= 0.0 {
        5.0
    } else {
        (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
    }
}

/// Adaptive integration of an autonomous system over a fixed parameter length.
pub(crate) fn solve_to<const N: usize, F>(f: &F, y0: [f64; N], length: f64, rtol: f64, atol: f64, max_step: f64) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> Option<[f64; N]>,
{
    let mut y = y0;
    let mut t = 0.0;
    let mut k1 = f(&y).ok_or_else(|| Error::Domain("initial state outside domain".into()))?;
    let mut h = max_step.min(length);
    while t < length {
        let hh = h.min(length - t);
        if hh < 1e-15 * length.max(1.0) {
            return Err(Error::Domain(format!("step size underflow at t = {t}")));
        }
        let Some(st) = dp5_step(f, &y, &k1, hh) else {
            h = hh * 0.25;
            continue;
        };
        let e = error_norm(&y, &st.y, &st.err, rtol, atol);
        if e > 1.0 {
            h = hh * next_step_factor(e).min(0.9);
            continue;
        }
        t = if hh == length - t { length } else { t + hh };
        y = st.y;
        k1 = st.k_end;
        h = (hh * next_step_factor(e)).min(max_step);
    }
    Ok(y)
}
