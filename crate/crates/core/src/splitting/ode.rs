//! Dormand–Prince 5(4) with the usual PI-free step controller.

use crate::error::{FsiError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are the error weights b5 - b4
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

const MAX_STEPS: usize = 100_000;

/// Counters of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl OdeStats {
    pub fn add(&mut self, o: OdeStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with absolute and relative
/// tolerance `tol` and returns `y(t1)`. `h0` is the first trial step (0 picks
/// one); on return it holds the last accepted step size.
pub fn dopri5<F>(f: F, t0: f64, t1: f64, y0: &[f64], tol: f64, h0: &mut f64) -> Result<(Vec<f64>, OdeStats)>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = y0.len();
    let mut st = OdeStats::default();
    let span = t1 - t0;
    if span == 0.0 || n == 0 {
        return Ok((y0.to_vec(), st));
    }
    if !(span > 0.0) || !(tol > 0.0) {
        return Err(FsiError::Parameter(format!("bad interval [{t0}, {t1}] or tolerance {tol}")));
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![f(t, &y)?; 7];
    st.evaluations += 1;
    let mut h = if *h0 > 0.0 { h0.min(span) } else { span };
    let mut ytmp = vec![0.0; n];
    loop {
        if st.accepted + st.rejected >= MAX_STEPS {
            return Err(FsiError::Integrator { t0, t1, detail: format!("step limit {MAX_STEPS} reached at t = {t}") });
        }
        let last = t + h >= t1 - 1e-14 * span.abs();
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            k[s] = f(t + C[s] * h, &ytmp)?;
            st.evaluations += 1;
        }
        // ytmp now holds the fifth-order solution (stage 7 is evaluated there)
        let mut err = 0.0f64;
        for i in 0..n {
            let e: f64 = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
            let sc = tol + tol * y[i].abs().max(ytmp[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(FsiError::Integrator { t0, t1, detail: format!("non-finite error estimate at t = {t}") });
        }
        if err <= 1.0 {
            st.accepted += 1;
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut ytmp);
            k.swap(0, 6);
            *h0 = h;
            if last {
                return Ok((y, st));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            st.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < 1e-14 * span.abs() {
            return Err(FsiError::Integrator {
                t0,
                t1,
                detail: format!("step size underflow at t = {t}; reduce dt or the number of modes"),
            });
        }
    }
}

/// Eight-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS8_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub const GAUSS8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Gauss nodes and weights mapped to `[0, len]`.
pub fn gauss8(len: f64) -> ([f64; 8], [f64; 8]) {
    let mut x = [0.0; 8];
    let mut w = [0.0; 8];
    for i in 0..8 {
        x[i] = 0.5 * len * (GAUSS8_X[i] + 1.0);
        w[i] = 0.5 * len * GAUSS8_W[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut h = 0.0;
        let (y, st) = dopri5(|_, y| Ok(vec![-2.0 * y[0], y[0]]), 0.0, 1.5, &[1.0, 0.0], 1e-10, &mut h).unwrap();
        let e = (-3.0f64).exp();
        assert!((y[0] - e).abs() < 1e-9);
        assert!((y[1] - 0.5 * (1.0 - e)).abs() < 1e-9);
        assert!(st.accepted > 5);
    }

    #[test]
    fn gauss_integrates_degree_15() {
        let (x, w) = gauss8(2.0);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!((q - 2f64.powi(16) / 16.0).abs() < 1e-9 * q);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn blowup_is_reported() {
        let mut h = 0.0;
        let r = dopri5(|_, y| Ok(vec![y[0] * y[0]]), 0.0, 2.0, &[1.0], 1e-10, &mut h);
        assert!(matches!(r, Err(FsiError::Integrator { .. })));
    }
}
