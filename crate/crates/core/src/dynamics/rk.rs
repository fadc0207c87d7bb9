//! Dormand–Prince 5(4) with FSAL and a PI step-size controller.

use crate::error::Result;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (same as the last row of `A`).
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct Step {
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub err: f64,
}

/// One trial step from `(y, dy)` with size `h`. `f` may fail, which the
/// caller treats like a rejected step.
pub(crate) fn try_step<F>(f: &mut F, y: &[f64], dy: &[f64], h: f64, rtol: f64, atol: f64) -> Result<Step>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(dy.to_vec());
    let mut tmp = vec![0.0; n];
    #[allow(clippy::needless_range_loop)]
    for stage in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += A[stage][j] * kj[i];
            }
            tmp[i] = y[i] + h * acc;
        }
        k.push(f(&tmp)?);
    }
    // Stage 7 was evaluated at the fifth-order solution.
    let y_new = tmp;
    let mut err2 = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for s in 0..7 {
            e += E[s] * k[s][i];
        }
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        err2 += (h * e / sc).powi(2);
    }
    debug_assert!({
        let i = 0;
        let direct: f64 = y[i] + h * (0..7).map(|s| B[s] * k[s][i]).sum::<f64>();
        (direct - y_new[i]).abs() <= 1e-12 * (1.0 + direct.abs())
    });
    Ok(Step { y: y_new, dy: k.pop().unwrap(), err: (err2 / n as f64).sqrt() })
}

/// PI controller state (Hairer–Wanner, β = 0.04).
pub(crate) struct Controller {
    err_old: f64,
}

impl Controller {
    const BETA: f64 = 0.04;
    const SAFETY: f64 = 0.9;

    pub fn new() -> Self {
        Controller { err_old: 1e-4 }
    }

    /// Factor for the next step after an accepted step.
    pub fn accept(&mut self, err: f64) -> f64 {
        let e = err.max(1e-10);
        let expo = 0.2 - 0.75 * Self::BETA;
        let fac = Self::SAFETY * e.powf(-expo) * self.err_old.powf(Self::BETA);
        self.err_old = e;
        fac.clamp(0.2, 5.0)
    }

    /// Factor after a rejected step.
    pub fn reject(&self, err: f64) -> f64 {
        (Self::SAFETY * err.max(1e-10).powf(-0.2)).clamp(0.1, 0.9)
    }
}

/// Cubic Hermite between two accepted states, used for event location.
pub(crate) fn hermite(y0: &[f64], d0: &[f64], y1: &[f64], d1: &[f64], h: f64, theta: f64) -> Vec<f64> {
    let t = theta;
    let h00 = 2.0 * t.powi(3) - 3.0 * t * t + 1.0;
    let h10 = t.powi(3) - 2.0 * t * t + t;
    let h01 = -2.0 * t.powi(3) + 3.0 * t * t;
    let h11 = t.powi(3) - t * t;
    (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifth_order_on_exponential() {
        let mut f = |y: &[f64]| Ok(vec![y[0]]);
        let mut errs = vec![];
        for h in [0.2, 0.1] {
            let s = try_step(&mut f, &[1.0], &[1.0], h, 1e-8, 1e-10).unwrap();
            errs.push((s.y[0] - f64::exp(h)).abs());
        }
        // Local error O(h⁶).
        let ratio = errs[0] / errs[1];
        assert!(ratio > 40.0 && ratio < 90.0, "{ratio}");
    }

    #[test]
    fn circle_stays_on_circle() {
        let mut f = |y: &[f64]| Ok(vec![-y[1], y[0]]);
        let (mut y, mut dy) = (vec![1.0, 0.0], vec![0.0, 1.0]);
        let mut ctl = Controller::new();
        let (mut t, mut h) = (0.0f64, 0.01f64);
        while t < std::f64::consts::TAU {
            h = h.min(std::f64::consts::TAU - t);
            let s = try_step(&mut f, &y, &dy, h, 1e-10, 1e-12).unwrap();
            if s.err <= 1.0 {
                t += h;
                y = s.y;
                dy = s.dy;
                h *= ctl.accept(s.err);
            } else {
                h *= ctl.reject(s.err);
            }
        }
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }
}
