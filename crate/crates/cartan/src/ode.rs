//! Dormand–Prince 5(4) with adaptive step control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps shorter than this (relative to the time span) abort the solve.
    pub min_step: f64,
    pub max_steps: usize,
    /// State norms above this are reported as blow-up.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            min_step: 1e-13,
            max_steps: 2_000_000,
            blowup: 1e12,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("trajectory has its initial point")
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1`. `inside` is checked at every
/// accepted step; leaving it is reported as a domain error.
pub fn integrate<F, D>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &OdeOptions,
    inside: D,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    D: Fn(&[f64]) -> bool,
{
    let dim = y0.len();
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
        rejected: 0,
    };
    let span = t1 - t0;
    if span == 0.0 || dim == 0 {
        if span != 0.0 {
            traj.t.push(t1);
            traj.y.push(Vec::new());
        }
        return Ok(traj);
    }
    let dir = span.signum();
    let h_min = opts.min_step * span.abs().max(1.0);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    let scale0: f64 = y
        .iter()
        .map(|v| opts.atol + opts.rtol * v.abs())
        .fold(f64::INFINITY, f64::min);
    let d1 = k1.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut h = if d1 > 0.0 {
        (0.01 * scale0.powf(0.2) / d1.powf(0.2)).min(span.abs())
    } else {
        span.abs() * 1e-3
    };
    h = h.max(h_min) * dir;

    let mut k = vec![vec![0.0; dim]; 7];
    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(traj);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        k[0].clone_from(&k1);
        let mut stage = vec![0.0; dim];
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                stage[i] = acc;
            }
            k[s] = f(t + C[s] * h, &stage);
        }
        // stage 7 evaluates at the fifth-order solution (FSAL)
        let y_new = stage;
        let mut err = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for s in 0..7 {
                e += (B5[s] - B4[s]) * k[s][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (h * e / sc).powi(2);
        }
        let err = (err / dim as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            traj.rejected += 1;
            if h.abs() < h_min {
                return Err(Error::Integrator(format!(
                    "non-finite state near t = {t:.6}"
                )));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k[6].clone();
            let size = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if size > opts.blowup {
                return Err(Error::Integrator(format!(
                    "solution blew up (|y| = {size:.3e}) at t = {t:.6}"
                )));
            }
            if !inside(&y) {
                return Err(Error::Domain { point: y });
            }
            traj.t.push(t);
            traj.y.push(y.clone());
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            traj.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h.abs() < h_min {
            return Err(Error::Integrator(format!(
                "step size underflow (h = {:.3e}) at t = {t:.6}",
                h.abs()
            )));
        }
    }
    Err(Error::Integrator(format!(
        "step budget of {} exhausted at t = {t:.6}",
        opts.max_steps
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_t: f64, y: &[f64]| vec![y[1], -y[0]];
        let tr = integrate(
            f,
            0.0,
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            &OdeOptions::default(),
            |_| true,
        )
        .unwrap();
        let y = tr.last();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn exponential_growth_matches() {
        let f = |_t: f64, y: &[f64]| vec![y[0]];
        let tr = integrate(f, 0.0, &[1.0], 3.0, &OdeOptions::default(), |_| true).unwrap();
        assert!((tr.last()[0] - 3f64.exp()).abs() < 1e-8 * 3f64.exp());
    }

    #[test]
    fn finite_time_blowup_is_reported() {
        let f = |_t: f64, y: &[f64]| vec![y[0] * y[0]];
        let r = integrate(f, 0.0, &[1.0], 2.0, &OdeOptions::default(), |_| true);
        assert!(matches!(r, Err(Error::Integrator(_))));
    }

    #[test]
    fn zero_field_is_stationary() {
        let f = |_t: f64, y: &[f64]| vec![0.0; y.len()];
        let tr = integrate(f, 0.0, &[0.3, -1.0], 5.0, &OdeOptions::default(), |_| true).unwrap();
        assert_eq!(tr.last(), &[0.3, -1.0]);
    }

    #[test]
    fn domain_exit_is_reported() {
        let f = |_t: f64, _y: &[f64]| vec![1.0];
        let r = integrate(f, 0.0, &[0.0], 2.0, &OdeOptions::default(), |y| y[0] < 1.0);
        assert!(matches!(r, Err(Error::Domain { .. })));
    }
}
