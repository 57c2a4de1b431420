//! Central finite differences with a Richardson cross-check.

use crate::error::{Error, Result};
use crate::linalg::{max_abs, norm};

/// Step and acceptance threshold for directional derivatives.
///
/// Every derivative is computed twice, with steps `h` and `h/2`. The two
/// central differences are combined by Richardson extrapolation; their
/// disagreement, relative to `max(1, |D|)`, must stay below `tol`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FiniteDiff {
    pub h: f64,
    pub tol: f64,
}

impl Default for FiniteDiff {
    fn default() -> Self {
        FiniteDiff { h: 1e-5, tol: 1e-6 }
    }
}

/// Raw output of [`FiniteDiff::pair`]: the two central differences.
#[derive(Debug, Clone)]
pub struct RichardsonPair {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
}

impl RichardsonPair {
    pub fn extrapolated(&self) -> Vec<f64> {
        self.fine
            .iter()
            .zip(&self.coarse)
            .map(|(f, c)| (4.0 * f - c) / 3.0)
            .collect()
    }

    pub fn disagreement(&self) -> f64 {
        self.fine
            .iter()
            .zip(&self.coarse)
            .fold(0.0_f64, |m, (f, c)| m.max((f - c).abs()))
    }
}

impl FiniteDiff {
    pub fn new(h: f64) -> Self {
        FiniteDiff {
            h,
            ..Default::default()
        }
    }

    /// Central differences of `f` at `x` along `dir` with steps `h` and `h/2`.
    /// The step is taken along the unit direction and rescaled, so large
    /// directions do not leave the neighbourhood.
    pub fn pair<F>(&self, f: F, x: &[f64], dir: &[f64]) -> RichardsonPair
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let len = norm(dir);
        let central = |h: f64| -> Vec<f64> {
            let plus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + h * d / len).collect();
            let minus: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - h * d / len).collect();
            let fp = f(&plus);
            let fm = f(&minus);
            fp.iter()
                .zip(&fm)
                .map(|(p, m)| len * (p - m) / (2.0 * h))
                .collect()
        };
        RichardsonPair {
            coarse: central(self.h),
            fine: central(0.5 * self.h),
        }
    }

    /// Richardson-extrapolated derivative of `f` at `x` along `dir`.
    pub fn directional<F>(&self, f: F, x: &[f64], dir: &[f64]) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let len = norm(dir);
        if len == 0.0 {
            return Ok(vec![0.0; f(x).len()]);
        }
        let pair = self.pair(f, x, dir);
        let d = pair.extrapolated();
        let gap = pair.disagreement();
        if gap > self.tol * max_abs(&d).max(1.0) {
            return Err(Error::StepSize {
                h: self.h,
                disagreement: gap,
            });
        }
        Ok(d)
    }

    /// Five-point derivative of a one-parameter family, `d/dt g(t)` at `t0`.
    pub fn derivative_1d<G>(&self, g: G, t0: f64) -> Result<Vec<f64>>
    where
        G: Fn(f64) -> Vec<f64>,
    {
        self.directional(|p: &[f64]| g(p[0]), &[t0], &[1.0])
    }
}

/// Lie bracket of vector fields in coordinates, `[V, W] = DW·V − DV·W`.
pub fn vector_field_bracket<V, W>(fd: &FiniteDiff, v: V, w: W, x: &[f64]) -> Result<Vec<f64>>
where
    V: Fn(&[f64]) -> Vec<f64>,
    W: Fn(&[f64]) -> Vec<f64>,
{
    let vx = v(x);
    let wx = w(x);
    let dw = fd.directional(&w, x, &vx)?;
    let dv = fd.directional(&v, x, &wx)?;
    Ok(dw.iter().zip(&dv).map(|(a, b)| a - b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivative_is_accurate() {
        let fd = FiniteDiff::default();
        let f = |x: &[f64]| vec![x[0] * x[0] * x[1], x[1].powi(3)];
        let d = fd.directional(f, &[1.0, 2.0], &[1.0, 1.0]).unwrap();
        // d/ds of (1+s)^2 (2+s) and (2+s)^3 at s = 0
        assert!((d[0] - 5.0).abs() < 1e-9);
        assert!((d[1] - 12.0).abs() < 1e-9);
    }

    #[test]
    fn tiny_step_is_rejected() {
        let fd = FiniteDiff {
            h: 1e-14,
            tol: 1e-6,
        };
        let f = |x: &[f64]| vec![(10.0 * x[0]).sin() * 1e3];
        assert!(matches!(
            fd.directional(f, &[0.3], &[1.0]),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn bracket_of_rotation_and_translation() {
        // [∂x, −y∂x + x∂y] = ∂y
        let fd = FiniteDiff::default();
        let v = |_: &[f64]| vec![1.0, 0.0];
        let w = |p: &[f64]| vec![-p[1], p[0]];
        let b = vector_field_bracket(&fd, v, w, &[0.3, -0.2]).unwrap();
        assert!((b[0]).abs() < 1e-10 && (b[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let fd = FiniteDiff::default();
        let d = fd
            .directional(|x: &[f64]| vec![x[0].exp()], &[0.0], &[0.0])
            .unwrap();
        assert_eq!(d, vec![0.0]);
    }
}
