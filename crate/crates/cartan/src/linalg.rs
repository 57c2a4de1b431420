//! Small dense helpers shared by the numerical modules.
//!
//! Vectors travel through the public API as `Vec<f64>`/`&[f64]`; nalgebra is
//! used underneath for SVD based rank, nullspace and pseudo-inverse work.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn unit(len: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[k] = 1.0;
    v
}

/// Singular value cut-off: `relative * max(sigma_max, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RankPolicy {
    pub relative: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy { relative: 1e-9 }
    }
}

impl RankPolicy {
    pub fn threshold(&self, sigma_max: f64) -> f64 {
        self.relative * sigma_max.max(1.0)
    }
}

/// Thin SVD by one-sided Jacobi rotations: `a = U diag(s) Vᵀ` with `U`
/// `m × n`, `V` `n × n`, for `m ≥ n`. Slower than bidiagonalization but
/// accurate to rounding on the small, often rank-deficient matrices used here;
/// nalgebra's iterative SVD can stop early on those.
fn jacobi_svd_tall(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * x - s * y;
                    u[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
    for (j, &sj) in sv.iter().enumerate() {
        if sj > 0.0 {
            u.column_mut(j).unscale_mut(sj);
        }
    }
    // descending order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u = DMatrix::from_fn(m, n, |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    sv = order.iter().map(|&k| sv[k]).collect();
    (u, sv, v)
}

/// `(U, s, V)` with `a = U diag(s) Vᵀ`, `s` descending, `V` square.
/// Wide matrices are padded with zero rows.
pub fn svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = a.shape();
    if r >= c {
        return jacobi_svd_tall(a);
    }
    let mut m = DMatrix::zeros(c, c);
    m.view_mut((0, 0), (r, c)).copy_from(a);
    let (u, s, v) = jacobi_svd_tall(&m);
    (u.rows(0, r).into_owned(), s, v)
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = svd(a).1;
    s.truncate(a.nrows().min(a.ncols()));
    s
}

pub fn numerical_rank(a: &DMatrix<f64>, policy: RankPolicy) -> usize {
    let s = singular_values(a);
    let Some(&top) = s.first() else { return 0 };
    let cut = policy.threshold(top);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis of the numerical nullspace of `a`.
pub fn nullspace(a: &DMatrix<f64>, policy: RankPolicy) -> Vec<Vec<f64>> {
    let c = a.ncols();
    if c == 0 {
        return Vec::new();
    }
    if a.nrows() == 0 {
        return (0..c).map(|k| unit(c, k)).collect();
    }
    let (_, sv, v) = svd(a);
    let v_t = v.transpose();
    let top = sv.iter().fold(0.0_f64, |m, x| m.max(*x));
    let cut = policy.threshold(top);
    let mut basis: Vec<Vec<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| v_t.row(i).iter().copied().collect())
        .collect();
    // fix signs so the output does not depend on LAPACK-style sign freedom
    for v in basis.iter_mut() {
        let k = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[k] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    basis
}

/// Moore-Penrose pseudo-inverse with the rank cut-off of `policy`.
pub fn pinv(a: &DMatrix<f64>, policy: RankPolicy) -> DMatrix<f64> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let (u, sv, v) = svd(a);
    let top = sv.first().copied().unwrap_or(0.0);
    let cut = policy.threshold(top);
    let mut out = DMatrix::zeros(c, r);
    for (i, &s) in sv.iter().enumerate() {
        if s > cut && i < u.ncols() {
            out += v.column(i) * u.column(i).transpose() / s;
        }
    }
    out
}

pub fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn from_dvec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Solve `g x = b` for symmetric positive-definite `g`.
pub fn solve_spd(g: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    g.clone().cholesky().map(|ch| ch.solve(b))
}
