//! Globally adaptive Gauss–Kronrod (7/15) quadrature in one and two
//! dimensions, for vector-valued integrands.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes on [-1, 1] with Kronrod and Gauss weights (Gauss weight 0 off the
/// Gauss nodes).
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut idx = 0;
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[idx] = (-XGK[i], WGK[i], wg);
        out[idx + 1] = (XGK[i], WGK[i], wg);
        idx += 2;
    }
    out[14] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadOptions {
    /// Absolute error target on the max norm of the result.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_cells: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_cells: 20_000,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub cells: usize,
}

struct Cell {
    lo: [f64; 2],
    hi: [f64; 2],
    value: Vec<f64>,
    error: f64,
    dir_error: [f64; 2],
}

impl Cell {
    fn new<F: Fn(f64, f64) -> Vec<f64>>(f: &F, lo: [f64; 2], hi: [f64; 2]) -> Self {
        let (value, error, dir_error) = cell_rule_2d(f, lo, hi);
        Cell {
            lo,
            hi,
            value,
            error,
            dir_error,
        }
    }

    /// Halves along the direction carrying more of the error, or quarters
    /// when neither dominates.
    fn split(&self) -> Vec<([f64; 2], [f64; 2])> {
        let mid = [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ];
        let [es, et] = self.dir_error;
        let (lo, hi) = (self.lo, self.hi);
        if es > 8.0 * et {
            vec![(lo, [mid[0], hi[1]]), ([mid[0], lo[1]], hi)]
        } else if et > 8.0 * es {
            vec![(lo, [hi[0], mid[1]]), ([lo[0], mid[1]], hi)]
        } else {
            vec![
                (lo, mid),
                ([mid[0], lo[1]], [hi[0], mid[1]]),
                ([lo[0], mid[1]], [mid[0], hi[1]]),
                (mid, hi),
            ]
        }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Kronrod value of one cell, total error estimate, and the part of the error
/// attributable to each direction (Gauss–Kronrod difference in that direction
/// with the Kronrod rule in the other).
fn cell_rule_2d<F: Fn(f64, f64) -> Vec<f64>>(
    f: &F,
    lo: [f64; 2],
    hi: [f64; 2],
) -> (Vec<f64>, f64, [f64; 2]) {
    let r = rule();
    let (cs, ct) = (0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]));
    let (hs, ht) = (0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1]));
    let mut k: Vec<f64> = Vec::new();
    let mut g: Vec<f64> = Vec::new();
    let mut ds: Vec<f64> = Vec::new();
    let mut dt: Vec<f64> = Vec::new();
    for &(xs, wks, wgs) in &r {
        for &(xt, wkt, wgt) in &r {
            let v = f(cs + hs * xs, ct + ht * xt);
            if k.is_empty() {
                k = vec![0.0; v.len()];
                g = vec![0.0; v.len()];
                ds = vec![0.0; v.len()];
                dt = vec![0.0; v.len()];
            }
            for i in 0..v.len() {
                k[i] += wks * wkt * v[i];
                g[i] += wgs * wgt * v[i];
                ds[i] += (wks - wgs) * wkt * v[i];
                dt[i] += wks * (wkt - wgt) * v[i];
            }
        }
    }
    let jac = hs * ht;
    let k: Vec<f64> = k.iter().map(|v| v * jac).collect();
    let err = k
        .iter()
        .zip(&g)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b * jac).abs()));
    let dir = [max_norm(&ds) * jac, max_norm(&dt) * jac];
    (k, err, dir)
}

/// `∫∫ f(s, t) ds dt` over `[lo0, hi0] × [lo1, hi1]`. Reversed intervals give
/// the signed integral.
pub fn integrate_2d<F>(f: F, s: (f64, f64), t: (f64, f64), opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync,
{
    let sign = (s.1 - s.0).signum() * (t.1 - t.0).signum();
    let lo = [s.0.min(s.1), t.0.min(t.1)];
    let hi = [s.0.max(s.1), t.0.max(t.1)];
    if lo[0] == hi[0] || lo[1] == hi[1] {
        let dim = f(lo[0], lo[1]).len();
        return Ok(QuadResult {
            value: vec![0.0; dim],
            error: 0.0,
            cells: 0,
        });
    }
    let mut cells = vec![Cell::new(&f, lo, hi)];
    let mut total_cells = 1;
    loop {
        let value: Vec<f64> = sum_values(&cells);
        let error: f64 = cells.iter().map(|c| c.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * max_norm(&value));
        if error <= target {
            return Ok(QuadResult {
                value: value.iter().map(|x| sign * x).collect(),
                error,
                cells: total_cells,
            });
        }
        if total_cells >= opts.max_cells {
            return Err(Error::Quadrature {
                estimate: error,
                evaluations: total_cells,
            });
        }
        // split the worst cells (up to a batch), in parallel
        cells.sort_by(|a, b| b.error.total_cmp(&a.error));
        let batch = cells.len().clamp(1, 16).min(
            cells
                .iter()
                .take_while(|c| c.error > target / 64.0)
                .count()
                .max(1),
        );
        let worst: Vec<Cell> = cells.drain(..batch).collect();
        use rayon::prelude::*;
        let children: Vec<Cell> = worst
            .par_iter()
            .flat_map_iter(|c| {
                c.split()
                    .into_iter()
                    .map(|(l, h)| Cell::new(&f, l, h))
                    .collect::<Vec<_>>()
            })
            .collect();
        total_cells += children.len();
        cells.extend(children);
    }
}

fn sum_values(cells: &[Cell]) -> Vec<f64> {
    let mut out = vec![0.0; cells.first().map_or(0, |c| c.value.len())];
    for c in cells {
        for (o, v) in out.iter_mut().zip(&c.value) {
            *o += v;
        }
    }
    out
}

fn cell_rule_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (mut k, mut g) = (0.0, 0.0);
    for (x, wk, wg) in rule() {
        let v = f(c + h * x);
        k += wk * v;
        g += wg * v;
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫ f` over `[a, b]` by bisection of the worst interval.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: vec![0.0],
            error: 0.0,
            cells: 0,
        });
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let (v, e) = cell_rule_1d(&f, lo, hi);
    let mut parts = vec![(lo, hi, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: f64::INFINITY,
                evaluations: parts.len(),
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value: vec![sign * value],
                error,
                cells: parts.len(),
            });
        }
        if parts.len() >= opts.max_cells {
            return Err(Error::Quadrature {
                estimate: error,
                evaluations: parts.len(),
            });
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (l, h, _, _) = parts.swap_remove(i);
        let m = 0.5 * (l + h);
        let (v1, e1) = cell_rule_1d(&f, l, m);
        let (v2, e2) = cell_rule_1d(&f, m, h);
        parts.push((l, m, v1, e1));
        parts.push((m, h, v2, e2));
    }
}
