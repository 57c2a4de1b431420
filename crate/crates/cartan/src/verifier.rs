//! Sampled checks of the algebroid identities and of the geometric type.
//!
//! The Jacobi identity of the canonical-form bracket, extended to all sections
//! by Leibniz, holds exactly when (a) the Jacobiator of constant sections
//! vanishes and (b) the anchor maps the bracket of constant sections to the
//! commutator of their anchor fields. Both parts are evaluated; the reported
//! Jacobi residual is the larger of the two.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{vector_field_bracket, FiniteDiff};
use crate::linalg::{self, add, max_abs, norm, scale, sub, unit};
use crate::model::{CartanModel, GroupSample};

/// Seeded sample of base points and fiber-vector triples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Samples {
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
    /// `triples[i]` belongs to `points[i]`; each entry is three fiber vectors.
    pub triples: Vec<Vec<[Vec<f64>; 3]>>,
}

impl Samples {
    pub fn generate(
        model: &CartanModel,
        points: usize,
        triples_per_point: usize,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = model.fiber_dim();
        let mut pts = Vec::with_capacity(points);
        let mut trs = Vec::with_capacity(points);
        for _ in 0..points {
            let x: Vec<f64> = model
                .base
                .sample_box
                .iter()
                .map(|&(lo, hi)| {
                    if hi > lo {
                        rng.random_range(lo..hi)
                    } else {
                        lo
                    }
                })
                .collect();
            let mut rand_vec =
                || -> Vec<f64> { (0..k).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let t = (0..triples_per_point)
                .map(|_| [rand_vec(), rand_vec(), rand_vec()])
                .collect();
            pts.push(x);
            trs.push(t);
        }
        Samples {
            seed,
            points: pts,
            triples: trs,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn cyclic<T>(f: impl Fn(&T, &T, &T) -> Vec<f64>, a: &T, b: &T, c: &T) -> Vec<f64> {
    let s = add(&f(a, b, c), &f(b, c, a));
    add(&s, &f(c, a, b))
}

/// Residuals of the first and second Bianchi identities at `x`:
///
/// `⨀ {F(u)(c(v,w)) + c(c(u,v),w)} − ⨀ R(u,v)w` and
/// `⨀ {F(u)(R(v,w)) + R(c(u,v),w)}`,
///
/// where `F(u)(·)` differentiates along the vector field `y ↦ F(y, u)`.
pub fn check_bianchi(
    model: &CartanModel,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    w: &[f64],
    fd: &FiniteDiff,
) -> Result<(Vec<f64>, Vec<f64>)> {
    model.check_domain(x)?;
    let maps = &model.maps;
    let g = &model.group;
    let mut err = None;
    let mut d = |f: &dyn Fn(&[f64]) -> Vec<f64>, dir: Vec<f64>| -> Vec<f64> {
        match fd.directional(f, x, &dir) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                vec![0.0; f(x).len()]
            }
        }
    };
    let mut first = vec![0.0; model.n()];
    let mut second = vec![0.0; g.dim()];
    let triples: [(&[f64], &[f64], &[f64]); 3] = [(u, v, w), (v, w, u), (w, u, v)];
    for (a, b, c) in triples {
        let flow_a = maps.flow(x, a);
        let dc = d(&|y: &[f64]| maps.torsion(y, b, c), flow_a.clone());
        let dr = d(&|y: &[f64]| maps.curvature(y, b, c), flow_a);
        let cab = maps.torsion(x, a, b);
        let ccc = maps.torsion(x, &cab, c);
        let rcc = maps.curvature(x, &cab, c);
        let rw = g.act_vector(&maps.curvature(x, a, b), c);
        first = add(&first, &sub(&add(&dc, &ccc), &rw));
        second = add(&second, &add(&dr, &rcc));
    }
    match err {
        Some(e) => Err(e),
        None => Ok((first, second)),
    }
}

/// `[[e1,e2],e3] + cyc` for constant sections, with the inner bracket treated
/// as a non-constant section through the Leibniz extension.
pub fn jacobiator(
    model: &CartanModel,
    x: &[f64],
    e1: &[f64],
    e2: &[f64],
    e3: &[f64],
    fd: &FiniteDiff,
) -> Result<Vec<f64>> {
    model.check_domain(x)?;
    let term = |a: &[f64], b: &[f64], c: &[f64]| -> Result<Vec<f64>> {
        let inner = |y: &[f64]| model.bracket_at(y, a, b);
        let outer = |_: &[f64]| c.to_vec();
        model.bracket_sections(&inner, &outer, x, fd)
    };
    let j = add(&term(e1, e2, e3)?, &term(e2, e3, e1)?);
    Ok(add(&j, &term(e3, e1, e2)?))
}

/// `ρ([e1,e2]) − [ρ(e1), ρ(e2)]` for constant sections.
pub fn anchor_defect(
    model: &CartanModel,
    x: &[f64],
    e1: &[f64],
    e2: &[f64],
    fd: &FiniteDiff,
) -> Result<Vec<f64>> {
    model.check_domain(x)?;
    let lhs = model.anchor_at(x, &model.bracket_at(x, e1, e2));
    let rhs = vector_field_bracket(
        fd,
        |y: &[f64]| model.anchor_at(y, e1),
        |y: &[f64]| model.anchor_at(y, e2),
        x,
    )?;
    Ok(sub(&lhs, &rhs))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobiResidual {
    pub jacobiator: Vec<f64>,
    /// Largest anchor defect over the three pairs of the triple.
    pub anchor_defect: f64,
}

impl JacobiResidual {
    pub fn magnitude(&self) -> f64 {
        norm(&self.jacobiator).max(self.anchor_defect)
    }
}

/// Jacobi identity residual for a constant triple at `x`.
pub fn check_jacobi(
    model: &CartanModel,
    x: &[f64],
    e1: &[f64],
    e2: &[f64],
    e3: &[f64],
    fd: &FiniteDiff,
) -> Result<JacobiResidual> {
    let jacobiator = jacobiator(model, x, e1, e2, e3, fd)?;
    let mut defect = 0.0_f64;
    for (a, b) in [(e1, e2), (e2, e3), (e3, e1)] {
        defect = defect.max(norm(&anchor_defect(model, x, a, b, fd)?));
    }
    Ok(JacobiResidual {
        jacobiator,
        anchor_defect: defect,
    })
}

/// The structure conditions evaluated one at a time on basis vectors, from the
/// maps directly rather than through the bracket. Used as an independent
/// oracle for [`check_jacobi`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConditionResiduals {
    /// Jacobi identity of `𝔤`.
    pub lie_algebra: f64,
    /// `[α,β]u = α(βu) − β(αu)`.
    pub representation: f64,
    /// `ψ(α)c(u,v) + α·c(u,v) − c(αu,v) − c(u,αv)` and the analogue for `R`
    /// with `[α, R(u,v)]`.
    pub equivariance: f64,
    pub bianchi1: f64,
    pub bianchi2: f64,
    /// `ψ[α,β] = [ψα,ψβ]`, `F(αu) = [ψα, Fu]`, `−F(c(u,v)) − ψ(R(u,v)) = [Fu, Fv]`.
    pub anchor: f64,
}

impl ConditionResiduals {
    pub fn all_below(&self, tol: f64) -> bool {
        self.max() < tol
    }

    pub fn max(&self) -> f64 {
        [
            self.lie_algebra,
            self.representation,
            self.equivariance,
            self.bianchi1,
            self.bianchi2,
            self.anchor,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn condition_residuals(
    model: &CartanModel,
    x: &[f64],
    fd: &FiniteDiff,
) -> Result<ConditionResiduals> {
    model.check_domain(x)?;
    let g = &model.group;
    let maps = &model.maps;
    let n = model.n();
    let m = g.dim();
    let es: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i)).collect();
    let als: Vec<Vec<f64>> = (0..m).map(|i| unit(m, i)).collect();
    let mut out = ConditionResiduals::default();

    for a in &als {
        for b in &als {
            for c in &als {
                let j = add(
                    &add(
                        &g.lie_bracket(&g.lie_bracket(a, b), c),
                        &g.lie_bracket(&g.lie_bracket(b, c), a),
                    ),
                    &g.lie_bracket(&g.lie_bracket(c, a), b),
                );
                out.lie_algebra = out.lie_algebra.max(max_abs(&j));
            }
            for u in &es {
                let lhs = g.act_vector(&g.lie_bracket(a, b), u);
                let rhs = sub(
                    &g.act_vector(a, &g.act_vector(b, u)),
                    &g.act_vector(b, &g.act_vector(a, u)),
                );
                out.representation = out.representation.max(max_abs(&sub(&lhs, &rhs)));
            }
            let psi_ab = maps.infinitesimal_action(x, &g.lie_bracket(a, b));
            let br = vector_field_bracket(
                fd,
                |y: &[f64]| maps.infinitesimal_action(y, a),
                |y: &[f64]| maps.infinitesimal_action(y, b),
                x,
            )?;
            out.anchor = out.anchor.max(max_abs(&sub(&psi_ab, &br)));
        }
        for u in &es {
            let f_au = maps.flow(x, &g.act_vector(a, u));
            let br = vector_field_bracket(
                fd,
                |y: &[f64]| maps.infinitesimal_action(y, a),
                |y: &[f64]| maps.flow(y, u),
                x,
            )?;
            out.anchor = out.anchor.max(max_abs(&sub(&f_au, &br)));
            for v in &es {
                let (rc, rr) = infinitesimal_residuals(model, x, a, u, v, fd)?;
                out.equivariance = out.equivariance.max(max_abs(&rc)).max(max_abs(&rr));
            }
        }
    }
    for u in &es {
        for v in &es {
            let c = maps.torsion(x, u, v);
            let r = maps.curvature(x, u, v);
            let lhs = scale(
                -1.0,
                &add(&maps.flow(x, &c), &maps.infinitesimal_action(x, &r)),
            );
            let br = vector_field_bracket(
                fd,
                |y: &[f64]| maps.flow(y, u),
                |y: &[f64]| maps.flow(y, v),
                x,
            )?;
            out.anchor = out.anchor.max(max_abs(&sub(&lhs, &br)));
            for w in &es {
                let (b1, b2) = check_bianchi(model, x, u, v, w, fd)?;
                out.bianchi1 = out.bianchi1.max(max_abs(&b1));
                out.bianchi2 = out.bianchi2.max(max_abs(&b2));
            }
        }
    }
    Ok(out)
}

/// Infinitesimal equivariance residuals of `c` and `R` for `α ∈ 𝔤`.
fn infinitesimal_residuals(
    model: &CartanModel,
    x: &[f64],
    alpha: &[f64],
    u: &[f64],
    v: &[f64],
    fd: &FiniteDiff,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = &model.group;
    let maps = &model.maps;
    let psi = maps.infinitesimal_action(x, alpha);
    let au = g.act_vector(alpha, u);
    let av = g.act_vector(alpha, v);
    let dc = fd.directional(|y: &[f64]| maps.torsion(y, u, v), x, &psi)?;
    let c = maps.torsion(x, u, v);
    let rc = sub(
        &add(&dc, &g.act_vector(alpha, &c)),
        &add(&maps.torsion(x, &au, v), &maps.torsion(x, u, &av)),
    );
    let dr = fd.directional(|y: &[f64]| maps.curvature(y, u, v), x, &psi)?;
    let r = maps.curvature(x, u, v);
    let rr = sub(
        &add(&dr, &g.lie_bracket(alpha, &r)),
        &add(&maps.curvature(x, &au, v), &maps.curvature(x, u, &av)),
    );
    Ok((rc, rr))
}

/// Infinitesimal equivariance residual vectors `(c, R, F)` at `x`.
pub fn equivariance_infinitesimal(
    model: &CartanModel,
    x: &[f64],
    alpha: &[f64],
    u: &[f64],
    v: &[f64],
    fd: &FiniteDiff,
) -> Result<[Vec<f64>; 3]> {
    let (rc, rr) = infinitesimal_residuals(model, x, alpha, u, v, fd)?;
    let maps = &model.maps;
    let f_au = maps.flow(x, &model.group.act_vector(alpha, u));
    let br = vector_field_bracket(
        fd,
        |y: &[f64]| maps.infinitesimal_action(y, alpha),
        |y: &[f64]| maps.flow(y, u),
        x,
    )?;
    Ok([rc, rr, sub(&f_au, &br)])
}

/// Finite equivariance residual vectors `(c, R, F)` at `x` for one group
/// element:
/// `c(x·g)(g⁻¹u, g⁻¹v) − g⁻¹c(x)(u,v)`,
/// `R(x·g)(g⁻¹u, g⁻¹v) − Ad_{g⁻¹}R(x)(u,v)`,
/// `F(x·g, g⁻¹u) − d(R_g)_x F(x,u)`.
pub fn equivariance_finite(
    model: &CartanModel,
    x: &[f64],
    g: &DMatrix<f64>,
    u: &[f64],
    v: &[f64],
    fd: &FiniteDiff,
) -> Result<[Vec<f64>; 3]> {
    let maps = &model.maps;
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singularity("group element not invertible".into()))?;
    let apply = |m: &DMatrix<f64>, w: &[f64]| linalg::from_dvec(&(m * linalg::to_dvec(w)));
    let xg = maps.act(x, g);
    let gu = apply(&g_inv, u);
    let gv = apply(&g_inv, v);
    let rc = sub(
        &maps.torsion(&xg, &gu, &gv),
        &apply(&g_inv, &maps.torsion(x, u, v)),
    );
    let ad = model.group.adjoint(&g_inv, &maps.curvature(x, u, v))?;
    let rr = sub(&maps.curvature(&xg, &gu, &gv), &ad);
    let push = fd.directional(|y: &[f64]| maps.act(y, g), x, &maps.flow(x, u))?;
    let rf = sub(&maps.flow(&xg, &gu), &push);
    Ok([rc, rr, rf])
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct EquivarianceResiduals {
    pub c: f64,
    pub r: f64,
    pub f: f64,
    pub c_infinitesimal: f64,
    pub r_infinitesimal: f64,
    pub f_infinitesimal: f64,
}

impl EquivarianceResiduals {
    fn merge(self, o: Self) -> Self {
        EquivarianceResiduals {
            c: self.c.max(o.c),
            r: self.r.max(o.r),
            f: self.f.max(o.f),
            c_infinitesimal: self.c_infinitesimal.max(o.c_infinitesimal),
            r_infinitesimal: self.r_infinitesimal.max(o.r_infinitesimal),
            f_infinitesimal: self.f_infinitesimal.max(o.f_infinitesimal),
        }
    }
}

/// Finite (over `group_samples`) and infinitesimal (over the group sample
/// directions) equivariance maxima across the sample.
pub fn check_equivariance(
    model: &CartanModel,
    samples: &Samples,
    group_samples: &[GroupSample],
    fd: &FiniteDiff,
) -> Result<EquivarianceResiduals> {
    let n = model.n();
    let per_point: Vec<Result<EquivarianceResiduals>> = samples
        .points
        .par_iter()
        .zip(&samples.triples)
        .map(|(x, triples)| {
            let mut acc = EquivarianceResiduals::default();
            for (k, t) in triples.iter().enumerate() {
                let u = &t[0][..n];
                let v = &t[1][..n];
                for s in group_samples {
                    let [c, r, f] = equivariance_finite(model, x, &s.g, u, v, fd)?;
                    acc.c = acc.c.max(max_abs(&c));
                    acc.r = acc.r.max(max_abs(&r));
                    acc.f = acc.f.max(max_abs(&f));
                }
                if let Some(s) = group_samples.get(k % group_samples.len().max(1)) {
                    let [c, r, f] = equivariance_infinitesimal(model, x, &s.alpha, u, v, fd)?;
                    acc.c_infinitesimal = acc.c_infinitesimal.max(max_abs(&c));
                    acc.r_infinitesimal = acc.r_infinitesimal.max(max_abs(&r));
                    acc.f_infinitesimal = acc.f_infinitesimal.max(max_abs(&f));
                }
            }
            Ok(acc)
        })
        .collect();
    let mut out = EquivarianceResiduals::default();
    for r in per_point {
        out = out.merge(r?);
    }
    Ok(out)
}

/// Largest Jacobi residual at each sample point.
pub fn jacobi_residuals(
    model: &CartanModel,
    samples: &Samples,
    fd: &FiniteDiff,
) -> Result<Vec<f64>> {
    samples
        .points
        .par_iter()
        .zip(&samples.triples)
        .map(|(x, triples)| {
            let mut worst = 0.0_f64;
            for [a, b, c] in triples {
                worst = worst.max(check_jacobi(model, x, a, b, c, fd)?.magnitude());
            }
            Ok(worst)
        })
        .collect()
}

/// Largest Bianchi residuals `(first, second)` at each sample point.
pub fn bianchi_residuals(
    model: &CartanModel,
    samples: &Samples,
    fd: &FiniteDiff,
) -> Result<Vec<(f64, f64)>> {
    let n = model.n();
    samples
        .points
        .par_iter()
        .zip(&samples.triples)
        .map(|(x, triples)| {
            let (mut b1, mut b2) = (0.0_f64, 0.0_f64);
            for [a, b, c] in triples {
                let (r1, r2) = check_bianchi(model, x, &a[..n], &b[..n], &c[..n], fd)?;
                b1 = b1.max(max_abs(&r1));
                b2 = b2.max(max_abs(&r2));
            }
            Ok((b1, b2))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Geometric type

/// `J₀` on `ℝⁿ = ℂ^{n/2}` with coordinates `(x₁, y₁, x₂, y₂, …)`.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// `Ω_can(u, v) = ⟨J₀u, v⟩`.
pub fn omega_can(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let j = complex_structure(n);
    let ju = linalg::from_dvec(&(j * linalg::to_dvec(u)));
    linalg::dot(&ju, v)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct TypeFlags {
    pub metric: bool,
    pub almost_symplectic: bool,
    pub symplectic: bool,
    pub almost_complex: bool,
    pub complex: bool,
    pub almost_hermitian: bool,
    pub kahler: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct TypeEvidence {
    /// Largest `|B + Bᵀ|` over the algebra basis.
    pub orthogonal_defect: f64,
    /// Largest `|Bᵀ Ω + Ω B|`.
    pub symplectic_algebra_defect: Option<f64>,
    /// Largest `|B J₀ − J₀ B|`.
    pub complex_algebra_defect: Option<f64>,
    /// Largest torsion component over the sample.
    pub torsion: f64,
    /// Largest cyclic `Ω_can(c(u,v), w)` sum.
    pub symplectic_torsion: Option<f64>,
    /// Largest `ℂⁿ` component of the Nijenhuis torsion of `J_A`.
    pub nijenhuis: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct GeometricType {
    pub flags: TypeFlags,
    pub evidence: TypeEvidence,
    pub tolerance: f64,
}

/// Cyclic torsion sum `Ω(c(u,v),w) + Ω(c(v,w),u) + Ω(c(w,u),v)` over the
/// sample; needs even `n`.
pub fn symplectic_torsion_residual(model: &CartanModel, samples: &Samples) -> Result<f64> {
    let n = model.n();
    if n % 2 != 0 {
        return Err(Error::Dimension(format!(
            "symplectic type needs even n, got {n}"
        )));
    }
    let maps = &model.maps;
    let mut worst = 0.0_f64;
    for (x, triples) in samples.points.iter().zip(&samples.triples) {
        for [a, b, c] in triples {
            let f = |p: &Vec<f64>, q: &Vec<f64>, r: &Vec<f64>| {
                vec![omega_can(&maps.torsion(x, &p[..n], &q[..n]), &r[..n])]
            };
            worst = worst.max(cyclic(f, a, b, c)[0].abs());
        }
    }
    Ok(worst)
}

/// `ℂⁿ` component `−c(iu,iv) + i c(iu,v) + i c(u,iv) + c(u,v)` of the
/// Nijenhuis torsion of `J_A(u,α) = (iu, 0)`; needs even `n`.
pub fn nijenhuis_residual(model: &CartanModel, samples: &Samples) -> Result<f64> {
    let n = model.n();
    if n % 2 != 0 {
        return Err(Error::Dimension(format!(
            "complex type needs even n, got {n}"
        )));
    }
    let j = complex_structure(n);
    let mul_i = |w: &[f64]| linalg::from_dvec(&(&j * linalg::to_dvec(w)));
    let maps = &model.maps;
    let mut worst = 0.0_f64;
    for (x, triples) in samples.points.iter().zip(&samples.triples) {
        for [a, b, _] in triples {
            let (u, v) = (&a[..n], &b[..n]);
            let (iu, iv) = (mul_i(u), mul_i(v));
            let t1 = scale(-1.0, &maps.torsion(x, &iu, &iv));
            let t2 = mul_i(&maps.torsion(x, &iu, v));
            let t3 = mul_i(&maps.torsion(x, u, &iv));
            let t4 = maps.torsion(x, u, v);
            worst = worst.max(max_abs(&add(&add(&t1, &t2), &add(&t3, &t4))));
        }
    }
    Ok(worst)
}

/// Geometric type from basis membership tests and sampled torsion
/// conditions. Deterministic for a fixed sample.
pub fn classify_type(model: &CartanModel, samples: &Samples, tol: f64) -> GeometricType {
    let g = &model.group;
    let n = model.n();
    let mut ev = TypeEvidence::default();
    ev.orthogonal_defect = g
        .basis()
        .iter()
        .map(|b| (b + b.transpose()).norm())
        .fold(0.0, f64::max);
    ev.torsion = samples
        .points
        .iter()
        .zip(&samples.triples)
        .flat_map(|(x, ts)| {
            ts.iter()
                .map(move |[a, b, _]| max_abs(&model.maps.torsion(x, &a[..n], &b[..n])))
        })
        .fold(0.0, f64::max);
    let orthogonal = ev.orthogonal_defect <= tol;
    let mut flags = TypeFlags {
        metric: orthogonal && ev.torsion <= tol,
        ..Default::default()
    };
    if n % 2 == 0 {
        let j = complex_structure(n);
        let om = j.transpose();
        ev.symplectic_algebra_defect = Some(
            g.basis()
                .iter()
                .map(|b| (b.transpose() * &om + &om * b).norm())
                .fold(0.0, f64::max),
        );
        ev.complex_algebra_defect = Some(
            g.basis()
                .iter()
                .map(|b| (b * &j - &j * b).norm())
                .fold(0.0, f64::max),
        );
        ev.symplectic_torsion = symplectic_torsion_residual(model, samples).ok();
        ev.nijenhuis = nijenhuis_residual(model, samples).ok();
        flags.almost_symplectic = ev.symplectic_algebra_defect.unwrap_or(f64::INFINITY) <= tol;
        flags.symplectic =
            flags.almost_symplectic && ev.symplectic_torsion.unwrap_or(f64::INFINITY) <= tol;
        flags.almost_complex = ev.complex_algebra_defect.unwrap_or(f64::INFINITY) <= tol;
        flags.complex = flags.almost_complex && ev.nijenhuis.unwrap_or(f64::INFINITY) <= tol;
        flags.almost_hermitian = flags.almost_complex && orthogonal;
        flags.kahler = flags.almost_hermitian && flags.complex && ev.torsion <= tol;
    }
    GeometricType {
        flags,
        evidence: ev,
        tolerance: tol,
    }
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            max_residual,
            tolerance,
            pass: max_residual < tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct VerifyOptions {
    pub points: usize,
    pub triples: usize,
    pub seed: u64,
    /// Tolerance for checks evaluated from closed forms only.
    pub tol: f64,
    /// Tolerance for checks that involve finite differences.
    pub fd_tol: f64,
    pub group_samples: usize,
    pub fd: FiniteDiff,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            points: 100,
            triples: 10,
            seed: 0,
            tol: 1e-8,
            fd_tol: 1e-6,
            group_samples: 32,
            fd: FiniteDiff::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub model: String,
    pub seed: u64,
    pub sample_count: usize,
    pub triples_per_point: usize,
    pub tolerance: f64,
    pub fd_tolerance: f64,
    pub jacobi_max_residual: f64,
    pub bianchi1_max_residual: f64,
    pub bianchi2_max_residual: f64,
    pub equivariance_residuals: EquivarianceResiduals,
    pub checks: Vec<CheckResult>,
    pub geometric_type: GeometricType,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Run every identity check on a seeded sample.
pub fn verify(model: &CartanModel, opts: &VerifyOptions) -> Result<VerificationReport> {
    let samples = Samples::generate(model, opts.points, opts.triples, opts.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let group_samples = model
        .group
        .sample_group_elements(&mut rng, opts.group_samples);
    let fd = &opts.fd;

    let jac = jacobi_residuals(model, &samples, fd)?
        .into_iter()
        .fold(0.0, f64::max);
    let (b1, b2) = bianchi_residuals(model, &samples, fd)?
        .into_iter()
        .fold((0.0_f64, 0.0_f64), |(p, q), (a, b)| (p.max(a), q.max(b)));
    let eq = check_equivariance(model, &samples, &group_samples, fd)?;
    let checks = vec![
        CheckResult::new("jacobi", jac, opts.fd_tol),
        CheckResult::new("bianchi1", b1, opts.fd_tol),
        CheckResult::new("bianchi2", b2, opts.fd_tol),
        CheckResult::new("equivariance_c", eq.c, opts.tol),
        CheckResult::new("equivariance_R", eq.r, opts.tol),
        CheckResult::new("equivariance_F", eq.f, opts.fd_tol),
        CheckResult::new(
            "equivariance_c_infinitesimal",
            eq.c_infinitesimal,
            opts.fd_tol,
        ),
        CheckResult::new(
            "equivariance_R_infinitesimal",
            eq.r_infinitesimal,
            opts.fd_tol,
        ),
        CheckResult::new(
            "equivariance_F_infinitesimal",
            eq.f_infinitesimal,
            opts.fd_tol,
        ),
    ];
    let geometric_type = classify_type(model, &samples, opts.tol);
    Ok(VerificationReport {
        model: model.name.clone(),
        seed: opts.seed,
        sample_count: samples.len(),
        triples_per_point: opts.triples,
        tolerance: opts.tol,
        fd_tolerance: opts.fd_tol,
        jacobi_max_residual: jac,
        bianchi1_max_residual: b1,
        bianchi2_max_residual: b2,
        equivariance_residuals: eq,
        checks,
        geometric_type,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_model, ModelParams};

    fn model(name: &str, n: Option<usize>) -> CartanModel {
        builtin_model(
            name,
            &ModelParams {
                n,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn quick() -> VerifyOptions {
        VerifyOptions {
            points: 12,
            triples: 3,
            group_samples: 6,
            ..Default::default()
        }
    }

    #[test]
    fn trivial_model_is_exactly_zero() {
        let m = model("trivial", Some(2));
        let (b1, b2) = check_bianchi(
            &m,
            &[],
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[1.0, 1.0],
            &FiniteDiff::default(),
        )
        .unwrap();
        assert!(b1.iter().chain(&b2).all(|v| *v == 0.0));
        let r = verify(&m, &quick()).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.jacobi_max_residual < 1e-14);
    }

    #[test]
    fn constant_curvature_bianchi_reduces_to_cyclic_sum() {
        let m = model("constant_curvature", Some(3));
        let x = [0.8];
        let (u, v, w) = ([1.0, 0.2, -0.4], [0.3, -1.0, 0.5], [0.0, 0.7, 1.1]);
        let (b1, b2) = check_bianchi(&m, &x, &u, &v, &w, &FiniteDiff::default()).unwrap();
        assert!(max_abs(&b1) < 1e-14);
        assert!(b2.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn builtins_pass() {
        for (name, n) in [
            ("constant_curvature", Some(2)),
            ("constant_curvature", Some(3)),
            ("extremal_kahler", None),
            ("ek_su21", None),
        ] {
            let r = verify(&model(name, n), &quick()).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.checks);
        }
    }

    #[test]
    fn scaled_curvature_is_caught_by_anchor_part() {
        let m = model("extremal_kahler", None).with_curvature_scale(1.1);
        let x = [0.9, 0.4, -0.3, 0.7];
        let e = |k| unit(3, k);
        let j = check_jacobi(&m, &x, &e(0), &e(1), &e(2), &FiniteDiff::default()).unwrap();
        // the constant-section Jacobiator is blind to the scaling in rank 2
        assert!(norm(&j.jacobiator) < 1e-8);
        assert!(j.anchor_defect > 1e-3);
        let c = condition_residuals(&m, &x, &FiniteDiff::default()).unwrap();
        assert!(c.anchor > 1e-3);
        assert!(c.bianchi1 < 1e-8 && c.bianchi2 < 1e-8 && c.equivariance < 1e-8);
    }

    #[test]
    fn jacobi_agrees_with_condition_oracle() {
        let fd = FiniteDiff::default();
        for m in [
            model("extremal_kahler", None),
            model("extremal_kahler", None).with_curvature_scale(1.1),
            model("constant_curvature", Some(3)),
        ] {
            let s = Samples::generate(&m, 10, 3, 7);
            for (x, ts) in s.points.iter().zip(&s.triples) {
                let jac_ok = ts
                    .iter()
                    .all(|[a, b, c]| check_jacobi(&m, x, a, b, c, &fd).unwrap().magnitude() < 1e-6);
                let cond_ok = condition_residuals(&m, x, &fd).unwrap().all_below(1e-6);
                assert_eq!(jac_ok, cond_ok, "{} at {x:?}", m.name);
            }
        }
    }

    #[test]
    fn ek_type_is_kahler_and_cc3_is_metric_only() {
        let m = model("extremal_kahler", None);
        let s = Samples::generate(&m, 10, 3, 1);
        let t = classify_type(&m, &s, 1e-8);
        assert!(t.flags.kahler && t.flags.metric && t.flags.symplectic && t.flags.complex);
        let m = model("constant_curvature", Some(3));
        let s = Samples::generate(&m, 10, 3, 1);
        let t = classify_type(&m, &s, 1e-8);
        assert!(t.flags.metric && !t.flags.complex && !t.flags.almost_complex);
        assert!(matches!(
            symplectic_torsion_residual(&m, &s),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn classify_type_is_deterministic() {
        let m = model("extremal_kahler", None);
        let a = classify_type(&m, &Samples::generate(&m, 8, 2, 42), 1e-8);
        let b = classify_type(&m, &Samples::generate(&m, 8, 2, 42), 1e-8);
        assert_eq!(a, b);
    }
}
