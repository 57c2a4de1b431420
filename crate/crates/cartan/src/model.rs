//! Cartan data and the canonical-form algebroid `X × (ℝⁿ ⊕ 𝔤)`.
//!
//! Fiber vectors are stored flat: the first `n` entries are the tautological
//! component `u`, the remaining `dim 𝔤` entries are coefficients of the
//! connection component `α` over the Lie algebra basis.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::FiniteDiff;
use crate::linalg::{self, add, sub};

/// A matrix group `G ⊂ GL(n)` described through a basis of its Lie algebra.
#[derive(Clone)]
pub struct StructureGroup {
    pub name: String,
    pub n: usize,
    basis: Vec<DMatrix<f64>>,
    /// `structure[i][j]` holds the coefficients of `[B_i, B_j]`.
    structure: Vec<Vec<Vec<f64>>>,
    /// Frobenius Gram matrix of the basis, used for coefficient extraction.
    frobenius: DMatrix<f64>,
}

impl fmt::Debug for StructureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureGroup")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("dim", &self.dim())
            .finish()
    }
}

/// One sampled group element `g = exp(t α)`.
#[derive(Debug, Clone)]
pub struct GroupSample {
    pub alpha: Vec<f64>,
    pub t: f64,
    pub g: DMatrix<f64>,
}

const CLOSURE_TOL: f64 = 1e-10;

impl StructureGroup {
    pub fn new(name: impl Into<String>, n: usize, basis: Vec<DMatrix<f64>>) -> Result<Self> {
        for b in &basis {
            if b.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "basis matrix has shape {:?}, expected ({n}, {n})",
                    b.shape()
                )));
            }
        }
        let m = basis.len();
        let frobenius = DMatrix::from_fn(m, m, |i, j| basis[i].dot(&basis[j]));
        if m > 0 && linalg::numerical_rank(&frobenius, Default::default()) < m {
            return Err(Error::Dimension(
                "Lie algebra basis is linearly dependent".into(),
            ));
        }
        let mut group = StructureGroup {
            name: name.into(),
            n,
            basis,
            structure: Vec::new(),
            frobenius,
        };
        let mut structure = vec![vec![Vec::new(); m]; m];
        for i in 0..m {
            for j in 0..m {
                let c = &group.basis[i] * &group.basis[j] - &group.basis[j] * &group.basis[i];
                structure[i][j] = group.coefficients(&c).map_err(|e| match e {
                    Error::Representation { residual } => Error::Dimension(format!(
                        "basis does not close under the commutator (residual {residual:.2e})"
                    )),
                    other => other,
                })?;
            }
        }
        group.structure = structure;
        Ok(group)
    }

    /// `SO(n)` with basis `E_ji - E_ij`, `i < j`. For `n = 2` this is the
    /// complex structure `J` (multiplication by `i` on `ℝ² = ℂ`).
    pub fn so(n: usize) -> Self {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut b = DMatrix::zeros(n, n);
                b[(j, i)] = 1.0;
                b[(i, j)] = -1.0;
                basis.push(b);
            }
        }
        Self::new(format!("SO({n})"), n, basis).expect("so(n) closes")
    }

    pub fn u1() -> Self {
        let mut g = Self::so(2);
        g.name = "U(1)".into();
        g
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn matrix(&self, alpha: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (a, b) in alpha.iter().zip(&self.basis) {
            m += b * *a;
        }
        m
    }

    /// Coefficients of `m` over the basis, or a representation error when
    /// `m` is not in the span.
    pub fn coefficients(&self, m: &DMatrix<f64>) -> Result<Vec<f64>> {
        let k = self.dim();
        if k == 0 {
            let r = m.norm();
            return if r <= CLOSURE_TOL {
                Ok(Vec::new())
            } else {
                Err(Error::Representation { residual: r })
            };
        }
        let rhs = DMatrix::from_fn(k, 1, |i, _| self.basis[i].dot(m));
        let sol = linalg::solve_spd(&self.frobenius, &rhs)
            .ok_or_else(|| Error::Dimension("degenerate Lie algebra basis".into()))?;
        let coeffs: Vec<f64> = sol.iter().copied().collect();
        let residual = (self.matrix(&coeffs) - m).norm();
        if residual > CLOSURE_TOL * m.norm().max(1.0) {
            return Err(Error::Representation { residual });
        }
        Ok(coeffs)
    }

    pub fn lie_bracket(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let mut out = vec![0.0; k];
        for i in 0..k {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..k {
                if b[j] == 0.0 {
                    continue;
                }
                for (o, s) in out.iter_mut().zip(&self.structure[i][j]) {
                    *o += a[i] * b[j] * s;
                }
            }
        }
        out
    }

    /// Action of the algebra element on `ℝⁿ`.
    pub fn act_vector(&self, alpha: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (a, b) in alpha.iter().zip(&self.basis) {
            for r in 0..self.n {
                for c in 0..self.n {
                    out[r] += a * b[(r, c)] * u[c];
                }
            }
        }
        out
    }

    pub fn exp(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.matrix(alpha).exp()
    }

    /// `Ad_g α`.
    pub fn adjoint(&self, g: &DMatrix<f64>, alpha: &[f64]) -> Result<Vec<f64>> {
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singularity("group element not invertible".into()))?;
        self.coefficients(&(g * self.matrix(alpha) * g_inv))
    }

    /// `count` elements `exp(t α)`, `t` uniform in `[0, 2π)`, `α` a random
    /// unit vector of the algebra (Frobenius norm of its matrix).
    pub fn sample_group_elements<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<GroupSample> {
        let k = self.dim();
        (0..count)
            .map(|_| {
                if k == 0 {
                    return GroupSample {
                        alpha: Vec::new(),
                        t: 0.0,
                        g: DMatrix::identity(self.n, self.n),
                    };
                }
                let mut alpha: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
                let len = self.matrix(&alpha).norm().max(1e-300);
                alpha.iter_mut().for_each(|a| *a /= len);
                let t = rng.random_range(0.0..2.0 * PI);
                let scaled: Vec<f64> = alpha.iter().map(|a| a * t).collect();
                GroupSample {
                    g: self.exp(&scaled),
                    alpha,
                    t,
                }
            })
            .collect()
    }

    /// True when every basis matrix is antisymmetric (`𝔤 ⊂ 𝔰𝔬(n)`).
    pub fn is_orthogonal(&self) -> bool {
        self.basis
            .iter()
            .all(|b| (b + b.transpose()).norm() <= CLOSURE_TOL)
    }

    /// Invariant inner product `-½ tr(AB)` on the algebra, as a Gram matrix
    /// over the basis. Positive definite for compact `𝔤 ⊂ 𝔰𝔬(n)`.
    pub fn trace_form(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |i, j| {
            -0.5 * (&self.basis[i] * &self.basis[j]).trace()
        })
    }
}

/// Global coordinates on the open subset `X ⊂ ℝ^d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseManifold {
    pub dim: usize,
    pub coordinate_names: Vec<String>,
    /// Coordinate box used when sampling points for verification.
    pub sample_box: Vec<(f64, f64)>,
}

impl BaseManifold {
    pub fn new(names: &[&str], half_width: f64) -> Self {
        BaseManifold {
            dim: names.len(),
            coordinate_names: names.iter().map(|s| s.to_string()).collect(),
            sample_box: vec![(-half_width, half_width); names.len()],
        }
    }
}

/// The evaluable maps of a Cartan datum. Fiber arguments are plain vectors:
/// `u, v ∈ ℝⁿ`, `alpha` a coefficient vector over the Lie algebra basis.
pub trait CartanMaps: Send + Sync {
    /// `c(x)(u, v) ∈ ℝⁿ`
    fn torsion(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64>;
    /// `R(x)(u, v) ∈ 𝔤`, as basis coefficients.
    fn curvature(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64>;
    /// `F(x, u) ∈ T_xX`
    fn flow(&self, x: &[f64], u: &[f64]) -> Vec<f64>;
    /// `ψ(x, α) ∈ T_xX`
    fn infinitesimal_action(&self, x: &[f64], alpha: &[f64]) -> Vec<f64>;
    /// Right action `x · g`.
    fn act(&self, x: &[f64], g: &DMatrix<f64>) -> Vec<f64>;
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A function on `X` expected to be constant on leaves.
#[derive(Clone)]
pub struct Invariant {
    pub name: String,
    pub value: ScalarFn,
    pub gradient: Option<GradientFn>,
}

impl fmt::Debug for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Invariant({})", self.name)
    }
}

impl Invariant {
    pub fn new(
        name: &str,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: Option<GradientFn>,
    ) -> Self {
        Invariant {
            name: name.into(),
            value: Arc::new(value),
            gradient,
        }
    }
}

/// A fiber element `(x; u, α)` of `A = X × (ℝⁿ ⊕ 𝔤)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebroidElement {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl AlgebroidElement {
    pub fn new(x: Vec<f64>, u: Vec<f64>, alpha: Vec<f64>) -> Self {
        AlgebroidElement { x, u, alpha }
    }

    pub fn from_fiber(x: &[f64], n: usize, fiber: &[f64]) -> Self {
        AlgebroidElement {
            x: x.to_vec(),
            u: fiber[..n].to_vec(),
            alpha: fiber[n..].to_vec(),
        }
    }

    /// The action morphism `i(x, α) = (x; 0, α)`.
    pub fn vertical(x: &[f64], n: usize, alpha: &[f64]) -> Self {
        AlgebroidElement {
            x: x.to_vec(),
            u: vec![0.0; n],
            alpha: alpha.to_vec(),
        }
    }

    /// Tautological projection `θ`.
    pub fn theta(&self) -> &[f64] {
        &self.u
    }

    /// Connection projection `ω`.
    pub fn omega(&self) -> &[f64] {
        &self.alpha
    }

    pub fn fiber(&self) -> Vec<f64> {
        let mut v = self.u.clone();
        v.extend_from_slice(&self.alpha);
        v
    }
}

/// A section of `A` evaluated pointwise, returning flat fiber vectors.
pub type Section<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

/// A Cartan datum in canonical form. Cheap to clone; immutable once built.
#[derive(Clone)]
pub struct CartanModel {
    pub name: String,
    pub group: StructureGroup,
    pub base: BaseManifold,
    pub maps: Arc<dyn CartanMaps>,
    pub invariants: Vec<Invariant>,
    pub params: serde_json::Value,
}

impl fmt::Debug for CartanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CartanModel")
            .field("name", &self.name)
            .field("group", &self.group)
            .field("base", &self.base)
            .finish()
    }
}

impl CartanModel {
    pub fn n(&self) -> usize {
        self.group.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.group.n + self.group.dim()
    }

    pub fn split<'a>(&self, fiber: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        fiber.split_at(self.group.n)
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.base.dim {
            return Err(Error::Dimension(format!(
                "base point has {} coordinates, expected {}",
                x.len(),
                self.base.dim
            )));
        }
        if !self.maps.contains(x) {
            return Err(Error::Domain { point: x.to_vec() });
        }
        Ok(())
    }

    fn check_fiber(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.fiber_dim() {
            return Err(Error::Dimension(format!(
                "fiber vector has {} entries, expected {}",
                v.len(),
                self.fiber_dim()
            )));
        }
        Ok(())
    }

    /// `ρ(u, α) = F(u) + ψ(α)`.
    pub fn anchor(&self, e: &AlgebroidElement) -> Result<Vec<f64>> {
        self.check_domain(&e.x)?;
        if e.alpha.len() != self.group.dim() {
            return Err(Error::Representation { residual: f64::NAN });
        }
        self.check_fiber(&e.fiber())?;
        Ok(self.anchor_at(&e.x, &e.fiber()))
    }

    /// Unchecked anchor on a flat fiber vector.
    pub fn anchor_at(&self, x: &[f64], fiber: &[f64]) -> Vec<f64> {
        let (u, alpha) = self.split(fiber);
        add(
            &self.maps.flow(x, u),
            &self.maps.infinitesimal_action(x, alpha),
        )
    }

    /// The `d × (n + dim 𝔤)` matrix of `ρ_x`.
    pub fn anchor_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let k = self.fiber_dim();
        let mut m = DMatrix::zeros(self.base.dim, k);
        for j in 0..k {
            let col = self.anchor_at(x, &linalg::unit(k, j));
            for (i, c) in col.iter().enumerate() {
                m[(i, j)] = *c;
            }
        }
        m
    }

    /// Bracket of constant sections:
    /// `(α·v − β·u − c(u,v), [α,β] − R(u,v))`.
    pub fn bracket_constant(&self, x: &[f64], e1: &[f64], e2: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        self.check_fiber(e1)?;
        self.check_fiber(e2)?;
        Ok(self.bracket_at(x, e1, e2))
    }

    /// Unchecked bracket of constant sections.
    pub fn bracket_at(&self, x: &[f64], e1: &[f64], e2: &[f64]) -> Vec<f64> {
        let (u, a) = self.split(e1);
        let (v, b) = self.split(e2);
        let g = &self.group;
        let av = g.act_vector(a, v);
        let bu = g.act_vector(b, u);
        let c = self.maps.torsion(x, u, v);
        let mut out: Vec<f64> = av
            .iter()
            .zip(&bu)
            .zip(&c)
            .map(|((p, q), r)| p - q - r)
            .collect();
        let ab = g.lie_bracket(a, b);
        let r = self.maps.curvature(x, u, v);
        out.extend(ab.iter().zip(&r).map(|(p, q)| p - q));
        out
    }

    /// Bracket of arbitrary sections, extended from constant sections by the
    /// Leibniz rule:
    /// `[s1,s2](x) = [s1(x),s2(x)]_x + ρ(s1)(s2) − ρ(s2)(s1)`
    /// where the last two terms differentiate the fiber coefficients.
    pub fn bracket_sections(
        &self,
        s1: Section<'_>,
        s2: Section<'_>,
        x: &[f64],
        fd: &FiniteDiff,
    ) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        let a = s1(x);
        let b = s2(x);
        self.check_fiber(&a)?;
        self.check_fiber(&b)?;
        let base = self.bracket_at(x, &a, &b);
        let d2 = fd.directional(s2, x, &self.anchor_at(x, &a))?;
        let d1 = fd.directional(s1, x, &self.anchor_at(x, &b))?;
        Ok(add(&base, &sub(&d2, &d1)))
    }

    /// The same model with its curvature multiplied by `factor`. With any
    /// factor other than 1 this breaks the algebroid identities, which makes
    /// it a negative control for the verifier.
    pub fn with_curvature_scale(&self, factor: f64) -> CartanModel {
        let mut m = self.clone();
        m.maps = Arc::new(ScaledCurvature {
            inner: self.maps.clone(),
            factor,
        });
        m.name = format!("{}[R*{}]", self.name, factor);
        m
    }
}

struct ScaledCurvature {
    inner: Arc<dyn CartanMaps>,
    factor: f64,
}

impl CartanMaps for ScaledCurvature {
    fn torsion(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        self.inner.torsion(x, u, v)
    }
    fn curvature(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        linalg::scale(self.factor, &self.inner.curvature(x, u, v))
    }
    fn flow(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.inner.flow(x, u)
    }
    fn infinitesimal_action(&self, x: &[f64], alpha: &[f64]) -> Vec<f64> {
        self.inner.infinitesimal_action(x, alpha)
    }
    fn act(&self, x: &[f64], g: &DMatrix<f64>) -> Vec<f64> {
        self.inner.act(x, g)
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.inner.contains(x)
    }
}

// ---------------------------------------------------------------------------
// Built-in models

struct Trivial {
    n: usize,
    m: usize,
}

impl CartanMaps for Trivial {
    fn torsion(&self, _x: &[f64], _u: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![0.0; self.n]
    }
    fn curvature(&self, _x: &[f64], _u: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![0.0; self.m]
    }
    fn flow(&self, _x: &[f64], _u: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn infinitesimal_action(&self, _x: &[f64], _alpha: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn act(&self, _x: &[f64], _g: &DMatrix<f64>) -> Vec<f64> {
        Vec::new()
    }
}

/// `X = ℝ` with trivial `SO(n)` action, `R(x)(u,v) = x (u vᵀ − v uᵀ)`.
struct ConstantCurvature {
    group: StructureGroup,
}

impl CartanMaps for ConstantCurvature {
    fn torsion(&self, _x: &[f64], _u: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![0.0; self.group.n]
    }
    fn curvature(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.group.n;
        // basis element (i<j) is E_ji − E_ij, so its coefficient is M_ji
        let mut out = Vec::with_capacity(self.group.dim());
        for i in 0..n {
            for j in i + 1..n {
                out.push(x[0] * (u[j] * v[i] - v[j] * u[i]));
            }
        }
        out
    }
    fn flow(&self, _x: &[f64], _u: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn infinitesimal_action(&self, _x: &[f64], _alpha: &[f64]) -> Vec<f64> {
        vec![0.0]
    }
    fn act(&self, x: &[f64], _g: &DMatrix<f64>) -> Vec<f64> {
        x.to_vec()
    }
}

/// Extremal Kähler surfaces. `X = ℝ⁴ ∋ (K, X, Y, U)`, `T = X + iY`,
/// `ℝ² = ℂ ∋ z = a + ib`, `𝔲(1) ∋ iλ` stored as the coefficient `λ`.
struct ExtremalKahler;

impl CartanMaps for ExtremalKahler {
    fn torsion(&self, _x: &[f64], _u: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn curvature(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        // R(z, w) = (K/2)(z w̄ − z̄ w) = i K Im(z w̄)
        vec![x[0] * (u[1] * v[0] - u[0] * v[1])]
    }
    fn flow(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let (k, xx, yy, uu) = (x[0], x[1], x[2], x[3]);
        let (a, b) = (u[0], u[1]);
        let s = a * xx + b * yy;
        vec![-2.0 * s, a * uu, b * uu, -k * s]
    }
    fn infinitesimal_action(&self, x: &[f64], alpha: &[f64]) -> Vec<f64> {
        let l = alpha[0];
        vec![0.0, l * x[2], -l * x[1], 0.0]
    }
    fn act(&self, x: &[f64], g: &DMatrix<f64>) -> Vec<f64> {
        // T ↦ g⁻¹ T; g is orthogonal so g⁻¹ = gᵀ
        let (tx, ty) = (x[1], x[2]);
        vec![
            x[0],
            g[(0, 0)] * tx + g[(1, 0)] * ty,
            g[(0, 1)] * tx + g[(1, 1)] * ty,
            x[3],
        ]
    }
}

/// The same algebroid presented on the Poisson transversal of `𝔰𝔲(2,1)`,
/// coordinates `(a, b, u1, u2)`, frame `e1 = du1`, `e2 = du2`, `e3 = db`.
struct EkSu21;

impl EkSu21 {
    fn q(a: f64, b: f64) -> f64 {
        (4.0 - 8.0 * a + 9.0 * b * b) / 16.0
    }
}

impl CartanMaps for EkSu21 {
    fn torsion(&self, _x: &[f64], _u: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn curvature(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        let k = 1.5 * x[1];
        vec![k * (u[1] * v[0] - u[0] * v[1])]
    }
    fn flow(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let (a, b, u1, u2) = (x[0], x[1], x[2], x[3]);
        let q = Self::q(a, b);
        // ρ(du1) = {u1, ·}, ρ(du2) = {u2, ·}
        let e1 = [0.75 * b * u2, -u2, 0.0, q];
        let e2 = [-0.75 * b * u1, u1, -q, 0.0];
        (0..4).map(|i| u[0] * e1[i] + u[1] * e2[i]).collect()
    }
    fn infinitesimal_action(&self, x: &[f64], alpha: &[f64]) -> Vec<f64> {
        // ρ(db) = {b, ·}
        let l = alpha[0];
        vec![0.0, 0.0, l * x[3], -l * x[2]]
    }
    fn act(&self, x: &[f64], g: &DMatrix<f64>) -> Vec<f64> {
        let (u1, u2) = (x[2], x[3]);
        vec![
            x[0],
            x[1],
            g[(0, 0)] * u1 + g[(1, 0)] * u2,
            g[(0, 1)] * u1 + g[(1, 1)] * u2,
        ]
    }
}

/// `I1 = K²/4 − U`
pub fn ek_i1(x: &[f64]) -> f64 {
    x[0] * x[0] / 4.0 - x[3]
}

/// `I2 = X² + Y² + KU − K³/6`
pub fn ek_i2(x: &[f64]) -> f64 {
    x[1] * x[1] + x[2] * x[2] + x[0] * x[3] - x[0].powi(3) / 6.0
}

/// `(a, b, u1, u2) ↦ (K, X, Y, U)`
pub fn su21_to_ek(p: &[f64]) -> [f64; 4] {
    let (a, b, u1, u2) = (p[0], p[1], p[2], p[3]);
    [
        1.5 * b,
        0.75 * u2,
        -0.75 * u1,
        3.0 / 64.0 * (4.0 - 8.0 * a + 9.0 * b * b),
    ]
}

/// Inverse of [`su21_to_ek`].
pub fn ek_to_su21(x: &[f64]) -> [f64; 4] {
    let (k, xx, yy, uu) = (x[0], x[1], x[2], x[3]);
    let b = 2.0 * k / 3.0;
    let a = (4.0 + 9.0 * b * b - 64.0 * uu / 3.0) / 8.0;
    [a, b, -4.0 * yy / 3.0, 4.0 * xx / 3.0]
}

/// Parameters accepted by [`builtin_model`].
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Frame dimension for `trivial` and `constant_curvature` (default 2).
    #[serde(default)]
    pub n: Option<usize>,
    /// Multiplies the curvature map; anything but 1 yields a broken model.
    #[serde(default)]
    pub curvature_scale: Option<f64>,
}

pub const BUILTIN_MODELS: [&str; 4] = [
    "trivial",
    "constant_curvature",
    "extremal_kahler",
    "ek_su21",
];

/// Look up one of the built-in models by name.
pub fn builtin_model(name: &str, params: &ModelParams) -> Result<CartanModel> {
    let n = params.n.unwrap_or(2);
    let model = match name {
        "trivial" => {
            if n == 0 {
                return Err(Error::Config("trivial model needs n >= 1".into()));
            }
            let group = StructureGroup::so(n);
            CartanModel {
                name: name.into(),
                maps: Arc::new(Trivial { n, m: group.dim() }),
                group,
                base: BaseManifold::new(&[], 0.0),
                invariants: Vec::new(),
                params: serde_json::json!({ "n": n }),
            }
        }
        "constant_curvature" => {
            if n < 2 {
                return Err(Error::Config("constant_curvature needs n >= 2".into()));
            }
            let group = StructureGroup::so(n);
            CartanModel {
                name: name.into(),
                maps: Arc::new(ConstantCurvature {
                    group: group.clone(),
                }),
                group,
                base: BaseManifold::new(&["x"], 2.0),
                invariants: vec![Invariant::new(
                    "x",
                    |x| x[0],
                    Some(Arc::new(|_: &[f64]| vec![1.0])),
                )],
                params: serde_json::json!({ "n": n }),
            }
        }
        "extremal_kahler" => CartanModel {
            name: name.into(),
            maps: Arc::new(ExtremalKahler),
            group: StructureGroup::u1(),
            base: BaseManifold::new(&["K", "X", "Y", "U"], 2.0),
            invariants: vec![
                Invariant::new(
                    "I1",
                    ek_i1,
                    Some(Arc::new(|x: &[f64]| vec![x[0] / 2.0, 0.0, 0.0, -1.0])),
                ),
                Invariant::new(
                    "I2",
                    ek_i2,
                    Some(Arc::new(|x: &[f64]| {
                        vec![x[3] - x[0] * x[0] / 2.0, 2.0 * x[1], 2.0 * x[2], x[0]]
                    })),
                ),
            ],
            params: serde_json::json!({}),
        },
        "ek_su21" => CartanModel {
            name: name.into(),
            maps: Arc::new(EkSu21),
            group: StructureGroup::u1(),
            base: BaseManifold::new(&["a", "b", "u1", "u2"], 1.5),
            invariants: vec![
                Invariant::new("C", |p| 2.0 - 4.0 * p[0] - 1.5 * p[1] * p[1], None),
                Invariant::new(
                    "I2",
                    |p| {
                        let (a, b) = (p[0], p[1]);
                        9.0 / 128.0
                            * (4.0 * b - 8.0 * a * b
                                + b.powi(3)
                                + 8.0 * (p[2] * p[2] + p[3] * p[3]))
                    },
                    None,
                ),
            ],
            params: serde_json::json!({}),
        },
        other => return Err(Error::UnknownModel(other.into())),
    };
    Ok(match params.curvature_scale {
        Some(f) if f != 1.0 => model.with_curvature_scale(f),
        _ => model,
    })
}
