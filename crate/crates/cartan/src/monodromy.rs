//! Metric splittings of the anchor over a leaf, their curvature, and the
//! period groups obtained by integrating that curvature over spheres and over
//! disks whose boundary lies on a `G`-orbit.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{vector_field_bracket, FiniteDiff};
use crate::linalg::{
    dot, from_dvec, max_abs, norm, pinv, singular_values, sub, to_dvec, RankPolicy,
};
use crate::model::CartanModel;
use crate::quadrature::{integrate_2d, QuadOptions};
use crate::rational::{classify_ratio_with_error, RationalityPolicy, RationalityResult};

/// Splitting of `ρ` by the orthogonal complement of `ker ρ` for a constant
/// fiber metric.
#[derive(Debug, Clone)]
pub struct Splitting {
    pub metric: DMatrix<f64>,
    /// `L⁻ᵀ` for the Cholesky factor `G = LLᵀ`.
    l_inv_t: DMatrix<f64>,
    pub policy: RankPolicy,
}

impl Splitting {
    pub fn with_metric(metric: DMatrix<f64>) -> Result<Self> {
        let l = metric
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config("fiber metric is not positive definite".into()))?
            .l();
        let l_inv_t = l
            .try_inverse()
            .ok_or_else(|| Error::Config("fiber metric is not positive definite".into()))?
            .transpose();
        Ok(Splitting {
            metric,
            l_inv_t,
            policy: RankPolicy::default(),
        })
    }

    /// `⟨u, v⟩ + ⟨α, β⟩_𝔤` with the trace form `−½ tr(αβ)` on `𝔤 ⊂ 𝔰𝔬(n)`.
    pub fn metric_type(model: &CartanModel) -> Result<Self> {
        if !model.group.is_orthogonal() {
            return Err(Error::Type(format!(
                "{}: structure algebra is not in so(n)",
                model.name
            )));
        }
        let n = model.n();
        let k = model.fiber_dim();
        let tf = model.group.trace_form();
        let mut m = DMatrix::zeros(k, k);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m.view_mut((n, n), (k - n, k - n)).copy_from(&tf);
        Self::with_metric(m)
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        (to_dvec(a).transpose() * &self.metric * to_dvec(b))[(0, 0)]
    }

    /// Minimum `G`-norm solution of `ρ_x(e) = v`: with `G = LLᵀ`,
    /// `σ_x(v) = L⁻ᵀ (A L⁻ᵀ)⁺ v`. Errors if `v` is not in the image of `ρ_x`.
    pub fn sigma(&self, model: &CartanModel, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.sigma_all(model, x, &[v])?;
        Ok(out.pop().expect("one vector in, one out"))
    }

    /// [`Splitting::sigma`] for several vectors at the same point.
    pub fn sigma_all(
        &self,
        model: &CartanModel,
        x: &[f64],
        vs: &[&[f64]],
    ) -> Result<Vec<Vec<f64>>> {
        let a = model.anchor_matrix(x);
        let solve = &self.l_inv_t * pinv(&(&a * &self.l_inv_t), self.policy);
        vs.iter()
            .map(|v| {
                let out = from_dvec(&(&solve * to_dvec(v)));
                let back = from_dvec(&(&a * to_dvec(&out)));
                let miss = max_abs(&sub(&back, v));
                if miss > 1e-8 * max_abs(v).max(1.0) {
                    return Err(Error::Singularity(format!(
                        "vector is not tangent to the leaf (miss {miss:.3e})"
                    )));
                }
                Ok(out)
            })
            .collect()
    }
}

/// Leaf-tangent extension check: the anchor must not be close to a rank drop.
fn regular_point(model: &CartanModel, x: &[f64], policy: RankPolicy) -> Result<()> {
    let s = singular_values(&model.anchor_matrix(x));
    let top = s.first().copied().unwrap_or(0.0);
    let cut = policy.threshold(top);
    let smallest_kept = s
        .iter()
        .copied()
        .filter(|&v| v > cut)
        .fold(f64::INFINITY, f64::min);
    if smallest_kept.is_finite() && smallest_kept < 1e-4 * top.max(1.0) {
        return Err(Error::Singularity(format!(
            "anchor is close to a rank drop at {x:?} (singular value {smallest_kept:.2e})"
        )));
    }
    Ok(())
}

/// `Ω_σ(v, w) = σ([X, Y]) − [σX, σY]` at `x`, with `X`, `Y` the anchor
/// fields of the constant sections `σ_x(v)`, `σ_x(w)`.
pub fn splitting_curvature(
    model: &CartanModel,
    split: &Splitting,
    x: &[f64],
    v: &[f64],
    w: &[f64],
    fd: &FiniteDiff,
) -> Result<Vec<f64>> {
    model.check_domain(x)?;
    regular_point(model, x, split.policy)?;
    let ev = split.sigma(model, x, v)?;
    let ew = split.sigma(model, x, w)?;
    let field_v = |y: &[f64]| model.anchor_at(y, &ev);
    let field_w = |y: &[f64]| model.anchor_at(y, &ew);
    let xy = vector_field_bracket(fd, field_v, field_w, x)?;
    let sv = |y: &[f64]| {
        split
            .sigma(model, y, &model.anchor_at(y, &ev))
            .unwrap_or_else(|_| vec![f64::NAN; ev.len()])
    };
    let sw = |y: &[f64]| {
        split
            .sigma(model, y, &model.anchor_at(y, &ew))
            .unwrap_or_else(|_| vec![f64::NAN; ew.len()])
    };
    let br = model.bracket_sections(&sv, &sw, x, fd)?;
    if br.iter().any(|b| !b.is_finite()) {
        return Err(Error::Singularity(
            "splitting undefined near the point".into(),
        ));
    }
    Ok(sub(&split.sigma(model, x, &xy)?, &br))
}

pub type PatchMap = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;
pub type PatchPartials = Arc<dyn Fn(f64, f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    /// The boundary collapses, the patch covers a sphere.
    ContractibleSphereCycle,
    /// The boundary runs along a `G`-orbit.
    GOrbitBoundary,
}

/// A map of a rectangle into a leaf. Reversing one parameter interval flips
/// the orientation.
#[derive(Clone)]
pub struct DiskPatch {
    pub name: String,
    pub param: PatchMap,
    pub partials: Option<PatchPartials>,
    pub s_range: (f64, f64),
    pub t_range: (f64, f64),
    pub boundary_class: BoundaryClass,
    /// Parameter points where the map is allowed to fail to be an immersion.
    pub polar_points: Vec<(f64, f64)>,
}

impl std::fmt::Debug for DiskPatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskPatch")
            .field("name", &self.name)
            .field("s_range", &self.s_range)
            .field("t_range", &self.t_range)
            .field("boundary_class", &self.boundary_class)
            .finish()
    }
}

impl DiskPatch {
    pub fn new(name: &str, param: PatchMap, boundary_class: BoundaryClass) -> Self {
        DiskPatch {
            name: name.into(),
            param,
            partials: None,
            s_range: (0.0, 1.0),
            t_range: (0.0, 1.0),
            boundary_class,
            polar_points: Vec::new(),
        }
    }

    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.s_range = (self.s_range.1, self.s_range.0);
        p.name = format!("{}(reversed)", self.name);
        p
    }

    /// The same map restricted to a sub-rectangle.
    pub fn restricted(&self, s_range: (f64, f64), t_range: (f64, f64)) -> Self {
        let mut p = self.clone();
        p.s_range = s_range;
        p.t_range = t_range;
        p
    }

    pub fn point(&self, s: f64, t: f64) -> Vec<f64> {
        (self.param)(s, t)
    }

    pub fn tangents(&self, s: f64, t: f64, fd: &FiniteDiff) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some(p) = &self.partials {
            return Ok(p(s, t));
        }
        let ds = fd.derivative_1d(|u| (self.param)(u, t), s)?;
        let dt = fd.derivative_1d(|u| (self.param)(s, u), t)?;
        Ok((ds, dt))
    }
}

/// `Ω_σ(∂_s γ, ∂_t γ)` at a patch point, using the coordinate fields of the
/// patch: `[∂_s, ∂_t] = 0`, so `Ω = −[σ_s, σ_t]` and by Leibniz
/// `[σ_s, σ_t] = [σ_s, σ_t]_const + ∂_s σ_t − ∂_t σ_s`.
pub fn patch_curvature(
    model: &CartanModel,
    split: &Splitting,
    patch: &DiskPatch,
    s: f64,
    t: f64,
    fd: &FiniteDiff,
) -> Result<Vec<f64>> {
    let sigma_pair = |s: f64, t: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let x = patch.point(s, t);
        let (ds, dt) = patch.tangents(s, t, fd)?;
        let mut both = split.sigma_all(model, &x, &[&ds, &dt])?;
        let b = both.pop().expect("two vectors");
        Ok((both.pop().expect("two vectors"), b))
    };
    let k = model.fiber_dim();
    let nan = || vec![f64::NAN; k];
    let x = patch.point(s, t);
    let (a, b) = sigma_pair(s, t)?;
    let d_s_sigma_t = fd.derivative_1d(
        |u| sigma_pair(u, t).map(|p| p.1).unwrap_or_else(|_| nan()),
        s,
    )?;
    let d_t_sigma_s = fd.derivative_1d(
        |u| sigma_pair(s, u).map(|p| p.0).unwrap_or_else(|_| nan()),
        t,
    )?;
    if d_s_sigma_t
        .iter()
        .chain(&d_t_sigma_s)
        .any(|v| !v.is_finite())
    {
        return Err(Error::Singularity(format!(
            "splitting undefined near patch point ({s}, {t})"
        )));
    }
    let br = model.bracket_at(&x, &a, &b);
    Ok(br
        .iter()
        .zip(&d_s_sigma_t)
        .zip(&d_t_sigma_s)
        .map(|((c, p), q)| -(c + p - q))
        .collect())
}

/// A frame of flat sections of `ker ρ` along the leaf.
pub type FlatFrame = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// Least-squares coefficients of `v` in the given frame.
fn frame_coefficients(frame: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let m = frame.len();
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&frame[i], &frame[j]));
    let rhs = DMatrix::from_fn(m, 1, |i, _| dot(&frame[i], v));
    let sol = pinv(&gram, RankPolicy::default()) * rhs;
    sol.iter().copied().collect()
}

/// Largest `|[Ω, k]|` over an isotropy basis at `x`, relative to `max(1, |Ω|)`.
pub fn centrality_residual(
    model: &CartanModel,
    x: &[f64],
    omega: &[f64],
    policy: RankPolicy,
) -> f64 {
    let basis = crate::linalg::nullspace(&model.anchor_matrix(x), policy);
    let scale = norm(omega).max(1.0);
    basis
        .iter()
        .map(|k| norm(&model.bracket_at(x, omega, k)) / scale)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Period {
    pub patch: String,
    pub boundary_class: BoundaryClass,
    /// Coefficients against the flat frame.
    pub coefficients: Vec<f64>,
    pub error_estimate: f64,
    pub cells: usize,
    pub centrality_residual: f64,
    /// Largest distance of the frame-expanded curvature from the curvature
    /// itself at the centrality probes.
    pub frame_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodOptions {
    pub quad: QuadOptions,
    pub fd: FiniteDiff,
    pub centrality_tol: f64,
    /// Probe points per side for the centrality spot-check.
    pub centrality_probes: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            quad: QuadOptions::default(),
            fd: FiniteDiff { h: 1e-4, tol: 1e-6 },
            centrality_tol: 1e-8,
            centrality_probes: 3,
        }
    }
}

/// `∫ γ*Ω_σ` over the patch, as coefficients in the flat frame.
pub fn period(
    model: &CartanModel,
    split: &Splitting,
    patch: &DiskPatch,
    flat: &FlatFrame,
    opts: &PeriodOptions,
) -> Result<Period> {
    let mut centrality: f64 = 0.0;
    let mut frame_residual: f64 = 0.0;
    let probes = opts.centrality_probes.max(1);
    for i in 0..probes {
        for j in 0..probes {
            let fs = (i as f64 + 0.5) / probes as f64;
            let ft = (j as f64 + 0.5) / probes as f64;
            let s = patch.s_range.0 + fs * (patch.s_range.1 - patch.s_range.0);
            let t = patch.t_range.0 + ft * (patch.t_range.1 - patch.t_range.0);
            let x = patch.point(s, t);
            let om = patch_curvature(model, split, patch, s, t, &opts.fd)?;
            centrality = centrality.max(centrality_residual(model, &x, &om, split.policy));
            let frame = flat(&x);
            let c = frame_coefficients(&frame, &om);
            let mut back = vec![0.0; om.len()];
            for (ci, f) in c.iter().zip(&frame) {
                for (b, fv) in back.iter_mut().zip(f) {
                    *b += ci * fv;
                }
            }
            frame_residual = frame_residual.max(max_abs(&sub(&back, &om)) / max_abs(&om).max(1.0));
        }
    }
    if centrality > opts.centrality_tol {
        return Err(Error::Centrality {
            residual: centrality,
        });
    }
    let dim = flat(&patch.point(patch.s_range.0, patch.t_range.0)).len();
    let integrand = |s: f64, t: f64| -> Vec<f64> {
        match patch_curvature(model, split, patch, s, t, &opts.fd) {
            Ok(om) => frame_coefficients(&flat(&patch.point(s, t)), &om),
            Err(_) => vec![f64::NAN; dim],
        }
    };
    let q = integrate_2d(integrand, patch.s_range, patch.t_range, &opts.quad)?;
    if q.value.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singularity(format!(
            "curvature undefined somewhere on patch {}",
            patch.name
        )));
    }
    Ok(Period {
        patch: patch.name.clone(),
        boundary_class: patch.boundary_class,
        coefficients: q.value,
        error_estimate: q.error,
        cells: q.cells,
        centrality_residual: centrality,
        frame_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Monodromy,
    GMonodromy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No { reason: String },
    Undecided { reason: String },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub group_kind: GroupKind,
    pub period: Period,
    /// Closed-form value where one is known, for reporting.
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyTolerances {
    pub quad_abs_tol: f64,
    pub fd_step: f64,
    pub fd_tol: f64,
    pub centrality_tol: f64,
    pub rationality: RationalityPolicy,
}

/// Monodromy and `G`-monodromy of one leaf.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub model: String,
    pub leaf: serde_json::Value,
    pub flat_frame: String,
    /// Monodromy generators first, then the orbit-boundary disks.
    pub generators: Vec<Generator>,
    /// Discreteness of the monodromy group `N_x`.
    pub monodromy_discrete: Verdict,
    /// Discreteness of the `G`-monodromy group `N^G_x`.
    pub discrete: Verdict,
    pub rationality: Option<RationalityResult>,
    pub integrable: Verdict,
    pub g_integrable: Verdict,
    pub tolerances: MonodromyTolerances,
}

impl MonodromyReport {
    pub fn generators_of(&self, kind: GroupKind) -> impl Iterator<Item = &Generator> {
        self.generators.iter().filter(move |g| g.group_kind == kind)
    }

    /// Coefficient vectors of `N^G` generators; contains those of `N`.
    pub fn g_generators(&self) -> Vec<Vec<f64>> {
        self.generators
            .iter()
            .map(|g| g.period.coefficients.clone())
            .collect()
    }
}

/// Discreteness of the subgroup of `ℝ` generated by `a` and `b`: decided by
/// the rationality of `a/b`, with the error estimate propagated.
pub fn rank_two_discreteness(
    a: f64,
    a_err: f64,
    b: f64,
    b_err: f64,
    policy: RationalityPolicy,
) -> (Verdict, RationalityResult) {
    let r = a / b;
    let err = (a_err + r.abs() * b_err) / b.abs();
    let res = classify_ratio_with_error(r, err, policy);
    let verdict = match &res.verdict {
        crate::rational::Rationality::Rational { .. } => Verdict::Yes,
        crate::rational::Rationality::IrrationalUpTo { denominator_bound, tolerance } => Verdict::No {
            reason: format!(
                "generator ratio {r:.15} has no fraction p/q with q <= {denominator_bound} within {tolerance:.1e}"
            ),
        },
        crate::rational::Rationality::Undecided { reason } => Verdict::Undecided { reason: reason.clone() },
    };
    (verdict, res)
}

/// How far the splitting is from sending the fundamental fields of `𝔤` at
/// `x` to `(0, α)`, and whether the action is locally free there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GSplittingCheck {
    pub residual: f64,
    pub locally_free: bool,
}

impl GSplittingCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.locally_free && self.residual <= tol
    }
}

pub fn g_splitting_check(
    model: &CartanModel,
    split: &Splitting,
    x: &[f64],
) -> Result<GSplittingCheck> {
    let n = model.n();
    let k = model.fiber_dim();
    let mut residual: f64 = 0.0;
    let mut columns = Vec::new();
    for a in n..k {
        let e = crate::linalg::unit(k, a);
        let v = model.anchor_at(x, &e);
        columns.push(v.clone());
        residual = residual.max(max_abs(&sub(&split.sigma(model, x, &v)?, &e)));
    }
    let m = DMatrix::from_fn(model.base.dim, columns.len(), |i, j| columns[j][i]);
    let locally_free = crate::linalg::numerical_rank(&m, split.policy) == k - n;
    Ok(GSplittingCheck {
        residual,
        locally_free,
    })
}

/// A patch whose period generates part of `N` or `N^G`.
#[derive(Debug, Clone)]
pub struct GeneratorPatch {
    pub label: String,
    pub group_kind: GroupKind,
    pub patch: DiskPatch,
    pub closed_form: Option<f64>,
}

/// Everything `g_monodromy` needs about one leaf. Patches must be supplied by
/// the caller; `π₂` generators are not searched for.
#[derive(Clone)]
pub struct LeafPatches {
    pub leaf: serde_json::Value,
    pub flat_frame_name: String,
    pub flat_frame: FlatFrame,
    pub patches: Vec<GeneratorPatch>,
    /// Set when no orbit with a `G`-splitting was available.
    pub no_g_splitting: Option<String>,
}

/// Discreteness of the subgroup of `ℝ` generated by the given values.
fn discreteness(
    values: &[(f64, f64)],
    policy: RationalityPolicy,
) -> (Verdict, Option<RationalityResult>) {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.0.abs()));
    let nonzero: Vec<(f64, f64)> = values
        .iter()
        .copied()
        .filter(|v| v.0.abs() > v.1.max(1e-14 * scale))
        .collect();
    let Some(&(b, b_err)) = nonzero.first() else {
        return (Verdict::Yes, None);
    };
    let mut last = None;
    for &(a, a_err) in &nonzero[1..] {
        let (v, r) = rank_two_discreteness(a, a_err, b, b_err, policy);
        if !v.is_yes() {
            return (v, Some(r));
        }
        last = Some(r);
    }
    (Verdict::Yes, last)
}

/// Monodromy and `G`-monodromy groups of a leaf from the supplied patches.
/// With a one-dimensional flat frame the group is a subgroup of `ℝ`, and
/// discreteness is a rational-dependence test on the generators.
pub fn g_monodromy(
    model: &CartanModel,
    split: &Splitting,
    leaf: &LeafPatches,
    opts: &PeriodOptions,
    policy: RationalityPolicy,
) -> Result<MonodromyReport> {
    let mut generators = Vec::new();
    for gp in &leaf.patches {
        let p = period(model, split, &gp.patch, &leaf.flat_frame, opts)?;
        generators.push(Generator {
            label: gp.label.clone(),
            group_kind: gp.group_kind,
            period: p,
            closed_form: gp.closed_form,
        });
    }
    // N first, then N^G
    generators.sort_by_key(|g| g.group_kind == GroupKind::GMonodromy);
    let one_dim = generators.iter().all(|g| g.period.coefficients.len() == 1);
    let values = |only_n: bool| -> Vec<(f64, f64)> {
        generators
            .iter()
            .filter(|g| !only_n || g.group_kind == GroupKind::Monodromy)
            .map(|g| (g.period.coefficients[0], g.period.error_estimate))
            .collect()
    };
    let multi = || Verdict::Undecided {
        reason: "flat frame has more than one section".into(),
    };
    let (monodromy_discrete, _) = if one_dim {
        discreteness(&values(true), policy)
    } else {
        (multi(), None)
    };
    let (discrete, rationality) = match &leaf.no_g_splitting {
        Some(reason) => (
            Verdict::Undecided {
                reason: format!("undecided by this method: {reason}"),
            },
            None,
        ),
        None if one_dim => discreteness(&values(false), policy),
        None => (multi(), None),
    };
    Ok(MonodromyReport {
        model: model.name.clone(),
        leaf: leaf.leaf.clone(),
        flat_frame: leaf.flat_frame_name.clone(),
        generators,
        integrable: monodromy_discrete.clone(),
        g_integrable: discrete.clone(),
        monodromy_discrete,
        discrete,
        rationality,
        tolerances: MonodromyTolerances {
            quad_abs_tol: opts.quad.abs_tol,
            fd_step: opts.fd.h,
            fd_tol: opts.fd.tol,
            centrality_tol: opts.centrality_tol,
            rationality: policy,
        },
    })
}
