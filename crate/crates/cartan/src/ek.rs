//! Extremal Kähler surfaces: the profile cubic, the leaves of each level set
//! `I1 = c1, I2 = c2`, the `(K, θ)` patches, germ symmetries, the `𝔰𝔲(2,1)`
//! picture and the table of simply connected solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Complex, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{completeness_verdict, Completeness, Endpoint, Profile, ProfileCurve};
use crate::model::CartanModel;
use crate::model::{ek_i1, ek_i2, su21_to_ek};
use crate::monodromy::{
    g_splitting_check, BoundaryClass, DiskPatch, FlatFrame, GeneratorPatch, GroupKind, LeafPatches,
    MonodromyReport, PeriodOptions, Splitting, Verdict,
};
use crate::rational::{classify_ratio, Rationality, RationalityPolicy, RationalityResult};

/// Roots closer than this (relative to the root scale) are merged.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicRoot {
    pub value: f64,
    pub multiplicity: u8,
}

/// `p(K) = −K³/12 + c1 K + c2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicProfile {
    pub c1: f64,
    pub c2: f64,
    /// Ascending coefficients.
    pub p_coeffs: [f64; 4],
    pub delta: f64,
    /// Distinct real roots, ascending.
    pub roots: Vec<CubicRoot>,
    /// Set when roots were merged although `delta` was not exactly zero.
    pub merged: bool,
}

impl CubicProfile {
    pub fn new(c1: f64, c2: f64) -> Self {
        let delta = (16.0 * c1.powi(3) - 9.0 * c2 * c2) / 48.0;
        let size = 16.0 * c1.abs().powi(3) + 9.0 * c2 * c2;
        let d = 16.0 * c1.powi(3) - 9.0 * c2 * c2;
        let mut raw: Vec<f64> = if c1 == 0.0 && c2 == 0.0 {
            vec![0.0; 3]
        } else if d.abs() <= 1e-14 * size {
            // double root −3c2/(2c1), simple root 3c2/c1
            let dbl = -1.5 * c2 / c1;
            vec![dbl, dbl, 3.0 * c2 / c1]
        } else if d > 0.0 {
            let s = c1.sqrt();
            let arg = (0.75 * c2 / (c1 * s)).clamp(-1.0, 1.0);
            let phi = arg.acos();
            (0..3)
                .map(|k| 4.0 * s * (phi / 3.0 - 2.0 * PI * k as f64 / 3.0).cos())
                .collect()
        } else if c1 > 0.0 {
            let s = c1.sqrt();
            let arg = 0.75 * c2.abs() / (c1 * s);
            vec![4.0 * s * c2.signum() * (arg.acosh() / 3.0).cosh()]
        } else if c1 < 0.0 {
            let s = (-c1).sqrt();
            let arg = 0.75 * c2 / (-c1 * s);
            vec![4.0 * s * (arg.asinh() / 3.0).sinh()]
        } else {
            vec![(12.0 * c2).cbrt()]
        };
        let p = |k: f64| -k * k * k / 12.0 + c1 * k + c2;
        let dp = |k: f64| -k * k / 4.0 + c1;
        // polish simple roots
        let simple = raw.len() == 1 || (raw.len() == 3 && d.abs() > 1e-14 * size);
        if simple {
            for r in raw.iter_mut() {
                for _ in 0..4 {
                    let g = dp(*r);
                    if g == 0.0 {
                        break;
                    }
                    let step = p(*r) / g;
                    if !step.is_finite() {
                        break;
                    }
                    *r -= step;
                }
            }
        }
        raw.sort_by(|a, b| a.total_cmp(b));
        let scale = raw.iter().fold(1.0_f64, |m, r| m.max(r.abs()));
        let mut roots: Vec<CubicRoot> = Vec::new();
        let mut merged = false;
        for r in raw {
            match roots.last_mut() {
                Some(last) if (r - last.value).abs() <= MULTIPLICITY_TOL * scale => {
                    if r != last.value || d != 0.0 {
                        merged |= d.abs() > 1e-14 * size;
                    }
                    let m = last.multiplicity as f64;
                    last.value = (last.value * m + r) / (m + 1.0);
                    last.multiplicity += 1;
                }
                _ => roots.push(CubicRoot {
                    value: r,
                    multiplicity: 1,
                }),
            }
        }
        CubicProfile {
            c1,
            c2,
            p_coeffs: [c2, c1, 0.0, -1.0 / 12.0],
            delta,
            roots,
            merged,
        }
    }

    pub fn p(&self, k: f64) -> f64 {
        -k * k * k / 12.0 + self.c1 * k + self.c2
    }

    pub fn dp(&self, k: f64) -> f64 {
        -k * k / 4.0 + self.c1
    }

    /// `U = K²/4 − c1` along the leaf.
    pub fn u(&self, k: f64) -> f64 {
        k * k / 4.0 - self.c1
    }

    /// Sign of the discriminant as seen by the root pattern.
    pub fn delta_sign(&self) -> i8 {
        let total: u8 = self.roots.iter().map(|r| r.multiplicity).sum();
        if self.roots.iter().any(|r| r.multiplicity > 1) {
            0
        } else if total == 3 {
            1
        } else {
            -1
        }
    }

    pub fn simple_roots(&self) -> Vec<f64> {
        self.roots
            .iter()
            .filter(|r| r.multiplicity == 1)
            .map(|r| r.value)
            .collect()
    }

    pub fn profile(&self) -> Profile {
        Profile::Polynomial {
            coeffs: self.p_coeffs.to_vec(),
        }
    }

    /// The ratio `(4c1 − r2²)/(r3² − 4c1)` for three simple roots.
    pub fn sphere_ratio(&self) -> Option<f64> {
        let (r2, r3) = self.sphere_roots()?;
        Some((4.0 * self.c1 - r2 * r2) / (r3 * r3 - 4.0 * self.c1))
    }

    pub fn sphere_roots(&self) -> Option<(f64, f64)> {
        (self.delta_sign() == 1).then(|| (self.roots[1].value, self.roots[2].value))
    }

    /// Closed-form periods: cap at the upper root and its complement,
    /// `8π/(r3² − 4c1)` and `8π/(4c1 − r2²)`.
    pub fn sphere_generators(&self) -> Option<(f64, f64)> {
        let (r2, r3) = self.sphere_roots()?;
        Some((
            8.0 * PI / (r3 * r3 - 4.0 * self.c1),
            8.0 * PI / (4.0 * self.c1 - r2 * r2),
        ))
    }
}

/// `c2` with `(4c1 − r2²)/(r3² − 4c1) = target`, for `c1 > 0` and
/// `0 < target < 1`. The ratio decreases from 1 to 0 as `c2` runs over the
/// interval `|c2| < 4c1^{3/2}/3` where three real roots exist.
pub fn solve_c2_for_ratio(c1: f64, target: f64) -> Result<f64> {
    if !(c1 > 0.0) || !(target > 0.0 && target < 1.0) {
        return Err(Error::Config(format!(
            "need c1 > 0 and 0 < ratio < 1, got c1 = {c1}, ratio = {target}"
        )));
    }
    let bound = 4.0 / 3.0 * c1.powf(1.5);
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match CubicProfile::new(c1, mid).sphere_ratio() {
            Some(r) if r > target => lo = mid,
            Some(_) => hi = mid,
            None => {
                return Err(Error::Singularity(format!(
                    "lost the sphere leaf at c2 = {mid}"
                )))
            }
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeafKind {
    /// The fixed point `(K, 0, 0, 0)`; the solution has constant curvature `K`.
    PointLeaf {
        k: f64,
    },
    Cylinder,
    Plane,
    Sphere,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafFamily {
    pub c1: f64,
    pub c2: f64,
    pub kind: LeafKind,
    pub k_interval: (Endpoint, Endpoint),
    pub pi1: String,
    pub pi2: String,
    /// `U(1)`-integrability of the algebroid over the leaf.
    pub integrable: Verdict,
    pub complete: Completeness,
    pub ratio: Option<RationalityResult>,
    pub frame_bundle_label: Option<String>,
    pub solution_label: Option<String>,
}

impl LeafFamily {
    pub fn is_two_dimensional(&self) -> bool {
        !matches!(self.kind, LeafKind::PointLeaf { .. })
    }

    /// Simple root closing the leaf from above, if any.
    pub fn pole(&self) -> Option<f64> {
        match self.k_interval.1 {
            Endpoint::Root {
                value,
                multiplicity: 1,
                included: true,
            } => Some(value),
            _ => None,
        }
    }

    /// A complete, `G`-integrable leaf yields a complete simply connected solution.
    pub fn complete_solution(&self) -> Option<&str> {
        (self.complete.is_complete() && self.integrable.is_yes())
            .then_some(self.solution_label.as_deref())
            .flatten()
    }
}

/// Zero test for the constant curvature of a point leaf.
const K_ZERO_TOL: f64 = 1e-12;

fn point_labels(k: f64) -> (&'static str, &'static str) {
    if k.abs() <= K_ZERO_TOL {
        ("SO(2)⋉ℝ²", "ℝ²")
    } else if k > 0.0 {
        ("𝕊³", "𝕊²")
    } else {
        ("SO(2,1)", "ℍ²")
    }
}

/// All leaves in the level set `I1 = c1`, `I2 = c2`.
pub fn classify(c1: f64, c2: f64, policy: RationalityPolicy) -> Vec<LeafFamily> {
    let prof = CubicProfile::new(c1, c2);
    let mut out = Vec::new();
    for r in prof.roots.iter().filter(|r| r.multiplicity > 1) {
        let k = if r.value.abs() <= K_ZERO_TOL {
            0.0
        } else {
            r.value
        };
        let (frame, sol) = point_labels(k);
        let at = Endpoint::Root {
            value: k,
            multiplicity: r.multiplicity,
            included: true,
        };
        out.push(LeafFamily {
            c1,
            c2,
            kind: LeafKind::PointLeaf { k },
            k_interval: (at, at),
            pi1: "1".into(),
            pi2: "1".into(),
            integrable: Verdict::Yes,
            complete: Completeness::Complete,
            ratio: None,
            frame_bundle_label: Some(frame.into()),
            solution_label: Some(sol.into()),
        });
    }
    // intervals where p > 0; p → +∞ as K → −∞
    let mut lo = Endpoint::NegInfinity;
    let mut positive = true;
    let end_of = |r: &CubicRoot| Endpoint::Root {
        value: r.value,
        multiplicity: r.multiplicity,
        included: r.multiplicity == 1,
    };
    for r in &prof.roots {
        if positive {
            out.push(two_dim_leaf(&prof, lo, end_of(r), policy));
        }
        if r.multiplicity % 2 == 1 {
            positive = !positive;
        }
        lo = end_of(r);
    }
    if positive {
        out.push(two_dim_leaf(&prof, lo, Endpoint::PosInfinity, policy));
    }
    out
}

fn two_dim_leaf(
    prof: &CubicProfile,
    lo: Endpoint,
    hi: Endpoint,
    policy: RationalityPolicy,
) -> LeafFamily {
    let pole = |e: Endpoint| {
        matches!(
            e,
            Endpoint::Root {
                multiplicity: 1,
                included: true,
                ..
            }
        )
    };
    let kind = match (pole(lo), pole(hi)) {
        (true, true) => LeafKind::Sphere,
        (false, false) => LeafKind::Cylinder,
        _ => LeafKind::Plane,
    };
    let complete = completeness_verdict(&ProfileCurve {
        profile: prof.profile(),
        lo,
        hi,
    })
    .expect("cubic profile is a polynomial");
    let (pi1, pi2) = match kind {
        LeafKind::Sphere => ("1", "ℤ"),
        LeafKind::Cylinder => ("ℤ", "1"),
        _ => ("1", "1"),
    };
    let (integrable, ratio, frame, sol) = match kind {
        LeafKind::Sphere => {
            let r = classify_ratio(prof.sphere_ratio().expect("sphere has three roots"), policy);
            match &r.verdict {
                Rationality::Rational { p, q, .. } => (
                    Verdict::Yes,
                    Some(r.clone()),
                    Some("𝕊³".to_string()),
                    Some(format!("ℂℙ¹_{{{p},{q}}}")),
                ),
                Rationality::IrrationalUpTo { .. } => (
                    Verdict::No {
                        reason: format!("period ratio: {r}"),
                    },
                    Some(r.clone()),
                    None,
                    None,
                ),
                Rationality::Undecided { reason } => (
                    Verdict::Undecided {
                        reason: reason.clone(),
                    },
                    Some(r.clone()),
                    None,
                    None,
                ),
            }
        }
        LeafKind::Cylinder => (
            Verdict::Yes,
            None,
            Some("(ℝ²×ℝ)/ℤ".to_string()),
            Some("ℝ²".to_string()),
        ),
        _ => (
            Verdict::Yes,
            None,
            Some("ℝ²×𝕊¹".to_string()),
            Some("ℝ²".to_string()),
        ),
    };
    LeafFamily {
        c1: prof.c1,
        c2: prof.c2,
        kind,
        k_interval: (lo, hi),
        pi1: pi1.into(),
        pi2: pi2.into(),
        integrable,
        complete,
        ratio,
        frame_bundle_label: frame,
        solution_label: sol,
    }
}

/// The part of a leaf with `K ∈ [lo, hi]`, parameterized over `[0, 1]²` by
/// `θ = 2πs`, `K = lo + (hi − lo) sin²(πt/2)`. Endpoints that are simple
/// roots of `p` are factored out of `√p`, which keeps the map smooth there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafStrip {
    pub c1: f64,
    pub c2: f64,
    pub lo: f64,
    pub hi: f64,
    pub lo_root: bool,
    pub hi_root: bool,
}

impl LeafStrip {
    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn k(&self, t: f64) -> f64 {
        let s = (0.5 * PI * t).sin();
        self.lo + self.width() * s * s
    }

    /// `(√p, d√p/dt)` at parameter `t`.
    fn sqrt_p(&self, t: f64) -> (f64, f64) {
        let w = self.width();
        let (s, c) = (0.5 * PI * t).sin_cos();
        let (ds, dc) = (0.5 * PI * c, -0.5 * PI * s);
        let k = self.k(t);
        let dk = w * PI * s * c;
        let (lo, hi, c1, c2) = (self.lo, self.hi, self.c1, self.c2);
        // √p = a(t) · √(rest(K))
        let (a, da, rest, drest): (f64, f64, f64, f64) = match (self.lo_root, self.hi_root) {
            (true, true) => (
                w * s * c,
                w * (ds * c + s * dc),
                (k + lo + hi) / 12.0,
                1.0 / 12.0,
            ),
            (true, false) => {
                // p = (K − lo)·(−(K² + lo K + lo² − 12c1)/12)
                let q = -(k * k + lo * k + lo * lo - 12.0 * c1) / 12.0;
                (w.sqrt() * s, w.sqrt() * ds, q, -(2.0 * k + lo) / 12.0)
            }
            (false, true) => {
                // p = (hi − K)·(K² + hi K + hi² − 12c1)/12
                let q = (k * k + hi * k + hi * hi - 12.0 * c1) / 12.0;
                (w.sqrt() * c, w.sqrt() * dc, q, (2.0 * k + hi) / 12.0)
            }
            (false, false) => (1.0, 0.0, -k * k * k / 12.0 + c1 * k + c2, -k * k / 4.0 + c1),
        };
        let b = rest.max(0.0).sqrt();
        let db = if b > 0.0 {
            drest * dk / (2.0 * b)
        } else {
            f64::NAN
        };
        (a * b, da * b + a * db)
    }

    pub fn point(&self, s: f64, t: f64) -> Vec<f64> {
        let k = self.k(t);
        let (r, _) = self.sqrt_p(t);
        let (sn, cs) = (2.0 * PI * s).sin_cos();
        vec![k, r * cs, r * sn, k * k / 4.0 - self.c1]
    }

    pub fn partials(&self, s: f64, t: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.k(t);
        let (r, dr) = self.sqrt_p(t);
        let (sn, cs) = (2.0 * PI * s).sin_cos();
        let (sa, ca) = (0.5 * PI * t).sin_cos();
        let dk = self.width() * PI * sa * ca;
        let ds = vec![0.0, -2.0 * PI * r * sn, 2.0 * PI * r * cs, 0.0];
        let dt = vec![dk, dr * cs, dr * sn, 0.5 * k * dk];
        (ds, dt)
    }

    pub fn patch(&self, name: &str, boundary_class: BoundaryClass) -> DiskPatch {
        let me = *self;
        let mut p = DiskPatch::new(name, Arc::new(move |s, t| me.point(s, t)), boundary_class);
        p.partials = Some(Arc::new(move |s, t| me.partials(s, t)));
        if self.lo_root {
            p.polar_points.push((0.0, 0.0));
        }
        if self.hi_root {
            p.polar_points.push((0.0, 1.0));
        }
        p
    }
}

/// The flat section `s0 = (iT, iU)` of the isotropy along every leaf.
pub fn s0(x: &[f64]) -> Vec<f64> {
    vec![-x[2], x[1], x[3]]
}

pub fn s0_frame() -> FlatFrame {
    Arc::new(|x: &[f64]| vec![s0(x)])
}

/// `f(K) = U/(p + U²)`, whose derivative gives the splitting curvature.
pub fn curvature_potential(prof: &CubicProfile, k: f64) -> f64 {
    let u = prof.u(k);
    u / (prof.p(k) + u * u)
}

/// Coefficient of `s0` in `Ω_σ(∂γ/∂K, ∂γ/∂θ)` for the metric splitting,
/// with `Ω_σ(X, Y) = σ[X, Y] − [σX, σY]`: it equals `−f'(K)`.
pub fn omega_closed_form(prof: &CubicProfile, k: f64) -> f64 {
    let (p, u) = (prof.p(k), prof.u(k));
    let (dp, du) = (prof.dp(k), 0.5 * k);
    let den = p + u * u;
    -(du * den - u * (dp + 2.0 * u * du)) / (den * den)
}

/// `K_L` in the `(K, θ)` chart: `(1/(4p), p/(p + U²))`.
pub fn leaf_metric_closed_form(prof: &CubicProfile, k: f64) -> (f64, f64) {
    let (p, u) = (prof.p(k), prof.u(k));
    (1.0 / (4.0 * p), p / (p + u * u))
}

/// The strip of a sphere leaf and the cap between the `G`-splitting orbit
/// `K = 2√c1` and the upper root.
pub fn sphere_strips(prof: &CubicProfile) -> Option<(LeafStrip, LeafStrip)> {
    let (r2, r3) = prof.sphere_roots()?;
    let base = LeafStrip {
        c1: prof.c1,
        c2: prof.c2,
        lo: r2,
        hi: r3,
        lo_root: true,
        hi_root: true,
    };
    let cap = LeafStrip {
        lo: 2.0 * prof.c1.sqrt(),
        lo_root: false,
        ..base
    };
    Some((base, cap))
}

/// Orbits `K = ±2√c1` (where `U = 0`) crossing the interior of a leaf.
pub fn splitting_orbits(leaf: &LeafFamily) -> Vec<f64> {
    if leaf.c1 < 0.0 || !leaf.is_two_dimensional() {
        return Vec::new();
    }
    let prof = CubicProfile::new(leaf.c1, leaf.c2);
    let inside = |k: f64| {
        let above = match leaf.k_interval.0 {
            Endpoint::NegInfinity => true,
            Endpoint::Root { value, .. } => k > value,
            Endpoint::PosInfinity => false,
        };
        let below = match leaf.k_interval.1 {
            Endpoint::PosInfinity => true,
            Endpoint::Root { value, .. } => k < value,
            Endpoint::NegInfinity => false,
        };
        above && below && prof.p(k) > 0.0
    };
    let s = 2.0 * leaf.c1.sqrt();
    let mut out: Vec<f64> = [-s, s].into_iter().filter(|&k| inside(k)).collect();
    out.dedup();
    out
}

/// Residual allowed in the `G`-splitting check along a candidate orbit.
pub const G_SPLITTING_TOL: f64 = 1e-10;

/// Patches generating `N` and `N^G` for a two-dimensional leaf: the sphere
/// itself, and caps bounded by an orbit `U = 0` up to the leaf's pole.
pub fn leaf_patches(
    model: &CartanModel,
    split: &Splitting,
    leaf: &LeafFamily,
) -> Result<LeafPatches> {
    let prof = CubicProfile::new(leaf.c1, leaf.c2);
    let mut patches = Vec::new();
    let mut no_g_splitting = None;
    if leaf.kind == LeafKind::Sphere {
        let (sphere, _) = sphere_strips(&prof).expect("sphere leaf has three roots");
        let (n1, n2) = prof
            .sphere_generators()
            .expect("sphere leaf has three roots");
        patches.push(GeneratorPatch {
            label: "sphere".into(),
            group_kind: GroupKind::Monodromy,
            patch: sphere.patch("sphere", BoundaryClass::ContractibleSphereCycle),
            closed_form: Some(n1 + n2),
        });
    }
    if leaf.is_two_dimensional() {
        let mut found = false;
        if let Some(pole) = leaf.pole() {
            for k in splitting_orbits(leaf) {
                let x = [k, prof.p(k).sqrt(), 0.0, prof.u(k)];
                if !g_splitting_check(model, split, &x)?.holds(G_SPLITTING_TOL) {
                    continue;
                }
                found = true;
                let strip = LeafStrip {
                    c1: leaf.c1,
                    c2: leaf.c2,
                    lo: k,
                    hi: pole,
                    lo_root: false,
                    hi_root: true,
                };
                let name = format!("cap K in [{k:.6}, {pole:.6}]");
                patches.push(GeneratorPatch {
                    label: name.clone(),
                    group_kind: GroupKind::GMonodromy,
                    patch: strip.patch(&name, BoundaryClass::GOrbitBoundary),
                    closed_form: Some(
                        2.0 * PI
                            * (curvature_potential(&prof, pole) - curvature_potential(&prof, k)),
                    ),
                });
            }
        }
        if !found {
            no_g_splitting = Some("no orbit with a G-splitting in the leaf".to_string());
        }
    }
    Ok(LeafPatches {
        leaf: serde_json::to_value(leaf).expect("leaf serializes"),
        flat_frame_name: "s0 = (iT, iU)".into(),
        flat_frame: s0_frame(),
        patches,
        no_g_splitting,
    })
}

/// Period options used for EK leaves.
pub fn ek_period_options() -> PeriodOptions {
    PeriodOptions {
        quad: crate::quadrature::QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_cells: 20_000,
        },
        ..PeriodOptions::default()
    }
}

/// `g_monodromy` on the `index`-th leaf of the level set `(c1, c2)`.
pub fn leaf_monodromy(
    model: &CartanModel,
    leaf: &LeafFamily,
    opts: &PeriodOptions,
    policy: RationalityPolicy,
) -> Result<MonodromyReport> {
    let split = Splitting::metric_type(model)?;
    let patches = leaf_patches(model, &split, leaf)?;
    crate::monodromy::g_monodromy(model, &split, &patches, opts, policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryGroup {
    #[serde(rename = "U(1)")]
    U1,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GermSymmetry {
    pub group: SymmetryGroup,
    pub t_norm: f64,
    /// `|T|` is non-zero but within the warning band.
    pub near_degenerate: bool,
}

pub const T_ZERO_TOL: f64 = 1e-10;
pub const T_WARNING_BAND: f64 = 1e-6;

/// Symmetry group of the germ of solution through `(K, X, Y, U)`: the
/// isotropy group of `U(1)` at that point.
pub fn germ_symmetry(x: &[f64]) -> GermSymmetry {
    let t = x[1].hypot(x[2]);
    let group = if t <= T_ZERO_TOL {
        SymmetryGroup::U1
    } else {
        SymmetryGroup::Trivial
    };
    GermSymmetry {
        group,
        t_norm: t,
        near_degenerate: t > 0.0 && t <= T_WARNING_BAND,
    }
}

// ---------------------------------------------------------------------------
// su(2,1)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SU21Point {
    pub a: f64,
    pub b: f64,
    pub u: (f64, f64),
    /// Row-major `(re, im)` entries.
    pub matrix: [[(f64, f64); 3]; 3],
}

impl SU21Point {
    pub fn complex_matrix(&self) -> Matrix3<Complex<f64>> {
        Matrix3::from_fn(|i, j| Complex::new(self.matrix[i][j].0, self.matrix[i][j].1))
    }

    pub fn ek_coordinates(&self) -> [f64; 4] {
        su21_to_ek(&[self.a, self.b, self.u.0, self.u.1])
    }
}

/// The point of the transversal `X ⊂ 𝔰𝔲(2,1)` with coordinates `(a, b, u)`.
pub fn su21_embed(a: f64, b: f64, u: (f64, f64)) -> SU21Point {
    let i = Complex::new(0.0, 1.0);
    let uc = Complex::new(u.0, u.1);
    let one = Complex::new(1.0 - a, 0.0);
    let m = [
        [i * (a - b / 2.0), uc, one],
        [-uc.conj(), i * b, -i * uc.conj()],
        [one, i * uc, -i * (a + b / 2.0)],
    ];
    SU21Point {
        a,
        b,
        u,
        matrix: m.map(|row| row.map(|z| (z.re, z.im))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SU21Invariants {
    /// `tr(x²)`
    pub casimir: f64,
    /// `det x`, purely imaginary on the transversal.
    pub det: (f64, f64),
}

pub fn su21_invariants(pt: &SU21Point) -> SU21Invariants {
    let m = pt.complex_matrix();
    let c = (m * m).trace();
    let d = m.determinant();
    SU21Invariants {
        casimir: c.re,
        det: (d.re, d.im),
    }
}

/// Residuals of the invariant dictionary at one point:
/// `C + (32/3) I1` and `det + (32i/9) I2`.
pub fn su21_dictionary_residuals(pt: &SU21Point) -> (f64, f64) {
    let inv = su21_invariants(pt);
    let x = pt.ek_coordinates();
    let r1 = (inv.casimir + 32.0 / 3.0 * ek_i1(&x)).abs();
    let r2 = inv.det.0.hypot(inv.det.1 + 32.0 / 9.0 * ek_i2(&x));
    (r1, r2)
}

/// Poisson brackets of the coordinate functions `(a, b, u1, u2)` on the
/// transversal, as a skew 4×4 table.
pub fn su21_poisson(p: &[f64]) -> [[f64; 4]; 4] {
    let (a, b, u1, u2) = (p[0], p[1], p[2], p[3]);
    let q = (4.0 - 8.0 * a + 9.0 * b * b) / 16.0;
    let mut m = [[0.0; 4]; 4];
    let mut set = |i: usize, j: usize, v: f64| {
        m[i][j] = v;
        m[j][i] = -v;
    };
    set(2, 0, 0.75 * b * u2);
    set(2, 1, -u2);
    set(2, 3, q);
    set(3, 0, -0.75 * b * u1);
    set(3, 1, u1);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SU21Transport {
    /// Max over `du1, du2, db` of `|dΦ(X_f) − ρ(e)|`.
    pub anchor_residual: f64,
    /// Max over pairs of `|d{f,g} mod dC − [e_f, e_g]|`.
    pub bracket_residual: f64,
}

/// Compares the cotangent algebroid of the transversal (frame `du1, du2, db`
/// modulo `dC`) with the EK model at the image point, through the coordinate
/// change to `(K, X, Y, U)`. Derivatives are by finite differences.
pub fn su21_transport(
    ek: &CartanModel,
    p: &[f64],
    fd: &crate::fd::FiniteDiff,
) -> Result<SU21Transport> {
    // frame functions and their EK fiber vectors
    let frame: [(usize, [f64; 3]); 3] = [
        (2, [1.0, 0.0, 0.0]),
        (3, [0.0, 1.0, 0.0]),
        (1, [0.0, 0.0, 1.0]),
    ];
    let x = su21_to_ek(p);
    let pb = su21_poisson(p);

    let mut anchor_residual = 0.0_f64;
    for &(f, e) in &frame {
        let hamiltonian: Vec<f64> = (0..4).map(|j| pb[f][j]).collect();
        let pushed = fd.directional(|q: &[f64]| su21_to_ek(q).to_vec(), p, &hamiltonian)?;
        ek.check_domain(&x)?;
        let rho = ek.anchor_at(&x, &e);
        for (s, t) in pushed.iter().zip(&rho) {
            anchor_residual = anchor_residual.max((s - t).abs());
        }
    }

    let mut bracket_residual = 0.0_f64;
    for i in 0..3 {
        for j in i + 1..3 {
            let (f, ef) = frame[i];
            let (g, eg) = frame[j];
            let mut w = vec![0.0; 4];
            for (k, wk) in w.iter_mut().enumerate() {
                let dir: Vec<f64> = (0..4).map(|l| if l == k { 1.0 } else { 0.0 }).collect();
                *wk = fd.directional(|q: &[f64]| vec![su21_poisson(q)[f][g]], p, &dir)?[0];
            }
            // dC = −4 da − 3b db; drop the da component
            let b = p[1];
            let t = w[0] / -4.0;
            let reduced = [w[2], w[3], w[1] - t * (-3.0 * b)];
            let expected = ek.bracket_constant(&x, &ef, &eg)?;
            for (s, e) in reduced.iter().zip(&expected) {
                bracket_residual = bracket_residual.max((s - e).abs());
            }
        }
    }
    Ok(SU21Transport {
        anchor_residual,
        bracket_residual,
    })
}

/// `(c1, c2)` and `Δ` of the level set through `(a, b, 0, 0)`.
pub fn su21_level(a: f64, b: f64) -> (f64, f64, f64) {
    let x = su21_to_ek(&[a, b, 0.0, 0.0]);
    let prof = CubicProfile::new(ek_i1(&x), ek_i2(&x));
    (prof.c1, prof.c2, prof.delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum KernelClosedness {
    Closed,
    ClosedIffRational {
        ratio: f64,
        rationality: RationalityResult,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SU21Kernel {
    pub a: f64,
    pub b: f64,
    /// `μ² = 1 − 2a`
    pub mu_squared: f64,
    pub mu_abs: f64,
    pub closedness: KernelClosedness,
    pub is_closed: Option<bool>,
    pub delta: f64,
    /// `−(3/16)U²(1 − 2a)`, for comparison with `delta`.
    pub delta_displayed: f64,
    /// `closed ⇔ Δ ≤ 0`
    pub sign_agrees: bool,
}

/// Closedness of the one-parameter subgroup generated by `dC` at `(a, b, 0, 0)`.
pub fn su21_kernel_closed(a: f64, b: f64, policy: RationalityPolicy) -> SU21Kernel {
    let mu2 = 1.0 - 2.0 * a;
    let mu_abs = mu2.abs().sqrt();
    let (closedness, is_closed) = if mu2 >= 0.0 {
        (KernelClosedness::Closed, Some(true))
    } else {
        let ratio = b / mu_abs;
        let r = classify_ratio(ratio, policy);
        let closed = match r.verdict {
            Rationality::Rational { .. } => Some(true),
            Rationality::IrrationalUpTo { .. } => Some(false),
            Rationality::Undecided { .. } => None,
        };
        (
            KernelClosedness::ClosedIffRational {
                ratio,
                rationality: r,
            },
            closed,
        )
    };
    let (_, _, delta) = su21_level(a, b);
    let u = su21_to_ek(&[a, b, 0.0, 0.0])[3];
    let delta_displayed = -3.0 / 16.0 * u * u * mu2;
    // at U = 0 both sides vanish and the sign carries no information
    let degenerate = u.abs() <= 1e-12;
    let sign_agrees = degenerate || (mu2 >= 0.0) == (delta <= 0.0);
    SU21Kernel {
        a,
        b,
        mu_squared: mu2,
        mu_abs,
        closedness,
        is_closed,
        delta,
        delta_displayed,
        sign_agrees,
    }
}

// ---------------------------------------------------------------------------
// The table of solutions

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub conditions: Vec<String>,
    pub frame_bundle: Vec<String>,
    pub solutions: Vec<String>,
    /// Level set used to produce the row.
    pub representative: (f64, f64),
    pub leaves: Vec<LeafFamily>,
}

fn s(v: &str) -> String {
    v.to_string()
}

/// Rows of the table of simply connected extremal Kähler surfaces, each
/// derived by classifying a representative level set.
pub fn table1() -> Vec<ClassificationRow> {
    let policy = RationalityPolicy::default();
    let quarter = 0.25;
    let sixth = 1.0 / 6.0;
    let pick = |c1: f64, c2: f64, f: &dyn Fn(&LeafFamily) -> bool| -> Vec<LeafFamily> {
        classify(c1, c2, policy)
            .into_iter()
            .filter(|l| f(l))
            .collect()
    };
    let labels = |ls: &[LeafFamily]| -> (Vec<String>, Vec<String>) {
        let frames = ls
            .iter()
            .filter_map(|l| l.frame_bundle_label.clone())
            .collect();
        let mut sols: Vec<String> = ls.iter().filter_map(|l| l.solution_label.clone()).collect();
        sols.dedup();
        (frames, sols)
    };
    let point_row = |cond: &str, c1: f64, c2: f64| {
        let ls = pick(c1, c2, &|l| matches!(l.kind, LeafKind::PointLeaf { .. }));
        let (f, sl) = labels(&ls);
        ClassificationRow {
            conditions: vec![s(cond)],
            frame_bundle: f,
            solutions: sl,
            representative: (c1, c2),
            leaves: ls,
        }
    };
    let leaf_row = |cond: &str, c1: f64, c2: f64| {
        let ls = pick(c1, c2, &|l| l.is_two_dimensional());
        let (f, sl) = labels(&ls);
        ClassificationRow {
            conditions: vec![s(cond)],
            frame_bundle: f,
            solutions: sl,
            representative: (c1, c2),
            leaves: ls,
        }
    };
    let mut rows = vec![
        point_row("K=0", 0.0, 0.0),
        point_row("K=c>0", quarter, -sixth),
        point_row("K=c<0", quarter, sixth),
        leaf_row("Δ=0, c1=c2=0", 0.0, 0.0),
        leaf_row("Δ=0, c2<0", quarter, -sixth),
    ];
    // cylinder first, then the plane
    let mut r = leaf_row("Δ=0, c2>0", quarter, sixth);
    r.frame_bundle = r
        .frame_bundle
        .iter()
        .map(|f| {
            if f == "ℝ²×𝕊¹" {
                s("(ℝ²×𝕊¹)")
            } else {
                f.clone()
            }
        })
        .collect();
    rows.push(r);
    rows.push(leaf_row("Δ<0", 0.0, 1.0));
    // Δ > 0: a plane, and a sphere whose label depends on the period ratio
    let mut r = leaf_row("Δ>0", 1.0, 0.0);
    r.conditions.push(s("(if (4c1−r2²)/(r3²−4c1)=p/q)"));
    r.solutions = r
        .leaves
        .iter()
        .map(|l| match l.kind {
            LeafKind::Sphere if l.integrable.is_yes() => s("ℂℙ¹_{p,q}"),
            _ => l.solution_label.clone().unwrap_or_default(),
        })
        .collect();
    rows.push(r);
    rows
}

fn pad(v: &str, width: usize) -> String {
    let n = v.chars().count();
    format!("{v}{}", " ".repeat(width.saturating_sub(n)))
}

/// Aligned plain-text rendering; stable byte for byte.
pub fn render_table1(rows: &[ClassificationRow]) -> String {
    let header = ["Conditions", "U(1)-frame bundle", "Solutions"];
    let mut lines: Vec<[String; 3]> = Vec::new();
    for r in rows {
        let h = r
            .conditions
            .len()
            .max(r.frame_bundle.len())
            .max(r.solutions.len());
        for i in 0..h {
            let get = |v: &Vec<String>| v.get(i).cloned().unwrap_or_default();
            lines.push([get(&r.conditions), get(&r.frame_bundle), get(&r.solutions)]);
        }
    }
    let mut width = header.map(|h| h.chars().count());
    for l in &lines {
        for k in 0..3 {
            width[k] = width[k].max(l[k].chars().count());
        }
    }
    let row = |cells: [&str; 3]| {
        format!(
            "{} | {} | {}",
            pad(cells[0], width[0]),
            pad(cells[1], width[1]),
            cells[2]
        )
        .trim_end()
        .to_string()
    };
    let rule = format!(
        "{}-+-{}-+-{}",
        "-".repeat(width[0]),
        "-".repeat(width[1]),
        "-".repeat(width[2])
    );
    let mut out = String::new();
    out.push_str(&row(header));
    out.push('\n');
    out.push_str(&rule);
    out.push('\n');
    for r in rows {
        let h = r
            .conditions
            .len()
            .max(r.frame_bundle.len())
            .max(r.solutions.len());
        for i in 0..h {
            let get = |v: &Vec<String>| v.get(i).cloned().unwrap_or_default();
            out.push_str(&row([
                &get(&r.conditions),
                &get(&r.frame_bundle),
                &get(&r.solutions),
            ]));
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtlasEntry {
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
    pub leaves: Vec<LeafFamily>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atlas {
    pub grid: usize,
    pub c1_range: (f64, f64),
    pub c2_range: (f64, f64),
    pub entries: Vec<AtlasEntry>,
}

impl Atlas {
    /// Distinct labels of complete simply connected solutions.
    pub fn complete_solutions(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .entries
            .iter()
            .flat_map(|e| {
                e.leaves
                    .iter()
                    .filter_map(|l| l.complete_solution().map(str::to_string))
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn grid_values(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Classify every level set on an `n × n` grid.
pub fn sweep(
    n: usize,
    c1_range: (f64, f64),
    c2_range: (f64, f64),
    policy: RationalityPolicy,
) -> Atlas {
    let c1s = grid_values(c1_range.0, c1_range.1, n);
    let c2s = grid_values(c2_range.0, c2_range.1, n);
    let pairs: Vec<(f64, f64)> = c1s
        .iter()
        .flat_map(|&a| c2s.iter().map(move |&b| (a, b)))
        .collect();
    let entries = pairs
        .par_iter()
        .map(|&(c1, c2)| AtlasEntry {
            c1,
            c2,
            delta: CubicProfile::new(c1, c2).delta,
            leaves: classify(c1, c2, policy),
        })
        .collect();
    Atlas {
        grid: n,
        c1_range,
        c2_range,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{EndReason, Side};

    #[test]
    fn roots_of_known_cubics() {
        let p = CubicProfile::new(1.0, 0.0);
        let v: Vec<f64> = p.roots.iter().map(|r| r.value).collect();
        let r = 12f64.sqrt();
        assert!((v[0] + r).abs() < 1e-14 && v[1].abs() < 1e-14 && (v[2] - r).abs() < 1e-14);
        let p = CubicProfile::new(0.0, 0.0);
        assert_eq!(
            p.roots,
            vec![CubicRoot {
                value: 0.0,
                multiplicity: 3
            }]
        );
        let p = CubicProfile::new(1.0, 4.0 / 3.0);
        assert_eq!(p.roots.len(), 2);
        assert!((p.roots[0].value + 2.0).abs() < 1e-12 && p.roots[0].multiplicity == 2);
        assert!((p.roots[1].value - 4.0).abs() < 1e-12);
        let p = CubicProfile::new(-1.0, 0.5);
        assert_eq!(p.roots.len(), 1);
        assert!(p.p(p.roots[0].value).abs() < 1e-14);
    }

    #[test]
    fn ratio_at_zero_c2_is_one_half() {
        for c1 in [0.3, 1.0, 7.0] {
            assert!((CubicProfile::new(c1, 0.0).sphere_ratio().unwrap() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn bisection_hits_the_requested_ratio() {
        for target in [0.2, 0.5, 2.0 / 3.0, 0.9] {
            let c2 = solve_c2_for_ratio(1.3, target).unwrap();
            let r = CubicProfile::new(1.3, c2).sphere_ratio().unwrap();
            assert!((r - target).abs() < 1e-14, "{target}: {r}");
        }
        assert!(solve_c2_for_ratio(-1.0, 0.5).is_err());
        assert!(solve_c2_for_ratio(1.0, 1.5).is_err());
    }

    #[test]
    fn level_set_with_triple_root() {
        let ls = classify(0.0, 0.0, RationalityPolicy::default());
        assert_eq!(ls.len(), 2);
        assert!(matches!(ls[0].kind, LeafKind::PointLeaf { k } if k == 0.0));
        let cyl = &ls[1];
        assert_eq!(cyl.kind, LeafKind::Cylinder);
        assert_eq!((cyl.pi1.as_str(), cyl.pi2.as_str()), ("ℤ", "1"));
        assert!(cyl.integrable.is_yes());
        assert!(!cyl.complete.is_complete());
        assert_eq!(cyl.solution_label.as_deref(), Some("ℝ²"));
        assert_eq!(cyl.frame_bundle_label.as_deref(), Some("(ℝ²×ℝ)/ℤ"));
    }

    #[test]
    fn negative_discriminant_gives_one_plane() {
        let ls = classify(0.0, 1.0, RationalityPolicy::default());
        assert_eq!(ls.len(), 1);
        assert_eq!(ls[0].kind, LeafKind::Plane);
        assert_eq!(
            ls[0].complete,
            Completeness::Incomplete {
                reason: EndReason::UnboundedEndFiniteLength,
                side: Side::Lo
            }
        );
        assert_eq!(ls[0].frame_bundle_label.as_deref(), Some("ℝ²×𝕊¹"));
    }

    #[test]
    fn positive_discriminant_gives_plane_and_sphere() {
        let ls = classify(1.0, 0.0, RationalityPolicy::default());
        let kinds: Vec<LeafKind> = ls.iter().map(|l| l.kind).collect();
        assert_eq!(kinds, vec![LeafKind::Plane, LeafKind::Sphere]);
        let sphere = &ls[1];
        assert!(sphere.complete.is_complete());
        assert_eq!(sphere.solution_label.as_deref(), Some("ℂℙ¹_{1,2}"));
        assert_eq!(sphere.complete_solution(), Some("ℂℙ¹_{1,2}"));
    }

    #[test]
    fn double_root_branch_with_positive_c2() {
        let ls = classify(0.25, 1.0 / 6.0, RationalityPolicy::default());
        let kinds: Vec<LeafKind> = ls.iter().map(|l| l.kind).collect();
        assert_eq!(
            kinds,
            vec![
                LeafKind::PointLeaf { k: -1.0 },
                LeafKind::Cylinder,
                LeafKind::Plane
            ]
        );
        // the double-root end has infinite radial length
        assert!(ls[2].complete.is_complete());
        assert!(!ls[1].complete.is_complete());
    }

    #[test]
    fn strip_partials_match_finite_differences() {
        let prof = CubicProfile::new(1.1, 0.3);
        let (sphere, cap) = sphere_strips(&prof).unwrap();
        let fd = crate::fd::FiniteDiff::new(1e-4);
        for strip in [sphere, cap] {
            for &(s, t) in &[(0.1, 0.3), (0.7, 0.9), (0.4, 0.02)] {
                let (ds, dt) = strip.partials(s, t);
                let ns = fd.derivative_1d(|u| strip.point(u, t), s).unwrap();
                let nt = fd.derivative_1d(|u| strip.point(s, u), t).unwrap();
                for i in 0..4 {
                    assert!(
                        (ds[i] - ns[i]).abs() < 1e-8 && (dt[i] - nt[i]).abs() < 1e-8,
                        "{strip:?} {s} {t}"
                    );
                }
                let x = strip.point(s, t);
                assert!((ek_i1(&x) - 1.1).abs() < 1e-12 && (ek_i2(&x) - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn germ_symmetry_band() {
        assert_eq!(
            germ_symmetry(&[1.0, 0.0, 0.0, 3.0]).group,
            SymmetryGroup::U1
        );
        assert!(!germ_symmetry(&[1.0, 0.0, 0.0, 3.0]).near_degenerate);
        assert_eq!(
            germ_symmetry(&[1.0, 1.0, 0.0, 3.0]).group,
            SymmetryGroup::Trivial
        );
        let g = germ_symmetry(&[1.0, T_ZERO_TOL / 2.0, 0.0, 3.0]);
        assert!(g.group == SymmetryGroup::U1 && g.near_degenerate);
        let g = germ_symmetry(&[1.0, 1e-8, 0.0, 3.0]);
        assert!(g.group == SymmetryGroup::Trivial && g.near_degenerate);
    }

    fn det3(m: &Matrix3<Complex<f64>>) -> Complex<f64> {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    #[test]
    fn su21_base_point_invariants() {
        let pt = su21_embed(0.0, 0.0, (0.0, 0.0));
        let inv = su21_invariants(&pt);
        assert!((inv.casimir - 2.0).abs() < 1e-15);
        let d = det3(&pt.complex_matrix());
        assert!((d.re - inv.det.0).abs() < 1e-15 && (d.im - inv.det.1).abs() < 1e-15);
        // −(i/4)(4b − 8ab + b³ + 8|u|²) vanishes at the origin
        assert!(inv.det.0.abs() < 1e-15 && inv.det.1.abs() < 1e-15);
        assert!(pt.complex_matrix().trace().norm() < 1e-15);
    }

    #[test]
    fn su21_transport_matches_ek_algebroid() {
        let ek = crate::model::builtin_model("extremal_kahler", &Default::default()).unwrap();
        let fd = crate::fd::FiniteDiff::new(1e-4);
        for p in [
            [0.1, 0.3, 0.2, -0.4],
            [0.9, -0.7, 1.3, 0.5],
            [-1.2, 0.05, 0.0, 2.0],
        ] {
            let t = su21_transport(&ek, &p, &fd).unwrap();
            assert!(t.anchor_residual < 1e-9, "{t:?}");
            assert!(t.bracket_residual < 1e-9, "{t:?}");
        }
    }

    #[test]
    fn su21_transport_sees_broken_curvature() {
        let ek = crate::model::builtin_model("extremal_kahler", &Default::default())
            .unwrap()
            .with_curvature_scale(1.1);
        let fd = crate::fd::FiniteDiff::new(1e-4);
        let t = su21_transport(&ek, &[0.1, 0.3, 0.2, -0.4], &fd).unwrap();
        assert!(t.bracket_residual > 1e-3);
    }

    #[test]
    fn su21_closed_forms() {
        let (a, b, u) = (0.3, -0.7, (0.4, 1.1));
        let pt = su21_embed(a, b, u);
        let inv = su21_invariants(&pt);
        assert!((inv.casimir - (2.0 - 4.0 * a - 1.5 * b * b)).abs() < 1e-13);
        let uu = u.0 * u.0 + u.1 * u.1;
        let expect = -(4.0 * b - 8.0 * a * b + b.powi(3) + 8.0 * uu) / 4.0;
        assert!(inv.det.0.abs() < 1e-13 && (inv.det.1 - expect).abs() < 1e-13);
        let (r1, r2) = su21_dictionary_residuals(&pt);
        assert!(r1 < 1e-12 && r2 < 1e-12);
    }

    #[test]
    fn kernel_closedness() {
        let k = su21_kernel_closed(0.0, 0.4, RationalityPolicy::default());
        assert_eq!(k.closedness, KernelClosedness::Closed);
        assert!(k.sign_agrees);
        let b = 2.0 / 3.0;
        let k = su21_kernel_closed(1.0, b, RationalityPolicy::default());
        match &k.closedness {
            KernelClosedness::ClosedIffRational { rationality, .. } => {
                assert_eq!(rationality.fraction(), Some((2, 3)))
            }
            other => panic!("{other:?}"),
        }
        assert!(k.sign_agrees && k.delta.abs() < 1e-15);
        let k = su21_kernel_closed(1.0, 0.5, RationalityPolicy::default());
        assert!(k.sign_agrees && k.delta > 0.0);
    }

    #[test]
    fn table_has_eight_condition_rows() {
        let rows = table1();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[1].frame_bundle, vec!["𝕊³"]);
        assert_eq!(rows[1].solutions, vec!["𝕊²"]);
        assert_eq!(rows[4].frame_bundle, vec!["ℝ²×𝕊¹"]);
        assert_eq!(rows[5].frame_bundle, vec!["(ℝ²×ℝ)/ℤ", "(ℝ²×𝕊¹)"]);
        assert_eq!(rows[7].solutions, vec!["ℝ²", "ℂℙ¹_{p,q}"]);
    }
}

#[cfg(test)]
mod period_tests {
    use super::*;
    use crate::model::{builtin_model, ModelParams};
    use crate::monodromy::{patch_curvature, period};

    fn model() -> CartanModel {
        builtin_model("extremal_kahler", &ModelParams::default()).unwrap()
    }

    #[test]
    fn patch_curvature_matches_closed_form() {
        let m = model();
        let split = Splitting::metric_type(&m).unwrap();
        let prof = CubicProfile::new(1.1, 0.3);
        let (sphere, _) = sphere_strips(&prof).unwrap();
        let patch = sphere.patch("sphere", BoundaryClass::ContractibleSphereCycle);
        let fd = ek_period_options().fd;
        for &(s, t) in &[(0.2, 0.3), (0.6, 0.5), (0.9, 0.8)] {
            let om = patch_curvature(&m, &split, &patch, s, t, &fd).unwrap();
            let x = sphere.point(s, t);
            let (_, dt) = sphere.partials(s, t);
            // Ω(∂s, ∂t) = −2π K'(t) Ω(∂K, ∂θ)
            let c = -2.0 * PI * dt[0] * omega_closed_form(&prof, x[0]);
            let expect: Vec<f64> = s0(&x).iter().map(|v| c * v).collect();
            let err = crate::linalg::max_abs(&crate::linalg::sub(&om, &expect));
            assert!(
                err < 1e-6 * crate::linalg::max_abs(&expect),
                "{om:?} {expect:?}"
            );
        }
    }

    #[test]
    fn sphere_and_cap_periods() {
        let m = model();
        let split = Splitting::metric_type(&m).unwrap();
        let prof = CubicProfile::new(1.1, 0.3);
        let (sphere, cap) = sphere_strips(&prof).unwrap();
        let (n1, n2) = prof.sphere_generators().unwrap();
        let flat = s0_frame();
        let opts = ek_period_options();
        let t = std::time::Instant::now();
        let p = period(
            &m,
            &split,
            &sphere.patch("sphere", BoundaryClass::ContractibleSphereCycle),
            &flat,
            &opts,
        )
        .unwrap();
        eprintln!(
            "sphere {:?} vs {} in {:?} ({} cells)",
            p.coefficients,
            n1 + n2,
            t.elapsed(),
            p.cells
        );
        assert!((p.coefficients[0] - (n1 + n2)).abs() < 1e-6 * (n1 + n2));
        let p = period(
            &m,
            &split,
            &cap.patch("cap", BoundaryClass::GOrbitBoundary),
            &flat,
            &opts,
        )
        .unwrap();
        let r3 = prof.roots[2].value;
        let closed = 2.0 * PI / (r3 * r3 / 4.0 - 1.1);
        eprintln!("cap {:?} vs {closed}", p.coefficients);
        assert!((p.coefficients[0] - closed).abs() < 1e-6 * closed);
    }
}

#[cfg(test)]
mod metric_tests {
    use super::*;
    use crate::metric::{complete_solution_report, leaf_metric};
    use crate::model::{builtin_model, ModelParams};

    #[test]
    fn leaf_metric_in_k_theta_chart() {
        let m = builtin_model("extremal_kahler", &ModelParams::default()).unwrap();
        let split = Splitting::metric_type(&m).unwrap();
        let prof = CubicProfile::new(0.7, -0.2);
        let (lo, hi) = prof.sphere_roots().unwrap();
        for &(k, th) in &[(lo + 0.3, 0.4_f64), (0.5 * (lo + hi), 2.0), (hi - 0.2, 5.0)] {
            let r = prof.p(k).sqrt();
            let x = [k, r * th.cos(), r * th.sin(), prof.u(k)];
            let dr = prof.dp(k) / (2.0 * r);
            let dk = [1.0, dr * th.cos(), dr * th.sin(), k / 2.0];
            let dth = [0.0, -r * th.sin(), r * th.cos(), 0.0];
            let (gkk, gtt) = leaf_metric_closed_form(&prof, k);
            let a = leaf_metric(&m, &split, &x, &dk, &dk).unwrap();
            let b = leaf_metric(&m, &split, &x, &dth, &dth).unwrap();
            let c = leaf_metric(&m, &split, &x, &dk, &dth).unwrap();
            assert!(
                (a - gkk).abs() < 1e-10 * gkk && (b - gtt).abs() < 1e-10 * gtt,
                "{a} {gkk} {b} {gtt}"
            );
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn complete_solution_labels() {
        let m = builtin_model("extremal_kahler", &ModelParams::default()).unwrap();
        let leaves = classify(1.0, 0.0, RationalityPolicy::default());
        let sphere = complete_solution_report(&m, &leaves[1], None).unwrap();
        assert!(
            sphere.complete && sphere.simply_connected_solution.as_deref() == Some("ℂℙ¹_{1,2}")
        );
        assert!(sphere.source_fiber.is_some());
        let plane = complete_solution_report(&m, &leaves[0], None).unwrap();
        assert!(!plane.complete && plane.simply_connected_solution.is_none());
        for (c1, c2, label) in [
            (0.0, 0.0, "ℝ²"),
            (0.25, -1.0 / 6.0, "𝕊²"),
            (0.25, 1.0 / 6.0, "ℍ²"),
        ] {
            let pt = classify(c1, c2, RationalityPolicy::default()).remove(0);
            let r = complete_solution_report(&m, &pt, None).unwrap();
            assert_eq!(r.simply_connected_solution.as_deref(), Some(label));
        }
    }
}
