//! Leaf metrics induced by a metric splitting, and completeness of leaves
//! whose metric is governed by a polynomial profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CartanModel;
use crate::monodromy::Splitting;
use crate::quadrature::{integrate_1d, QuadOptions};

fn ensure_metric_type(model: &CartanModel, x: &[f64]) -> Result<()> {
    if !model.group.is_orthogonal() {
        return Err(Error::Type(format!(
            "{} has a structure algebra outside so(n)",
            model.name
        )));
    }
    let n = model.n();
    for i in 0..n {
        for j in i + 1..n {
            let c = model
                .maps
                .torsion(x, &crate::linalg::unit(n, i), &crate::linalg::unit(n, j));
            if crate::linalg::max_abs(&c) > 1e-12 {
                return Err(Error::Type(format!("{} has non-zero torsion", model.name)));
            }
        }
    }
    Ok(())
}

/// `K̃_L(v, w) = K̃_A(σ v, σ w)` for leaf-tangent `v`, `w` at `x`.
pub fn leaf_metric(
    model: &CartanModel,
    split: &Splitting,
    x: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    model.check_domain(x)?;
    ensure_metric_type(model, x)?;
    let sv = split.sigma(model, x, v)?;
    let sw = split.sigma(model, x, w)?;
    Ok(split.inner(&sv, &sw))
}

/// A leaf metric of the form `dK²/(4p(K)) + (…) dθ²` on `K ∈ I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// Coefficients in ascending degree.
    Polynomial { coeffs: Vec<f64> },
    /// Anything else; completeness is not decided for it.
    Opaque { name: String },
}

impl Profile {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * k + c),
            Profile::Opaque { .. } => f64::NAN,
        }
    }

    fn degree(&self) -> Option<usize> {
        match self {
            Profile::Polynomial { coeffs } => coeffs.iter().rposition(|c| *c != 0.0),
            Profile::Opaque { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Endpoint {
    NegInfinity,
    PosInfinity,
    /// A root of the profile. Simple roots that belong to the interval are
    /// poles of the `(K, θ)` chart, i.e. interior points of the leaf.
    Root {
        value: f64,
        multiplicity: u8,
        included: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub profile: Profile,
    pub lo: Endpoint,
    pub hi: Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lo,
    Hi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    /// `∫ dK/√p` converges at an infinite end when `deg p > 2`.
    UnboundedEndFiniteLength,
    /// A simple root left out of the interval is reached in finite time.
    SimpleRootFiniteLength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    Incomplete { reason: EndReason, side: Side },
}

impl Completeness {
    pub fn is_complete(&self) -> bool {
        matches!(self, Completeness::Complete)
    }
}

/// Whether the radial length `∫ dK/(2√p)` towards this end is finite.
fn end_has_finite_length(profile: &Profile, end: Endpoint) -> Result<bool> {
    let deg = profile
        .degree()
        .ok_or_else(|| Error::Unsupported("completeness needs a polynomial profile".into()))?;
    Ok(match end {
        Endpoint::NegInfinity | Endpoint::PosInfinity => deg > 2,
        Endpoint::Root { multiplicity, .. } => multiplicity < 2,
    })
}

/// Complete iff every end either has infinite length or is a simple root
/// included in the interval (a smooth pole).
pub fn completeness_verdict(curve: &ProfileCurve) -> Result<Completeness> {
    if curve.profile.degree().is_none_or(|d| d == 0) {
        return Err(Error::Unsupported(
            "completeness needs a non-constant polynomial profile".into(),
        ));
    }
    for (side, end) in [(Side::Lo, curve.lo), (Side::Hi, curve.hi)] {
        if !end_has_finite_length(&curve.profile, end)? {
            continue;
        }
        match end {
            Endpoint::Root { included: true, .. } => {}
            Endpoint::Root { .. } => {
                return Ok(Completeness::Incomplete {
                    reason: EndReason::SimpleRootFiniteLength,
                    side,
                })
            }
            _ => {
                return Ok(Completeness::Incomplete {
                    reason: EndReason::UnboundedEndFiniteLength,
                    side,
                })
            }
        }
    }
    Ok(Completeness::Complete)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndProbe {
    pub side: Side,
    /// Radial length over two consecutive factor-100 ranges towards the end.
    pub near: f64,
    pub nearer: f64,
    pub divergent: bool,
    pub analytic_finite: bool,
}

impl EndProbe {
    pub fn agrees(&self) -> bool {
        self.divergent != self.analytic_finite
    }
}

/// Numerical cross-check of [`completeness_verdict`]: the radial length is
/// integrated over the ranges `[10⁻², 1]·w` and `[10⁻⁴, 10⁻²]·w` of the
/// distance to a root end (or `[1, 10²]·R`, `[10², 10⁴]·R` towards an
/// infinite end). A length that keeps growing by at least half is divergent.
/// Closer to a multiple root the profile drowns in rounding.
pub fn length_probe(curve: &ProfileCurve) -> Result<Vec<EndProbe>> {
    let p = &curve.profile;
    let value = |e: Endpoint| match e {
        Endpoint::Root { value, .. } => Some(value),
        _ => None,
    };
    let quad = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-8,
        max_cells: 4000,
    };
    let mut out = Vec::new();
    for (side, end, other) in [
        (Side::Lo, curve.lo, curve.hi),
        (Side::Hi, curve.hi, curve.lo),
    ] {
        let analytic_finite = end_has_finite_length(p, end)?;
        let seg = |a: f64, b: f64, point: &dyn Fn(f64) -> f64| -> Result<f64> {
            // logarithmic variable: K = point(e^v)
            let f = |v: f64| {
                let d = v.exp();
                d / (2.0 * p.eval(point(d)).abs().sqrt())
            };
            Ok(integrate_1d(f, a.ln(), b.ln(), &quad)?.value[0])
        };
        let (near, nearer) = match end {
            Endpoint::Root { value: r, .. } => {
                let dir = if side == Side::Lo { 1.0 } else { -1.0 };
                let w = value(other).map_or(1.0, |o| ((o - r).abs() / 2.0).min(1.0));
                let point = move |d: f64| r + dir * d;
                (seg(1e-2 * w, w, &point)?, seg(1e-4 * w, 1e-2 * w, &point)?)
            }
            Endpoint::NegInfinity | Endpoint::PosInfinity => {
                let dir = if matches!(end, Endpoint::NegInfinity) {
                    -1.0
                } else {
                    1.0
                };
                let r0 = value(other).map_or(1.0, |o| o.abs() + 1.0);
                let point = move |d: f64| dir * d;
                (seg(r0, 1e2 * r0, &point)?, seg(1e2 * r0, 1e4 * r0, &point)?)
            }
        };
        out.push(EndProbe {
            side,
            near,
            nearer,
            divergent: nearer >= 0.5 * near,
            analytic_finite,
        });
    }
    Ok(out)
}

/// Whether a leaf carries a complete simply connected solution, and why.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompleteSolutionReport {
    pub model: String,
    pub c1: f64,
    pub c2: f64,
    pub leaf_kind: crate::ek::LeafKind,
    pub k_interval: (Endpoint, Endpoint),
    pub metric_completeness: Completeness,
    pub g_integrable: crate::monodromy::Verdict,
    /// Where the integrability verdict came from.
    pub integrability_source: String,
    pub complete: bool,
    pub simply_connected_solution: Option<String>,
    /// For complete solutions: the source fiber of the `G`-integration.
    pub source_fiber: Option<String>,
    pub justification: Vec<String>,
}

/// A solution over the leaf is complete iff the leaf metric is complete and
/// the restricted algebroid is `G`-integrable; the complete simply connected
/// solution is then the quotient of a source fiber by `G`.
pub fn complete_solution_report(
    model: &CartanModel,
    leaf: &crate::ek::LeafFamily,
    monodromy: Option<&crate::monodromy::MonodromyReport>,
) -> Result<CompleteSolutionReport> {
    use crate::monodromy::Verdict;
    if !model.group.is_orthogonal() {
        return Err(Error::Type(format!("{} is not of metric type", model.name)));
    }
    let mut why = Vec::new();
    match &leaf.complete {
        Completeness::Complete => why.push(format!(
            "leaf metric complete on {}",
            interval_text(leaf.k_interval)
        )),
        Completeness::Incomplete { reason, side } => why.push(format!(
            "leaf metric incomplete: {} at the {} end of {}",
            match reason {
                EndReason::UnboundedEndFiniteLength => "unbounded end reached in finite length",
                EndReason::SimpleRootFiniteLength =>
                    "excluded simple root reached in finite length",
            },
            match side {
                Side::Lo => "lower",
                Side::Hi => "upper",
            },
            interval_text(leaf.k_interval)
        )),
    }
    let (g_integrable, source) = match monodromy {
        Some(m) if leaf.is_two_dimensional() && leaf.kind == crate::ek::LeafKind::Sphere => {
            (m.g_integrable.clone(), "G-monodromy periods".to_string())
        }
        _ => (
            leaf.integrable.clone(),
            "closed-form classification".to_string(),
        ),
    };
    match &g_integrable {
        Verdict::Yes => why.push(format!("G-integrable ({source})")),
        Verdict::No { reason } => why.push(format!("not G-integrable ({source}): {reason}")),
        Verdict::Undecided { reason } => {
            why.push(format!("G-integrability undecided ({source}): {reason}"))
        }
    }
    let complete = leaf.complete.is_complete() && g_integrable.is_yes();
    let label = if complete {
        leaf.solution_label.clone()
    } else {
        None
    };
    let source_fiber = complete.then(|| {
        format!(
            "source fiber {} of the G-integration over the leaf, quotient by G",
            leaf.frame_bundle_label.as_deref().unwrap_or("?")
        )
    });
    if let Some(l) = &label {
        why.push(format!("complete simply connected solution {l}"));
    }
    Ok(CompleteSolutionReport {
        model: model.name.clone(),
        c1: leaf.c1,
        c2: leaf.c2,
        leaf_kind: leaf.kind,
        k_interval: leaf.k_interval,
        metric_completeness: leaf.complete.clone(),
        g_integrable,
        integrability_source: source,
        complete,
        simply_connected_solution: label,
        source_fiber,
        justification: why,
    })
}

fn endpoint_text(e: Endpoint) -> String {
    match e {
        Endpoint::NegInfinity => "-inf".into(),
        Endpoint::PosInfinity => "+inf".into(),
        Endpoint::Root {
            value,
            multiplicity,
            included,
        } => {
            format!(
                "{value:.6}{}{}",
                if multiplicity > 1 {
                    format!(" (x{multiplicity})")
                } else {
                    String::new()
                },
                if included { "" } else { " excluded" }
            )
        }
    }
}

pub fn interval_text((lo, hi): (Endpoint, Endpoint)) -> String {
    format!("K in [{}, {}]", endpoint_text(lo), endpoint_text(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(c1: f64, c2: f64) -> Profile {
        Profile::Polynomial {
            coeffs: vec![c2, c1, 0.0, -1.0 / 12.0],
        }
    }

    #[test]
    fn compact_interval_between_simple_roots_is_complete() {
        // c1 = 1, c2 = 0: roots −√12, 0, √12
        let r = 12f64.sqrt();
        let curve = ProfileCurve {
            profile: cubic(1.0, 0.0),
            lo: Endpoint::Root {
                value: 0.0,
                multiplicity: 1,
                included: true,
            },
            hi: Endpoint::Root {
                value: r,
                multiplicity: 1,
                included: true,
            },
        };
        assert!(completeness_verdict(&curve).unwrap().is_complete());
        assert!(length_probe(&curve).unwrap().iter().all(|e| e.agrees()));
    }

    #[test]
    fn unbounded_end_is_incomplete() {
        let curve = ProfileCurve {
            profile: cubic(0.0, 1.0),
            lo: Endpoint::NegInfinity,
            hi: Endpoint::Root {
                value: 12f64.cbrt(),
                multiplicity: 1,
                included: true,
            },
        };
        assert_eq!(
            completeness_verdict(&curve).unwrap(),
            Completeness::Incomplete {
                reason: EndReason::UnboundedEndFiniteLength,
                side: Side::Lo
            }
        );
        let probes = length_probe(&curve).unwrap();
        assert!(probes.iter().all(|e| e.agrees()), "{probes:?}");
    }

    #[test]
    fn double_root_end_has_infinite_length() {
        // c1 = 1, c2 = 4/3: double root at −2, simple root at 4
        let curve = ProfileCurve {
            profile: cubic(1.0, 4.0 / 3.0),
            lo: Endpoint::Root {
                value: -2.0,
                multiplicity: 2,
                included: false,
            },
            hi: Endpoint::Root {
                value: 4.0,
                multiplicity: 1,
                included: true,
            },
        };
        assert!(completeness_verdict(&curve).unwrap().is_complete());
        let probes = length_probe(&curve).unwrap();
        assert!(
            probes[0].divergent && probes.iter().all(|e| e.agrees()),
            "{probes:?}"
        );
    }

    #[test]
    fn excluded_simple_root_is_reached() {
        let curve = ProfileCurve {
            profile: Profile::Polynomial {
                coeffs: vec![0.0, 1.0],
            },
            lo: Endpoint::Root {
                value: 0.0,
                multiplicity: 1,
                included: false,
            },
            hi: Endpoint::PosInfinity,
        };
        assert_eq!(
            completeness_verdict(&curve).unwrap(),
            Completeness::Incomplete {
                reason: EndReason::SimpleRootFiniteLength,
                side: Side::Lo
            }
        );
    }

    #[test]
    fn opaque_profile_is_unsupported() {
        let curve = ProfileCurve {
            profile: Profile::Opaque { name: "exp".into() },
            lo: Endpoint::NegInfinity,
            hi: Endpoint::PosInfinity,
        };
        assert!(matches!(
            completeness_verdict(&curve),
            Err(Error::Unsupported(_))
        ));
    }
}
