//! Rationality verdicts for floating point ratios.
//!
//! A float `x` is declared rational `p/q` when the fraction with the smallest
//! denominator inside `[x − tol, x + tol]` has `q ≤ Q`. That fraction is found
//! exactly with the continued-fraction recursion for the simplest rational in
//! an interval, run on exact big rationals built from the float endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalityPolicy {
    pub denominator_bound: u64,
    pub tolerance: f64,
}

impl Default for RationalityPolicy {
    fn default() -> Self {
        RationalityPolicy {
            denominator_bound: 1_000_000,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Rationality {
    Rational {
        p: i64,
        q: u64,
        residual: f64,
    },
    IrrationalUpTo {
        denominator_bound: u64,
        tolerance: f64,
    },
    Undecided {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityResult {
    pub value: f64,
    pub error_estimate: f64,
    /// The policy actually applied; tighter than requested when the value
    /// carries a numerical error estimate.
    pub effective: RationalityPolicy,
    #[serde(flatten)]
    pub verdict: Rationality,
}

impl RationalityResult {
    pub fn is_rational(&self) -> bool {
        matches!(self.verdict, Rationality::Rational { .. })
    }

    pub fn is_irrational(&self) -> bool {
        matches!(self.verdict, Rationality::IrrationalUpTo { .. })
    }

    pub fn fraction(&self) -> Option<(i64, u64)> {
        match self.verdict {
            Rationality::Rational { p, q, .. } => Some((p, q)),
            _ => None,
        }
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// The fraction with the smallest denominator in the closed interval
/// `[lo, hi]` (smallest numerator magnitude among those). Requires `lo ≤ hi`.
pub fn simplest_in(lo: &BigRational, hi: &BigRational) -> BigRational {
    assert!(lo <= hi, "empty interval");
    if !lo.is_positive() && !hi.is_negative() {
        return BigRational::zero();
    }
    if hi.is_negative() {
        return -simplest_in(&-hi, &-lo);
    }
    // 0 < lo ≤ hi: walk the continued fraction, collecting partial quotients
    let mut quotients: Vec<BigInt> = Vec::new();
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    let last = loop {
        let c = lo.ceil();
        if c <= hi {
            break c;
        }
        let n = lo.floor();
        let new_lo = (&hi - &n).recip();
        let new_hi = (&lo - &n).recip();
        quotients.push(n.to_integer());
        lo = new_lo;
        hi = new_hi;
    };
    let mut acc = last;
    for a in quotients.into_iter().rev() {
        acc = BigRational::from_integer(a) + acc.recip();
    }
    acc
}

/// Smallest-denominator fraction within `tol` of `x`.
pub fn simplest_near(x: f64, tol: f64) -> (BigInt, BigInt) {
    let r = simplest_in(&exact(x - tol), &exact(x + tol));
    (r.numer().clone(), r.denom().clone())
}

/// Largest denominator that can be resolved when the value is only known to
/// within `tol`: fractions with `q ≤ Q` are spaced at least `1/Q² ≥ 4 tol`.
pub fn resolvable_bound(tol: f64) -> u64 {
    (0.5 / tol.sqrt()).floor() as u64
}

/// Rationality verdict for an exactly known float.
pub fn classify_ratio(x: f64, policy: RationalityPolicy) -> RationalityResult {
    classify_ratio_with_error(x, 0.0, policy)
}

/// Rationality verdict for a value known to within `error_estimate`. The
/// tolerance is widened to cover four times the error, and the denominator
/// bound shrinks so that at most one candidate fits the widened window.
pub fn classify_ratio_with_error(
    x: f64,
    error_estimate: f64,
    policy: RationalityPolicy,
) -> RationalityResult {
    let mut effective = policy;
    let undecided = |reason: String, effective| RationalityResult {
        value: x,
        error_estimate,
        effective,
        verdict: Rationality::Undecided { reason },
    };
    if !x.is_finite() || !error_estimate.is_finite() {
        return undecided("value or error estimate is not finite".into(), effective);
    }
    if !(policy.tolerance > 0.0) || policy.denominator_bound == 0 {
        return undecided(
            "policy needs positive tolerance and denominator bound".into(),
            effective,
        );
    }
    if 4.0 * error_estimate > policy.tolerance {
        effective.tolerance = 4.0 * error_estimate;
        effective.denominator_bound = policy
            .denominator_bound
            .min(resolvable_bound(effective.tolerance));
        if effective.denominator_bound < 2 {
            return undecided(
                format!("error estimate {error_estimate:.2e} too large to resolve any fraction"),
                effective,
            );
        }
    }
    let (p, q) = simplest_near(x, effective.tolerance);
    let verdict = match (q.to_u64(), p.to_i64()) {
        (Some(qq), Some(pp)) if qq <= effective.denominator_bound => {
            let residual = (x - pp as f64 / qq as f64).abs();
            Rationality::Rational {
                p: pp,
                q: qq,
                residual,
            }
        }
        _ => Rationality::IrrationalUpTo {
            denominator_bound: effective.denominator_bound,
            tolerance: effective.tolerance,
        },
    };
    RationalityResult {
        value: x,
        error_estimate,
        effective,
        verdict,
    }
}

/// Convergents `p_k/q_k` of the continued fraction of `x` up to denominator
/// `max_q`, computed in floating point. Used for reporting.
pub fn convergents(x: f64, max_q: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0_i128, 1_i128, 1_i128, 0_i128);
    let mut r = exact(x);
    for _ in 0..64 {
        let a = r.floor();
        let ai = a.to_integer().to_i128().unwrap_or(i128::MAX / 4);
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_q as i128 || p2.abs() > i64::MAX as i128 {
            break;
        }
        out.push((p2 as i64, q2 as u64));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = &r - &a;
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    out
}

impl std::fmt::Display for RationalityResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.verdict {
            Rationality::Rational { p, q, residual } => {
                write!(f, "rational {p}/{q} (residual {residual:.1e})")
            }
            Rationality::IrrationalUpTo {
                denominator_bound,
                tolerance,
            } => {
                write!(
                    f,
                    "irrational up to q <= {denominator_bound}, tol {tolerance:.1e}"
                )
            }
            Rationality::Undecided { reason } => write!(f, "undecided: {reason}"),
        }
    }
}
