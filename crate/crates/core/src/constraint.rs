//! Fixed-axis update policies.
//!
//! Every policy answers one question: given a point's original fixed-axis
//! value, its current value, and the displacement the base optimizer
//! proposes along that axis, where does the point end up?
//!
//! * `Vanilla` applies the proposal unchanged.
//! * `Strict` never moves the axis.
//! * `NormalRange(a)` applies the proposal only if the cumulative drift from
//!   the origin stays within `[-a, a]`; otherwise the axis is left alone.
//! * `GaussianRange(a, ci)` scales the proposal by `exp(-x² / 2σ²)`, where
//!   `x` is the drift from the origin and `σ = a / z` with `z` the two-sided
//!   normal quantile of `ci`. Points slow down smoothly as they drift and may
//!   slightly overshoot `a`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Quantile function of the standard normal distribution.
///
/// Acklam's rational approximation (relative error about 1e-9) followed by a
/// single Halley step against an erfc-based CDF. The lower tail is always
/// solved and mirrored so that `p` close to 1 keeps full precision.
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let (q, flip) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
    let mut x = acklam(q);
    let e = normal_cdf(x) - q;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x -= u / (1.0 + 0.5 * x * u);
    Ok(if flip { -x } else { x })
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Width of the Gaussian attenuation curve, derived from a half-range and confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub half_range: f64,
    /// Positive two-sided quantile `Φ⁻¹((1 + ci) / 2)`.
    pub z: f64,
    /// `half_range / z`.
    pub sigma: f64,
}

pub fn gaussian_params(half_range: f64, ci: f64) -> Result<GaussianParams> {
    if !(half_range > 0.0 && half_range.is_finite()) {
        return Err(Error::InvalidPolicy(format!(
            "half-range must be positive, got {half_range}"
        )));
    }
    if !(ci > 0.0 && ci < 1.0) {
        return Err(Error::InvalidPolicy(format!(
            "confidence must lie in (0, 1), got {ci}"
        )));
    }
    let z = inverse_normal_cdf(0.5 * (1.0 + ci))?;
    Ok(GaussianParams {
        half_range,
        z,
        sigma: half_range / z,
    })
}

/// Fraction of a proposed fixed-axis move that is applied at drift `x`.
#[inline]
pub fn moving_ratio(x: f64, params: &GaussianParams) -> f64 {
    (-(x * x) / (2.0 * params.sigma * params.sigma)).exp()
}

/// Which drift feeds the Gaussian ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Displacement {
    /// Drift the point would have after taking the full proposed move.
    #[default]
    PostMove,
    /// Drift before the move.
    PreMove,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ConstraintPolicy {
    #[default]
    Vanilla,
    Strict,
    NormalRange {
        half_range: f64,
    },
    GaussianRange {
        half_range: f64,
        ci: f64,
        displacement: Displacement,
    },
}

impl ConstraintPolicy {
    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    /// Whether the policy needs a fixed feature assigned to the last axis.
    pub fn fixes_axis(&self) -> bool {
        !matches!(self, ConstraintPolicy::Vanilla)
    }

    /// Short name: `vanilla`, `strict`, `range` or `gauss`.
    pub fn mode_name(&self) -> &'static str {
        match self {
            ConstraintPolicy::Vanilla => "vanilla",
            ConstraintPolicy::Strict => "strict",
            ConstraintPolicy::NormalRange { .. } => "range",
            ConstraintPolicy::GaussianRange { .. } => "gauss",
        }
    }

    /// Precomputes everything the per-move rule needs.
    pub fn resolve(&self) -> Result<AxisConstraint> {
        Ok(match *self {
            ConstraintPolicy::Vanilla => AxisConstraint::Free,
            ConstraintPolicy::Strict => AxisConstraint::Frozen,
            ConstraintPolicy::NormalRange { half_range } => {
                if !(half_range > 0.0 && half_range.is_finite()) {
                    return Err(Error::InvalidPolicy(format!(
                        "half-range must be positive, got {half_range}"
                    )));
                }
                AxisConstraint::Bounded { half_range }
            }
            ConstraintPolicy::GaussianRange {
                half_range,
                ci,
                displacement,
            } => AxisConstraint::Gaussian {
                params: gaussian_params(half_range, ci)?,
                displacement,
            },
        })
    }
}

impl fmt::Display for ConstraintPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintPolicy::Vanilla => f.write_str("vanilla"),
            ConstraintPolicy::Strict => f.write_str("strict"),
            ConstraintPolicy::NormalRange { half_range } => write!(f, "range:{half_range}"),
            ConstraintPolicy::GaussianRange {
                half_range,
                ci,
                displacement,
            } => {
                write!(f, "gauss:{half_range}:{ci}")?;
                if *displacement == Displacement::PreMove {
                    f.write_str(":pre")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ConstraintPolicy {
    type Err = Error;

    /// Compact form: `vanilla`, `strict`, `range:A`, `gauss:A:CI` or `gauss:A:CI:pre`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let num = |t: &str| -> Result<f64> {
            t.parse()
                .map_err(|_| Error::InvalidPolicy(format!("{t:?} is not a number in {s:?}")))
        };
        let policy = match parts.as_slice() {
            ["vanilla"] => ConstraintPolicy::Vanilla,
            ["strict"] => ConstraintPolicy::Strict,
            ["range", a] => ConstraintPolicy::NormalRange {
                half_range: num(a)?,
            },
            ["gauss", a, ci] => ConstraintPolicy::GaussianRange {
                half_range: num(a)?,
                ci: num(ci)?,
                displacement: Displacement::PostMove,
            },
            ["gauss", a, ci, "pre"] => ConstraintPolicy::GaussianRange {
                half_range: num(a)?,
                ci: num(ci)?,
                displacement: Displacement::PreMove,
            },
            _ => return Err(Error::InvalidPolicy(format!("unrecognised policy {s:?}"))),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// A validated policy with its derived parameters, ready for the inner loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisConstraint {
    Free,
    Frozen,
    Bounded {
        half_range: f64,
    },
    Gaussian {
        params: GaussianParams,
        displacement: Displacement,
    },
}

impl AxisConstraint {
    /// New fixed-axis value after proposing `delta` from `current`.
    #[inline]
    pub fn apply(&self, origin: f64, current: f64, delta: f64) -> f64 {
        match *self {
            AxisConstraint::Free => current + delta,
            AxisConstraint::Frozen => current,
            AxisConstraint::Bounded { half_range } => {
                let proposed = current + delta;
                if (proposed - origin).abs() <= half_range {
                    proposed
                } else {
                    current
                }
            }
            AxisConstraint::Gaussian {
                params,
                displacement,
            } => {
                let x = match displacement {
                    Displacement::PostMove => (current + delta) - origin,
                    Displacement::PreMove => current - origin,
                };
                current + delta * moving_ratio(x, &params)
            }
        }
    }
}

/// One-off form of [`AxisConstraint::apply`]; resolves the policy on every call.
pub fn apply_constraint(
    policy: &ConstraintPolicy,
    origin: f64,
    current: f64,
    delta: f64,
) -> Result<f64> {
    Ok(policy.resolve()?.apply(origin, current, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z975: f64 = 1.959963984540054;

    fn gauss(a: f64, ci: f64) -> ConstraintPolicy {
        ConstraintPolicy::GaussianRange {
            half_range: a,
            ci,
            displacement: Displacement::PostMove,
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
        assert!((inverse_normal_cdf(0.975).unwrap() - 1.9599640).abs() < 1e-6);
        assert!((inverse_normal_cdf(0.8413447461).unwrap() - 1.0).abs() < 1e-6);
        assert!((inverse_normal_cdf(0.025).unwrap() + Z975).abs() < 1e-12);
    }

    #[test]
    fn quantile_rejects_closed_endpoints() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                inverse_normal_cdf(p),
                Err(Error::ProbabilityOutOfRange(_))
            ));
        }
    }

    #[test]
    fn quantile_inverts_cdf_across_tails() {
        for &p in &[
            1e-12, 1e-6, 0.001, 0.02, 0.03, 0.3, 0.7, 0.97, 0.98, 0.999999,
        ] {
            let x = inverse_normal_cdf(p).unwrap();
            let back = normal_cdf(x);
            assert!((back - p).abs() <= 1e-14_f64.max(p * 1e-12), "p={p}");
        }
    }

    #[test]
    fn params_examples() {
        let g = gaussian_params(2.0, 0.95).unwrap();
        assert!((g.z - 1.9599640).abs() < 1e-6);
        assert!((g.sigma - 1.0204271).abs() < 1e-6);

        let g = gaussian_params(1.0, 0.6826895).unwrap();
        assert!((g.sigma - 1.0).abs() < 1e-6);

        let g1 = gaussian_params(0.3, 0.9).unwrap();
        let g2 = gaussian_params(0.6, 0.9).unwrap();
        assert_eq!(g1.z, g2.z);
        assert!((g2.sigma - 2.0 * g1.sigma).abs() < 1e-15);

        assert!(gaussian_params(0.0, 0.9).is_err());
        assert!(gaussian_params(1.0, 1.0).is_err());
    }

    #[test]
    fn ratio_examples() {
        let g = gaussian_params(0.7, 0.95).unwrap();
        assert_eq!(moving_ratio(0.0, &g), 1.0);
        assert!((moving_ratio(0.7, &g) - 0.1465).abs() < 1e-4);
        assert!((moving_ratio(g.sigma, &g) - 0.6065307).abs() < 1e-7);
        assert_eq!(moving_ratio(0.2, &g), moving_ratio(-0.2, &g));
    }

    #[test]
    fn apply_examples() {
        let s = ConstraintPolicy::Strict;
        assert_eq!(apply_constraint(&s, 0.5, 0.5, 0.2).unwrap(), 0.5);

        let r = ConstraintPolicy::NormalRange { half_range: 0.1 };
        assert_eq!(apply_constraint(&r, 0.5, 0.58, 0.05).unwrap(), 0.58);
        assert!((apply_constraint(&r, 0.5, 0.58, -0.05).unwrap() - 0.53).abs() < 1e-15);

        let g = gauss(1.0, 0.95);
        let v = apply_constraint(&g, 0.0, 0.0, 0.5).unwrap();
        let sigma = 1.0 / Z975;
        let expected = 0.5 * (-0.25 / (2.0 * sigma * sigma)).exp();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.3094).abs() < 1e-3);

        assert_eq!(
            apply_constraint(&ConstraintPolicy::Vanilla, 9.0, 1.0, 0.25).unwrap(),
            1.25
        );
    }

    #[test]
    fn pre_move_toggle_uses_current_drift() {
        let pre = ConstraintPolicy::GaussianRange {
            half_range: 1.0,
            ci: 0.95,
            displacement: Displacement::PreMove,
        };
        // at the origin the pre-move ratio is exactly 1
        assert_eq!(apply_constraint(&pre, 0.0, 0.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn policy_parse_round_trip() {
        for s in [
            "vanilla",
            "strict",
            "range:0.1",
            "gauss:0.2:0.95",
            "gauss:0.2:0.95:pre",
        ] {
            let p: ConstraintPolicy = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("range:-1".parse::<ConstraintPolicy>().is_err());
        assert!("gauss:0.1:1.2".parse::<ConstraintPolicy>().is_err());
        assert!("range".parse::<ConstraintPolicy>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn strict_never_moves(origin in -5.0f64..5.0, deltas in proptest::collection::vec(-1.0f64..1.0, 1..50)) {
                let c = ConstraintPolicy::Strict.resolve().unwrap();
                let mut v = origin;
                for d in deltas {
                    v = c.apply(origin, v, d);
                }
                prop_assert_eq!(v.to_bits(), origin.to_bits());
            }

            #[test]
            fn normal_range_stays_in_bounds(
                origin in -5.0f64..5.0,
                a in 0.01f64..1.0,
                deltas in proptest::collection::vec(-0.5f64..0.5, 1..100),
            ) {
                let c = ConstraintPolicy::NormalRange { half_range: a }.resolve().unwrap();
                let mut v = origin;
                for d in deltas {
                    v = c.apply(origin, v, d);
                    prop_assert!((v - origin).abs() <= a);
                }
            }

            #[test]
            fn vanilla_sums(origin in -5.0f64..5.0, deltas in proptest::collection::vec(-1.0f64..1.0, 1..50)) {
                let c = ConstraintPolicy::Vanilla.resolve().unwrap();
                let mut v = origin;
                for &d in &deltas {
                    v = c.apply(origin, v, d);
                }
                let sum: f64 = origin + deltas.iter().sum::<f64>();
                prop_assert!((v - sum).abs() <= 1e-12);
            }

            #[test]
            fn gaussian_ratio_monotone_and_boundary(a in 0.01f64..5.0, ci in 0.05f64..0.999, x1 in 0.0f64..10.0, x2 in 0.0f64..10.0) {
                let g = gaussian_params(a, ci).unwrap();
                let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
                if hi - lo > 1e-3 && moving_ratio(hi, &g) > 1e-300 {
                    prop_assert!(moving_ratio(hi, &g) < moving_ratio(lo, &g));
                }
                let boundary = (-g.z * g.z / 2.0).exp();
                prop_assert!((moving_ratio(a, &g) - boundary).abs() < 1e-9);
                prop_assert!((moving_ratio(-a, &g) - boundary).abs() < 1e-9);
            }

            #[test]
            fn gaussian_overshoot_is_bounded(a in 0.01f64..2.0, ci in 0.5f64..0.99, delta in 0.0f64..1.0, sign in prop::bool::ANY) {
                let c = gauss(a, ci).resolve().unwrap();
                let g = gaussian_params(a, ci).unwrap();
                let s = if sign { 1.0 } else { -1.0 };
                let origin = 0.3;
                let current = origin + s * a;
                let next = c.apply(origin, current, s * delta);
                let moved = (next - current).abs();
                prop_assert!(moved <= delta * (-g.z * g.z / 2.0).exp() + 1e-15);
            }
        }

        #[test]
        fn gaussian_can_exceed_range() {
            let c = gauss(0.1, 0.95).resolve().unwrap();
            let mut v = 0.0;
            for _ in 0..200 {
                v = c.apply(0.0, v, 0.05);
            }
            assert!(v > 0.1);
        }
    }
}
