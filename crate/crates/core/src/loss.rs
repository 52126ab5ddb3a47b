//! Losses in the exponential-like class: strictly convex, positive, with
//! zeroth through second derivatives bounded within a factor `C(z)` of
//! `exp(x)` on every half line `(-inf, z]`.
//!
//! Besides plain evaluation every loss exposes its log-value and
//! log-derivative. The engine works with those so that risks far below
//! `f64::MIN_POSITIVE` stay representable on long runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest argument passed to `exp` by [`LossSpec::eval`]; beyond it the
/// exponential loss saturates.
pub const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("exp argument {0} exceeds the saturation limit {EXP_CLAMP}")]
    Saturated(f64),
    #[error("loss inverse requires a positive argument, got {0}")]
    NonPositive(f64),
    #[error("loss argument is not finite: {0}")]
    NonFinite(f64),
}

/// A member of the loss class used by the boosting engine.
///
/// Implementors must be strictly convex bijections `R -> (0, inf)` whose
/// curvature envelope is finite for every `z`. The `ln_*` methods must be
/// accurate far into the left tail, where the plain values underflow.
pub trait Loss: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    fn deriv2(&self, x: f64) -> f64;
    /// `l^{-1}(y)` for `y > 0`.
    fn inverse(&self, y: f64) -> Result<f64, LossError>;

    fn ln_eval(&self, x: f64) -> f64 {
        self.eval(x).ln()
    }
    fn ln_deriv(&self, x: f64) -> f64 {
        self.deriv(x).ln()
    }
    /// `l^{-1}(exp(ln_y))`, usable when `exp(ln_y)` itself underflows.
    fn inverse_ln(&self, ln_y: f64) -> f64 {
        self.inverse(ln_y.exp()).unwrap_or(f64::NEG_INFINITY)
    }

    /// Tightest `C >= 1` with `1/C <= exp(x) / l^(i)(x) <= C` for all
    /// `x <= z` and `i` in `{0, 1, 2}`.
    fn curvature_envelope(&self, z: f64) -> f64;

    /// True when `C(z) == 1` identically, i.e. the loss is `exp`.
    fn is_exponential(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossSpec {
    Exponential,
    Logistic,
}

impl LossSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Exponential => "exp",
            LossSpec::Logistic => "logistic",
        }
    }

    /// Evaluation that reports saturation instead of clamping.
    pub fn try_eval(&self, x: f64) -> Result<f64, LossError> {
        if !x.is_finite() {
            return Err(LossError::NonFinite(x));
        }
        match self {
            LossSpec::Exponential if x > EXP_CLAMP => Err(LossError::Saturated(x)),
            _ => Ok(self.eval(x)),
        }
    }

    /// Whether evaluating the loss at `x` would hit the exp clamp.
    pub fn saturates(&self, x: f64) -> bool {
        matches!(self, LossSpec::Exponential) && x > EXP_CLAMP
    }
}

impl std::str::FromStr for LossSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(LossSpec::Exponential),
            "logistic" | "log" => Ok(LossSpec::Logistic),
            other => Err(format!("unknown loss '{other}' (expected exp or logistic)")),
        }
    }
}

impl std::fmt::Display for LossSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic sigmoid `1 / (1 + e^{-x})`.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Loss for LossSpec {
    fn eval(&self, x: f64) -> f64 {
        match self {
            LossSpec::Exponential => x.min(EXP_CLAMP).exp(),
            LossSpec::Logistic => softplus(x),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            LossSpec::Exponential => x.min(EXP_CLAMP).exp(),
            LossSpec::Logistic => sigmoid(x),
        }
    }

    fn deriv2(&self, x: f64) -> f64 {
        match self {
            LossSpec::Exponential => x.min(EXP_CLAMP).exp(),
            LossSpec::Logistic => sigmoid(x) * sigmoid(-x),
        }
    }

    fn inverse(&self, y: f64) -> Result<f64, LossError> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(LossError::NonPositive(y));
        }
        Ok(match self {
            LossSpec::Exponential => y.ln(),
            // ln(e^y - 1), split to keep precision at both ends
            LossSpec::Logistic => {
                if y > 1.0 {
                    y + (-(-y).exp()).ln_1p()
                } else {
                    y.exp_m1().ln()
                }
            }
        })
    }

    fn ln_eval(&self, x: f64) -> f64 {
        match self {
            LossSpec::Exponential => x,
            LossSpec::Logistic => {
                if x < -30.0 {
                    // ln(ln(1+u)) = ln u + ln(ln(1+u)/u) = x - u/2 + O(u^2), u = e^x
                    x - 0.5 * x.exp()
                } else {
                    softplus(x).ln()
                }
            }
        }
    }

    fn ln_deriv(&self, x: f64) -> f64 {
        match self {
            LossSpec::Exponential => x,
            LossSpec::Logistic => -softplus(-x),
        }
    }

    fn inverse_ln(&self, ln_y: f64) -> f64 {
        match self {
            LossSpec::Exponential => ln_y,
            LossSpec::Logistic => {
                if ln_y < -20.0 {
                    // ln(expm1(y)) = ln y + ln(expm1(y)/y) = ln y + y/2 + O(y^2)
                    ln_y + 0.5 * ln_y.exp()
                } else {
                    self.inverse(ln_y.exp()).unwrap_or(f64::NEG_INFINITY)
                }
            }
        }
    }

    fn curvature_envelope(&self, z: f64) -> f64 {
        match self {
            LossSpec::Exponential => 1.0,
            LossSpec::Logistic => {
                // Each ratio e^x / l^(i)(x) is >= 1 and nondecreasing in x,
                // so the supremum over x <= z sits at z.
                let ez = z.exp();
                let second = (2.0 * softplus(z)).exp(); // (1 + e^z)^2
                let zeroth = if z < -30.0 {
                    1.0 + ez / 2.0
                } else {
                    ez / softplus(z)
                };
                second.max(zeroth).max(1.0).min(f64::MAX)
            }
        }
    }

    fn is_exponential(&self) -> bool {
        matches!(self, LossSpec::Exponential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LOSSES: [LossSpec; 2] = [LossSpec::Exponential, LossSpec::Logistic];

    #[test]
    fn trivial_values() {
        assert_eq!(LossSpec::Exponential.eval(0.0), 1.0);
        assert!((LossSpec::Logistic.eval(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!(LossSpec::Logistic.inverse(2f64.ln()).unwrap().abs() < 1e-15);
        assert_eq!(LossSpec::Exponential.curvature_envelope(5.0), 1.0);
    }

    #[test]
    fn inverse_rejects_nonpositive() {
        for loss in LOSSES {
            assert!(loss.inverse(0.0).is_err());
            assert!(loss.inverse(-1.0).is_err());
        }
    }

    #[test]
    fn exp_saturation_is_flagged() {
        assert!(matches!(
            LossSpec::Exponential.try_eval(701.0),
            Err(LossError::Saturated(_))
        ));
        assert!(LossSpec::Exponential.eval(1e4).is_finite());
        assert!(LossSpec::Logistic.try_eval(1e4).is_ok());
        assert!(LossSpec::Exponential.try_eval(f64::NAN).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        for loss in LOSSES {
            let mut x = -30.0;
            while x <= 30.0 {
                let back = loss.inverse(loss.eval(x)).unwrap();
                let rel = (back - x).abs() / x.abs().max(1.0);
                assert!(rel <= 1e-9, "{loss} x={x} back={back}");
                x += 0.01;
            }
        }
    }

    #[test]
    fn log_forms_agree_with_plain_forms() {
        for loss in LOSSES {
            for i in -400..=400 {
                let x = i as f64 / 10.0;
                let a = loss.ln_eval(x);
                let b = loss.eval(x).ln();
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{loss} x={x}");
                let a = loss.ln_deriv(x);
                let b = loss.deriv(x).ln();
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{loss} x={x}");
                let y = loss.eval(x);
                let a = loss.inverse_ln(y.ln());
                assert!((a - x).abs() <= 1e-9 * x.abs().max(1.0), "{loss} x={x}");
            }
        }
        // deep tail, where the plain value underflows
        let l = LossSpec::Logistic;
        assert!((l.ln_eval(-2000.0) + 2000.0).abs() < 1e-12);
        assert!((l.ln_deriv(-2000.0) + 2000.0).abs() < 1e-12);
        assert!((l.inverse_ln(-2000.0) + 2000.0).abs() < 1e-9);
    }

    #[test]
    fn finite_differences() {
        let h = 1e-5;
        for loss in LOSSES {
            let mut x = -10.0;
            while x <= 10.0 {
                let d = (loss.eval(x + h) - loss.eval(x - h)) / (2.0 * h);
                assert!((loss.deriv(x) - d).abs() <= 1e-5, "{loss} d1 at {x}");
                let d2 = (loss.deriv(x + h) - loss.deriv(x - h)) / (2.0 * h);
                assert!((loss.deriv2(x) - d2).abs() <= 1e-5, "{loss} d2 at {x}");
                x += 0.05;
            }
        }
    }

    /// Grid oracle: max over x <= z of the six ratio directions.
    fn grid_envelope(loss: LossSpec, z: f64) -> f64 {
        let mut worst: f64 = 1.0;
        for k in 0..=20_000 {
            let x = z - 60.0 + 60.0 * k as f64 / 20_000.0;
            let e = x.exp();
            for v in [loss.eval(x), loss.deriv(x), loss.deriv2(x)] {
                let r = e / v;
                worst = worst.max(r).max(1.0 / r);
            }
        }
        worst
    }

    #[test]
    fn logistic_envelope_matches_grid_oracle() {
        let l = LossSpec::Logistic;
        assert!((l.curvature_envelope(-20.0) - 1.0).abs() < 1e-6);
        assert!((grid_envelope(l, -20.0) - 1.0).abs() < 1e-6);
        assert!((l.curvature_envelope(0.0) - 4.0).abs() < 1e-12);
        let g = grid_envelope(l, 0.0);
        assert!(g <= 4.0 + 1e-12 && g > 4.0 - 1e-9, "grid {g}");
        for z in [-5.0, -1.0, 0.5, 2.0, 5.0] {
            let c = l.curvature_envelope(z);
            let g = grid_envelope(l, z);
            assert!(g <= c * (1.0 + 1e-12), "z={z}: grid {g} > closed form {c}");
            assert!(g >= c * (1.0 - 1e-9), "z={z}: closed form {c} not tight ({g})");
        }
    }

    #[test]
    fn logistic_envelope_tends_to_one() {
        let l = LossSpec::Logistic;
        let mut prev = f64::INFINITY;
        for z in [0.0, -5.0, -10.0, -20.0, -40.0, -80.0] {
            let c = l.curvature_envelope(z);
            assert!(c <= prev);
            prev = c;
        }
        assert!(prev - 1.0 < 1e-30);
    }

    proptest! {
        #[test]
        fn positivity_and_convexity(x in -50.0f64..50.0) {
            for loss in LOSSES {
                prop_assert!(loss.eval(x) > 0.0);
                prop_assert!(loss.deriv(x) > 0.0);
                prop_assert!(loss.deriv2(x) > 0.0);
            }
        }

        #[test]
        fn envelope_bounds_ratios(z in -30.0f64..5.0, frac in 0.0f64..1.0, depth in 0.0f64..40.0) {
            let x = z - frac * depth;
            for loss in LOSSES {
                let c = loss.curvature_envelope(z);
                prop_assert!(c >= 1.0);
                let e = x.exp();
                for v in [loss.eval(x), loss.deriv(x), loss.deriv2(x)] {
                    let r = e / v;
                    prop_assert!(r <= c * (1.0 + 1e-12), "{} > {}", r, c);
                    prop_assert!(r >= (1.0 / c) * (1.0 - 1e-12));
                }
            }
        }

        #[test]
        fn envelope_monotone(z1 in -40.0f64..10.0, dz in 0.0f64..10.0) {
            for loss in LOSSES {
                prop_assert!(loss.curvature_envelope(z1) <= loss.curvature_envelope(z1 + dz));
            }
        }
    }
}
