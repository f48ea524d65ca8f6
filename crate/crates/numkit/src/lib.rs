//! Floating-point utility kernels shared by the solver and derivative crates.
//!
//! Three primitives cover every "the textbook formula explodes here" situation
//! in the rest of the workspace:
//!
//! * [`robust_div`] — division that saturates at a configurable magnitude
//!   instead of overflowing to ±∞ (or producing NaN from 0/0),
//! * [`clamp_signed`] — denominator sign repair for derivative formulas whose
//!   denominator provably has a known sign at the true root but may come out
//!   on the wrong side of zero in floating point,
//! * [`factored_diff_sq`] — `wx·x² − wy·y²` evaluated in factored form so that
//!   huge `x ≈ y` inputs neither overflow nor cancel catastrophically.
//!
//! All functions here are total on finite inputs: they never return NaN or
//! ±∞ for finite arguments. They are pure and stateless, hence trivially
//! thread-safe.

/// Saturation bounds used by robust division.
///
/// Two distinct bounds exist because two different kinds of quantity get
/// saturated:
///
/// * `max_magnitude` (`M`) bounds *derivative* entries — the scale at which a
///   gradient step is still useful but no longer trustworthy in detail.
/// * `t_max` bounds *root* magnitudes — the stand-in for a root that has run
///   away to ±∞ (e.g. the lost root of a quadratic whose leading coefficient
///   crosses zero).
///
/// Overflow guard: downstream code squares saturated roots when forming
/// residuals and factored products, so `t_max` must satisfy
/// `t_max² < f64::MAX`. The default `1e150` leaves `1e300 < 1.8e308` with
/// room for small multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustDivConfig {
    /// Saturation bound `M` for derivative-scale divisions.
    pub max_magnitude: f64,
    /// Largest representable root magnitude; root-scale divisions saturate
    /// here and "lost" roots are reported as `±t_max`.
    pub t_max: f64,
}

impl Default for RobustDivConfig {
    fn default() -> Self {
        Self {
            max_magnitude: 1000.0,
            t_max: 1e150,
        }
    }
}

impl RobustDivConfig {
    /// Construct a config, checking the positivity and overflow guards.
    ///
    /// Panics if `max_magnitude ≤ 0`, `t_max ≤ 0`, or `t_max²` overflows.
    pub fn new(max_magnitude: f64, t_max: f64) -> Self {
        assert!(
            max_magnitude > 0.0 && max_magnitude.is_finite(),
            "max_magnitude must be a positive finite number"
        );
        assert!(
            t_max > 0.0 && (t_max * t_max).is_finite(),
            "t_max must be positive with t_max^2 representable"
        );
        Self {
            max_magnitude,
            t_max,
        }
    }
}

/// Required sign of a denominator after clamping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// +1.0 or -1.0.
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    /// Sign of a float, honouring the sign bit of ±0.0.
    pub fn of(x: f64) -> Sign {
        if x.is_sign_negative() {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// A denominator bundled with the sign it is required to have.
///
/// Derivative formulas downstream know the true sign of their denominator
/// from branch information (which root of the ± pair they describe); this
/// pairing keeps that knowledge attached to the value until the clamp is
/// applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedDenominator {
    pub value: f64,
    pub required_sign: Sign,
}

impl SignedDenominator {
    pub fn new(value: f64, required_sign: Sign) -> Self {
        Self {
            value,
            required_sign,
        }
    }

    /// Apply [`clamp_signed`] with the stored required sign.
    pub fn clamped(self, floor: f64) -> f64 {
        clamp_signed(self.value, self.required_sign, floor)
    }
}

/// Division saturating at `cfg.max_magnitude` (the derivative bound `M`).
///
/// Returns `numerator / denominator` exactly (bit-identical to IEEE division)
/// whenever `|numerator| < |denominator| · M`; otherwise returns
/// `sign(numerator) · sign(denominator) · M`. The sign of a ±0.0 denominator
/// is taken from its sign bit, which is what makes the [`clamp_signed`]
/// "sign repair" convention work: a wrong-signed denominator clamped to ±0.0
/// saturates here with the intended sign.
///
/// `0/0` returns 0 by convention, making the function total; the degenerate
/// all-zero polynomial then gets finite (zero) derivative rows instead of
/// NaN.
pub fn robust_div(numerator: f64, denominator: f64, cfg: &RobustDivConfig) -> f64 {
    robust_div_bounded(numerator, denominator, cfg.max_magnitude)
}

/// [`robust_div`] with an explicit bound.
///
/// The solver crates call this with `cfg.t_max` when the quantity being
/// computed is a root rather than a derivative entry.
pub fn robust_div_bounded(numerator: f64, denominator: f64, bound: f64) -> f64 {
    if numerator == 0.0 && denominator == 0.0 {
        return 0.0;
    }
    // Strict comparison: at |n| == |d|·M the exact quotient equals ±M anyway.
    // |d|·bound may overflow to +∞; the comparison is then true and plain
    // division is used, which is correct (the quotient is far below bound).
    if numerator.abs() < denominator.abs() * bound {
        numerator / denominator
    } else {
        numerator.signum() * denominator.signum() * bound
    }
}

/// Repair the sign of a denominator that is known to be `sign` at the true
/// root but may have been computed on the wrong side of zero.
///
/// * If `den` already has the required (strict) sign it is returned
///   unchanged — the floor does **not** impose a minimum magnitude on
///   correctly-signed input.
/// * Otherwise (wrong sign or exactly zero) the result is `±floor` with the
///   required sign.
///
/// With `floor = 0` this is pure sign repair: the wrong-signed value becomes
/// a zero of the right sign, and a downstream [`robust_div`] saturates to the
/// correctly-signed `±M`.
pub fn clamp_signed(den: f64, sign: Sign, floor: f64) -> f64 {
    let floor = floor.abs();
    match sign {
        Sign::Positive => {
            if den > 0.0 {
                den
            } else {
                floor
            }
        }
        Sign::Negative => {
            if den < 0.0 {
                den
            } else {
                -floor
            }
        }
    }
}

/// `wx·x² − wy·y²` in factored form `(√wx·x + √wy·y)(√wx·x − √wy·y)`.
///
/// Requires `wx, wy ≥ 0`. The factored form avoids the catastrophic
/// cancellation of the naive expression when `wx·x² ≈ wy·y²` and both terms
/// are enormous: each factor is only O(√wx·|x| + √wy·|y|), so intermediates
/// stay representable whenever the *result* is (e.g. `x = y = 1e100`,
/// weights 1: naive overflows, factored form returns exactly 0).
pub fn factored_diff_sq(x: f64, y: f64, wx: f64, wy: f64) -> f64 {
    debug_assert!(wx >= 0.0 && wy >= 0.0, "weights must be nonnegative");
    let u = wx.sqrt() * x;
    let v = wy.sqrt() * y;
    (u + v) * (u - v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const M1000: RobustDivConfig = RobustDivConfig {
        max_magnitude: 1000.0,
        t_max: 1e150,
    };

    #[test]
    fn robust_div_plain_division_below_bound() {
        assert_eq!(robust_div(1.0, 2.0, &M1000), 0.5);
        assert_eq!(robust_div(-7.0, 4.0, &M1000), -1.75);
    }

    #[test]
    fn robust_div_zero_denominator_saturates_with_sign() {
        assert_eq!(robust_div(1.0, 0.0, &M1000), 1000.0);
        assert_eq!(robust_div(-1.0, 0.0, &M1000), -1000.0);
        assert_eq!(robust_div(1.0, -0.0, &M1000), -1000.0);
        assert_eq!(robust_div(-1.0, -0.0, &M1000), 1000.0);
    }

    #[test]
    fn robust_div_zero_over_zero_is_zero() {
        assert_eq!(robust_div(0.0, 0.0, &M1000), 0.0);
        assert_eq!(robust_div(0.0, -0.0, &M1000), 0.0);
    }

    #[test]
    fn robust_div_saturates_large_quotients() {
        assert_eq!(robust_div(1.0, 1e-9, &M1000), 1000.0);
        assert_eq!(robust_div(-1.0, 1e-9, &M1000), -1000.0);
        assert_eq!(robust_div(1.0, -1e-9, &M1000), -1000.0);
        // exactly at the bound: strict comparison, saturates (same value)
        assert_eq!(robust_div(1000.0, 1.0, &M1000), 1000.0);
    }

    #[test]
    fn robust_div_bounded_uses_t_max_scale() {
        assert_eq!(robust_div_bounded(1.0, 0.0, 1e150), 1e150);
        assert_eq!(robust_div_bounded(-3.0, 0.0, 1e150), -1e150);
    }

    #[test]
    fn robust_div_huge_denominator_does_not_saturate() {
        // |d|·bound overflows to +inf; the quotient itself is tiny.
        assert_eq!(robust_div_bounded(1.0, 1e300, 1e150), 1e-300);
    }

    #[test]
    fn clamp_signed_identity_on_correct_sign() {
        assert_eq!(clamp_signed(3.0, Sign::Positive, 0.0), 3.0);
        assert_eq!(clamp_signed(-3.0, Sign::Negative, 0.0), -3.0);
        // correctly-signed values below the floor pass through unchanged
        assert_eq!(clamp_signed(1e-20, Sign::Positive, 0.5), 1e-20);
        assert_eq!(clamp_signed(-1e-20, Sign::Negative, 0.5), -1e-20);
    }

    #[test]
    fn clamp_signed_repairs_wrong_sign_to_signed_floor() {
        let repaired = clamp_signed(-1e-18, Sign::Positive, 0.0);
        assert_eq!(repaired, 0.0);
        assert!(repaired.is_sign_positive());
        let repaired = clamp_signed(1e-18, Sign::Negative, 0.0);
        assert_eq!(repaired, 0.0);
        assert!(repaired.is_sign_negative());
        assert_eq!(clamp_signed(-2.0, Sign::Positive, 0.25), 0.25);
        assert_eq!(clamp_signed(2.0, Sign::Negative, 0.25), -0.25);
    }

    #[test]
    fn clamp_signed_zero_counts_as_violation() {
        assert!(clamp_signed(0.0, Sign::Positive, 0.0).is_sign_positive());
        assert!(clamp_signed(0.0, Sign::Negative, 0.0).is_sign_negative());
        assert!(clamp_signed(-0.0, Sign::Positive, 0.0).is_sign_positive());
    }

    #[test]
    fn clamp_then_divide_saturates_with_required_sign() {
        // the composition the derivative formulas rely on
        let den = clamp_signed(-5.1, Sign::Positive, 0.0);
        assert_eq!(robust_div(-1e300, den, &M1000), -1000.0);
        let den = clamp_signed(5.1, Sign::Negative, 0.0);
        assert_eq!(robust_div(-1e300, den, &M1000), 1000.0);
    }

    #[test]
    fn signed_denominator_wrapper() {
        let d = SignedDenominator::new(-4.0, Sign::Positive);
        assert_eq!(d.clamped(0.0), 0.0);
        let d = SignedDenominator::new(4.0, Sign::Positive);
        assert_eq!(d.clamped(0.0), 4.0);
    }

    #[test]
    fn factored_diff_sq_simple_values() {
        assert_eq!(factored_diff_sq(2.0, 1.0, 1.0, 1.0), 3.0);
        assert_eq!(factored_diff_sq(1.0, 1.0, 4.0, 1.0), 3.0);
    }

    #[test]
    fn factored_diff_sq_no_overflow_on_symmetric_huge_input() {
        assert_eq!(factored_diff_sq(1e100, 1e100, 1.0, 1.0), 0.0);
        // naive 3·(1e75)² − (1e75)² = 2e150 would be fine, but the
        // intermediate squares (1e150 each) are near the root-saturation
        // scale; the factored form keeps intermediates at ~1e75.
        let v = factored_diff_sq(1e75, 1e75, 3.0, 1.0);
        let rel = (v - 2e150).abs() / 2e150;
        assert!(rel < 1e-12, "rel err {rel}");
    }

    #[test]
    fn factored_diff_sq_matches_naive_when_safe() {
        let cases = [
            (1.5, -0.25, 2.0, 7.0),
            (-3.0, 11.0, 0.5, 0.125),
            (1e-8, 2e-8, 1.0, 3.0),
        ];
        for (x, y, wx, wy) in cases {
            let naive = wx * x * x - wy * y * y;
            let fact = factored_diff_sq(x, y, wx, wy);
            let scale = (wx * x * x).abs().max((wy * y * y).abs()).max(1e-300);
            assert!(
                (naive - fact).abs() / scale < 1e-12,
                "({x},{y},{wx},{wy}): naive {naive} vs factored {fact}"
            );
        }
    }

    #[test]
    fn default_config_matches_documented_bounds() {
        let cfg = RobustDivConfig::default();
        assert_eq!(cfg.max_magnitude, 1000.0);
        assert_eq!(cfg.t_max, 1e150);
        // overflow guard: squaring a saturated root must stay finite
        assert!((cfg.t_max * cfg.t_max).is_finite());
    }

    #[test]
    #[should_panic]
    fn config_rejects_unsquarable_t_max() {
        let _ = RobustDivConfig::new(1000.0, 1e200);
    }
}
