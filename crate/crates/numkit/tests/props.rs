//! Property tests for the robust kernels.

use numkit::{clamp_signed, factored_diff_sq, robust_div, RobustDivConfig, Sign};
use proptest::prelude::*;

fn finite_f64() -> impl Strategy<Value = f64> {
    // wide but finite range, including subnormal-ish magnitudes
    prop_oneof![
        -1e160..1e160f64,
        (-1e-140..1e-140f64),
        Just(0.0),
        Just(-0.0),
    ]
}

proptest! {
    #[test]
    fn robust_div_never_nan_or_inf(n in finite_f64(), d in finite_f64()) {
        let cfg = RobustDivConfig::default();
        let r = robust_div(n, d, &cfg);
        prop_assert!(r.is_finite(), "robust_div({n}, {d}) = {r}");
    }

    #[test]
    fn robust_div_magnitude_bounded(n in finite_f64(), d in finite_f64()) {
        let cfg = RobustDivConfig::default();
        let r = robust_div(n, d, &cfg);
        prop_assert!(r.abs() <= cfg.max_magnitude);
    }

    #[test]
    fn robust_div_bit_exact_below_bound(n in -1e12..1e12f64, d in 1e-3..1e12f64) {
        let cfg = RobustDivConfig::default();
        prop_assume!((n / d).abs() < cfg.max_magnitude);
        let r = robust_div(n, d, &cfg);
        prop_assert_eq!(r.to_bits(), (n / d).to_bits());
        let r = robust_div(n, -d, &cfg);
        prop_assert_eq!(r.to_bits(), (n / -d).to_bits());
    }

    #[test]
    fn clamp_signed_result_has_requested_sign(
        den in finite_f64(),
        floor in 0.0..10.0f64,
        positive in any::<bool>(),
    ) {
        let sign = if positive { Sign::Positive } else { Sign::Negative };
        let r = clamp_signed(den, sign, floor);
        match sign {
            Sign::Positive => prop_assert!(r.is_sign_positive()),
            Sign::Negative => prop_assert!(r.is_sign_negative()),
        }
        // pass-through iff the input already had the strict requested sign
        if (positive && den > 0.0) || (!positive && den < 0.0) {
            prop_assert_eq!(r, den);
        } else {
            prop_assert_eq!(r.abs(), floor);
        }
    }

    #[test]
    fn factored_diff_sq_matches_naive_when_representable(
        x in -1e50..1e50f64,
        y in -1e50..1e50f64,
        wx in 0.0..100.0f64,
        wy in 0.0..100.0f64,
    ) {
        let naive = wx * x * x - wy * y * y;
        prop_assume!(naive.is_finite());
        let scale = (wx * x * x).abs().max((wy * y * y).abs());
        prop_assume!(naive.abs() > 1e-10 * scale); // outside the cancellation band
        let fact = factored_diff_sq(x, y, wx, wy);
        let rel = (naive - fact).abs() / naive.abs().max(1e-300);
        prop_assert!(rel < 1e-12, "x={x} y={y} wx={wx} wy={wy}: {naive} vs {fact}");
    }

    #[test]
    fn factored_diff_sq_finite_when_result_representable(
        x in -1e150..1e150f64,
        y in -1e150..1e150f64,
    ) {
        // unit weights: result (x+y)(x-y); factors can reach 2e150, fine
        let f = factored_diff_sq(x, y, 1.0, 1.0);
        prop_assert!(!f.is_nan());
    }
}
