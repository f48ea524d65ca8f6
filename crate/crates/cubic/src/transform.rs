//! Reduced and canonical forms of the cubic.
//!
//! The shifted/scaled variable t̃ = q·t + a/3 removes the quadratic term and
//! the leading scale: t̃³ + b̂·t̃ + ĉ = 0 with the two *hat* parameters below.
//! One more reduction folds b̂ and ĉ into a single classifying parameter:
//! b̃ = ĉ and c̃ = b̂³/27 + ĉ²/4, whose sign separates the root regimes
//! (c̃ < 0 three distinct real, c̃ > 0 one real plus a conjugate pair,
//! c̃ = 0 a merged pair).

use quadratic::{Branch, PlanarRoot};

use crate::solve::label_one_real_with_pair;
use crate::{CubicCoeffs, CubicRootSet};

/// Depressed-cubic parameters (b̂, ĉ) for t̃³ + b̂·t̃ + ĉ = 0,
/// t̃ = q·t + a/3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCubicHat {
    pub b_hat: f64,
    pub c_hat: f64,
}

/// Canonical parameters (b̃, c̃): b̃ = ĉ carries the scale and
/// c̃ = b̂³/27 + ĉ²/4 classifies the configuration by sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalCubicTilde {
    pub b_tilde: f64,
    pub c_tilde: f64,
}

/// Reduce to the depressed form: b̂ = −a²/3 + q·b, ĉ = 2a³/27 − q·a·b/3 + q²·c.
pub fn to_hat(coeffs: &CubicCoeffs) -> ReducedCubicHat {
    let (q, a, b, c) = (coeffs.q, coeffs.a, coeffs.b, coeffs.c);
    ReducedCubicHat {
        b_hat: -a * a / 3.0 + q * b,
        c_hat: 2.0 * a * a * a / 27.0 - q * a * b / 3.0 + q * q * c,
    }
}

/// Fold the depressed form into the canonical pair.
pub fn to_tilde(hat: &ReducedCubicHat) -> CanonicalCubicTilde {
    let (bh, ch) = (hat.b_hat, hat.c_hat);
    CanonicalCubicTilde {
        b_tilde: ch,
        c_tilde: bh * bh * bh / 27.0 + ch * ch / 4.0,
    }
}

/// Invert [`to_tilde`]: b̂ = −3·∛(b̃²/4 − c̃), ĉ = b̃.
///
/// Exact inverse in exact arithmetic; in floats the cancellation in
/// b̃²/4 − c̃ limits recovery accuracy near the cusp b̃²/4 = c̃ (where b̂ → 0).
pub fn hat_from_tilde(tilde: &CanonicalCubicTilde) -> ReducedCubicHat {
    let x = tilde.b_tilde * tilde.b_tilde / 4.0 - tilde.c_tilde;
    ReducedCubicHat {
        b_hat: -3.0 * x.cbrt(),
        c_hat: tilde.b_tilde,
    }
}

/// Roots of the canonical cubic t̃³ + b̂·t̃ + b̃ = 0 (with b̂ implied by the
/// tilde parameters), in closed form.
///
/// * `c̃ < 0`: three real roots from the trigonometric form — the three
///   cosine branches land in [½, 1], [−½, ½], [−1, −½] of the circle, so
///   they arrive already ordered plus/mid/minus.
/// * `c̃ > 0`: one real root ξ_S + ξ_D and a conjugate pair, labeled by the
///   shared real-part ordering.
/// * `|c̃| ≈ 0` (relative to b̃²): a merged pair at ∛(b̃/2) plus a lone root
///   at −2∛(b̃/2); the merged pair sits above or below the lone root
///   depending on sign(b̃).
pub fn roots_canonical(tilde: &CanonicalCubicTilde) -> CubicRootSet {
    let bt = tilde.b_tilde;
    let ct = tilde.c_tilde;

    if ct.abs() <= 1e-14 * (bt * bt).max(1.0) {
        if bt == 0.0 {
            let z = |br| PlanarRoot::real(0.0, br, None);
            return CubicRootSet {
                roots: [z(Branch::Minus), z(Branch::Mid), z(Branch::Plus)],
                real_count: 3,
                pseudo_sign_q: None,
                deflation_choice: None,
            };
        }
        let g = (bt / 2.0).cbrt();
        let lone = -2.0 * g;
        let mk = |v, br| PlanarRoot::real(v, br, None);
        let roots = if g > lone {
            [mk(lone, Branch::Minus), mk(g, Branch::Mid), mk(g, Branch::Plus)]
        } else {
            [mk(g, Branch::Minus), mk(g, Branch::Mid), mk(lone, Branch::Plus)]
        };
        return CubicRootSet {
            roots,
            real_count: 3,
            pseudo_sign_q: None,
            deflation_choice: None,
        };
    }

    if ct < 0.0 {
        let amp = 2.0 * (bt * bt / 4.0 - ct).cbrt().sqrt();
        let th0 = (-ct).sqrt().atan2(-bt / 2.0);
        let tp = amp * (th0 / 3.0).cos();
        let tm = amp * ((th0 - 2.0 * std::f64::consts::PI) / 3.0).cos();
        let tmin = amp * ((th0 + 2.0 * std::f64::consts::PI) / 3.0).cos();
        let mk = |v, br| PlanarRoot::real(v, br, None);
        return CubicRootSet {
            roots: [
                mk(tmin, Branch::Minus),
                mk(tm, Branch::Mid),
                mk(tp, Branch::Plus),
            ],
            real_count: 3,
            pseudo_sign_q: None,
            deflation_choice: None,
        };
    }

    let sq = ct.sqrt();
    let xs = (-bt / 2.0 + sq).cbrt();
    let xd = (-bt / 2.0 - sq).cbrt();
    let s = xs + xd;
    let re = -s / 2.0;
    let im = (3.0_f64.sqrt() / 2.0) * (xs - xd);
    let triple = label_one_real_with_pair(
        PlanarRoot::real(s, Branch::Mid, None),
        PlanarRoot::complex(re, im, Branch::Mid),
        PlanarRoot::complex(re, -im, Branch::Mid),
    );
    CubicRootSet {
        roots: triple.roots,
        real_count: 1,
        pseudo_sign_q: None,
        deflation_choice: None,
    }
}
