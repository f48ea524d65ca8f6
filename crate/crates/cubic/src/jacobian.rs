//! Implicit-layer derivatives of a cubic root with respect to the four
//! coefficients.
//!
//! For a root t of f(t; p) = q·t³ + a·t² + b·t + c the implicit function
//! theorem gives ∂t/∂p = −(∂f/∂p)/(∂f/∂t). Evaluated literally this is
//! useless in exactly the situations the solver is designed for: ∂f/∂t → 0
//! at a merged pair, the entries overflow for saturated (±t_max) roots, and
//! a conjugate pair needs the derivative of the *pair*, not of one complex
//! root in isolation. This module provides total, finite derivative rows for
//! all of those cases.
//!
//! Four closed forms cover the plane:
//!
//! * **Real root** — the scalar formula with the denominator
//!   f′(t) = (3q·t + 2a)·t + b *sign-clamped*: branch information fixes the
//!   sign f′ must have at the true root (sign(q) for plus/minus, flipped for
//!   mid), so a wrong-signed or vanishing denominator is repaired to ±0 and
//!   the division saturates at ±M with the correct sign.
//! * **Complex pair, a-dominant** — when q·t_I is negligible against a the
//!   pair is governed by the quadratic part; rows reduce to the quadratic
//!   pair formulas (extended with a q column).
//! * **Complex pair, axis** — when u = 3q·t_R + a vanishes the real and
//!   imaginary sensitivities swap roles; a dedicated form avoids the 0/0.
//! * **Complex pair, general** — the full pair derivative with denominator
//!   u² + (q·t_I)², which is bounded away from zero whenever the two
//!   special forms do not apply.
//!
//! Each row is assembled in a factored frame: entries are computed at the
//! scale μ = max(|t_R|, |t_I|, 1) (so intermediates stay representable even
//! for saturated roots), the largest entry magnitude m is factored out, and
//! a single [`robust_div`] produces the scale factor. Division is exact for
//! μ = 1, so bounded roots pay nothing for the scaling.
//!
//! Saturation caveat: when m·μ² itself overflows (only possible for
//! `t_max` configured beyond ~1e154, or coefficient/root magnitudes far
//! outside the normalized regime) the scale factor saturates at ±M even if
//! the true entry would have been smaller. The sign is still correct, and
//! with the default configuration (`t_max = 1e150`, normalized coefficients)
//! the products stay below 1e308 and the case cannot occur.

use numkit::{clamp_signed, factored_diff_sq as fds, robust_div, RobustDivConfig, Sign};
use quadratic::Branch;
use quadratic::PlanarRoot;

use crate::CubicCoeffs;

/// Which closed form produced the rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubicFormula {
    Real,
    ComplexADominant,
    ComplexAxis,
    ComplexGeneral,
}

/// Derivative rows of one root: `rows[0]` is ∂t_R/∂(q,a,b,c), `rows[1]` is
/// ∂t_I/∂(q,a,b,c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootJacobianCubic {
    pub rows: [[f64; 4]; 2],
    pub formula_used: CubicFormula,
    /// Per row: whether the real-branch denominator was sign-clamped.
    /// Always `[false, false]` for the complex forms, whose denominators
    /// carry no sign constraint.
    pub clamped: [bool; 2],
}

/// Relative size below which q·t_I is treated as negligible against a.
const A_DOMINANT_BAND: f64 = 1e-3;
/// Relative size below which u = 3q·t_R + a is treated as on-axis.
const AXIS_BAND: f64 = 1e-3;

/// Factor the largest entry out of `v` and divide once.
///
/// Returns `(m·num_scale / den) · v/m` with the division saturated at ±M.
/// `num_scale` carries the μ-powers owed by the frame, pre-signed. A zero
/// vector returns zeros (the all-degenerate case must stay total).
fn factored_row(v: [f64; 4], num_scale: f64, den: f64, cfg: &RobustDivConfig) -> [f64; 4] {
    let m = v[0].abs().max(v[1].abs()).max(v[2].abs()).max(v[3].abs());
    if m == 0.0 {
        return [0.0; 4];
    }
    let scal = robust_div(m * num_scale, den, cfg);
    [
        scal * (v[0] / m),
        scal * (v[1] / m),
        scal * (v[2] / m),
        scal * (v[3] / m),
    ]
}

/// Derivative rows ∂(t_R, t_I)/∂(q, a, b, c) for `root` of the cubic with
/// coefficients `coeffs`.
///
/// Total over all inputs: every returned entry is finite (|entry| is not
/// bounded by M — M caps only the factored scale, and the per-entry values
/// `scal·vᵢ/m` with |vᵢ/m| ≤ 1 inherit the cap). The root is taken at face
/// value; callers differentiating through a solve pass the root the solver
/// returned and the same coefficients it solved.
pub fn jacobian_cubic(
    coeffs: &CubicCoeffs,
    root: &PlanarRoot,
    cfg: &RobustDivConfig,
) -> RootJacobianCubic {
    let (q, a, b) = (coeffs.q, coeffs.a, coeffs.b);
    let (t_r, t_i) = (root.t_r, root.t_i);

    if t_i == 0.0 {
        // Real root. The denominator sign at the true root follows from the
        // branch: the outer roots sit where f′ has the sign of q, the middle
        // one where it is flipped (q == 0 counts as positive, matching the
        // pseudo-sign convention for lost leading coefficients).
        let q_sign = if q < 0.0 { Sign::Negative } else { Sign::Positive };
        let want = if root.branch == Branch::Mid {
            q_sign.flipped()
        } else {
            q_sign
        };
        let den_raw = (3.0 * q * t_r + 2.0 * a) * t_r + b;
        let den = clamp_signed(den_raw, want, 0.0);
        // Negated comparisons on purpose: a NaN denominator counts as clamped.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let clamped = match want {
            Sign::Positive => !(den_raw > 0.0),
            Sign::Negative => !(den_raw < 0.0),
        };
        let m = t_r.abs().max(1.0);
        let s = t_r / m;
        let scal = robust_div(-(m * m * m), den, cfg);
        let row_r = [
            scal * s * s * s,
            (scal * s * s) / m,
            ((scal * s) / m) / m,
            ((scal / m) / m) / m,
        ];
        return RootJacobianCubic {
            rows: [row_r, [0.0; 4]],
            formula_used: CubicFormula::Real,
            clamped: [clamped, false],
        };
    }

    // Complex pair. Work at the scale μ = max(|t_R|, |t_I|, 1): with
    // T = t_R/μ and S = t_I/μ every polynomial entry below is O(1)·μ^k for
    // a known small k, which the num_scale arguments pay back.
    let mu = t_r.abs().max(t_i.abs()).max(1.0);
    let t = t_r / mu;
    let s = t_i / mu;

    // μ²·zr = [3t_R² − t_I², 2t_R, 1, 0]
    let zr = [fds(t, s, 3.0, 1.0), 2.0 * t / mu, 1.0 / (mu * mu), 0.0];
    // μ³·zi = [t_R·(t_R² − 3t_I²), t_R² − t_I², t_R, 1]
    let zi = [
        t * fds(t, s, 1.0, 3.0),
        fds(t, s, 1.0, 1.0) / mu,
        t / (mu * mu),
        1.0 / (mu * mu * mu),
    ];

    let qti = q * t_i;
    if qti == 0.0 || qti.abs() < A_DOMINANT_BAND * a.abs() {
        // Quadratic-dominated pair: rows are the quadratic pair derivatives
        // with the q column prepended.
        let row_r = factored_row(zr, -(mu * mu), 2.0 * a, cfg);
        let row_i = factored_row(zi, mu * mu, 2.0 * a * s, cfg);
        return RootJacobianCubic {
            rows: [row_r, row_i],
            formula_used: CubicFormula::ComplexADominant,
            clamped: [false, false],
        };
    }

    let u = 3.0 * q * t_r + a;
    if u == 0.0 || u.abs() < AXIS_BAND * qti.abs() {
        // On-axis pair: the roles of the two shared vectors swap.
        let row_r = factored_row(zi, mu, 2.0 * q * s * s, cfg);
        let row_i = factored_row(zr, mu, 2.0 * q * s, cfg);
        return RootJacobianCubic {
            rows: [row_r, row_i],
            formula_used: CubicFormula::ComplexAxis,
            clamped: [false, false],
        };
    }

    // General pair. Denominator u² + (q·t_I)² is bounded below via the two
    // band guards above. Differences of large same-sign products go through
    // the factored square difference to dodge cancellation.
    let at = a / mu;
    let ut = 3.0 * q * t + at;
    let qs = q * s;
    let st = ut * ut + qs * qs;

    let w0a = 8.0 * q * t + 3.0 * at;
    let w0 = if w0a != 0.0 && at != 0.0 && (w0a > 0.0) == (at > 0.0) {
        1.0_f64.copysign(at) * fds(t, s, w0a.abs(), at.abs())
    } else {
        w0a * t * t - at * s * s
    };
    let w1 = (5.0 * q * t + 2.0 * at) * t + q * s * s;
    let w2 = 2.0 * q * t + at;
    let w3 = -q;
    let g = [mu * w0, w1, w2 / mu, w3 / (mu * mu)];
    let row_r = factored_row(g, -1.0, 2.0 * st, cfg);

    let x0a = t * ut;
    let x0b = (6.0 * q * t + 3.0 * at) * t + q * s * s;
    let y0 = if x0a != 0.0 && x0b != 0.0 && (x0a > 0.0) == (x0b > 0.0) {
        1.0_f64.copysign(x0a) * fds(t, s, x0a.abs(), x0b.abs())
    } else {
        x0a * t * t - x0b * s * s
    };
    // ut can underflow to zero in the scaled frame even though the axis
    // guard bounded u away from zero; the ut != 0 test keeps the factored
    // arm from fabricating a sign out of +0.0.
    let x1b = q * t + at;
    let y1 = if ut != 0.0 && x1b != 0.0 && (ut > 0.0) == (x1b > 0.0) {
        1.0_f64.copysign(ut) * fds(t, s, ut.abs(), x1b.abs())
    } else {
        ut * t * t - x1b * s * s
    };
    let y2 = (3.0 * q * t + at) * t + q * s * s;
    let y3 = ut;
    let h = [mu * y0, y1, y2 / mu, y3 / (mu * mu)];
    let row_i = factored_row(h, 1.0, 2.0 * s * st, cfg);

    RootJacobianCubic {
        rows: [row_r, row_i],
        formula_used: CubicFormula::ComplexGeneral,
        clamped: [false, false],
    }
}
