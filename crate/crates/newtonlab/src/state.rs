//! Newton iterates on the lifted plane and the single-step update.
//!
//! The iterate is a point `t = (tR, tI)` in the plane; the update is the
//! damped 2x2 solve
//!
//! ```text
//! t_n = t_{n-1} - 1/(s + eps) * [ dR  dI ] [ fR ]
//!                               [-dI  dR ] [ fI ]
//! ```
//!
//! with `dR = 2a*tR + b`, `dI = 2a*tI`, `fR = a*(tR^2 - tI^2) + b*tR + c`,
//! `fI = dR*tI`, and `s = dR^2 + dI^2`. With `eps = 0` this is exactly the
//! complex Newton step written in real coordinates; `eps > 0` is the
//! Levenberg-Marquardt damping that keeps the step finite through `s -> 0`
//! (the repeated-root line).
//!
//! Two structurally distinct regimes are dispatched explicitly:
//!
//! * `a == 0, b != 0`: the function is affine and the undamped update lands
//!   exactly on `(-c/b, tI * 0)` in one step, so it is computed that way.
//!   Damping is not applied here -- the hazard it addresses (`s -> 0` near a
//!   repeated root) requires `a != 0`.
//! * `tI == 0` with `eps == 0`: the 2x2 update reduces algebraically to the
//!   scalar quotient `tR - f/d`. Computing it in reduced form avoids the
//!   extra roundings of `(d*f)/(d*d)` and keeps real-axis trajectories
//!   bit-identical to a plain scalar Newton implementation.

use crate::solve::NewtonError;
use quadratic::QuadCoeffs;

/// One Newton iterate on the lifted plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonState {
    /// Current iterate `(tR, tI)`.
    pub t: (f64, f64),
    /// Number of update steps taken to reach this iterate.
    pub iteration: usize,
    /// Squared derivative magnitude `s = (2a*tR + b)^2 + (2a*tI)^2` at `t`.
    ///
    /// This is the undamped value; the damping `eps` is *not* folded in.
    pub s: f64,
    /// Levenberg-Marquardt damping used by the step that produced this
    /// state (`0.0` for an undamped run and for fresh start states).
    pub epsilon: f64,
}

impl NewtonState {
    /// Start state at `t0` (iteration 0, undamped).
    pub fn start(coeffs: &QuadCoeffs, t0: (f64, f64)) -> Self {
        Self::at(coeffs, t0, 0, 0.0)
    }

    /// State at a given iterate with `s` recomputed from the coefficients.
    pub fn at(coeffs: &QuadCoeffs, t: (f64, f64), iteration: usize, epsilon: f64) -> Self {
        NewtonState {
            t,
            iteration,
            s: s_of(coeffs, t),
            epsilon,
        }
    }
}

/// `s = (2a*tR + b)^2 + (2a*tI)^2` at the point `t`.
pub(crate) fn s_of(coeffs: &QuadCoeffs, t: (f64, f64)) -> f64 {
    let dr = 2.0 * coeffs.a * t.0 + coeffs.b;
    let di = 2.0 * coeffs.a * t.1;
    dr * dr + di * di
}

/// Raw value-level update shared by [`newton_step`] and the solve driver.
///
/// Callers must have rejected `a == 0 && b == 0` already.
pub(crate) fn step_values(a: f64, b: f64, c: f64, tr: f64, ti: f64, epsilon: f64) -> (f64, f64) {
    if a == 0.0 {
        // Affine: one exact step onto the root, imaginary part annihilated
        // multiplicatively so the sign of zero follows tI.
        return (-(c / b), ti * 0.0);
    }
    if ti == 0.0 && epsilon == 0.0 {
        // Real axis, undamped: reduced scalar quotient.
        let f = a * tr * tr + b * tr + c;
        let d = 2.0 * a * tr + b;
        return (tr - f / d, ti);
    }
    let dr = 2.0 * a * tr + b;
    let di = 2.0 * a * ti;
    let fr = a * (tr * tr - ti * ti) + b * tr + c;
    let fi = dr * ti;
    let s_eff = dr * dr + di * di + epsilon;
    let num_r = dr * fr + di * fi;
    let num_i = dr * fi - di * fr;
    (tr - num_r / s_eff, ti - num_i / s_eff)
}

/// One damped Newton step from `state` on the quadratic `coeffs`.
///
/// `epsilon >= 0` is the Levenberg-Marquardt damping for *this* step; it is
/// recorded in the returned state. A constant function (`a == 0 && b == 0`)
/// has no Newton update and is rejected.
///
/// Fixed lines (exact, not approximate):
/// * `tI == 0` stays `tI == 0` for every `epsilon`;
/// * `tR == -b/(2a)` stays put whenever `2a*tR + b` evaluates to zero in
///   floating point, e.g. for any `a` that is a power of two.
pub fn newton_step(
    state: &NewtonState,
    coeffs: &QuadCoeffs,
    epsilon: f64,
) -> Result<NewtonState, NewtonError> {
    if coeffs.a == 0.0 && coeffs.b == 0.0 {
        return Err(NewtonError::ConstantFunction { c: coeffs.c });
    }
    debug_assert!(epsilon >= 0.0, "damping must be nonnegative");
    let t = step_values(coeffs.a, coeffs.b, coeffs.c, state.t.0, state.t.1, epsilon);
    Ok(NewtonState::at(coeffs, t, state.iteration + 1, epsilon))
}
