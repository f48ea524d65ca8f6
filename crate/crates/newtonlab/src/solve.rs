//! Newton driver with optional safeguarded bracketing, plus standalone
//! bisection with endpoint-weight extraction.
//!
//! The driver repeats [`step_values`](crate::state) until either a scaled
//! residual tolerance is met or an iteration budget runs out. The residual
//! test mirrors the usual practice for polynomial solvers: with
//! `pmax = max(1, |a|, |b|, |c|)` the run stops once
//! `|f(t_n)| / pmax <= tol * (1 + |f(t_0)| / pmax)`, evaluated after each
//! step. Passing `tol <= 0` disables the test entirely and runs exactly
//! `max_iter` steps — the mode used to study what a *truncated* iteration
//! computes, where stopping early on a lucky exact zero would change the
//! object being measured.
//!
//! A [`BisectionBracket`] restricts the iteration to a one-dimensional slice
//! on which the residual changes sign: a real-axis interval on either side of
//! the vertex, or an imaginary-axis interval on the vertex line. Newton
//! candidates that leave the open interval are replaced by the bracket
//! midpoint, and every accepted point tightens the bracket by its residual
//! sign, so the returned root always lies inside the requested interval.

use crate::state::{step_values, NewtonState};
use crate::tape::{SeedSlot, Tape};
use numkit::Sign;
use quadratic::{Branch, PlanarRoot, QuadCoeffs};

/// Default iteration budget (matches the cubic's inner Newton budget).
pub const DEFAULT_MAX_ITER: usize = 200;
/// Default scaled-residual tolerance.
pub const DEFAULT_NEWTON_TOL: f64 = 1e-13;

/// Failure modes of [`newton_step`](crate::newton_step) and [`newton_solve`].
#[derive(Debug, Clone)]
pub enum NewtonError {
    /// `a == 0 && b == 0`: the function is constant and has no Newton update.
    ConstantFunction {
        /// The constant value.
        c: f64,
    },
    /// The bracket failed validation (endpoints, slice membership, or sign
    /// change); the reason says which precondition broke.
    InvalidBracket {
        /// Human-readable description of the violated precondition.
        reason: String,
    },
    /// The tolerance was not met within `max_iter` steps. The partial run is
    /// carried along so the caller can inspect (or keep) the last iterate.
    MaxIterExhausted {
        /// The run as it stood when the budget ran out.
        run: Box<NewtonRun>,
    },
}

impl std::fmt::Display for NewtonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NewtonError::ConstantFunction { c } => write!(
                f,
                "newton update undefined for the constant function f(t) = {c}; \
                 both the quadratic and linear coefficients are zero"
            ),
            NewtonError::InvalidBracket { reason } => write!(f, "invalid bracket: {reason}"),
            NewtonError::MaxIterExhausted { run } => write!(
                f,
                "newton iteration used all {} steps without meeting the tolerance",
                run.iterations
            ),
        }
    }
}

impl std::error::Error for NewtonError {}

fn invalid(reason: impl Into<String>) -> NewtonError {
    NewtonError::InvalidBracket {
        reason: reason.into(),
    }
}

/// Knobs for [`newton_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Iteration budget (must be at least 1).
    pub max_iter: usize,
    /// Scaled-residual tolerance; `tol <= 0` disables the convergence test
    /// and runs exactly `max_iter` steps.
    pub tol: f64,
    /// Levenberg-Marquardt damping added to `s` in every step (`>= 0`).
    pub epsilon: f64,
    /// Record the run's arithmetic on a [`Tape`].
    pub record_tape: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_NEWTON_TOL,
            epsilon: 0.0,
            record_tape: false,
        }
    }
}

impl NewtonOptions {
    /// Run to a scaled-residual tolerance with the default budget.
    pub fn to_tolerance(tol: f64) -> Self {
        NewtonOptions {
            tol,
            ..Default::default()
        }
    }

    /// Run exactly `n` steps with no convergence test.
    pub fn fixed_iterations(n: usize) -> Self {
        NewtonOptions {
            max_iter: n,
            tol: 0.0,
            ..Default::default()
        }
    }

    /// Same options with tape recording switched on.
    pub fn with_tape(self) -> Self {
        NewtonOptions {
            record_tape: true,
            ..self
        }
    }

    /// Same options with the given damping.
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        NewtonOptions { epsilon, ..self }
    }
}

/// Which one-dimensional slice a bracket lives on.
///
/// Real-axis slices hold `tI == 0` and move `tR`; imaginary-axis slices hold
/// `tR == -b/(2a)` (the vertex line) and move `tI`. The four variants name
/// the regions on which the slice residual is monotone, so a sign change
/// brackets exactly one root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BracketSide {
    /// `tI == 0`, interval left of the vertex.
    RealAxisLeftOfVertex,
    /// `tI == 0`, interval right of the vertex.
    RealAxisRightOfVertex,
    /// `tR == -b/(2a)`, interval in the upper half plane.
    ImagAxisUpper,
    /// `tR == -b/(2a)`, interval in the lower half plane.
    ImagAxisLower,
}

impl BracketSide {
    /// True for the two real-axis variants.
    pub fn is_real_axis(self) -> bool {
        matches!(
            self,
            BracketSide::RealAxisLeftOfVertex | BracketSide::RealAxisRightOfVertex
        )
    }

    /// Stable lowercase name.
    pub fn as_str(self) -> &'static str {
        match self {
            BracketSide::RealAxisLeftOfVertex => "real_axis_left_of_vertex",
            BracketSide::RealAxisRightOfVertex => "real_axis_right_of_vertex",
            BracketSide::ImagAxisUpper => "imag_axis_upper",
            BracketSide::ImagAxisLower => "imag_axis_lower",
        }
    }
}

impl std::fmt::Display for BracketSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sign-change interval `[E_left, E_right]` on a one-dimensional slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionBracket {
    /// Left endpoint of the slice coordinate.
    pub e_left: f64,
    /// Right endpoint of the slice coordinate (`> e_left`).
    pub e_right: f64,
    /// Which slice the coordinates live on.
    pub side: BracketSide,
}

impl BisectionBracket {
    /// Convenience constructor.
    pub fn new(e_left: f64, e_right: f64, side: BracketSide) -> Self {
        BisectionBracket {
            e_left,
            e_right,
            side,
        }
    }
}

/// Result of a completed (or budget-limited) [`newton_solve`].
#[derive(Debug, Clone)]
pub struct NewtonRun {
    /// Final iterate, labeled with its branch.
    pub root: PlanarRoot,
    /// Update steps actually taken.
    pub iterations: usize,
    /// True when the scaled-residual test stopped the run.
    pub stopped_by_tolerance: bool,
    /// How many Newton candidates were replaced by bracket midpoints.
    pub bisection_substitutions: usize,
    /// Final iterate with `s` and the damping used.
    pub final_state: NewtonState,
    /// Recorded arithmetic, when requested.
    pub tape: Option<Tape>,
}

/// Residual magnitude `|f(t)|` with the same expression ordering as the
/// step itself (scalar form on the real axis, planar form off it).
fn residual_mag(coeffs: &QuadCoeffs, t: (f64, f64)) -> f64 {
    let (a, b, c) = (coeffs.a, coeffs.b, coeffs.c);
    if t.1 == 0.0 {
        (a * t.0 * t.0 + b * t.0 + c).abs()
    } else {
        let fr = a * (t.0 * t.0 - t.1 * t.1) + b * t.0 + c;
        let fi = (2.0 * a * t.0 + b) * t.1;
        fr.hypot(fi)
    }
}

/// Branch-label the final iterate the way the closed-form solver would.
fn label_root(coeffs: &QuadCoeffs, t: (f64, f64)) -> PlanarRoot {
    let (a, b) = (coeffs.a, coeffs.b);
    if a == 0.0 {
        // Affine: the bounded root continues t-plus for b > 0 and t-minus for
        // b < 0 (pseudo-sign of the vanished leading coefficient is +0).
        let branch = if b > 0.0 { Branch::Plus } else { Branch::Minus };
        PlanarRoot::real(t.0, branch, Some(Sign::Positive))
    } else if t.1 == 0.0 {
        let d = 2.0 * a * t.0 + b;
        let branch = if d >= 0.0 { Branch::Plus } else { Branch::Minus };
        PlanarRoot::real(t.0, branch, None)
    } else {
        let branch = if t.1 > 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        };
        PlanarRoot::complex(t.0, t.1, branch)
    }
}

/// Slice residual: `f` restricted to the bracket's one-dimensional slice.
fn slice_residual(side: BracketSide, coeffs: &QuadCoeffs, vertex: f64, x: f64) -> f64 {
    let (a, b, c) = (coeffs.a, coeffs.b, coeffs.c);
    if side.is_real_axis() {
        a * x * x + b * x + c
    } else {
        // On the vertex line the imaginary part of f vanishes; this is the
        // real part at (vertex, x).
        a * (vertex * vertex - x * x) + b * vertex + c
    }
}

/// Bracket state while the solve runs: current interval, the residual sign
/// at the high end, and (when taping) the endpoint node ids.
struct BracketGuard {
    side: BracketSide,
    lo: f64,
    hi: f64,
    g_hi: f64,
    /// `tR` pin for imaginary-axis slices; unused for real-axis slices.
    vertex: f64,
    lo_node: Option<u32>,
    hi_node: Option<u32>,
}

impl BracketGuard {
    fn new(
        bracket: &BisectionBracket,
        coeffs: &QuadCoeffs,
        t0: (f64, f64),
    ) -> Result<Self, NewtonError> {
        let vertex = validate_bracket(bracket, coeffs, Some(t0))?;
        let g_hi = slice_residual(bracket.side, coeffs, vertex, bracket.e_right);
        Ok(BracketGuard {
            side: bracket.side,
            lo: bracket.e_left,
            hi: bracket.e_right,
            g_hi,
            vertex,
            lo_node: None,
            hi_node: None,
        })
    }

    fn coord_of(&self, t: (f64, f64)) -> f64 {
        if self.side.is_real_axis() {
            t.0
        } else {
            t.1
        }
    }

    /// Tighten the interval using the residual sign at an accepted point.
    fn absorb(&mut self, coeffs: &QuadCoeffs, x: f64, x_node: Option<u32>) {
        let g = slice_residual(self.side, coeffs, self.vertex, x);
        if g == 0.0 {
            // Exact root: the interval cannot be tightened past it, and every
            // later candidate equal to x stays inside. Leave the bracket.
            return;
        }
        if (g > 0.0) == (self.g_hi > 0.0) {
            self.hi = x;
            self.g_hi = g;
            self.hi_node = x_node;
        } else {
            self.lo = x;
            self.lo_node = x_node;
        }
    }
}

/// Shared precondition checks for brackets; returns the vertex coordinate
/// (meaningful only for the imaginary-axis sides). `t0` is checked for slice
/// membership when given.
fn validate_bracket(
    bracket: &BisectionBracket,
    coeffs: &QuadCoeffs,
    t0: Option<(f64, f64)>,
) -> Result<f64, NewtonError> {
    // Negated comparison on purpose: NaN endpoints must also be rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(bracket.e_left < bracket.e_right) {
        return Err(invalid("endpoints must satisfy E_left < E_right"));
    }
    let vertex = if bracket.side.is_real_axis() {
        if let Some(t0) = t0 {
            if t0.1 != 0.0 {
                return Err(invalid(
                    "a real-axis bracket requires the start iterate on the real axis (tI == 0)",
                ));
            }
        }
        0.0
    } else {
        if coeffs.a == 0.0 {
            return Err(invalid(
                "an imaginary-axis bracket requires a nonzero leading coefficient",
            ));
        }
        let v = -coeffs.b / (2.0 * coeffs.a);
        if let Some(t0) = t0 {
            if t0.0 != v {
                return Err(invalid(
                    "an imaginary-axis bracket requires the start iterate on the vertex line \
                     tR == -b/(2a)",
                ));
            }
        }
        v
    };
    let g_lo = slice_residual(bracket.side, coeffs, vertex, bracket.e_left);
    let g_hi = slice_residual(bracket.side, coeffs, vertex, bracket.e_right);
    if g_lo != 0.0 && g_hi != 0.0 && (g_lo > 0.0) == (g_hi > 0.0) {
        return Err(invalid(
            "the slice residual does not change sign across [E_left, E_right]",
        ));
    }
    Ok(vertex)
}

/// Tape bookkeeping for a recorded run: the tape plus the node ids of the
/// coefficients, reusable constants, and the current iterate.
struct TapeCtx {
    tape: Tape,
    a: u32,
    b: u32,
    c: u32,
    two: u32,
    half: Option<u32>,
    eps_node: Option<u32>,
    tr: u32,
    ti: u32,
}

impl TapeCtx {
    fn new(coeffs: &QuadCoeffs, t0: (f64, f64)) -> Self {
        let mut tape = Tape::new(coeffs.a, coeffs.b, coeffs.c, t0.0, t0.1);
        let a = tape.seed_index(SeedSlot::A) as u32;
        let b = tape.seed_index(SeedSlot::B) as u32;
        let c = tape.seed_index(SeedSlot::C) as u32;
        let tr = tape.seed_index(SeedSlot::T0Real) as u32;
        let ti = tape.seed_index(SeedSlot::T0Imag) as u32;
        let two = tape.konst(2.0);
        TapeCtx {
            tape,
            a,
            b,
            c,
            two,
            half: None,
            eps_node: None,
            tr,
            ti,
        }
    }

    fn half(&mut self) -> u32 {
        if let Some(h) = self.half {
            h
        } else {
            let h = self.tape.konst(0.5);
            self.half = Some(h);
            h
        }
    }

    fn eps(&mut self, epsilon: f64) -> u32 {
        if let Some(e) = self.eps_node {
            e
        } else {
            let e = self.tape.konst(epsilon);
            self.eps_node = Some(e);
            e
        }
    }

    /// Record one update step. Values are bit-identical to
    /// [`step_values`](crate::state) — same dispatch, same expression order.
    fn step(&mut self, coeffs: &QuadCoeffs, epsilon: f64) -> (f64, f64) {
        if coeffs.a == 0.0 {
            let tp = &mut self.tape;
            let q = tp.div(self.c, self.b);
            self.tr = tp.neg(q);
            let zero = tp.konst(0.0);
            self.ti = tp.mul(self.ti, zero);
        } else if self.tape.value_at(self.ti) == 0.0 && epsilon == 0.0 {
            let tp = &mut self.tape;
            let at = tp.mul(self.a, self.tr);
            let att = tp.mul(at, self.tr);
            let bt = tp.mul(self.b, self.tr);
            let fsum = tp.add(att, bt);
            let f = tp.add(fsum, self.c);
            let twoa = tp.mul(self.two, self.a);
            let twoat = tp.mul(twoa, self.tr);
            let d = tp.add(twoat, self.b);
            let q = tp.div(f, d);
            let nq = tp.neg(q);
            self.tr = tp.add(self.tr, nq);
        } else {
            let eps_n = if epsilon != 0.0 {
                Some(self.eps(epsilon))
            } else {
                None
            };
            let tp = &mut self.tape;
            let twoa = tp.mul(self.two, self.a);
            let twoat = tp.mul(twoa, self.tr);
            let dr = tp.add(twoat, self.b);
            let di = tp.mul(twoa, self.ti);
            let trtr = tp.mul(self.tr, self.tr);
            let titi = tp.mul(self.ti, self.ti);
            let ntiti = tp.neg(titi);
            let diff = tp.add(trtr, ntiti);
            let adiff = tp.mul(self.a, diff);
            let btr = tp.mul(self.b, self.tr);
            let fr_sum = tp.add(adiff, btr);
            let fr = tp.add(fr_sum, self.c);
            let fi = tp.mul(dr, self.ti);
            let drdr = tp.mul(dr, dr);
            let didi = tp.mul(di, di);
            let s = tp.add(drdr, didi);
            let s_eff = match eps_n {
                Some(e) => tp.add(s, e),
                None => s,
            };
            let num_r_a = tp.mul(dr, fr);
            let num_r_b = tp.mul(di, fi);
            let num_r = tp.add(num_r_a, num_r_b);
            let num_i_a = tp.mul(dr, fi);
            let num_i_b = tp.mul(di, fr);
            let n_num_i_b = tp.neg(num_i_b);
            let num_i = tp.add(num_i_a, n_num_i_b);
            let qr = tp.div(num_r, s_eff);
            let qi = tp.div(num_i, s_eff);
            let nqr = tp.neg(qr);
            let nqi = tp.neg(qi);
            self.tr = tp.add(self.tr, nqr);
            self.ti = tp.add(self.ti, nqi);
        }
        (self.tape.value_at(self.tr), self.tape.value_at(self.ti))
    }

    /// Record a bracket-midpoint substitution for the slice coordinate and
    /// make it the current node for that coordinate.
    fn substitute_midpoint(&mut self, guard: &BracketGuard) -> f64 {
        let lo_node = guard.lo_node.expect("bracket endpoint nodes initialized");
        let hi_node = guard.hi_node.expect("bracket endpoint nodes initialized");
        let half = self.half();
        let sum = self.tape.add(lo_node, hi_node);
        let mid = self.tape.mul(sum, half);
        if guard.side.is_real_axis() {
            self.tr = mid;
        } else {
            self.ti = mid;
        }
        self.tape.value_at(mid)
    }
}

/// Drive the damped Newton iteration from `t0`, optionally safeguarded by a
/// bracket, optionally recording a [`Tape`].
///
/// Stopping: with `opts.tol > 0` the run stops once
/// `|f(t_n)| / pmax <= tol * (1 + |f(t_0)| / pmax)` where
/// `pmax = max(1, |a|, |b|, |c|)`, checked after every step; exhausting
/// `max_iter` is then [`NewtonError::MaxIterExhausted`] (carrying the partial
/// run). With `opts.tol <= 0` the run takes exactly `max_iter` steps and
/// always returns `Ok`.
///
/// Bracketing: candidates leaving the open interval are replaced by the
/// bracket midpoint, every accepted point tightens the bracket by residual
/// sign, and on imaginary-axis slices the real coordinate is pinned to the
/// vertex line. Bracket endpoints and branch decisions enter the tape as
/// constants.
pub fn newton_solve(
    coeffs: &QuadCoeffs,
    t0: (f64, f64),
    opts: &NewtonOptions,
    bracket: Option<&BisectionBracket>,
) -> Result<NewtonRun, NewtonError> {
    let (a, b, c) = (coeffs.a, coeffs.b, coeffs.c);
    if a == 0.0 && b == 0.0 {
        return Err(NewtonError::ConstantFunction { c });
    }
    assert!(opts.max_iter >= 1, "max_iter must be at least 1");
    debug_assert!(opts.epsilon >= 0.0, "damping must be nonnegative");

    let mut guard = match bracket {
        Some(br) => Some(BracketGuard::new(br, coeffs, t0)?),
        None => None,
    };
    let mut ctx = if opts.record_tape {
        Some(TapeCtx::new(coeffs, t0))
    } else {
        None
    };
    if let (Some(g), Some(ctx)) = (guard.as_mut(), ctx.as_mut()) {
        // Endpoints are given data, not functions of the coefficients: they
        // enter the tape as constants (so no gradient flows through them).
        g.lo_node = Some(ctx.tape.konst(g.lo));
        g.hi_node = Some(ctx.tape.konst(g.hi));
    }

    let pmax = 1.0_f64.max(a.abs()).max(b.abs()).max(c.abs());
    let threshold = if opts.tol > 0.0 {
        let f0 = residual_mag(coeffs, t0) / pmax;
        Some(opts.tol * (1.0 + f0))
    } else {
        None
    };

    let mut t = t0;
    let mut iterations = 0usize;
    let mut substitutions = 0usize;
    let mut stopped = false;

    for n in 1..=opts.max_iter {
        let candidate = match ctx.as_mut() {
            Some(ctx) => ctx.step(coeffs, opts.epsilon),
            None => step_values(a, b, c, t.0, t.1, opts.epsilon),
        };
        let mut accepted = candidate;

        if let Some(g) = guard.as_mut() {
            let coord = g.coord_of(candidate);
            // NaN or out-of-interval candidates both fail this test and get
            // the midpoint instead.
            let inside = coord > g.lo && coord < g.hi;
            let new_coord = if inside {
                coord
            } else {
                substitutions += 1;
                match ctx.as_mut() {
                    Some(ctx) => ctx.substitute_midpoint(g),
                    None => 0.5 * (g.lo + g.hi),
                }
            };
            accepted = if g.side.is_real_axis() {
                (new_coord, candidate.1)
            } else {
                (g.vertex, new_coord)
            };
            if let Some(ctx) = ctx.as_mut() {
                // Pin the vertex line on the tape too, if the planar step
                // drifted off it in the last place.
                if !g.side.is_real_axis() && ctx.tape.value_at(ctx.tr) != g.vertex {
                    ctx.tr = ctx.tape.konst(g.vertex);
                }
            }
            let x_node = ctx.as_ref().map(|ctx| {
                if g.side.is_real_axis() {
                    ctx.tr
                } else {
                    ctx.ti
                }
            });
            g.absorb(coeffs, new_coord, x_node);
        }

        t = accepted;
        iterations = n;

        if let Some(thr) = threshold {
            if residual_mag(coeffs, t) / pmax <= thr {
                stopped = true;
                break;
            }
        }
    }

    let tape = ctx.map(|mut ctx| {
        let (tr, ti) = (ctx.tr, ctx.ti);
        ctx.tape.set_outputs(tr, ti);
        ctx.tape
    });
    let run = NewtonRun {
        root: label_root(coeffs, t),
        iterations,
        stopped_by_tolerance: stopped,
        bisection_substitutions: substitutions,
        final_state: NewtonState::at(coeffs, t, iterations, opts.epsilon),
        tape,
    };
    if threshold.is_some() && !stopped {
        return Err(NewtonError::MaxIterExhausted { run: Box::new(run) });
    }
    Ok(run)
}

/// Result of [`bisect`].
#[derive(Debug, Clone)]
pub struct BisectionRun {
    /// Midpoints in evaluation order; the last one is the returned root
    /// estimate `t_n`.
    pub midpoints: Vec<f64>,
    /// Endpoint weight of `t_n` in the original bracket:
    /// `eta = (E_right - t_n) / (E_right - E_left)`, so that
    /// `t_n = eta * E_left + (1 - eta) * E_right`.
    pub eta: f64,
    /// True when a midpoint evaluated to an exact zero and stopped the loop
    /// early.
    pub hit_exact_zero: bool,
}

impl BisectionRun {
    /// The final root estimate (last midpoint).
    pub fn root_estimate(&self) -> f64 {
        *self
            .midpoints
            .last()
            .expect("bisect always records at least one midpoint")
    }
}

/// Plain bisection on the bracket's slice: `n_steps` halvings (at least one),
/// stopping early only on an exact zero.
///
/// Returns the midpoint sequence together with the endpoint weight `eta` of
/// the final estimate, expressed against the *original* endpoints. For a
/// bracket built as `[vertex, vertex + K * sqrt(b^2 - 4ac) / (2a)]` the
/// estimate converges to the root at relative position `1/K`, so `eta`
/// converges to `1 - 1/K` — a number that does not move when the
/// coefficients do, which is the point the endpoint-weight representation
/// makes measurable.
pub fn bisect(
    bracket: &BisectionBracket,
    coeffs: &QuadCoeffs,
    n_steps: usize,
) -> Result<BisectionRun, NewtonError> {
    if coeffs.a == 0.0 && coeffs.b == 0.0 {
        return Err(NewtonError::ConstantFunction { c: coeffs.c });
    }
    assert!(n_steps >= 1, "bisection needs at least one step");
    let vertex = validate_bracket(bracket, coeffs, None)?;

    let mut lo = bracket.e_left;
    let mut hi = bracket.e_right;
    let mut g_hi = slice_residual(bracket.side, coeffs, vertex, hi);
    let mut midpoints = Vec::with_capacity(n_steps.min(128));
    let mut hit_exact_zero = false;

    for _ in 0..n_steps {
        let mid = 0.5 * (lo + hi);
        midpoints.push(mid);
        let g_mid = slice_residual(bracket.side, coeffs, vertex, mid);
        if g_mid == 0.0 {
            hit_exact_zero = true;
            break;
        }
        if (g_mid > 0.0) == (g_hi > 0.0) {
            hi = mid;
            g_hi = g_mid;
        } else {
            lo = mid;
        }
    }

    let t_n = *midpoints.last().expect("n_steps >= 1");
    let eta = (bracket.e_right - t_n) / (bracket.e_right - bracket.e_left);
    Ok(BisectionRun {
        midpoints,
        eta,
        hit_exact_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::backprop_through_newton;

    fn q(a: f64, b: f64, c: f64) -> QuadCoeffs {
        QuadCoeffs::raw(a, b, c)
    }

    #[test]
    fn converges_to_simple_real_root() {
        let coeffs = q(1.0, 0.0, -0.25);
        let run = newton_solve(&coeffs, (1.0, 0.0), &NewtonOptions::to_tolerance(1e-14), None)
            .unwrap();
        assert!((run.root.t_r - 0.5).abs() <= 1e-14);
        assert_eq!(run.root.t_i, 0.0);
        assert!(!run.root.is_complex);
        assert_eq!(run.root.branch, Branch::Plus);
        assert!(run.stopped_by_tolerance);
        assert!(run.iterations <= 10);
        assert_eq!(run.bisection_substitutions, 0);
    }

    #[test]
    fn converges_to_complex_root_from_vertex_line() {
        let coeffs = q(1.0, 0.0, 0.25);
        let run = newton_solve(&coeffs, (0.0, 1.0), &NewtonOptions::to_tolerance(1e-14), None)
            .unwrap();
        assert_eq!(run.root.t_r, 0.0); // the vertex line is exactly fixed
        assert!((run.root.t_i - 0.5).abs() <= 1e-14);
        assert!(run.root.is_complex);
        assert_eq!(run.root.branch, Branch::Plus);
    }

    #[test]
    fn affine_solve_is_one_iteration() {
        let coeffs = q(0.0, 2.0, -1.0);
        let run = newton_solve(&coeffs, (7.0, 3.0), &NewtonOptions::to_tolerance(1e-13), None)
            .unwrap();
        assert_eq!(run.iterations, 1);
        assert_eq!(run.root.t_r, 0.5);
        assert_eq!(run.root.t_i, 0.0);
        assert_eq!(run.root.branch, Branch::Plus);
        assert_eq!(run.root.pseudo_sign_a, Some(Sign::Positive));
    }

    #[test]
    fn constant_function_is_rejected() {
        let err = newton_solve(
            &q(0.0, 0.0, 5.0),
            (1.0, 0.0),
            &NewtonOptions::default(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, NewtonError::ConstantFunction { c } if c == 5.0));
    }

    #[test]
    fn exhaustion_carries_the_partial_run() {
        // t^2 + 1 has no real roots; from the real axis the iteration can
        // never meet the tolerance.
        let coeffs = q(1.0, 0.0, 1.0);
        let opts = NewtonOptions {
            max_iter: 50,
            tol: 1e-13,
            ..Default::default()
        };
        match newton_solve(&coeffs, (2.0, 0.0), &opts, None) {
            Err(NewtonError::MaxIterExhausted { run }) => {
                assert_eq!(run.iterations, 50);
                assert!(!run.stopped_by_tolerance);
                assert_eq!(run.root.t_i, 0.0);
            }
            other => panic!("expected MaxIterExhausted, got {other:?}"),
        }
    }

    #[test]
    fn fixed_iteration_mode_never_stops_early() {
        // Budgeted mode on a run that passes through an exact zero of f:
        // (t-1)^2 from 1.5 walks 1.25, 1.125, ... — no exact zero, so use the
        // affine case where the first step lands exactly on the root and
        // verify the run still takes all its steps.
        let coeffs = q(0.0, 2.0, -1.0);
        let run = newton_solve(&coeffs, (7.0, 0.0), &NewtonOptions::fixed_iterations(5), None)
            .unwrap();
        assert_eq!(run.iterations, 5);
        assert!(!run.stopped_by_tolerance);
        assert_eq!(run.root.t_r, 0.5);
    }

    #[test]
    fn truncated_run_near_repeated_root_matches_frozen_trajectory() {
        // b = -2, c = 1 + eps with eps = -7.203e-9: a pair of real roots
        // split by 2*sqrt(-eps) around 1. Ten budgeted steps from 10.5 land
        // at a frozen iterate, and the naive sensitivity estimate -1/(2t + b)
        // at that iterate is far from the truth — these exact values anchor
        // the downstream sensitivity tables.
        let eps = -7.203e-9;
        let coeffs = q(1.0, -2.0, 1.0 + eps);
        let opts = NewtonOptions::fixed_iterations(10).with_tape();
        let run = newton_solve(&coeffs, (10.5, 0.0), &opts, None).unwrap();
        assert_eq!(run.iterations, 10);
        assert_eq!(run.root.t_r, 1.0092776025508354);
        let t = run.root.t_r;
        let estimate = -t / (2.0 * t + coeffs.b);
        assert_eq!(estimate, -54.393233436150595);

        let tape = run.tape.as_ref().unwrap();
        assert!(tape.replay().is_ok());
        let rows = backprop_through_newton(tape);
        assert_eq!(rows[0][1], -36.42890111307131);
        assert_eq!(rows[0][2], -35.92938938070035);
        assert_eq!(rows[1], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn converged_run_backprop_agrees_with_estimate() {
        // Same polynomial, 100 steps: now converged, and the recorded-graph
        // gradient coincides with the local estimate to the last bit.
        let eps = -7.203e-9;
        let coeffs = q(1.0, -2.0, 1.0 + eps);
        let opts = NewtonOptions::fixed_iterations(100).with_tape();
        let run = newton_solve(&coeffs, (10.5, 0.0), &opts, None).unwrap();
        let rows = backprop_through_newton(run.tape.as_ref().unwrap());
        assert_eq!(rows[0][1], -5891.829321791568);
        let t = run.root.t_r;
        assert_eq!(-t / (2.0 * t + coeffs.b), -5891.829321791568);
    }

    #[test]
    fn backprop_matches_implicit_derivative_when_converged() {
        // t^2 - 0.01 from 2.0: converged after 100 steps; d t/d c gives the
        // implicit value -1/(2t) exactly at this special point.
        let coeffs = q(1.0, 0.0, -1e-2);
        let opts = NewtonOptions::fixed_iterations(100).with_tape();
        let run = newton_solve(&coeffs, (2.0, 0.0), &opts, None).unwrap();
        assert_eq!(run.root.t_r, 0.1);
        let rows = backprop_through_newton(run.tape.as_ref().unwrap());
        assert_eq!(rows[0][2], -5.0);
    }

    #[test]
    fn taped_and_untaped_runs_are_bit_identical() {
        let cases = [
            (q(1.0, 0.4, -1.1), (2.0, 0.0), 0.0),
            (q(1.0, 0.4, -1.1), (1.7, 0.9), 0.0),
            (q(0.75, -0.3, 0.9), (-0.2, -1.3), 0.0),
            (q(1.0, 0.4, -1.1), (2.0, 0.0), 0.3),
            (q(0.0, -1.5, 0.6), (4.0, 2.0), 0.0),
        ];
        for (coeffs, t0, eps) in cases {
            let opts = NewtonOptions::fixed_iterations(12).with_epsilon(eps);
            let plain = newton_solve(&coeffs, t0, &opts, None).unwrap();
            let taped = newton_solve(&coeffs, t0, &opts.with_tape(), None).unwrap();
            assert_eq!(plain.root.t_r.to_bits(), taped.root.t_r.to_bits());
            assert_eq!(plain.root.t_i.to_bits(), taped.root.t_i.to_bits());
            let tape = taped.tape.as_ref().unwrap();
            assert!(tape.replay().is_ok());
            let (out_r, out_i) = tape.outputs().unwrap();
            assert_eq!(
                tape.nodes()[out_r].value.to_bits(),
                plain.root.t_r.to_bits()
            );
            assert_eq!(
                tape.nodes()[out_i].value.to_bits(),
                plain.root.t_i.to_bits()
            );
        }
    }

    #[test]
    fn bracket_without_sign_change_is_rejected() {
        let coeffs = q(1.0, 0.0, -1.0);
        let bracket = BisectionBracket::new(2.0, 4.0, BracketSide::RealAxisRightOfVertex);
        let err =
            newton_solve(&coeffs, (3.0, 0.0), &NewtonOptions::default(), Some(&bracket))
                .unwrap_err();
        assert!(matches!(err, NewtonError::InvalidBracket { .. }));
    }

    #[test]
    fn bracket_requires_start_on_its_slice() {
        let coeffs = q(1.0, 0.0, -1.0);
        let bracket = BisectionBracket::new(0.0, 4.0, BracketSide::RealAxisRightOfVertex);
        let err = newton_solve(
            &coeffs,
            (2.0, 0.5),
            &NewtonOptions::default(),
            Some(&bracket),
        )
        .unwrap_err();
        assert!(matches!(err, NewtonError::InvalidBracket { .. }));

        let coeffs = q(1.0, 0.0, 0.25);
        let bracket = BisectionBracket::new(0.1, 3.0, BracketSide::ImagAxisUpper);
        let err = newton_solve(
            &coeffs,
            (0.5, 2.0), // not on the vertex line tR == 0
            &NewtonOptions::default(),
            Some(&bracket),
        )
        .unwrap_err();
        assert!(matches!(err, NewtonError::InvalidBracket { .. }));
    }

    #[test]
    fn bracket_substitutes_midpoint_and_converges_inside() {
        // From 0.05 the derivative is tiny and the first Newton candidate
        // flies to ~10, outside [0, 4]; the guard replaces it by 2 and the
        // run then converges to 1 without ever leaving the bracket.
        let coeffs = q(1.0, 0.0, -1.0);
        let bracket = BisectionBracket::new(0.0, 4.0, BracketSide::RealAxisRightOfVertex);
        let run = newton_solve(
            &coeffs,
            (0.05, 0.0),
            &NewtonOptions::to_tolerance(1e-13),
            Some(&bracket),
        )
        .unwrap();
        assert!(run.bisection_substitutions >= 1);
        assert!((run.root.t_r - 1.0).abs() <= 1e-12);
        assert!(run.root.t_r >= 0.0 && run.root.t_r <= 4.0);
        assert!(run.stopped_by_tolerance);
    }

    #[test]
    fn bracketed_run_with_tape_still_replays() {
        let coeffs = q(1.0, 0.0, -1.0);
        let bracket = BisectionBracket::new(0.0, 4.0, BracketSide::RealAxisRightOfVertex);
        let opts = NewtonOptions::to_tolerance(1e-13).with_tape();
        let run = newton_solve(&coeffs, (0.05, 0.0), &opts, Some(&bracket)).unwrap();
        assert!(run.bisection_substitutions >= 1);
        let tape = run.tape.as_ref().unwrap();
        assert!(tape.replay().is_ok());
        let rows = backprop_through_newton(tape);
        assert!(rows[0].iter().all(|g| g.is_finite()));
    }

    #[test]
    fn imag_axis_bracket_converges_on_vertex_line() {
        let coeffs = q(1.0, 0.0, 0.25);
        let bracket = BisectionBracket::new(0.1, 3.0, BracketSide::ImagAxisUpper);
        let run = newton_solve(
            &coeffs,
            (0.0, 2.9),
            &NewtonOptions::to_tolerance(1e-13),
            Some(&bracket),
        )
        .unwrap();
        assert_eq!(run.root.t_r, 0.0);
        assert!((run.root.t_i - 0.5).abs() <= 1e-9);
        assert!(run.root.is_complex);
        assert!(run.root.t_i >= 0.1 && run.root.t_i <= 3.0);
    }

    #[test]
    fn bisect_eta_pins() {
        // f(1) == 0 exactly: midpoints 2, 1, then stop; eta = 3/4.
        let run = bisect(
            &BisectionBracket::new(0.0, 4.0, BracketSide::RealAxisRightOfVertex),
            &q(1.0, 0.0, -1.0),
            40,
        )
        .unwrap();
        assert_eq!(run.midpoints, vec![2.0, 1.0]);
        assert!(run.hit_exact_zero);
        assert_eq!(run.eta, 0.75);
        assert_eq!(run.root_estimate(), 1.0);

        // (t-1)^2 - 0.25 on [1, 2]: first midpoint 1.5 is the root.
        let run = bisect(
            &BisectionBracket::new(1.0, 2.0, BracketSide::RealAxisRightOfVertex),
            &q(1.0, -2.0, 0.75),
            40,
        )
        .unwrap();
        assert_eq!(run.midpoints, vec![1.5]);
        assert_eq!(run.eta, 0.5);

        // Immediate exact hit on [0, 2].
        let run = bisect(
            &BisectionBracket::new(0.0, 2.0, BracketSide::RealAxisRightOfVertex),
            &q(1.0, 0.0, -1.0),
            40,
        )
        .unwrap();
        assert_eq!(run.midpoints, vec![1.0]);
        assert_eq!(run.eta, 0.5);
    }

    #[test]
    fn bisect_eta_converges_to_endpoint_weight() {
        // Root at sqrt(2), vertex at 0, right endpoint 3 * sqrt(2): the
        // estimate sits at relative position 1/3, so eta -> 2/3.
        let coeffs = q(1.0, 0.0, -2.0);
        let e_right = 3.0 * 2.0_f64.sqrt();
        let run = bisect(
            &BisectionBracket::new(0.0, e_right, BracketSide::RealAxisRightOfVertex),
            &coeffs,
            60,
        )
        .unwrap();
        assert!((run.eta - (1.0 - 1.0 / 3.0)).abs() <= 2f64.powi(-40));
        assert!(!run.hit_exact_zero);
    }

    #[test]
    fn bisect_on_imaginary_axis() {
        let coeffs = q(1.0, 0.0, 0.25);
        let run = bisect(
            &BisectionBracket::new(0.1, 3.0, BracketSide::ImagAxisUpper),
            &coeffs,
            60,
        )
        .unwrap();
        assert!((run.root_estimate() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn bisect_rejects_bad_brackets() {
        let coeffs = q(1.0, 0.0, -1.0);
        let err = bisect(
            &BisectionBracket::new(2.0, 4.0, BracketSide::RealAxisRightOfVertex),
            &coeffs,
            10,
        )
        .unwrap_err();
        assert!(matches!(err, NewtonError::InvalidBracket { .. }));

        let err = bisect(
            &BisectionBracket::new(4.0, 2.0, BracketSide::RealAxisRightOfVertex),
            &coeffs,
            10,
        )
        .unwrap_err();
        assert!(matches!(err, NewtonError::InvalidBracket { .. }));

        // Imaginary-axis bracket needs a != 0.
        let err = bisect(
            &BisectionBracket::new(0.1, 3.0, BracketSide::ImagAxisUpper),
            &q(0.0, 1.0, 0.25),
            10,
        )
        .unwrap_err();
        assert!(matches!(err, NewtonError::InvalidBracket { .. }));
    }

    #[test]
    fn bracket_side_names_are_stable() {
        assert_eq!(
            BracketSide::RealAxisLeftOfVertex.as_str(),
            "real_axis_left_of_vertex"
        );
        assert_eq!(BracketSide::ImagAxisLower.to_string(), "imag_axis_lower");
    }
}
