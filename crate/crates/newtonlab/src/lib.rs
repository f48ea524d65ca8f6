//! Newton iteration on the lifted root plane, with a recordable tape.
//!
//! This crate drives the damped Newton update for quadratics whose roots
//! live on the plane `t = (tR, tI)` (see the `quadratic` crate), and makes
//! the *iteration itself* a differentiable, inspectable object:
//!
//! * [`newton_step`] / [`NewtonState`] — one damped update, with the exact
//!   fixed-line guarantees (`tI == 0` stays put; so does the vertex line
//!   whenever `2a*tR + b` evaluates to zero).
//! * [`newton_solve`] / [`NewtonOptions`] — the driver: scaled-residual
//!   stopping, a fixed-iteration mode for studying truncated runs, optional
//!   safeguarded bracketing on one-dimensional slices
//!   ([`BisectionBracket`]), and optional recording.
//! * [`Tape`] / [`backprop_through_newton`] — a minimal reverse-mode tape
//!   over `f64` primitives. Replay reproduces the recorded run bit-for-bit;
//!   the reverse sweep differentiates the final iterate with respect to
//!   `(a, b, c)`. Branch decisions (convergence tests, bracket
//!   substitutions) enter as constants, which is exactly the behavior whose
//!   consequences the associated experiments measure.
//! * [`bisect`] — plain bisection on a slice, returning the midpoint
//!   sequence and the endpoint weight `eta` of the final estimate.
//!
//! ```
//! use newtonlab::{newton_solve, NewtonOptions};
//! use quadratic::QuadCoeffs;
//!
//! let coeffs = QuadCoeffs::raw(1.0, 0.0, -0.25);
//! let run = newton_solve(&coeffs, (1.0, 0.0), &NewtonOptions::to_tolerance(1e-14), None)
//!     .unwrap();
//! assert!((run.root.t_r - 0.5).abs() <= 1e-14);
//! ```

mod solve;
mod state;
mod tape;

pub use solve::{
    bisect, newton_solve, BisectionBracket, BisectionRun, BracketSide, NewtonError,
    NewtonOptions, NewtonRun, DEFAULT_MAX_ITER, DEFAULT_NEWTON_TOL,
};
pub use state::{newton_step, NewtonState};
pub use tape::{backprop_through_newton, Node, ReplayMismatch, SeedSlot, Tape, TapeOp};
