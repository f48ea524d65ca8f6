//! Robust quadratic root solver and implicit-layer derivatives.
//!
//! Solves `a·t² + b·t + c = 0` for *any* finite coefficients — including
//! `a = 0`, `a = b = 0`, and `a = b = c = 0` — by lifting roots to pairs
//! `(tR, tI) ∈ ℝ²` and saturating unbounded roots at `±t_max` instead of
//! letting them escape to ±∞. The derivative of each root with respect to
//! the coefficient vector is computed from the implicit equation (never by
//! differentiating an iteration), with denominator sign-clamping and robust
//! division keeping every entry finite near repeated roots and degenerate
//! leading coefficients.
//!
//! Conventions:
//!
//! * Branch `plus`/`minus` follows the ± of the quadratic formula, with
//!   de-rationalization for the real case; `plus` carries `tI ≥ 0` for
//!   complex pairs.
//! * A zero leading coefficient gets a *pseudo-sign* so branch labels and
//!   clamp directions stay well defined (positive by the arbitrary
//!   convention when `b ≠ 0`, opposite `sign(c)` when `a = b = 0 ∧ c ≠ 0`).
//! * The solver consumes raw (un-normalized) coefficients; normalization
//!   exists for derivative conditioning and is chain-ruled separately.

use numkit::{clamp_signed, robust_div, robust_div_bounded, RobustDivConfig, Sign};

/// Root label.
///
/// The quadratic solver produces only `Plus` and `Minus`; `Mid` exists for
/// the cubic, which shares this label space (its middle real root).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Mid,
    Minus,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Mid => "mid",
            Branch::Minus => "minus",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A root lifted to ℝ²: separate real and imaginary parts, plus labeling
/// metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarRoot {
    /// Real part (saturated at ±t_max for lost roots).
    pub t_r: f64,
    /// Imaginary part; exactly 0.0 for real roots.
    pub t_i: f64,
    pub branch: Branch,
    /// Pseudo-sign assigned to the leading coefficient when it is zero;
    /// `None` when the leading coefficient is nonzero.
    pub pseudo_sign_a: Option<Sign>,
    /// True iff `t_i != 0`; complex roots come in conjugate pairs.
    pub is_complex: bool,
}

impl PlanarRoot {
    /// Construct a real root. Low-level: callers (this solver, the cubic
    /// solver after deflation/relabeling) are responsible for consistency.
    pub fn real(t_r: f64, branch: Branch, pseudo: Option<Sign>) -> Self {
        Self {
            t_r,
            t_i: 0.0,
            branch,
            pseudo_sign_a: pseudo,
            is_complex: false,
        }
    }

    /// Construct one member of a conjugate pair (`t_i` may be either sign).
    pub fn complex(t_r: f64, t_i: f64, branch: Branch) -> Self {
        Self {
            t_r,
            t_i,
            branch,
            pseudo_sign_a: None,
            is_complex: true,
        }
    }

    /// |a z² + b z + c| for z = t_r + i·t_i — test/diagnostic helper.
    pub fn residual(&self, a: f64, b: f64, c: f64) -> f64 {
        let zr2 = self.t_r * self.t_r - self.t_i * self.t_i;
        let zi2 = 2.0 * self.t_r * self.t_i;
        let fr = a * zr2 + b * self.t_r + c;
        let fi = a * zi2 + b * self.t_i;
        fr.hypot(fi)
    }
}

/// Quadratic coefficients with normalization provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Whether these values came out of [`normalize`].
    pub normalized: bool,
    /// The (signed) divisor applied by normalization; 1.0 when untouched.
    pub p_max: f64,
    /// Index of the max-magnitude entry in the original vector.
    pub k: usize,
}

impl QuadCoeffs {
    /// Wrap raw coefficients without normalizing.
    pub fn raw(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            normalized: false,
            p_max: 1.0,
            k: 0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

/// Reduced form of the quadratic: the single parameter `c̃ = −b²/4 + a·c`.
///
/// `sign(c_tilde)` classifies the root configuration: ≤ 0 real pair,
/// ≥ 0 conjugate complex pair, 0 exactly on the merge boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedQuad {
    pub c_tilde: f64,
}

/// 2×3 derivative of a root w.r.t. (a, b, c), with provenance flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootJacobianQuad {
    /// Row 0: ∂tR/∂(a,b,c); row 1: ∂tI/∂(a,b,c).
    pub rows: [[f64; 3]; 2],
    /// Per-row: whether the denominator needed sign repair.
    pub clamped: [bool; 2],
    /// Per-row: the magnitude factored out of the numerator before robust
    /// division (1.0 when no factoring was needed).
    pub factored_scale: [f64; 2],
}

/// Scale coefficients so the maximum magnitude is ≤ 1, returning the scaling
/// Jacobian ∂p/∂p_orig.
///
/// When `max |p_orig| > 1` the vector is divided through by its (signed)
/// max-magnitude entry `p_max`; the Jacobian is then
/// `(1/p_max²)·(p_max·I − p_orig·ê_kᵀ)` with `ê_k` the unit vector of the
/// divided-by entry (that entry becomes constant ±1, so its column drops
/// out). Already-bounded input is returned unchanged with the identity
/// Jacobian and `p_max = 1`.
pub fn normalize(p_orig: [f64; 3]) -> (QuadCoeffs, [[f64; 3]; 3]) {
    let (k, p_max_abs) = argmax_abs(&p_orig);
    let mut jac = [[0.0; 3]; 3];
    if p_max_abs <= 1.0 {
        for (i, row) in jac.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let coeffs = QuadCoeffs {
            a: p_orig[0],
            b: p_orig[1],
            c: p_orig[2],
            normalized: true,
            p_max: 1.0,
            k,
        };
        return (coeffs, jac);
    }
    let p_max = p_orig[k]; // signed divisor makes the Jacobian formula exact
    let inv = 1.0 / p_max;
    let inv2 = inv * inv;
    for i in 0..3 {
        jac[i][i] = inv;
        jac[i][k] -= p_orig[i] * inv2;
    }
    let coeffs = QuadCoeffs {
        a: p_orig[0] * inv,
        b: p_orig[1] * inv,
        c: p_orig[2] * inv,
        normalized: true,
        p_max,
        k,
    };
    (coeffs, jac)
}

fn argmax_abs(v: &[f64]) -> (usize, f64) {
    let mut k = 0;
    let mut best = v[0].abs();
    for (i, x) in v.iter().enumerate().skip(1) {
        if x.abs() > best {
            best = x.abs();
            k = i;
        }
    }
    (k, best)
}

/// Solve `a t² + b t + c = 0`, total over all finite coefficients.
///
/// Returns `(plus, minus)`. Unbounded roots saturate at `±cfg.t_max`;
/// degenerate leading coefficients produce pseudo-signs per the conventions
/// in the module docs.
pub fn solve(coeffs: &QuadCoeffs, cfg: &RobustDivConfig) -> (PlanarRoot, PlanarRoot) {
    let (a, b, c) = (coeffs.a, coeffs.b, coeffs.c);
    let t_max = cfg.t_max;

    if a == 0.0 {
        if b == 0.0 {
            if c == 0.0 {
                // everything is a root; report a repeated root at 0
                let pseudo = Some(Sign::Positive);
                return (
                    PlanarRoot::real(0.0, Branch::Plus, pseudo),
                    PlanarRoot::real(0.0, Branch::Minus, pseudo),
                );
            }
            // no root at all: both roots lost to ±∞. The pseudo-sign is set
            // opposite sign(c) so that the limit a → pseudo-sign·0 keeps
            // real roots ±sqrt(-c/a).
            let pseudo_sign = if c > 0.0 { Sign::Negative } else { Sign::Positive };
            let big = match pseudo_sign {
                Sign::Positive => t_max,
                Sign::Negative => -t_max,
            };
            return (
                PlanarRoot::real(big, Branch::Plus, Some(pseudo_sign)),
                PlanarRoot::real(-big, Branch::Minus, Some(pseudo_sign)),
            );
        }
        // linear: one finite root −c/b, one lost to −sign(b)·∞ (the limit of
        // (−b ∓ |b|)/(2a) as a → 0⁺ — pseudo-sign positive by convention).
        let pseudo = Some(Sign::Positive);
        let finite = robust_div_bounded(-c, b, t_max);
        let lost = -b.signum() * t_max;
        return if b > 0.0 {
            (
                PlanarRoot::real(finite, Branch::Plus, pseudo),
                PlanarRoot::real(lost, Branch::Minus, pseudo),
            )
        } else {
            (
                PlanarRoot::real(lost, Branch::Plus, pseudo),
                PlanarRoot::real(finite, Branch::Minus, pseudo),
            )
        };
    }

    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        let t_r = robust_div_bounded(-b, 2.0 * a, t_max);
        let t_i = robust_div_bounded((-disc).sqrt(), (2.0 * a).abs(), t_max);
        return (
            PlanarRoot::complex(t_r, t_i, Branch::Plus),
            PlanarRoot::complex(t_r, -t_i, Branch::Minus),
        );
    }

    if b == 0.0 {
        // ±sqrt(−c/a) via separate square roots: b²−4ac can over/underflow
        // where the quotient itself is perfectly representable.
        let r = robust_div_bounded(c.abs().sqrt(), a.abs().sqrt(), t_max);
        let (tp, tm) = if a > 0.0 { (r, -r) } else { (-r, r) };
        return (
            PlanarRoot::real(tp, Branch::Plus, None),
            PlanarRoot::real(tm, Branch::Minus, None),
        );
    }

    // de-rationalized quadratic formula: pick for each branch the variant
    // whose numerator adds same-signed quantities
    let sq = disc.sqrt();
    let t_plus = if b <= 0.0 {
        robust_div_bounded(-b + sq, 2.0 * a, t_max)
    } else {
        robust_div_bounded(2.0 * c, -b - sq, t_max)
    };
    let t_minus = if b >= 0.0 {
        robust_div_bounded(-b - sq, 2.0 * a, t_max)
    } else {
        robust_div_bounded(2.0 * c, -b + sq, t_max)
    };
    (
        PlanarRoot::real(t_plus, Branch::Plus, None),
        PlanarRoot::real(t_minus, Branch::Minus, None),
    )
}

/// Reduced parameter `c̃ = −b²/4 + a·c`.
pub fn reduced(coeffs: &QuadCoeffs) -> ReducedQuad {
    ReducedQuad {
        c_tilde: -coeffs.b * coeffs.b / 4.0 + coeffs.a * coeffs.c,
    }
}

/// Implicit-layer derivative ∂(tR,tI)/∂(a,b,c) of one root.
///
/// Real roots use `−[tR², tR, 1] / (2a·tR + b)` with the denominator
/// sign-clamped **positive for plus, negative for minus** — the ± of the
/// root formula fixes the denominator sign at the true root independently
/// of sign(a), and near a merge the floating-point value can land on the
/// wrong side. The largest numerator magnitude is factored into the scalar
/// before robust division so direction components stay ≤ 1.
///
/// Complex roots need no clamping (the denominator sign comes from `a` and
/// `tI` directly):
/// row tR = `−[2tR, 1, 0]/(2a)` (the common `tI` cancelled analytically),
/// row tI = `[tR²−tI², tR, 1]/(2a·tI)` with the difference of squares in
/// factored form.
///
/// At a repeated root (`c̃ == 0`) the magnitude saturates at `M`: direction,
/// not magnitude, is the useful part there. The true one-sided derivative is
/// indeterminate at the merging-to-zero root; the clamped direction is the
/// documented stand-in.
pub fn jacobian(coeffs: &QuadCoeffs, root: &PlanarRoot, cfg: &RobustDivConfig) -> RootJacobianQuad {
    let (a, b) = (coeffs.a, coeffs.b);
    let tr = root.t_r;
    let ti = root.t_i;

    if ti == 0.0 {
        let den_raw = 2.0 * a * tr + b;
        let sign = match root.branch {
            Branch::Minus => Sign::Negative,
            _ => Sign::Positive,
        };
        let den = clamp_signed(den_raw, sign, 0.0);
        // Negated comparisons on purpose: a NaN denominator counts as clamped.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let clamped = match sign {
            Sign::Positive => !(den_raw > 0.0),
            Sign::Negative => !(den_raw < 0.0),
        };
        let f = (tr * tr).max(1.0);
        let scal = robust_div(-f, den, cfg);
        let rows = [
            [scal * (tr * tr / f), scal * (tr / f), scal * (1.0 / f)],
            [0.0, 0.0, 0.0],
        ];
        return RootJacobianQuad {
            rows,
            clamped: [clamped, false],
            factored_scale: [f, 1.0],
        };
    }

    // complex pair: tI ≠ 0, so a ≠ 0 for roots produced by `solve`
    let m1 = (2.0 * tr).abs().max(1.0);
    let s1 = robust_div(-m1, 2.0 * a, cfg);
    let row_r = [s1 * (2.0 * tr / m1), s1 * (1.0 / m1), 0.0];

    let dsq = numkit::factored_diff_sq(tr, ti, 1.0, 1.0);
    let m2 = dsq.abs().max(tr.abs()).max(1.0);
    let s2 = robust_div(m2, 2.0 * a * ti, cfg);
    let row_i = [s2 * (dsq / m2), s2 * (tr / m2), s2 * (1.0 / m2)];

    RootJacobianQuad {
        rows: [row_r, row_i],
        clamped: [false, false],
        factored_scale: [m1, m2],
    }
}
