//! Robust cubic root solver and implicit-layer derivatives.
//!
//! Solves `q·t³ + a·t² + b·t + c = 0` for *any* finite coefficients. The
//! three roots are lifted to pairs `(tR, tI) ∈ ℝ²` and labeled
//! `minus ≤ mid ≤ plus` (by real part, with a fixed tie rule for complex
//! pairs); roots lost to ±∞ as the leading coefficient vanishes saturate at
//! `±t_max` instead of escaping. Derivatives with respect to the coefficient
//! vector come from the implicit equation — one of four closed-form
//! expressions chosen by the local geometry — with denominator sign-clamping
//! and robust division keeping every entry finite near repeated roots,
//! unbounded roots, and the real↔complex transition.
//!
//! Pipeline:
//!
//! 1. [`normalize_cubic`] scales the coefficient vector so its largest
//!    magnitude is ≤ 1 and flips signs so the leading coefficient is ≥ 0
//!    (roots are invariant; conditioning and bracket bounds are not).
//! 2. [`solve_cubic`] finds one real root by safeguarded Newton iteration on
//!    a monotone partition of `[−3/q, 3/q]` — or of the *reversed* cubic in
//!    `s = 1/t` when `q` is tiny but the constant term is not — picks the
//!    candidate whose deflated quadratic is farthest from a repeated root,
//!    and hands that quadratic to the [`quadratic`] solver.
//! 3. [`jacobian_cubic`] evaluates the implicit derivative at any root so
//!    gradients exist even where the solve itself had to saturate or clamp.
//!
//! The reduced forms ([`to_hat`], [`to_tilde`], [`hat_from_tilde`],
//! [`roots_canonical`]) expose the two-parameter and canonical
//! one-real-parameter views of the cubic used for analysis.

use numkit::RobustDivConfig;
pub use numkit::Sign;
pub use quadratic::{Branch, PlanarRoot};

mod jacobian;
mod solve;
mod transform;

pub use jacobian::{jacobian_cubic, CubicFormula, RootJacobianCubic};
pub use solve::{solve_cubic, CubicSolveError, DEFAULT_NEWTON_TOL, MAX_NEWTON_ITERS};
pub use transform::{
    hat_from_tilde, roots_canonical, to_hat, to_tilde, CanonicalCubicTilde, ReducedCubicHat,
};

/// Leading coefficients below this threshold (after normalization) are too
/// small to bracket against: the solver switches to the reversed cubic or
/// the degenerate quadratic treatment. Equal to 2⁻²⁰.
pub const Q_EPS: f64 = 9.5367431640625e-7;

/// Cubic coefficients with normalization provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Whether these values came out of [`normalize_cubic`].
    pub normalized: bool,
    /// Whether normalization flipped all signs (leading coefficient < 0).
    pub sign_flipped: bool,
    /// The signed divisor applied by normalization — magnitude scaling and
    /// the sign flip combined; 1.0 when untouched.
    pub p_max: f64,
    /// Index of the max-magnitude entry in the original vector.
    pub k: usize,
}

impl CubicCoeffs {
    /// Wrap raw coefficients without normalizing.
    pub fn raw(q: f64, a: f64, b: f64, c: f64) -> Self {
        Self {
            q,
            a,
            b,
            c,
            normalized: false,
            sign_flipped: false,
            p_max: 1.0,
            k: 0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q, self.a, self.b, self.c]
    }
}

/// The three labeled roots of a cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRootSet {
    /// Roots in label order `[minus, mid, plus]`; each carries its own
    /// `branch` tag.
    pub roots: [PlanarRoot; 3],
    /// 3 when all roots are real, 1 when a conjugate pair is present.
    pub real_count: u8,
    /// Pseudo-sign assigned to `q` when the solver treated the leading term
    /// as vanishing (positive by convention, matching the `q → 0⁺` limit);
    /// `None` when `q` participated in the solve.
    pub pseudo_sign_q: Option<Sign>,
    /// Index into `roots` of the deflation root r₁ found by the iterative
    /// stage; `None` when no deflation happened (degenerate paths).
    pub deflation_choice: Option<usize>,
}

impl CubicRootSet {
    pub fn get(&self, branch: Branch) -> &PlanarRoot {
        match branch {
            Branch::Minus => &self.roots[0],
            Branch::Mid => &self.roots[1],
            Branch::Plus => &self.roots[2],
        }
    }

    pub fn minus(&self) -> &PlanarRoot {
        &self.roots[0]
    }

    pub fn mid(&self) -> &PlanarRoot {
        &self.roots[1]
    }

    pub fn plus(&self) -> &PlanarRoot {
        &self.roots[2]
    }
}

/// Scale coefficients so the maximum magnitude is ≤ 1 and the leading
/// coefficient is ≥ 0, returning the scaling Jacobian ∂p/∂p_orig.
///
/// The vector is divided by the *magnitude* of its largest entry when that
/// exceeds 1, then by −1 if the leading coefficient is (still) negative;
/// both steps combine into the signed divisor `p_max`. With `σ = ±1` the
/// local sign of `∂p_max/∂p_orig[k]`, the Jacobian is
/// `δᵢⱼ/p_max − p_orig[i]·σ/p_max² · δⱼₖ` — the divided-by entry becomes
/// constant ±1 so its column drops out. Input that needs neither step is
/// returned unchanged with the identity Jacobian.
///
/// Negative zeros in the output are canonicalized to +0.0 so downstream
/// exact-zero sign conventions see one representation.
pub fn normalize_cubic(p_orig: [f64; 4]) -> (CubicCoeffs, [[f64; 4]; 4]) {
    let mut k = 0;
    for i in 1..4 {
        if p_orig[i].abs() > p_orig[k].abs() {
            k = i;
        }
    }
    let scaled = p_orig[k].abs() > 1.0;
    let d0 = if scaled { p_orig[k].abs() } else { 1.0 };
    let flip = p_orig[0] < 0.0;
    let d = if flip { -d0 } else { d0 };

    let mut vals = [0.0; 4];
    for (i, v) in vals.iter_mut().enumerate() {
        let x = p_orig[i] / d;
        *v = if x == 0.0 { 0.0 } else { x };
    }

    let mut jac = [[0.0; 4]; 4];
    if !scaled {
        // divisor is the constant ±1
        for (i, row) in jac.iter_mut().enumerate() {
            row[i] = 1.0 / d;
        }
    } else {
        let sigma = if d == p_orig[k] { 1.0 } else { -1.0 };
        let inv = 1.0 / d;
        for (i, row) in jac.iter_mut().enumerate() {
            row[i] = inv;
            row[k] -= p_orig[i] * sigma * inv * inv;
        }
    }

    let coeffs = CubicCoeffs {
        q: vals[0],
        a: vals[1],
        b: vals[2],
        c: vals[3],
        normalized: true,
        sign_flipped: flip,
        p_max: d,
        k,
    };
    (coeffs, jac)
}

/// |q·z³ + a·z² + b·z + c| at z = tR + i·tI — test/diagnostic helper.
pub fn residual(coeffs: &CubicCoeffs, root: &PlanarRoot) -> f64 {
    let (q, a, b, c) = (coeffs.q, coeffs.a, coeffs.b, coeffs.c);
    let (x, y) = (root.t_r, root.t_i);
    let zr2 = x * x - y * y;
    let zi2 = 2.0 * x * y;
    let zr3 = x * zr2 - y * zi2;
    let zi3 = x * zi2 + y * zr2;
    let fr = q * zr3 + a * zr2 + b * x + c;
    let fi = q * zi3 + a * zi2 + b * y;
    fr.hypot(fi)
}

/// Default robust-division configuration (M = 1000, t_max = 1e150) — the
/// settings every pinned value in the test suite assumes.
pub fn default_config() -> RobustDivConfig {
    RobustDivConfig::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_divides_by_largest_magnitude() {
        let (coeffs, _) = normalize_cubic([1.0, 0.0, -7.1, 6.0]);
        assert_eq!(coeffs.q, 1.0 / 7.1);
        assert_eq!(coeffs.a, 0.0);
        assert_eq!(coeffs.b, -1.0);
        assert_eq!(coeffs.c, 6.0 / 7.1);
        assert_eq!(coeffs.p_max, 7.1);
        assert_eq!(coeffs.k, 2);
        assert!(!coeffs.sign_flipped);
        assert!(coeffs.normalized);
    }

    #[test]
    fn normalize_flips_negative_leading_coefficient() {
        let (coeffs, _) = normalize_cubic([-1.0, 0.0, 0.0, 2.0]);
        assert_eq!(coeffs.as_array(), [0.5, 0.0, 0.0, -1.0]);
        assert_eq!(coeffs.p_max, -2.0);
        assert!(coeffs.sign_flipped);
    }

    #[test]
    fn normalize_flip_without_scaling_negates_in_place() {
        let (coeffs, jac) = normalize_cubic([-0.5, 0.2, 0.3, 0.1]);
        assert_eq!(coeffs.as_array(), [0.5, -0.2, -0.3, -0.1]);
        assert_eq!(coeffs.p_max, -1.0);
        assert!(coeffs.sign_flipped);
        for (i, row) in jac.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { -1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn normalize_keeps_bounded_input() {
        let p = [0.5, 0.2, -0.3, 0.1];
        let (coeffs, jac) = normalize_cubic(p);
        assert_eq!(coeffs.as_array(), p);
        assert_eq!(coeffs.p_max, 1.0);
        assert!(!coeffs.sign_flipped);
        for (i, row) in jac.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn normalize_zero_sign_does_not_trigger_flip() {
        // a q of −0.0 is not "negative": no flip, and the output is +0.0
        let (coeffs, _) = normalize_cubic([-0.0, 0.0, -7.1, 6.0]);
        assert!(!coeffs.sign_flipped);
        assert_eq!(coeffs.q, 0.0);
        assert!(coeffs.q.is_sign_positive());
        assert_eq!(coeffs.b, -1.0);
    }

    #[test]
    fn normalize_jacobian_matches_finite_differences() {
        for p in [
            [2.0, 0.3, 1.0, -0.4],
            [-1.0, 0.0, 0.1, 2.0],
            [0.2, -3.0, 1.0, 0.5],
            [-0.5, 0.2, 0.3, 0.1],
        ] {
            let (_, jac) = normalize_cubic(p);
            let h = 1e-6;
            for j in 0..4 {
                let mut up = p;
                let mut dn = p;
                up[j] += h;
                dn[j] -= h;
                let fu = normalize_cubic(up).0.as_array();
                let fd = normalize_cubic(dn).0.as_array();
                for i in 0..4 {
                    let num = (fu[i] - fd[i]) / (2.0 * h);
                    assert!(
                        (num - jac[i][j]).abs() < 1e-6,
                        "p {p:?} entry ({i},{j}): fd {num} vs analytic {}",
                        jac[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn residual_is_zero_at_exact_roots() {
        // (t-1)(t-2)(t-3) = t³ - 6t² + 11t - 6
        let coeffs = CubicCoeffs::raw(1.0, -6.0, 11.0, -6.0);
        for t in [1.0, 2.0, 3.0] {
            let root = PlanarRoot::real(t, Branch::Mid, None);
            assert_eq!(residual(&coeffs, &root), 0.0);
        }
        // t² + 1 roots of (t² + 1)(t - 1) = t³ - t² + t - 1
        let coeffs = CubicCoeffs::raw(1.0, -1.0, 1.0, -1.0);
        let root = PlanarRoot::complex(0.0, 1.0, Branch::Plus);
        assert!(residual(&coeffs, &root) < 1e-15);
    }
}
