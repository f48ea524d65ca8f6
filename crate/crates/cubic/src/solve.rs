//! The three-path cubic solve: direct bracketed iteration, reversed-cubic
//! iteration for tiny leading coefficients, and the degenerate quadratic
//! limit.

use numkit::{robust_div_bounded, RobustDivConfig, Sign};
use quadratic::{solve as solve_quad, Branch, PlanarRoot, QuadCoeffs};

use crate::{normalize_cubic, CubicCoeffs, CubicRootSet, Q_EPS};

/// Iteration cap for the safeguarded Newton stage.
pub const MAX_NEWTON_ITERS: usize = 200;

/// Default residual tolerance for the iterative stage.
pub const DEFAULT_NEWTON_TOL: f64 = 1e-13;

/// The safeguarded Newton stage failed to converge within its iteration cap.
///
/// This cannot happen for normalized coefficients (the bisection fallback
/// halves the bracket every iteration), but the diagnostic carries the best
/// bracketing interval found so a caller can still locate the root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSolveError {
    /// Endpoints of the tightest sign-change interval reached.
    pub bracket: (f64, f64),
    /// Polynomial values at those endpoints.
    pub f_bracket: (f64, f64),
}

impl std::fmt::Display for CubicSolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "iterative root stage did not converge within {MAX_NEWTON_ITERS} iterations; \
             best bracket [{}, {}] with f = [{}, {}]",
            self.bracket.0, self.bracket.1, self.f_bracket.0, self.f_bracket.1
        )
    }
}

impl std::error::Error for CubicSolveError {}

fn eval(q: f64, a: f64, b: f64, c: f64, t: f64) -> f64 {
    ((q * t + a) * t + b) * t + c
}

fn eval_deriv(q: f64, a: f64, b: f64, t: f64) -> f64 {
    (3.0 * q * t + 2.0 * a) * t + b
}

/// Newton iteration guarded by a sign-change bracket: steps that leave the
/// bracket (or hit f' = 0) fall back to bisection, so progress is never
/// worse than halving.
fn newton_bisect(
    q: f64,
    a: f64,
    b: f64,
    c: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, CubicSolveError> {
    let mut flo = eval(q, a, b, c, lo);
    let mut fhi = eval(q, a, b, c, hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON_ITERS {
        let ft = eval(q, a, b, c, t);
        // acceptance tracks the *current* bracket's smaller endpoint
        // residual, so the threshold tightens as the bracket converges
        if ft.abs() <= tol * (1.0 + flo.abs().min(fhi.abs())) {
            return Ok(t);
        }
        if (ft > 0.0) == (fhi > 0.0) {
            hi = t;
            fhi = ft;
        } else {
            lo = t;
            flo = ft;
        }
        // bracket reached the floating-point noise floor: |f| may never
        // pass the test above, but the root is pinned to a few ulp
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(t);
        }
        let df = eval_deriv(q, a, b, t);
        let tn = if df != 0.0 { t - ft / df } else { lo };
        t = if lo < tn && tn < hi {
            tn
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(CubicSolveError {
        bracket: (lo, hi),
        f_bracket: (flo, fhi),
    })
}

/// All real roots found by scanning the monotone partition of [−3/q, 3/q]:
/// partition points are the interval ends plus any interior critical points,
/// so each piece has at most one sign change. Exact zeros at partition
/// points count as roots directly.
fn iterative_roots(q: f64, a: f64, b: f64, c: f64, tol: f64) -> Result<Vec<f64>, CubicSolveError> {
    let lo = -3.0 / q;
    let hi = 3.0 / q;
    let mut pts = Vec::with_capacity(4);
    pts.push(lo);
    let disc = a * a - 3.0 * q * b;
    if disc > 0.0 {
        // critical points of the cubic, each computed by whichever of the
        // two quadratic-formula forms avoids cancellation
        let sq = disc.sqrt();
        let tcl = if a >= 0.0 {
            (-a - sq) / (3.0 * q)
        } else {
            b / (-a + sq)
        };
        let tcr = if a <= 0.0 {
            (-a + sq) / (3.0 * q)
        } else {
            b / (-a - sq)
        };
        for tc in [tcl, tcr] {
            if lo < tc && tc < hi && (pts.len() == 1 || tc > *pts.last().unwrap()) {
                pts.push(tc);
            }
        }
    }
    pts.push(hi);

    let fv: Vec<f64> = pts.iter().map(|&t| eval(q, a, b, c, t)).collect();
    let mut roots = Vec::with_capacity(3);
    for i in 0..pts.len() - 1 {
        if fv[i] == 0.0 && roots.last() != Some(&pts[i]) {
            roots.push(pts[i]);
        }
        if fv[i] * fv[i + 1] < 0.0 {
            roots.push(newton_bisect(q, a, b, c, pts[i], pts[i + 1], tol)?);
        }
    }
    if fv[pts.len() - 1] == 0.0 {
        roots.push(hi);
    }
    Ok(roots)
}

/// Discriminant of the quadratic left after deflating by (t − r).
fn defl_disc(q: f64, a: f64, b: f64, r: f64) -> f64 {
    let bq = q * r + a;
    let cq = (q * r + a) * r + b;
    bq * bq - 4.0 * q * cq
}

/// Discriminant of the quadratic left after deflating the original cubic by
/// (t − 1/s), in original-space coefficients.
fn defl_rev_disc(a: f64, b: f64, c: f64, s: f64) -> f64 {
    let a2 = (c * s + b) * s + a;
    let b2 = c * s + b;
    b2 * b2 - 4.0 * a2 * c
}

/// First candidate maximizing the key (ties keep the earlier candidate).
fn pick_best(cands: &[f64], key: impl Fn(f64) -> f64) -> Option<f64> {
    let mut it = cands.iter().copied();
    let mut best = it.next()?;
    let mut best_key = key(best);
    for r in it {
        let k = key(r);
        if k > best_key {
            best = r;
            best_key = k;
        }
    }
    Some(best)
}

pub(crate) struct LabeledTriple {
    pub roots: [PlanarRoot; 3],
    pub r1_index: usize,
}

fn canon(mut r: PlanarRoot) -> PlanarRoot {
    if r.t_r == 0.0 {
        r.t_r = 0.0; // −0.0 → +0.0
    }
    r
}

fn finish(mut items: [(PlanarRoot, u8, bool); 3]) -> LabeledTriple {
    items.sort_by(|x, y| (x.0.t_r, x.1).partial_cmp(&(y.0.t_r, y.1)).unwrap());
    let mut roots = [items[0].0, items[1].0, items[2].0];
    roots[0].branch = Branch::Minus;
    roots[1].branch = Branch::Mid;
    roots[2].branch = Branch::Plus;
    let r1_index = items.iter().position(|it| it.2).unwrap();
    LabeledTriple { roots, r1_index }
}

/// Label one real root and a conjugate pair: ascending real part, ties
/// broken by rank −Im < +Im < real. The +Im member therefore always sits
/// above the −Im member in label order, matching the merge convention
/// (larger merging real root ↔ positive imaginary part).
pub(crate) fn label_one_real_with_pair(
    real: PlanarRoot,
    pair_plus: PlanarRoot,
    pair_minus: PlanarRoot,
) -> LabeledTriple {
    finish([
        (canon(real), 2, true),
        (canon(pair_plus), 1, false),
        (canon(pair_minus), 0, false),
    ])
}

/// Label three real roots by ascending value (ties keep the deflation root
/// first).
pub(crate) fn label_three_real(
    r1: PlanarRoot,
    second: PlanarRoot,
    third: PlanarRoot,
) -> LabeledTriple {
    finish([
        (canon(r1), 0, true),
        (canon(second), 1, false),
        (canon(third), 2, false),
    ])
}

fn assemble(
    r1: f64,
    tp: PlanarRoot,
    tm: PlanarRoot,
    pseudo_q: Option<Sign>,
    from_deflation: bool,
) -> CubicRootSet {
    let real = PlanarRoot::real(r1, Branch::Mid, None);
    let triple = if tp.is_complex {
        label_one_real_with_pair(real, tp, tm)
    } else {
        label_three_real(real, tp, tm)
    };
    CubicRootSet {
        roots: triple.roots,
        real_count: if tp.is_complex { 1 } else { 3 },
        pseudo_sign_q: pseudo_q,
        deflation_choice: if from_deflation {
            Some(triple.r1_index)
        } else {
            None
        },
    }
}

/// Solve `q·t³ + a·t² + b·t + c = 0`, total over all finite coefficients.
///
/// Un-normalized input is normalized internally (roots are invariant).
/// Three paths, in order of preference:
///
/// * **direct** (`q ≥ Q_EPS`): all real roots of the cubic lie in
///   `[−3/q, 3/q]` for normalized coefficients; safeguarded Newton finds
///   every sign change over the monotone partition of that interval. The
///   candidate whose deflated quadratic has the largest discriminant — the
///   one farthest from producing a spurious repeated pair — becomes r₁, and
///   the deflated quadratic supplies the other two roots.
/// * **reversed** (`0 < q < Q_EPS`, `|c| ≥ Q_EPS`): the same procedure on
///   the reversed cubic in `s = 1/t` (leading coefficient `|c|`), mapping
///   the chosen root back through `r₁ = 1/s₁` (saturated at `t_max`), with
///   the deflated quadratic formed in original-space coefficients.
/// * **degenerate** (everything else): `q` is treated as zero. All-zero
///   coefficients give the triple root at 0; otherwise the quadratic solver
///   handles `(a, b, c)` and the third root saturates at
///   `−sign(a)·t_max` (pseudo-sign of `a` when `a = 0`), the limit of the
///   escaping root as `q → 0⁺`.
///
/// Labels `minus ≤ mid ≤ plus` order roots by real part; a complex pair
/// ties at the same real part and is ordered −Im < +Im, with the real root
/// above both when equal. Exactly-zero root values are canonicalized to
/// +0.0. `Err` is only possible if the iteration cap is hit (see
/// [`CubicSolveError`]).
pub fn solve_cubic(
    coeffs: &CubicCoeffs,
    cfg: &RobustDivConfig,
    tol: f64,
) -> Result<CubicRootSet, CubicSolveError> {
    let norm = if coeffs.normalized {
        *coeffs
    } else {
        normalize_cubic(coeffs.as_array()).0
    };
    let (q, a, b, c) = (norm.q, norm.a, norm.b, norm.c);

    if q >= Q_EPS {
        let its = iterative_roots(q, a, b, c, tol)?;
        if let Some(r1) = pick_best(&its, |r| defl_disc(q, a, b, r)) {
            let bq = q * r1 + a;
            let cq = (q * r1 + a) * r1 + b;
            let (tp, tm) = solve_quad(&QuadCoeffs::raw(q, bq, cq), cfg);
            return Ok(assemble(r1, tp, tm, None, true));
        }
    } else if q != 0.0 && c.abs() >= Q_EPS {
        // reversed cubic c·s³ + b·s² + a·s + q, sign-normalized so the
        // leading coefficient is positive
        let (cc, bb, aa, qq) = if c > 0.0 { (c, b, a, q) } else { (-c, -b, -a, -q) };
        let its = iterative_roots(cc, bb, aa, qq, tol)?;
        if let Some(s1) = pick_best(&its, |s| defl_rev_disc(a, b, c, s)) {
            if s1 != 0.0 {
                let r1 = robust_div_bounded(1.0, s1, cfg.t_max);
                let a2 = (c * s1 + b) * s1 + a;
                let b2 = c * s1 + b;
                let (tp, tm) = solve_quad(&QuadCoeffs::raw(a2, b2, c), cfg);
                return Ok(assemble(r1, tp, tm, None, true));
            }
        }
    }

    // leading term (and any reversed handle on it) too small to use:
    // treat q as zero
    if a == 0.0 && b == 0.0 && c == 0.0 {
        let z = |br| PlanarRoot::real(0.0, br, None);
        return Ok(CubicRootSet {
            roots: [z(Branch::Minus), z(Branch::Mid), z(Branch::Plus)],
            real_count: 3,
            pseudo_sign_q: Some(Sign::Positive),
            deflation_choice: None,
        });
    }
    let (tp, tm) = solve_quad(&QuadCoeffs::raw(a, b, c), cfg);
    let sa = tp
        .pseudo_sign_a
        .map(Sign::as_f64)
        .unwrap_or(if a < 0.0 { -1.0 } else { 1.0 });
    let r1 = -cfg.t_max.copysign(sa);
    Ok(assemble(r1, tp, tm, Some(Sign::Positive), false))
}
