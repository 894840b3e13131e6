//! Scalar root finding: Brent's method and the homotopy used to select the
//! minimum-state-variable root.
//!
//! The tracked equation is `f(s, x) = 0` where `s` scales the feedback between
//! the controls and the endogenous state. At `s = 0` the MSV root is `x = 0`;
//! the tracker walks `s` to 1 in uniform steps and, at each step, re-solves
//! by bracketing inside a window centred on the previous root. Among the
//! brackets found the root closest to the previous one wins, which keeps the
//! path on the branch that vanishes with the feedback.

use serde::Serialize;

use crate::error::{MumsError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationOptions {
    /// Number of uniform increments of `s` from 0 to 1.
    pub steps: usize,
    /// Initial half-width of the search window around the previous root.
    pub window: f64,
    /// Grid points per half window used to detect sign changes.
    pub grid: usize,
    /// Open interval in which roots are sought.
    pub domain: (f64, f64),
    /// A bracketed point whose residual exceeds this is a pole, not a root.
    pub pole_filter: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            steps: 64,
            window: 0.2,
            grid: 16,
            domain: (-1.0, 1.0),
            pole_filter: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub s: f64,
    pub root: f64,
    /// Half-width of the window in which the root was found.
    pub window: f64,
}

/// Path followed by the continuation, one entry per step of `s`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RootTrace {
    pub steps: Vec<TraceStep>,
    /// `|f(1, root)|` at the returned root.
    pub final_residual: f64,
}

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite
/// sign (or one of them zero). Runs to machine precision.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return None;
        }
    }
    Some(b)
}

/// Brent on a sign change, rejecting poles by the residual at the limit.
fn refine<G>(g: &mut G, a: f64, fa: f64, b: f64, fb: f64, pole_filter: f64) -> Option<f64>
where
    G: FnMut(f64) -> Option<f64>,
{
    if !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    if fa == 0.0 || fb == 0.0 {
        return Some(if fa == 0.0 { a } else { b });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let root = brent(|x| g(x).unwrap_or(f64::NAN), a, b, fa, fb)?;
    let r = g(root)?;
    (r.abs() <= pole_filter).then_some(root)
}

/// Finds the root of `g` closest to `centre` within `centre ± window`,
/// scanning outward so near roots are found first.
fn nearest_root<G>(g: &mut G, centre: f64, window: f64, opts: &ContinuationOptions) -> Option<f64>
where
    G: FnMut(f64) -> Option<f64>,
{
    let lo = opts.domain.0 + 1e-12;
    let hi = opts.domain.1 - 1e-12;
    let centre = centre.clamp(lo, hi);
    let h = window / opts.grid as f64;
    let f0 = g(centre)?;
    if f0 == 0.0 {
        return Some(centre);
    }

    // Previous grid point and value on each side, `None` once off-domain.
    let mut right = Some((centre, f0));
    let mut left = Some((centre, f0));
    for k in 1..=opts.grid {
        let mut found: Vec<f64> = Vec::new();
        for (side, dir) in [(&mut right, 1.0), (&mut left, -1.0)] {
            let Some((x_prev, f_prev)) = *side else {
                continue;
            };
            let x = (centre + dir * k as f64 * h).clamp(lo, hi);
            if x == x_prev {
                *side = None;
                continue;
            }
            match g(x) {
                Some(fx) => {
                    let (a, fa, b, fb) = if dir > 0.0 {
                        (x_prev, f_prev, x, fx)
                    } else {
                        (x, fx, x_prev, f_prev)
                    };
                    if let Some(root) = refine(g, a, fa, b, fb, opts.pole_filter) {
                        found.push(root);
                    }
                    *side = Some((x, fx));
                }
                // Singular pencil: restart the scan past the singular point.
                None => *side = Some((x, f64::NAN)),
            }
        }
        if let Some(best) = found
            .into_iter()
            .min_by(|a, b| (a - centre).abs().total_cmp(&(b - centre).abs()))
        {
            return Some(best);
        }
        if right.is_none() && left.is_none() {
            break;
        }
    }
    None
}

/// Follows the root of `f(s, x)` from `x = 0` at `s = 0` to `s = 1`.
///
/// `f` returns `Err` where the equation is undefined (a singular pencil);
/// those points are skipped by the scan.
pub fn track_from_zero<F>(mut f: F, opts: &ContinuationOptions) -> Result<(f64, RootTrace)>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut root = 0.0;
    let mut trace = RootTrace::default();
    let width = opts.domain.1 - opts.domain.0;
    for step in 1..=opts.steps {
        let s = step as f64 / opts.steps as f64;
        let mut g = |x: f64| f(s, x).ok().filter(|v| !v.is_nan());
        let mut window = opts.window;
        let next = loop {
            if let Some(r) = nearest_root(&mut g, root, window, opts) {
                break r;
            }
            if window >= width {
                return Err(MumsError::NoRoot {
                    s,
                    near: root,
                    lo: opts.domain.0,
                    hi: opts.domain.1,
                });
            }
            window *= 2.0;
        };
        root = next;
        trace.steps.push(TraceStep { s, root, window });
    }
    trace.final_residual = f(1.0, root)?.abs();
    Ok((root, trace))
}
