//! Safeguarded Newton iteration for a decreasing scalar function.

pub(crate) struct Bracket {
    /// `f(lo) > 0`, or `f` is unbounded at `lo` and must not be evaluated
    /// there.
    pub lo: f64,
    /// `f(hi) < 0`
    pub hi: f64,
}

pub(crate) struct RootOutcome {
    pub x: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Finds a root of a decreasing `f` inside `bracket`, starting at `x0`.
///
/// `f` returns `(value, derivative)`. `done(x, value)` decides convergence.
/// Newton steps that leave the current bracket are replaced by bisection.
/// Iteration also stops once the bracket has shrunk to a few ulps, which is
/// reported as converged since no representable point does better.
pub(crate) fn decreasing_root<F, D>(
    mut f: F,
    done: D,
    bracket: Bracket,
    x0: f64,
    max_iter: usize,
) -> RootOutcome
where
    F: FnMut(f64) -> (f64, f64),
    D: Fn(f64, f64) -> bool,
{
    let Bracket { mut lo, mut hi } = bracket;
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut best = (x, f64::INFINITY);

    for it in 1..=max_iter {
        let (fx, dfx) = f(x);
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if done(x, fx) {
            return RootOutcome { x, iterations: it, converged: true };
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            return RootOutcome { x: best.0, iterations: it, converged: true };
        }
        let newton = x - fx / dfx;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    RootOutcome { x: best.0, iterations: max_iter, converged: false }
}
