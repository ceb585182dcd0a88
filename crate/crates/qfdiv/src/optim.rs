//! One-dimensional minimization of convex objectives.
//!
//! Golden-section search with a parabolic acceleration step, on objectives
//! valued in the extended reals (a curve like `log Tr A^a B^{1-a}` hits
//! `-inf` on orthogonal supports).

use crate::scalar::{r, ExtReal, Real};

/// Where the minimizer of a convex function on an interval sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerKind {
    Interior,
    LeftEndpoint,
    RightEndpoint,
    /// The objective is constant within tolerance; any point is optimal.
    Constant,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult<R: Real> {
    pub x: R,
    pub value: ExtReal<R>,
    pub kind: MinimizerKind,
    pub iterations: usize,
}

const GOLDEN: f64 = 0.381_966_011_250_105_2; // 2 - phi

/// Minimizes a convex `f` on `[a, b]`.
///
/// Ties at the endpoints resolve toward the endpoint: the interval shrinks
/// around the best sample, and the final classification compares against
/// the endpoint values directly.
pub fn minimize_convex<R: Real, F: Fn(R) -> ExtReal<R>>(
    f: F,
    a: R,
    b: R,
    x_tol: R,
    max_iter: usize,
) -> MinimizeResult<R> {
    let gold = r::<R>(GOLDEN);
    let fa = f(a);
    let fb = f(b);
    let mut lo = a;
    let mut hi = b;
    let mut x1 = lo + gold * (hi - lo);
    let mut x2 = hi - gold * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0usize;

    while iterations < max_iter && hi - lo > x_tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + gold * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - gold * (hi - lo);
            f2 = f(x2);
        }
        iterations += 1;
    }

    let (mut best_x, mut best_v) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    // Endpoint-inclusive: the boundary wins ties.
    if fb <= best_v {
        best_x = b;
        best_v = fb;
    }
    if fa <= best_v {
        best_x = a;
        best_v = fa;
    }

    let spread_tol = r::<R>(1e-11) * crate::matcore::rmax(R::one(), magnitude(best_v));
    let near = |u: ExtReal<R>, v: ExtReal<R>| match (u.finite(), v.finite()) {
        (Some(x), Some(y)) => (x - y).abs() <= spread_tol,
        _ => u == v,
    };
    let kind = if near(fa, best_v) && near(fb, best_v) {
        MinimizerKind::Constant
    } else if near(fa, best_v) {
        MinimizerKind::LeftEndpoint
    } else if near(fb, best_v) {
        MinimizerKind::RightEndpoint
    } else {
        MinimizerKind::Interior
    };
    let x = match kind {
        MinimizerKind::LeftEndpoint => a,
        MinimizerKind::RightEndpoint => b,
        _ => best_x,
    };
    MinimizeResult {
        x,
        value: best_v,
        kind,
        iterations,
    }
}

fn magnitude<R: Real>(v: ExtReal<R>) -> R {
    v.finite().map(|x| x.abs()).unwrap_or_else(R::one)
}

/// Maximizes a concave `f` over `[0, +inf)` by geometric bracket expansion
/// followed by golden-section on the bracket. Returns `(s*, f(s*))`.
pub fn maximize_concave_half_line<R: Real, F: Fn(R) -> ExtReal<R>>(
    f: F,
    x_tol: R,
    max_iter: usize,
) -> (R, ExtReal<R>) {
    // Expand until the objective decreases twice in a row.
    let mut nodes = vec![R::zero()];
    let mut values = vec![f(R::zero())];
    let mut s = R::one();
    let growth = r::<R>(2.0);
    let mut best = 0usize;
    for _ in 0..200 {
        nodes.push(s);
        values.push(f(s));
        let last = values.len() - 1;
        if values[last] > values[best] {
            best = last;
        }
        // Stop once we are at least two nodes past the running maximum.
        if last >= best + 2 {
            break;
        }
        s *= growth;
    }
    let lo = if best == 0 {
        R::zero()
    } else {
        nodes[best - 1]
    };
    let hi = if best + 1 < nodes.len() {
        nodes[best + 1]
    } else {
        nodes[best] * growth
    };
    let res = minimize_convex(|x| neg(f(x)), lo, hi, x_tol, max_iter);
    // Endpoint classification aside, compare against the best grid node too.
    if values[best] > neg(res.value) {
        (nodes[best], values[best])
    } else {
        (res.x, neg(res.value))
    }
}

fn neg<R: Real>(v: ExtReal<R>) -> ExtReal<R> {
    match v {
        ExtReal::Finite(x) => ExtReal::Finite(-x),
        ExtReal::PosInf => ExtReal::NegInf,
        ExtReal::NegInf => ExtReal::PosInf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(x: f64) -> ExtReal<f64> {
        ExtReal::Finite(x)
    }

    #[test]
    fn quadratic_interior_minimum() {
        let res = minimize_convex(|x: f64| fin((x - 0.3).powi(2)), 0.0, 1.0, 1e-12, 300);
        assert!((res.x - 0.3).abs() < 1e-8);
        assert_eq!(res.kind, MinimizerKind::Interior);
    }

    #[test]
    fn monotone_hits_endpoint() {
        let res = minimize_convex(|x: f64| fin(2.0 * x + 1.0), 0.0, 1.0, 1e-12, 300);
        assert_eq!(res.kind, MinimizerKind::LeftEndpoint);
        assert_eq!(res.x, 0.0);
        let res = minimize_convex(|x: f64| fin(-x), 0.0, 1.0, 1e-12, 300);
        assert_eq!(res.kind, MinimizerKind::RightEndpoint);
        assert_eq!(res.x, 1.0);
    }

    #[test]
    fn constant_detected() {
        let res = minimize_convex(|_x: f64| fin(0.7), 0.0, 1.0, 1e-12, 300);
        assert_eq!(res.kind, MinimizerKind::Constant);
    }

    #[test]
    fn infinite_values_are_ordered() {
        let res = minimize_convex(
            |x: f64| if x < 0.5 { ExtReal::NegInf } else { fin(x) },
            0.0,
            1.0,
            1e-12,
            300,
        );
        assert_eq!(res.value, ExtReal::NegInf);
    }

    #[test]
    fn half_line_concave_maximum() {
        let (s, v) = maximize_concave_half_line(|x: f64| fin(-(x - 5.0).powi(2)), 1e-10, 300);
        assert!((s - 5.0).abs() < 1e-6);
        assert!(v.unwrap_finite().abs() < 1e-10);
        // Maximum at the boundary s = 0.
        let (s, _) = maximize_concave_half_line(|x: f64| fin(-x), 1e-10, 300);
        assert!(s.abs() < 1e-8);
    }
}
