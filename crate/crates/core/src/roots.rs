//! Root isolation on an interval: uniform sign-change scan, bisection, and
//! detection of touching (double) roots.

/// Outcome of scanning `f` over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    /// Roots in increasing order.
    pub roots: Vec<f64>,
    /// How many of `roots` were found as touching roots without a sign change.
    pub touching: usize,
}

/// Bisection on a bracket with `f(lo)·f(hi) ≤ 0` until the bracket is no
/// wider than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scan `f` on `n` uniformly spaced points in `[lo, hi]`, bisect every
/// sign change to `tol`, and look for touching roots: interior local minima of
/// `|f|` without a sign change are refined by bisecting a central-difference
/// derivative and accepted when `|f| ≤ touch_tol` there.
pub fn scan_roots<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, n: usize, tol: f64, touch_tol: f64) -> ScanOutcome {
    assert!(n >= 2, "scan needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let mut roots = Vec::new();
    let mut touching = 0;
    for i in 0..n - 1 {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if y0 == 0.0 {
            if i > 0 && ys[i - 1] != 0.0 {
                roots.push(xs[i]);
            }
            continue;
        }
        if (y0 < 0.0) != (y1 < 0.0) && y1 != 0.0 {
            roots.push(bisect(f, xs[i], xs[i + 1], tol));
        }
    }

    for i in 1..n - 1 {
        let (a, b, cc) = (ys[i - 1], ys[i], ys[i + 1]);
        let same_sign = (a < 0.0) == (b < 0.0) && (b < 0.0) == (cc < 0.0) && a != 0.0 && b != 0.0 && cc != 0.0;
        if !(same_sign && b.abs() <= a.abs() && b.abs() <= cc.abs()) {
            continue;
        }
        let h = (step * 1e-4).max(tol);
        let deriv = |x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let (l, r) = (xs[i - 1] + h, xs[i + 1] - h);
        if !(l < r) || (deriv(l) < 0.0) == (deriv(r) < 0.0) {
            continue;
        }
        let x = bisect(&deriv, l, r, tol);
        let fx = f(x);
        if fx != 0.0 && (fx < 0.0) != (b < 0.0) {
            // two simple roots closer than the grid spacing
            roots.push(bisect(f, xs[i - 1], x, tol));
            roots.push(bisect(f, x, xs[i + 1], tol));
        } else if fx.abs() <= touch_tol {
            roots.push(x);
            touching += 1;
        }
    }
    roots.sort_by(f64::total_cmp);
    ScanOutcome { roots, touching }
}
