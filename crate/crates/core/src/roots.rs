//! Bracketed root finding for monotone scalar functions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Switch from bisection to secant once the bracket is this narrow
    /// relative to its midpoint.
    pub bisect_rel_width: f64,
    /// Stop when `|g(x)| <= residual`.
    pub residual: f64,
    /// Stop when the bracket is narrower than this (relative).
    pub x_rel_tol: f64,
    pub max_iter: usize,
    /// Bisect in `ln x` instead of `x` (both ends must be positive).
    pub logarithmic: bool,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            bisect_rel_width: 1e-6,
            residual: 1e-12,
            x_rel_tol: 1e-15,
            max_iter: 500,
            logarithmic: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Finds `x` in `[lo, hi]` with `g(x) = 0`, given a sign change on the
/// bracket. Bisection narrows the bracket, then a secant step is accepted only
/// when it lands inside the current bracket (otherwise bisect again).
pub fn solve_bracketed(g: impl Fn(f64) -> f64, lo: f64, hi: f64, opts: RootOptions) -> Result<Root> {
    if !(lo < hi) {
        return Err(Error::Bracket { lo, hi });
    }
    if opts.logarithmic && lo <= 0.0 {
        return Err(Error::domain("logarithmic bisection needs a positive bracket"));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if !ga.is_finite() || !gb.is_finite() {
        return Err(Error::NoConvergence(format!("non-finite value at bracket ends ({ga}, {gb})")));
    }
    if ga == 0.0 {
        return Ok(Root { x: a, value: ga, iterations: 0 });
    }
    if gb == 0.0 {
        return Ok(Root { x: b, value: gb, iterations: 0 });
    }
    if ga.signum() == gb.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    let mid = |a: f64, b: f64| if opts.logarithmic { (a * b).sqrt() } else { 0.5 * (a + b) };
    let mut best = if ga.abs() < gb.abs() { (a, ga) } else { (b, gb) };
    for it in 1..=opts.max_iter {
        let width = (b - a) / (0.5 * (a.abs() + b.abs())).max(f64::MIN_POSITIVE);
        let mut x = mid(a, b);
        if width < opts.bisect_rel_width {
            let s = b - gb * (b - a) / (gb - ga);
            if s.is_finite() && s > a && s < b {
                x = s;
            }
        }
        let gx = g(x);
        if !gx.is_finite() {
            return Err(Error::NoConvergence(format!("non-finite value at x = {x}")));
        }
        if gx.abs() < best.1.abs() {
            best = (x, gx);
        }
        if gx.abs() <= opts.residual {
            return Ok(Root { x, value: gx, iterations: it });
        }
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
        let width = (b - a) / (0.5 * (a.abs() + b.abs())).max(f64::MIN_POSITIVE);
        if width <= opts.x_rel_tol || x == a && x == b {
            return Ok(Root { x: best.0, value: best.1, iterations: it });
        }
    }
    Ok(Root { x: best.0, value: best.1, iterations: opts.max_iter })
}

/// Counts sign changes of `g` on a uniform grid of `n` points in `[lo, hi]`.
pub fn count_sign_changes(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> usize {
    let mut changes = 0;
    let mut prev = g(lo);
    for i in 1..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = g(x);
        if v != 0.0 && prev != 0.0 && v.signum() != prev.signum() {
            changes += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = solve_bracketed(|x| x * x * x - 2.0, 0.0, 2.0, RootOptions::default()).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn logarithmic_bracket_finds_tiny_root() {
        let opts = RootOptions { logarithmic: true, ..RootOptions::default() };
        let r = solve_bracketed(|x| (x / 1e-9).ln(), 1e-14, 10.0, opts).unwrap();
        assert!((r.x / 1e-9 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_missing_sign_change() {
        let err = solve_bracketed(|x| x * x + 1.0, -1.0, 1.0, RootOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn counts_single_crossing() {
        assert_eq!(count_sign_changes(|x| x - 0.3, 0.0, 1.0, 1000), 1);
        assert_eq!(count_sign_changes(|x| (6.0 * x).sin(), 0.1, 3.0, 1000), 5);
    }
}
