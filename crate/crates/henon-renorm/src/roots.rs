//! Small scalar root-finding helpers shared by the solvers.

use crate::error::{Error, Result};

/// Bisection followed by Newton polish.  `f` returns (value, derivative).
/// The bracket [a, b] must have a sign change of the value.
pub fn bisect_newton(f: impl Fn(f64) -> (f64, f64), mut a: f64, mut b: f64, bisections: usize, newtons: usize) -> f64 {
    let mut fa = f(a).0;
    for _ in 0..bisections {
        let m = 0.5 * (a + b);
        let fm = f(m).0;
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..newtons {
        let (g, dg) = f(x);
        if dg == 0.0 {
            break;
        }
        let dx = g / dg;
        x -= dx;
        if dx.abs() < 1e-15 {
            break;
        }
    }
    x
}

/// Pure bisection to absolute tolerance `tol` on x.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa * fb > 0.0 {
        return Err(Error::Bracket { what: "bisect" });
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scan [lo, hi] in n steps for the first sign change of `f`, refine by
/// bisection + Newton (finite-difference derivative).
pub fn first_root_on(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, tol: f64) -> Result<f64> {
    let mut xprev = lo;
    let mut fprev = f(lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let fx = f(x);
        if fprev * fx <= 0.0 {
            return bisect(&f, xprev, x, tol);
        }
        xprev = x;
        fprev = fx;
    }
    Err(Error::Bracket { what: "first_root_on" })
}
