//! Two-parameter families F_{a,t}(x,y) = (f_a(x) - t*gamma(x,y), x) and the
//! location of the infinitely-renormalizable curve a = a*(t) together with
//! the period-doubling loci accumulating on it.

use serde::{Deserialize, Serialize};

use crate::cheb::Cheb2;
use crate::error::{Error, Result};
use crate::henon::{
    build_tower_with, Eps, HenonLikeMap, RenormConfig, EXT_HALFWIDTH,
};
use crate::unimodal::UnimodalMap;

/// The perturbation field gamma in eps = t * gamma(x,y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaField {
    /// gamma = y: constant Jacobian t, so b_F = t exactly.
    PlainY,
    /// gamma = y * (1 + x/2): nonconstant positive Jacobian on B.
    TiltedY,
}

impl GammaField {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            GammaField::PlainY => y,
            GammaField::TiltedY => y * (1.0 + 0.5 * x),
        }
    }

    /// Chebyshev tensor coefficients of gamma on [-1,1]^2 (both fields are
    /// polynomials of degree (1,1)).
    fn coeffs(self) -> Vec<Vec<f64>> {
        match self {
            GammaField::PlainY => vec![vec![0.0, 1.0]],
            GammaField::TiltedY => vec![vec![0.0, 1.0], vec![0.0, 0.5]],
        }
    }
}

/// A two-parameter family built over the height family f_a = 1 - a x^2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HenonFamily {
    pub gamma: GammaField,
    pub a_range: [f64; 2],
    pub t_range: [f64; 2],
    /// polynomial degree used for the unimodal part
    pub degf: usize,
}

impl HenonFamily {
    pub fn height(gamma: GammaField) -> Self {
        HenonFamily { gamma, a_range: [0.8, 2.0], t_range: [0.0, 0.4], degf: 41 }
    }

    /// The member F_{a,t}, with the extended-square data fitted exactly
    /// (the family is polynomial).
    pub fn map(&self, a: f64, t: f64) -> HenonLikeMap {
        let f = UnimodalMap::quadratic(a, self.degf);
        let eps = if t == 0.0 {
            Eps::zero()
        } else {
            Eps::new(Cheb2::new(self.gamma.coeffs(), [-1.0, 1.0], [-1.0, 1.0]), t.ln())
        };
        let l = EXT_HALFWIDTH;
        let g = self.gamma;
        let ext = Cheb2::fit([-l, l], [-l, l], 8, 4, |x, y| {
            1.0 - a * x * x - t * g.eval(x, y)
        });
        let mut map = HenonLikeMap::new(f, eps);
        map.extended = Some(ext);
        map
    }
}

/// Largest n <= cap such that the tower builds to depth n.
pub fn renorm_depth(map: &HenonLikeMap, cap: usize, cfg: &RenormConfig) -> usize {
    build_tower_with(map, cap, cfg).depth()
}

/// Step-oriented config for parameter scans: extended-square fitting is the
/// dominant cost of a step and none of the scan decisions need it.
pub fn scan_config() -> RenormConfig {
    RenormConfig { degf: 40, dege: 8, build_extended: false, ..Default::default() }
}

/// Bisect a at fixed t for the lower boundary a_depth of the n-times
/// renormalizable strip, marching n = 1..depth.  These boundaries increase
/// toward the accumulation a*(t) at the hyperbolicity rate, and staying
/// below the accumulation keeps the depth function a monotone staircase —
/// naive side-bisection over the whole range snaps onto the periodic
/// windows that pepper the region above a*.
pub fn locate_w(family: &HenonFamily, t: f64, depth: usize) -> Result<f64> {
    let cfg = scan_config();
    let d_at = |a: f64, n: usize| renorm_depth(&family.map(a, t), n, &cfg);
    let [a0, a1] = family.a_range;
    if depth == 0 || d_at(a0, 1) >= 1 {
        return Err(Error::Bracket { what: "no cascade in the family's a-range" });
    }

    // coarse upward scan for the first once-renormalizable parameter
    let coarse = (a1 - a0) / 60.0;
    let mut lo = a0;
    let mut hi = f64::NAN;
    for i in 1..=60 {
        let a = a0 + coarse * i as f64;
        if d_at(a, 1) >= 1 {
            hi = a;
            break;
        }
        lo = a;
    }
    if !hi.is_finite() {
        return Err(Error::Bracket { what: "no cascade in the family's a-range" });
    }

    let mut boundary = f64::NAN;
    let mut gap_scale = coarse;
    for n in 1..=depth {
        let (mut blo, mut bhi) = (lo, hi);
        // intermediate boundaries only steer the next bracket; full
        // precision is needed at the final stage only
        let tol = if n == depth { 1e-13 } else { (1e-3 * (bhi - blo)).max(1e-13) };
        while bhi - blo > tol {
            let mid = 0.5 * (blo + bhi);
            if d_at(mid, n) >= n {
                bhi = mid;
            } else {
                blo = mid;
            }
        }
        if boundary.is_finite() {
            gap_scale = bhi - boundary;
        }
        boundary = bhi;
        if n == depth {
            break;
        }
        // witness for the next strip, just above the new boundary: the next
        // boundary sits ~gap/delta further right, so geometric candidates
        // starting well below that spacing find it without overshooting
        // past the accumulation
        lo = blo;
        let mut w = f64::NAN;
        let mut g = (0.02 * gap_scale).max(1e-11);
        for _ in 0..40 {
            let cand = boundary + g;
            if cand >= a1 {
                break;
            }
            if d_at(cand, n + 1) >= n + 1 {
                w = cand;
                break;
            }
            g *= 1.3;
        }
        if !w.is_finite() {
            return Err(Error::Bracket { what: "lost the cascade while refining" });
        }
        hi = w;
    }
    Ok(boundary)
}
