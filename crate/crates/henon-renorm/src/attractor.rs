//! The invariant Cantor set, its tip, the average Jacobian, and the
//! universal function a(x) read off from deep renormalizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{convex_hull, diameter, Pt};
use crate::henon::{jacobian, microscope, RenormTower, Sym};

/// One forward image F^i(B_{v^n}): a convex hull of boundary samples plus a
/// representative interior point (the image of the center of B).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub index: usize,
    pub hull: Vec<Pt>,
    pub rep: Pt,
}

/// Depth-n approximation of the Cantor attractor: 2^n pieces of uniform
/// mass 2^-n, cyclically permuted by F.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CantorApproximation {
    pub depth: usize,
    pub pieces: Vec<Piece>,
}

impl CantorApproximation {
    pub fn max_diameter(&self) -> f64 {
        self.pieces.iter().map(|p| diameter(&p.hull)).fold(0.0, f64::max)
    }
}

/// Boundary samples of B: corners plus interior edge points.  Images of
/// curved pieces need several samples per edge or their convex hulls cut
/// off the bulges near the fold.
fn b_boundary() -> Vec<Pt> {
    let m = 8;
    let mut pts = Vec::with_capacity(4 * m);
    for i in 0..m {
        let s = -1.0 + 2.0 * i as f64 / m as f64;
        pts.push([s, -1.0]);
        pts.push([1.0, s]);
        pts.push([-s, 1.0]);
        pts.push([-1.0, -s]);
    }
    pts
}

/// The 2^n pieces F^i(B_{v^n}), i = 0..2^n-1.
pub fn cantor_pieces(tower: &RenormTower, n: usize) -> Result<CantorApproximation> {
    if tower.depth() < n {
        return Err(Error::TowerTooShallow {
            op: "cantor_pieces",
            needed: n,
            have: tower.depth(),
        });
    }
    let word = vec![Sym::V; n];
    let mut pts: Vec<Pt> = b_boundary()
        .into_iter()
        .map(|p| microscope(tower, &word, p))
        .collect::<Result<_>>()?;
    let mut rep = microscope(tower, &word, [0.0, 0.0])?;
    let map = tower.level(0);
    let count = 1usize << n;
    let mut pieces = Vec::with_capacity(count);
    for index in 0..count {
        pieces.push(Piece { index, hull: convex_hull(&pts), rep });
        if index + 1 < count {
            for p in pts.iter_mut() {
                *p = map.apply(*p);
            }
            rep = map.apply(rep);
        }
    }
    Ok(CantorApproximation { depth: n, pieces })
}

/// The tip: limit of the nested boxes B_{v^n}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TipData {
    pub tau: Pt,
    pub depth_used: usize,
    pub diameter_bound: f64,
}

pub fn tip(tower: &RenormTower) -> Result<TipData> {
    let depth = tower.depth();
    if depth < 2 {
        return Err(Error::TowerTooShallow { op: "tip", needed: 2, have: depth });
    }
    let mut prev_center: Option<Pt> = None;
    let mut prev_diam = f64::INFINITY;
    let mut center = [0.0, 0.0];
    let mut diam = 0.0;
    for k in 1..=depth {
        let word = vec![Sym::V; k];
        let pts: Vec<Pt> = b_boundary()
            .into_iter()
            .map(|p| microscope(tower, &word, p))
            .collect::<Result<_>>()?;
        center = microscope(tower, &word, [0.0, 0.0])?;
        diam = diameter(&pts);
        if let Some(c) = prev_center {
            let step = ((center[0] - c[0]).powi(2) + (center[1] - c[1]).powi(2)).sqrt();
            if step > prev_diam {
                return Err(Error::NoConvergence {
                    what: "tip boxes are not contracting",
                    iters: k,
                    residual: step,
                });
            }
        }
        prev_center = Some(center);
        prev_diam = diam;
    }
    let _ = center;
    // The deepest level is degenerate to within sup|eps_depth|, and a
    // degenerate map has tip exactly (f(c), c).  Projecting that point down
    // the chart tower beats the box center by orders of magnitude: the box
    // diameter stays an honest (if pessimistic) error bound.
    let g = tower.level(depth);
    let c = g.f.critical_point();
    let v = g.f.eval(c);
    let tau = microscope(tower, &vec![Sym::V; depth], [v, c])?;
    Ok(TipData { tau, depth_used: depth, diameter_bound: diam })
}

/// Average Jacobian over the attractor's adding-machine measure, estimated
/// on depth-n cylinders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvgJacobian {
    pub b: f64,
    pub depth: usize,
    pub log_jac_samples: Vec<f64>,
}

pub fn average_jacobian(tower: &RenormTower, n: usize) -> Result<AvgJacobian> {
    let pieces = cantor_pieces(tower, n)?;
    let map = tower.level(0);
    let mut log_jac_samples = Vec::with_capacity(pieces.pieces.len());
    for piece in &pieces.pieces {
        let j = jacobian(map, piece.rep)?;
        if j <= 0.0 {
            return Err(Error::Singular(
                "nonpositive Jacobian sample: average Jacobian undefined",
            ));
        }
        log_jac_samples.push(j.ln());
    }
    let mean = log_jac_samples.iter().sum::<f64>() / log_jac_samples.len() as f64;
    Ok(AvgJacobian { b: mean.exp(), depth: n, log_jac_samples })
}

/// Depth-escalating estimate: start at depth 5 (or the tower's depth) and
/// deepen until successive values agree to 1e-8 or depth 8.
pub fn average_jacobian_auto(tower: &RenormTower) -> Result<AvgJacobian> {
    let mut n = 5.min(tower.depth());
    let cap = 8.min(tower.depth());
    let mut cur = average_jacobian(tower, n)?;
    while n < cap {
        let next = average_jacobian(tower, n + 1)?;
        n += 1;
        let gap = (next.b - cur.b).abs();
        cur = next;
        if gap < 1e-8 {
            break;
        }
    }
    Ok(cur)
}

/// Samples of the universal function a(x) extracted from level n:
/// eps_n(x, y) ~ b^(2^n) a(x) y, so a(x) is estimated as the y-average of
/// eps_n(x,y)/(b^(2^n) y) with the spread across y as an error bar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniversalFunction {
    pub n: usize,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    /// relative spread across the y-samples, per grid point
    pub spread: Vec<f64>,
    /// false when any spread exceeds 50%: asymptotic regime not reached
    pub asymptotic: bool,
}

pub fn universal_function(
    tower: &RenormTower,
    n: usize,
    grid: &[f64],
    b: f64,
) -> Result<UniversalFunction> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "universal_function level", value: n as f64 });
    }
    if tower.depth() < n {
        return Err(Error::TowerTooShallow {
            op: "universal_function",
            needed: n,
            have: tower.depth(),
        });
    }
    let eps = &tower.level(n).eps;
    if eps.is_zero() {
        return Err(Error::Singular("degenerate map: no universal function"));
    }
    // log-scale factor exp(log_scale - 2^n ln b) stays O(1) even when both
    // pieces underflow separately
    let scale = (eps.log_scale - (1u64 << n) as f64 * b.ln()).exp();
    let ys = [-0.9, -0.6, -0.3, 0.3, 0.6, 0.9];
    let mut a = Vec::with_capacity(grid.len());
    let mut spread = Vec::with_capacity(grid.len());
    for &x in grid {
        let vals: Vec<f64> = ys.iter().map(|&y| eps.norm_val(x, y) / y * scale).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        a.push(mean);
        spread.push((hi - lo) / mean.abs().max(1e-300));
    }
    let asymptotic = spread.iter().all(|&s| s <= 0.5);
    Ok(UniversalFunction { n, x: grid.to_vec(), a, spread, asymptotic })
}
