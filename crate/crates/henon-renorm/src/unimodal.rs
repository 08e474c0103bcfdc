//! Analytic unimodal maps of [-1, 1] and their period-doubling
//! renormalization Rf = h^{-1} o f^2 o h, where h is the affine map taking
//! [-1, 1] onto the renormalization interval J = [f^2(c), f^4(c)].

use serde::{Deserialize, Serialize};

use crate::cheb::{self, Cheb1};
use crate::error::{Error, Result};

/// Unimodal map as a Chebyshev series on [-1, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnimodalMap {
    pub coeffs: Vec<f64>,
}

/// Critical point, critical value and the precritical points (preimages of
/// c).  A branch whose range does not reach down to c has no preimage inside
/// [-1, 1]; that side is None.  The doubling fixed point itself is such a
/// case: its left branch stays above c.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalData {
    pub c: f64,
    pub v: f64,
    pub c_minus: Option<f64>,
    pub c_plus: Option<f64>,
}

/// Converged doubling fixed point with its scaling factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointData {
    pub f_star: UnimodalMap,
    pub sigma: f64,
    pub lambda: f64,
    pub residual: f64,
}

/// One renormalization step with the affine data h(x) = m + r x kept around;
/// downstream code needs m, r to push points between levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnimodalRenorm {
    pub map: UnimodalMap,
    pub m: f64,
    pub r: f64,
    pub c: f64,
    pub v: f64,
    pub f2c: f64,
    pub f4c: f64,
}

impl UnimodalMap {
    pub fn new(coeffs: Vec<f64>) -> Self {
        UnimodalMap { coeffs }
    }

    /// The height family 1 - a x^2 written in the Chebyshev basis, padded to
    /// `n` coefficients.
    pub fn quadratic(a: f64, n: usize) -> Self {
        let mut c = vec![0.0; n.max(3)];
        c[0] = 1.0 - 0.5 * a;
        c[2] = -0.5 * a;
        UnimodalMap { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        cheb::clenshaw(&self.coeffs, x)
    }

    pub fn deriv_coeffs(&self) -> Vec<f64> {
        cheb::der_coeffs(&self.coeffs)
    }

    pub fn as_cheb(&self) -> Cheb1 {
        Cheb1::new(self.coeffs.clone(), [-1.0, 1.0])
    }

    /// Critical point: coarse argmax then Newton on f'.
    pub fn critical_point(&self) -> f64 {
        self.as_cheb().argmax(-0.999, 0.999)
    }

    /// Check the unimodal invariants: range inside [-1, 1] (1e-12 slack on a
    /// dense sample) and a single interior sign change of f'.
    pub fn validate(&self) -> Result<()> {
        let d = self.deriv_coeffs();
        let mut changes = 0;
        let mut prev = cheb::clenshaw(&d, -0.999);
        for i in 0..=400 {
            let x = -1.0 + 2.0 * i as f64 / 400.0;
            let v = self.eval(x);
            if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&v) || !v.is_finite() {
                return Err(Error::OutOfRange { what: "unimodal range", value: v });
            }
            if x > -0.999 && x < 0.999 {
                let dv = cheb::clenshaw(&d, x);
                if prev * dv < 0.0 {
                    changes += 1;
                }
                if dv != 0.0 {
                    prev = dv;
                }
            }
        }
        if changes != 1 {
            return Err(Error::OutOfRange { what: "sign changes of f'", value: changes as f64 });
        }
        let c = self.critical_point();
        let d2 = cheb::der_coeffs(&d);
        if cheb::clenshaw(&d2, c) >= 0.0 {
            return Err(Error::OutOfRange { what: "f'' at critical point", value: cheb::clenshaw(&d2, c) });
        }
        Ok(())
    }
}

/// Evaluate with the domain check demanded by the public contract.
pub fn eval_unimodal(f: &UnimodalMap, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { what: "unimodal argument", value: x });
    }
    Ok(f.eval(x))
}

/// Critical point, value and the two preimages of c.
pub fn critical_data(f: &UnimodalMap) -> Result<CriticalData> {
    let c = f.critical_point();
    let v = f.eval(c);
    if v < c {
        return Err(Error::OutOfRange { what: "critical value below critical point", value: v });
    }
    let d = f.deriv_coeffs();
    let solve_branch = |a: f64, b: f64| -> Option<f64> {
        let g = |x: f64| f.eval(x) - c;
        if g(a) * g(b) > 0.0 {
            return None;
        }
        Some(crate::roots::bisect_newton(
            |x| (f.eval(x) - c, cheb::clenshaw(&d, x)),
            a,
            b,
            40,
            20,
        ))
    };
    let c_minus = solve_branch(-1.0, c);
    let c_plus = solve_branch(c, 1.0);
    if c_minus.is_none() && c_plus.is_none() {
        return Err(Error::Bracket { what: "precritical point" });
    }
    Ok(CriticalData { c, v, c_minus, c_plus })
}

/// One doubling step with affine data.  Fails with a named condition when f
/// is not renormalizable.
pub fn renorm_step(f: &UnimodalMap) -> Result<UnimodalRenorm> {
    let c = f.critical_point();
    let v = f.eval(c);
    // normalized maps have v = 1 exactly; allow headroom so nearby maps
    // (finite-difference perturbations, mid-Newton iterates) still step
    if !v.is_finite() || v.abs() > 1.8 {
        return Err(Error::renorm("critical value escapes the interval", -1));
    }
    let f2c = f.eval(v);
    let f4c = f.eval(f.eval(f2c));
    if !(f2c.is_finite() && f4c.is_finite()) {
        return Err(Error::renorm("second/fourth critical iterates not finite", -1));
    }
    let (jlo, jhi) = (f2c.min(f4c), f2c.max(f4c));
    if jhi - jlo < 1e-12 {
        return Err(Error::renorm("degenerate renormalization interval", -1));
    }
    if !(jlo + 1e-12 < c && c < jhi - 1e-12) {
        return Err(Error::renorm("renormalization interval misses the critical point", 1));
    }
    // J contains c, so f(J) = [min(f(jlo), f(jhi)), v]; disjointness from J
    // reduces to jhi < min over the endpoints.
    let fj_lo = f.eval(jlo).min(f.eval(jhi));
    if jhi >= fj_lo - 1e-12 {
        return Err(Error::renorm("renormalization interval meets its image", 1));
    }
    let m = 0.5 * (f2c + f4c);
    let r = 0.5 * (f2c - f4c);
    let n = f.coeffs.len();
    let vals: Vec<f64> = cheb::chebpts(n)
        .iter()
        .map(|&z| (f.eval(f.eval(m + r * z)) - m) / r)
        .collect();
    let map = UnimodalMap::new(cheb::fit_values(&vals));
    Ok(UnimodalRenorm { map, m, r, c, v, f2c, f4c })
}

/// The doubling operator, validated output.
pub fn renormalize_unimodal(f: &UnimodalMap) -> Result<UnimodalMap> {
    let step = renorm_step(f)?;
    step.map.validate()?;
    Ok(step.map)
}

fn residual(f: &UnimodalMap) -> Result<Vec<f64>> {
    let step = renorm_step(f)?;
    Ok(step.map.coeffs.iter().zip(&f.coeffs).map(|(a, b)| a - b).collect())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton iteration on the collocated residual Rf - f, with a
/// finite-difference Jacobian and step halving when the residual grows.
pub fn solve_fixed_point(initial: &UnimodalMap, tol: f64) -> Result<FixedPointData> {
    if tol <= 0.0 {
        return Err(Error::Config("tol must be positive".into()));
    }
    let mut f = initial.clone();
    let mut res = residual(&f)?;
    let mut rn = sup(&res);
    // a few plain doubling steps pull generic seeds into the Newton basin
    if rn >= tol {
        let mut g = f.clone();
        for _ in 0..3 {
            match renorm_step(&g) {
                Ok(s) => g = s.map,
                Err(_) => break,
            }
            if let Ok(r) = residual(&g) {
                let s = sup(&r);
                if s < rn {
                    f = g.clone();
                    res = r;
                    rn = s;
                }
            } else {
                break;
            }
        }
    }
    let n = f.coeffs.len();
    let mut iters = 0usize;
    while rn >= tol {
        iters += 1;
        if iters > 40 {
            return Err(Error::NoConvergence { what: "fixed-point Newton", iters, residual: rn });
        }
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = 1e-7 * f.coeffs[j].abs().max(1.0);
            let mut fp = f.clone();
            fp.coeffs[j] += h;
            let rp = residual(&fp)?;
            for i in 0..n {
                jac[(i, j)] = (rp[i] - res[i]) / h;
            }
        }
        let rhs = nalgebra::DVector::from_column_slice(&res);
        let delta = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::Singular("fixed-point Newton system"))?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let mut cand = f.clone();
            for j in 0..n {
                cand.coeffs[j] -= scale * delta[j];
            }
            if let Ok(r) = residual(&cand) {
                let s = sup(&r);
                if s < rn || s < tol {
                    f = cand;
                    res = r;
                    rn = s;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { what: "fixed-point line search", iters, residual: rn });
        }
    }
    let step = renorm_step(&f)?;
    let sigma = 0.5 * (step.f4c - step.f2c).abs();
    Ok(FixedPointData { f_star: f, sigma, lambda: 1.0 / sigma, residual: rn })
}
