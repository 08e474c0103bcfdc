//! Chebyshev collocation primitives.
//!
//! Everything downstream (renormalization steps, graph transforms, invariant
//! extraction) represents smooth functions as Chebyshev series on an interval
//! or a rectangle.  Fits use the first-kind points, so no FFT machinery is
//! needed at the degrees we run (<= ~80).

use serde::{Deserialize, Serialize};

/// First-kind Chebyshev points, x_k = cos(pi (k + 1/2) / n), k = 0..n-1.
/// Note the points run from +1 side down to -1 side (x_0 is the largest).
pub fn chebpts(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
        .collect()
}

/// Interpolate values sampled at `chebpts(n)` by a degree n-1 series.
pub fn fit_values(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut c = vec![0.0; n];
    for (j, cj) in c.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, v) in vals.iter().enumerate() {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            acc += v * (j as f64 * th).cos();
        }
        *cj = 2.0 * acc / n as f64;
    }
    c[0] *= 0.5;
    c
}

/// Clenshaw evaluation of a Chebyshev series at z in [-1, 1] (not enforced).
pub fn clenshaw(coeffs: &[f64], z: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let t = 2.0 * z * b1 - b2 + c;
        b2 = b1;
        b1 = t;
    }
    coeffs.first().unwrap_or(&0.0) + z * b1 - b2
}

/// Derivative coefficients on [-1, 1] (no domain scaling applied).
pub fn der_coeffs(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n - 1];
    let mut w2 = 0.0;
    let mut w1 = 0.0;
    for k in (0..n - 1).rev() {
        let w = w2 + 2.0 * (k as f64 + 1.0) * coeffs[k + 1];
        d[k] = w;
        w2 = w1;
        w1 = w;
    }
    d[0] *= 0.5;
    d
}

/// Antiderivative coefficients on [-1, 1]; the constant term is left at zero.
pub fn int_coeffs(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut b = vec![0.0; n + 1];
    for k in 1..=n {
        // int T_0 = T_1 (not T_1 / 2), hence the doubled k=1 numerator
        let lo = if k == 1 { 2.0 * coeffs[0] } else { coeffs[k - 1] };
        let hi = if k + 1 <= n - 1 { coeffs[k + 1] } else { 0.0 };
        b[k] = (lo - hi) / (2.0 * k as f64);
    }
    b
}

/// Mean of T_k over [-1, 1] with respect to dx/2: 1 for k=0, 0 for odd k,
/// -1/(k^2-1) for even k >= 2.
pub fn mean_weight(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else if k % 2 == 1 {
        0.0
    } else {
        -1.0 / ((k * k) as f64 - 1.0)
    }
}

/// Chebyshev series on an interval [dom[0], dom[1]].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cheb1 {
    pub coeffs: Vec<f64>,
    pub dom: [f64; 2],
}

impl Cheb1 {
    pub fn new(coeffs: Vec<f64>, dom: [f64; 2]) -> Self {
        Cheb1 { coeffs, dom }
    }

    /// Fit `f` with `n` coefficients (degree n-1) at the first-kind points.
    pub fn fit(dom: [f64; 2], n: usize, f: impl Fn(f64) -> f64) -> Self {
        let vals: Vec<f64> = chebpts(n).iter().map(|&z| f(Self::from_unit_dom(dom, z))).collect();
        Cheb1 { coeffs: fit_values(&vals), dom }
    }

    /// Fit from values already sampled at the mapped first-kind points.
    pub fn from_samples(dom: [f64; 2], vals: &[f64]) -> Self {
        Cheb1 { coeffs: fit_values(vals), dom }
    }

    fn from_unit_dom(dom: [f64; 2], z: f64) -> f64 {
        0.5 * (dom[0] + dom[1]) + 0.5 * (dom[1] - dom[0]) * z
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - (self.dom[1] + self.dom[0])) / (self.dom[1] - self.dom[0])
    }

    pub fn from_unit(&self, z: f64) -> f64 {
        Self::from_unit_dom(self.dom, z)
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_unit(x))
    }

    pub fn deriv(&self) -> Cheb1 {
        let mut d = der_coeffs(&self.coeffs);
        let scl = 2.0 / (self.dom[1] - self.dom[0]);
        for c in &mut d {
            *c *= scl;
        }
        Cheb1 { coeffs: d, dom: self.dom }
    }

    /// Zero out relative trailing noise; keeps evaluation stable after
    /// repeated compositions.
    pub fn trim_tail(&mut self, rel: f64) {
        let mx = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if mx > 0.0 {
            for c in &mut self.coeffs {
                if c.abs() < rel * mx {
                    *c = 0.0;
                }
            }
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Last-coefficient magnitude relative to the largest; a convergence
    /// diagnostic for the fit degree.
    pub fn tail_ratio(&self) -> f64 {
        let mx = self.max_abs_coeff();
        if mx == 0.0 {
            return 0.0;
        }
        let k = self.coeffs.len().saturating_sub(3);
        self.coeffs[k..].iter().fold(0.0f64, |m, c| m.max(c.abs())) / mx
    }

    /// Location of the interior maximum of this series: coarse sample, then
    /// Newton on the derivative.
    pub fn argmax(&self, lo: f64, hi: f64) -> f64 {
        let d = self.deriv();
        let d2 = d.deriv();
        let mut best = lo;
        let mut bv = f64::NEG_INFINITY;
        for i in 0..=200 {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            let v = self.eval(x);
            if v > bv {
                bv = v;
                best = x;
            }
        }
        let mut x = best;
        for _ in 0..60 {
            let dd = d2.eval(x);
            if dd == 0.0 {
                break;
            }
            let step = d.eval(x) / dd;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x
    }
}

/// Tensor-product Chebyshev series on a rectangle.  Coefficient `c[i][j]`
/// multiplies T_i(x) T_j(y).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cheb2 {
    pub coeffs: Vec<Vec<f64>>,
    pub domx: [f64; 2],
    pub domy: [f64; 2],
}

impl Cheb2 {
    pub fn new(coeffs: Vec<Vec<f64>>, domx: [f64; 2], domy: [f64; 2]) -> Self {
        Cheb2 { coeffs, domx, domy }
    }

    /// Fit from a value grid vals[i][k] = f(x_i, y_k) at first-kind points in
    /// both directions.
    pub fn from_grid(domx: [f64; 2], domy: [f64; 2], vals: &[Vec<f64>]) -> Self {
        let nx = vals.len();
        let ny = vals[0].len();
        // transform rows (y direction), then columns (x direction)
        let rows: Vec<Vec<f64>> = vals.iter().map(|r| fit_values(r)).collect();
        let mut coeffs = vec![vec![0.0; ny]; nx];
        let mut col = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = rows[i][j];
            }
            let cj = fit_values(&col);
            for i in 0..nx {
                coeffs[i][j] = cj[i];
            }
        }
        Cheb2 { coeffs, domx, domy }
    }

    pub fn fit(domx: [f64; 2], domy: [f64; 2], nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = chebpts(nx);
        let ys = chebpts(ny);
        let vals: Vec<Vec<f64>> = xs
            .iter()
            .map(|&zx| {
                let x = 0.5 * (domx[0] + domx[1]) + 0.5 * (domx[1] - domx[0]) * zx;
                ys.iter()
                    .map(|&zy| {
                        let y = 0.5 * (domy[0] + domy[1]) + 0.5 * (domy[1] - domy[0]) * zy;
                        f(x, y)
                    })
                    .collect()
            })
            .collect();
        Self::from_grid(domx, domy, &vals)
    }

    fn zx(&self, x: f64) -> f64 {
        (2.0 * x - (self.domx[1] + self.domx[0])) / (self.domx[1] - self.domx[0])
    }

    fn zy(&self, y: f64) -> f64 {
        (2.0 * y - (self.domy[1] + self.domy[0])) / (self.domy[1] - self.domy[0])
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let zx = self.zx(x);
        let zy = self.zy(y);
        // Clenshaw in x with the y-evaluated rows as scalar coefficients
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for row in self.coeffs.iter().skip(1).rev() {
            let c = clenshaw(row, zy);
            let t = 2.0 * zx * b1 - b2 + c;
            b2 = b1;
            b1 = t;
        }
        let c0 = self.coeffs.first().map_or(0.0, |r| clenshaw(r, zy));
        c0 + zx * b1 - b2
    }

    /// Partial derivative in x.
    pub fn dx(&self) -> Cheb2 {
        let nx = self.coeffs.len();
        let ny = self.coeffs[0].len();
        let scl = 2.0 / (self.domx[1] - self.domx[0]);
        let mut out = vec![vec![0.0; ny]; nx.saturating_sub(1).max(1)];
        let mut col = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = self.coeffs[i][j];
            }
            let d = der_coeffs(&col);
            for (i, dv) in d.iter().enumerate() {
                out[i][j] = dv * scl;
            }
        }
        Cheb2 { coeffs: out, domx: self.domx, domy: self.domy }
    }

    /// Partial derivative in y.
    pub fn dy(&self) -> Cheb2 {
        let scl = 2.0 / (self.domy[1] - self.domy[0]);
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| der_coeffs(row).iter().map(|d| d * scl).collect())
            .collect();
        Cheb2 { coeffs, domx: self.domx, domy: self.domy }
    }

    /// Antiderivative in y followed by subtraction of the y-mean of each row,
    /// taken over `mean_dom` (a subinterval of domy in unit coordinates is
    /// not supported: mean is over the full domy square weights).
    pub fn int_y_zero_mean(&self) -> Cheb2 {
        let scl = 0.5 * (self.domy[1] - self.domy[0]);
        let coeffs: Vec<Vec<f64>> = self
            .coeffs
            .iter()
            .map(|row| {
                let mut b: Vec<f64> = int_coeffs(row).iter().map(|v| v * scl).collect();
                let mean: f64 = b.iter().enumerate().map(|(k, v)| v * mean_weight(k)).sum();
                b[0] -= mean;
                b
            })
            .collect();
        Cheb2 { coeffs, domx: self.domx, domy: self.domy }
    }

    /// Max |f| sampled on an n x n uniform grid over the rectangle.
    pub fn sup_on_grid(&self, n: usize) -> f64 {
        let mut m = 0.0f64;
        for i in 0..n {
            let x = self.domx[0] + (self.domx[1] - self.domx[0]) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let y = self.domy[0] + (self.domy[1] - self.domy[0]) * j as f64 / (n - 1) as f64;
                m = m.max(self.eval(x, y).abs());
            }
        }
        m
    }
}
