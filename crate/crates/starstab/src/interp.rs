//! Piecewise-cubic interpolation: plain Hermite evaluation plus the
//! monotonicity-preserving Fritsch-Carlson (PCHIP) slope limiter used for
//! tabulated enthalpies.

/// Evaluate the cubic Hermite interpolant on [x0, x1] with endpoint values
/// and derivatives.
pub fn hermite(x: f64, x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h * (h10 * d0 + h11 * d1) + h01 * y1
}

/// Derivative of [`hermite`] with respect to `x`.
pub fn hermite_deriv(x: f64, x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    dh00 * y0 + dh10 * d0 + dh11 * d1 + dh01 * y1
}

/// A sampled function with per-node derivatives, evaluated as a C^1
/// piecewise-cubic. Nodes must be strictly increasing.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dydx: Vec<f64>,
}

impl CubicHermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dydx: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert_eq!(x.len(), dydx.len());
        assert!(x.len() >= 2);
        debug_assert!(x.windows(2).all(|w| w[1] > w[0]));
        Self { x, y, dydx }
    }

    /// PCHIP slopes: shape-preserving, so a monotone table stays monotone.
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2);
        let mut d = vec![0.0; n];
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
            return Self::new(x, y, d);
        }
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Self::new(x, y, d)
    }

    fn cell(&self, x: f64) -> usize {
        match self.x.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(j) => j.min(self.x.len() - 2),
            Err(j) => j.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    /// Interpolated value; linear extrapolation outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0] + self.dydx[0] * (x - self.x[0]);
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1] + self.dydx[n - 1] * (x - self.x[n - 1]);
        }
        let j = self.cell(x);
        hermite(
            x,
            self.x[j],
            self.x[j + 1],
            self.y[j],
            self.y[j + 1],
            self.dydx[j],
            self.dydx[j + 1],
        )
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.dydx[0];
        }
        if x >= self.x[n - 1] {
            return self.dydx[n - 1];
        }
        let j = self.cell(x);
        hermite_deriv(
            x,
            self.x[j],
            self.x[j + 1],
            self.y[j],
            self.y[j + 1],
            self.dydx[j],
            self.dydx[j + 1],
        )
    }

    /// Invert a strictly increasing interpolant by bisection + Newton.
    /// Returns `None` when `target` is outside the table range.
    pub fn invert_monotone(&self, target: f64) -> Option<f64> {
        let n = self.x.len();
        if target < self.y[0] || target > self.y[n - 1] {
            return None;
        }
        let j = match self.y.binary_search_by(|v| v.total_cmp(&target)) {
            Ok(j) => return Some(self.x[j]),
            Err(j) => j.saturating_sub(1).min(n - 2),
        };
        let (mut lo, mut hi) = (self.x[j], self.x[j + 1]);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let f = self.eval(x) - target;
            if f == 0.0 {
                return Some(x);
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let df = self.eval_deriv(x);
            let newton = if df > 0.0 { x - f / df } else { f64::NAN };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo) <= 4.0 * f64::EPSILON * (x.abs() + f64::MIN_POSITIVE) {
                break;
            }
        }
        Some(x)
    }
}

fn pchip_end(h0: f64, h1: f64, delta0: f64, delta1: f64) -> f64 {
    // One-sided three-point estimate, limited to preserve shape.
    let d = ((2.0 * h0 + h1) * delta0 - h0 * delta1) / (h0 + h1);
    if d * delta0 <= 0.0 {
        0.0
    } else if delta0 * delta1 < 0.0 && d.abs() > 3.0 * delta0.abs() {
        3.0 * delta0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let df = |x: f64| 6.0 * x * x - 1.0;
        let v = hermite(0.3, 0.0, 1.0, f(0.0), f(1.0), df(0.0), df(1.0));
        assert_relative_eq!(v, f(0.3), max_relative = 1e-14);
        let d = hermite_deriv(0.7, 0.0, 1.0, f(0.0), f(1.0), df(0.0), df(1.0));
        assert_relative_eq!(d, df(0.7), max_relative = 1e-13);
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = x.iter().map(|&t| (t - 4.0).tanh() + 1.0 + 1e-3 * t).collect();
        let c = CubicHermite::pchip(x.clone(), y);
        let mut prev = c.eval(0.0);
        let mut t = 0.01;
        while t < 9.8 {
            let v = c.eval(t);
            assert!(v >= prev - 1e-12, "not monotone at {t}");
            prev = v;
            t += 0.01;
        }
    }

    #[test]
    fn invert_monotone_round_trip() {
        let x: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&t| t.exp()).collect();
        let c = CubicHermite::pchip(x, y);
        for &t in &[0.31, 2.7, 5.9, 9.2] {
            let target = c.eval(t);
            let back = c.invert_monotone(target).unwrap();
            assert_relative_eq!(back, t, max_relative = 1e-12);
        }
        assert!(c.invert_monotone(-1.0).is_none());
    }
}
