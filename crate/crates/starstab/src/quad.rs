//! Quadrature helpers shared by the functional and spectral modules.

/// 5-point Gauss-Legendre nodes on [-1, 1].
pub const GAUSS5_X: [f64; 5] = [
    -0.906179845938663992797626878299,
    -0.538469310105683091036314420700,
    0.0,
    0.538469310105683091036314420700,
    0.906179845938663992797626878299,
];

/// 5-point Gauss-Legendre weights on [-1, 1].
pub const GAUSS5_W: [f64; 5] = [
    0.236926885056189087514264040720,
    0.478628670499366468041291514836,
    0.568888888888888888888888888889,
    0.478628670499366468041291514836,
    0.236926885056189087514264040720,
];

/// Integrate `f` over [a, b] with 5-point Gauss-Legendre.
pub fn gauss5<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GAUSS5_X.iter().zip(GAUSS5_W.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Composite Simpson over [a, b] with `panels` panels (each panel uses the
/// midpoint, so `f` is evaluated at `2 * panels + 1` points).
pub fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    assert!(panels >= 1);
    let n = panels;
    let h = (b - a) / n as f64;
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        let x0 = a + i as f64 * h;
        let x2 = a + (i + 1) as f64 * h;
        let x1 = 0.5 * (x0 + x2);
        acc.add((h / 6.0) * (f(x0) + 4.0 * f(x1) + f(x2)));
    }
    acc.total()
}

/// Adaptive Simpson with absolute tolerance; used by enthalpy tabulation and
/// by test oracles.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(a: f64, b: f64, tol: f64, f: &F) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_rec(a, b, fa, fm, fb, whole, tol, f, 50)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    f: &F,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    // never demand accuracy below the round-off floor of the local value
    let tol_eff = tol.max((left.abs() + right.abs()) * 4.0 * f64::EPSILON);
    if depth == 0 || err.abs() <= 15.0 * tol_eff {
        return left + right + err / 15.0;
    }
    adaptive_rec(a, m, fa, flm, fm, left, 0.5 * tol, f, depth - 1)
        + adaptive_rec(m, b, fm, frm, fb, right, 0.5 * tol, f, depth - 1)
}

/// Compensated (Neumaier) summation; keeps long diagnostic sums at round-off.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum(values: &[f64]) -> f64 {
    let mut s = NeumaierSum::new();
    for &v in values {
        s.add(v);
    }
    s.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss5_exact_for_degree_nine() {
        let exact = 2.0 / 10.0; // int_{-1}^{1} x^9 dx = 0; use x^8: 2/9
        let v = gauss5(-1.0, 1.0, |x| x.powi(8));
        assert_relative_eq!(v, 2.0 / 9.0, max_relative = 1e-13);
        let odd = gauss5(-1.0, 1.0, |x| x.powi(9));
        assert!(odd.abs() < 1e-15, "odd power should vanish, got {odd}");
        let _ = exact;
    }

    #[test]
    fn simpson_converges_fourth_order() {
        let f = |x: f64| (3.0 * x).sin().exp();
        let exact = adaptive_simpson(0.0, 1.0, 1e-14, &f);
        let e1 = (simpson(0.0, 1.0, 8, f) - exact).abs();
        let e2 = (simpson(0.0, 1.0, 16, f) - exact).abs();
        assert!(e1 / e2 > 12.0, "order too low: {} vs {}", e1, e2);
    }

    #[test]
    fn neumaier_beats_naive() {
        let vals: Vec<f64> = (0..100_000).map(|i| 0.1 + 1e-18 * i as f64).collect();
        let s = neumaier_sum(&vals);
        let expected = 0.1 * 100_000.0 + 1e-18 * (99_999.0 * 100_000.0 / 2.0);
        assert_relative_eq!(s, expected, max_relative = 1e-14);
    }
}
