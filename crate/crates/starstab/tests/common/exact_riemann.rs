//! Exact Riemann solver for the barotropic Euler system `P = K rho^gamma`,
//! used as the oracle for the finite-volume scheme. The system has two
//! characteristic families, so the solution is two waves (shock or
//! rarefaction each) around a single middle state.

#[derive(Debug, Clone, Copy)]
pub struct BarotropicState {
    pub rho: f64,
    pub u: f64,
}

pub struct ExactRiemann {
    pub k: f64,
    pub gamma: f64,
    pub left: BarotropicState,
    pub right: BarotropicState,
    pub middle: BarotropicState,
}

impl ExactRiemann {
    fn sound(&self, rho: f64) -> f64 {
        (self.k * self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
    }

    fn pressure(&self, rho: f64) -> f64 {
        self.k * rho.powf(self.gamma)
    }

    /// u reachable from the left state through a 1-wave to density rho.
    fn u_from_left(&self, rho: f64) -> f64 {
        let l = self.left;
        if rho <= l.rho {
            // rarefaction: u + 2c/(gamma-1) invariant
            l.u + 2.0 / (self.gamma - 1.0) * (self.sound(l.rho) - self.sound(rho))
        } else {
            let dp = self.pressure(rho) - self.pressure(l.rho);
            l.u - (dp * (rho - l.rho) / (rho * l.rho)).sqrt()
        }
    }

    /// u reachable from the right state through a 3-wave to density rho.
    fn u_from_right(&self, rho: f64) -> f64 {
        let r = self.right;
        if rho <= r.rho {
            r.u - 2.0 / (self.gamma - 1.0) * (self.sound(r.rho) - self.sound(rho))
        } else {
            let dp = self.pressure(rho) - self.pressure(r.rho);
            r.u + (dp * (rho - r.rho) / (rho * r.rho)).sqrt()
        }
    }

    pub fn solve(k: f64, gamma: f64, left: BarotropicState, right: BarotropicState) -> Self {
        let mut s = ExactRiemann { k, gamma, left, right, middle: left };
        // f(rho) = u_from_left - u_from_right is strictly decreasing
        let mut lo = 1e-12 * left.rho.min(right.rho);
        let mut hi = 1e3 * left.rho.max(right.rho);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = s.u_from_left(mid) - s.u_from_right(mid);
            if f > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho_star = 0.5 * (lo + hi);
        s.middle = BarotropicState { rho: rho_star, u: 0.5 * (s.u_from_left(rho_star) + s.u_from_right(rho_star)) };
        s
    }

    /// Self-similar solution sampled at xi = x / t.
    pub fn sample(&self, xi: f64) -> BarotropicState {
        let g = self.gamma;
        let (l, r, m) = (self.left, self.right, self.middle);
        // left wave
        if m.rho > l.rho {
            // 1-shock with speed from mass conservation
            let j = ((self.pressure(m.rho) - self.pressure(l.rho)) * m.rho * l.rho
                / (m.rho - l.rho))
                .sqrt();
            let s1 = l.u - j / l.rho;
            if xi <= s1 {
                return l;
            }
        } else {
            let head = l.u - self.sound(l.rho);
            let tail = m.u - self.sound(m.rho);
            if xi <= head {
                return l;
            }
            if xi < tail {
                // inside the left fan: u = xi + c, u + 2c/(g-1) = invariant
                let inv = l.u + 2.0 * self.sound(l.rho) / (g - 1.0);
                let c = (g - 1.0) * (inv - xi) / (g + 1.0);
                let rho = (c * c / (self.k * g)).powf(1.0 / (g - 1.0));
                return BarotropicState { rho, u: xi + c };
            }
        }
        // right wave
        if m.rho > r.rho {
            let j = ((self.pressure(m.rho) - self.pressure(r.rho)) * m.rho * r.rho
                / (m.rho - r.rho))
                .sqrt();
            let s3 = r.u + j / r.rho;
            if xi >= s3 {
                return r;
            }
        } else {
            let head = r.u + self.sound(r.rho);
            let tail = m.u + self.sound(m.rho);
            if xi >= head {
                return r;
            }
            if xi > tail {
                let inv = r.u - 2.0 * self.sound(r.rho) / (g - 1.0);
                let c = (g - 1.0) * (xi - inv) / (g + 1.0);
                let rho = (c * c / (self.k * g)).powf(1.0 / (g - 1.0));
                return BarotropicState { rho, u: xi - c };
            }
        }
        m
    }
}
