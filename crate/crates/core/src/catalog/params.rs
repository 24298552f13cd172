use serde::{Deserialize, Serialize};

/// Scalar exponents shared by the inequality family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub m: f64,
    pub r: f64,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub r0: f64,
}

impl Default for ExponentParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
            delta: 0.5,
            m: 1.0,
            r: 1.0,
            s: 1.0,
            p: 2.0,
            q: 2.0,
            r0: 0.5,
        }
    }
}

/// Tolerance on `1/p + 1/q = 1`.
pub const CONJUGACY_TOL: f64 = 1e-12;

impl ExponentParams {
    /// Sets `p`, the conjugate `q = p/(p−1)` and `r0 = min(1/p, 1/q)`.
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self.q = p / (p - 1.0);
        self.r0 = (1.0 / p).min(1.0 / self.q);
        self
    }

    pub fn conjugate_ok(&self) -> bool {
        self.p > 1.0
            && self.q > 1.0
            && (1.0 / self.p + 1.0 / self.q - 1.0).abs() <= CONJUGACY_TOL
            && (self.r0 - (1.0 / self.p).min(1.0 / self.q)).abs() <= CONJUGACY_TOL
    }

    pub fn all_finite(&self) -> bool {
        [
            self.alpha, self.beta, self.gamma, self.delta, self.m, self.r, self.s, self.p, self.q,
            self.r0,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}
