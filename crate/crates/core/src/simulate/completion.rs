//! Completion of finite-horizon estimates by the branching property.
//!
//! From the state `(x, y)` at the last simulated jump the continuous-time
//! process splits into `x + y` independent subtrees, so
//! `W^CT = e^{−mτₙ} Σ Wᵢ` with each `Wᵢ` distributed as `X` (red root) or `Y`
//! (black root). The unexplained part `Σ (Wᵢ − E Wᵢ)` has cumulants
//! `x κₖ(X) + y κₖ(Y)`; it is drawn from a Cornish–Fisher expansion that
//! matches the first three exactly. The discrete limit given `Uₙ = (x, y)` is
//! the `W^DT` of a fresh urn started at `(x, y)`, whose moments follow from
//! `W^CT = ξ^σ W^DT` with `ξ ~ Gamma((x+y)/S)` independent.

use crate::error::Result;
use crate::moments::{gamma_moment, moment_recursion, MomentTable};
use crate::params::{Composition, UrnParams};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completion {
    #[default]
    None,
    Branching,
}

impl Completion {
    pub fn name(&self) -> &'static str {
        match self {
            Completion::None => "none",
            Completion::Branching => "branching",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Completion::None),
            "branching" => Some(Completion::Branching),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchingCompletion {
    params: UrnParams,
    mean: (f64, f64),
    var: (f64, f64),
    k3: (f64, f64),
}

/// First three raw moments from cumulants.
fn raw_moments(k1: f64, k2: f64, k3: f64) -> [f64; 3] {
    [k1, k2 + k1 * k1, k3 + 3.0 * k1 * k2 + k1.powi(3)]
}

/// `(mean, variance, third cumulant)` from raw moments.
fn cumulants(m: [f64; 3]) -> (f64, f64, f64) {
    let var = m[1] - m[0] * m[0];
    let k3 = m[2] - 3.0 * m[0] * m[1] + 2.0 * m[0].powi(3);
    (m[0], var, k3)
}

/// Variance-preserving Cornish–Fisher transform of a standard normal.
fn cornish_fisher(z: f64, var: f64, k3: f64) -> f64 {
    if var <= 0.0 {
        return 0.0;
    }
    let sd = var.sqrt();
    let g = k3 / (sd * sd * sd);
    sd * (z + g / 6.0 * (z * z - 1.0)) / (1.0 + g * g / 18.0).sqrt()
}

impl BranchingCompletion {
    pub fn new(p: &UrnParams) -> Result<Self> {
        Ok(Self::from_table(&moment_recursion(p, 3)?))
    }

    pub fn from_table(t: &MomentTable) -> Self {
        BranchingCompletion {
            params: t.params,
            mean: (t.a_seq[1], t.b_seq[1]),
            var: (t.var_x(), t.var_y()),
            k3: t.k3(),
        }
    }

    /// Cumulants `(κ₁, κ₂, κ₃)` of `W^CT` started from `(x, y)`.
    pub fn wct_cumulants(&self, state: Composition) -> (f64, f64, f64) {
        let (x, y) = (state.red as f64, state.black as f64);
        (
            x * self.mean.0 + y * self.mean.1,
            x * self.var.0 + y * self.var.1,
            x * self.k3.0 + y * self.k3.1,
        )
    }

    /// Cumulants of `W^DT` for an urn started from `(x, y)`.
    pub fn wdt_cumulants(&self, state: Composition) -> (f64, f64, f64) {
        let (k1, k2, k3) = self.wct_cumulants(state);
        let ct = raw_moments(k1, k2, k3);
        let uos = state.total() as f64 / self.params.s as f64;
        let sigma = self.params.sigma_f64();
        let mut dt = [0.0; 3];
        for (k, v) in dt.iter_mut().enumerate() {
            *v = ct[k] / gamma_moment(uos, (k + 1) as f64 * sigma);
        }
        cumulants(dt)
    }

    /// Completed `(W^CT, W^DT)` given the state and time of the last jump.
    /// Both share one normal draw.
    pub fn complete<R: Rng>(&self, state: Composition, tau: f64, rng: &mut R) -> (f64, f64) {
        let z: f64 = rng.sample(StandardNormal);
        let (_, v, k3) = self.wct_cumulants(state);
        let u2 = self.params.u2(state.red as f64, state.black as f64);
        let wct = (-(self.params.m as f64) * tau).exp() * (u2 + cornish_fisher(z, v, k3));
        let (mu, v, k3) = self.wdt_cumulants(state);
        let wdt = mu + cornish_fisher(z, v, k3);
        (wct, wdt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::wdt_moments;
    use crate::params::validate_params;

    #[test]
    fn cumulants_roundtrip() {
        let (a, b, c) = cumulants(raw_moments(0.3, 1.7, -0.4));
        assert!((a - 0.3).abs() < 1e-15 && (b - 1.7).abs() < 1e-14 && (c + 0.4).abs() < 1e-14);
    }

    #[test]
    fn cornish_fisher_moments() {
        // Gauss-Hermite-free check by a fine quadrature of the normal density.
        let (var, k3) = (2.0, 0.9);
        let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
        let h = 1e-3;
        let mut z = -12.0;
        while z < 12.0 {
            let w = (-z * z / 2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt() * h;
            let x = cornish_fisher(z, var, k3);
            m1 += w * x;
            m2 += w * x * x;
            m3 += w * x * x * x;
            z += h;
        }
        assert!(m1.abs() < 1e-9);
        assert!((m2 - var).abs() < 1e-9);
        // Skewness is reproduced to first order in g.
        assert!((m3 - k3).abs() < 0.1 * k3);
    }

    #[test]
    fn matches_exact_moments_of_the_urn() {
        let p = validate_params(4, 7, 1).unwrap();
        let t = moment_recursion(&p, 3).unwrap();
        let c = BranchingCompletion::from_table(&t);
        let init = Composition::new(5, 3);
        let exact = cumulants({
            let m = t.wct_moments(init);
            [m[1], m[2], m[3]]
        });
        let got = c.wct_cumulants(init);
        assert!((exact.0 - got.0).abs() < 1e-12);
        assert!((exact.1 - got.1).abs() < 1e-11);
        assert!((exact.2 - got.2).abs() < 1e-10);
        let exact = cumulants({
            let m = wdt_moments(&t, init);
            [m[1], m[2], m[3]]
        });
        let got = c.wdt_cumulants(init);
        assert!((exact.0 - got.0).abs() < 1e-12);
        assert!((exact.1 - got.1).abs() < 1e-11);
        assert!((exact.2 - got.2).abs() < 1e-10);
    }
}
