//! Exact simulation of the urn and of its continuous-time embedding.
//!
//! Replica `r` of a run with seed `s` draws from ChaCha8 streams of the key
//! `seed_from_u64(s)`: stream `4r` drives the jump chain, `4r+1` the holding
//! times, `4r+2` the optional completion draws, and `4r+3` is left to
//! callers. The jump chain of the discrete-time and continuous-time
//! simulations therefore coincide for the
//! same `(seed, r)`, and the holding times are independent of the chain by
//! construction.

mod completion;

pub use completion::{BranchingCompletion, Completion};

use crate::numeric::special::ln_gamma_ratio;
pub use crate::params::Composition;
use crate::params::UrnParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const STREAM_CHAIN: u64 = 0;
pub const STREAM_CLOCK: u64 = 1;
pub const STREAM_COMPLETION: u64 = 2;
/// Free for per-replica draws made outside the simulation.
pub const STREAM_AUX: u64 = 3;

/// Deterministic stream `4·replica + purpose` under `seed`.
pub fn stream(seed: u64, replica: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(4 * replica + purpose);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub params: UrnParams,
    pub init: Composition,
    pub states: Vec<Composition>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtTrajectory {
    pub base: Trajectory,
    /// `τ₀ = 0 < τ₁ < … < τₙ`; the state on `[τ_k, τ_{k+1})` is `states[k]`.
    pub jump_times: Vec<f64>,
}

/// One draw: red with probability `red/(red+black)`.
#[inline]
fn step<R: Rng>(p: &UrnParams, state: &mut Composition, rng: &mut R) {
    let total = state.total();
    let j = rng.random_range(0..total);
    if j < state.red {
        state.red += p.a as u64;
        state.black += p.b as u64;
    } else {
        state.red += p.c as u64;
        state.black += p.d as u64;
    }
}

/// Holding time in a state with `total` balls: `Exponential(total)` by
/// inverse transform.
#[inline]
fn holding<R: Rng>(total: u64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p() / total as f64
}

fn check_init(init: Composition) {
    assert!(init.total() >= 1, "initial composition must be nonzero");
}

pub fn simulate_dt(p: &UrnParams, init: Composition, n: usize, seed: u64) -> Trajectory {
    simulate_dt_replica(p, init, n, seed, 0)
}

pub fn simulate_dt_replica(p: &UrnParams, init: Composition, n: usize, seed: u64, replica: u64) -> Trajectory {
    check_init(init);
    let mut rng = stream(seed, replica, STREAM_CHAIN);
    let mut state = init;
    let mut states = Vec::with_capacity(n + 1);
    states.push(state);
    for _ in 0..n {
        step(p, &mut state, &mut rng);
        states.push(state);
    }
    Trajectory {
        params: *p,
        init,
        states,
        seed,
    }
}

pub fn simulate_ct(p: &UrnParams, init: Composition, n_jumps: usize, seed: u64) -> CtTrajectory {
    simulate_ct_replica(p, init, n_jumps, seed, 0)
}

pub fn simulate_ct_replica(
    p: &UrnParams,
    init: Composition,
    n_jumps: usize,
    seed: u64,
    replica: u64,
) -> CtTrajectory {
    let base = simulate_dt_replica(p, init, n_jumps, seed, replica);
    let mut clock = stream(seed, replica, STREAM_CLOCK);
    let mut t = 0.0;
    let mut jump_times = Vec::with_capacity(n_jumps + 1);
    jump_times.push(0.0);
    for s in &base.states[..n_jumps] {
        t += holding(s.total(), &mut clock);
        jump_times.push(t);
    }
    CtTrajectory { base, jump_times }
}

/// Discrete-time estimates after `n` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtEstimate {
    /// `u₂(Uₙ)/γₙ(σ)`, `γₙ(σ) = Π_{k<n}(1 + σ/(u/S + k))`: a martingale with
    /// constant mean `u₂(U₀)`.
    pub martingale: f64,
    /// `u₂(Uₙ) Γ(u/S+n)/Γ(u/S+n+σ) ~ n^{−σ} u₂(Uₙ)`, converging to `W^DT`.
    pub wdt: f64,
}

fn dt_estimate(p: &UrnParams, u: u64, n: usize, last: Composition) -> DtEstimate {
    let uos = u as f64 / p.s as f64;
    let sigma = p.sigma_f64();
    let u2 = p.u2(last.red as f64, last.black as f64);
    let ln_tail = ln_gamma_ratio(uos + n as f64, sigma);
    let ln_gamma_n = ln_tail - ln_gamma_ratio(uos, sigma);
    DtEstimate {
        martingale: u2 * (-ln_gamma_n).exp(),
        wdt: u2 * (-ln_tail).exp(),
    }
}

pub fn estimate_wdt(t: &Trajectory) -> DtEstimate {
    let n = t.states.len() - 1;
    dt_estimate(&t.params, t.init.total(), n, t.states[n])
}

/// `((u/S + n) e^{−Sτₙ}, e^{−mτₙ} u₂(U(τₙ)))` at the last jump `n`.
///
/// `e^{−Sτₙ}` is exactly `Beta(u/S, n)`, so the first component has mean
/// `u/S` at every `n` and converges to `ξ`.
pub fn estimate_xi_wct(t: &CtTrajectory) -> (f64, f64) {
    let n = t.jump_times.len() - 1;
    xi_wct(&t.base.params, t.base.init.total(), n, t.jump_times[n], t.base.states[n])
}

fn xi_wct(p: &UrnParams, u: u64, n: usize, tau: f64, last: Composition) -> (f64, f64) {
    let (s, m) = (p.s as f64, p.m as f64);
    let xi = (u as f64 / s + n as f64) * (-s * tau).exp();
    let wct = (-m * tau).exp() * p.u2(last.red as f64, last.black as f64);
    (xi, wct)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Wdt,
    Xi,
    Wct,
}

impl SampleKind {
    pub fn name(&self) -> &'static str {
        match self {
            SampleKind::Wdt => "wdt",
            SampleKind::Xi => "xi",
            SampleKind::Wct => "wct",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wdt" => Some(SampleKind::Wdt),
            "xi" => Some(SampleKind::Xi),
            "wct" => Some(SampleKind::Wct),
            _ => None,
        }
    }
}

/// Replica outputs of one kind. `W^DT` values use the limit normalization
/// ([`DtEstimate::wdt`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub kind: SampleKind,
    pub m: i64,
    #[serde(rename = "S")]
    pub s: i64,
    pub b: i64,
    pub alpha: u64,
    pub beta: u64,
    pub n_steps: u64,
    pub replicas: u64,
    pub seed: u64,
    pub completion: Completion,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn init(&self) -> Composition {
        Composition::new(self.alpha, self.beta)
    }

    pub fn params(&self) -> crate::Result<UrnParams> {
        crate::params::validate_params(self.m, self.s, self.b)
    }
}

/// Everything one continuous-time replica yields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointSample {
    pub xi: f64,
    pub wct: f64,
    pub dt: DtEstimate,
    pub wct_completed: Option<f64>,
    pub wdt_completed: Option<f64>,
}

/// Runs replica `r`: `n` jumps of the embedded chain with their clock,
/// without storing the path.
pub fn run_one(
    p: &UrnParams,
    init: Composition,
    n: usize,
    seed: u64,
    replica: u64,
    completion: Option<&BranchingCompletion>,
) -> JointSample {
    check_init(init);
    let mut chain = stream(seed, replica, STREAM_CHAIN);
    let mut clock = stream(seed, replica, STREAM_CLOCK);
    let mut state = init;
    let mut tau = 0.0;
    for _ in 0..n {
        tau += holding(state.total(), &mut clock);
        step(p, &mut state, &mut chain);
    }
    let (xi, wct) = xi_wct(p, init.total(), n, tau, state);
    let dt = dt_estimate(p, init.total(), n, state);
    let (wct_completed, wdt_completed) = match completion {
        Some(c) => {
            let mut rng = stream(seed, replica, STREAM_COMPLETION);
            let (wc, wd) = c.complete(state, tau, &mut rng);
            (Some(wc), Some(wd))
        }
        None => (None, None),
    };
    JointSample {
        xi,
        wct,
        dt,
        wct_completed,
        wdt_completed,
    }
}

pub fn run_joint(
    p: &UrnParams,
    init: Composition,
    n: usize,
    replicas: u64,
    seed: u64,
    completion: Option<&BranchingCompletion>,
) -> Vec<JointSample> {
    (0..replicas)
        .into_par_iter()
        .map(|r| run_one(p, init, n, seed, r, completion))
        .collect()
}

/// Builds the sample set of `kind` from joint replica outputs.
pub fn select(
    joint: &[JointSample],
    kind: SampleKind,
    completed: bool,
) -> Vec<f64> {
    joint
        .iter()
        .map(|j| match (kind, completed) {
            (SampleKind::Xi, _) => j.xi,
            (SampleKind::Wct, false) => j.wct,
            (SampleKind::Wdt, false) => j.dt.wdt,
            (SampleKind::Wct, true) => j.wct_completed.expect("completion requested"),
            (SampleKind::Wdt, true) => j.wdt_completed.expect("completion requested"),
        })
        .collect()
}

/// Raw replica estimates of `kind`.
pub fn run_replicas(
    p: &UrnParams,
    init: Composition,
    kind: SampleKind,
    n_steps: usize,
    replicas: u64,
    seed: u64,
) -> SampleSet {
    run_replicas_with(p, init, kind, n_steps, replicas, seed, Completion::None)
        .expect("raw runs need no moment table")
}

pub fn run_replicas_with(
    p: &UrnParams,
    init: Composition,
    kind: SampleKind,
    n_steps: usize,
    replicas: u64,
    seed: u64,
    completion: Completion,
) -> crate::Result<SampleSet> {
    assert!(replicas >= 1, "at least one replica");
    let model = match completion {
        Completion::None => None,
        Completion::Branching => Some(BranchingCompletion::new(p)?),
    };
    let values = if model.is_none() && kind == SampleKind::Wdt {
        // The discrete estimator needs no clock.
        (0..replicas)
            .into_par_iter()
            .map(|r| {
                let mut chain = stream(seed, r, STREAM_CHAIN);
                let mut state = init;
                for _ in 0..n_steps {
                    step(p, &mut state, &mut chain);
                }
                dt_estimate(p, init.total(), n_steps, state).wdt
            })
            .collect()
    } else {
        let joint = run_joint(p, init, n_steps, replicas, seed, model.as_ref());
        select(&joint, kind, model.is_some())
    };
    Ok(SampleSet {
        kind,
        m: p.m,
        s: p.s,
        b: p.b,
        alpha: init.red,
        beta: init.black,
        n_steps: n_steps as u64,
        replicas,
        seed,
        completion,
        values,
    })
}
