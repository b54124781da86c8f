use polya_core::moments::{gamma_moment, joint_moment_q11, moment_recursion, wdt_moments};
use polya_core::params::Composition;
use polya_core::simulate::*;
use polya_core::stats::{ks_gamma, raw_moment, summary};
use polya_core::{validate_params, UrnParams};
use rand_distr::{Distribution, Gamma};

fn p() -> UrnParams {
    validate_params(4, 7, 1).unwrap()
}

fn within(mean: f64, stderr: f64, target: f64, k: f64) -> bool {
    (mean - target).abs() <= k * stderr
}

#[test]
fn one_step_conditional_mean() {
    // E[U(1)] = (I + A/u) U(0) with A = Rᵀ, from (3, 2).
    let p = p();
    let init = Composition::new(3, 2);
    let n = 100_000u64;
    let reds: Vec<f64> = (0..n)
        .map(|r| simulate_dt_replica(&p, init, 1, 11, r).states[1].red as f64)
        .collect();
    let s = summary(&reds);
    let expected = 3.0 + (p.a as f64 * 3.0 + p.c as f64 * 2.0) / 5.0;
    assert!(within(s.mean, s.stderr, expected, 3.0), "{} vs {expected}", s.mean);
}

#[test]
fn first_holding_time_is_unit_exponential() {
    let p = p();
    let t: Vec<f64> = (0..100_000u64)
        .map(|r| simulate_ct_replica(&p, Composition::new(1, 0), 1, 5, r).jump_times[1])
        .collect();
    let s = summary(&t);
    assert!(within(s.mean, s.stderr, 1.0, 3.0), "{}", s.mean);
}

#[test]
fn holding_times_uncorrelated_with_directions() {
    let p = p();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for r in 0..100_000u64 {
        let t = simulate_ct_replica(&p, Composition::new(1, 1), 2, 8, r);
        // Second holding time against the first draw's colour.
        x.push(t.jump_times[2] - t.jump_times[1]);
        y.push(if t.base.states[1].red == 1 + p.a as u64 { 1.0 } else { 0.0 });
    }
    let (sx, sy) = (summary(&x), summary(&y));
    let cov: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - sx.mean) * (b - sy.mean))
        .sum::<f64>()
        / (x.len() - 1) as f64;
    let corr = cov / (sx.variance * sy.variance).sqrt();
    assert!(corr.abs() < 3.0 / (x.len() as f64).sqrt(), "{corr}");
}

#[test]
fn dt_martingale_has_constant_mean() {
    let p = p();
    for (init, target) in [(Composition::new(1, 0), 1.0 / 7.0), (Composition::new(0, 1), -2.0 / 7.0)] {
        let m: Vec<f64> = (0..100_000u64)
            .map(|r| run_one(&p, init, 1000, 3, r, None).dt.martingale)
            .collect();
        let s = summary(&m);
        assert!(within(s.mean, s.stderr, target, 3.0), "{init:?}: {}", s.mean);
    }
}

#[test]
fn colour_swap_negates_the_mean() {
    // Swapping colours turns (4,7,1) into (4,7,2); from (1,0) the swapped
    // urn mirrors the original one from (0,1).
    let q = p().swapped();
    assert_eq!((q.b, q.c), (2, 1));
    let m: Vec<f64> = (0..100_000u64)
        .map(|r| run_one(&q, Composition::new(0, 1), 1000, 4, r, None).dt.martingale)
        .collect();
    let s = summary(&m);
    assert!(within(s.mean, s.stderr, -1.0 / 7.0, 3.0), "{}", s.mean);
}

#[test]
fn ct_estimators_means_and_joint_moment() {
    let p = p();
    for init in [Composition::new(1, 0), Composition::new(2, 3)] {
        let j = run_joint(&p, init, 1000, 100_000, 9, None);
        let u = init.total() as f64;
        let xi: Vec<f64> = j.iter().map(|s| s.xi).collect();
        let w: Vec<f64> = j.iter().map(|s| s.wct).collect();
        let prod: Vec<f64> = j.iter().map(|s| s.xi * s.wct).collect();
        let (sx, sw, sp) = (summary(&xi), summary(&w), summary(&prod));
        assert!(within(sx.mean, sx.stderr, u / 7.0, 3.0), "xi {}", sx.mean);
        let u2 = p.u2(init.red as f64, init.black as f64);
        assert!(within(sw.mean, sw.stderr, u2, 3.0), "wct {}", sw.mean);
        let q11 = joint_moment_q11(init, &p);
        assert!(within(sp.mean, sp.stderr, q11, 3.0), "xi*wct {} vs {q11}", sp.mean);
    }
}

#[test]
fn xi_is_gamma_distributed() {
    let p = p();
    for init in [Composition::new(1, 0), Composition::new(1, 1)] {
        let s = run_replicas(&p, init, SampleKind::Xi, 1000, 100_000, 21);
        let ks = ks_gamma(&s.values, init.total() as f64 / 7.0);
        assert!(ks.p_value > 0.01, "{init:?}: {ks:?}");
    }
}

#[test]
fn wct_sample_mean() {
    let s = run_replicas(&p(), Composition::new(1, 0), SampleKind::Wct, 1000, 100_000, 42);
    let m = summary(&s.values);
    assert!(within(m.mean, m.stderr, 1.0 / 7.0, 3.0));
}

#[test]
fn single_replica_is_one_simulation() {
    let p = p();
    let s = run_replicas(&p, Composition::new(1, 0), SampleKind::Wdt, 300, 1, 17);
    let t = simulate_dt(&p, Composition::new(1, 0), 300, 17);
    assert_eq!(s.values, vec![estimate_wdt(&t).wdt]);
    let s = run_replicas(&p, Composition::new(1, 0), SampleKind::Xi, 300, 1, 17);
    let t = simulate_ct(&p, Composition::new(1, 0), 300, 17);
    assert_eq!(s.values, vec![estimate_xi_wct(&t).0]);
}

#[test]
fn martingale_connection_first_two_moments() {
    let p = p();
    let j = run_joint(&p, Composition::new(1, 0), 1000, 100_000, 31, None);
    let g = Gamma::new(1.0 / 7.0, 1.0).unwrap();
    let prod: Vec<f64> = j
        .iter()
        .enumerate()
        .map(|(r, s)| Distribution::<f64>::sample(&g, &mut stream(31, r as u64, STREAM_AUX)).powf(4.0 / 7.0) * s.dt.wdt)
        .collect();
    let direct: Vec<f64> = j.iter().map(|s| s.wct).collect();
    for k in 1..=2 {
        let (a, sa) = raw_moment(&prod, k);
        let (b, sb) = raw_moment(&direct, k);
        assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "k={k}: {a} vs {b}");
    }
}

#[test]
fn wdt_mean_matches_moment_composition() {
    let p = p();
    let t = moment_recursion(&p, 2).unwrap();
    let exact = wdt_moments(&t, Composition::new(1, 0))[1];
    assert!((exact - (1.0 / 7.0) / gamma_moment(1.0 / 7.0, 4.0 / 7.0)).abs() < 1e-15);
    let s = run_replicas(&p, Composition::new(1, 0), SampleKind::Wdt, 1000, 100_000, 1);
    let m = summary(&s.values);
    assert!(within(m.mean, m.stderr, exact, 3.0), "{} ± {} vs {exact}", m.mean, m.stderr);
}

/// Monte-Carlo oracle for the moment recursion. Raw finite-horizon `W^CT`
/// estimates underestimate the variance noticeably at 10³ jumps, so the
/// samples carry the branching completion.
#[test]
fn completed_samples_match_recursion_moments() {
    let p = p();
    let t = moment_recursion(&p, 4).unwrap();
    let s = run_replicas_with(
        &p,
        Composition::new(1, 0),
        SampleKind::Wct,
        1000,
        200_000,
        77,
        Completion::Branching,
    )
    .unwrap();
    let exact = t.wct_moments(Composition::new(1, 0));
    for (k, &e) in exact.iter().enumerate().take(5).skip(1) {
        let (m, se) = raw_moment(&s.values, k as i32);
        assert!(within(m, se, e, 3.0), "a_{k}: {m} ± {se} vs {e}");
    }
}

#[test]
fn raw_variance_deficit_is_visible() {
    let p = p();
    let t = moment_recursion(&p, 2).unwrap();
    let s = run_replicas(&p, Composition::new(1, 0), SampleKind::Wct, 1000, 100_000, 5);
    let v = summary(&s.values).variance;
    assert!(v < 0.8 * t.var_x(), "{v} vs {}", t.var_x());
}
