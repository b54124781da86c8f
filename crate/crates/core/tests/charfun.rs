use polya_core::charfun::{density_mixture, CharFun};
use polya_core::moments::moment_recursion;
use polya_core::params::Composition;
use polya_core::simulate::{Completion, SampleKind, SampleSet};
use polya_core::{validate_params, Complex64};
use statrs::distribution::{ContinuousCDF, Gamma};
use std::sync::OnceLock;

fn cf() -> &'static CharFun {
    static CF: OnceLock<CharFun> = OnceLock::new();
    CF.get_or_init(|| CharFun::new(&validate_params(4, 7, 1).unwrap()).unwrap())
}

#[test]
fn power_tail() {
    let c = cf().tail_constant_f().unwrap();
    let mut prev = f64::INFINITY;
    for x in [1e4, 1e6] {
        let scaled = cf().eval_f(x).unwrap() * x.powf(0.25);
        let rel = (scaled - c).norm() / c.norm();
        assert!(rel < 1e-2 && rel < prev, "x={x}: {rel}");
        prev = rel;
    }
}

#[test]
fn derivative_by_central_difference() {
    let h = 1e-5;
    let fd = (cf().eval_f(1.0 + h).unwrap() - cf().eval_f(1.0 - h).unwrap()) / (2.0 * h);
    let d = cf().eval_f_prime(1.0).unwrap();
    assert!((fd - d).norm() < 1e-8, "{fd} vs {d}");
}

#[test]
fn bounded_by_one() {
    for k in -200..=200 {
        let x = k as f64 * 0.25;
        for init in [Composition::new(1, 0), Composition::new(0, 1), Composition::new(2, 3)] {
            let v = cf().eval_general(x, init).unwrap();
            assert!(v.norm() <= 1.0 + 1e-12, "x={x}: {v}");
        }
    }
}

#[test]
fn negative_axis_direct_equals_conjugate() {
    for x in [0.01, 0.3, 1.0, 4.0, 25.0, 300.0] {
        let direct = cf().eval_f_negative_direct(-x).unwrap();
        let conj = cf().eval_f(x).unwrap().conj();
        assert!((direct - conj).norm() < 1e-10, "x={x}: {direct} vs {conj}");
        assert_eq!(cf().eval_f(-x).unwrap(), conj);
    }
}

#[test]
fn low_moments_from_finite_differences() {
    let t = moment_recursion(&cf().params, 2).unwrap();
    let h = 1e-3;
    let (fp, fm) = (cf().eval_f(h).unwrap(), cf().eval_f(-h).unwrap());
    let m1 = ((fp - fm) / (2.0 * h) / Complex64::i()).re;
    let m2 = -((fp + fm - 2.0) / (h * h)).re;
    assert!((m1 - t.a_seq[1]).abs() < 1e-4, "{m1} vs {}", t.a_seq[1]);
    assert!((m2 - t.a_seq[2]).abs() < 1e-4, "{m2} vs {}", t.a_seq[2]);
}

#[test]
fn derivative_tail_exponent() {
    // |𝓕'(x)| ~ x^{−1−1/m}: the log-log slope between decades.
    let xs = [1e3, 1e4, 1e5];
    let l: Vec<f64> = xs
        .iter()
        .map(|&x| cf().eval_f_prime(x).unwrap().norm().ln())
        .collect();
    for w in l.windows(2) {
        let slope = (w[1] - w[0]) / 10f64.ln();
        assert!((slope + 1.25).abs() < 0.02, "{slope}");
    }
}

#[test]
fn mixture_kernel_integrates_to_gamma_probability() {
    // Point mass for W^DT at v, started from (2, 1): W^CT = ξ^σ v with
    // ξ ~ Gamma(3/7). A second atom sits on the negative side.
    let (v, sigma) = (0.8, 4.0 / 7.0);
    let s = SampleSet {
        kind: SampleKind::Wdt,
        m: 4,
        s: 7,
        b: 1,
        alpha: 2,
        beta: 1,
        n_steps: 0,
        replicas: 2,
        seed: 0,
        completion: Completion::None,
        values: vec![v, -0.5],
    };
    let (lo, hi, n) = (0.2, 1.5, 2001);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let d = density_mixture(&s, &grid).unwrap();
    let h = (hi - lo) / (n - 1) as f64;
    let simpson: f64 = d
        .values
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let w = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * y
        })
        .sum::<f64>()
        * h
        / 3.0;
    let g = Gamma::new(3.0 / 7.0, 1.0).unwrap();
    let exact = 0.5 * (g.cdf((hi / v).powf(1.0 / sigma)) - g.cdf((lo / v).powf(1.0 / sigma)));
    assert!((simpson - exact).abs() < 1e-9, "{simpson} vs {exact}");
}
