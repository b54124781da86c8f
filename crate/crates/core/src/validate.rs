//! The cross-validation suite: analytic identities, then Monte-Carlo
//! agreement between simulation, moments and the closed forms.
//!
//! All Monte-Carlo checks share one joint run of `replicas × steps` jumps.

use crate::abelian::{Abelian, AbelianParams};
use crate::charfun::density::{density_fourier_with, density_mixture, symmetric_log_grid};
use crate::charfun::{CharFun, DensityOptions};
use crate::error::Result;
use crate::moments::moment_recursion;
use crate::params::{c0_from_i1, c0_series, large_triples, spectral_constants, Composition, UrnParams};
use crate::simulate::{
    run_joint, select, stream, BranchingCompletion, Completion, SampleKind, SampleSet, STREAM_AUX,
};
use crate::stats;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub criterion: u32,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub m: i64,
    #[serde(rename = "S")]
    pub s: i64,
    pub b: i64,
    pub replicas: u64,
    pub steps: usize,
    pub seed: u64,
    /// `C₀` from its series and from `I₁`.
    pub c0_pair: (f64, f64),
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ValidateOptions {
    pub replicas: u64,
    pub steps: usize,
    pub seed: u64,
}

impl ValidateOptions {
    pub fn full() -> Self {
        Self {
            replicas: 1_000_000,
            steps: 1000,
            seed: 20_240_601,
        }
    }

    pub fn quick() -> Self {
        Self {
            replicas: 100_000,
            ..Self::full()
        }
    }
}

struct Recorder {
    checks: Vec<Check>,
    clock: Instant,
}

impl Recorder {
    /// Records `value ≤ threshold`.
    fn below(&mut self, criterion: u32, name: &str, value: f64, threshold: f64, detail: String) {
        self.push(criterion, name, value, threshold, value <= threshold, detail);
    }

    /// Records `value ≥ threshold`.
    fn above(&mut self, criterion: u32, name: &str, value: f64, threshold: f64, detail: String) {
        self.push(criterion, name, value, threshold, value >= threshold, detail);
    }

    fn push(&mut self, criterion: u32, name: &str, value: f64, threshold: f64, pass: bool, detail: String) {
        let seconds = self.clock.elapsed().as_secs_f64();
        self.clock = Instant::now();
        self.checks.push(Check {
            criterion,
            name: name.into(),
            value,
            threshold,
            pass: pass && value.is_finite(),
            detail,
            seconds,
        });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Criteria 1, 2 and 12.
fn check_moments(p: &UrnParams, rec: &mut Recorder) -> Result<()> {
    let t = moment_recursion(p, 40)?;
    let (s, b, c) = (p.s as f64, p.b as f64, p.c as f64);
    let err = (t.a_seq[1] - b / s).abs().max((t.b_seq[1] + c / s).abs());
    rec.below(
        1,
        "first moments E[X]=b/S, E[Y]=-c/S",
        err,
        1e-14,
        format!("E[X]={:.17}, E[Y]={:.17}", t.a_seq[1], t.b_seq[1]),
    );
    rec.below(
        2,
        "moment recursion residual, n<=40",
        t.max_residual(),
        1e-12,
        format!("precision {:?}", t.precision),
    );
    let (g20, g40) = (t.root_growth(20), t.root_growth(40));
    rec.above(
        12,
        "zero radius: |a_40/40!|^(1/40) / |a_20/20!|^(1/20)",
        g40 / g20,
        1.0,
        format!("{g20:.6} -> {g40:.6}"),
    );
    Ok(())
}

/// Criterion 3 over all large urns with `S ≤ 15`.
fn check_c0(rec: &mut Recorder) -> Result<()> {
    let mut worst: (f64, (i64, i64, i64)) = (0.0, (0, 0, 0));
    for (m, s, b) in large_triples(15) {
        for beta in [b, s - m - b] {
            let e = rel(c0_series(m, s, beta)?, c0_from_i1(m, s, beta));
            if e > worst.0 {
                worst = (e, (m, s, beta));
            }
        }
    }
    rec.below(
        3,
        "C0 series vs sine relation with |I1|, S<=15",
        worst.0,
        1e-10,
        format!("worst at (m,S,b)={:?}", worst.1),
    );
    Ok(())
}

/// Criterion 4.
fn check_abelian(p: &UrnParams, seed: u64, rec: &mut Recorder) -> Result<()> {
    let ab = Abelian::new(AbelianParams::new(p.m, p.s, p.b)?)?;
    let half = PI / p.m as f64;
    // A key of its own, apart from the replica streams.
    let mut rng = stream(seed ^ 0xA5A5_A5A5, 0, STREAM_AUX);

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let th = rng.random_range(-PI + 1e-2..PI - 1e-2);
        let w = Complex64::from_polar(r, th);
        let z = ab.inverse(w)?;
        worst = worst.max((ab.eval(z)? - w).norm() / r.max(1.0));
    }
    rec.below(4, "I(J(w)) = w, 200 random w", worst, 1e-10, String::new());

    let mut worst: f64 = 0.0;
    let mut kept = 0;
    while kept < 200 {
        let r = 10f64.powf(rng.random_range(-0.7..0.7));
        let th = rng.random_range(-half * 0.999..0.0);
        let z = Complex64::from_polar(r, th);
        let w = ab.eval(z)?;
        if w.im <= 0.0 {
            continue;
        }
        kept += 1;
        worst = worst.max((ab.inverse(w)? - z).norm() / r.max(1.0));
    }
    rec.below(
        4,
        "J(I(z)) = z, 200 random z in the lower half-sector",
        worst,
        1e-10,
        "points with Im I(z) > 0".into(),
    );

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let r = if rng.random::<bool>() {
            rng.random_range(0.5..0.95)
        } else {
            rng.random_range(1.05..2.0)
        };
        let th = rng.random_range(-half * 0.99..half * 0.99);
        let z = Complex64::from_polar(r, th);
        let series = if r < 1.0 {
            ab.series_zero(z, 200_000)
        } else {
            ab.series_infinity(z, 200_000)
        };
        let q = ab.ray_quadrature(z)?;
        worst = worst.max(series.map_or(f64::INFINITY, |s| (s - q).norm() / q.norm()));
    }
    rec.below(
        4,
        "I series vs ray quadrature, 50 points, 0.5<=|z|<=2",
        worst,
        1e-10,
        String::new(),
    );
    Ok(())
}

/// Criteria 5 and 6.
fn check_charfun(cf: &CharFun, rec: &mut Recorder) -> Result<()> {
    let r = cf.ode_crosscheck(1e-2, 1e2, 100)?;
    rec.below(
        5,
        "ODE residual, 100 log-spaced x in [1e-2,1e2]",
        r.max_residual,
        1e-9,
        format!("worst x={:.4}", r.worst_x),
    );
    rec.below(
        5,
        "first integral equals i(m/S)(b+c)",
        r.max_first_integral_dev,
        1e-9,
        format!("value {:.15}", r.first_integral_value),
    );
    let slope = |h: f64| -> Result<Complex64> { Ok((cf.eval_f(h)? - 1.0) / h) };
    let (s1, s2) = (slope(1e-3)?, slope(1e-4)?);
    let extrap = (s2 * 10.0 - s1) / 9.0;
    let p = &cf.params;
    let target = Complex64::new(0.0, p.b as f64 / p.s as f64);
    rec.below(
        6,
        "Richardson slope (F(h)-1)/h -> ib/S",
        (extrap - target).norm(),
        1e-6,
        format!("extrapolated {extrap:.10}"),
    );
    Ok(())
}

/// Fourier density on a normalization grid and on the comparison grid.
fn check_density_fourier(cf: &CharFun, rec: &mut Recorder) -> Result<Vec<f64>> {
    let opts = DensityOptions::default();
    let grid = symmetric_log_grid(1e-4, 50.0, 400);
    let d = density_fourier_with(cf, &grid, opts)?;
    let integral = d.integral();
    rec.push(
        10,
        "Fourier density integral over [-50,50] in [0.99,1.001]",
        integral,
        1.0,
        (0.99..=1.001).contains(&integral),
        "trapezoid with mass correction at 0".into(),
    );
    let at = |x: f64| density_fourier_with(cf, &[x], opts).map(|d| d.values[0]);
    let (p1, p2, p3) = (at(1e-3)?, at(1e-2)?, at(1e-1)?);
    let (n1, n2, n3) = (at(-1e-3)?, at(-1e-2)?, at(-1e-1)?);
    let ok = p1 > p2 && p2 > p3 && n1 > n2 && n2 > n3;
    rec.push(
        10,
        "divergence at 0: p(1e-3)>p(1e-2)>p(1e-1), both sides",
        p1 / p3,
        1.0,
        ok,
        format!("+: {p1:.4} {p2:.4} {p3:.4}; -: {n1:.4} {n2:.4} {n3:.4}"),
    );
    let ok = d.monotone_each_side(1e-12);
    rec.push(
        10,
        "monotone on each side of 0",
        if ok { 1.0 } else { 0.0 },
        1.0,
        ok,
        format!("{} points", grid.len()),
    );
    let cmp = symmetric_log_grid(0.1, 5.0, 60);
    Ok(density_fourier_with(cf, &cmp, opts)?.values)
}

/// Criteria 7 to 11 on one joint run.
fn check_monte_carlo(p: &UrnParams, cf: &CharFun, opts: ValidateOptions, rec: &mut Recorder) -> Result<()> {
    let init = Composition::new(1, 0);
    let completion = BranchingCompletion::new(p)?;
    let joint = run_joint(p, init, opts.steps, opts.replicas, opts.seed, Some(&completion));
    let n = joint.len() as f64;

    // 7: on the first 1e5 replicas.
    let xi = select(&joint, SampleKind::Xi, false);
    let ks = stats::ks_gamma(&xi[..xi.len().min(100_000)], 1.0 / p.s as f64);
    rec.above(
        7,
        "KS xi vs Gamma(1/S), p-value",
        ks.p_value,
        0.01,
        format!("D={:.5}, n={}", ks.statistic, ks.n),
    );

    // 8
    let wct = select(&joint, SampleKind::Wct, true);
    let wct_raw = select(&joint, SampleKind::Wct, false);
    let xs: Vec<f64> = (0..=200).map(|i| -10.0 + 0.1 * i as f64).collect();
    let fs: Vec<Complex64> = xs.iter().map(|&x| cf.eval_f(x)).collect::<Result<_>>()?;
    let sup = |w: &[f64]| -> f64 {
        xs.par_iter()
            .zip(&fs)
            .map(|(&x, f)| (stats::empirical_cf(w, x) - f).norm())
            .reduce(|| 0.0, f64::max)
    };
    let band = 3.0 / n.sqrt();
    let raw = sup(&wct_raw);
    rec.below(
        8,
        "empirical CF of W^CT vs F on [-10,10], sup",
        sup(&wct),
        band,
        format!("3-sigma band 3/sqrt(N); raw-sample sup {raw:.5}"),
    );

    // 9
    let wdt_raw = select(&joint, SampleKind::Wdt, false);
    let sigma = p.sigma_f64();
    let gamma = Gamma::new(1.0 / p.s as f64, 1.0).expect("positive shape");
    let product: Vec<f64> = wdt_raw
        .par_iter()
        .enumerate()
        .map(|(r, w)| {
            let mut rng = stream(opts.seed, r as u64, STREAM_AUX);
            gamma.sample(&mut rng).powf(sigma) * w
        })
        .collect();
    for k in 1..=3 {
        let (d, se) = stats::paired_moment_difference(&product, &wct_raw, k);
        rec.below(
            9,
            &format!("moment {k}: Gamma^sigma x W^DT vs W^CT, |diff|/se"),
            d.abs() / se,
            3.0,
            format!("diff {d:.3e}, se {se:.3e}"),
        );
    }

    // 10
    let fourier = check_density_fourier(cf, rec)?;
    let wdt = select(&joint, SampleKind::Wdt, true);
    let set = |values: Vec<f64>, completion| SampleSet {
        kind: SampleKind::Wdt,
        m: p.m,
        s: p.s,
        b: p.b,
        alpha: 1,
        beta: 0,
        n_steps: opts.steps as u64,
        replicas: opts.replicas,
        seed: opts.seed,
        completion,
        values,
    };
    let grid = symmetric_log_grid(0.1, 5.0, 60);
    let sup_diff = |s: &SampleSet| -> Result<f64> {
        let mix = density_mixture(s, &grid)?;
        Ok(mix
            .values
            .iter()
            .zip(&fourier)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    };
    let raw = sup_diff(&set(wdt_raw.clone(), Completion::None))?;
    rec.below(
        10,
        "mixture over W^DT samples vs Fourier density, sup on |x| in [0.1,5]",
        sup_diff(&set(wdt, Completion::Branching))?,
        0.01,
        format!("raw-sample sup {raw:.4}"),
    );

    // 11
    let (q, half) = stats::negative_fraction(&wdt_raw, 3.0);
    rec.above(
        11,
        "both signs among W^DT: min(q,1-q) - 3se",
        q.min(1.0 - q) - half,
        f64::MIN_POSITIVE,
        format!("negative fraction {q:.5} +- {half:.5}"),
    );
    Ok(())
}

/// Runs the suite. The analytic criteria take seconds; the Monte-Carlo part
/// scales with `opts.replicas`.
pub fn run(p: &UrnParams, opts: ValidateOptions) -> Result<Report> {
    p.require_large()?;
    let sc = spectral_constants(p)?;
    let c0_pair = (sc.fb.c0, c0_from_i1(p.m, p.s, p.b));
    let mut rec = Recorder {
        checks: Vec::new(),
        clock: Instant::now(),
    };
    check_moments(p, &mut rec)?;
    check_c0(&mut rec)?;
    check_abelian(p, opts.seed, &mut rec)?;
    let cf = CharFun::new(p)?;
    check_charfun(&cf, &mut rec)?;
    check_monte_carlo(p, &cf, opts, &mut rec)?;
    let all_pass = rec.checks.iter().all(|c| c.pass);
    Ok(Report {
        m: p.m,
        s: p.s,
        b: p.b,
        replicas: opts.replicas,
        steps: opts.steps,
        seed: opts.seed,
        c0_pair,
        checks: rec.checks,
        all_pass,
    })
}

impl Report {
    /// One line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] criterion {:>2}: {} = {:.6e} (threshold {:.3e}) {} [{:.1}s]",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.criterion,
                    c.name,
                    c.value,
                    c.threshold,
                    c.detail,
                    c.seconds
                )
            })
            .collect()
    }
}
