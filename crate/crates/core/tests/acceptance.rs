//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Every tolerance here is pinned; the provisional thresholds were frozen
//! after fine-grid oracle runs (double-resolution grids reproduce the
//! measured ratios to five decimal places).

use volterra_core::asymptotics::{
    asymptotic_norm_powexp, equivalence_ratio, extremal_function, s_lambda_norm_asymptotic,
    s_lambda_norm_exact, GChoice,
};
use volterra_core::grid::{
    conv_power_numeric, discretize_powexp, discretize_smooth, GridSpec, ScaledGridFunction,
};
use volterra_core::kernel::{PowerExpKernel, SmoothFactorKernel};
use volterra_core::largedev::{largedev_report, CounterRng, DensitySpec};
use volterra_core::norms::{op_norm, rayleigh_quotient, Method, MethodChoice, OpNormOptions};
use volterra_core::special::log_gamma;
use volterra_core::{Exponent, HolderExponent};

fn hp(p: f64) -> HolderExponent {
    HolderExponent::new(Exponent::new(p).unwrap())
}

fn grid(m: usize) -> GridSpec {
    GridSpec::new(m).unwrap()
}

/// Criterion 1 — uniform density large deviations: at m = 4096 and
/// n ∈ {2..8}, the grid probability matches the simplex volume 1/n! to
/// relative error < 1e-3 and the 1e6-trial Monte Carlo estimate stays
/// within 4 standard errors of it.
#[test]
fn criterion_01_uniform_large_deviations() {
    let d = DensitySpec::uniform01();
    let g = grid(4096);
    let ns: Vec<u32> = (2..=8).collect();
    let report = largedev_report(&d, &ns, g, 1_000_000, 42).unwrap();
    for row in &report.rows {
        let oracle = -log_gamma(row.n as f64 + 1.0).unwrap();
        let rel = ((row.log_p_grid - oracle).exp() - 1.0).abs();
        assert!(
            rel < 1e-3,
            "n = {}: grid vs 1/n! relative error {rel}",
            row.n
        );
        let mc = row.mc_estimate.unwrap();
        let stderr = row.mc_stderr.unwrap();
        let dev = (mc - oracle.exp()).abs();
        assert!(
            dev <= 4.0 * stderr,
            "n = {}: MC {mc} vs {} is {} stderrs away",
            row.n,
            oracle.exp(),
            dev / stderr
        );
    }
    println!("criterion 01 PASS: uniform01 grid matches 1/n! (<1e-3) and MC within 4 stderr, n = 2..8");
}

/// Criterion 2 — triangular density 2t: grid probability matches
/// 2^n/(2n)! to relative error < 1e-3 for n ∈ {2,3,4}, and the asymptotic
/// formula coincides with the oracle (exactness family).
#[test]
fn criterion_02_triangular_density_exactness() {
    let k = SmoothFactorKernel::poly(1.0, vec![2.0]).unwrap();
    let d = DensitySpec::kernel(k, 1.0).unwrap();
    let g = grid(4096);
    let report = largedev_report(&d, &[2, 3, 4], g, 1000, 42).unwrap();
    for row in &report.rows {
        let n = row.n;
        let oracle = (n as f64) * 2.0f64.ln() - log_gamma(2.0 * n as f64 + 1.0).unwrap();
        let rel = ((row.log_p_grid - oracle).exp() - 1.0).abs();
        assert!(rel < 1e-3, "n = {n}: grid vs 2^n/(2n)! error {rel}");
        assert!(
            (row.log_p_asym - oracle).abs() < 1e-12,
            "n = {n}: asymptotic formula must equal the moment oracle exactly, diff {}",
            (row.log_p_asym - oracle).abs()
        );
    }
    println!("criterion 02 PASS: density 2t matches 2^n/(2n)! (<1e-3), asymptotic formula exact");
}

/// Criterion 3 — exponential(1): the grid/asymptotic ratio at n = 20 equals
/// the series Σ_{j≥20} 20!/j! (≈ 1.04988) to within 1e-2, and the ratio
/// decreases monotonically toward 1 over n ∈ {5, 10, 20, 40}.
#[test]
fn criterion_03_exponential_ratio_series() {
    let d = DensitySpec::exponential(1.0).unwrap();
    let g = grid(4096);
    let report = largedev_report(&d, &[5, 10, 20, 40], g, 1000, 42).unwrap();

    // Series oracle: Σ_{j>=n} n!/j! = 1 + 1/(n+1) + 1/((n+1)(n+2)) + ...
    let series = |n: f64| {
        let mut sum = 0.0;
        let mut term = 1.0;
        for j in 0..60 {
            sum += term;
            term /= n + 1.0 + j as f64;
        }
        sum
    };
    let expected_20 = series(20.0);
    let row_20 = report.rows.iter().find(|r| r.n == 20).unwrap();
    assert!(
        (row_20.ratio_grid_over_asym - expected_20).abs() < 1e-2,
        "ratio at n=20: {} vs series {expected_20}",
        row_20.ratio_grid_over_asym
    );

    let mut prev = f64::INFINITY;
    for row in &report.rows {
        let ratio = row.ratio_grid_over_asym;
        assert!(ratio > 1.0, "ratio must stay above 1, got {ratio}");
        assert!(
            ratio < prev,
            "n = {}: ratio {ratio} did not decrease (prev {prev})",
            row.n
        );
        prev = ratio;
    }
    println!(
        "criterion 03 PASS: exponential(1) ratio at n=20 is {:.5} (series {:.5}), trend monotone",
        row_20.ratio_grid_over_asym, expected_20
    );
}

/// Criterion 4 — classical singular value: op_norm(k = 1, n = 1, p = 2) at
/// m = 2048 brackets 2/π within 1e-3 relative.
#[test]
fn criterion_04_classical_singular_value() {
    let g = grid(2048);
    let one = ScaledGridFunction::one(g);
    let est = op_norm(&one, 1, &hp(2.0), &OpNormOptions::default()).unwrap();
    assert_eq!(est.method, Method::SvdP2);
    let target = 2.0 / std::f64::consts::PI;
    for bound in [est.log_lower, est.log_upper] {
        let rel = (bound.exp() - target).abs() / target;
        assert!(rel < 1e-3, "bound {} vs 2/pi: relative {rel}", bound.exp());
    }
    println!(
        "criterion 04 PASS: sigma_max = {:.8} brackets 2/pi = {:.8} (rel {:.1e})",
        est.log_lower.exp(),
        target,
        (est.log_lower.exp() - target).abs() / target
    );
}

/// Criterion 5 — asymptotic-norm ratio at p = 2 for k = 1: the op-norm to
/// asymptotic-norm ratio lies in [0.9, 1.1] at n = 20 and is strictly
/// closer to 1 at n = 40 (m = 2048; the scale ~1/(2·40!) lives in the log
/// domain, no underflow).
#[test]
fn criterion_05_norm_ratio_p2() {
    let g = grid(2048);
    let one = ScaledGridFunction::one(g);
    let k = PowerExpKernel::new(1.0, 0.0, 0.0).unwrap();
    let p = hp(2.0);
    let ratio = |n: u32| {
        let est = op_norm(&one, n, &p, &OpNormOptions::default()).unwrap();
        assert!(est.log_lower.is_finite(), "log-domain value must be finite");
        let asym = asymptotic_norm_powexp(&k, n as f64, &p).unwrap();
        (est.log_lower - asym.log_value).exp()
    };
    let r20 = ratio(20);
    let r40 = ratio(40);
    assert!(
        (0.9..=1.1).contains(&r20),
        "ratio at n=20 out of [0.9, 1.1]: {r20}"
    );
    assert!(
        (r40 - 1.0).abs() < (r20 - 1.0).abs(),
        "ratio must improve: n=20 gives {r20}, n=40 gives {r40}"
    );
    println!("criterion 05 PASS: p=2 ratio {r20:.5} at n=20, {r40:.5} at n=40 (improving)");
}

/// Criterion 6 — rank-one exact vs asymptotic norms: for
/// p ∈ {1, 3/2, 2, 4, ∞} at λ = 10, exp(exact − asym) lies in
/// [1 − 1e-3, 1] (the algebraic ratio is ≤ 1).
#[test]
fn criterion_06_rank1_exact_vs_asymptotic() {
    let lambda = 10.0;
    for p in [hp(1.0), hp(1.5), hp(2.0), hp(4.0), hp(f64::INFINITY)] {
        let exact = s_lambda_norm_exact(lambda, &p).log_value;
        let asym = s_lambda_norm_asymptotic(lambda, &p).log_value;
        let ratio = (exact - asym).exp();
        assert!(
            (1.0 - 1e-3..=1.0).contains(&ratio),
            "p = {p}: ratio {ratio} outside [1-1e-3, 1]"
        );
    }
    println!("criterion 06 PASS: S_lambda exact/asym ratio in [1-1e-3, 1] at lambda=10 for all p");
}

/// Criterion 7 — method cross-validation: Boyd power iteration at p = 2
/// agrees with the SVD path to 1e-6 relative on 20 random nonnegative
/// kernels (m = 256), and conjugate duality ‖V^n‖_3 = ‖V^n‖_{3/2} holds
/// within 2·tol for k = 1, n ∈ {1, 5, 10}.
#[test]
fn criterion_07_method_cross_validation() {
    let g = grid(256);
    let opts = OpNormOptions::default();
    for i in 0..20u64 {
        let mut rng = CounterRng::for_trial(0xC7C7, i);
        let values: Vec<f64> = (0..g.m()).map(|_| 0.05 + rng.next_f64()).collect();
        let k = ScaledGridFunction::from_values(g, values, 0.0).unwrap();
        let svd = op_norm(&k, 1, &hp(2.0), &opts).unwrap();
        let boyd = op_norm(
            &k,
            1,
            &hp(2.0),
            &OpNormOptions {
                method: MethodChoice::PowerIteration,
                ..opts
            },
        )
        .unwrap();
        let rel = ((boyd.log_lower - svd.log_lower).exp() - 1.0).abs();
        assert!(rel < 1e-6, "kernel {i}: power iteration vs SVD off by {rel}");
    }

    let g = grid(1024);
    let one = ScaledGridFunction::one(g);
    for n in [1u32, 5, 10] {
        let a = op_norm(&one, n, &hp(3.0), &opts).unwrap();
        let b = op_norm(&one, n, &hp(1.5), &opts).unwrap();
        let diff = (a.log_lower - b.log_lower).abs();
        assert!(
            diff <= 2.0 * opts.tol,
            "duality gap {diff} at n = {n} exceeds 2 tol"
        );
    }
    println!("criterion 07 PASS: Boyd vs SVD < 1e-6 on 20 random kernels; (3, 3/2) duality within 2 tol");
}

/// Criterion 8 — extremal efficiency: for k = 1 at p = 2, the Rayleigh
/// quotient of the extremal function reaches at least 0.95 of the exact
/// norm at n = 30 and is nondecreasing over n ∈ {10, 20, 30} (m = 1024).
#[test]
fn criterion_08_extremal_efficiency() {
    let g = grid(1024);
    let one = ScaledGridFunction::one(g);
    let p = hp(2.0);
    let mut prev = 0.0;
    let mut last = 0.0;
    for n in [10u32, 20, 30] {
        let u = extremal_function(&p, 0.0, 0.0, n as f64, GChoice::Sqrt, g).unwrap();
        let rq = rayleigh_quotient(&one, n, &u, &p).unwrap();
        let est = op_norm(&one, n, &p, &OpNormOptions::default()).unwrap();
        let eff = (rq - est.log_lower).exp();
        assert!(
            eff >= prev,
            "efficiency fell from {prev} to {eff} at n = {n}"
        );
        prev = eff;
        last = eff;
    }
    assert!(last >= 0.95, "efficiency at n = 30 is only {last}");
    println!("criterion 08 PASS: extremal Rayleigh efficiency {last:.5} at n=30, nondecreasing");
}

/// Criterion 9 — equivalence and localisation: for k(t) = 1 + t against
/// its tangent kernel e^t at p = 1, the equivalence ratio decreases
/// monotonically over n ∈ {5, 10, 20, 40} and is below 0.05 at n = 40
/// (threshold frozen after an m = 8192 oracle run; m = 4096 here). A pair
/// of kernels equal on [0, 1/2] and differing beyond shows the same trend.
#[test]
fn criterion_09_equivalence_localisation() {
    let g = grid(4096);
    let p = hp(1.0);
    let k = discretize_smooth(&SmoothFactorKernel::poly(0.0, vec![1.0, 1.0]).unwrap(), g);
    let tangent = discretize_powexp(&PowerExpKernel::new(1.0, 0.0, 1.0).unwrap(), g);
    let mut prev = f64::INFINITY;
    let mut last = f64::INFINITY;
    for n in [5u32, 10, 20, 40] {
        let row = equivalence_ratio(&k, &tangent, n, &p).unwrap();
        assert!(
            row.ratio < prev,
            "tangent ratio rose at n = {n}: {} after {prev}",
            row.ratio
        );
        prev = row.ratio;
        last = row.ratio;
    }
    assert!(last < 0.05, "tangent ratio at n = 40 is {last}");

    // Localisation: equal kernels on [0, 1/2], different beyond.
    let ka = ScaledGridFunction::one(g);
    let values: Vec<f64> = (0..g.m())
        .map(|j| if g.midpoint(j) < 0.5 { 1.0 } else { 2.0 })
        .collect();
    let kb = ScaledGridFunction::from_values(g, values, 0.0).unwrap();
    let mut prev = f64::INFINITY;
    for n in [5u32, 10, 20, 40] {
        let row = equivalence_ratio(&ka, &kb, n, &p).unwrap();
        assert!(
            row.ratio < prev,
            "localisation ratio rose at n = {n}: {} after {prev}",
            row.ratio
        );
        prev = row.ratio;
    }
    println!(
        "criterion 09 PASS: 1+t vs e^t ratio {last:.5} at n=40 (< 0.05), both families monotone"
    );
}

/// Criterion 10 — grid refinement: for powexp(1, 0, -1) at n = 5, the
/// sup-normalized error of the numeric convolution power against the
/// closed form shrinks by at least 3x per grid doubling across
/// m ∈ {512, 1024, 2048, 4096}.
#[test]
fn criterion_10_grid_refinement() {
    let k = PowerExpKernel::new(1.0, 0.0, -1.0).unwrap();
    let mut errors = Vec::new();
    for m in [512usize, 1024, 2048, 4096] {
        let g = grid(m);
        let numeric = conv_power_numeric(&discretize_powexp(&k, g), 5).unwrap();
        let exact = discretize_powexp(&k.conv_power(5.0).unwrap(), g);
        let scale = exact
            .values()
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()))
            * exact.log_scale().exp();
        let mut worst = 0.0f64;
        for j in 0..m {
            worst = worst.max((numeric.value_at(j) - exact.value_at(j)).abs() / scale);
        }
        errors.push(worst);
    }
    for w in errors.windows(2) {
        let factor = w[0] / w[1];
        assert!(
            factor >= 3.0,
            "refinement factor {factor} below 3 (errors {errors:?})"
        );
    }
    println!(
        "criterion 10 PASS: refinement factors {:?} (all >= 3)",
        errors
            .windows(2)
            .map(|w| (w[0] / w[1] * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );
}
