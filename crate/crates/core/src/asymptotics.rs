//! Evaluators for the closed-form norm asymptotics, extremal-sequence
//! construction, rank-one comparison operators, and asymptotic-equivalence
//! and tail-decay ratio measurements.
//!
//! The central formula: for `k(t) = t^r f(t)` with `r > -1`, `f(0) ≠ 0` and
//! `f'(0)` defined,
//!
//! ```text
//! ‖V_k^n‖_p  ~  C_p (|f(0)| Γ(r+1))^n e^{f'(0)/f(0)} / Γ((r+1)n + 1)
//! ```
//!
//! as `n → ∞`, with the rank-one operators `S_λ u = ⟨u, e_{-λ}⟩ e_λ`
//! (`λ = (r+1)n - 1 + f'(0)/f(0)`) as the comparison family.

use crate::error::{Error, Result};
use crate::grid::{
    conv_power_numeric, discretize_powexp, restricted_l1, GridSpec, ScaledGridFunction,
};
use crate::holder::{Exponent, HolderExponent};
use crate::kernel::{Kernel, LocalBehavior, PowerExpKernel, SmoothFactorKernel};
use crate::norms::{op_norm, op_norm_of_kernel, OpNormOptions};
use crate::special::{ln_expm1_over_x, log_gamma};

use serde::Serialize;

/// Which closed-form expression produced an [`AsymptoticValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    SNormExact,
    SNormAsym,
    TNormAsym,
    VnExp,
    VnPowexp,
    VnMain,
    ProbLargedev,
}

/// A value of one of the asymptotic formulas, in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticValue {
    pub log_value: f64,
    /// The index it was evaluated at (`n` for operator powers, `λ` for the
    /// rank-one family).
    pub n_or_lambda: f64,
    pub formula: Formula,
}

/// One measured row of an asymptotic-equivalence trace:
/// `ratio = ‖V_{kA}^n - V_{kB}^n‖_p / ‖V_{kA}^n‖_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivRow {
    pub n: u32,
    pub log_norm_a: f64,
    pub log_norm_b: f64,
    pub log_diff_norm: f64,
    pub ratio: f64,
}

/// Rows of equivalence measurements, sorted by `n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EquivalenceTrace {
    pub rows: Vec<EquivRow>,
}

impl EquivalenceTrace {
    pub fn push(&mut self, row: EquivRow) {
        self.rows.push(row);
        self.rows.sort_by_key(|r| r.n);
    }
}

/// `log ‖e_{a·}‖_p` on `(0,1)`: `(1/p)·log((e^{pa} - 1)/(pa))` for finite
/// `p`, `max(a, 0)` for `p = ∞`.
fn log_exp_norm(a: f64, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => a.max(0.0),
        Exponent::One => ln_expm1_over_x(a),
        Exponent::Finite(pf) => ln_expm1_over_x(pf * a) / pf,
    }
}

/// Exact `log ‖S_λ‖_p = log(‖e_λ‖_p ‖e_{-λ}‖_q)` for the rank-one operator
/// `S_λ u = ⟨u, e_{-λ}⟩ e_λ`; any real `λ` (0 gives `log 1 = 0`).
pub fn s_lambda_norm_exact(lambda: f64, p: &HolderExponent) -> AsymptoticValue {
    let log_value = log_exp_norm(lambda, p.p()) + log_exp_norm(-lambda, p.q());
    AsymptoticValue {
        log_value,
        n_or_lambda: lambda,
        formula: Formula::SNormExact,
    }
}

/// The asymptotic form `log(C_p e^λ / λ)` that `‖S_λ‖_p` approaches as
/// `λ → ∞`.
pub fn s_lambda_norm_asymptotic(lambda: f64, p: &HolderExponent) -> AsymptoticValue {
    AsymptoticValue {
        log_value: p.log_cp() + lambda - lambda.ln(),
        n_or_lambda: lambda,
        formula: Formula::SNormAsym,
    }
}

/// The truncated operator `T_λ = V_{e_λ}` shares the rank-one asymptote
/// `C_p e^λ / λ` (the two families are asymptotically equal); same value,
/// distinct tag.
pub fn t_lambda_norm_asymptotic(lambda: f64, p: &HolderExponent) -> AsymptoticValue {
    AsymptoticValue {
        formula: Formula::TNormAsym,
        ..s_lambda_norm_asymptotic(lambda, p)
    }
}

/// The exponential-kernel special case `k = e^{μt}`:
/// `‖V_k^n‖_p ~ C_p e^μ / Γ(n+1)`. Same expression as the general formula
/// at `r = 0`, `f(0) = 1`.
pub fn asymptotic_norm_exponential(
    mu: f64,
    n: f64,
    p: &HolderExponent,
) -> Result<AsymptoticValue> {
    let local = LocalBehavior {
        r: 0.0,
        f0: 1.0,
        f1: mu,
    };
    asymptotic_norm_from_local(&local, n, p, Formula::VnExp)
}

fn asymptotic_norm_from_local(
    local: &LocalBehavior,
    n: f64,
    p: &HolderExponent,
    formula: Formula,
) -> Result<AsymptoticValue> {
    if n.is_nan() || n <= 0.0 {
        return Err(Error::Domain(format!(
            "asymptotic norm requires n > 0, got {n}"
        )));
    }
    if local.f0 == 0.0 {
        return Err(Error::Domain(
            "asymptotic norm undefined: f(0) = 0".into(),
        ));
    }
    let log_value = p.log_cp()
        + n * (local.f0.abs().ln() + log_gamma(local.r + 1.0)?)
        + local.rate()
        - log_gamma((local.r + 1.0) * n + 1.0)?;
    Ok(AsymptoticValue {
        log_value,
        n_or_lambda: n,
        formula,
    })
}

/// `log` of the main asymptotic norm formula for a power-exponential kernel
/// (`f(0) = c`, `f'(0)/f(0) = μ`). Real `n > 0` is allowed.
pub fn asymptotic_norm_powexp(
    k: &PowerExpKernel,
    n: f64,
    p: &HolderExponent,
) -> Result<AsymptoticValue> {
    asymptotic_norm_from_local(&k.local(), n, p, Formula::VnPowexp)
}

/// `log` of the main asymptotic norm formula for `k(t) = t^r f(t)`; needs
/// `f(0) ≠ 0`. Identical expression (and bit-identical value) to the
/// power-exponential form applied to the tangent kernel.
pub fn asymptotic_norm_smooth(
    k: &SmoothFactorKernel,
    n: f64,
    p: &HolderExponent,
) -> Result<AsymptoticValue> {
    asymptotic_norm_from_local(&k.local(), n, p, Formula::VnMain)
}

/// The `p = 1` case of the formula (`C_1 = 1`), which is the limit law for
/// `P(X_1 + ... + X_n <= 1)` when the kernel is a probability density.
pub fn asymptotic_prob_formula(local: &LocalBehavior, n: f64) -> Result<AsymptoticValue> {
    asymptotic_norm_from_local(
        local,
        n,
        &HolderExponent::new(Exponent::One),
        Formula::ProbLargedev,
    )
}

/// Choice of the auxiliary divergent function `g` in the `p = 1` extremal
/// sequence `e^{-g(n)·n·t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GChoice {
    /// `g(n) = √n`
    #[default]
    Sqrt,
    /// `g(n) = log(1+n)`
    Log,
}

impl GChoice {
    fn apply(&self, n: f64) -> f64 {
        match self {
            GChoice::Sqrt => n.sqrt(),
            GChoice::Log => (1.0 + n).ln(),
        }
    }
}

/// Discretization of the asymptotically extremal sequence for `V_k^n` with
/// local behaviour `(r, μ)`:
/// `e^{-g(n)·n·t}` at `p = 1`, `e^{-((r+1)n-1+μ)t/(p-1)}` for `1 < p < ∞`,
/// the constant 1 at `p = ∞`.
pub fn extremal_function(
    p: &HolderExponent,
    r: f64,
    mu: f64,
    n: f64,
    g_choice: GChoice,
    grid: GridSpec,
) -> Result<ScaledGridFunction> {
    if n.is_nan() || n < 1.0 {
        return Err(Error::Domain(format!(
            "extremal function requires n >= 1, got {n}"
        )));
    }
    let beta = match p.p() {
        Exponent::One => g_choice.apply(n) * n,
        Exponent::Infinity => return Ok(ScaledGridFunction::one(grid)),
        Exponent::Finite(pf) => ((r + 1.0) * n - 1.0 + mu) / (pf - 1.0),
    };
    let k = PowerExpKernel::new(1.0, 0.0, -beta)?;
    Ok(discretize_powexp(&k, grid))
}

/// Apply the rank-one operator `S_λ`: `u ↦ ⟨u, e_{-λ}⟩ e_λ`, inner product
/// by the same cell quadrature the grid uses everywhere.
pub fn rank1_apply(lambda: f64, u: &ScaledGridFunction) -> ScaledGridFunction {
    let grid = u.grid();
    let h = grid.h();
    if u.is_zero() {
        return ScaledGridFunction::zero(grid);
    }
    // ⟨u, e_{-λ}⟩ in scaled arithmetic: h Σ u_j e^{-λ t_j} · e^{log_scale},
    // with the largest exponential factored out so no λ can overflow.
    let shift = (-lambda * grid.midpoint(0)).max(-lambda * grid.midpoint(grid.m() - 1));
    let mut sum = 0.0;
    for (j, &v) in u.values().iter().enumerate() {
        sum += v * (-lambda * grid.midpoint(j) - shift).exp();
    }
    if sum == 0.0 {
        return ScaledGridFunction::zero(grid);
    }
    let log_ip = (h * sum.abs()).ln() + shift + u.log_scale();
    let e_lambda = discretize_powexp(
        &PowerExpKernel::new(sum.signum(), 0.0, lambda).expect("valid exponential kernel"),
        grid,
    );
    e_lambda.scaled(log_ip)
}

/// Measure one row of `‖V_{kA}^n - V_{kB}^n‖_p / ‖V_{kA}^n‖_p`.
///
/// The difference-norm numerator is exact for `p ∈ {1, ∞}` (`‖d‖_1`), an SVD
/// value at `p = 2`, and the `‖d‖_1` upper bound otherwise (making the ratio
/// an upper bound on the true one, still enough to exhibit decay to 0).
pub fn equivalence_ratio(
    k_a: &ScaledGridFunction,
    k_b: &ScaledGridFunction,
    n: u32,
    p: &HolderExponent,
) -> Result<EquivRow> {
    if k_a.is_zero() {
        return Err(Error::Domain(
            "equivalence ratio needs a nonzero reference kernel".into(),
        ));
    }
    let wa = conv_power_numeric(k_a, n)?;
    let wb = conv_power_numeric(k_b, n)?;
    let d = ScaledGridFunction::sub(&wa, &wb)?;
    let opts = OpNormOptions::default();
    let log_norm_a = op_norm_of_kernel(&wa, p, &opts, n)?.log_lower;
    let log_norm_b = op_norm_of_kernel(&wb, p, &opts, n)?.log_lower;
    let log_diff_norm = if d.is_zero() {
        f64::NEG_INFINITY
    } else if p.is_one() || p.is_infinity() {
        restricted_l1(&d, 1.0)?
    } else if p.p().value() == 2.0 {
        op_norm_of_kernel(&d, p, &opts, 1)?.log_lower
    } else {
        // Upper bound ‖V_d‖_p <= ‖d‖_1.
        restricted_l1(&d, 1.0)?
    };
    Ok(EquivRow {
        n,
        log_norm_a,
        log_norm_b,
        log_diff_norm,
        ratio: (log_diff_norm - log_norm_a).exp(),
    })
}

/// Components of a tail-decay measurement; the CLI trace emits the pieces
/// alongside the ratio.
pub struct DecayParts {
    pub log_tail: f64,
    pub log_norm_lower: f64,
    pub ratio: f64,
}

/// The tail-decay quantity
/// `n^degree · (∫_0^{1-δ} k^{*(n-j)}) / ‖V_k^n‖_p` (linear domain), which
/// tends to 0 as `n → ∞` for kernels pinched between power-exponentials.
pub fn decay_ratio(
    k: &Kernel,
    n: u32,
    j: u32,
    delta: f64,
    poly_degree: u32,
    p: &HolderExponent,
    grid: GridSpec,
) -> Result<f64> {
    Ok(decay_ratio_parts(k, n, j, delta, poly_degree, p, grid)?.ratio)
}

#[allow(clippy::too_many_arguments)]
pub fn decay_ratio_parts(
    k: &Kernel,
    n: u32,
    j: u32,
    delta: f64,
    poly_degree: u32,
    p: &HolderExponent,
    grid: GridSpec,
) -> Result<DecayParts> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    if j >= n {
        return Err(Error::Domain(format!(
            "need 0 <= j < n, got j = {j}, n = {n}"
        )));
    }
    let kg = crate::grid::discretize(k, grid);
    let tail_power = conv_power_numeric(&kg, n - j)?;
    let log_tail = restricted_l1(&tail_power, 1.0 - delta)?;
    let norm = op_norm(&kg, n, p, &OpNormOptions::default())?;
    let log_ratio = (poly_degree as f64) * (n as f64).ln() + log_tail - norm.log_lower;
    Ok(DecayParts {
        log_tail,
        log_norm_lower: norm.log_lower,
        ratio: log_ratio.exp(),
    })
}
