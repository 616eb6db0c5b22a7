//! The probabilistic reading of the `p = 1` asymptotics: for i.i.d.
//! `X_i` with density
//! `k(t) = t^r f(t)` on `(0,∞)`,
//!
//! ```text
//! P(X_1 + ... + X_n <= 1)  =  ∫_0^1 k^{*n}
//!                          ~  (f(0) Γ(r+1))^n e^{f'(0)/f(0)} / Γ((r+1)n+1),
//! ```
//!
//! computed three ways — exact grid convolution, a closed-form oracle where
//! the family admits one, and Monte Carlo — and compared with the limit
//! formula.

use crate::asymptotics::{asymptotic_prob_formula, AsymptoticValue};
use crate::error::{Error, Result};
use crate::grid::{conv_power_numeric, discretize_smooth, restricted_l1, GridSpec,
    ScaledGridFunction};
use crate::kernel::{LocalBehavior, PowerExpKernel, SmoothFactorKernel};
use crate::special::{log_gamma, log_reg_lower_gamma};

use serde::Serialize;
use std::fmt;

/// A probability density on `(0,∞)` of the form `t^r f(t)`, with the
/// `(r, f(0), f'(0))` metadata the asymptotic formula needs surfaced
/// explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    family: DensityFamily,
    local: LocalBehavior,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily {
    /// Uniform on `(0,1)`.
    Uniform01,
    /// `rate · e^{-rate·t}`.
    Exponential { rate: f64 },
    /// Shape–rate gamma: `rate^shape t^{shape-1} e^{-rate·t} / Γ(shape)`.
    Gamma { shape: f64, rate: f64 },
    /// A user-supplied kernel declared to integrate to 1 over `(0,∞)`.
    /// No sampler exists; only the grid and asymptotic paths apply.
    Kernel(SmoothFactorKernel),
}

impl DensitySpec {
    pub fn uniform01() -> Self {
        DensitySpec {
            family: DensityFamily::Uniform01,
            local: LocalBehavior {
                r: 0.0,
                f0: 1.0,
                f1: 0.0,
            },
        }
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if rate.is_nan() || rate <= 0.0 || rate == f64::INFINITY {
            return Err(Error::Domain(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        Ok(DensitySpec {
            family: DensityFamily::Exponential { rate },
            local: LocalBehavior {
                r: 0.0,
                f0: rate,
                f1: -rate * rate,
            },
        })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if [shape, rate].iter().any(|v| v.is_nan() || *v <= 0.0 || *v == f64::INFINITY) {
            return Err(Error::Domain(format!(
                "gamma parameters must be positive, got shape {shape}, rate {rate}"
            )));
        }
        // f(t) = rate^shape e^{-rate t} / Γ(shape)
        let f0 = (shape * rate.ln() - log_gamma(shape)?).exp();
        Ok(DensitySpec {
            family: DensityFamily::Gamma { shape, rate },
            local: LocalBehavior {
                r: shape - 1.0,
                f0,
                f1: -rate * f0,
            },
        })
    }

    /// A kernel density; `total_mass` is the caller's declaration of
    /// `∫_0^∞ k` and must equal 1.
    pub fn kernel(k: SmoothFactorKernel, total_mass: f64) -> Result<Self> {
        if (total_mass - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "density must have total mass 1 on (0,inf), declared {total_mass}"
            )));
        }
        let local = k.local();
        Ok(DensitySpec {
            family: DensityFamily::Kernel(k),
            local,
        })
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    /// `(r, f(0), f'(0))` of the density near 0.
    pub fn local(&self) -> LocalBehavior {
        self.local
    }

    pub fn has_sampler(&self) -> bool {
        !matches!(self.family, DensityFamily::Kernel(_))
    }

    /// Restriction to `(0,1)` as a grid function.
    pub fn discretize(&self, grid: GridSpec) -> ScaledGridFunction {
        match &self.family {
            DensityFamily::Uniform01 => ScaledGridFunction::one(grid),
            DensityFamily::Exponential { rate } => crate::grid::discretize_powexp(
                &PowerExpKernel::new(*rate, 0.0, -rate).expect("valid exponential density"),
                grid,
            ),
            DensityFamily::Gamma { shape, rate } => {
                let log_c = shape * rate.ln() - log_gamma(*shape).expect("shape > 0");
                crate::grid::discretize_powexp(
                    &PowerExpKernel::from_log(1.0, log_c, shape - 1.0, -rate)
                        .expect("valid gamma density"),
                    grid,
                )
            }
            DensityFamily::Kernel(k) => discretize_smooth(k, grid),
        }
    }

    /// Closed-form `log P(S_n <= 1)` where the family admits one
    /// (gamma CDF for the exponential/gamma families, simplex volume for
    /// the uniform).
    pub fn log_oracle(&self, n: u32) -> Option<f64> {
        let nf = n as f64;
        match &self.family {
            DensityFamily::Uniform01 => Some(-log_gamma(nf + 1.0).expect("n >= 1")),
            DensityFamily::Exponential { rate } => {
                Some(log_reg_lower_gamma(nf, *rate).expect("valid parameters"))
            }
            DensityFamily::Gamma { shape, rate } => {
                Some(log_reg_lower_gamma(nf * shape, *rate).expect("valid parameters"))
            }
            DensityFamily::Kernel(_) => None,
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            DensityFamily::Uniform01 => write!(f, "uniform01"),
            DensityFamily::Exponential { rate } => write!(f, "exponential(rate={rate})"),
            DensityFamily::Gamma { shape, rate } => {
                write!(f, "gamma(shape={shape},rate={rate})")
            }
            DensityFamily::Kernel(k) => {
                write!(f, "kernel(r={},f0={},f1={})", k.r(), k.f0(), k.f1())
            }
        }
    }
}

/// `log P(S_n <= 1)` by grid convolution: discretize the density on `(0,1)`
/// (only values there matter, by truncation consistency) and integrate the
/// n-th convolution power.
pub fn prob_sum_leq1_grid(d: &DensitySpec, n: u32, grid: GridSpec) -> Result<f64> {
    let k = d.discretize(grid);
    if k.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let power = conv_power_numeric(&k, n)?;
    restricted_l1(&power, 1.0)
}

/// Deterministic counter-based random stream: each `(seed, trial)` pair
/// keys an independent SplitMix64 sequence, so the estimate cannot depend
/// on how trials are chunked across threads.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let keyed = seed ^ splitmix_mix(trial.wrapping_add(1).wrapping_mul(GOLDEN));
        CounterRng {
            state: splitmix_mix(keyed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        splitmix_mix(self.state)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential with the given rate, by inverse CDF: `-ln(1-U)/rate`.
    fn next_exponential(&mut self, rate: f64) -> f64 {
        let u = self.next_f64();
        -(-u).ln_1p() / rate
    }

    /// Standard gamma via shape composition: integer part as a sum of
    /// exponentials, fractional part by the Ahrens–Dieter GS rejection
    /// method for shape in (0,1).
    fn next_gamma(&mut self, shape: f64, rate: f64) -> f64 {
        let int_part = shape.floor();
        let frac = shape - int_part;
        let mut x = 0.0;
        for _ in 0..int_part as u64 {
            x += self.next_exponential(1.0);
        }
        if frac > 0.0 {
            x += self.next_gamma_frac(frac);
        }
        x / rate
    }

    fn next_gamma_frac(&mut self, a: f64) -> f64 {
        // Ahrens & Dieter (1974), algorithm GS.
        let b = (std::f64::consts::E + a) / std::f64::consts::E;
        loop {
            let p = b * self.next_f64();
            if p <= 1.0 {
                let x = p.powf(1.0 / a);
                if self.next_f64() <= (-x).exp() {
                    return x;
                }
            } else {
                let x = -((b - p) / a).ln();
                if self.next_f64() <= x.powf(a - 1.0) {
                    return x;
                }
            }
        }
    }
}

/// Monte Carlo estimate of `P(S_n <= 1)`: fraction of trials whose sample
/// sum stays at or below 1, with the binomial standard error.
///
/// Deterministic for a given `(seed, trials, n)`: the success count is an
/// integer sum over per-trial counter-based streams, so no chunking or
/// ordering can change it.
pub fn prob_sum_leq1_mc(
    d: &DensitySpec,
    n: u32,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials < 1000 {
        return Err(Error::Usage(format!(
            "need at least 1000 trials for a meaningful estimate, got {trials}"
        )));
    }
    if n == 0 {
        return Err(Error::Usage("need n >= 1".into()));
    }
    let mut hits: u64 = 0;
    for trial in 0..trials {
        let mut rng = CounterRng::for_trial(seed, trial);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += match &d.family {
                DensityFamily::Uniform01 => rng.next_f64(),
                DensityFamily::Exponential { rate } => rng.next_exponential(*rate),
                DensityFamily::Gamma { shape, rate } => rng.next_gamma(*shape, *rate),
                DensityFamily::Kernel(_) => return Err(Error::NoSampler),
            };
            if sum > 1.0 {
                break;
            }
        }
        if sum <= 1.0 {
            hits += 1;
        }
    }
    let estimate = hits as f64 / trials as f64;
    let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok((estimate, stderr))
}

/// One row of a [`LargeDevReport`]. Log columns are natural logs; the MC
/// columns are absent for kernel densities (no sampler).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LargeDevRow {
    pub n: u32,
    pub log_p_grid: f64,
    pub log_p_oracle: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub log_p_asym: f64,
    pub ratio_grid_over_asym: f64,
    /// Set when the asymptotic value is below `10/trials`, i.e. too small
    /// for the Monte Carlo column to resolve.
    pub below_mc_resolution: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeDevMeta {
    pub density: String,
    pub grid_m: usize,
    pub trials: u64,
    pub seed: u64,
}

/// Per-`n` comparison of the grid, oracle, Monte Carlo, and asymptotic
/// values of `P(S_n <= 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct LargeDevReport {
    pub meta: LargeDevMeta,
    pub rows: Vec<LargeDevRow>,
}

/// The `log` of the limit formula for `P(S_n <= 1)` (the `p = 1` asymptotic
/// norm, where `C_1 = 1`).
pub fn log_prob_asymptotic(d: &DensitySpec, n: f64) -> Result<AsymptoticValue> {
    asymptotic_prob_formula(&d.local(), n)
}

pub fn largedev_report(
    d: &DensitySpec,
    n_values: &[u32],
    grid: GridSpec,
    trials: u64,
    seed: u64,
) -> Result<LargeDevReport> {
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n == 0 {
            return Err(Error::Usage("need n >= 1 in the report range".into()));
        }
        let log_p_grid = prob_sum_leq1_grid(d, n, grid)?;
        let log_p_asym = log_prob_asymptotic(d, n as f64)?.log_value;
        let (mc_estimate, mc_stderr) = if d.has_sampler() {
            let (e, s) = prob_sum_leq1_mc(d, n, trials, seed)?;
            (Some(e), Some(s))
        } else {
            (None, None)
        };
        rows.push(LargeDevRow {
            n,
            log_p_grid,
            log_p_oracle: d.log_oracle(n),
            mc_estimate,
            mc_stderr,
            log_p_asym,
            ratio_grid_over_asym: (log_p_grid - log_p_asym).exp(),
            below_mc_resolution: log_p_asym.exp() < 10.0 / trials as f64,
        });
    }
    Ok(LargeDevReport {
        meta: LargeDevMeta {
            density: d.to_string(),
            grid_m: grid.m(),
            trials,
            seed,
        },
        rows,
    })
}
