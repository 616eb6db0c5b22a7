//! Command-line grammar and resolution of raw flag strings into core types.
//!
//! Every resolution error names the offending flag, so usage failures (exit
//! code 1) are directly actionable.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

use volterra_core::largedev::DensitySpec;
use volterra_core::norms::MethodChoice;
use volterra_core::{parse_kernel_spec, GChoice, GridSpec, HolderExponent, Kernel};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "volterra",
    about = "Convolution powers, operator norms and asymptotics of Volterra operators on L^p(0,1)",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dump the n-fold convolution power of a kernel on the grid.
    Convpow(ConvpowArgs),
    /// Certified operator-norm estimate of V_k^n (JSON by default).
    Norm(NormArgs),
    /// Table of operator norm vs asymptotic formula over a range of n.
    Table(TableArgs),
    /// Rayleigh quotient of the extremal sequence against the norm.
    Extremal(ExtremalArgs),
    /// Asymptotic-equivalence trace between a kernel and its tangent
    /// kernel (or an explicit second kernel).
    Equiv(EquivArgs),
    /// Tail-decay ratio trace.
    Decay(DecayArgs),
    /// Large-deviations report for P(X_1 + ... + X_n <= 1).
    Largedev(LargedevArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Grid cell count (power of two).
    #[arg(long, default_value_t = 4096)]
    pub m: usize,
    /// Write output to this path instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format: csv or json (norm defaults to json).
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug)]
pub struct ConvpowArgs {
    /// Kernel spec: powexp:c=..,r=..,mu=.. or poly:r=..,f=a0,a1,...
    #[arg(long)]
    pub kernel: String,
    /// Convolution power (positive integer).
    #[arg(long)]
    pub n: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub n: String,
    /// Exponent p in [1, inf]; rationals like 3/2 are parsed exactly.
    #[arg(long)]
    pub p: String,
    /// auto, exact-l1, svd-p2, power-iteration, or bound-only.
    #[arg(long, default_value = "auto")]
    pub method: String,
    /// Relative stagnation tolerance of the power iteration.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub p: String,
    /// Range a..b (inclusive) or comma list.
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub n: String,
    /// Divergent factor for the p = 1 extremal family: sqrt or log.
    #[arg(long, default_value = "sqrt")]
    pub g: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    #[arg(long)]
    pub kernel: String,
    /// Second kernel; defaults to the tangent kernel of --kernel.
    #[arg(long)]
    pub kernel2: Option<String>,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub n: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub n: String,
    /// Tail cutoff: the numerator integrates over (0, 1-delta).
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Power offset j in k^{*(n-j)}.
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    /// Polynomial degree: the ratio is multiplied by n^degree.
    #[arg(long, default_value_t = 0)]
    pub degree: u32,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct LargedevArgs {
    /// uniform01 | exponential:rate=.. | gamma:shape=..,rate=.. | a kernel
    /// spec declared to be a unit-mass density on (0,inf).
    #[arg(long)]
    pub density: String,
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved invocation, embedded in JSON outputs for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    pub n: String,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(subcommand: &str, n: &str, m: usize, format: Format) -> Self {
        RunConfig {
            subcommand: subcommand.to_string(),
            kernel: None,
            kernel2: None,
            density: None,
            p: None,
            n: n.to_string(),
            m,
            method: None,
            tol: None,
            trials: None,
            seed: None,
            g: None,
            delta: None,
            j: None,
            degree: None,
            format,
        }
    }
}

pub fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

pub fn parse_kernel_flag(flag: &str, spec: &str) -> Result<Kernel, CliError> {
    parse_kernel_spec(spec).map_err(|e| usage(flag, e))
}

pub fn parse_p_flag(spec: &str) -> Result<HolderExponent, CliError> {
    HolderExponent::parse(spec).map_err(|e| usage("--p", e))
}

pub fn parse_grid_flag(m: usize) -> Result<GridSpec, CliError> {
    GridSpec::new(m).map_err(|e| usage("--m", e))
}

pub fn parse_method_flag(spec: &str) -> Result<MethodChoice, CliError> {
    match spec {
        "auto" => Ok(MethodChoice::Auto),
        "exact-l1" => Ok(MethodChoice::ExactL1),
        "svd-p2" => Ok(MethodChoice::SvdP2),
        "power-iteration" => Ok(MethodChoice::PowerIteration),
        "bound-only" => Ok(MethodChoice::BoundOnly),
        other => Err(usage("--method", format!("unknown method {other:?}"))),
    }
}

pub fn parse_g_flag(spec: &str) -> Result<GChoice, CliError> {
    match spec {
        "sqrt" => Ok(GChoice::Sqrt),
        "log" => Ok(GChoice::Log),
        other => Err(usage("--g", format!("unknown g choice {other:?}"))),
    }
}

pub fn parse_tol_flag(tol: f64) -> Result<f64, CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(usage("--tol", format!("tolerance must be positive, got {tol}")))
    }
}

/// A single positive integer.
pub fn parse_n_single(spec: &str) -> Result<u32, CliError> {
    let v: i64 = spec
        .trim()
        .parse()
        .map_err(|_| usage("--n", format!("invalid integer {spec:?}")))?;
    if v < 1 {
        return Err(usage("--n", format!("n must be >= 1, got {v}")));
    }
    u32::try_from(v).map_err(|_| usage("--n", format!("n too large: {v}")))
}

/// Inclusive range `a..b` (step 1) or comma list `a,b,c`; mixing the two
/// forms is rejected.
pub fn parse_n_list(spec: &str) -> Result<Vec<u32>, CliError> {
    let spec = spec.trim();
    let has_range = spec.contains("..");
    let has_list = spec.contains(',');
    if has_range && has_list {
        return Err(usage(
            "--n",
            "mixed range and list forms are not allowed; use a..b or a,b,c",
        ));
    }
    if has_range {
        let (a, b) = spec
            .split_once("..")
            .ok_or_else(|| usage("--n", format!("invalid range {spec:?}")))?;
        let a = parse_n_single(a)?;
        let b = parse_n_single(b)?;
        if b < a {
            return Err(usage("--n", format!("empty range {spec:?}")));
        }
        Ok((a..=b).collect())
    } else if has_list {
        spec.split(',').map(parse_n_single).collect()
    } else {
        Ok(vec![parse_n_single(spec)?])
    }
}

pub fn parse_format_flag(spec: Option<&str>, default: Format) -> Result<Format, CliError> {
    match spec {
        None => Ok(default),
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(usage("--format", format!("unknown format {other:?}"))),
    }
}

/// Density mini-language: the named families plus bare kernel specs
/// (declared by the caller to be unit-mass densities).
pub fn parse_density_flag(spec: &str) -> Result<DensitySpec, CliError> {
    let flag = "--density";
    if spec == "uniform01" {
        return Ok(DensitySpec::uniform01());
    }
    if let Some(rest) = spec.strip_prefix("exponential:") {
        let rate = parse_keyed_real(flag, rest, "rate")?;
        return DensitySpec::exponential(rate).map_err(|e| usage(flag, e));
    }
    if let Some(rest) = spec.strip_prefix("gamma:") {
        let (shape_part, rate_part) = rest
            .split_once(',')
            .ok_or_else(|| usage(flag, "expected gamma:shape=..,rate=.."))?;
        let shape = parse_keyed_real(flag, shape_part, "shape")?;
        let rate = parse_keyed_real(flag, rate_part, "rate")?;
        return DensitySpec::gamma(shape, rate).map_err(|e| usage(flag, e));
    }
    match parse_kernel_flag(flag, spec)? {
        Kernel::Smooth(k) => DensitySpec::kernel(k, 1.0).map_err(|e| usage(flag, e)),
        Kernel::PowerExp(_) => Err(usage(
            flag,
            "power-exponential densities are the gamma family; use gamma:shape=..,rate=..",
        )),
    }
}

fn parse_keyed_real(flag: &str, part: &str, key: &str) -> Result<f64, CliError> {
    let value = part
        .strip_prefix(&format!("{key}="))
        .ok_or_else(|| usage(flag, format!("expected `{key}=<real>`, got {part:?}")))?;
    value
        .parse()
        .map_err(|_| usage(flag, format!("invalid number {value:?} for {key}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_list_forms() {
        assert_eq!(parse_n_list("5").unwrap(), vec![5]);
        assert_eq!(parse_n_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_n_list("2,4,8").unwrap(), vec![2, 4, 8]);
        assert!(parse_n_list("2..4,8").is_err());
        assert!(parse_n_list("0").is_err());
        assert!(parse_n_list("-3").is_err());
        assert!(parse_n_list("5..2").is_err());
    }

    #[test]
    fn density_forms() {
        assert!(parse_density_flag("uniform01").is_ok());
        assert!(parse_density_flag("exponential:rate=1").is_ok());
        assert!(parse_density_flag("gamma:shape=2,rate=1").is_ok());
        assert!(parse_density_flag("poly:r=1,f=2").is_ok());
        assert!(parse_density_flag("powexp:c=1,r=0,mu=0").is_err());
        assert!(parse_density_flag("exponential:rate=zero").is_err());
        assert!(parse_density_flag("nonsense").is_err());
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let err = parse_kernel_flag("--kernel", "gauss:1").unwrap_err();
        match err {
            CliError::Usage(msg) => assert!(msg.starts_with("--kernel:"), "{msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
        let err = parse_p_flag("0.3").unwrap_err();
        match err {
            CliError::Usage(msg) => assert!(msg.starts_with("--p:"), "{msg}"),
            other => panic!("expected usage error, got {other:?}"),
        }
    }
}
