//! Execution of the subcommands and deterministic rendering of their
//! results. Identical arguments produce byte-identical output: computation
//! is sequential, floats print via the shortest round-trip formatter, and
//! JSON field order is fixed by the document structs.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

use volterra_core::asymptotics::{
    asymptotic_norm_powexp, asymptotic_norm_smooth, decay_ratio_parts, equivalence_ratio,
    extremal_function, AsymptoticValue, EquivalenceTrace,
};
use volterra_core::grid::{conv_power_numeric, discretize};
use volterra_core::largedev::{largedev_report, LargeDevMeta, LargeDevRow};
use volterra_core::norms::{op_norm, rayleigh_quotient, NormEstimate, OpNormOptions};
use volterra_core::{Error, HolderExponent, Kernel};

use crate::args::*;
use crate::CliError;

pub struct RunOutput {
    pub text: String,
    pub path: Option<PathBuf>,
}

/// Preamble line included in every CSV so the value domain is stated in
/// the output itself.
const CSV_NOTE: &str = "# log_* columns are natural logarithms; other columns are linear\n";

const JSON_VERSION: &str = "1";

fn numeric(e: Error) -> CliError {
    match e {
        Error::NoConvergence {
            iterations,
            log_lower,
            log_upper,
        } => CliError::Numeric(format!(
            "power iteration hit the {iterations}-iteration cap; \
             best bounds: log_lower={log_lower}, log_upper={log_upper}"
        )),
        other => CliError::Numeric(other.to_string()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Starting-vector hint for the iterative norm paths: the extremal rate
/// `(r+1)n - 1 + f'(0)/f(0)` when the kernel's local data admits it.
fn norm_options(
    kernel: &Kernel,
    n: u32,
    method: volterra_core::MethodChoice,
    tol: f64,
) -> OpNormOptions {
    let local = kernel.local();
    let initial_rate = if local.f0 > 0.0 {
        Some((local.r + 1.0) * n as f64 - 1.0 + local.rate())
    } else {
        None
    };
    OpNormOptions {
        method,
        tol,
        max_iterations: 10_000,
        initial_rate,
    }
}

fn asymptotic_norm(k: &Kernel, n: f64, p: &HolderExponent) -> Result<AsymptoticValue, CliError> {
    match k {
        Kernel::PowerExp(k) => asymptotic_norm_powexp(k, n, p),
        Kernel::Smooth(k) => asymptotic_norm_smooth(k, n, p),
    }
    .map_err(|e| usage("--kernel", e))
}

pub fn run(command: Command) -> Result<RunOutput, CliError> {
    match command {
        Command::Convpow(a) => convpow(a),
        Command::Norm(a) => norm(a),
        Command::Table(a) => table(a),
        Command::Extremal(a) => extremal(a),
        Command::Equiv(a) => equiv(a),
        Command::Decay(a) => decay(a),
        Command::Largedev(a) => largedev(a),
    }
}

#[derive(Serialize)]
struct CellRow {
    t: f64,
    mantissa: f64,
    log_scale: f64,
}

#[derive(Serialize)]
struct RowsDoc<R: Serialize> {
    version: &'static str,
    config: RunConfig,
    rows: Vec<R>,
}

fn convpow(a: ConvpowArgs) -> Result<RunOutput, CliError> {
    let kernel = parse_kernel_flag("--kernel", &a.kernel)?;
    let n = parse_n_single(&a.n)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Csv)?;

    let w = conv_power_numeric(&discretize(&kernel, grid), n).map_err(numeric)?;
    let rows: Vec<CellRow> = (0..grid.m())
        .map(|j| CellRow {
            t: grid.midpoint(j),
            mantissa: w.values()[j],
            log_scale: w.log_scale(),
        })
        .collect();

    let mut config = RunConfig::new("convpow", &a.n, grid.m(), format);
    config.kernel = Some(a.kernel.clone());

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("t,mantissa,log_scale\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{}", r.t, r.mantissa, r.log_scale);
            }
            out
        }
        Format::Json => to_json(&RowsDoc {
            version: JSON_VERSION,
            config,
            rows,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}

#[derive(Serialize)]
struct NormDoc {
    version: &'static str,
    config: RunConfig,
    estimate: NormEstimate,
}

fn norm(a: NormArgs) -> Result<RunOutput, CliError> {
    let kernel = parse_kernel_flag("--kernel", &a.kernel)?;
    let n = parse_n_single(&a.n)?;
    let p = parse_p_flag(&a.p)?;
    let method = parse_method_flag(&a.method)?;
    let tol = parse_tol_flag(a.tol)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Json)?;

    let opts = norm_options(&kernel, n, method, tol);
    let est = op_norm(&discretize(&kernel, grid), n, &p, &opts).map_err(numeric)?;

    let mut config = RunConfig::new("norm", &a.n, grid.m(), format);
    config.kernel = Some(a.kernel.clone());
    config.p = Some(a.p.clone());
    config.method = Some(a.method.clone());
    config.tol = Some(tol);

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("p,log_lower,log_upper,method,iterations\n");
            let method_tag = serde_json::to_value(est.method).expect("method tag");
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p,
                est.log_lower,
                est.log_upper,
                method_tag.as_str().unwrap_or("unknown"),
                est.iterations
            );
            out
        }
        Format::Json => to_json(&NormDoc {
            version: JSON_VERSION,
            config,
            estimate: est,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}

#[derive(Serialize)]
struct TableRow {
    n: u32,
    log_norm_lower: f64,
    log_norm_upper: f64,
    log_asym: f64,
    ratio: f64,
}

fn table(a: TableArgs) -> Result<RunOutput, CliError> {
    let kernel = parse_kernel_flag("--kernel", &a.kernel)?;
    let p = parse_p_flag(&a.p)?;
    let ns = parse_n_list(&a.n)?;
    let method = parse_method_flag(&a.method)?;
    let tol = parse_tol_flag(a.tol)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Csv)?;

    let kg = discretize(&kernel, grid);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let opts = norm_options(&kernel, n, method, tol);
        let est = op_norm(&kg, n, &p, &opts).map_err(numeric)?;
        let asym = asymptotic_norm(&kernel, n as f64, &p)?;
        rows.push(TableRow {
            n,
            log_norm_lower: est.log_lower,
            log_norm_upper: est.log_upper,
            log_asym: asym.log_value,
            ratio: (est.log_lower - asym.log_value).exp(),
        });
    }

    let mut config = RunConfig::new("table", &a.n, grid.m(), format);
    config.kernel = Some(a.kernel.clone());
    config.p = Some(a.p.clone());
    config.method = Some(a.method.clone());
    config.tol = Some(tol);

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("n,log_norm_lower,log_norm_upper,log_asym,ratio\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n, r.log_norm_lower, r.log_norm_upper, r.log_asym, r.ratio
                );
            }
            out
        }
        Format::Json => to_json(&RowsDoc {
            version: JSON_VERSION,
            config,
            rows,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}

#[derive(Serialize)]
struct ExtremalRow {
    n: u32,
    log_rayleigh: f64,
    log_norm_lower: f64,
    efficiency: f64,
}

fn extremal(a: ExtremalArgs) -> Result<RunOutput, CliError> {
    let kernel = parse_kernel_flag("--kernel", &a.kernel)?;
    let p = parse_p_flag(&a.p)?;
    let ns = parse_n_list(&a.n)?;
    let g_choice = parse_g_flag(&a.g)?;
    let tol = parse_tol_flag(a.tol)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Csv)?;

    let local = kernel.local();
    if local.f0 == 0.0 {
        return Err(usage(
            "--kernel",
            "extremal sequence needs f(0) != 0 (the local rate is undefined)",
        ));
    }
    let kg = discretize(&kernel, grid);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let u = extremal_function(&p, local.r, local.rate(), n as f64, g_choice, grid)
            .map_err(numeric)?;
        let rq = rayleigh_quotient(&kg, n, &u, &p).map_err(numeric)?;
        let opts = norm_options(&kernel, n, volterra_core::MethodChoice::Auto, tol);
        let est = op_norm(&kg, n, &p, &opts).map_err(numeric)?;
        rows.push(ExtremalRow {
            n,
            log_rayleigh: rq,
            log_norm_lower: est.log_lower,
            efficiency: (rq - est.log_lower).exp(),
        });
    }

    let mut config = RunConfig::new("extremal", &a.n, grid.m(), format);
    config.kernel = Some(a.kernel.clone());
    config.p = Some(a.p.clone());
    config.g = Some(a.g.clone());
    config.tol = Some(tol);

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("n,log_rayleigh,log_norm_lower,efficiency\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.n, r.log_rayleigh, r.log_norm_lower, r.efficiency
                );
            }
            out
        }
        Format::Json => to_json(&RowsDoc {
            version: JSON_VERSION,
            config,
            rows,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}

fn equiv(a: EquivArgs) -> Result<RunOutput, CliError> {
    let kernel = parse_kernel_flag("--kernel", &a.kernel)?;
    let p = parse_p_flag(&a.p)?;
    let ns = parse_n_list(&a.n)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Csv)?;

    let other: Kernel = match &a.kernel2 {
        Some(spec) => parse_kernel_flag("--kernel2", spec)?,
        None => Kernel::PowerExp(kernel.tangent().map_err(|e| usage("--kernel", e))?),
    };
    let ka = discretize(&kernel, grid);
    let kb = discretize(&other, grid);
    let mut trace = EquivalenceTrace::default();
    for &n in &ns {
        trace.push(equivalence_ratio(&ka, &kb, n, &p).map_err(numeric)?);
    }

    let mut config = RunConfig::new("equiv", &a.n, grid.m(), format);
    config.kernel = Some(a.kernel.clone());
    config.kernel2 = a.kernel2.clone();
    config.p = Some(a.p.clone());

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("n,log_norm_a,log_norm_b,log_diff,ratio\n");
            for r in &trace.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n, r.log_norm_a, r.log_norm_b, r.log_diff_norm, r.ratio
                );
            }
            out
        }
        Format::Json => to_json(&RowsDoc {
            version: JSON_VERSION,
            config,
            rows: trace.rows,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}

#[derive(Serialize)]
struct DecayRow {
    n: u32,
    log_tail: f64,
    log_norm_lower: f64,
    ratio: f64,
}

fn decay(a: DecayArgs) -> Result<RunOutput, CliError> {
    let kernel = parse_kernel_flag("--kernel", &a.kernel)?;
    let p = parse_p_flag(&a.p)?;
    let ns = parse_n_list(&a.n)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Csv)?;
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(usage(
            "--delta",
            format!("delta must lie strictly inside (0,1), got {}", a.delta),
        ));
    }
    if ns.iter().any(|&n| a.j >= n) {
        return Err(usage("--j", format!("j = {} must be below every n", a.j)));
    }

    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let parts =
            decay_ratio_parts(&kernel, n, a.j, a.delta, a.degree, &p, grid).map_err(numeric)?;
        rows.push(DecayRow {
            n,
            log_tail: parts.log_tail,
            log_norm_lower: parts.log_norm_lower,
            ratio: parts.ratio,
        });
    }

    let mut config = RunConfig::new("decay", &a.n, grid.m(), format);
    config.kernel = Some(a.kernel.clone());
    config.p = Some(a.p.clone());
    config.delta = Some(a.delta);
    config.j = Some(a.j);
    config.degree = Some(a.degree);

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("n,log_tail,log_norm_lower,ratio\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.n, r.log_tail, r.log_norm_lower, r.ratio
                );
            }
            out
        }
        Format::Json => to_json(&RowsDoc {
            version: JSON_VERSION,
            config,
            rows,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}

#[derive(Serialize)]
struct LargedevDoc {
    version: &'static str,
    config: RunConfig,
    meta: LargeDevMeta,
    rows: Vec<LargeDevRow>,
}

fn largedev(a: LargedevArgs) -> Result<RunOutput, CliError> {
    let density = parse_density_flag(&a.density)?;
    let ns = parse_n_list(&a.n)?;
    let grid = parse_grid_flag(a.common.m)?;
    let format = parse_format_flag(a.common.format.as_deref(), Format::Csv)?;
    if a.trials < 1000 {
        return Err(usage(
            "--trials",
            format!("need at least 1000 trials, got {}", a.trials),
        ));
    }

    let report = largedev_report(&density, &ns, grid, a.trials, a.seed).map_err(numeric)?;

    let mut config = RunConfig::new("largedev", &a.n, grid.m(), format);
    config.density = Some(a.density.clone());
    config.trials = Some(a.trials);
    config.seed = Some(a.seed);

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_NOTE);
            out.push_str("n,log_p_grid,log_p_oracle,mc_estimate,mc_stderr,log_p_asym,ratio\n");
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.log_p_grid,
                    fmt_opt(r.log_p_oracle),
                    fmt_opt(r.mc_estimate),
                    fmt_opt(r.mc_stderr),
                    r.log_p_asym,
                    r.ratio_grid_over_asym
                );
            }
            out
        }
        Format::Json => to_json(&LargedevDoc {
            version: JSON_VERSION,
            config,
            meta: report.meta.clone(),
            rows: report.rows,
        }),
    };
    Ok(RunOutput {
        text,
        path: a.common.output,
    })
}
