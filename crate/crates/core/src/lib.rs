//! Numerical study of iterated Volterra convolution operators
//! `(V_k u)(t) = ∫_0^t k(t-s) u(s) ds` on `L^p(0,1)`.
//!
//! The crate provides four layers:
//!
//! * [`kernel`] — exact algebra of power-exponential kernels `c·t^r·e^{μt}`
//!   (closed under convolution powers) and kernels `t^r f(t)` with smooth
//!   factor data at the origin, plus the tangent-kernel construction.
//! * [`grid`] — log-scaled discretization on `(0,1)` and n-fold numerical
//!   convolution that survives the `1/Γ((r+1)n+1)` decay of `k^{*n}`.
//! * [`norms`] — certified operator-norm estimation of `V_k^n` for all
//!   `p ∈ [1, ∞]` (exact at the endpoints, SVD at `p = 2`, nonlinear power
//!   iteration elsewhere).
//! * [`asymptotics`] / [`largedev`] — evaluators for the closed-form norm
//!   asymptotics, extremal sequences, asymptotic-equivalence measurements,
//!   and the derived limit law for `P(X_1 + ... + X_n <= 1)`.

pub mod asymptotics;
pub mod error;
pub mod grid;
pub mod holder;
pub mod kernel;
pub mod largedev;
pub mod norms;
pub mod special;

pub use asymptotics::{
    asymptotic_norm_powexp, asymptotic_norm_smooth, decay_ratio, equivalence_ratio,
    extremal_function, rank1_apply, s_lambda_norm_asymptotic, s_lambda_norm_exact,
    AsymptoticValue, EquivRow, EquivalenceTrace, Formula, GChoice,
};
pub use error::{Error, Result};
pub use grid::{
    conv_power_numeric, convolve, discretize, restricted_l1, GridSpec, ScaledGridFunction,
};
pub use holder::{cp_constant, Exponent, HolderExponent};
pub use kernel::{
    parse_kernel_spec, Kernel, LocalBehavior, PowerExpKernel, SmoothFactor, SmoothFactorKernel,
};
pub use largedev::{
    largedev_report, prob_sum_leq1_grid, prob_sum_leq1_mc, CounterRng, DensityFamily,
    DensitySpec, LargeDevReport, LargeDevRow,
};
pub use norms::{
    lp_norm, op_norm, op_norm_of_kernel, rayleigh_quotient, volterra_apply, Method, MethodChoice,
    NormEstimate, OpNormOptions,
};
pub use special::log_gamma;
