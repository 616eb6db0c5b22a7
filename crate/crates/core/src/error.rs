use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A mathematical precondition was violated (e.g. `r <= -1`, `f(0) = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// The call itself was malformed (mismatched grids, `n = 0`, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Kernel spec string could not be parsed; `pos` is a byte offset.
    #[error("kernel spec parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Power iteration hit its iteration cap. The best certified bounds
    /// obtained so far are carried along.
    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence {
        iterations: u32,
        log_lower: f64,
        log_upper: f64,
    },

    /// No sampler exists for this density family; use the grid path.
    #[error("no sampler for this density family; use the grid path instead")]
    NoSampler,
}

pub type Result<T> = std::result::Result<T, Error>;
