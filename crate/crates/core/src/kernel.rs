//! Exact kernel algebra: power-exponential kernels `c·t^r·e^{μt}` (closed
//! under convolution powers), kernels `t^r·f(t)` with a smooth factor known
//! at the origin, and the tangent power-exponential kernel that shares a
//! kernel's behaviour at 0.
//!
//! Coefficients are kept as `sign` + `log|c|` so that powers like
//! `Γ(r+1)^n / Γ((r+1)n)` never leave the representable range.

use crate::error::{Error, Result};
use crate::special::log_gamma;

/// Behaviour of a kernel at the origin: `k(t) ~ f0 · t^r · e^{(f1/f0) t}`.
///
/// This triple is all the asymptotic formulas consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBehavior {
    pub r: f64,
    pub f0: f64,
    pub f1: f64,
}

impl LocalBehavior {
    /// Rate of the tangent exponential factor, `f'(0)/f(0)`.
    pub fn rate(&self) -> f64 {
        self.f1 / self.f0
    }
}

/// `k(t) = sign · e^{log_c} · t^r · e^{μ t}` on `(0,1)`, with `r > -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerExpKernel {
    sign: f64,
    log_c: f64,
    r: f64,
    mu: f64,
}

impl PowerExpKernel {
    pub fn new(c: f64, r: f64, mu: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::Domain(format!(
                "coefficient must be nonzero and finite, got {c}"
            )));
        }
        Self::from_log(c.signum(), c.abs().ln(), r, mu)
    }

    pub fn from_log(sign: f64, log_c: f64, r: f64, mu: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::Domain(format!("sign must be ±1, got {sign}")));
        }
        if r.is_nan() || r <= -1.0 {
            return Err(Error::Domain(format!(
                "exponent must satisfy r > -1 for integrability, got {r}"
            )));
        }
        if !log_c.is_finite() || !mu.is_finite() {
            return Err(Error::Domain(
                "log-coefficient and rate must be finite".into(),
            ));
        }
        Ok(PowerExpKernel {
            sign,
            log_c,
            r,
            mu,
        })
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Pointwise value for `t > 0` (the `t^r` factor blows up at 0 if `r < 0`).
    pub fn eval(&self, t: f64) -> f64 {
        self.sign * (self.log_c + self.r * t.ln() + self.mu * t).exp()
    }

    /// Multiply the coefficient by `e^{log_a}` (exact in the representation).
    pub fn scale_log(&self, log_a: f64) -> PowerExpKernel {
        PowerExpKernel {
            log_c: self.log_c + log_a,
            ..*self
        }
    }

    /// Closed-form convolution power `k^{*n}` for real `n > 0`:
    /// exponent `(r+1)n - 1`, rate `μ`, log-coefficient
    /// `n(log c + log Γ(r+1)) - log Γ((r+1)n)`.
    ///
    /// A negative coefficient only admits integer powers.
    pub fn conv_power(&self, n: f64) -> Result<PowerExpKernel> {
        if n.is_nan() || n <= 0.0 || n == f64::INFINITY {
            return Err(Error::Domain(format!(
                "convolution power requires n > 0, got {n}"
            )));
        }
        let sign = if self.sign < 0.0 {
            if n.fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "non-integer power {n} of a negative kernel is undefined"
                )));
            }
            if (n as u64).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        } else {
            1.0
        };
        let log_c =
            n * (self.log_c + log_gamma(self.r + 1.0)?) - log_gamma((self.r + 1.0) * n)?;
        PowerExpKernel::from_log(sign, log_c, (self.r + 1.0) * n - 1.0, self.mu)
    }

    /// Symbolic convolution of two power-exponential kernels. Only kernels
    /// with the same exponential rate stay inside the family:
    /// `c1 t^{r1} e^{μt} * c2 t^{r2} e^{μt}
    ///  = c1 c2 B(r1+1, r2+1) t^{r1+r2+1} e^{μt}`.
    pub fn convolve(&self, other: &PowerExpKernel) -> Result<PowerExpKernel> {
        if self.mu != other.mu {
            return Err(Error::Usage(format!(
                "closed-form convolution needs equal rates, got {} and {}",
                self.mu, other.mu
            )));
        }
        let log_beta = log_gamma(self.r + 1.0)? + log_gamma(other.r + 1.0)?
            - log_gamma(self.r + other.r + 2.0)?;
        PowerExpKernel::from_log(
            self.sign * other.sign,
            self.log_c + other.log_c + log_beta,
            self.r + other.r + 1.0,
            self.mu,
        )
    }

    pub fn local(&self) -> LocalBehavior {
        let f0 = self.sign * self.log_c.exp();
        LocalBehavior {
            r: self.r,
            f0,
            f1: f0 * self.mu,
        }
    }
}

/// The smooth factor of a [`SmoothFactorKernel`]: either polynomial
/// coefficients (low degree first) or a uniform table of samples over
/// `[0, 1]` joined by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothFactor {
    Poly(Vec<f64>),
    Table(Vec<f64>),
}

/// `k(t) = t^r · f(t)` with `r > -1` and `f(0)`, `f'(0)` known.
///
/// `f0` and `f1` are stored explicitly rather than inferred from the
/// evaluator: the asymptotic formulas need them exactly. `f0 = 0` is
/// permitted for discretization (e.g. `k(t) = t` written as `r = 0`,
/// `f = (0, 1)`), but every operation that needs the tangent behaviour
/// rejects it.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFactorKernel {
    r: f64,
    f0: f64,
    f1: f64,
    factor: SmoothFactor,
}

impl SmoothFactorKernel {
    /// Polynomial smooth factor `f(t) = Σ coeffs[j] t^j`; `f0`, `f1` are the
    /// first two coefficients.
    pub fn poly(r: f64, coeffs: Vec<f64>) -> Result<Self> {
        if r.is_nan() || r <= -1.0 {
            return Err(Error::Domain(format!(
                "exponent must satisfy r > -1, got {r}"
            )));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage(
                "polynomial factor needs at least one finite coefficient".into(),
            ));
        }
        let f0 = coeffs[0];
        let f1 = *coeffs.get(1).unwrap_or(&0.0);
        Ok(SmoothFactorKernel {
            r,
            f0,
            f1,
            factor: SmoothFactor::Poly(coeffs),
        })
    }

    /// Tabulated smooth factor: `samples` are values of `f` at the uniform
    /// nodes `j/(len-1)` over `[0, 1]`, evaluated by linear interpolation.
    pub fn table(r: f64, f0: f64, f1: f64, samples: Vec<f64>) -> Result<Self> {
        if r.is_nan() || r <= -1.0 {
            return Err(Error::Domain(format!(
                "exponent must satisfy r > -1, got {r}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::Usage(
                "table factor needs at least two samples".into(),
            ));
        }
        if (samples[0] - f0).abs() > 1e-12 * f0.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "table value at 0 ({}) disagrees with declared f0 ({f0})",
                samples[0]
            )));
        }
        Ok(SmoothFactorKernel {
            r,
            f0,
            f1,
            factor: SmoothFactor::Table(samples),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn f1(&self) -> f64 {
        self.f1
    }

    /// The smooth factor `f(t)` for `t ∈ [0, 1]`.
    pub fn factor_at(&self, t: f64) -> f64 {
        match &self.factor {
            SmoothFactor::Poly(coeffs) => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
            SmoothFactor::Table(samples) => {
                let n = samples.len() - 1;
                let x = (t.clamp(0.0, 1.0)) * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let frac = x - i as f64;
                samples[i] + frac * (samples[i + 1] - samples[i])
            }
        }
    }

    /// Pointwise value `t^r f(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        t.powf(self.r) * self.factor_at(t)
    }

    /// The power-exponential kernel `h(t) = f(0) t^r e^{(f'(0)/f(0)) t}`
    /// sharing this kernel's behaviour at the origin.
    pub fn tangent(&self) -> Result<PowerExpKernel> {
        if self.f0 == 0.0 {
            return Err(Error::Domain(
                "tangent kernel undefined: f(0) = 0".into(),
            ));
        }
        PowerExpKernel::new(self.f0, self.r, self.f1 / self.f0)
    }

    pub fn local(&self) -> LocalBehavior {
        LocalBehavior {
            r: self.r,
            f0: self.f0,
            f1: self.f1,
        }
    }
}

/// Either kernel family, as produced by the spec parser.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    PowerExp(PowerExpKernel),
    Smooth(SmoothFactorKernel),
}

impl Kernel {
    pub fn local(&self) -> LocalBehavior {
        match self {
            Kernel::PowerExp(k) => k.local(),
            Kernel::Smooth(k) => k.local(),
        }
    }

    /// The tangent power-exponential kernel (identity on `PowerExp`).
    pub fn tangent(&self) -> Result<PowerExpKernel> {
        match self {
            Kernel::PowerExp(k) => Ok(*k),
            Kernel::Smooth(k) => k.tangent(),
        }
    }
}

/// Parser for the kernel spec mini-language:
///
/// ```text
/// powexp:c=<real>,r=<real>,mu=<real>
/// poly:r=<real>,f=<a0>,<a1>,...        (f(t) = Σ aj t^j)
/// ```
///
/// Errors carry the byte offset of the offending token.
pub fn parse_kernel_spec(spec: &str) -> Result<Kernel> {
    let mut cur = Cursor { s: spec, pos: 0 };
    if cur.try_tag("powexp:") {
        cur.expect_key("c")?;
        let c = cur.parse_real()?;
        cur.expect_sep()?;
        cur.expect_key("r")?;
        let r = cur.parse_real()?;
        cur.expect_sep()?;
        cur.expect_key("mu")?;
        let mu = cur.parse_real()?;
        cur.expect_end()?;
        let k = PowerExpKernel::new(c, r, mu)
            .map_err(|e| cur.fail_at(0, &format!("invalid powexp kernel: {e}")))?;
        Ok(Kernel::PowerExp(k))
    } else if cur.try_tag("poly:") {
        cur.expect_key("r")?;
        let r = cur.parse_real()?;
        cur.expect_sep()?;
        cur.expect_key("f")?;
        let mut coeffs = vec![cur.parse_real()?];
        while cur.try_tag(",") {
            coeffs.push(cur.parse_real()?);
        }
        cur.expect_end()?;
        let k = SmoothFactorKernel::poly(r, coeffs)
            .map_err(|e| cur.fail_at(0, &format!("invalid poly kernel: {e}")))?;
        Ok(Kernel::Smooth(k))
    } else {
        Err(cur.fail_at(0, "expected kernel family `powexp:` or `poly:`"))
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn fail_at(&self, pos: usize, msg: &str) -> Error {
        Error::Parse {
            pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn try_tag(&mut self, tag: &str) -> bool {
        if self.rest().starts_with(tag) {
            self.pos += tag.len();
            true
        } else {
            false
        }
    }

    fn expect_key(&mut self, key: &str) -> Result<()> {
        let tag = format!("{key}=");
        if self.try_tag(&tag) {
            Ok(())
        } else {
            Err(self.fail_at(self.pos, &format!("expected `{key}=`")))
        }
    }

    fn expect_sep(&mut self) -> Result<()> {
        if self.try_tag(",") {
            Ok(())
        } else {
            Err(self.fail_at(self.pos, "expected `,`"))
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.fail_at(self.pos, "unexpected trailing input"))
        }
    }

    fn parse_real(&mut self) -> Result<f64> {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|&(_, c)| c == ',')
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let token = &rest[..end];
        if token.is_empty() {
            return Err(self.fail_at(self.pos, "expected a number"));
        }
        let value: f64 = token
            .parse()
            .map_err(|_| self.fail_at(self.pos, &format!("invalid number {token:?}")))?;
        self.pos += end;
        Ok(value)
    }
}
