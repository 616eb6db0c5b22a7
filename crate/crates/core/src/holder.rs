//! Hölder exponent pairs `(p, q)` with `1/p + 1/q = 1` and the associated
//! constant `C_p = 1/(p^{1/p} q^{1/q})` that multiplies every norm asymptotic.
//!
//! `p = ∞` is a distinguished variant, not a large float; all formulas in the
//! crate branch on it explicitly.

use crate::error::{Error, Result};

use serde::Serialize;
use std::fmt;

/// A single Lebesgue exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    One,
    /// Strictly between 1 and ∞.
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Exponent::One)
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p > 1.0 {
            // Beyond ~1e15 the conjugate rounds to exactly 1; demand `inf`.
            if p > 1e15 {
                return Err(Error::Usage(format!(
                    "exponent {p} is too large to distinguish from infinity; use inf"
                )));
            }
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::Usage(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    /// Numeric value; `∞` maps to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::One => Exponent::Infinity,
            Exponent::Infinity => Exponent::One,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::One => write!(f, "1"),
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// An exponent together with its Hölder conjugate (`1 ↔ ∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderExponent {
    p: Exponent,
    q: Exponent,
}

impl HolderExponent {
    pub fn new(p: Exponent) -> Self {
        HolderExponent {
            p,
            q: p.conjugate(),
        }
    }

    /// Parse from a user-facing string: `1`, `inf`, a decimal, or an exact
    /// rational like `3/2`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(HolderExponent::new(Exponent::Infinity));
        }
        let value = if let Some((num, den)) = s.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("invalid exponent numerator in {s:?}")))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("invalid exponent denominator in {s:?}")))?;
            if den == 0.0 {
                return Err(Error::Usage(format!("zero denominator in exponent {s:?}")));
            }
            num / den
        } else {
            s.parse()
                .map_err(|_| Error::Usage(format!("invalid exponent {s:?}")))?
        };
        Ok(HolderExponent::new(Exponent::new(value)?))
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    /// The conjugate pair `(q, p)`.
    pub fn conjugate(&self) -> HolderExponent {
        HolderExponent {
            p: self.q,
            q: self.p,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.p, Exponent::One)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.p, Exponent::Infinity)
    }

    /// `log C_p`; zero at the endpoints `p ∈ {1, ∞}`.
    pub fn log_cp(&self) -> f64 {
        match (self.p, self.q) {
            (Exponent::Finite(p), Exponent::Finite(q)) => -(p.ln() / p) - (q.ln() / q),
            _ => 0.0,
        }
    }

    /// The constant `C_p = 1/(p^{1/p} q^{1/q})` (`= 1` at `p ∈ {1, ∞}`).
    pub fn cp(&self) -> f64 {
        self.log_cp().exp()
    }
}

impl fmt::Display for HolderExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// Free-function form of [`HolderExponent::cp`].
pub fn cp_constant(p: &HolderExponent) -> f64 {
    p.cp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp_endpoints_are_one() {
        assert_eq!(HolderExponent::new(Exponent::One).cp(), 1.0);
        assert_eq!(HolderExponent::new(Exponent::Infinity).cp(), 1.0);
    }

    #[test]
    fn cp_at_two_is_half() {
        let p = HolderExponent::new(Exponent::new(2.0).unwrap());
        assert!((p.cp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cp_at_four_matches_numeric_maximization() {
        // C_p is also lim_{λ→∞} ‖e_λ‖_p ‖e_{-λ}‖_q λ / e^λ; maximize the
        // finite-λ expression over large λ as an independent check.
        let p = 4.0;
        let q = p / (p - 1.0);
        let exact = HolderExponent::new(Exponent::new(p).unwrap()).cp();
        let mut best = 0.0f64;
        // e^{pλ} overflows past λ ≈ 177 at p = 4; stay below that.
        for i in 0..300 {
            let lambda = 20.0 + i as f64 * 0.5;
            let np = (((p * lambda).exp() - 1.0) / (p * lambda)).powf(1.0 / p);
            // ‖e_{-λ}‖_q in stable form.
            let nq = ((1.0 - (-q * lambda).exp()) / (q * lambda)).powf(1.0 / q);
            let v = np * nq * lambda / lambda.exp();
            best = best.max(v);
        }
        assert!(best.is_finite());
        assert!((best - exact).abs() < 1e-3, "{best} vs {exact}");
        assert!((exact - 0.56988).abs() < 1e-5);
    }

    #[test]
    fn conjugates() {
        let p = HolderExponent::new(Exponent::new(1.5).unwrap());
        assert_eq!(p.q().value(), 3.0);
        assert!(HolderExponent::new(Exponent::One).is_one());
        assert_eq!(
            HolderExponent::new(Exponent::One).q(),
            Exponent::Infinity
        );
    }

    #[test]
    fn parse_rational_and_inf() {
        assert_eq!(HolderExponent::parse("3/2").unwrap().p().value(), 1.5);
        assert!(HolderExponent::parse("inf").unwrap().is_infinity());
        assert_eq!(HolderExponent::parse("1").unwrap().p(), Exponent::One);
        assert!(HolderExponent::parse("0.5").is_err());
        assert!(HolderExponent::parse("3/0").is_err());
        assert!(HolderExponent::parse("nope").is_err());
    }
}
