//! Exact parameters shared by every computation.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};

/// The Jack parameter `delta = 2 / beta`, held exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalParam {
    delta: BigRational,
}

impl RationalParam {
    pub fn from_delta(delta: BigRational) -> Result<Self> {
        if !delta.is_positive() {
            return Err(domain(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn from_beta(beta: BigRational) -> Result<Self> {
        if !beta.is_positive() {
            return Err(domain(format!("beta must be positive, got {beta}")));
        }
        Self::from_delta(BigRational::from_integer(2.into()) / beta)
    }

    /// `delta = num / den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(domain("zero denominator"));
        }
        Self::from_delta(BigRational::new(num.into(), den.into()))
    }

    pub fn from_beta_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(domain("zero denominator"));
        }
        Self::from_beta(BigRational::new(num.into(), den.into()))
    }

    /// The Schur specialisation, `beta = 2`.
    pub fn schur() -> Self {
        Self {
            delta: BigRational::one(),
        }
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn beta(&self) -> BigRational {
        BigRational::from_integer(2.into()) / &self.delta
    }

    pub fn delta_f64(&self) -> f64 {
        self.delta.to_f64().unwrap_or(f64::NAN)
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta().to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_schur(&self) -> bool {
        self.delta.is_one()
    }

    /// `(numerator, denominator)` of delta, both positive and coprime.
    pub(crate) fn parts(&self) -> (&BigInt, &BigInt) {
        (self.delta.numer(), self.delta.denom())
    }
}

impl fmt::Display for RationalParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "delta={}", self.delta)
    }
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"2.5"` into an exact
/// rational. Decimals are accepted here; whether a path may use them is the
/// caller's decision.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n =
            BigInt::from_str(n.trim()).map_err(|e| domain(format!("bad numerator {n:?}: {e}")))?;
        let d = BigInt::from_str(d.trim())
            .map_err(|e| domain(format!("bad denominator {d:?}: {e}")))?;
        if d.is_zero() {
            return Err(domain("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let n = BigInt::from_str(&digits).map_err(|e| domain(format!("bad decimal {s:?}: {e}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, d));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|e| domain(format!("bad rational {s:?}: {e}")))
}

/// Box height `n`, outer order `k`, inner order `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArraySpec {
    pub n: u32,
    pub k: u32,
    pub q: u32,
}

impl ArraySpec {
    /// `k` and `q` must be at least one. `n = 0` is allowed and degenerate.
    pub fn new(n: u32, k: u32, q: u32) -> Result<Self> {
        if k == 0 || q == 0 {
            return Err(contract(format!("k and q must be >= 1 (k={k}, q={q})")));
        }
        Ok(Self { n, k, q })
    }

    /// Length of the shared centre row, `kq`.
    pub fn width(&self) -> usize {
        (self.k * self.q) as usize
    }

    /// `(kq)^2 - (k - 1)`.
    pub fn free_coordinates(&self) -> usize {
        let w = self.width();
        w * w - (self.k as usize - 1)
    }
}

impl fmt::Display for ArraySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} k={} q={}", self.n, self.k, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_delta_roundtrip() {
        let p = RationalParam::from_beta_ratio(4, 1).unwrap();
        assert_eq!(p.delta(), &BigRational::new(1.into(), 2.into()));
        assert_eq!(p.beta(), BigRational::from_integer(4.into()));
        assert!(RationalParam::from_beta_ratio(2, 1).unwrap().is_schur());
        assert!(RationalParam::from_ratio(0, 1).is_err());
        assert!(RationalParam::from_ratio(-1, 3).is_err());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(
            parse_rational("7/3").unwrap(),
            BigRational::new(7.into(), 3.into())
        );
        assert_eq!(
            parse_rational("2").unwrap(),
            BigRational::from_integer(2.into())
        );
        assert_eq!(
            parse_rational("2.5").unwrap(),
            BigRational::new(5.into(), 2.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn spec_counts() {
        let s = ArraySpec::new(3, 2, 2).unwrap();
        assert_eq!(s.width(), 4);
        assert_eq!(s.free_coordinates(), 15);
        assert!(ArraySpec::new(1, 0, 1).is_err());
    }
}
