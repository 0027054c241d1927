//! The set `A(k;q)` of `beta` for which the leading coefficient is finite.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A subinterval of `(0, inf)`. `hi = None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: Option<f64>,
    pub hi_closed: bool,
}

impl Interval {
    fn open(lo: f64, hi: Option<f64>) -> Self {
        Self {
            lo,
            lo_closed: false,
            hi,
            hi_closed: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = match self.hi {
            None => true,
            Some(h) if self.hi_closed => x <= h,
            Some(h) => x < h,
        };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        write!(f, "{open}{},", self.lo)?;
        match self.hi {
            None => write!(f, "inf)"),
            Some(h) => write!(f, "{h}{}", if self.hi_closed { ']' } else { ')' }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinitenessStatus {
    Finite,
    Infinite,
    /// Not proven either way; expected finite.
    UnknownConjecturedFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitenessReport {
    pub k: u32,
    pub q: u32,
    pub known_finite: Interval,
    pub known_infinite: Option<Interval>,
    pub conjectured_finite: Option<Interval>,
    pub beta: Option<f64>,
    pub status: Option<FinitenessStatus>,
}

impl FinitenessReport {
    /// Short statement of what is known about `A(k;q)`.
    pub fn label(&self) -> String {
        let (k, q) = (self.k, self.q);
        match (k, self.known_infinite) {
            (1, _) => format!("A(1;{q})=(0,inf)"),
            (2, _) => format!("A(2;{q})=(0,{})", 4 * q * q),
            (_, Some(inf)) => format!(
                "(0,2] in A({k};{q}) and [{},inf) disjoint from A({k};{q})",
                inf.lo
            ),
            _ => format!("A({k};{q})"),
        }
    }
}

impl fmt::Display for FinitenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())?;
        if let (Some(b), Some(s)) = (self.beta, self.status) {
            write!(f, "; beta={b} is {s:?}")?;
        }
        Ok(())
    }
}

/// What is known about finiteness of `c^(beta)(k;q)`, optionally classifying
/// one `beta`.
pub fn finiteness_domain(k: u32, q: u32, beta: Option<f64>) -> FinitenessReport {
    let kq2 = f64::from(k) * f64::from(q) * f64::from(q);
    let (known_finite, known_infinite, conjectured_finite) = match k {
        0 | 1 => (Interval::open(0.0, None), None, None),
        2 => {
            let t = 4.0 * f64::from(q) * f64::from(q);
            (
                Interval::open(0.0, Some(t)),
                Some(Interval {
                    lo: t,
                    lo_closed: true,
                    hi: None,
                    hi_closed: false,
                }),
                None,
            )
        }
        _ => {
            let t = 2.0 * kq2;
            (
                Interval {
                    lo: 0.0,
                    lo_closed: false,
                    hi: Some(2.0),
                    hi_closed: true,
                },
                Some(Interval {
                    lo: t,
                    lo_closed: true,
                    hi: None,
                    hi_closed: false,
                }),
                Some(Interval {
                    lo: 2.0,
                    lo_closed: false,
                    hi: Some(t),
                    hi_closed: false,
                }),
            )
        }
    };
    let status = beta.map(|b| {
        if known_finite.contains(b) {
            FinitenessStatus::Finite
        } else if known_infinite.is_some_and(|i| i.contains(b)) {
            FinitenessStatus::Infinite
        } else {
            FinitenessStatus::UnknownConjecturedFinite
        }
    });
    FinitenessReport {
        k,
        q,
        known_finite,
        known_infinite,
        conjectured_finite,
        beta,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table() {
        assert_eq!(
            finiteness_domain(1, 5, Some(100.0)).status,
            Some(FinitenessStatus::Finite)
        );
        assert_eq!(
            finiteness_domain(2, 1, Some(4.0)).status,
            Some(FinitenessStatus::Infinite)
        );
        assert_eq!(
            finiteness_domain(2, 1, Some(3.999)).status,
            Some(FinitenessStatus::Finite)
        );
        assert_eq!(
            finiteness_domain(3, 1, Some(3.0)).status,
            Some(FinitenessStatus::UnknownConjecturedFinite)
        );
        assert_eq!(
            finiteness_domain(3, 1, Some(2.0)).status,
            Some(FinitenessStatus::Finite)
        );
        assert_eq!(
            finiteness_domain(3, 1, Some(6.0)).status,
            Some(FinitenessStatus::Infinite)
        );
        assert_eq!(
            finiteness_domain(4, 2, Some(31.9)).status,
            Some(FinitenessStatus::UnknownConjecturedFinite)
        );
        assert_eq!(
            finiteness_domain(4, 2, Some(32.0)).status,
            Some(FinitenessStatus::Infinite)
        );
    }

    #[test]
    fn labels() {
        assert_eq!(finiteness_domain(2, 1, None).label(), "A(2;1)=(0,4)");
        assert_eq!(finiteness_domain(1, 3, None).label(), "A(1;3)=(0,inf)");
        assert!(finiteness_domain(3, 1, None).label().contains("[6,inf)"));
        assert_eq!(
            finiteness_domain(3, 1, None).known_finite.to_string(),
            "(0,2]"
        );
    }
}
