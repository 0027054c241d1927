//! Signatures and interlacing.
//!
//! A signature is a weakly decreasing tuple of nonnegative integers, one row
//! of a discrete interlacing array. `mu` (length `M`) interlaces `lambda`
//! (length `M + 1`), written `mu < lambda`, when
//! `lambda_1 >= mu_1 >= lambda_2 >= ... >= mu_M >= lambda_{M+1}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(Vec<u32>);

impl Signature {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(contract(format!(
                "signature not weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    /// Builds without checking the ordering. Callers guarantee it.
    pub(crate) fn from_sorted(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]), "{parts:?}");
        Self(parts)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `(n, ..., n, 0, ..., 0)` with `high` copies of `n` followed by `low` zeros.
    pub fn step(n: u32, high: usize, low: usize) -> Self {
        let mut parts = vec![n; high];
        parts.resize(high + low, 0);
        Self(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|lambda|`.
    pub fn size(&self) -> u64 {
        self.0.iter().map(|&p| u64::from(p)).sum()
    }

    pub fn max_part(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn into_parts(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

impl TryFrom<Vec<u32>> for Signature {
    type Error = crate::Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Self::new(parts)
    }
}

/// `mu < lambda`. Errors when `lambda` is not exactly one longer than `mu`.
pub fn interlaces(mu: &Signature, lambda: &Signature) -> Result<bool> {
    if lambda.len() != mu.len() + 1 {
        return Err(contract(format!(
            "interlacing needs len(lambda) = len(mu) + 1, got {} and {}",
            mu.len(),
            lambda.len()
        )));
    }
    Ok(interlaces_unchecked(mu.parts(), lambda.parts()))
}

pub(crate) fn interlaces_unchecked(mu: &[u32], lambda: &[u32]) -> bool {
    mu.iter()
        .enumerate()
        .all(|(i, &m)| lambda[i] >= m && m >= lambda[i + 1])
}

/// `e_N(lambda) = (N, lambda_1, ..., lambda_M, 0)`, with `e_N(()) = (N, 0)`.
pub fn extend_n(lambda: &Signature, n: u32) -> Result<Signature> {
    if lambda.max_part() > n {
        return Err(domain(format!(
            "part {} of {lambda} exceeds N={n}",
            lambda.max_part()
        )));
    }
    let mut parts = Vec::with_capacity(lambda.len() + 2);
    parts.push(n);
    parts.extend_from_slice(lambda.parts());
    parts.push(0);
    Ok(Signature(parts))
}

/// Lazily enumerates signatures whose coordinate `i` lies in `[lo[i], hi[i]]`,
/// optionally with a prescribed total, in decreasing lexicographic order.
///
/// Weak decrease is enforced by capping each coordinate at its predecessor,
/// so the bounds need not be ordered themselves. Partial rows are pruned when
/// the target is out of reach of the remaining coordinates.
#[derive(Clone, Debug)]
pub struct SignatureRange {
    lo: Vec<u32>,
    hi: Vec<u32>,
    target: Option<u64>,
    suffix_lo: Vec<u64>,
    cur: Vec<u32>,
    prefix: Vec<u64>,
    next_val: Vec<Option<u32>>,
    depth: usize,
    state: RangeState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RangeState {
    Fresh,
    Running,
    Done,
}

impl SignatureRange {
    pub fn new(lo: Vec<u32>, hi: Vec<u32>, target: Option<u64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        let len = lo.len();
        let mut suffix_lo = vec![0u64; len + 1];
        for i in (0..len).rev() {
            suffix_lo[i] = suffix_lo[i + 1] + u64::from(lo[i]);
        }
        Self {
            lo,
            hi,
            target,
            suffix_lo,
            cur: vec![0; len],
            prefix: vec![0; len + 1],
            next_val: vec![None; len],
            depth: 0,
            state: RangeState::Fresh,
        }
    }

    fn top(&self, i: usize) -> u32 {
        let cap = if i > 0 { self.cur[i - 1] } else { u32::MAX };
        self.hi[i].min(cap)
    }

    /// Largest sum still reachable when coordinate `i` takes value `v`.
    fn max_reach(&self, i: usize, v: u32) -> u64 {
        let rest: u64 = self.hi[i + 1..].iter().map(|&h| u64::from(h.min(v))).sum();
        self.prefix[i] + u64::from(v) + rest
    }
}

impl Iterator for SignatureRange {
    type Item = Signature;

    fn next(&mut self) -> Option<Signature> {
        let len = self.lo.len();
        match self.state {
            RangeState::Done => return None,
            RangeState::Fresh => {
                if len == 0 {
                    self.state = RangeState::Done;
                    return match self.target {
                        Some(t) if t != 0 => None,
                        _ => Some(Signature::empty()),
                    };
                }
                self.state = RangeState::Running;
                self.depth = 0;
                self.next_val[0] = Some(self.top(0));
            }
            RangeState::Running => {}
        }
        loop {
            let i = self.depth;
            let Some(v) = self.next_val[i] else {
                if i == 0 {
                    self.state = RangeState::Done;
                    return None;
                }
                self.depth -= 1;
                continue;
            };
            if v < self.lo[i] {
                self.next_val[i] = None;
                continue;
            }
            if let Some(t) = self.target {
                // Smaller values only shrink the reachable maximum.
                if self.max_reach(i, v) < t {
                    self.next_val[i] = None;
                    continue;
                }
            }
            self.next_val[i] = if v > self.lo[i] { Some(v - 1) } else { None };
            if let Some(t) = self.target {
                if self.prefix[i] + u64::from(v) + self.suffix_lo[i + 1] > t {
                    continue;
                }
            }
            self.cur[i] = v;
            self.prefix[i + 1] = self.prefix[i] + u64::from(v);
            if i + 1 == len {
                return Some(Signature(self.cur.clone()));
            }
            self.depth = i + 1;
            self.next_val[i + 1] = Some(self.top(i + 1));
        }
    }
}

/// Every `lambda` of length `M + 1` with `mu < lambda`, parts at most `n`,
/// and `|lambda| = sum_target` when given.
pub fn enumerate_extensions(mu: &Signature, n: u32, sum_target: Option<u64>) -> SignatureRange {
    let m = mu.parts();
    let len = m.len() + 1;
    let mut lo = Vec::with_capacity(len);
    let mut hi = Vec::with_capacity(len);
    for i in 0..len {
        lo.push(if i < m.len() { m[i] } else { 0 });
        hi.push(if i == 0 { n } else { m[i - 1] });
    }
    SignatureRange::new(lo, hi, sum_target)
}

/// Every `mu` of length `M - 1` with `mu < lambda` (and the given total).
/// `lambda` must be nonempty.
pub fn enumerate_restrictions(lambda: &Signature, sum_target: Option<u64>) -> SignatureRange {
    let l = lambda.parts();
    assert!(!l.is_empty(), "the empty signature has no restrictions");
    let len = l.len() - 1;
    let lo = l[1..].to_vec();
    let hi = l[..len].to_vec();
    SignatureRange::new(lo, hi, sum_target)
}

/// Every signature of length `len` with parts in `[0, n]`.
pub fn enumerate_box(len: usize, n: u32, sum_target: Option<u64>) -> SignatureRange {
    SignatureRange::new(vec![0; len], vec![n; len], sum_target)
}
