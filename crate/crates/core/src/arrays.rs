//! The constrained interlacing-array sets `J_N(k;q)` and `I_N(k;q)` and the
//! bijection between them.
//!
//! A `J`-array is a single interlacing chain `lambda^(1) < ... < lambda^(2kq)`
//! with top row `(N^kq, 0^kq)` and row sums `|lambda^(2jq)| = Njq`. Its top
//! half is forced into triangles of `N`s and `0`s, and what remains is an
//! `I`-array: two chains meeting in the shared centre row of length `kq`.
//!
//! Both enumerators here are brute-force oracles for small instances. The
//! production sum runs as a row transfer in [`crate::mom`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::param::ArraySpec;
use crate::signature::{enumerate_box, enumerate_restrictions, interlaces_unchecked, Signature};

/// Default cap on the free-coordinate count accepted by the enumerators.
pub const DEFAULT_MAX_FREE: usize = 12;

/// Which row of an `I`-array a constraint sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowRef {
    /// `lambda^(len)`, strictly below the centre.
    Ascending(usize),
    Center,
    /// `tilde-lambda^(len)`, strictly below the centre.
    Descending(usize),
}

impl fmt::Display for RowRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowRef::Ascending(m) => write!(f, "lambda^({m})"),
            RowRef::Center => f.write_str("centre"),
            RowRef::Descending(m) => write!(f, "tilde-lambda^({m})"),
        }
    }
}

/// One of the `k - 1` sum constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstrainedRow {
    /// Row index along the unfolded chain, `1..2kq`; always `2jq`.
    pub path: usize,
    pub row: RowRef,
    /// Row length.
    pub len: usize,
    /// The row must sum to `N * half_len` where `half_len = len / 2`.
    pub half_len: usize,
}

impl ConstrainedRow {
    pub fn target(&self, n: u32) -> u64 {
        u64::from(n) * self.half_len as u64
    }
}

/// The sum constraints of `I_N(k;q)`, ordered along the unfolded chain.
/// A constraint landing on the centre row is listed once.
pub fn constraint_table(k: u32, q: u32) -> Vec<ConstrainedRow> {
    let kq = (k * q) as usize;
    (1..k as usize)
        .map(|j| {
            let path = 2 * j * q as usize;
            let (row, len) = if path < kq {
                (RowRef::Ascending(path), path)
            } else if path == kq {
                (RowRef::Center, kq)
            } else {
                (RowRef::Descending(2 * kq - path), 2 * kq - path)
            };
            ConstrainedRow {
                path,
                row,
                len,
                half_len: len / 2,
            }
        })
        .collect()
}

/// Row length at path position `p` (1-based) of the unfolded `I`-array.
pub(crate) fn path_len(kq: usize, p: usize) -> usize {
    p.min(2 * kq - p)
}

/// Target sum of the row at path position `p`, if it is constrained.
pub(crate) fn path_target(spec: &ArraySpec, p: usize) -> Option<u64> {
    let two_q = 2 * spec.q as usize;
    if p.is_multiple_of(two_q) && p < 2 * spec.width() {
        let len = path_len(spec.width(), p);
        Some(u64::from(spec.n) * (len / 2) as u64)
    } else {
        None
    }
}

/// An element of `J_N(k;q)`: `rows[i - 1] = lambda^(i)` for `i = 1..=2kq`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JArray {
    pub rows: Vec<Signature>,
}

impl JArray {
    pub fn validate(&self, spec: &ArraySpec) -> Result<()> {
        let kq = spec.width();
        if self.rows.len() != 2 * kq {
            return Err(contract(format!(
                "J-array needs {} rows, got {}",
                2 * kq,
                self.rows.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(contract(format!("row {} has length {}", i + 1, row.len())));
            }
        }
        for w in self.rows.windows(2) {
            if !interlaces_unchecked(w[0].parts(), w[1].parts()) {
                return Err(contract(format!("{} does not interlace {}", w[0], w[1])));
            }
        }
        if self.rows[2 * kq - 1] != Signature::step(spec.n, kq, kq) {
            return Err(contract(format!(
                "top row must be (N^kq, 0^kq), got {}",
                self.rows[2 * kq - 1]
            )));
        }
        for j in 1..spec.k as usize {
            let i = 2 * j * spec.q as usize;
            let want = u64::from(spec.n) * (j * spec.q as usize) as u64;
            if self.rows[i - 1].size() != want {
                return Err(contract(format!(
                    "|lambda^({i})| = {} but must be {want}",
                    self.rows[i - 1].size()
                )));
            }
        }
        Ok(())
    }
}

/// An element of `I_N(k;q)`.
///
/// `ascending[m - 1] = lambda^(m)` for `m = 1..=kq` (the last entry is the
/// centre row) and `descending[m - 1] = tilde-lambda^(m)` for `m = 1..kq`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IArray {
    pub ascending: Vec<Signature>,
    pub descending: Vec<Signature>,
}

impl IArray {
    pub fn center(&self) -> &Signature {
        self.ascending.last().expect("I-array has a centre row")
    }

    pub fn row(&self, r: RowRef) -> &Signature {
        match r {
            RowRef::Ascending(m) => &self.ascending[m - 1],
            RowRef::Center => self.center(),
            RowRef::Descending(m) => &self.descending[m - 1],
        }
    }

    /// Checks the invariants of `I_N(k;q)` directly from the definition.
    pub fn validate(&self, spec: &ArraySpec) -> Result<()> {
        let kq = spec.width();
        if self.ascending.len() != kq || self.descending.len() + 1 != kq {
            return Err(contract("I-array has the wrong number of rows"));
        }
        let sides = [&self.ascending[..], &self.descending[..]];
        for side in sides {
            for (i, row) in side.iter().enumerate() {
                if row.len() != i + 1 {
                    return Err(contract(format!(
                        "row of length {} in slot {}",
                        row.len(),
                        i + 1
                    )));
                }
                if row.max_part() > spec.n {
                    return Err(contract(format!("{row} leaves the box [0, {}]", spec.n)));
                }
            }
        }
        let center = self.center();
        let chain = |rows: &[Signature]| -> bool {
            rows.windows(2)
                .all(|w| interlaces_unchecked(w[0].parts(), w[1].parts()))
        };
        if !chain(&self.ascending) {
            return Err(contract("ascending rows do not interlace"));
        }
        if !chain(&self.descending)
            || self
                .descending
                .last()
                .is_some_and(|last| !interlaces_unchecked(last.parts(), center.parts()))
        {
            return Err(contract("descending rows do not interlace"));
        }
        for c in constraint_table(spec.k, spec.q) {
            let got = self.row(c.row).size();
            if got != c.target(spec.n) {
                return Err(contract(format!(
                    "{} sums to {got}, needs {}",
                    c.row,
                    c.target(spec.n)
                )));
            }
        }
        Ok(())
    }
}

/// The bijection `J_N(k;q) -> I_N(k;q)`.
pub fn bijection_s(j: &JArray, spec: &ArraySpec) -> Result<IArray> {
    j.validate(spec)?;
    let kq = spec.width();
    let ascending = j.rows[..kq].to_vec();
    let mut descending = vec![Signature::empty(); kq - 1];
    for i in kq + 1..2 * kq {
        let parts = j.rows[i - 1].parts()[i - kq..kq].to_vec();
        descending[2 * kq - i - 1] = Signature::from_sorted(parts);
    }
    Ok(IArray {
        ascending,
        descending,
    })
}

/// Inverse of [`bijection_s`]: refills the triangles of `N`s and `0`s.
pub fn bijection_s_inv(a: &IArray, spec: &ArraySpec) -> Result<JArray> {
    a.validate(spec)?;
    let kq = spec.width();
    let mut rows = a.ascending.clone();
    for i in kq + 1..=2 * kq {
        let pad = i - kq;
        let mut parts = vec![spec.n; pad];
        if i < 2 * kq {
            parts.extend_from_slice(a.descending[2 * kq - i - 1].parts());
        }
        parts.resize(i, 0);
        rows.push(Signature::from_sorted(parts));
    }
    Ok(JArray { rows })
}

fn guard(spec: &ArraySpec, max_free: usize) -> Result<()> {
    let free = spec.free_coordinates();
    if free > max_free {
        return Err(Error::Resource {
            what: format!("enumeration over {free} free coordinates"),
            limit: max_free,
            reached: free,
            hint: Some("use the row-transfer DP engine".into()),
        });
    }
    Ok(())
}

/// All chains hanging below `top`, visiting rows of lengths `top.len() - 1`
/// down to `1`. `target(len)` gives the sum constraint of a row. Rows are
/// returned shortest first.
fn chains_below(
    top: &Signature,
    target: &dyn Fn(usize) -> Option<u64>,
    out: &mut Vec<Vec<Signature>>,
) {
    fn rec(
        row: &Signature,
        target: &dyn Fn(usize) -> Option<u64>,
        stack: &mut Vec<Signature>,
        out: &mut Vec<Vec<Signature>>,
    ) {
        if row.len() == 1 {
            let mut chain = stack.clone();
            chain.reverse();
            out.push(chain);
            return;
        }
        for mu in enumerate_restrictions(row, target(row.len() - 1)) {
            stack.push(mu.clone());
            rec(&mu, target, stack, out);
            stack.pop();
        }
    }
    let mut stack = Vec::new();
    rec(top, target, &mut stack, out);
}

/// Every element of `I_N(k;q)`, centre row first and then each side top-down,
/// in lexicographically decreasing order. Refuses above `max_free` free
/// coordinates.
pub fn enumerate_i(spec: &ArraySpec, max_free: usize) -> Result<std::vec::IntoIter<IArray>> {
    guard(spec, max_free)?;
    let kq = spec.width();
    let table = constraint_table(spec.k, spec.q);
    let center_target = table
        .iter()
        .find(|c| c.row == RowRef::Center)
        .map(|c| c.target(spec.n));
    let asc_target = |len: usize| {
        table
            .iter()
            .find(|c| c.row == RowRef::Ascending(len))
            .map(|c| c.target(spec.n))
    };
    let desc_target = |len: usize| {
        table
            .iter()
            .find(|c| c.row == RowRef::Descending(len))
            .map(|c| c.target(spec.n))
    };
    let mut out = Vec::new();
    for center in enumerate_box(kq, spec.n, center_target) {
        let mut asc = Vec::new();
        chains_below(&center, &asc_target, &mut asc);
        if asc.is_empty() {
            continue;
        }
        let mut desc = Vec::new();
        chains_below(&center, &desc_target, &mut desc);
        for a in &asc {
            for d in &desc {
                let mut ascending = a.clone();
                ascending.push(center.clone());
                out.push(IArray {
                    ascending,
                    descending: d.clone(),
                });
            }
        }
    }
    Ok(out.into_iter())
}

/// Every element of `J_N(k;q)`, top row down.
pub fn enumerate_j(spec: &ArraySpec, max_free: usize) -> Result<std::vec::IntoIter<JArray>> {
    guard(spec, max_free)?;
    let kq = spec.width();
    let top = Signature::step(spec.n, kq, kq);
    let two_q = 2 * spec.q as usize;
    let target = |len: usize| {
        (len.is_multiple_of(two_q) && len < 2 * kq).then(|| u64::from(spec.n) * (len / 2) as u64)
    };
    let mut chains = Vec::new();
    chains_below(&top, &target, &mut chains);
    Ok(chains
        .into_iter()
        .map(|mut rows| {
            rows.push(top.clone());
            JArray { rows }
        })
        .collect::<Vec<_>>()
        .into_iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn spec(n: u32, k: u32, q: u32) -> ArraySpec {
        ArraySpec::new(n, k, q).unwrap()
    }

    #[test]
    fn constraint_counts() {
        for k in 1..=5 {
            for q in 1..=3 {
                let t = constraint_table(k, q);
                assert_eq!(t.len(), k as usize - 1);
                let centers = t.iter().filter(|c| c.row == RowRef::Center).count();
                assert_eq!(centers, usize::from(k % 2 == 0));
            }
        }
        let t = constraint_table(4, 1);
        assert_eq!(
            t.iter().map(|c| c.row).collect::<Vec<_>>(),
            vec![RowRef::Ascending(2), RowRef::Center, RowRef::Descending(2)]
        );
        let t = constraint_table(3, 2);
        assert_eq!(
            t.iter().map(|c| c.row).collect::<Vec<_>>(),
            vec![RowRef::Ascending(4), RowRef::Descending(4)]
        );
        assert!(t.iter().all(|c| c.half_len == 2));
    }

    #[test]
    fn i_small_counts() {
        let one: Vec<_> = enumerate_i(&spec(1, 1, 1), 12).unwrap().collect();
        assert_eq!(one.len(), 2);
        let centers: HashSet<_> = one.iter().map(|a| a.center().clone()).collect();
        assert_eq!(centers.len(), 2);
        assert_eq!(enumerate_i(&spec(2, 2, 1), 12).unwrap().count(), 10);
        let zero: Vec<_> = enumerate_i(&spec(0, 2, 2), 16).unwrap().collect();
        assert_eq!(zero.len(), 1);
        assert!(zero[0]
            .ascending
            .iter()
            .chain(&zero[0].descending)
            .all(|r| r.max_part() == 0));
    }

    #[test]
    fn guard_refuses_large_instances() {
        let err = enumerate_i(&spec(3, 2, 2), 12).unwrap_err();
        assert!(matches!(err, Error::Resource { reached: 15, .. }), "{err}");
        assert!(enumerate_j(&spec(3, 2, 2), 12).is_err());
    }

    #[test]
    fn enumerated_arrays_are_valid() {
        for &(k, q) in &[(1, 1), (2, 1), (1, 2), (3, 1), (2, 2)] {
            for n in 0..=2 {
                let s = spec(n, k, q);
                for a in enumerate_i(&s, 16).unwrap() {
                    a.validate(&s).unwrap();
                }
                for j in enumerate_j(&s, 16).unwrap() {
                    j.validate(&s).unwrap();
                }
            }
        }
    }

    #[test]
    fn bijection_on_trivial_case() {
        let s = spec(1, 1, 1);
        for m in 0..=1 {
            let j = JArray {
                rows: vec![Signature::new(vec![m]).unwrap(), Signature::step(1, 1, 1)],
            };
            let a = bijection_s(&j, &s).unwrap();
            assert_eq!(a.ascending, vec![Signature::new(vec![m]).unwrap()]);
            assert!(a.descending.is_empty());
            assert_eq!(bijection_s_inv(&a, &s).unwrap(), j);
        }
    }

    #[test]
    fn bijection_is_a_bijection() {
        for &(k, q) in &[(1, 1), (2, 1), (1, 2), (3, 1), (2, 2)] {
            for n in 0..=3 {
                let s = spec(n, k, q);
                if s.width() > 2 && n > 2 {
                    continue;
                }
                let js: Vec<_> = enumerate_j(&s, 16).unwrap().collect();
                let is: HashSet<_> = enumerate_i(&s, 16).unwrap().collect();
                let mut image = HashSet::new();
                for j in &js {
                    let a = bijection_s(j, &s).unwrap();
                    a.validate(&s).unwrap();
                    assert!(is.contains(&a));
                    assert_eq!(&bijection_s_inv(&a, &s).unwrap(), j);
                    assert!(image.insert(a), "not injective");
                }
                assert_eq!(image.len(), is.len(), "{s}");
            }
        }
    }

    #[test]
    fn validator_catches_violations() {
        let s = spec(2, 2, 1);
        let good = enumerate_i(&s, 12).unwrap().next().unwrap();
        good.validate(&s).unwrap();
        let mut bad = good.clone();
        bad.ascending[1] = Signature::new(vec![2, 1]).unwrap();
        assert!(bad.validate(&s).is_err());
        let mut bad = good;
        bad.ascending[0] = Signature::new(vec![3]).unwrap();
        assert!(bad.validate(&s).is_err());
    }
}
