//! Power counting for the singularities of the coefficient integrand at
//! points whose coordinates sit at `0` or `1`.
//!
//! Orders are affine in `1/beta` and are kept as exact rationals
//! `a + b / beta`. The integral near a point diverges once the order reaches
//! the dimension of the restricted integral, which gives the threshold
//! `beta = b / (dim - a)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};

/// A point at which the integrand may be singular.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularPoint {
    /// Values on the free coordinates of the unfolded array. `rows[p - 1]`
    /// holds row `p` (`1 <= p < 2kq`) at its free indices
    /// `max(1, p-kq+1) ..= min(p, kq)`; `None` leaves a coordinate off the
    /// point.
    Array {
        k: u32,
        q: u32,
        rows: Vec<Vec<Option<u8>>>,
    },
    /// Values on the single joined row of length `2q`, sum `q`, of the
    /// reduced `k = 2` integral.
    Row { q: u32, values: Vec<u8> },
}

fn free_range(kq: usize, p: usize) -> (usize, usize) {
    ((p + 1).saturating_sub(kq).max(1), p.min(kq))
}

impl SingularPoint {
    /// The point where `q` coordinates of the joined row sit at `1` and `q`
    /// at `0`.
    pub fn star(q: u32) -> Self {
        let mut values = vec![1u8; q as usize];
        values.extend(std::iter::repeat_n(0, q as usize));
        SingularPoint::Row { q, values }
    }

    /// The point with `k` diamonds of `q^2` coordinates left free, one per
    /// block of `2q` rows, sum-constrained rows of the unfolded array set to
    /// `(1^{jq}, 0^{jq})`, and every other coordinate forced to `0` or `1`
    /// by interlacing.
    pub fn extremal(k: u32, q: u32) -> Result<Self> {
        if k == 0 || q == 0 {
            return Err(contract("k and q must be at least 1"));
        }
        let kq = (k * q) as usize;
        let qs = q as usize;
        let rows_n = 2 * kq;
        // Bounds on the full unfolded rows 1..=2kq, 1-based coordinates.
        let mut lo = vec![vec![0u8; rows_n + 2]; rows_n + 1];
        let mut hi = vec![vec![1u8; rows_n + 2]; rows_n + 1];
        let mut removed = vec![vec![false; rows_n + 2]; rows_n + 1];
        for p in 1..=rows_n {
            let (a, b) = free_range(kq, p);
            for i in 1..=p {
                let fixed = if p == rows_n {
                    Some(u8::from(i <= kq))
                } else if i < a {
                    Some(1)
                } else if i > b {
                    Some(0)
                } else {
                    None
                };
                if let Some(v) = fixed {
                    lo[p][i] = v;
                    hi[p][i] = v;
                }
            }
        }
        for j in 1..k as usize {
            let p = 2 * j * qs;
            for i in 1..=p {
                let v = u8::from(i <= j * qs);
                lo[p][i] = lo[p][i].max(v);
                hi[p][i] = hi[p][i].min(v);
            }
        }
        for d in 0..k as usize {
            let (p0, c0) = (2 * d * qs + 1, d * qs + 1);
            for a in 0..qs {
                for b in 0..qs {
                    removed[p0 + a + b][c0 + b] = true;
                }
            }
        }
        // Propagate lambda^(p+1)_i >= lambda^(p)_i >= lambda^(p+1)_{i+1}.
        let mut changed = true;
        while changed {
            changed = false;
            for p in 1..rows_n {
                for i in 1..=p {
                    let mut l = lo[p][i].max(lo[p + 1][i + 1]);
                    let mut h = hi[p][i].min(hi[p + 1][i]);
                    if i < p {
                        l = l.max(lo[p - 1][i]);
                    }
                    if i > 1 {
                        h = h.min(hi[p - 1][i - 1]);
                    }
                    if (l, h) != (lo[p][i], hi[p][i]) {
                        lo[p][i] = l;
                        hi[p][i] = h;
                        changed = true;
                    }
                    if l > h {
                        return Err(domain(format!(
                            "no consistent point: row {p}, coordinate {i}"
                        )));
                    }
                }
            }
        }
        let mut rows = Vec::with_capacity(rows_n - 1);
        for p in 1..rows_n {
            let (a, b) = free_range(kq, p);
            let mut row = Vec::with_capacity(b + 1 - a);
            for i in a..=b {
                if removed[p][i] {
                    row.push(None);
                } else if lo[p][i] == hi[p][i] {
                    row.push(Some(lo[p][i]));
                } else {
                    return Err(domain(format!("coordinate {i} of row {p} is not forced")));
                }
            }
            rows.push(row);
        }
        Ok(SingularPoint::Array { k, q, rows })
    }

    /// Checks shape, values, interlacing between assigned coordinates
    /// (including the fixed `1`s and `0`s of the unfolded array) and the sum
    /// of every fully assigned constrained row.
    pub fn validate(&self) -> Result<()> {
        match self {
            SingularPoint::Row { q, values } => {
                if values.len() != 2 * *q as usize || values.iter().any(|&v| v > 1) {
                    return Err(domain("row point needs 2q values in {0, 1}"));
                }
                if !values.windows(2).all(|w| w[0] >= w[1]) {
                    return Err(domain("row point must be decreasing"));
                }
                if values.iter().map(|&v| u32::from(v)).sum::<u32>() != *q {
                    return Err(domain("row point must sum to q"));
                }
                Ok(())
            }
            SingularPoint::Array { k, q, rows } => {
                let kq = (k * q) as usize;
                if *k == 0 || *q == 0 || rows.len() != 2 * kq - 1 {
                    return Err(domain("array point needs 2kq - 1 rows"));
                }
                let full = |p: usize| -> Result<Vec<Option<u8>>> {
                    if p == 2 * kq {
                        return Ok((1..=p).map(|i| Some(u8::from(i <= kq))).collect());
                    }
                    let (a, b) = free_range(kq, p);
                    let row = &rows[p - 1];
                    if row.len() != b + 1 - a || row.iter().flatten().any(|&v| v > 1) {
                        return Err(domain(format!(
                            "row {p} needs {} values in {{0, 1}}",
                            b + 1 - a
                        )));
                    }
                    Ok((1..=p)
                        .map(|i| {
                            if i < a {
                                Some(1)
                            } else if i > b {
                                Some(0)
                            } else {
                                row[i - a]
                            }
                        })
                        .collect())
                };
                for p in 1..2 * kq {
                    let (y, x) = (full(p)?, full(p + 1)?);
                    for i in 0..p {
                        let above = matches!((x[i], y[i]), (Some(u), Some(v)) if u < v);
                        let below = matches!((y[i], x[i + 1]), (Some(u), Some(v)) if u < v);
                        if above || below {
                            return Err(domain(format!("rows {p} and {} do not interlace", p + 1)));
                        }
                    }
                    for (i, v) in y.iter().enumerate().skip(1) {
                        if matches!((y[i - 1], v), (Some(u), Some(w)) if u < *w) {
                            return Err(domain(format!("row {p} is not decreasing")));
                        }
                    }
                }
                for j in 1..*k as usize {
                    let p = 2 * j * *q as usize;
                    let row = full(p)?;
                    if row.iter().all(Option::is_some) {
                        let s: usize = row.iter().flatten().map(|&v| usize::from(v)).sum();
                        if s != j * *q as usize {
                            return Err(domain(format!("row {p} must sum to {}", j * *q as usize)));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Dimension of the integral restricted to the assigned coordinates:
    /// their count less one per fully assigned constrained row.
    pub fn dimension(&self) -> usize {
        match self {
            SingularPoint::Row { values, .. } => values.len() - 1,
            SingularPoint::Array { k, q, rows } => {
                let assigned: usize = rows.iter().map(|r| r.iter().flatten().count()).sum();
                let constrained = (1..*k as usize)
                    .filter(|j| rows[2 * j * *q as usize - 1].iter().all(Option::is_some))
                    .count();
                assigned - constrained
            }
        }
    }
}

/// `a + b / beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularOrder {
    pub a: BigRational,
    pub b: BigRational,
}

impl SingularOrder {
    /// `n (1 - 2/beta)`.
    pub fn unit_multiple(n: i64) -> Self {
        Self {
            a: BigRational::from_integer(n.into()),
            b: BigRational::from_integer((-2 * n).into()),
        }
    }

    pub fn at(&self, beta: &BigRational) -> Result<BigRational> {
        if !beta.is_positive() {
            return Err(contract("beta must be positive"));
        }
        Ok(&self.a + &self.b / beta)
    }

    /// The `beta` at which the order equals `dim`, if positive.
    pub fn threshold(&self, dim: usize) -> Option<BigRational> {
        let gap = BigRational::from_integer(BigInt::from(dim)) - &self.a;
        if gap.is_zero() {
            return None;
        }
        let beta = &self.b / gap;
        beta.is_positive().then_some(beta)
    }
}

impl fmt::Display for SingularOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let two = BigRational::from_integer(2.into());
        if self.b == -(&self.a * &two) {
            return write!(f, "{}(1-2/beta)", self.a);
        }
        if self.b.is_negative() {
            write!(f, "{} - {}/beta", self.a, -&self.b)
        } else {
            write!(f, "{} + {}/beta", self.a, self.b)
        }
    }
}

/// The order of the singularity at `point`: each assigned centre-row
/// coordinate and each coinciding pair on consecutive rows adds
/// `1 - 2/beta`, and each coinciding pair within a row subtracts twice that.
/// On the reduced row, each coordinate adds `1 - 2/beta` and each
/// coinciding pair subtracts `4/beta`.
pub fn singularity_order(point: &SingularPoint) -> Result<SingularOrder> {
    point.validate()?;
    let pairs_in = |row: &[Option<u8>]| -> i64 {
        let mut n = 0;
        for i in 0..row.len() {
            for j in i + 1..row.len() {
                n += i64::from(matches!((row[i], row[j]), (Some(u), Some(v)) if u == v));
            }
        }
        n
    };
    match point {
        SingularPoint::Row { values, .. } => {
            let row: Vec<Option<u8>> = values.iter().map(|&v| Some(v)).collect();
            let n = values.len() as i64;
            let mut order = SingularOrder::unit_multiple(n);
            order.b -= BigRational::from_integer((4 * pairs_in(&row)).into());
            Ok(order)
        }
        SingularPoint::Array { k, q, rows } => {
            let kq = (k * q) as usize;
            let blue = rows[kq - 1].iter().flatten().count() as i64;
            let mut solid = 0i64;
            for pair in rows.windows(2) {
                for u in pair[0].iter().flatten() {
                    solid += pair[1].iter().flatten().filter(|v| *v == u).count() as i64;
                }
            }
            let dashed: i64 = rows.iter().map(|r| pairs_in(r)).sum();
            Ok(SingularOrder::unit_multiple(blue + solid - 2 * dashed))
        }
    }
}

/// Order at `point` evaluated at `beta`.
pub fn singularity_order_at(point: &SingularPoint, beta: &BigRational) -> Result<BigRational> {
    singularity_order(point)?.at(beta)
}

/// `1 - 2/beta` as a convenience for callers comparing against multiples.
pub fn unit_order(beta: &BigRational) -> BigRational {
    BigRational::one() - BigRational::from_integer(2.into()) / beta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn stated_orders() {
        let three = singularity_order(&SingularPoint::extremal(3, 1).unwrap()).unwrap();
        assert_eq!(three, SingularOrder::unit_multiple(6));
        let four = singularity_order(&SingularPoint::extremal(4, 1).unwrap()).unwrap();
        assert_eq!(four, SingularOrder::unit_multiple(12));
        for q in 1..=4i64 {
            let star = singularity_order(&SingularPoint::star(q as u32)).unwrap();
            assert_eq!(star.a, r(2 * q, 1));
            assert_eq!(star.b, r(-4 * q * q, 1));
        }
        for k in 2..=5u32 {
            for q in 1..=3u32 {
                let p = SingularPoint::extremal(k, q).unwrap();
                let n = i64::from(k * q * q * (k - 1));
                assert_eq!(
                    singularity_order(&p).unwrap(),
                    SingularOrder::unit_multiple(n),
                    "k={k} q={q}"
                );
                assert_eq!(p.dimension() as u32, (k * q * q - 1) * (k - 1));
            }
        }
    }

    #[test]
    fn thresholds() {
        for q in 1..=4u32 {
            let p = SingularPoint::star(q);
            let t = singularity_order(&p)
                .unwrap()
                .threshold(p.dimension())
                .unwrap();
            assert_eq!(t, r(i64::from(4 * q * q), 1));
        }
        for k in 2..=5u32 {
            for q in 1..=3u32 {
                let p = SingularPoint::extremal(k, q).unwrap();
                let t = singularity_order(&p)
                    .unwrap()
                    .threshold(p.dimension())
                    .unwrap();
                assert_eq!(t, r(i64::from(2 * k * q * q), 1));
            }
        }
    }

    #[test]
    fn evaluation_and_display() {
        let o = SingularOrder::unit_multiple(6);
        assert_eq!(o.at(&r(3, 1)).unwrap(), r(2, 1));
        assert_eq!(o.at(&r(4, 1)).unwrap(), unit_order(&r(4, 1)) * r(6, 1));
        assert_eq!(o.to_string(), "6(1-2/beta)");
        assert_eq!(
            singularity_order(&SingularPoint::star(2))
                .unwrap()
                .to_string(),
            "4 - 16/beta"
        );
    }

    #[test]
    fn inconsistent_points_are_rejected() {
        let bad = SingularPoint::Row {
            q: 1,
            values: vec![0, 1],
        };
        assert!(bad.validate().is_err());
        let mut p = SingularPoint::extremal(3, 1).unwrap();
        if let SingularPoint::Array { rows, .. } = &mut p {
            rows[2][0] = Some(0);
        }
        assert!(singularity_order(&p).is_err());
    }

    #[test]
    fn k_one_has_no_assigned_coordinates() {
        let p = SingularPoint::extremal(1, 2).unwrap();
        assert_eq!(p.dimension(), 0);
        assert_eq!(
            singularity_order(&p).unwrap(),
            SingularOrder::unit_multiple(0)
        );
    }
}
