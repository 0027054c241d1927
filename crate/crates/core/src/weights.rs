//! Branching weights.
//!
//! [`psi`] is the exact discrete weight attached to an interlacing pair,
//! a double product of Pochhammer ratios. [`psi_gamma_form`] evaluates the
//! same quantity from its Gamma-ratio rewriting, and [`phi`] is the
//! continuous weight obtained in the scaling limit.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use statrs::function::gamma::ln_gamma;

use crate::error::{contract, domain, Result};
use crate::param::RationalParam;
use crate::signature::{interlaces, Signature};

/// Multiplies many small positive integers into a `BigUint`, batching in `u128`.
#[derive(Default)]
struct Product {
    big: Option<BigUint>,
    small: u128,
}

impl Product {
    fn new() -> Self {
        Self {
            big: None,
            small: 1,
        }
    }

    fn push(&mut self, t: u128) {
        match self.small.checked_mul(t) {
            Some(v) => self.small = v,
            None => {
                self.flush();
                self.small = t;
            }
        }
    }

    fn flush(&mut self) {
        if self.small != 1 {
            let s = BigUint::from(self.small);
            self.big = Some(match self.big.take() {
                Some(b) => b * s,
                None => s,
            });
            self.small = 1;
        }
    }

    fn finish(mut self) -> BigUint {
        self.flush();
        self.big.unwrap_or_else(BigUint::one)
    }
}

fn delta_i128(delta: &RationalParam) -> Result<(i128, i128)> {
    let (a, b) = delta.parts();
    match (a.to_i64(), b.to_i64()) {
        (Some(a), Some(b)) => Ok((i128::from(a), i128::from(b))),
        _ => Err(domain(format!(
            "{delta} has numerator or denominator beyond 64 bits"
        ))),
    }
}

/// `psi_{lambda/mu}^(delta)` in exact arithmetic. Requires `mu < lambda`.
pub fn psi(mu: &Signature, lambda: &Signature, delta: &RationalParam) -> Result<BigRational> {
    if !interlaces(mu, lambda)? {
        return Err(contract(format!("{mu} does not interlace {lambda}")));
    }
    psi_unchecked(mu.parts(), lambda.parts(), delta)
}

/// [`psi`] without the interlacing check, for the hot loops that generate
/// only interlacing pairs.
pub(crate) fn psi_unchecked(
    mu: &[u32],
    lambda: &[u32],
    delta: &RationalParam,
) -> Result<BigRational> {
    let (a, b) = delta_i128(delta)?;
    let mut num = Product::new();
    let mut den = Product::new();
    let m_len = mu.len();
    for j in 0..m_len {
        let m = i128::from(mu[j]) - i128::from(lambda[j + 1]);
        if m == 0 {
            continue;
        }
        for i in 0..=j {
            let d = (j - i) as i128;
            let mu_gap = i128::from(mu[i]) - i128::from(mu[j]);
            let la_gap = i128::from(lambda[i]) - i128::from(mu[j]);
            // Each Pochhammer term c + delta*e is scaled by b, which cancels
            // because numerator and denominator carry 2m terms each.
            for l in 0..m {
                num.push((b * (mu_gap + l) + a * (d + 1)) as u128);
                num.push((b * (la_gap + 1 + l) + a * d) as u128);
                den.push((b * (mu_gap + 1 + l) + a * d) as u128);
                den.push((b * (la_gap + l) + a * (d + 1)) as u128);
            }
        }
    }
    Ok(BigRational::new(
        BigInt::from(num.finish()),
        BigInt::from(den.finish()),
    ))
}

/// `Gamma(x) / Gamma(y)` for rationals with `x - y` an integer, both positive.
fn gamma_ratio(x: &BigRational, y: &BigRational) -> BigRational {
    let diff = x - y;
    debug_assert!(diff.is_integer());
    let n = diff.to_integer().to_i64().expect("small gap");
    let mut acc = BigRational::one();
    let (base, steps, invert) = if n >= 0 { (y, n, false) } else { (x, -n, true) };
    let mut t = base.clone();
    for _ in 0..steps {
        acc *= &t;
        t += BigRational::one();
    }
    if invert {
        acc.recip()
    } else {
        acc
    }
}

/// Fractional part of a positive rational, used as a pairing class.
fn fract(x: &BigRational) -> BigRational {
    BigRational::new(x.numer().mod_floor(x.denom()), x.denom().clone())
}

/// Same value as [`psi`], computed from the Gamma-ratio form of the weight:
/// all Gamma arguments are collected, arguments differing by an integer are
/// paired, and each pair collapses to a finite rational product.
pub fn psi_gamma_form(
    mu: &Signature,
    lambda: &Signature,
    delta: &RationalParam,
) -> Result<BigRational> {
    if !interlaces(mu, lambda)? {
        return Err(contract(format!("{mu} does not interlace {lambda}")));
    }
    let dl = delta.delta().clone();
    let one = BigRational::one();
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let mu: Vec<i64> = mu.parts().iter().map(|&p| i64::from(p)).collect();
    let la: Vec<i64> = lambda.parts().iter().map(|&p| i64::from(p)).collect();
    let m_len = mu.len();

    let mut num: Vec<BigRational> = Vec::new();
    let mut den: Vec<BigRational> = Vec::new();
    // Gamma(delta)^M below, balanced by Gamma(1) = 1 above.
    for _ in 0..m_len {
        den.push(dl.clone());
        num.push(one.clone());
    }
    for i in 0..m_len {
        for j in i + 1..m_len {
            let dd = &dl * int((j - i) as i64);
            num.push(int(mu[i] - la[j + 1]) + &dd + &dl);
            num.push(int(mu[i] - mu[j]) + &dd + &one);
            den.push(int(mu[i] - la[j + 1]) + &dd + &one);
            den.push(int(mu[i] - mu[j]) + &dd + &dl);

            num.push(int(la[i] - la[j + 1]) + &dd + &one);
            num.push(int(la[i] - mu[j]) + &dd + &dl);
            den.push(int(la[i] - la[j + 1]) + &dd + &dl);
            den.push(int(la[i] - mu[j]) + &dd + &one);
        }
        num.push(int(mu[i] - la[i + 1]) + &dl);
        num.push(int(la[i] - la[i + 1]) + &one);
        num.push(int(la[i] - mu[i]) + &dl);
        den.push(int(mu[i] - la[i + 1]) + &one);
        den.push(int(la[i] - la[i + 1]) + &dl);
        den.push(int(la[i] - mu[i]) + &one);
    }

    let mut classes: BTreeMap<BigRational, (Vec<BigRational>, Vec<BigRational>)> = BTreeMap::new();
    for x in num {
        classes.entry(fract(&x)).or_default().0.push(x);
    }
    for y in den {
        classes.entry(fract(&y)).or_default().1.push(y);
    }
    let mut acc = BigRational::one();
    for (class, (mut xs, mut ys)) in classes {
        if xs.len() != ys.len() {
            return Err(contract(format!(
                "unbalanced Gamma arguments in class {class}: {} over {}",
                xs.len(),
                ys.len()
            )));
        }
        xs.sort();
        ys.sort();
        for (x, y) in xs.iter().zip(&ys) {
            acc *= gamma_ratio(x, y);
        }
    }
    Ok(acc)
}

/// A real interlacing pair `y < x` with `len(x) = len(y) + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousPair {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

impl ContinuousPair {
    pub fn new(y: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() + 1 {
            return Err(contract("continuous pair needs len(x) = len(y) + 1"));
        }
        if x.iter()
            .chain(&y)
            .any(|v| !v.is_finite() || !(0.0..=1.0).contains(v))
        {
            return Err(domain("coordinates must lie in [0, 1]"));
        }
        let interlaced = y
            .iter()
            .enumerate()
            .all(|(i, &v)| x[i] >= v && v >= x[i + 1]);
        if !interlaced {
            return Err(contract(format!("{y:?} does not interlace {x:?}")));
        }
        Ok(Self { y, x })
    }
}

/// Log of the delta-free base product
/// `prod |x_i - y_j| / (prod_{i<j} (x_i - x_j) prod_{i<j} (y_i - y_j))`
/// split into its finite part and the net exponent of zero factors.
fn log_base_parts(y: &[f64], x: &[f64]) -> (f64, i64) {
    let mut log = 0.0;
    let mut zeros = 0i64;
    let mut add = |v: f64, sign: i64| {
        if v == 0.0 {
            zeros += sign;
        } else {
            log += sign as f64 * v.abs().ln();
        }
    };
    for &xi in x {
        for &yj in y {
            add(xi - yj, 1);
        }
    }
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            add(x[i] - x[j], -1);
        }
    }
    for i in 0..y.len() {
        for j in i + 1..y.len() {
            add(y[i] - y[j], -1);
        }
    }
    (log, zeros)
}

/// The delta-free product `[Gamma(delta)^M phi^(delta)]^(1/(delta-1))`.
/// Bounded by one on interlacing pairs in `[0, 1]`.
pub fn phi_base(pair: &ContinuousPair) -> f64 {
    let (log, zeros) = log_base_parts(&pair.y, &pair.x);
    match zeros.signum() {
        0 => log.exp(),
        1 => 0.0,
        _ => f64::INFINITY,
    }
}

/// The continuous weight `phi^(delta)_{M,M+1}(y, x)`.
///
/// Accumulated in log space. On coincident coordinates the zero factors are
/// combined by their net exponent: a positive net power gives `0`, a negative
/// one gives `+inf`, and at `delta = 1` every exponent vanishes.
pub fn phi(pair: &ContinuousPair, delta: f64) -> f64 {
    phi_unchecked(&pair.y, &pair.x, delta)
}

pub(crate) fn phi_unchecked(y: &[f64], x: &[f64], delta: f64) -> f64 {
    let m = y.len() as f64;
    let norm = -m * ln_gamma(delta);
    let e = delta - 1.0;
    if e == 0.0 {
        return 1.0;
    }
    let (log, zeros) = log_base_parts(y, x);
    let net = zeros as f64 * e;
    if net > 0.0 {
        0.0
    } else if net < 0.0 {
        f64::INFINITY
    } else {
        (norm + e * log).exp()
    }
}

/// `(t)_m = t (t+1) ... (t+m-1)` in exact arithmetic.
pub fn pochhammer(t: &BigRational, m: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut x = t.clone();
    for _ in 0..m {
        acc *= &x;
        x += BigRational::one();
    }
    acc
}
