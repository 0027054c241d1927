//! Jack polynomials by the branching formula, and the expectation of
//! products of `|Psi(t_j)|^{2q}` they encode.
//!
//! `P_lambda(x_1..x_M) = sum_{mu < lambda} psi_{lambda/mu} x_M^{|lambda|-|mu|} P_mu(x_1..x_{M-1})`
//!
//! Branching coefficients stay exact until they meet the complex points.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::param::RationalParam;
use crate::signature::{enumerate_restrictions, Signature};
use crate::weights::psi_unchecked;

/// Default cap on memoised sub-signatures per evaluation.
pub const DEFAULT_MAX_NODES: usize = 2_000_000;

/// One evaluation session for a fixed `delta`.
///
/// Branching weights are cached across evaluations; the per-point memo is
/// rebuilt for every call. Use one session per thread.
#[derive(Debug)]
pub struct JackEvaluator {
    delta: RationalParam,
    weights: HashMap<(Signature, Signature), f64>,
    max_nodes: usize,
}

impl JackEvaluator {
    pub fn new(delta: RationalParam) -> Self {
        Self {
            delta,
            weights: HashMap::new(),
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    pub fn delta(&self) -> &RationalParam {
        &self.delta
    }

    fn weight(&mut self, mu: &Signature, lambda: &Signature) -> Result<f64> {
        if let Some(&w) = self.weights.get(&(mu.clone(), lambda.clone())) {
            return Ok(w);
        }
        let w = psi_unchecked(mu.parts(), lambda.parts(), &self.delta)?
            .to_f64()
            .ok_or_else(|| Error::Numerical(format!("weight of {lambda}/{mu} overflows f64")))?;
        self.weights.insert((mu.clone(), lambda.clone()), w);
        Ok(w)
    }

    /// `P_lambda(points; delta)`. `points.len()` must equal `lambda.len()`.
    pub fn eval(&mut self, lambda: &Signature, points: &[Complex64]) -> Result<Complex64> {
        if points.len() != lambda.len() {
            return Err(contract(format!(
                "{} points for a signature of length {}",
                points.len(),
                lambda.len()
            )));
        }
        let mut memo = HashMap::new();
        self.eval_rec(lambda, points, &mut memo)
    }

    fn eval_rec(
        &mut self,
        lambda: &Signature,
        points: &[Complex64],
        memo: &mut HashMap<Signature, Complex64>,
    ) -> Result<Complex64> {
        if lambda.is_empty() {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if let Some(&v) = memo.get(lambda) {
            return Ok(v);
        }
        if memo.len() >= self.max_nodes {
            return Err(Error::Resource {
                what: "Jack branching lattice".into(),
                limit: self.max_nodes,
                reached: memo.len(),
                hint: Some("reduce the signature or raise the node cap".into()),
            });
        }
        let m = lambda.len();
        let x = points[m - 1];
        let size = lambda.size();
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in enumerate_restrictions(lambda, None) {
            let w = self.weight(&mu, lambda)?;
            let sub = self.eval_rec(&mu, &points[..m - 1], memo)?;
            acc += w * x.powu((size - mu.size()) as u32) * sub;
        }
        memo.insert(lambda.clone(), acc);
        Ok(acc)
    }
}

/// `P_lambda(points; delta)` in a fresh session.
pub fn jack_eval(
    lambda: &Signature,
    points: &[Complex64],
    delta: &RationalParam,
) -> Result<Complex64> {
    JackEvaluator::new(delta.clone()).eval(lambda, points)
}

/// Schur polynomial by the branching recursion with unit weights. Kept
/// separate from [`JackEvaluator`] so it can serve as an oracle for the
/// `delta = 1` case.
pub fn schur_eval(lambda: &Signature, points: &[Complex64]) -> Result<Complex64> {
    if points.len() != lambda.len() {
        return Err(contract("schur_eval needs one point per part"));
    }
    fn rec(
        lambda: &Signature,
        points: &[Complex64],
        memo: &mut HashMap<Signature, Complex64>,
    ) -> Complex64 {
        if lambda.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        if let Some(&v) = memo.get(lambda) {
            return v;
        }
        let m = lambda.len();
        let v = enumerate_restrictions(lambda, None)
            .map(|mu| {
                points[m - 1].powu((lambda.size() - mu.size()) as u32)
                    * rec(&mu, &points[..m - 1], memo)
            })
            .sum();
        memo.insert(lambda.clone(), v);
        v
    }
    Ok(rec(lambda, points, &mut HashMap::new()))
}

/// The evaluation point in which each `e^{i t_j}` is repeated `2q` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatedPointSpec {
    pub n: u32,
    pub k: u32,
    pub q: u32,
    pub angles: Vec<f64>,
}

impl RepeatedPointSpec {
    pub fn new(n: u32, q: u32, angles: Vec<f64>) -> Result<Self> {
        if q == 0 || angles.is_empty() {
            return Err(contract("need q >= 1 and at least one angle"));
        }
        Ok(Self {
            n,
            k: angles.len() as u32,
            q,
            angles,
        })
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.angles
            .iter()
            .flat_map(|&t| std::iter::repeat_n(Complex64::from_polar(1.0, t), 2 * self.q as usize))
            .collect()
    }

    /// `(N^{kq}, 0^{kq})`.
    pub fn signature(&self) -> Signature {
        let kq = (self.k * self.q) as usize;
        Signature::step(self.n, kq, kq)
    }
}

/// Imaginary residue accepted by [`matsumoto_expectation`], relative to
/// `max(1, |value|)`.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// `E[prod_j |Psi(t_j)|^{2q}]` from the Jack polynomial at the repeated point,
/// divided by `prod_j e^{i N q t_j}`.
pub fn matsumoto_expectation(spec: &RepeatedPointSpec, delta: &RationalParam) -> Result<f64> {
    matsumoto_with(&mut JackEvaluator::new(delta.clone()), spec)
}

pub(crate) fn matsumoto_with(session: &mut JackEvaluator, spec: &RepeatedPointSpec) -> Result<f64> {
    let p = session.eval(&spec.signature(), &spec.points())?;
    let phase: f64 = spec
        .angles
        .iter()
        .map(|t| f64::from(spec.n) * f64::from(spec.q) * t)
        .sum();
    let v = p * Complex64::from_polar(1.0, -phase);
    let tol = IMAG_TOLERANCE * v.re.abs().max(1.0);
    if v.im.abs() > tol {
        return Err(Error::Numerical(format!(
            "expectation has imaginary residue {:e} at angles {:?}",
            v.im, spec.angles
        )));
    }
    if v.re < -tol {
        return Err(Error::Numerical(format!(
            "negative expectation {} at angles {:?}",
            v.re, spec.angles
        )));
    }
    Ok(v.re.max(0.0))
}
