//! The leading coefficient `c(k;q)`: the closed form for `k = 1` and Monte
//! Carlo estimates of its integral representations.
//!
//! All estimators split the budget over [`MC_BLOCKS`] fixed random streams, so
//! results depend on `(seed, samples)` only.

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::finiteness::{finiteness_domain, FinitenessReport, FinitenessStatus};
use crate::arrays::{constraint_table, RowRef};
use crate::error::{contract, Error, Result};
use crate::stats::{Estimate, Moments};
use crate::weights::phi_unchecked;

pub const MC_BLOCKS: usize = 64;

/// Hit rates below this are flagged.
pub const MIN_HIT_RATE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McBudget {
    pub samples: u64,
    pub seed: u64,
}

impl McBudget {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEstimate {
    pub estimate: Estimate,
    /// Fraction of draws that landed inside the integration domain.
    pub hit_rate: f64,
    pub flags: Vec<String>,
    pub finiteness: FinitenessReport,
    pub budget: McBudget,
}

/// `prod_{i=1}^q Gamma(delta i) / Gamma(delta (q+i))` with `delta = 2/beta`.
pub fn coeff_k1(q: u32, beta: f64) -> f64 {
    let d = 2.0 / beta;
    (1..=q)
        .map(|i| ln_gamma(d * f64::from(i)) - ln_gamma(d * f64::from(q + i)))
        .sum::<f64>()
        .exp()
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(contract(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

fn run_blocks<F>(budget: McBudget, draw: F) -> Result<(Moments, u64)>
where
    F: Fn(&mut ChaCha8Rng) -> Option<f64> + Sync,
{
    if budget.samples == 0 {
        return Err(contract("Monte Carlo budget must be positive"));
    }
    let blocks = MC_BLOCKS as u64;
    let parts: Vec<(Moments, u64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(b);
            let count = budget.samples / blocks + u64::from(b < budget.samples % blocks);
            let mut m = Moments::default();
            let mut hits = 0;
            for _ in 0..count {
                match draw(&mut rng) {
                    Some(w) if w.is_finite() => {
                        hits += 1;
                        m.push(w);
                    }
                    Some(_) => m.push(f64::INFINITY),
                    None => m.push(0.0),
                }
            }
            (m, hits)
        })
        .collect();
    let mut total = Moments::default();
    let mut hits = 0;
    for (m, h) in &parts {
        total.merge(m);
        hits += h;
    }
    Ok((total, hits))
}

fn finish(
    moments: Moments,
    hits: u64,
    mut flags: Vec<String>,
    finiteness: FinitenessReport,
    budget: McBudget,
) -> CoeffEstimate {
    let mut estimate = moments.estimate();
    if hits == 0 {
        estimate.std_error = None;
    }
    let hit_rate = hits as f64 / moments.n as f64;
    if hit_rate < MIN_HIT_RATE {
        flags.push(format!(
            "constraint acceptance {hit_rate:.2e} below {MIN_HIT_RATE:.0e}"
        ));
    }
    if estimate.std_error.is_none() || !estimate.mean.is_finite() {
        flags.push("unreliable variance: too few effective samples".into());
    }
    CoeffEstimate {
        estimate,
        hit_rate,
        flags,
        finiteness,
        budget,
    }
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `sum_{M=1}^{m} [ln Gamma(delta) - 2 ln Gamma(M delta)]`.
fn ln_selberg_prefactor(m: u32, d: f64) -> f64 {
    (1..=m)
        .map(|i| ln_gamma(d) - 2.0 * ln_gamma(f64::from(i) * d))
        .sum()
}

fn ln_vandermonde(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += (x[i] - x[j]).abs().ln();
        }
    }
    s
}

/// Proposal for a row of `[0,1]`-valued coordinates: iid `Beta(delta, delta)`
/// when `delta < 1`, uniform otherwise.
#[derive(Clone, Copy, Debug)]
enum Proposal {
    Uniform,
    Beta {
        dist: Beta<f64>,
        delta: f64,
        ln_norm: f64,
    },
}

impl Proposal {
    fn for_delta(d: f64) -> Result<Self> {
        if d >= 1.0 {
            return Ok(Proposal::Uniform);
        }
        Self::beta(d)
    }

    fn beta(d: f64) -> Result<Self> {
        let dist = Beta::new(d, d).map_err(|e| Error::Numerical(format!("Beta({d},{d}): {e}")))?;
        Ok(Proposal::Beta {
            dist,
            delta: d,
            ln_norm: 2.0 * ln_gamma(d) - ln_gamma(2.0 * d),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Proposal::Uniform => rng.random(),
            Proposal::Beta { dist, .. } => dist.sample(rng),
        }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Proposal::Uniform => 0.0,
            Proposal::Beta { delta, ln_norm, .. } => (delta - 1.0) * (x * (1.0 - x)).ln() - ln_norm,
        }
    }

    /// Draws a decreasing row of length `n`, with the last raw draw replaced
    /// by `target - sum` when a target is given. Returns the row and the log
    /// density of the induced law on the chamber (Lebesgue on `n` or `n - 1`
    /// coordinates). `None` when the eliminated coordinate leaves `[0,1]`.
    fn draw_row(
        &self,
        rng: &mut ChaCha8Rng,
        n: usize,
        target: Option<f64>,
    ) -> Option<(Vec<f64>, f64)> {
        let free = if target.is_some() { n - 1 } else { n };
        let mut r: Vec<f64> = (0..free).map(|_| self.draw(rng)).collect();
        if let Some(t) = target {
            let last = t - r.iter().sum::<f64>();
            if !(0.0..=1.0).contains(&last) {
                return None;
            }
            r.push(last);
        }
        r.sort_by(|a, b| b.total_cmp(a));
        let lp: Vec<f64> = r.iter().map(|&x| self.ln_pdf(x)).collect();
        let total: f64 = lp.iter().sum();
        let ln_g = if target.is_some() {
            ln_factorial(n - 1) + log_sum_exp(lp.iter().map(|l| total - l))
        } else {
            ln_factorial(n) + total
        };
        Some((r, ln_g))
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Monte Carlo estimate of the `q`-dimensional Selberg-type integral for
/// `c(1;q)`, sampling iid `Beta(delta, delta)` coordinates.
pub fn coeff_k1_integral(q: u32, beta: f64, budget: McBudget) -> Result<CoeffEstimate> {
    check_beta(beta)?;
    if q == 0 {
        return Err(contract("q must be at least 1"));
    }
    let d = 2.0 / beta;
    let proposal = Proposal::beta(d)?;
    let qn = q as usize;
    // The Beta densities cancel the boundary factors; what is left is the
    // Vandermonde power times constants. Dividing by q! maps the cube onto
    // the ordered chamber.
    let ln_c = ln_selberg_prefactor(q, d) + f64::from(q) * (2.0 * ln_gamma(d) - ln_gamma(2.0 * d))
        - ln_factorial(qn);
    let (m, hits) = run_blocks(budget, |rng| {
        let x: Vec<f64> = (0..qn).map(|_| proposal.draw(rng)).collect();
        Some((ln_c + 2.0 * d * ln_vandermonde(&x)).exp())
    })?;
    Ok(finish(
        m,
        hits,
        Vec::new(),
        finiteness_domain(1, q, Some(beta)),
        budget,
    ))
}

fn refuse(report: FinitenessReport) -> Error {
    Error::Refused {
        reason: report.label(),
        report: Box::new(report),
    }
}

/// Monte Carlo estimate of the single-row integral for `c(2;q)` over the
/// chamber in `[0,1]^{2q}` with `sum x = q`, last coordinate eliminated.
/// Refuses for `beta >= 4q^2`, where the integral diverges.
pub fn coeff_k2(q: u32, beta: f64, budget: McBudget) -> Result<CoeffEstimate> {
    check_beta(beta)?;
    if q == 0 {
        return Err(contract("q must be at least 1"));
    }
    let report = finiteness_domain(2, q, Some(beta));
    if report.status != Some(FinitenessStatus::Finite) {
        return Err(refuse(report));
    }
    let d = 2.0 / beta;
    let n = 2 * q as usize;
    let proposal = Proposal::for_delta(d)?;
    let ln_pref = ln_selberg_prefactor(2 * q, d);
    let (m, hits) = run_blocks(budget, |rng| {
        let (x, ln_g) = proposal.draw_row(rng, n, Some(f64::from(q)))?;
        let mut ln_f = ln_pref + 2.0 * d * ln_vandermonde(&x);
        if d != 1.0 {
            ln_f += (d - 1.0) * x.iter().map(|&v| (v * (1.0 - v)).ln()).sum::<f64>();
        }
        Some((ln_f - ln_g).exp())
    })?;
    let mut flags = Vec::new();
    if d < 1.0 {
        flags.push("beta > 2: Beta(delta, delta) importance proposals".into());
    }
    Ok(finish(m, hits, flags, report, budget))
}

/// Row sums imposed on the continuous array, indexed by row length
/// (`None` when free).
#[derive(Clone, Debug)]
struct RowTargets {
    ascending: Vec<Option<f64>>,
    descending: Vec<Option<f64>>,
    center: Option<f64>,
}

impl RowTargets {
    fn new(k: u32, q: u32) -> Self {
        let kq = (k * q) as usize;
        let mut t = Self {
            ascending: vec![None; kq + 1],
            descending: vec![None; kq + 1],
            center: None,
        };
        for c in constraint_table(k, q) {
            let v = c.half_len as f64;
            match c.row {
                RowRef::Ascending(m) => t.ascending[m] = Some(v),
                RowRef::Descending(m) => t.descending[m] = Some(v),
                RowRef::Center => t.center = Some(v),
            }
        }
        t
    }
}

/// A row interlacing below `upper`, uniform in its interval box, with the
/// last coordinate eliminated when targeted. Returns the row and the log of
/// the box volume sampled over.
fn draw_below(rng: &mut ChaCha8Rng, upper: &[f64], target: Option<f64>) -> Option<(Vec<f64>, f64)> {
    let len = upper.len() - 1;
    let free = if target.is_some() { len - 1 } else { len };
    let mut row = Vec::with_capacity(len);
    let mut ln_vol = 0.0;
    for i in 0..free {
        let (hi, lo) = (upper[i], upper[i + 1]);
        row.push(lo + rng.random::<f64>() * (hi - lo));
        ln_vol += (hi - lo).ln();
    }
    if let Some(t) = target {
        let last = t - row.iter().sum::<f64>();
        if !(upper[len] <= last && last <= upper[len - 1]) {
            return None;
        }
        row.push(last);
    }
    Some((row, ln_vol))
}

fn extend_c(x: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(x.len() + 2);
    e.push(1.0);
    e.extend_from_slice(x);
    e.push(0.0);
    e
}

/// A sampled continuous array: `ascending[m-1]` and `descending[m-1]` have
/// length `m`, and both end with the shared centre row.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousArray {
    pub ascending: Vec<Vec<f64>>,
    pub descending: Vec<Vec<f64>>,
}

impl ContinuousArray {
    /// The integrand of the coefficient: `phi` along the ascending chain and
    /// against the extended rows on the descending side.
    pub fn weight(&self, delta: f64) -> f64 {
        let mut w = 1.0;
        for pair in self.ascending.windows(2) {
            w *= phi_unchecked(&pair[0], &pair[1], delta);
        }
        let mut prev: &[f64] = &[];
        for row in &self.descending {
            w *= phi_unchecked(row, &extend_c(prev), delta);
            prev = row;
        }
        w
    }
}

struct ArraySampler {
    kq: usize,
    targets: RowTargets,
    center: Proposal,
}

impl ArraySampler {
    fn new(k: u32, q: u32, d: f64) -> Result<Self> {
        Ok(Self {
            kq: (k * q) as usize,
            targets: RowTargets::new(k, q),
            center: Proposal::for_delta(d)?,
        })
    }

    /// One array and the log of its proposal density.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<(ContinuousArray, f64)> {
        let (center, ln_g) = self.center.draw_row(rng, self.kq, self.targets.center)?;
        let mut ln_vol = 0.0;
        let mut side = |targets: &[Option<f64>]| -> Option<Vec<Vec<f64>>> {
            let mut rows = vec![center.clone()];
            for m in (1..self.kq).rev() {
                let (row, v) = draw_below(rng, rows.last().unwrap(), targets[m])?;
                ln_vol += v;
                rows.push(row);
            }
            rows.reverse();
            Some(rows)
        };
        let ascending = side(&self.targets.ascending)?;
        let descending = side(&self.targets.descending)?;
        Some((
            ContinuousArray {
                ascending,
                descending,
            },
            ln_g - ln_vol,
        ))
    }
}

/// Monte Carlo estimate of `c(k;q)` from the integral over the continuous
/// constrained arrays. The centre row is drawn first (uniform, or
/// `Beta(delta, delta)` when `beta > 2`), then each side top-down uniformly
/// in its interlacing box. Refuses where the coefficient is known infinite
/// and flags the conjectured range.
pub fn coeff_general(k: u32, q: u32, beta: f64, budget: McBudget) -> Result<CoeffEstimate> {
    check_beta(beta)?;
    if k == 0 || q == 0 {
        return Err(contract("k and q must be at least 1"));
    }
    let report = finiteness_domain(k, q, Some(beta));
    let mut flags = Vec::new();
    match report.status {
        Some(FinitenessStatus::Infinite) => return Err(refuse(report)),
        Some(FinitenessStatus::UnknownConjecturedFinite) => flags.push(format!(
            "beta = {beta} is only conjectured to give a finite coefficient"
        )),
        _ => {}
    }
    let d = 2.0 / beta;
    if d < 1.0 {
        flags.push(
            "beta > 2: interior weights are singular and the variance may be infinite".into(),
        );
    }
    let sampler = ArraySampler::new(k, q, d)?;
    let (m, hits) = run_blocks(budget, |rng| {
        let (a, ln_g) = sampler.draw(rng)?;
        Some(a.weight(d) * (-ln_g).exp())
    })?;
    Ok(finish(m, hits, flags, report, budget))
}

/// Volume of the continuous constrained array set: the hit fraction of
/// uniform points in the cube of free coordinates. Equals `c(k;q)` at
/// `beta = 2`.
pub fn coeff_volume(k: u32, q: u32, budget: McBudget) -> Result<CoeffEstimate> {
    if k == 0 || q == 0 {
        return Err(contract("k and q must be at least 1"));
    }
    let kq = (k * q) as usize;
    let targets = RowTargets::new(k, q);
    let row = |rng: &mut ChaCha8Rng, len: usize, target: Option<f64>| -> Option<Vec<f64>> {
        let free = if target.is_some() { len - 1 } else { len };
        let mut r: Vec<f64> = (0..free).map(|_| rng.random()).collect();
        if let Some(t) = target {
            r.push(t - r.iter().sum::<f64>());
        }
        let ok = r.iter().all(|v| (0.0..=1.0).contains(v)) && r.windows(2).all(|w| w[0] >= w[1]);
        ok.then_some(r)
    };
    let below = |y: &[f64], x: &[f64]| {
        y.iter()
            .enumerate()
            .all(|(i, &v)| x[i] >= v && v >= x[i + 1])
    };
    let (m, hits) = run_blocks(budget, |rng| {
        let center = row(rng, kq, targets.center)?;
        for side in [&targets.ascending, &targets.descending] {
            let mut upper = center.clone();
            for len in (1..kq).rev() {
                let r = row(rng, len, side[len])?;
                if !below(&r, &upper) {
                    return None;
                }
                upper = r;
            }
        }
        Some(1.0)
    })?;
    Ok(finish(
        m,
        hits,
        Vec::new(),
        finiteness_domain(k, q, Some(2.0)),
        budget,
    ))
}
