//! Growth of `MoM_N(k;q)` in `N` against the predicted power law.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::exponent;
use crate::error::{contract, Error, Result};
use crate::mom::{mom_exact, MomOptions};
use crate::montecarlo::{mom_mc, McConfig};
use crate::param::{ArraySpec, RationalParam};

#[derive(Clone, Debug)]
pub enum RatioMethod {
    Exact(MomOptions),
    MonteCarlo(McConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: u32,
    /// Exact value when computed exactly.
    #[serde(skip)]
    pub exact: Option<BigRational>,
    pub mom: f64,
    pub std_error: Option<f64>,
    /// `MoM_N / N^exponent`.
    pub ratio: f64,
    /// Least-squares slope of `ln MoM` on `ln N` over the rows so far, once
    /// there are three.
    pub running_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub k: u32,
    pub q: u32,
    pub beta: f64,
    pub exponent: f64,
    pub rows: Vec<RatioRow>,
    pub slope: Option<f64>,
    pub warnings: Vec<String>,
}

/// Natural log of a positive rational, accurate for values far outside the
/// `f64` range.
pub fn ln_rational(x: &BigRational) -> f64 {
    fn ln_int(v: &BigInt) -> f64 {
        let bits = v.bits();
        if bits <= 1000 {
            return v.to_f64().unwrap_or(f64::NAN).ln();
        }
        let shift = bits - 64;
        let top: BigInt = v >> shift;
        top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
    }
    if !x.is_positive() {
        return f64::NAN;
    }
    ln_int(x.numer()) - ln_int(x.denom())
}

/// Least-squares slope of `ln y` on `ln x`. Needs at least three points.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(contract("slope fit needs paired values"));
    }
    if xs.len() < 3 {
        return Err(Error::Insufficient(format!(
            "slope fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(slope_of_logs(&lx, &ly))
}

fn slope_of_logs(lx: &[f64], ly: &[f64]) -> f64 {
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `MoM_N / N^exponent` for each `N` in `ns`, with the fitted log-log slope.
/// With fewer than three distinct `N` the slope is omitted and a warning is
/// recorded.
pub fn asymptotic_ratio(
    k: u32,
    q: u32,
    beta: &RationalParam,
    ns: &[u32],
    method: &RatioMethod,
) -> Result<RatioTable> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(contract("N values must be positive"));
    }
    let beta_f = beta.beta_f64();
    let e = exponent(k, q, beta_f);
    let mut rows = Vec::with_capacity(ns.len());
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for &n in ns {
        let spec = ArraySpec::new(n, k, q)?;
        let (exact, ln_mom, mom, std_error) = match method {
            RatioMethod::Exact(opts) => {
                let r = mom_exact(&spec, beta, opts)?;
                let v = r.value.exact().cloned().unwrap_or_else(BigRational::zero);
                let ln = ln_rational(&v);
                let mom = v
                    .to_f64()
                    .filter(|m| m.is_normal())
                    .unwrap_or_else(|| ln.exp());
                (Some(v), ln, mom, None)
            }
            RatioMethod::MonteCarlo(cfg) => {
                let r = mom_mc(&spec, beta_f, cfg)?;
                (
                    None,
                    r.estimate.mean.ln(),
                    r.estimate.mean,
                    r.estimate.std_error,
                )
            }
        };
        let ln_n = f64::from(n).ln();
        lx.push(ln_n);
        ly.push(ln_mom);
        let running_slope = (lx.len() >= 3).then(|| slope_of_logs(&lx, &ly));
        let scale = f64::from(n).powf(e);
        let ratio = if mom.is_normal() && scale.is_normal() {
            mom / scale
        } else {
            (ln_mom - e * ln_n).exp()
        };
        rows.push(RatioRow {
            n,
            exact,
            mom,
            std_error,
            ratio,
            running_slope,
        });
    }
    let mut warnings = Vec::new();
    let slope = if rows.len() >= 3 {
        rows.last().and_then(|r| r.running_slope)
    } else {
        warnings.push(format!(
            "slope fit needs at least 3 N values, got {}",
            rows.len()
        ));
        None
    };
    Ok(RatioTable {
        k,
        q,
        beta: beta_f,
        exponent: e,
        rows,
        slope,
        warnings,
    })
}
