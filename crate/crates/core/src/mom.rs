//! Exact and quadrature evaluation of `MoM_N(k;q)`.
//!
//! The production route is a transfer over rows of an `I`-array. The
//! ascending chain `lambda^(1) < ... < lambda^(kq)` and the descending chain
//! `tilde-lambda^(1) < ... < tilde-lambda^(kq)` are accumulated separately
//! into layers keyed by the current row, then joined on the shared centre:
//!
//! ```text
//! MoM = sum_c A(c) D(c)
//! A(c) = sum over ascending chains ending at c of prod psi_{lambda^(m+1)/lambda^(m)}
//! D(c) = sum over descending chains ending at c of prod psi_{e_N(tl^(m))/tl^(m+1)}
//! ```
//!
//! Constrained rows only admit keys with the prescribed row sum.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{enumerate_j, path_target, DEFAULT_MAX_FREE};
use crate::error::{Error, Result};
use crate::jack::{matsumoto_with, JackEvaluator, RepeatedPointSpec};
use crate::param::{ArraySpec, RationalParam};
use crate::signature::{enumerate_box, enumerate_extensions, extend_n, Signature};
use crate::weights::psi_unchecked;

/// Default cap on the number of keys in one DP layer.
pub const DEFAULT_MAX_LAYER: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Row-transfer DP over `I_N(k;q)`.
    IDp,
    /// Direct enumeration of `J_N(k;q)`.
    JEnum,
    Quadrature,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::IDp => "i-dp",
            Method::JEnum => "j-enum",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MomValue {
    Exact(BigRational),
    Real(f64),
}

impl MomValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MomValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            MomValue::Real(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            MomValue::Exact(r) => Some(r),
            MomValue::Real(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomStats {
    /// Weighted transitions (DP), arrays (enumeration) or grid points
    /// (quadrature) evaluated.
    pub nodes: u64,
    pub max_layer: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomResult {
    pub value: MomValue,
    pub spec: ArraySpec,
    pub delta: RationalParam,
    pub method: Method,
    pub stats: MomStats,
}

#[derive(Clone, Debug)]
pub struct MomOptions {
    pub max_layer: usize,
    pub max_free: usize,
    /// `None` uses rayon's global pool; `Some(1)` runs on the calling thread.
    pub workers: Option<usize>,
}

impl Default for MomOptions {
    fn default() -> Self {
        Self {
            max_layer: DEFAULT_MAX_LAYER,
            max_free: DEFAULT_MAX_FREE,
            workers: None,
        }
    }
}

type Layer = BTreeMap<Signature, BigRational>;

fn run_in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// One transfer step: every source key is extended by `successors`, and the
/// weighted contributions are summed into the target layer.
fn transfer<F>(source: &Layer, sequential: bool, successors: F) -> Result<(Layer, u64)>
where
    F: Fn(&Signature) -> Result<Vec<(Signature, BigRational)>> + Sync,
{
    let expand = |(key, w): (&Signature, &BigRational)| -> Result<(Layer, u64)> {
        let mut local = Layer::new();
        let mut count = 0u64;
        for (next, psi) in successors(key)? {
            count += 1;
            let contrib = w * psi;
            match local.get_mut(&next) {
                Some(acc) => *acc += contrib,
                None => {
                    local.insert(next, contrib);
                }
            }
        }
        Ok((local, count))
    };
    if sequential {
        let mut out = Layer::new();
        let mut count = 0u64;
        for entry in source {
            let (local, c) = expand(entry)?;
            count += c;
            merge_into(&mut out, local);
        }
        Ok((out, count))
    } else {
        let parts: Vec<Result<(Layer, u64)>> = source.par_iter().map(expand).collect();
        let mut out = Layer::new();
        let mut count = 0u64;
        for p in parts {
            let (local, c) = p?;
            count += c;
            merge_into(&mut out, local);
        }
        Ok((out, count))
    }
}

fn merge_into(out: &mut Layer, local: Layer) {
    for (k, v) in local {
        match out.get_mut(&k) {
            Some(acc) => *acc += v,
            None => {
                out.insert(k, v);
            }
        }
    }
}

fn check_layer(layer: &Layer, row: usize, side: &str, cap: usize) -> Result<()> {
    if layer.len() > cap {
        return Err(Error::Resource {
            what: format!("DP layer at {side} row {row}"),
            limit: cap,
            reached: layer.len(),
            hint: Some("reduce N or kq, or raise --max-layer-size".into()),
        });
    }
    debug_assert!(layer.values().all(|v| v > &BigRational::zero()));
    Ok(())
}

/// The ascending and descending layers over the centre row.
fn center_layers(
    spec: &ArraySpec,
    delta: &RationalParam,
    opts: &MomOptions,
) -> Result<(Layer, Layer, MomStats)> {
    let n = spec.n;
    let kq = spec.width();
    let sequential = opts.workers == Some(1);
    let mut stats = MomStats::default();

    // Rows of length m sit at path position m on the ascending side and at
    // 2kq - m on the descending side.
    let mut asc: Layer = enumerate_box(1, n, path_target(spec, 1))
        .map(|s| (s, BigRational::one()))
        .collect();
    check_layer(&asc, 1, "ascending", opts.max_layer)?;
    stats.max_layer = asc.len();
    for m in 1..kq {
        let target = path_target(spec, m + 1);
        let (next, c) = transfer(&asc, sequential, |mu| {
            enumerate_extensions(mu, n, target)
                .map(|la| {
                    let w = psi_unchecked(mu.parts(), la.parts(), delta)?;
                    Ok((la, w))
                })
                .collect()
        })?;
        check_layer(&next, m + 1, "ascending", opts.max_layer)?;
        stats.nodes += c;
        stats.max_layer = stats.max_layer.max(next.len());
        asc = next;
    }

    let top = extend_n(&Signature::empty(), n)?;
    let mut desc = Layer::new();
    for s in enumerate_box(1, n, path_target(spec, 2 * kq - 1)) {
        let w = psi_unchecked(s.parts(), top.parts(), delta)?;
        desc.insert(s, w);
    }
    stats.nodes += desc.len() as u64;
    check_layer(&desc, 1, "descending", opts.max_layer)?;
    for m in 1..kq {
        let target = path_target(spec, 2 * kq - (m + 1));
        let (next, c) = transfer(&desc, sequential, |prev| {
            let ext = extend_n(prev, n)?;
            enumerate_extensions(prev, n, target)
                .map(|row| {
                    let w = psi_unchecked(row.parts(), ext.parts(), delta)?;
                    Ok((row, w))
                })
                .collect()
        })?;
        check_layer(&next, m + 1, "descending", opts.max_layer)?;
        stats.nodes += c;
        stats.max_layer = stats.max_layer.max(next.len());
        desc = next;
    }
    Ok((asc, desc, stats))
}

/// `MoM_N(k;q)` with `beta = 2 / delta`, exactly, by the row-transfer DP.
pub fn mom_exact(spec: &ArraySpec, delta: &RationalParam, opts: &MomOptions) -> Result<MomResult> {
    let start = Instant::now();
    let (asc, desc, mut stats) = run_in_pool(opts.workers, || center_layers(spec, delta, opts))??;
    let mut total = BigRational::zero();
    for (center, a) in &asc {
        if let Some(d) = desc.get(center) {
            total += a * d;
        }
    }
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(MomResult {
        value: MomValue::Exact(total),
        spec: *spec,
        delta: delta.clone(),
        method: Method::IDp,
        stats,
    })
}

/// `MoM_N(k;q)` by summing `prod psi` over every element of `J_N(k;q)`.
/// Small instances only.
pub fn mom_exact_j(
    spec: &ArraySpec,
    delta: &RationalParam,
    opts: &MomOptions,
) -> Result<MomResult> {
    let start = Instant::now();
    let mut total = BigRational::zero();
    let mut count = 0u64;
    for j in enumerate_j(spec, opts.max_free)? {
        let mut w = BigRational::one();
        for pair in j.rows.windows(2) {
            w *= psi_unchecked(pair[0].parts(), pair[1].parts(), delta)?;
        }
        total += w;
        count += 1;
    }
    let stats = MomStats {
        nodes: count,
        max_layer: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(MomResult {
        value: MomValue::Exact(total),
        spec: *spec,
        delta: delta.clone(),
        method: Method::JEnum,
        stats,
    })
}

/// Number of grid points per angle used by [`mom_quadrature`]: `2Nq + 1`.
pub fn quadrature_grid(spec: &ArraySpec) -> usize {
    2 * spec.n as usize * spec.q as usize + 1
}

/// `MoM_N(k;q)` as the `k`-fold circle average of the Jack-polynomial
/// expectation, by the trapezoid rule on `2Nq + 1` points per angle. The
/// integrand is a trigonometric polynomial of degree `Nq` in each angle, so
/// the rule is exact up to rounding. Cost grows as `(2Nq+1)^k`.
pub fn mom_quadrature(
    spec: &ArraySpec,
    delta: &RationalParam,
    opts: &MomOptions,
) -> Result<MomResult> {
    let start = Instant::now();
    let grid = quadrature_grid(spec);
    let k = spec.k as usize;
    let total_points = grid.checked_pow(k as u32).unwrap_or(usize::MAX);
    if total_points > opts.max_layer {
        return Err(Error::Resource {
            what: "quadrature grid".into(),
            limit: opts.max_layer,
            reached: total_points,
            hint: Some("reduce k or N".into()),
        });
    }
    let step = std::f64::consts::TAU / grid as f64;
    // Split on the first angle; each task owns its Jack session.
    let rows = |first: usize| -> Result<f64> {
        let mut session = JackEvaluator::new(delta.clone());
        let inner = total_points / grid;
        let mut acc = 0.0;
        for idx in 0..inner {
            let mut angles = Vec::with_capacity(k);
            angles.push(first as f64 * step);
            let mut rest = idx;
            for _ in 1..k {
                angles.push((rest % grid) as f64 * step);
                rest /= grid;
            }
            let pt = RepeatedPointSpec {
                n: spec.n,
                k: spec.k,
                q: spec.q,
                angles,
            };
            acc += matsumoto_with(&mut session, &pt)?;
        }
        Ok(acc)
    };
    let sums: Vec<Result<f64>> = if opts.workers == Some(1) {
        (0..grid).map(rows).collect()
    } else {
        run_in_pool(opts.workers, || {
            (0..grid).into_par_iter().map(rows).collect()
        })?
    };
    let mut total = 0.0;
    for s in sums {
        total += s?;
    }
    let value = total / total_points as f64;
    let stats = MomStats {
        nodes: total_points as u64,
        max_layer: 0,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(MomResult {
        value: MomValue::Real(value),
        spec: *spec,
        delta: delta.clone(),
        method: Method::Quadrature,
        stats,
    })
}
