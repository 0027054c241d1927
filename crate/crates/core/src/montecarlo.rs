//! Metropolis sampling of the CβE and a Monte Carlo estimate of `MoM_N(k;q)`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::param::ArraySpec;
use crate::stats::{batch_means, Estimate};

/// Acceptance rates outside this range produce a warning.
pub const ACCEPTANCE_RANGE: (f64, f64) = (0.1, 0.9);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbeSample {
    pub angles: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub chains: usize,
    /// Sweeps (`N` proposals each) discarded before recording.
    pub burn_in: usize,
    /// Proposals between kept samples; `None` means `N`.
    pub thinning: Option<usize>,
    /// Half-width of the angle proposal; `None` means `pi / sqrt(N)`.
    pub width: Option<f64>,
    /// Kept samples summed over all chains.
    pub samples: usize,
    pub batches_per_chain: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            burn_in: 1000,
            thinning: None,
            width: None,
            samples: 100_000,
            batches_per_chain: 25,
            seed: 0,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.samples < self.chains || self.batches_per_chain == 0 {
            return Err(contract(
                "need chains >= 1, samples >= chains and batches >= 1",
            ));
        }
        if self.thinning == Some(0) || self.width.is_some_and(|w| !(w > 0.0)) {
            return Err(contract("thinning and width must be positive"));
        }
        Ok(())
    }
}

/// `beta * sum_{j<k} log |e^{i theta_j} - e^{i theta_k}|`.
pub fn log_density_unnorm(sample: &CbeSample, beta: f64) -> f64 {
    let a = &sample.angles;
    let mut s = 0.0;
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            s += log_chord(a[j], a[k]);
        }
    }
    beta * s
}

/// `log |e^{ia} - e^{ib}| = log |2 sin((a-b)/2)|`.
fn log_chord(a: f64, b: f64) -> f64 {
    (2.0 * ((a - b) / 2.0).sin().abs()).ln()
}

/// One Metropolis chain. Iterating yields thinned post-burn-in states.
#[derive(Clone, Debug)]
pub struct CbeChain {
    beta: f64,
    angles: Vec<f64>,
    width: f64,
    thinning: usize,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl CbeChain {
    /// Chain `index` of the run described by `config`; each index draws from
    /// its own stream of the seeded generator.
    pub fn new(n: u32, beta: f64, config: &McConfig, index: usize) -> Result<Self> {
        if n == 0 || !(beta > 0.0) {
            return Err(contract("need N >= 1 and beta > 0"));
        }
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index as u64);
        let nf = f64::from(n);
        let angles = (0..n)
            .map(|j| (TAU * f64::from(j) / nf + rng.random_range(0.0..TAU / nf)) % TAU)
            .collect();
        let mut chain = Self {
            beta,
            angles,
            width: config.width.unwrap_or(PI / nf.sqrt()),
            thinning: config.thinning.unwrap_or(n as usize),
            rng,
            proposed: 0,
            accepted: 0,
        };
        for _ in 0..config.burn_in * n as usize {
            chain.step();
        }
        chain.proposed = 0;
        chain.accepted = 0;
        Ok(chain)
    }

    fn step(&mut self) {
        let n = self.angles.len();
        let j = self.rng.random_range(0..n);
        let old = self.angles[j];
        let new = (old + self.rng.random_range(-self.width..self.width)).rem_euclid(TAU);
        let mut diff = 0.0;
        for (i, &a) in self.angles.iter().enumerate() {
            if i != j {
                diff += log_chord(new, a) - log_chord(old, a);
            }
        }
        let log_ratio = self.beta * diff;
        self.proposed += 1;
        let u: f64 = self.rng.random();
        if log_ratio >= 0.0 || u.ln() < log_ratio {
            self.angles[j] = new;
            self.accepted += 1;
        }
    }

    /// Acceptance rate since burn-in.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.proposed as f64
    }

    pub fn state(&self) -> CbeSample {
        CbeSample {
            angles: self.angles.clone(),
        }
    }
}

impl Iterator for CbeChain {
    type Item = CbeSample;

    fn next(&mut self) -> Option<CbeSample> {
        for _ in 0..self.thinning {
            self.step();
        }
        Some(self.state())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McDiagnostics {
    pub acceptance: Vec<f64>,
    pub warnings: Vec<String>,
}

fn diagnostics(rates: Vec<f64>) -> McDiagnostics {
    let warnings = rates
        .iter()
        .enumerate()
        .filter(|(_, r)| !(ACCEPTANCE_RANGE.0..=ACCEPTANCE_RANGE.1).contains(*r))
        .map(|(i, r)| format!("chain {i}: acceptance rate {r:.3} outside [0.1, 0.9]"))
        .collect();
    McDiagnostics {
        acceptance: rates,
        warnings,
    }
}

/// `config.samples` states split over `config.chains` chains (chain-major
/// order), with acceptance diagnostics.
pub fn sample_cbe(n: u32, beta: f64, config: &McConfig) -> Result<(Vec<CbeSample>, McDiagnostics)> {
    let chains = config.chains.max(1);
    let (per_chain, extra) = (config.samples / chains, config.samples % chains);
    let runs = run_chains(n, beta, config, |i, chain| {
        chain
            .take(per_chain + usize::from(i < extra))
            .collect::<Vec<_>>()
    })?;
    let rates = runs.iter().map(|r| r.1).collect();
    Ok((
        runs.into_iter().flat_map(|r| r.0).collect(),
        diagnostics(rates),
    ))
}

fn run_chains<T: Send>(
    n: u32,
    beta: f64,
    config: &McConfig,
    body: impl Fn(usize, &mut CbeChain) -> T + Sync,
) -> Result<Vec<(T, f64)>> {
    (0..config.chains)
        .into_par_iter()
        .map(|i| {
            let mut chain = CbeChain::new(n, beta, config, i)?;
            let out = body(i, &mut chain);
            Ok((out, chain.acceptance_rate()))
        })
        .collect()
}

/// `(1/2pi) int |Psi(t)|^{2q} dt` by the trapezoid rule on `2Nq + 1` points.
pub fn partition_function_z(sample: &CbeSample, q: u32) -> f64 {
    let n = sample.angles.len();
    partition_function_z_grid(sample, q, 2 * n * q as usize + 1)
}

/// As [`partition_function_z`] on a caller-chosen grid.
pub fn partition_function_z_grid(sample: &CbeSample, q: u32, points: usize) -> f64 {
    let h = TAU / points as f64;
    let mut s = 0.0;
    for m in 0..points {
        let t = m as f64 * h;
        let sq: f64 = sample
            .angles
            .iter()
            .map(|&th| 2.0 - 2.0 * (t - th).cos())
            .product();
        s += sq.powi(q as i32);
    }
    s / points as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: Estimate,
    pub diagnostics: McDiagnostics,
    pub config: McConfig,
}

/// Sample mean of `Z(q)^k` with a batch-means standard error.
pub fn mom_mc(spec: &ArraySpec, beta: f64, config: &McConfig) -> Result<McEstimate> {
    if spec.n == 0 {
        return Err(contract("Monte Carlo needs N >= 1"));
    }
    let per_chain = config.samples / config.chains.max(1);
    let k = spec.k as i32;
    let runs = run_chains(spec.n, beta, config, |_, chain| {
        chain
            .take(per_chain)
            .map(|s| partition_function_z(&s, spec.q).powi(k))
            .collect::<Vec<f64>>()
    })?;
    let rates = runs.iter().map(|r| r.1).collect();
    let values: Vec<Vec<f64>> = runs.into_iter().map(|r| r.0).collect();
    Ok(McEstimate {
        estimate: batch_means(&values, config.batches_per_chain),
        diagnostics: diagnostics(rates),
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(samples: usize, seed: u64) -> McConfig {
        McConfig {
            samples,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn density_examples() {
        let s = CbeSample {
            angles: vec![0.0, PI],
        };
        assert!((log_density_unnorm(&s, 2.0) - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(
            log_density_unnorm(&CbeSample { angles: vec![1.3] }, 5.0),
            0.0
        );
        assert_eq!(
            log_density_unnorm(
                &CbeSample {
                    angles: vec![1.0, 1.0]
                },
                2.0
            ),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn z_examples() {
        assert!((partition_function_z(&CbeSample { angles: vec![0.7] }, 1) - 2.0).abs() < 1e-12);
        assert!(
            (partition_function_z(
                &CbeSample {
                    angles: vec![0.0, PI]
                },
                1
            ) - 2.0)
                .abs()
                < 1e-12
        );
        let s = CbeSample {
            angles: vec![0.1, 1.9, 4.0],
        };
        for q in 1..=3 {
            let a = partition_function_z(&s, q);
            let b = partition_function_z_grid(&s, q, 2 * (2 * 3 * q as usize + 1));
            assert!(a >= 0.0);
            assert!((a - b).abs() <= 1e-12 * a, "{a} {b}");
        }
    }

    #[test]
    fn one_point_is_uniform() {
        let (xs, diag) = sample_cbe(
            1,
            2.0,
            &McConfig {
                chains: 1,
                ..cfg(10_000, 3)
            },
        )
        .unwrap();
        let mut t: Vec<f64> = xs.iter().map(|s| s.angles[0] / TAU).collect();
        t.sort_by(f64::total_cmp);
        let n = t.len() as f64;
        let d = t
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max);
        // Critical value of the KS statistic at level 0.01.
        assert!(d < 1.628 / n.sqrt(), "D = {d}");
        assert_eq!(diag.acceptance, vec![1.0]);
    }

    #[test]
    fn cue_two_points() {
        let (xs, _) = sample_cbe(2, 2.0, &cfg(40_000, 11)).unwrap();
        let vals: Vec<f64> = xs
            .iter()
            .map(|s| 2.0 + 2.0 * (s.angles[0] - s.angles[1]).cos())
            .collect();
        let e = batch_means(
            &vals.chunks(10_000).map(<[f64]>::to_vec).collect::<Vec<_>>(),
            25,
        );
        assert!(e.agrees_with(1.0, 3.0), "{e:?}");
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = sample_cbe(4, 3.0, &cfg(200, 5)).unwrap();
        let b = sample_cbe(4, 3.0, &cfg(200, 5)).unwrap();
        assert_eq!(a, b);
        let c = sample_cbe(4, 3.0, &cfg(200, 6)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn mom_one_point_is_deterministic() {
        for k in 1..=3 {
            let s = ArraySpec::new(1, k, 1).unwrap();
            let e = mom_mc(&s, 1.7, &cfg(2_000, 1)).unwrap().estimate;
            assert!((e.mean - f64::from(1 << k)).abs() < 1e-9);
        }
    }

    #[test]
    fn mom_cue_small() {
        let s = ArraySpec::new(2, 2, 1).unwrap();
        let e = mom_mc(&s, 2.0, &cfg(100_000, 2)).unwrap();
        assert!(e.estimate.agrees_with(10.0, 3.0), "{:?}", e.estimate);
        assert!(e.diagnostics.warnings.is_empty(), "{:?}", e.diagnostics);
    }
}
