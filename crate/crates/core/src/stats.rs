//! Small statistics helpers shared by the Monte Carlo estimators.

use serde::{Deserialize, Serialize};

/// Effective sample count below which no error bar is reported.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

/// A Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` when fewer than [`MIN_EFFECTIVE_SAMPLES`] effective samples
    /// back the estimate.
    pub std_error: Option<f64>,
    /// Number of draws averaged.
    pub samples: u64,
    /// `variance / std_error^2`, or `samples` when the variance vanishes.
    pub effective_samples: f64,
}

impl Estimate {
    /// `|mean - value| <= sigmas * se`, with a small absolute floor so that
    /// deterministic integrands (zero variance) compare exactly. Without an
    /// error bar only the floor applies.
    pub fn agrees_with(&self, value: f64, sigmas: f64) -> bool {
        let se = self.std_error.unwrap_or(0.0);
        (self.mean - value).abs() <= sigmas * se + 1e-12 * value.abs().max(1.0)
    }

    /// Combined agreement of two independent estimates.
    pub fn agrees_with_estimate(&self, other: &Estimate, sigmas: f64) -> bool {
        let a = self.std_error.unwrap_or(0.0);
        let b = other.std_error.unwrap_or(0.0);
        let se = (a * a + b * b).sqrt();
        (self.mean - other.mean).abs() <= sigmas * se + 1e-12 * self.mean.abs().max(1.0)
    }
}

/// Mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Estimate from independent draws.
pub fn iid_estimate(xs: &[f64]) -> Estimate {
    let (mean, var) = mean_var(xs);
    let n = xs.len() as f64;
    let se = (var / n).sqrt();
    finish(mean, var, se, xs.len() as u64)
}

/// Batch-means estimate over several chains. Each chain is cut into
/// `batches_per_chain` equal batches (a ragged tail is dropped) and the
/// standard error is taken over all batch means.
pub fn batch_means(chains: &[Vec<f64>], batches_per_chain: usize) -> Estimate {
    let mut means = Vec::new();
    let mut all = Vec::new();
    for chain in chains {
        let size = chain.len() / batches_per_chain.max(1);
        if size == 0 {
            continue;
        }
        for b in chain.chunks_exact(size).take(batches_per_chain) {
            means.push(b.iter().sum::<f64>() / size as f64);
            all.extend_from_slice(b);
        }
    }
    let (mean, var) = mean_var(&all);
    let (_, var_b) = mean_var(&means);
    let se = (var_b / means.len() as f64).sqrt();
    finish(mean, var, se, all.len() as u64)
}

/// Streaming mean and variance (Welford), mergeable across blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Combine two disjoint blocks (Chan et al.).
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> Estimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        let se = (var / self.n as f64).sqrt();
        finish(self.mean, var, se, self.n)
    }
}

fn finish(mean: f64, var: f64, se: f64, samples: u64) -> Estimate {
    let effective_samples = if se > 0.0 {
        var / (se * se)
    } else {
        samples as f64
    };
    let std_error = (effective_samples >= MIN_EFFECTIVE_SAMPLES && se.is_finite()).then_some(se);
    Estimate {
        mean,
        std_error,
        samples,
        effective_samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_draws() {
        let e = iid_estimate(&[2.0; 500]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.std_error, Some(0.0));
        assert!(e.agrees_with(2.0, 3.0));
    }

    #[test]
    fn too_few_samples_hide_error_bar() {
        let e = iid_estimate(&[1.0, 2.0, 3.0]);
        assert_eq!(e.std_error, None);
        assert!(!e.agrees_with(2.5, 3.0));
    }

    #[test]
    fn merged_moments_match_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (e, d) = (a.estimate(), iid_estimate(&xs));
        assert!((e.mean - d.mean).abs() < 1e-12);
        assert!((e.std_error.unwrap() - d.std_error.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn batch_means_of_iid_matches_iid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let a = iid_estimate(&xs);
        let b = batch_means(std::slice::from_ref(&xs), 50);
        assert!((a.mean - b.mean).abs() < 1e-9);
        let (sa, sb) = (a.std_error.unwrap(), b.std_error.unwrap());
        assert!(sb / sa > 0.5 && sb / sa < 2.0, "{sa} {sb}");
    }
}
