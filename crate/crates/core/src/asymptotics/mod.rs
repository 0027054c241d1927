//! Large-`N` behaviour: `MoM_N(k;q) ~ c(k;q) N^{(2/beta)(kq)^2 - (k-1)}`.

mod coeff;
mod finiteness;
mod ratio;
mod singularity;

use num_bigint::BigInt;
use num_rational::BigRational;
use statrs::function::gamma::ln_gamma;

pub use coeff::{
    coeff_general, coeff_k1, coeff_k1_integral, coeff_k2, coeff_volume, CoeffEstimate,
    ContinuousArray, McBudget, MC_BLOCKS, MIN_HIT_RATE,
};
pub use finiteness::{finiteness_domain, FinitenessReport, FinitenessStatus, Interval};
pub use ratio::{asymptotic_ratio, fit_slope, ln_rational, RatioMethod, RatioRow, RatioTable};
pub use singularity::{
    singularity_order, singularity_order_at, unit_order, SingularOrder, SingularPoint,
};

use crate::param::RationalParam;

/// `(2/beta)(kq)^2 - (k-1)`.
pub fn exponent(k: u32, q: u32, beta: f64) -> f64 {
    let kq = f64::from(k) * f64::from(q);
    2.0 / beta * kq * kq - (f64::from(k) - 1.0)
}

/// [`exponent`] in exact arithmetic.
pub fn exponent_exact(k: u32, q: u32, delta: &RationalParam) -> BigRational {
    let kq = BigInt::from(k) * BigInt::from(q);
    delta.delta() * BigRational::from_integer(&kq * &kq)
        - BigRational::from_integer(BigInt::from(k) - 1)
}

/// `ln [Gamma(t)^{q^2} prod_{j=1}^q Gamma(tj) / Gamma(t(q+j))]`, non-increasing
/// in `t > 0`.
pub fn gamma_map_ln(t: f64, q: u32) -> f64 {
    let qf = f64::from(q);
    qf * qf * ln_gamma(t)
        + (1..=q)
            .map(|j| ln_gamma(t * f64::from(j)) - ln_gamma(t * f64::from(q + j)))
            .sum::<f64>()
}

/// Upper bound on `c^(beta)(k;q)` from `c^(beta')(k;q)` for `beta <= beta'`:
/// `[Gamma(2/beta') / Gamma(2/beta)]^{(kq)^2} c^(beta')`.
pub fn comparison_bound(k: u32, q: u32, beta: f64, beta_prime: f64, c_prime: f64) -> f64 {
    let kq = f64::from(k) * f64::from(q);
    (kq * kq * (ln_gamma(2.0 / beta_prime) - ln_gamma(2.0 / beta))).exp() * c_prime
}
