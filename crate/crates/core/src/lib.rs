//! Moments of moments of the circular beta ensemble characteristic polynomial.
//!
//! For the CβE on `N` points, the characteristic polynomial
//! `Psi(t) = prod_j (1 - e^{-i(t - theta_j)})` has circle average
//! `Z(q) = (1/2pi) int |Psi(t)|^{2q} dt`, and this crate evaluates
//! `MoM_N(k;q) = E[Z(q)^k]`:
//!
//! * exactly, as a rational number, by a row-transfer DP over constrained
//!   interlacing arrays ([`mom::mom_exact`]) and by direct enumeration of
//!   the unfolded array set ([`mom::mom_exact_j`]);
//! * through Jack polynomial quadrature ([`mom::mom_quadrature`]);
//! * by Metropolis sampling of the ensemble ([`montecarlo::mom_mc`]).
//!
//! [`asymptotics`] covers the large-`N` coefficient `c(k;q)` of
//! `MoM_N ~ c N^{(2/beta)(kq)^2 - (k-1)}`: closed form for `k = 1`,
//! Monte Carlo integrals otherwise, plus the singularity and finiteness
//! analysis that decides when `c` exists.

pub mod arrays;
pub mod asymptotics;
pub mod error;
pub mod jack;
pub mod mom;
pub mod montecarlo;
pub mod param;
pub mod signature;
pub mod stats;
pub mod weights;

pub use arrays::{bijection_s, bijection_s_inv, enumerate_i, enumerate_j, IArray, JArray};
pub use error::{Error, Result};
pub use mom::{mom_exact, mom_exact_j, mom_quadrature, Method, MomOptions, MomResult, MomValue};
pub use param::{parse_rational, ArraySpec, RationalParam};
pub use signature::{enumerate_extensions, extend_n, interlaces, Signature};
pub use weights::{phi, psi, psi_gamma_form, ContinuousPair};
