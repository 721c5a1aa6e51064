//! Norm bounds for the Beurling-Ahlfors transform built from the sharp
//! left-side constant at the dual exponent.

use std::f64::consts::{FRAC_2_PI, PI};

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::laguerre::{cached_q, smallest_zero, Order};
use crate::quadrature::integrate;
use crate::DEFAULT_ZERO_TOL;

const TAU_REL_TOL: f64 = 1e-12;

/// `(1 / 2pi) int_0^{2pi} |cos t|^p dt`, by adaptive quadrature over
/// `[0, pi/2]` using the four-fold symmetry.
pub fn cos_moment(p: f64) -> f64 {
    // the integrand concentrates in a window of width ~ p^(-1/2) at the
    // origin; geometric breakpoints keep the first rule from missing it
    let width = p.max(1.0).sqrt().recip();
    let mut breaks = vec![0.0];
    let mut edge = width;
    while edge < PI / 2.0 {
        breaks.push(edge);
        edge *= 2.0;
    }
    breaks.push(PI / 2.0);
    let total: f64 = breaks
        .windows(2)
        .map(|w| integrate(|t: f64| t.cos().powf(p), w[0], w[1], TAU_REL_TOL * 1e-2, 1e-17 * width, 2000).value)
        .sum();
    FRAC_2_PI * total
}

/// Gamma-ratio form of [`cos_moment`]: `Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2 + 1))`.
pub fn cos_moment_closed_form(p: f64) -> f64 {
    (ln_gamma(0.5 * (p + 1.0)) - ln_gamma(0.5 * p + 1.0)).exp() / PI.sqrt()
}

/// Wallis product `(1 * 3 * ... * (2n-1)) / (2 * 4 * ... * 2n)`, the mean of
/// `cos^{2n}` over a period.
pub fn wallis_product(n: u32) -> f64 {
    (1..=n).map(|k| (2.0 * f64::from(k) - 1.0) / (2.0 * f64::from(k))).product()
}

/// `tau_p = (mean of |cos|^p)^(-1/p)`.
pub fn tau_p(p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("tau_p needs p >= 1, got {p}")));
    }
    let mean = cos_moment(p);
    // the log-gamma difference loses about p * 1e-16 relative accuracy
    debug_assert!(
        ((mean - cos_moment_closed_form(p)) / mean).abs() < 1e-9f64.max(1e-14 * p),
        "quadrature {mean} disagrees with gamma form at p={p}"
    );
    Ok(mean.powf(-1.0 / p))
}

/// `((p + 3) pi / 2)^(1 / (2p))`, an upper bound for `tau_p`.
pub fn tau_upper(p: f64) -> f64 {
    (0.5 * (p + 3.0) * PI).powf(0.5 / p)
}

/// `tau_p z_{p'} / (1 - z_{p'})`.
pub fn ba_bound_chain(p: f64) -> Result<f64> {
    Ok(chain_parts(p)?.2)
}

fn chain_parts(p: f64) -> Result<(f64, f64, f64)> {
    if !(p > 2.0) {
        return Err(Error::InvalidArgument(format!("Beurling-Ahlfors bounds need p > 2, got {p}")));
    }
    let dual = Order::new(p)?.dual();
    let z = smallest_zero(dual, DEFAULT_ZERO_TOL)?.z;
    let tau = tau_p(p)?;
    Ok((z, tau, tau * z / (1.0 - z)))
}

/// `((p + 3) pi / 2)^(1/(2p)) (p - Q) / Q`.
pub fn ba_bound_theorem(p: f64) -> Result<f64> {
    if !(p > 2.0) {
        return Err(Error::InvalidArgument(format!("Beurling-Ahlfors bounds need p > 2, got {p}")));
    }
    let q = cached_q();
    Ok(tau_upper(p) * (p - q) / q)
}

/// `sqrt(2 (p^2 - p))`.
pub fn legacy_sqrt(p: f64) -> f64 {
    (2.0 * (p * p - p)).sqrt()
}

/// `1.575 (p* - 1)` with `p* = max(p, p')`.
pub fn legacy_1575(p: f64) -> f64 {
    let star = p.max(p / (p - 1.0));
    1.575 * (star - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTableRow {
    pub p: f64,
    pub z_pprime: f64,
    pub tau_p: f64,
    pub tau_upper: f64,
    pub bound_chain: f64,
    pub bound_thm: f64,
    pub legacy_sqrt: f64,
    pub legacy_1575: f64,
}

pub const TABLE_COLUMNS: [&str; 8] = [
    "p",
    "z_pprime",
    "tau_p",
    "tau_upper",
    "bound_chain",
    "bound_thm",
    "legacy_sqrt",
    "legacy_1575",
];

impl BoundTableRow {
    pub fn compute(p: f64) -> Result<Self> {
        let (z, tau, chain) = chain_parts(p)?;
        debug_assert!(z < 1.0 - cached_q() / p, "dual zero {z} above 1 - Q/p at p={p}");
        Ok(BoundTableRow {
            p,
            z_pprime: z,
            tau_p: tau,
            tau_upper: tau_upper(p),
            bound_chain: chain,
            bound_thm: ba_bound_theorem(p)?,
            legacy_sqrt: legacy_sqrt(p),
            legacy_1575: legacy_1575(p),
        })
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.p,
            self.z_pprime,
            self.tau_p,
            self.tau_upper,
            self.bound_chain,
            self.bound_thm,
            self.legacy_sqrt,
            self.legacy_1575,
        ]
    }
}

/// One row per exponent, in input order; rows that fail carry their error.
pub fn comparison_table(p_list: &[f64]) -> Vec<Result<BoundTableRow>> {
    p_list.par_iter().map(|&p| BoundTableRow::compute(p)).collect()
}
