//! Outage-minimizing NOMA power allocation.
//!
//! For single-antenna users the minimizer of the NOMA outage probability
//! over the near user's power fraction `a_n` has a closed form in every
//! regime except joint peak/interference control with instantaneous CSI:
//!
//! * under unclipped reciprocal power control it depends on the
//!   interference limit (tighter limits push power toward the far user);
//! * at a constant transmit power (statistical-CSI and one-bit regimes) the
//!   per-user failure exponents add, so the minimizer is independent of the
//!   power level — and hence of the interference limit, the tolerance and
//!   the peak.
//!
//! The numerical route minimizes the exact outage expression of
//! [`crate::analytic::outage_noma`] for any regime and antenna counts: a
//! coarse scan (including the kink where the near user's binding threshold
//! switches) brackets the optimum, then golden-section search refines it.

use crate::analytic::{self, MetricRequest};
use crate::channel::{AntennaConfig, LinkParams, User};
use crate::policy::{feasible_near_fraction_bound, PowerSplit, Scenario, ScenarioKind, Thresholds};
use crate::{Error, Result};

/// Result of the numerical allocation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    /// Minimizing near-user power fraction.
    pub a_n_star: f64,
    /// NOMA outage probability at the minimizer.
    pub outage_at_optimum: f64,
}

// ---------------------------------------------------------------------------
// Closed forms (single-antenna users)
// ---------------------------------------------------------------------------

/// Minimizer at a constant transmit power: independent of the power level.
fn optimal_fraction_const_power(theta: f64, omega_n: f64, omega_f: f64) -> f64 {
    let den = (1.0 + theta) * omega_f - omega_n;
    if den.abs() < 1e-12 * omega_n.max(omega_f) {
        // Removable degeneracy of the parametrization.
        return 1.0 / (2.0 * (1.0 + theta));
    }
    omega_f / den - (omega_n * omega_f * (1.0 + theta)).sqrt() / ((1.0 + theta) * den)
}

/// Minimizer under unclipped reciprocal power control.
fn optimal_fraction_reciprocal(
    i: f64,
    theta: f64,
    omega_n: f64,
    omega_f: f64,
    omega_p: f64,
) -> f64 {
    let den = i * ((1.0 + theta) * omega_f - omega_n);
    if den.abs() < 1e-12 * i * omega_n.max(omega_f) {
        // Removable degeneracy; step around it symmetrically.
        let lo = optimal_fraction_reciprocal(i, theta, omega_n, omega_f * (1.0 - 1e-9), omega_p);
        let hi = optimal_fraction_reciprocal(i, theta, omega_n, omega_f * (1.0 + 1e-9), omega_p);
        return 0.5 * (lo + hi);
    }
    let u = i * omega_f + omega_p * theta;
    let v = i * omega_n + omega_p * theta * (1.0 + theta);
    u / den - ((1.0 + theta) * u * v).sqrt() / ((1.0 + theta) * den)
}

/// Closed-form outage-minimizing near-user power fraction.
///
/// # Errors
///
/// [`Error::InvalidConfig`] unless both users have a single antenna, and
/// for the joint peak/interference instantaneous-CSI regime, which has no
/// closed-form minimizer (use [`optimal_near_fraction_numeric`]).
pub fn optimal_near_fraction_closed(
    scenario: &Scenario,
    params: &LinkParams,
    antennas: &AntennaConfig,
    rate_target: f64,
) -> Result<f64> {
    if antennas.count(User::Near) != 1 || antennas.count(User::Far) != 1 {
        return Err(Error::InvalidConfig(
            "closed-form power allocation requires single-antenna users".into(),
        ));
    }
    if !(rate_target.is_finite() && rate_target > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "rate target must be positive and finite, got {rate_target}"
        )));
    }
    let theta = rate_target.exp2() - 1.0;
    let omega_n = params.omega(User::Near);
    let omega_f = params.omega(User::Far);
    match scenario.kind() {
        ScenarioKind::IntIcsi => Ok(optimal_fraction_reciprocal(
            scenario.interference_limit(),
            theta,
            omega_n,
            omega_f,
            params.omega_p(),
        )),
        ScenarioKind::IntScsi | ScenarioKind::PowIntScsi | ScenarioKind::PowIntOneBit => {
            Ok(optimal_fraction_const_power(theta, omega_n, omega_f))
        }
        ScenarioKind::PowIntIcsi => Err(Error::InvalidConfig(
            "no closed-form power allocation under a joint peak/interference \
             constraint with instantaneous CSI"
                .into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Numerical search
// ---------------------------------------------------------------------------

fn golden_min(
    mut lo: f64,
    mut hi: f64,
    f: &impl Fn(f64) -> Result<f64>,
    tol: f64,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outage-minimizing near-user power fraction by direct minimization of the
/// outage probability; works for every regime and antenna configuration.
pub fn optimal_near_fraction_numeric(
    scenario: &Scenario,
    params: &LinkParams,
    antennas: &AntennaConfig,
    rate_target: f64,
) -> Result<AllocationResult> {
    let upper = feasible_near_fraction_bound(rate_target);
    let theta = rate_target.exp2() - 1.0;
    let objective = |a_n: f64| -> Result<f64> {
        let split = PowerSplit::from_near_fraction(a_n)?;
        let thresholds = Thresholds::from_rate_target(rate_target, &split)?;
        let req = MetricRequest {
            scenario: scenario.clone(),
            params: params.clone(),
            antennas: *antennas,
            split,
            thresholds,
        };
        analytic::outage_noma(&req)
    };

    // Coarse scan of the feasible interval (0, 2^-r), including the kink
    // where the near user's binding threshold switches.
    let mut candidates: Vec<f64> = (1..=64).map(|k| upper * f64::from(k) / 65.0).collect();
    let kink = 1.0 / (2.0 + theta);
    if kink < upper {
        candidates.push(kink);
    }
    candidates.sort_by(f64::total_cmp);

    let mut best = 0usize;
    let mut best_value = f64::INFINITY;
    for (idx, &a_n) in candidates.iter().enumerate() {
        let value = objective(a_n)?;
        if value < best_value {
            best_value = value;
            best = idx;
        }
    }
    let lo = if best == 0 {
        upper * 1e-6
    } else {
        candidates[best - 1]
    };
    let hi = if best + 1 == candidates.len() {
        upper * (1.0 - 1e-9)
    } else {
        candidates[best + 1]
    };
    let a_n_star = golden_min(lo, hi, &objective, 1e-9)?;
    Ok(AllocationResult {
        a_n_star,
        outage_at_optimum: objective(a_n_star)?,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
