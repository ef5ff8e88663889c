//! Metric evaluation by adaptive quadrature of the defining integrals.
//!
//! Every metric in [`crate::analytic`] is an expectation over the channel
//! densities of [`crate::channel`]. This module evaluates those
//! expectations directly — average rates as integrals of `ln(1 + snr)`
//! against the gain (or gain-ratio) densities, outage probabilities as
//! integrals of decoding-failure regions — without going through the
//! special-function identities. It serves two purposes:
//!
//! * an independent cross-check of every closed form, and
//! * the evaluation route for the one regime/antenna combination with no
//!   closed form (joint peak/interference control with instantaneous CSI
//!   and multiple antennas).
//!
//! Outage integrands are composed on the failure side
//! (`f_n + (1 - f_n) f_f`) so that small probabilities never come from a
//! `1 - (1 - eps)` cancellation.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use crate::analytic::MetricRequest;
use crate::channel::{cdf_gain, pdf_gain, pdf_gain_min, pdf_ratio, pdf_ratio_min, User};
use crate::policy::{scsi_power_level, ScenarioKind};
use crate::quad;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Quadrature configuration and generic wrappers
// ---------------------------------------------------------------------------

/// Tolerances and budget for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target (the integrator stops at whichever of the two
    /// targets is looser for the current estimate).
    pub rel_tol: f64,
    /// Subdivision budget per integral.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_subdivisions: 512,
        }
    }
}

impl QuadratureSpec {
    /// Tightened tolerances for the inner integral of a nested expectation,
    /// so that inner noise stays below the outer integrator's resolution.
    fn tighter(&self) -> Self {
        QuadratureSpec {
            abs_tol: (self.abs_tol * 1e-2).max(1e-15),
            rel_tol: (self.rel_tol * 1e-2).max(1e-12),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Integrate `f` over the finite interval `[lower, upper]`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    quad::adaptive(f, lower, upper, spec.abs_tol, spec.rel_tol, spec.max_subdivisions)
        .map(|estimate| estimate.value)
}

/// Integrate `f` over `[lower, infinity)`; `scale` is the characteristic
/// width of the integrand's support beyond `lower`.
pub fn integrate_tail(
    f: impl Fn(f64) -> f64,
    lower: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    quad::adaptive_tail(f, lower, scale, spec.abs_tol, spec.rel_tol, spec.max_subdivisions)
        .map(|estimate| estimate.value)
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

const DENSITY_ARGS: &str = "density arguments are non-negative by construction";

/// Exponential density of the interference-link gain.
fn pdf_primary(omega_p: f64, y: f64) -> f64 {
    (-(y / omega_p)).exp() / omega_p
}

/// System failure from per-user failure probabilities.
fn compose_failures(fail_near: f64, fail_far: f64) -> f64 {
    fail_near + (1.0 - fail_near) * fail_far
}

fn gain_scale(req: &MetricRequest, u: User) -> f64 {
    f64::from(req.antennas.count(u)) * req.params.omega(u)
}

fn gain_min_scale(req: &MetricRequest) -> f64 {
    f64::from(req.antennas.count(User::Near) + req.antennas.count(User::Far))
        * req.params.omega_min()
}

/// Average over the clipped reciprocal power law `P = min(P_peak, I/g_p)`
/// of a per-power expectation `inner(P)`: the clipped piece in closed form
/// plus a tail integral over the inverting region.
fn peaked_average<F>(
    req: &MetricRequest,
    i: f64,
    p_peak: f64,
    inner: F,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let omega_p = req.params.omega_p();
    let y_star = i / p_peak;
    let clip_prob = -(-y_star / omega_p).exp_m1();
    let at_peak = inner(p_peak)?;
    let poison: RefCell<Option<Error>> = RefCell::new(None);
    let tail = integrate_tail(
        |y| {
            if poison.borrow().is_some() {
                return 0.0;
            }
            match inner(i / y) {
                Ok(value) => pdf_primary(omega_p, y) * value,
                Err(e) => {
                    *poison.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        y_star,
        omega_p,
        spec,
    )?;
    if let Some(e) = poison.into_inner() {
        return Err(e);
    }
    Ok(clip_prob * at_peak + tail)
}

// ---------------------------------------------------------------------------
// Average sum-rate
// ---------------------------------------------------------------------------

/// NOMA sum-rate at a fixed power: `E[ln(1 + a_n P g_n)]` plus
/// `E[ln(1 + P g_min) - ln(1 + a_n P g_min)]`, integrated against the gain
/// densities.
fn sumrate_noma_fixed_power(req: &MetricRequest, power: f64, spec: &QuadratureSpec) -> Result<f64> {
    let a_n = req.split.near();
    let near = integrate_tail(
        |g| {
            (a_n * power * g).ln_1p()
                * pdf_gain(&req.params, &req.antennas, User::Near, g).expect(DENSITY_ARGS)
        },
        0.0,
        gain_scale(req, User::Near),
        spec,
    )?;
    let far = integrate_tail(
        |g| {
            ((power * g).ln_1p() - (a_n * power * g).ln_1p())
                * pdf_gain_min(&req.params, &req.antennas, g).expect(DENSITY_ARGS)
        },
        0.0,
        gain_min_scale(req),
        spec,
    )?;
    Ok((near + far) / LN_2)
}

/// NOMA sum-rate under unclipped reciprocal power control: the same
/// expectations in terms of the gain ratios `X_u = g_u / g_p`.
fn sumrate_noma_reciprocal(req: &MetricRequest, i: f64, spec: &QuadratureSpec) -> Result<f64> {
    let a_n = req.split.near();
    let omega_p = req.params.omega_p();
    let near = integrate_tail(
        |x| {
            (a_n * i * x).ln_1p()
                * pdf_ratio(&req.params, &req.antennas, User::Near, x).expect(DENSITY_ARGS)
        },
        0.0,
        gain_scale(req, User::Near) / omega_p,
        spec,
    )?;
    let far = integrate_tail(
        |x| {
            ((i * x).ln_1p() - (a_n * i * x).ln_1p())
                * pdf_ratio_min(&req.params, &req.antennas, x).expect(DENSITY_ARGS)
        },
        0.0,
        gain_min_scale(req) / omega_p,
        spec,
    )?;
    Ok((near + far) / LN_2)
}

/// OMA sum-rate at a fixed power: half-bandwidth single-user rates.
fn sumrate_oma_fixed_power(req: &MetricRequest, power: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut total = 0.0;
    for u in [User::Near, User::Far] {
        total += integrate_tail(
            |g| {
                (power * g).ln_1p()
                    * pdf_gain(&req.params, &req.antennas, u, g).expect(DENSITY_ARGS)
            },
            0.0,
            gain_scale(req, u),
            spec,
        )?;
    }
    Ok(total / (2.0 * LN_2))
}

fn sumrate_oma_reciprocal(req: &MetricRequest, i: f64, spec: &QuadratureSpec) -> Result<f64> {
    let omega_p = req.params.omega_p();
    let mut total = 0.0;
    for u in [User::Near, User::Far] {
        total += integrate_tail(
            |x| {
                (i * x).ln_1p()
                    * pdf_ratio(&req.params, &req.antennas, u, x).expect(DENSITY_ARGS)
            },
            0.0,
            gain_scale(req, u) / omega_p,
            spec,
        )?;
    }
    Ok(total / (2.0 * LN_2))
}

fn clip_probability(req: &MetricRequest, i: f64, p_peak: f64) -> f64 {
    -(-i / (req.params.omega_p() * p_peak)).exp_m1()
}

/// Average NOMA sum-rate by quadrature.
pub fn sumrate_noma_by_quadrature(req: &MetricRequest, spec: &QuadratureSpec) -> Result<f64> {
    let i = req.scenario.interference_limit();
    match req.scenario.kind() {
        ScenarioKind::IntIcsi => sumrate_noma_reciprocal(req, i, spec),
        ScenarioKind::IntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            );
            sumrate_noma_fixed_power(req, level, spec)
        }
        ScenarioKind::PowIntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            )
            .min(req.scenario.peak_power().unwrap());
            sumrate_noma_fixed_power(req, level, spec)
        }
        ScenarioKind::PowIntIcsi => {
            let p_peak = req.scenario.peak_power().unwrap();
            let inner_spec = spec.tighter();
            peaked_average(
                req,
                i,
                p_peak,
                |p| sumrate_noma_fixed_power(req, p, &inner_spec),
                spec,
            )
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = req.scenario.peak_power().unwrap();
            Ok(clip_probability(req, i, p_peak) * sumrate_noma_fixed_power(req, p_peak, spec)?)
        }
    }
}

/// Average OMA sum-rate by quadrature.
pub fn sumrate_oma_by_quadrature(req: &MetricRequest, spec: &QuadratureSpec) -> Result<f64> {
    let i = req.scenario.interference_limit();
    match req.scenario.kind() {
        ScenarioKind::IntIcsi => sumrate_oma_reciprocal(req, i, spec),
        ScenarioKind::IntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            );
            sumrate_oma_fixed_power(req, level, spec)
        }
        ScenarioKind::PowIntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            )
            .min(req.scenario.peak_power().unwrap());
            sumrate_oma_fixed_power(req, level, spec)
        }
        ScenarioKind::PowIntIcsi => {
            let p_peak = req.scenario.peak_power().unwrap();
            let inner_spec = spec.tighter();
            peaked_average(
                req,
                i,
                p_peak,
                |p| sumrate_oma_fixed_power(req, p, &inner_spec),
                spec,
            )
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = req.scenario.peak_power().unwrap();
            Ok(clip_probability(req, i, p_peak) * sumrate_oma_fixed_power(req, p_peak, spec)?)
        }
    }
}

// ---------------------------------------------------------------------------
// Outage probability
// ---------------------------------------------------------------------------

/// Failure probability of one user at a fixed power: the lower tail of its
/// gain density up to `threshold / power`.
fn failure_fixed_power(
    req: &MetricRequest,
    u: User,
    power: f64,
    threshold: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate(
        |g| pdf_gain(&req.params, &req.antennas, u, g).expect(DENSITY_ARGS),
        0.0,
        threshold / power,
        spec,
    )
}

/// Marginal failure probability of one user under unclipped reciprocal
/// power control, averaged over that user's own interference realization.
fn failure_reciprocal_marginal(
    req: &MetricRequest,
    u: User,
    i: f64,
    threshold: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let omega_p = req.params.omega_p();
    integrate_tail(
        |y| {
            pdf_primary(omega_p, y)
                * cdf_gain(&req.params, &req.antennas, u, threshold * y / i).expect(DENSITY_ARGS)
        },
        0.0,
        omega_p,
        spec,
    )
}

fn outage_by_quadrature(
    req: &MetricRequest,
    t_near: f64,
    t_far: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let i = req.scenario.interference_limit();
    match req.scenario.kind() {
        ScenarioKind::IntIcsi => {
            // Marginal per-user decoding events: each user's outage is
            // averaged over its own interference draw, then composed.
            let fail_n = failure_reciprocal_marginal(req, User::Near, i, t_near, spec)?;
            let fail_f = failure_reciprocal_marginal(req, User::Far, i, t_far, spec)?;
            Ok(compose_failures(fail_n, fail_f))
        }
        ScenarioKind::IntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            );
            let fail_n = failure_fixed_power(req, User::Near, level, t_near, spec)?;
            let fail_f = failure_fixed_power(req, User::Far, level, t_far, spec)?;
            Ok(compose_failures(fail_n, fail_f))
        }
        ScenarioKind::PowIntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            )
            .min(req.scenario.peak_power().unwrap());
            let fail_n = failure_fixed_power(req, User::Near, level, t_near, spec)?;
            let fail_f = failure_fixed_power(req, User::Far, level, t_far, spec)?;
            Ok(compose_failures(fail_n, fail_f))
        }
        ScenarioKind::PowIntIcsi => {
            // Joint decoding events under the common interference draw that
            // sets the power; the inner failure probabilities use the exact
            // gain CDFs, the averaging over the draw is numerical.
            let p_peak = req.scenario.peak_power().unwrap();
            peaked_average(
                req,
                i,
                p_peak,
                |p| {
                    let fail_n =
                        cdf_gain(&req.params, &req.antennas, User::Near, t_near / p)?;
                    let fail_f = cdf_gain(&req.params, &req.antennas, User::Far, t_far / p)?;
                    Ok(compose_failures(fail_n, fail_f))
                },
                spec,
            )
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = req.scenario.peak_power().unwrap();
            let transmit_prob = clip_probability(req, i, p_peak);
            let fail_n = failure_fixed_power(req, User::Near, p_peak, t_near, spec)?;
            let fail_f = failure_fixed_power(req, User::Far, p_peak, t_far, spec)?;
            Ok((1.0 - transmit_prob) + transmit_prob * compose_failures(fail_n, fail_f))
        }
    }
}

/// NOMA outage probability by quadrature (certain outage for an infeasible
/// power split, as in the closed forms).
pub fn outage_noma_by_quadrature(req: &MetricRequest, spec: &QuadratureSpec) -> Result<f64> {
    let (Some(xi_n), Some(xi_f)) = (
        req.thresholds.xi(User::Near),
        req.thresholds.xi(User::Far),
    ) else {
        return Ok(1.0);
    };
    outage_by_quadrature(req, xi_n, xi_f, spec)
}

/// OMA outage probability by quadrature.
pub fn outage_oma_by_quadrature(req: &MetricRequest, spec: &QuadratureSpec) -> Result<f64> {
    let theta = req.thresholds.theta_oma();
    outage_by_quadrature(req, theta, theta, spec)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
