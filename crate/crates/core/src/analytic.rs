//! Closed-form evaluation of the performance metrics.
//!
//! Two metrics are computed for the NOMA system and for an OMA baseline in
//! which the users are served in orthogonal half-bandwidth channels:
//!
//! * **Average achievable sum-rate** (bits/s/Hz): the expectation of the
//!   instantaneous sum-rate over all channel gains. Under NOMA the far
//!   user's message must be decodable at both receivers, so its rate is
//!   governed by `g_min = min(g_n, g_f)`.
//! * **Outage probability** against a common per-user target rate. Outage
//!   semantics follow the analytical model of each regime:
//!   * under instantaneous-CSI power control without a peak
//!     ([`ScenarioKind::IntIcsi`]) the system outage is defined as one minus
//!     the product of the two users' marginal decoding probabilities, each
//!     taken over its own realization of the interference link;
//!   * under joint peak/interference control with instantaneous CSI
//!     ([`ScenarioKind::PowIntIcsi`]) the decoding events are evaluated
//!     jointly under the common interference draw that sets the power;
//!   * in the remaining regimes the transmit power is a constant (or a
//!     constant gated by the feedback bit), so the two conventions coincide.
//!
//! Every sum-rate expression here reduces to combinations of Meijer-G
//! functions ([`crate::specfun::meijer_g`]) or exponential integrals; every
//! outage expression reduces to rational/incomplete-gamma terms. The
//! matching quadrature evaluations live in [`crate::oracle`].

use std::f64::consts::LN_2;

use crate::channel::{AntennaConfig, LinkParams, User};
use crate::oracle::{self, QuadratureSpec};
use crate::policy::{scsi_power_level, PowerSplit, Scenario, ScenarioKind, Thresholds};
use crate::specfun::{
    e1_scaled, exp_integral_ei, meijer_g, upper_incomplete_gamma,
    upper_incomplete_gamma_regularized, MeijerGSpec,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Request / result types
// ---------------------------------------------------------------------------

/// Everything needed to evaluate one metric: the operating regime and its
/// constants, the link geometry, the antenna counts, the NOMA power split
/// and the rate-target thresholds.
#[derive(Debug, Clone)]
pub struct MetricRequest {
    pub scenario: Scenario,
    pub params: LinkParams,
    pub antennas: AntennaConfig,
    pub split: PowerSplit,
    pub thresholds: Thresholds,
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Fully closed form (special functions included).
    ClosedForm,
    /// Adaptive quadrature of the defining integrals; used where no closed
    /// form exists.
    Quadrature,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::ClosedForm => write!(f, "closed-form"),
            Method::Quadrature => write!(f, "quadrature"),
        }
    }
}

/// A metric value tagged with the evaluation route that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub method: Method,
}

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

fn factorial(k: u32) -> f64 {
    (2..=k).map(f64::from).product()
}

/// `G^{3,2}_{3,3}(z | -M,-M,1-M; 0,-M,-M)`: the kernel of every average-rate
/// term under reciprocal (instantaneous-CSI) power control.
fn g332(z: f64, m: u32) -> Result<f64> {
    let mf = f64::from(m);
    meijer_g(&MeijerGSpec::new(
        3,
        2,
        vec![-mf, -mf, 1.0 - mf],
        vec![0.0, -mf, -mf],
        z,
    )?)
}

/// `G^{3,1}_{2,3}(w | -M,1-M; 0,-M,-M)`: the kernel of every average-rate
/// term under constant transmit power.
fn g233(w: f64, m: u32) -> Result<f64> {
    let mf = f64::from(m);
    meijer_g(&MeijerGSpec::new(
        3,
        1,
        vec![-mf, 1.0 - mf],
        vec![0.0, -mf, -mf],
        w,
    )?)
}

/// The minimum-gain density is a finite mixture of effective-order gamma
/// terms; rate and outage formulas need the `(order, coefficient)` pairs
/// with coefficient `1 / (Gamma(N_a) k! Omega_a^{N_a} Omega_b^k)`.
fn min_mixture_terms(params: &LinkParams, antennas: &AntennaConfig) -> Vec<(u32, f64)> {
    let mut terms = Vec::new();
    for (a, b) in [(User::Near, User::Far), (User::Far, User::Near)] {
        let na = antennas.count(a);
        let nb = antennas.count(b);
        let oa = params.omega(a);
        let ob = params.omega(b);
        for k in 0..nb {
            let coef = 1.0
                / (factorial(na - 1) * factorial(k) * oa.powi(na as i32) * ob.powi(k as i32));
            terms.push((na + k, coef));
        }
    }
    terms
}

/// Regularized upper incomplete gamma at integer shape: the CCDF of an
/// `N`-stage gain at normalized argument `x`.
fn q_reg(n: u32, x: f64) -> Result<f64> {
    upper_incomplete_gamma_regularized(f64::from(n), x)
}

// ---------------------------------------------------------------------------
// Sum-rate: NOMA
// ---------------------------------------------------------------------------

/// Average NOMA sum-rate under reciprocal power control `P = I / g_p`
/// (no peak): each expectation over a gain ratio becomes a `G332` term.
fn sumrate_noma_reciprocal(req: &MetricRequest, i: f64) -> Result<f64> {
    let p = &req.params;
    let a_n = req.split.near();
    let (omega_n, omega_min, omega_p) = (p.omega(User::Near), p.omega_min(), p.omega_p());
    let n_n = req.antennas.count(User::Near);

    let z1 = omega_p / (omega_n * a_n * i);
    let t1 = z1.powi(n_n as i32) / factorial(n_n - 1) * g332(z1, n_n)?;

    let z_min = omega_p / (omega_min * i);
    let mut t23 = 0.0;
    for (m, coef) in min_mixture_terms(p, &req.antennas) {
        let scale = coef * (omega_p / i).powi(m as i32);
        t23 += scale * (g332(z_min, m)? - a_n.powi(-(m as i32)) * g332(z_min / a_n, m)?);
    }
    Ok((t1 + t23) / LN_2)
}

/// Average NOMA sum-rate at a constant transmit power: `G233` terms.
fn sumrate_noma_const_power(req: &MetricRequest, power: f64) -> Result<f64> {
    let p = &req.params;
    let a_n = req.split.near();
    let (omega_n, omega_min) = (p.omega(User::Near), p.omega_min());
    let n_n = req.antennas.count(User::Near);

    let w1 = 1.0 / (omega_n * a_n * power);
    let t1 = w1.powi(n_n as i32) / factorial(n_n - 1) * g233(w1, n_n)?;

    let w_min = 1.0 / (omega_min * power);
    let mut t23 = 0.0;
    for (m, coef) in min_mixture_terms(p, &req.antennas) {
        let scale = coef / power.powi(m as i32);
        t23 += scale * (g233(w_min, m)? - a_n.powi(-(m as i32)) * g233(w_min / a_n, m)?);
    }
    Ok((t1 + t23) / LN_2)
}

/// The single-antenna rate kernel under clipped reciprocal power control
/// `P = min(P_peak, I / g_p)`:
/// `T(x) = E_{g_p} [ exp(1/(x P)) E1(1/(x P)) ]` in closed form. Written so
/// that no bare `exp(a)` appears (only `e1_scaled` and products with
/// `exp(-b)`), which keeps it finite for extreme parameter ratios.
fn t_kernel(x: f64, i: f64, p_peak: f64, omega_p: f64) -> Result<f64> {
    // The prefactor Omega_p / (Omega_p - x I) has a removable singularity at
    // Omega_p = x I; step around it symmetrically.
    if (omega_p - x * i).abs() < 1e-9 * omega_p {
        let lo = t_kernel(x * (1.0 - 1e-6), i, p_peak, omega_p)?;
        let hi = t_kernel(x * (1.0 + 1e-6), i, p_peak, omega_p)?;
        return Ok(0.5 * (lo + hi));
    }
    let a = 1.0 / (x * p_peak);
    let b = i / (omega_p * p_peak);
    let s = e1_scaled(a)?; // e^a E1(a)
    let exp_mb = (-b).exp();
    let clip_prob = -(-b).exp_m1(); // 1 - e^{-b}
    let ei_mb = exp_integral_ei(-b)?;
    let r = omega_p / (omega_p - x * i);
    Ok(clip_prob * s + ei_mb - r * (ei_mb + exp_mb * s) + exp_mb * s)
}

fn sumrate_noma_peaked_reciprocal_n1(req: &MetricRequest, i: f64, p_peak: f64) -> Result<f64> {
    let p = &req.params;
    let a_n = req.split.near();
    let (omega_n, omega_min, omega_p) = (p.omega(User::Near), p.omega_min(), p.omega_p());
    Ok((t_kernel(a_n * omega_n, i, p_peak, omega_p)?
        + t_kernel(omega_min, i, p_peak, omega_p)?
        - t_kernel(a_n * omega_min, i, p_peak, omega_p)?)
        / LN_2)
}

/// Average achievable NOMA sum-rate for the request's regime.
///
/// All regimes have closed forms except joint peak/interference control with
/// instantaneous CSI and more than one antenna per user, which falls back to
/// the quadrature oracle (reported via [`Method::Quadrature`]).
pub fn sumrate_noma(req: &MetricRequest) -> Result<Evaluation> {
    let i = req.scenario.interference_limit();
    let value = match req.scenario.kind() {
        ScenarioKind::IntIcsi => sumrate_noma_reciprocal(req, i)?,
        ScenarioKind::IntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            );
            sumrate_noma_const_power(req, level)?
        }
        ScenarioKind::PowIntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            )
            .min(req.scenario.peak_power().unwrap());
            sumrate_noma_const_power(req, level)?
        }
        ScenarioKind::PowIntIcsi => {
            let p_peak = req.scenario.peak_power().unwrap();
            if req.antennas.count(User::Near) == 1 && req.antennas.count(User::Far) == 1 {
                sumrate_noma_peaked_reciprocal_n1(req, i, p_peak)?
            } else {
                let value =
                    oracle::sumrate_noma_by_quadrature(req, &QuadratureSpec::default())?;
                return Ok(Evaluation {
                    value,
                    method: Method::Quadrature,
                });
            }
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = req.scenario.peak_power().unwrap();
            let clip_prob = -(-i / (req.params.omega_p() * p_peak)).exp_m1();
            clip_prob * sumrate_noma_const_power(req, p_peak)?
        }
    };
    Ok(Evaluation {
        value,
        method: Method::ClosedForm,
    })
}

// ---------------------------------------------------------------------------
// Sum-rate: OMA baseline
// ---------------------------------------------------------------------------

/// `E[log2(1 + c g)] / 2` summed over both users at constant power uses the
/// same `G233` kernel with the full power coefficient.
fn sumrate_oma_const_power(req: &MetricRequest, power: f64) -> Result<f64> {
    let mut total = 0.0;
    for u in [User::Near, User::Far] {
        let n = req.antennas.count(u);
        let w = 1.0 / (req.params.omega(u) * power);
        total += w.powi(n as i32) / factorial(n - 1) * g233(w, n)?;
    }
    Ok(total / (2.0 * LN_2))
}

fn sumrate_oma_reciprocal(req: &MetricRequest, i: f64) -> Result<f64> {
    let mut total = 0.0;
    for u in [User::Near, User::Far] {
        let n = req.antennas.count(u);
        let z = req.params.omega_p() / (req.params.omega(u) * i);
        total += z.powi(n as i32) / factorial(n - 1) * g332(z, n)?;
    }
    Ok(total / (2.0 * LN_2))
}

/// Average sum-rate of the orthogonal baseline: each user occupies half the
/// bandwidth at the full regime power.
pub fn sumrate_oma(req: &MetricRequest) -> Result<Evaluation> {
    let i = req.scenario.interference_limit();
    let value = match req.scenario.kind() {
        ScenarioKind::IntIcsi => sumrate_oma_reciprocal(req, i)?,
        ScenarioKind::IntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            );
            sumrate_oma_const_power(req, level)?
        }
        ScenarioKind::PowIntScsi => {
            let level = scsi_power_level(
                i,
                req.scenario.outage_tolerance().unwrap(),
                req.params.omega_p(),
            )
            .min(req.scenario.peak_power().unwrap());
            sumrate_oma_const_power(req, level)?
        }
        ScenarioKind::PowIntIcsi => {
            let p_peak = req.scenario.peak_power().unwrap();
            if req.antennas.count(User::Near) == 1 && req.antennas.count(User::Far) == 1 {
                let omega_p = req.params.omega_p();
                (t_kernel(req.params.omega(User::Near), i, p_peak, omega_p)?
                    + t_kernel(req.params.omega(User::Far), i, p_peak, omega_p)?)
                    / (2.0 * LN_2)
            } else {
                let value = oracle::sumrate_oma_by_quadrature(req, &QuadratureSpec::default())?;
                return Ok(Evaluation {
                    value,
                    method: Method::Quadrature,
                });
            }
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = req.scenario.peak_power().unwrap();
            let clip_prob = -(-i / (req.params.omega_p() * p_peak)).exp_m1();
            clip_prob * sumrate_oma_const_power(req, p_peak)?
        }
    };
    Ok(Evaluation {
        value,
        method: Method::ClosedForm,
    })
}

// ---------------------------------------------------------------------------
// Outage probability
// ---------------------------------------------------------------------------

/// Outage under reciprocal power control (no peak): one minus the product
/// of the marginal per-user tail probabilities of the gain ratios.
fn outage_product_reciprocal(
    params: &LinkParams,
    antennas: &AntennaConfig,
    i: f64,
    t_near: f64,
    t_far: f64,
) -> f64 {
    let mut success = 1.0;
    for (u, t) in [(User::Near, t_near), (User::Far, t_far)] {
        let omega = params.omega(u);
        let psi = params.omega_p() * t;
        success *= 1.0 - (psi / (omega * i + psi)).powi(antennas.count(u) as i32);
    }
    1.0 - success
}

/// Outage at a constant transmit power: one minus the product of the
/// per-user gain CCDFs (regularized upper gammas).
fn outage_const_power(
    params: &LinkParams,
    antennas: &AntennaConfig,
    power: f64,
    t_near: f64,
    t_far: f64,
) -> Result<f64> {
    let mut success = 1.0;
    for (u, t) in [(User::Near, t_near), (User::Far, t_far)] {
        success *= q_reg(antennas.count(u), t / (params.omega(u) * power))?;
    }
    Ok(1.0 - success)
}

/// Outage under clipped reciprocal power control, evaluated jointly over the
/// common interference draw: a clipped piece (peak power binds, probability
/// `1 - e^{-I/(Omega_p P_peak)}`) plus the inverted piece, which integrates
/// to a double sum of upper incomplete gammas.
fn outage_joint_peaked(
    params: &LinkParams,
    antennas: &AntennaConfig,
    i: f64,
    p_peak: f64,
    t_near: f64,
    t_far: f64,
) -> Result<f64> {
    let omega_p = params.omega_p();
    let omega_n = params.omega(User::Near);
    let omega_f = params.omega(User::Far);
    let n_n = antennas.count(User::Near);
    let n_f = antennas.count(User::Far);

    let clip_prob = -(-i / (omega_p * p_peak)).exp_m1();
    let x1 = clip_prob
        * q_reg(n_n, t_near / (omega_n * p_peak))?
        * q_reg(n_f, t_far / (omega_f * p_peak))?;

    let s_total = 1.0 / omega_p + t_near / (omega_n * i) + t_far / (omega_f * i);
    let cut = s_total * i / p_peak;
    let mut x2 = 0.0;
    for k in 0..n_f {
        for l in 0..n_n {
            let coef = t_near.powi(l as i32) * t_far.powi(k as i32)
                / (factorial(k)
                    * factorial(l)
                    * omega_n.powi(l as i32)
                    * omega_f.powi(k as i32)
                    * i.powi((k + l) as i32));
            x2 += coef * upper_incomplete_gamma(f64::from(k + l + 1), cut)?
                / s_total.powi((k + l + 1) as i32);
        }
    }
    x2 /= omega_p;
    Ok(1.0 - (x1 + x2))
}

/// Outage with one-bit feedback: the transmitter is silent (certain outage)
/// unless the interference channel admits full power.
fn outage_one_bit(
    params: &LinkParams,
    antennas: &AntennaConfig,
    i: f64,
    p_peak: f64,
    t_near: f64,
    t_far: f64,
) -> Result<f64> {
    let clip_prob = -(-i / (params.omega_p() * p_peak)).exp_m1();
    let success = clip_prob
        * q_reg(antennas.count(User::Near), t_near / (params.omega(User::Near) * p_peak))?
        * q_reg(antennas.count(User::Far), t_far / (params.omega(User::Far) * p_peak))?;
    Ok(1.0 - success)
}

fn outage_dispatch(req: &MetricRequest, t_near: f64, t_far: f64) -> Result<f64> {
    let i = req.scenario.interference_limit();
    let params = &req.params;
    let antennas = &req.antennas;
    match req.scenario.kind() {
        ScenarioKind::IntIcsi => Ok(outage_product_reciprocal(params, antennas, i, t_near, t_far)),
        ScenarioKind::IntScsi => {
            let level =
                scsi_power_level(i, req.scenario.outage_tolerance().unwrap(), params.omega_p());
            outage_const_power(params, antennas, level, t_near, t_far)
        }
        ScenarioKind::PowIntScsi => {
            let level =
                scsi_power_level(i, req.scenario.outage_tolerance().unwrap(), params.omega_p())
                    .min(req.scenario.peak_power().unwrap());
            outage_const_power(params, antennas, level, t_near, t_far)
        }
        ScenarioKind::PowIntIcsi => {
            let p_peak = req.scenario.peak_power().unwrap();
            outage_joint_peaked(params, antennas, i, p_peak, t_near, t_far)
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = req.scenario.peak_power().unwrap();
            outage_one_bit(params, antennas, i, p_peak, t_near, t_far)
        }
    }
}

/// NOMA outage probability. An infeasible power split (far user's SINR
/// saturating below the target) yields certain outage.
pub fn outage_noma(req: &MetricRequest) -> Result<f64> {
    let (Some(xi_n), Some(xi_f)) = (
        req.thresholds.xi(User::Near),
        req.thresholds.xi(User::Far),
    ) else {
        return Ok(1.0);
    };
    outage_dispatch(req, xi_n, xi_f)
}

/// OMA outage probability: both users must clear the half-bandwidth SNR
/// threshold.
pub fn outage_oma(req: &MetricRequest) -> Result<f64> {
    let theta = req.thresholds.theta_oma();
    outage_dispatch(req, theta, theta)
}

/// The outage floor of the peak-limited regimes: the limit of the outage
/// probability as the interference limit grows, where only the peak power
/// binds. Identical for all three peak-limited regimes.
///
/// # Errors
///
/// [`Error::InvalidConfig`] for regimes without a peak power (their outage
/// decays indefinitely instead of flooring).
pub fn outage_floor_powint(req: &MetricRequest) -> Result<f64> {
    let Some(p_peak) = req.scenario.peak_power() else {
        return Err(Error::InvalidConfig(
            "outage floor exists only under a peak power constraint".into(),
        ));
    };
    let (Some(xi_n), Some(xi_f)) = (
        req.thresholds.xi(User::Near),
        req.thresholds.xi(User::Far),
    ) else {
        return Ok(1.0);
    };
    let success = q_reg(
        req.antennas.count(User::Near),
        xi_n / (req.params.omega(User::Near) * p_peak),
    )? * q_reg(
        req.antennas.count(User::Far),
        xi_f / (req.params.omega(User::Far) * p_peak),
    )?;
    Ok(1.0 - success)
}

/// Large-`I` decay order of the outage probability under the unclipped
/// regimes: the outage falls off as `I^-min(N_n, N_f)`.
pub fn outage_decay_order(antennas: &AntennaConfig) -> u32 {
    antennas.count(User::Near).min(antennas.count(User::Far))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
