//! Spectrum-sharing operating regimes and the power decisions they induce.
//!
//! The secondary transmitter must protect the primary receiver. Five regimes
//! are modelled, differing in what the transmitter knows about the
//! interference channel `g_p` and in whether its own amplifier imposes a peak
//! power:
//!
//! * [`ScenarioKind::IntIcsi`] — interference limit only, instantaneous
//!   knowledge of `g_p`: transmit at `I / g_p`.
//! * [`ScenarioKind::IntScsi`] — interference limit only, statistical
//!   knowledge: the largest constant power keeping the primary outage
//!   probability (of the interference constraint) at most `delta`.
//! * [`ScenarioKind::PowIntIcsi`] — peak power and interference limit,
//!   instantaneous knowledge: `min(P_peak, I / g_p)`.
//! * [`ScenarioKind::PowIntScsi`] — peak power and interference limit,
//!   statistical knowledge: the constant-power rule clipped at `P_peak`.
//! * [`ScenarioKind::PowIntOneBit`] — peak power and a single feedback bit
//!   telling whether `g_p` is below `I / P_peak`: transmit at `P_peak` when
//!   allowed, stay silent otherwise.
//!
//! This module also carries the NOMA power split between the two users and
//! the SINR thresholds implied by a per-user rate target.

use crate::channel::{LinkParams, User};
use crate::{Error, Result};

/// Stand-in for "no power limit" when inverting a near-zero `g_p` under
/// instantaneous CSI: the transmit power is capped here so that downstream
/// arithmetic stays finite.
pub const ICSI_POWER_CAP: f64 = 1e12;

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// The five operating regimes. See the module docs for definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    IntIcsi,
    IntScsi,
    PowIntIcsi,
    PowIntScsi,
    PowIntOneBit,
}

/// A fully parameterized operating regime: which constraints bind and the
/// constants they need (interference limit `I`, peak power, outage tolerance
/// `delta` of the interference constraint under statistical CSI).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    kind: ScenarioKind,
    interference_limit: f64,
    peak_power: Option<f64>,
    outage_tolerance: Option<f64>,
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "{what} must be finite and positive, got {value}"
        )));
    }
    Ok(())
}

impl Scenario {
    /// Interference limit only, instantaneous CSI of the primary link.
    pub fn int_icsi(interference_limit: f64) -> Result<Self> {
        check_positive(interference_limit, "interference limit")?;
        Ok(Scenario {
            kind: ScenarioKind::IntIcsi,
            interference_limit,
            peak_power: None,
            outage_tolerance: None,
        })
    }

    /// Interference limit only, statistical CSI with constraint-outage
    /// tolerance `delta` in (0, 1).
    pub fn int_scsi(interference_limit: f64, delta: f64) -> Result<Self> {
        check_positive(interference_limit, "interference limit")?;
        check_outage_tolerance(delta)?;
        Ok(Scenario {
            kind: ScenarioKind::IntScsi,
            interference_limit,
            peak_power: None,
            outage_tolerance: Some(delta),
        })
    }

    /// Peak power plus interference limit, instantaneous CSI.
    pub fn pow_int_icsi(interference_limit: f64, peak_power: f64) -> Result<Self> {
        check_positive(interference_limit, "interference limit")?;
        check_positive(peak_power, "peak power")?;
        Ok(Scenario {
            kind: ScenarioKind::PowIntIcsi,
            interference_limit,
            peak_power: Some(peak_power),
            outage_tolerance: None,
        })
    }

    /// Peak power plus interference limit, statistical CSI.
    pub fn pow_int_scsi(interference_limit: f64, delta: f64, peak_power: f64) -> Result<Self> {
        check_positive(interference_limit, "interference limit")?;
        check_outage_tolerance(delta)?;
        check_positive(peak_power, "peak power")?;
        Ok(Scenario {
            kind: ScenarioKind::PowIntScsi,
            interference_limit,
            peak_power: Some(peak_power),
            outage_tolerance: Some(delta),
        })
    }

    /// Peak power plus a one-bit indication of whether the interference
    /// constraint admits full-power transmission.
    pub fn pow_int_one_bit(interference_limit: f64, peak_power: f64) -> Result<Self> {
        check_positive(interference_limit, "interference limit")?;
        check_positive(peak_power, "peak power")?;
        Ok(Scenario {
            kind: ScenarioKind::PowIntOneBit,
            interference_limit,
            peak_power: Some(peak_power),
            outage_tolerance: None,
        })
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn interference_limit(&self) -> f64 {
        self.interference_limit
    }

    pub fn peak_power(&self) -> Option<f64> {
        self.peak_power
    }

    pub fn outage_tolerance(&self) -> Option<f64> {
        self.outage_tolerance
    }

    /// Return a copy with a different interference limit (sweep helper).
    pub fn with_interference_limit(&self, interference_limit: f64) -> Result<Self> {
        check_positive(interference_limit, "interference limit")?;
        Ok(Scenario {
            interference_limit,
            ..self.clone()
        })
    }
}

fn check_outage_tolerance(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "constraint outage tolerance must lie strictly in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// The constant power level used under statistical CSI: the largest `P` with
/// `Pr(g_p P > I) <= delta` for exponential `g_p`, namely
/// `-I / (Omega_p ln delta)`.
pub fn scsi_power_level(interference_limit: f64, delta: f64, omega_p: f64) -> f64 {
    -interference_limit / (omega_p * delta.ln())
}

/// Instantaneous transmit power for a given draw of the primary-link gain.
/// `g_p` is ignored by the statistical-CSI regimes and only compared against
/// the feedback threshold `I / P_peak` in the one-bit regime.
pub fn transmit_power(scenario: &Scenario, params: &LinkParams, g_p: f64) -> f64 {
    debug_assert!(g_p >= 0.0, "channel gains are non-negative");
    let i = scenario.interference_limit;
    match scenario.kind {
        ScenarioKind::IntIcsi => (i / g_p).min(ICSI_POWER_CAP),
        ScenarioKind::IntScsi => {
            scsi_power_level(i, scenario.outage_tolerance.unwrap(), params.omega_p())
        }
        ScenarioKind::PowIntIcsi => (i / g_p).min(scenario.peak_power.unwrap()),
        ScenarioKind::PowIntScsi => {
            let p_peak = scenario.peak_power.unwrap();
            scsi_power_level(i, scenario.outage_tolerance.unwrap(), params.omega_p()).min(p_peak)
        }
        ScenarioKind::PowIntOneBit => {
            let p_peak = scenario.peak_power.unwrap();
            if g_p <= i / p_peak {
                p_peak
            } else {
                0.0
            }
        }
    }
}

// ---------------------------------------------------------------------------
// NOMA power split and rate thresholds
// ---------------------------------------------------------------------------

/// Fractions of the transmit power assigned to the near and far user's
/// superposed messages. By NOMA convention the far user should receive the
/// larger share (`a_n < 1/2`); splits violating it are still representable —
/// they simply make the far user's rate target unreachable, which the metric
/// layer reports as certain outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    a_n: f64,
}

impl PowerSplit {
    /// # Errors
    ///
    /// [`Error::InvalidConfig`] unless `a_n` lies strictly in (0, 1).
    pub fn from_near_fraction(a_n: f64) -> Result<Self> {
        if !a_n.is_finite() || a_n <= 0.0 || a_n >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "near-user power fraction must lie strictly in (0, 1), got {a_n}"
            )));
        }
        Ok(PowerSplit { a_n })
    }

    pub fn near(&self) -> f64 {
        self.a_n
    }

    pub fn far(&self) -> f64 {
        1.0 - self.a_n
    }
}

/// SINR thresholds implied by a common per-user target rate of `r`
/// bits/s/Hz.
///
/// Decoding a message of rate `r` needs SINR at least `theta = 2^r - 1`
/// under NOMA (full-band transmission) and `theta_oma = 2^{2r} - 1` under
/// the half-band OMA baseline. The received-power thresholds `xi_n`, `xi_f`
/// translate the SINR conditions into conditions on `g P`: the far user's
/// message is decodable (at either user) iff the relevant `g P` exceeds
/// `xi_f = theta / (a_f - a_n theta)`, and the near user decodes both its
/// SIC stage and its own message iff `g_n P >= xi_n = max(xi_f, theta/a_n)`.
/// When `a_f <= a_n theta`, the far user's SINR saturates below `theta` and
/// no power makes the targets reachable; the thresholds are then absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    rate_target: f64,
    theta: f64,
    theta_oma: f64,
    xi: Option<(f64, f64)>, // (xi_n, xi_f)
}

impl Thresholds {
    /// # Errors
    ///
    /// [`Error::InvalidConfig`] unless `rate_target` is finite and positive.
    pub fn from_rate_target(rate_target: f64, split: &PowerSplit) -> Result<Self> {
        check_positive(rate_target, "rate target")?;
        let theta = (2f64).powf(rate_target) - 1.0;
        let theta_oma = (2f64).powf(2.0 * rate_target) - 1.0;
        let denom = split.far() - split.near() * theta;
        let xi = if denom > 0.0 {
            let xi_f = theta / denom;
            let xi_n = xi_f.max(theta / split.near());
            Some((xi_n, xi_f))
        } else {
            None
        };
        Ok(Thresholds {
            rate_target,
            theta,
            theta_oma,
            xi,
        })
    }

    pub fn rate_target(&self) -> f64 {
        self.rate_target
    }

    /// NOMA SINR threshold `2^r - 1`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// OMA SINR threshold `2^{2r} - 1` (half the bandwidth per user).
    pub fn theta_oma(&self) -> f64 {
        self.theta_oma
    }

    /// Whether the power split can meet the rate target at all.
    pub fn is_feasible(&self) -> bool {
        self.xi.is_some()
    }

    /// Received-power threshold for the given user (`None` if the split is
    /// infeasible).
    pub fn xi(&self, u: User) -> Option<f64> {
        self.xi.map(|(xi_n, xi_f)| match u {
            User::Near => xi_n,
            User::Far => xi_f,
        })
    }
}

/// Largest near-user power fraction for which a rate target `r` is
/// reachable: `a_n < 1 / (1 + theta) = 2^{-r}`.
pub fn feasible_near_fraction_bound(rate_target: f64) -> f64 {
    (2f64).powf(-rate_target)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkParams;

    fn default_params() -> LinkParams {
        LinkParams::from_distances(30.0, 100.0, 200.0, 2.0).unwrap()
    }

    #[test]
    fn scenario_constructors_validate() {
        assert!(Scenario::int_icsi(0.0).is_err());
        assert!(Scenario::int_icsi(f64::INFINITY).is_err());
        assert!(Scenario::int_scsi(1.0, 0.0).is_err());
        assert!(Scenario::int_scsi(1.0, 1.0).is_err());
        assert!(Scenario::pow_int_icsi(1.0, -3.0).is_err());
        assert!(Scenario::pow_int_scsi(1.0, 0.1, 0.0).is_err());
        assert!(Scenario::pow_int_one_bit(-1.0, 1e4).is_err());

        let s = Scenario::pow_int_scsi(10.0, 0.1, 1e5).unwrap();
        assert_eq!(s.kind(), ScenarioKind::PowIntScsi);
        assert_eq!(s.interference_limit(), 10.0);
        assert_eq!(s.peak_power(), Some(1e5));
        assert_eq!(s.outage_tolerance(), Some(0.1));
        let swept = s.with_interference_limit(100.0).unwrap();
        assert_eq!(swept.interference_limit(), 100.0);
        assert_eq!(swept.peak_power(), Some(1e5));
    }

    #[test]
    fn instantaneous_power_inverts_the_interference_channel() {
        let p = default_params();
        let s = Scenario::int_icsi(10.0).unwrap();
        assert_eq!(transmit_power(&s, &p, 1e-4), 1e5);
        assert_eq!(transmit_power(&s, &p, 2e-3), 5e3);
        // near-zero gain hits the numeric cap instead of overflowing
        assert_eq!(transmit_power(&s, &p, 0.0), ICSI_POWER_CAP);
        assert_eq!(transmit_power(&s, &p, 1e-300), ICSI_POWER_CAP);
    }

    #[test]
    fn statistical_power_is_constant_and_meets_tolerance() {
        let p = default_params();
        let s = Scenario::int_scsi(1.0, 0.1).unwrap();
        let level = transmit_power(&s, &p, 123.456);
        assert!((level - 17371.779276130073).abs() < 1e-9 * level);
        assert_eq!(level, transmit_power(&s, &p, 1e-9), "must not depend on g_p");
        // Pr(g_p * P > I) = exp(-I / (P * omega_p)) = delta exactly.
        let violation = (-s.interference_limit() / (level * p.omega_p())).exp();
        assert!((violation - 0.1).abs() < 1e-12);
        // Ten times the interference budget buys ten times the power.
        let s10 = Scenario::int_scsi(10.0, 0.1).unwrap();
        let level10 = transmit_power(&s10, &p, 1.0);
        assert!((level10 / level - 10.0).abs() < 1e-13);
    }

    #[test]
    fn peak_limited_regimes_clip_at_the_peak() {
        let p = default_params();
        let p_peak = 10f64.powf(4.5);
        let s = Scenario::pow_int_icsi(10.0, p_peak).unwrap();
        let crossover = 10.0 / p_peak;
        assert_eq!(transmit_power(&s, &p, crossover * 2.0), p_peak / 2.0);
        assert_eq!(transmit_power(&s, &p, crossover), p_peak);
        assert_eq!(transmit_power(&s, &p, crossover * 0.5), p_peak);
        assert_eq!(transmit_power(&s, &p, 0.0), p_peak);

        // Statistical variant: the clip binds iff the constant level
        // (17371.8 at I = 1, delta = 0.1) exceeds the peak.
        let s = Scenario::pow_int_scsi(1.0, 0.1, 1e4).unwrap();
        assert_eq!(transmit_power(&s, &p, 1.0), 1e4);
        let s = Scenario::pow_int_scsi(1.0, 0.1, 1e5).unwrap();
        assert!((transmit_power(&s, &p, 1.0) - 17371.779276130073).abs() < 1e-6);
    }

    #[test]
    fn one_bit_feedback_gates_full_power() {
        let p = default_params();
        let p_peak = 10f64.powf(4.5);
        let s = Scenario::pow_int_one_bit(10.0, p_peak).unwrap();
        let tau = 0.00031622776601683794; // I / P_peak
        assert_eq!(transmit_power(&s, &p, tau * 0.999), p_peak);
        assert_eq!(transmit_power(&s, &p, tau), p_peak);
        assert_eq!(transmit_power(&s, &p, tau * 1.001), 0.0);
    }

    #[test]
    fn power_split_bounds() {
        assert!(PowerSplit::from_near_fraction(0.0).is_err());
        assert!(PowerSplit::from_near_fraction(1.0).is_err());
        assert!(PowerSplit::from_near_fraction(-0.2).is_err());
        assert!(PowerSplit::from_near_fraction(f64::NAN).is_err());
        let split = PowerSplit::from_near_fraction(0.2).unwrap();
        assert_eq!(split.near(), 0.2);
        assert_eq!(split.far(), 0.8);
        // An inverted split is representable (it yields certain outage
        // downstream rather than a constructor error).
        assert!(PowerSplit::from_near_fraction(0.6).is_ok());
    }

    #[test]
    fn thresholds_from_unit_rate_target() {
        let split = PowerSplit::from_near_fraction(0.2).unwrap();
        let th = Thresholds::from_rate_target(1.0, &split).unwrap();
        assert_eq!(th.theta(), 1.0);
        assert_eq!(th.theta_oma(), 3.0);
        assert!(th.is_feasible());
        // xi_f = theta / (a_f - a_n theta) = 1 / 0.6
        let xi_f = th.xi(User::Far).unwrap();
        assert!((xi_f - 1.0 / 0.6).abs() < 1e-15);
        // xi_n = max(xi_f, theta / a_n) = 5
        assert_eq!(th.xi(User::Near).unwrap(), 5.0);
        assert!((feasible_near_fraction_bound(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn near_threshold_branches_at_the_kink() {
        // For a_n below 1/(2 + theta) the near user's own message is the
        // binding constraint; above it the SIC stage is.
        let th = |a_n: f64| {
            let split = PowerSplit::from_near_fraction(a_n).unwrap();
            Thresholds::from_rate_target(1.0, &split).unwrap()
        };
        let kink = 1.0 / 3.0; // 1 / (2 + theta) at theta = 1
        let below = th(kink - 1e-3);
        assert!(below.xi(User::Near).unwrap() > below.xi(User::Far).unwrap());
        let above = th(kink + 1e-3);
        assert_eq!(above.xi(User::Near), above.xi(User::Far));
        // Exactly at the kink both constraints coincide.
        let at = th(kink);
        let ratio = at.xi(User::Near).unwrap() / at.xi(User::Far).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_split_has_no_thresholds() {
        let split = PowerSplit::from_near_fraction(0.6).unwrap();
        let th = Thresholds::from_rate_target(1.0, &split).unwrap();
        assert!(!th.is_feasible());
        assert_eq!(th.xi(User::Near), None);
        assert_eq!(th.xi(User::Far), None);
        // The boundary itself (a_f = a_n theta) is also infeasible.
        let split = PowerSplit::from_near_fraction(0.5).unwrap();
        let th = Thresholds::from_rate_target(1.0, &split).unwrap();
        assert!(!th.is_feasible());
        // Rate targets must be positive and finite.
        assert!(Thresholds::from_rate_target(0.0, &split).is_err());
        assert!(Thresholds::from_rate_target(f64::NAN, &split).is_err());
    }
}
