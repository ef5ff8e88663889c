//! Performance analysis toolkit for a two-user downlink NOMA secondary
//! network operating under underlay spectrum sharing.
//!
//! A secondary transmitter serves a near and a far user by power-domain NOMA
//! while its transmit power is constrained by the interference it may inflict
//! on a primary receiver. Five power-control regimes are covered, differing in
//! what the transmitter knows about the interference channel and whether its
//! own power is capped:
//!
//! * [`policy::ScenarioKind::IntIcsi`] — interference constraint, instantaneous CSI,
//! * [`policy::ScenarioKind::IntScsi`] — interference constraint, statistical CSI,
//! * [`policy::ScenarioKind::PowIntIcsi`] — peak power + interference, instantaneous CSI,
//! * [`policy::ScenarioKind::PowIntScsi`] — peak power + interference, statistical CSI,
//! * [`policy::ScenarioKind::PowIntOneBit`] — peak power + one-bit interference feedback.
//!
//! For each regime the crate computes the average achievable NOMA sum-rate and
//! the NOMA outage probability three independent ways — closed form
//! ([`analytic`]), adaptive numerical quadrature ([`oracle`]) and Monte Carlo
//! simulation ([`montecarlo`]) — plus orthogonal-multiple-access baselines and
//! the outage-minimizing power-allocation coefficient ([`powalloc`]).
//!
//! # Example
//!
//! ```
//! use noma_underlay::channel::{AntennaConfig, LinkParams};
//! use noma_underlay::policy::{PowerSplit, Scenario, Thresholds};
//! use noma_underlay::analytic::{self, MetricRequest};
//!
//! let params = LinkParams::from_distances(30.0, 100.0, 200.0, 2.0).unwrap();
//! let antennas = AntennaConfig::new(1, 1).unwrap();
//! let split = PowerSplit::from_near_fraction(0.2).unwrap();
//! let thresholds = Thresholds::from_rate_target(1.0, &split).unwrap();
//! let req = MetricRequest {
//!     scenario: Scenario::int_icsi(100.0).unwrap(),
//!     params,
//!     antennas,
//!     split,
//!     thresholds,
//! };
//! let outage = analytic::outage_noma(&req).unwrap();
//! assert!((outage - 5.268e-3).abs() < 1e-5);
//! ```

pub mod analytic;
pub mod channel;
pub mod montecarlo;
pub mod oracle;
pub mod policy;
pub mod powalloc;
pub mod specfun;

pub(crate) mod quad;

/// Errors produced by the numeric routines in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination that is structurally invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A Meijer-G order class outside the supported set.
    #[error("unsupported Meijer-G order class (m={m}, n={n}, p={p}, q={q})")]
    UnsupportedOrder { m: usize, n: usize, p: usize, q: usize },

    /// An adaptive routine exhausted its subdivision budget before reaching
    /// the requested tolerance. Carries the best available estimate.
    #[error("tolerance not reached: value={value:.6e}, abs_error={abs_error:.6e}")]
    Tolerance { value: f64, abs_error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
