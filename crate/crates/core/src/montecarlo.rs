//! Monte Carlo estimation of the performance metrics.
//!
//! Each trial draws one realization of the channel (interference-link gain,
//! a second independent interference draw, then the per-antenna user gains),
//! applies the regime's power policy and scores the requested metric. Two
//! design rules make the estimates reproducible to the bit:
//!
//! * **Counter-based streams.** Trial `t` gets its own ChaCha12 generator
//!   keyed from `(seed, t)`, so a trial's draws never depend on how trials
//!   are batched or scheduled.
//! * **Exact accumulation.** Samples are accumulated as fixed-point `i128`
//!   sums (40 fractional bits), whose addition is associative; merging batch
//!   results in any order — sequentially or across worker threads — yields
//!   identical bits.
//!
//! Outage events follow the analytical model of each regime (see
//! [`crate::analytic`]): under unclipped instantaneous-CSI power control the
//! two users' decoding events are evaluated under independent interference
//! draws (matching the product-of-marginals definition), while the
//! peak-limited instantaneous-CSI regime evaluates them jointly under the
//! shared draw. Rate samples always use the shared draw; expectations are
//! unaffected by the dependence convention.

use std::f64::consts::LN_2;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::analytic::MetricRequest;
use crate::channel::{sample_exp, sample_gains, User};
use crate::policy::{transmit_power, ScenarioKind};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Configuration and estimate types
// ---------------------------------------------------------------------------

/// Which metric a simulation scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    SumRate,
    Outage,
}

/// Which multiple-access scheme a simulation scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Noma,
    Oma,
}

/// Trial budget, seed and batching granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Trials per work unit; affects scheduling only, never the result.
    pub batch_size: u64,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            batch_size: 16_384,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

// ---------------------------------------------------------------------------
// Counter-based trial streams
// ---------------------------------------------------------------------------

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for one trial, keyed by `(seed, trial)`.
fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut state = seed ^ trial.wrapping_mul(GOLDEN_GAMMA);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

// ---------------------------------------------------------------------------
// Per-trial scoring
// ---------------------------------------------------------------------------

/// Transmit powers governing the near and far users' outage events. Only
/// the unclipped instantaneous-CSI regime splits them across independent
/// interference draws; everywhere else both events see the shared draw.
fn event_powers(req: &MetricRequest, g_p: f64, g_p2: f64) -> (f64, f64) {
    match req.scenario.kind() {
        ScenarioKind::IntIcsi => (
            transmit_power(&req.scenario, &req.params, g_p),
            transmit_power(&req.scenario, &req.params, g_p2),
        ),
        _ => {
            let p = transmit_power(&req.scenario, &req.params, g_p);
            (p, p)
        }
    }
}

fn sample_value(req: &MetricRequest, metric: Metric, scheme: Scheme, trial_seed: u64, trial: u64) -> f64 {
    let mut rng = trial_rng(trial_seed, trial);
    let gains = sample_gains(&req.params, &req.antennas, &mut rng);
    let g_p2 = sample_exp(&mut rng, req.params.omega_p());

    match metric {
        Metric::SumRate => {
            let p = transmit_power(&req.scenario, &req.params, gains.g_p);
            match scheme {
                Scheme::Noma => {
                    let a_n = req.split.near();
                    let g_min = gains.g_n.min(gains.g_f);
                    ((a_n * p * gains.g_n).ln_1p() + (p * g_min).ln_1p()
                        - (a_n * p * g_min).ln_1p())
                        / LN_2
                }
                Scheme::Oma => {
                    0.5 * ((p * gains.g_n).ln_1p() + (p * gains.g_f).ln_1p()) / LN_2
                }
            }
        }
        Metric::Outage => {
            let (p_near, p_far) = event_powers(req, gains.g_p, g_p2);
            let (t_near, t_far) = match scheme {
                Scheme::Noma => {
                    let (Some(xi_n), Some(xi_f)) = (
                        req.thresholds.xi(User::Near),
                        req.thresholds.xi(User::Far),
                    ) else {
                        return 1.0;
                    };
                    (xi_n, xi_f)
                }
                Scheme::Oma => {
                    let theta = req.thresholds.theta_oma();
                    (theta, theta)
                }
            };
            // A silent transmitter (one-bit regime) has p == 0 and fails.
            let ok = p_near * gains.g_n >= t_near && p_far * gains.g_f >= t_far;
            if ok {
                0.0
            } else {
                1.0
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exact accumulation
// ---------------------------------------------------------------------------

const FIXED_BITS: u32 = 40;
const FIXED_SCALE: f64 = (1u64 << FIXED_BITS) as f64;

fn batch_sums(
    req: &MetricRequest,
    metric: Metric,
    scheme: Scheme,
    config: &McConfig,
    batch: u64,
) -> (i128, i128) {
    let start = batch * config.batch_size;
    let end = (start + config.batch_size).min(config.trials);
    let mut sum = 0i128;
    let mut sum_sq = 0i128;
    for trial in start..end {
        let value = sample_value(req, metric, scheme, config.seed, trial);
        let fixed = (value * FIXED_SCALE).round() as i128;
        sum += fixed;
        sum_sq += fixed * fixed;
    }
    (sum, sum_sq)
}

fn estimate_from_sums(sum: i128, sum_sq: i128, trials: u64) -> McEstimate {
    let n = trials as f64;
    let mean = sum as f64 / FIXED_SCALE / n;
    let mean_sq = sum_sq as f64 / (FIXED_SCALE * FIXED_SCALE) / n;
    let variance = (mean_sq - mean * mean).max(0.0);
    let std_error = if trials > 1 {
        (variance / (n - 1.0)).sqrt()
    } else {
        f64::INFINITY
    };
    McEstimate {
        mean,
        std_error,
        trials,
    }
}

fn check_config(config: &McConfig) -> Result<()> {
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trial count must be positive".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

/// Estimate a metric by simulation, using the thread pool when the
/// `parallel` feature is enabled. Bitwise identical to
/// [`simulate_sequential`] for the same configuration.
pub fn simulate(
    req: &MetricRequest,
    metric: Metric,
    scheme: Scheme,
    config: &McConfig,
) -> Result<McEstimate> {
    check_config(config)?;
    let batches = config.trials.div_ceil(config.batch_size);
    #[cfg(feature = "parallel")]
    let (sum, sum_sq) = (0..batches)
        .into_par_iter()
        .map(|b| batch_sums(req, metric, scheme, config, b))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    #[cfg(not(feature = "parallel"))]
    let (sum, sum_sq) = (0..batches).fold((0, 0), |acc, b| {
        let (s, q) = batch_sums(req, metric, scheme, config, b);
        (acc.0 + s, acc.1 + q)
    });
    Ok(estimate_from_sums(sum, sum_sq, config.trials))
}

/// Single-threaded reference driver; the ground truth for determinism.
pub fn simulate_sequential(
    req: &MetricRequest,
    metric: Metric,
    scheme: Scheme,
    config: &McConfig,
) -> Result<McEstimate> {
    check_config(config)?;
    let batches = config.trials.div_ceil(config.batch_size);
    let mut sum = 0i128;
    let mut sum_sq = 0i128;
    for b in 0..batches {
        let (s, q) = batch_sums(req, metric, scheme, config, b);
        sum += s;
        sum_sq += q;
    }
    Ok(estimate_from_sums(sum, sum_sq, config.trials))
}

/// Estimate one metric for a sequence of requests (e.g., an interference
/// sweep) with the same configuration.
pub fn simulate_sweep(
    reqs: &[MetricRequest],
    metric: Metric,
    scheme: Scheme,
    config: &McConfig,
) -> Result<Vec<McEstimate>> {
    reqs.iter()
        .map(|req| simulate(req, metric, scheme, config))
        .collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
