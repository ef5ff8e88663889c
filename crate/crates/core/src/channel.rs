//! Channel model of the secondary network.
//!
//! The secondary transmitter reaches the near user, the far user and the
//! primary receiver over independent Rayleigh-faded paths with path-loss
//! exponent `alpha`. Each user combines `N_u` receive antennas by MRC, so its
//! effective channel power gain `g_u` is gamma distributed with integer shape
//! `N_u` and scale `Omega_u = d_u^-alpha`; the single-antenna primary link
//! gain `g_p` is exponential with mean `Omega_p`.
//!
//! Under instantaneous-CSI power control the transmit power is proportional
//! to `1 / g_p`, so the performance integrals run over the gain ratios
//! `X_u = g_u / g_p`; their densities and tail probabilities are provided
//! here alongside the plain gain distributions and a Monte Carlo sampler.

use rand::Rng;

use crate::specfun::{ln_gamma_pos, lower_incomplete_gamma_regularized};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Public types
// ---------------------------------------------------------------------------

/// Which secondary user a per-user quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    Near,
    Far,
}

/// Geometry-derived large-scale parameters of the three links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    d_n: f64,
    d_f: f64,
    d_p: f64,
    alpha: f64,
    omega_n: f64,
    omega_f: f64,
    omega_p: f64,
}

impl LinkParams {
    /// Build from the three transmitter distances (near user, far user,
    /// primary receiver) and the path-loss exponent. Mean channel gains are
    /// derived as `d^-alpha`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidConfig`] for non-positive or non-finite distances, or
    /// `alpha` outside the physically sensible range `[1, 8]`.
    pub fn from_distances(d_n: f64, d_f: f64, d_p: f64, alpha: f64) -> Result<Self> {
        for (name, d) in [("d_n", d_n), ("d_f", d_f), ("d_p", d_p)] {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "distance {name} must be finite and positive, got {d}"
                )));
            }
        }
        if !alpha.is_finite() || !(1.0..=8.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "path-loss exponent must lie in [1, 8], got {alpha}"
            )));
        }
        Ok(LinkParams {
            d_n,
            d_f,
            d_p,
            alpha,
            omega_n: d_n.powf(-alpha),
            omega_f: d_f.powf(-alpha),
            omega_p: d_p.powf(-alpha),
        })
    }

    /// Build directly from the three mean channel gains (path-loss exponent
    /// fixed at 2, distances back-derived). Useful for sweeping fading
    /// parameters without speaking in metres.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidConfig`] for non-positive or non-finite gains.
    pub fn from_mean_gains(omega_n: f64, omega_f: f64, omega_p: f64) -> Result<Self> {
        for (name, w) in [("omega_n", omega_n), ("omega_f", omega_f), ("omega_p", omega_p)] {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "mean gain {name} must be finite and positive, got {w}"
                )));
            }
        }
        Ok(LinkParams {
            d_n: omega_n.powf(-0.5),
            d_f: omega_f.powf(-0.5),
            d_p: omega_p.powf(-0.5),
            alpha: 2.0,
            omega_n,
            omega_f,
            omega_p,
        })
    }

    /// The expected near-far geometry is `d_n < d_f < d_p`. Other orderings
    /// are legitimate parameter studies, so they warn instead of failing.
    pub fn ordering_warning(&self) -> Option<String> {
        if self.d_n < self.d_f && self.d_f < self.d_p {
            None
        } else {
            Some(format!(
                "unusual geometry: expected d_n < d_f < d_p, got d_n = {}, d_f = {}, d_p = {}",
                self.d_n, self.d_f, self.d_p
            ))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Mean channel power gain of a secondary user link.
    pub fn omega(&self, u: User) -> f64 {
        match u {
            User::Near => self.omega_n,
            User::Far => self.omega_f,
        }
    }

    /// Mean channel power gain of the transmitter → primary-receiver link.
    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    /// The combined scale `Omega_n Omega_f / (Omega_n + Omega_f)` appearing
    /// in every minimum-gain density term.
    pub fn omega_min(&self) -> f64 {
        self.omega_n * self.omega_f / (self.omega_n + self.omega_f)
    }
}

/// Receive antenna counts (MRC branches) of the two secondary users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntennaConfig {
    n_n: u32,
    n_f: u32,
}

impl AntennaConfig {
    /// # Errors
    ///
    /// [`Error::InvalidConfig`] if either count is zero.
    pub fn new(n_n: u32, n_f: u32) -> Result<Self> {
        if n_n == 0 || n_f == 0 {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must be at least 1, got ({n_n}, {n_f})"
            )));
        }
        Ok(AntennaConfig { n_n, n_f })
    }

    pub fn count(&self, u: User) -> u32 {
        match u {
            User::Near => self.n_n,
            User::Far => self.n_f,
        }
    }
}

/// One Monte Carlo draw of the three instantaneous channel power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSample {
    pub g_p: f64,
    pub g_n: f64,
    pub g_f: f64,
}

// ---------------------------------------------------------------------------
// Gain distributions
// ---------------------------------------------------------------------------

fn check_non_negative(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("{what} requires finite x >= 0, got {x}")));
    }
    Ok(())
}

/// Density of the MRC-combined gain `g_u ~ Gamma(N_u, Omega_u)`.
pub fn pdf_gain(params: &LinkParams, antennas: &AntennaConfig, u: User, x: f64) -> Result<f64> {
    check_non_negative(x, "pdf_gain")?;
    let n = antennas.count(u) as f64;
    let omega = params.omega(u);
    if x == 0.0 {
        // The shape is an integer >= 1; the density is finite at zero.
        return Ok(if n == 1.0 { 1.0 / omega } else { 0.0 });
    }
    Ok(((n - 1.0) * x.ln() - x / omega - ln_gamma_pos(n) - n * omega.ln()).exp())
}

/// CDF of `g_u`: the regularized lower gamma for integer shape.  Keeping
/// relative accuracy deep in the left tail matters: the quadrature oracles
/// integrate this against the interference-link density to resolve outage
/// probabilities far below the 1e-16 absolute noise a Poisson-tail
/// complement would leave behind.
pub fn cdf_gain(params: &LinkParams, antennas: &AntennaConfig, u: User, x: f64) -> Result<f64> {
    check_non_negative(x, "cdf_gain")?;
    let n = antennas.count(u);
    lower_incomplete_gamma_regularized(f64::from(n), x / params.omega(u))
}

/// Density of `g_min = min(g_n, g_f)`: a finite mixture of gamma-type terms
/// with the common exponential scale [`LinkParams::omega_min`].
pub fn pdf_gain_min(params: &LinkParams, antennas: &AntennaConfig, x: f64) -> Result<f64> {
    check_non_negative(x, "pdf_gain_min")?;
    let omega_min = params.omega_min();
    let mut sum = 0.0;
    for (a, b) in [(User::Near, User::Far), (User::Far, User::Near)] {
        let na = antennas.count(a);
        let nb = antennas.count(b);
        let oa = params.omega(a);
        let ob = params.omega(b);
        for k in 0..nb {
            let order = na + k; // power x^{order-1}
            let ln_coef = -ln_gamma_pos(na as f64)
                - ln_gamma_pos(k as f64 + 1.0)
                - na as f64 * oa.ln()
                - k as f64 * ob.ln();
            let term = if x == 0.0 {
                if order == 1 {
                    ln_coef.exp()
                } else {
                    0.0
                }
            } else {
                (ln_coef + (order as f64 - 1.0) * x.ln() - x / omega_min).exp()
            };
            sum += term;
        }
    }
    Ok(sum)
}

/// Density of the gain ratio `X_u = g_u / g_p`.
pub fn pdf_ratio(params: &LinkParams, antennas: &AntennaConfig, u: User, x: f64) -> Result<f64> {
    check_non_negative(x, "pdf_ratio")?;
    let n = antennas.count(u) as f64;
    let omega = params.omega(u);
    let omega_p = params.omega_p();
    if x == 0.0 {
        return Ok(if n == 1.0 { omega_p / omega } else { 0.0 });
    }
    let kernel = (n - 1.0) * x.ln() - (n + 1.0) * (x / omega + 1.0 / omega_p).ln();
    Ok(n / (omega.powf(n) * omega_p) * kernel.exp())
}

/// Tail probability of the gain ratio:
/// `Pr(X_u >= t) = 1 - (Omega_p t / (Omega_u + Omega_p t))^{N_u}`.
pub fn ccdf_ratio(params: &LinkParams, antennas: &AntennaConfig, u: User, t: f64) -> Result<f64> {
    check_non_negative(t, "ccdf_ratio")?;
    let n = antennas.count(u) as i32;
    let omega = params.omega(u);
    let omega_p = params.omega_p();
    Ok(1.0 - (omega_p * t / (omega + omega_p * t)).powi(n))
}

/// Density of `X_min = g_min / g_p`: the ratio transform of
/// [`pdf_gain_min`], again a finite mixture.
pub fn pdf_ratio_min(params: &LinkParams, antennas: &AntennaConfig, x: f64) -> Result<f64> {
    check_non_negative(x, "pdf_ratio_min")?;
    let omega_min = params.omega_min();
    let omega_p = params.omega_p();
    let mut sum = 0.0;
    for (a, b) in [(User::Near, User::Far), (User::Far, User::Near)] {
        let na = antennas.count(a);
        let nb = antennas.count(b);
        let oa = params.omega(a);
        let ob = params.omega(b);
        for k in 0..nb {
            let order = (na + k) as f64;
            let ln_coef = ln_gamma_pos(order + 1.0)
                - ln_gamma_pos(na as f64)
                - ln_gamma_pos(k as f64 + 1.0)
                - na as f64 * oa.ln()
                - k as f64 * ob.ln()
                - omega_p.ln();
            let term = if x == 0.0 {
                if order == 1.0 {
                    (ln_coef - 2.0 * (1.0 / omega_p).ln()).exp()
                } else {
                    0.0
                }
            } else {
                (ln_coef + (order - 1.0) * x.ln()
                    - (order + 1.0) * (x / omega_min + 1.0 / omega_p).ln())
                .exp()
            };
            sum += term;
        }
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draw one exponential variate with the given mean by inverse transform.
pub(crate) fn sample_exp<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    let u: f64 = rng.random();
    -mean * (-u).ln_1p() // -mean * ln(1 - u)
}

/// Draw one joint gain sample. The gamma gains are formed as sums of `N_u`
/// exponential draws, which is branch-free and keeps the number of uniforms
/// consumed per trial fixed — a requirement for reproducible parallel
/// simulation. Draw order: `g_p`, then the near user's antennas, then the
/// far user's.
pub fn sample_gains<R: Rng + ?Sized>(
    params: &LinkParams,
    antennas: &AntennaConfig,
    rng: &mut R,
) -> GainSample {
    let g_p = sample_exp(rng, params.omega_p());
    let mut g_n = 0.0;
    for _ in 0..antennas.count(User::Near) {
        g_n += sample_exp(rng, params.omega(User::Near));
    }
    let mut g_f = 0.0;
    for _ in 0..antennas.count(User::Far) {
        g_f += sample_exp(rng, params.omega(User::Far));
    }
    GainSample { g_p, g_n, g_f }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn default_params() -> LinkParams {
        LinkParams::from_distances(30.0, 100.0, 200.0, 2.0).unwrap()
    }

    #[test]
    fn mean_gains_follow_path_loss() {
        let p = default_params();
        assert!((p.omega(User::Near) - 1.0 / 900.0).abs() < 1e-18);
        assert!((p.omega(User::Far) - 1e-4).abs() < 1e-18);
        assert!((p.omega_p() - 2.5e-5).abs() < 1e-18);
        assert!(p.ordering_warning().is_none());
    }

    #[test]
    fn geometry_validation() {
        assert!(LinkParams::from_distances(0.0, 1.0, 2.0, 2.0).is_err());
        assert!(LinkParams::from_distances(1.0, 1.0, 2.0, 0.5).is_err());
        // Swapped near/far: a warning, not an error.
        let p = LinkParams::from_distances(100.0, 30.0, 200.0, 2.0).unwrap();
        assert!(p.ordering_warning().is_some());
        assert!(AntennaConfig::new(0, 1).is_err());
        assert!(AntennaConfig::new(2, 3).is_ok());
    }

    #[test]
    fn densities_are_normalized() {
        let p = default_params();
        for (nn, nf) in [(1, 1), (2, 3), (4, 2)] {
            let ants = AntennaConfig::new(nn, nf).unwrap();
            let cases: [(&str, Box<dyn Fn(f64) -> f64>, f64); 4] = [
                (
                    "pdf_gain near",
                    Box::new({
                        let p = p.clone();
                        move |x| pdf_gain(&p, &ants, User::Near, x).unwrap()
                    }),
                    p.omega(User::Near) * nn as f64,
                ),
                (
                    "pdf_gain_min",
                    Box::new({
                        let p = p.clone();
                        move |x| pdf_gain_min(&p, &ants, x).unwrap()
                    }),
                    p.omega_min() * (nn + nf) as f64,
                ),
                (
                    "pdf_ratio far",
                    Box::new({
                        let p = p.clone();
                        move |x| pdf_ratio(&p, &ants, User::Far, x).unwrap()
                    }),
                    p.omega(User::Far) / p.omega_p() * nf as f64,
                ),
                (
                    "pdf_ratio_min",
                    Box::new({
                        let p = p.clone();
                        move |x| pdf_ratio_min(&p, &ants, x).unwrap()
                    }),
                    p.omega_min() / p.omega_p() * (nn + nf) as f64,
                ),
            ];
            for (what, f, scale) in cases {
                let est = quad::adaptive_tail(&f, 0.0, scale, 1e-300, 1e-10, 4000).unwrap();
                assert!(
                    (est.value - 1.0).abs() < 1e-8,
                    "{what} N=({nn},{nf}) integrates to {}",
                    est.value
                );
            }
        }
    }

    #[test]
    fn cdf_matches_density_derivative() {
        let p = default_params();
        let ants = AntennaConfig::new(2, 3).unwrap();
        // log-spaced grid spanning the bulk of the distribution
        for i in 0..30 {
            let x = p.omega(User::Near) * 10f64.powf(-2.0 + 4.0 * i as f64 / 29.0);
            let h = x * 1e-6;
            let deriv = (cdf_gain(&p, &ants, User::Near, x + h).unwrap()
                - cdf_gain(&p, &ants, User::Near, x - h).unwrap())
                / (2.0 * h);
            let density = pdf_gain(&p, &ants, User::Near, x).unwrap();
            let scale = density.abs().max(1.0 / p.omega(User::Near));
            assert!(
                ((deriv - density) / scale).abs() < 1e-6,
                "cdf/pdf mismatch at x = {x}: {deriv} vs {density}"
            );
        }
    }

    #[test]
    fn ccdf_ratio_matches_density_tail() {
        let p = default_params();
        let ants = AntennaConfig::new(2, 2).unwrap();
        for &t in &[0.1, 2.0, 17.0] {
            let tail = quad::adaptive_tail(
                |x| pdf_ratio(&p, &ants, User::Far, x).unwrap(),
                t,
                p.omega(User::Far) / p.omega_p() + t,
                1e-300,
                1e-11,
                4000,
            )
            .unwrap()
            .value;
            let closed = ccdf_ratio(&p, &ants, User::Far, t).unwrap();
            assert!(
                ((tail - closed) / closed).abs() < 1e-9,
                "ccdf_ratio({t}): quadrature {tail} vs closed {closed}"
            );
        }
    }

    #[test]
    fn gain_min_density_matches_order_statistic_form() {
        // Independent derivation: f_min = f_n (1 - F_f) + f_f (1 - F_n).
        let p = default_params();
        for (nn, nf) in [(1, 1), (2, 3), (3, 2)] {
            let ants = AntennaConfig::new(nn, nf).unwrap();
            for i in 1..40 {
                let x = p.omega_min() * 0.25 * i as f64;
                let direct = pdf_gain(&p, &ants, User::Near, x).unwrap()
                    * (1.0 - cdf_gain(&p, &ants, User::Far, x).unwrap())
                    + pdf_gain(&p, &ants, User::Far, x).unwrap()
                        * (1.0 - cdf_gain(&p, &ants, User::Near, x).unwrap());
                let mixture = pdf_gain_min(&p, &ants, x).unwrap();
                let scale = direct.abs().max(1e-30);
                assert!(
                    ((mixture - direct) / scale).abs() < 1e-12,
                    "pdf_gain_min mismatch at x = {x} N=({nn},{nf})"
                );
            }
        }
    }

    #[test]
    fn ratio_min_density_matches_scale_mixture() {
        // X_n and X_f share the denominator g_p, so X_min is *not* the
        // minimum of independent ratios: check against the 2-D construction
        // f(x) = int y f_gmin(x y) f_gp(y) dy instead.
        let p = default_params();
        let ants = AntennaConfig::new(2, 2).unwrap();
        let ratio_scale = p.omega_min() / p.omega_p();
        for &x in &[0.1 * ratio_scale, ratio_scale, 8.0 * ratio_scale] {
            let two_dim = quad::adaptive_tail(
                |y| {
                    y * pdf_gain_min(&p, &ants, x * y).unwrap()
                        * (-y / p.omega_p()).exp()
                        / p.omega_p()
                },
                0.0,
                p.omega_p(),
                1e-300,
                1e-11,
                4000,
            )
            .unwrap()
            .value;
            let mixture = pdf_ratio_min(&p, &ants, x).unwrap();
            assert!(
                ((mixture - two_dim) / two_dim).abs() < 1e-8,
                "pdf_ratio_min mismatch at x = {x}: {mixture} vs {two_dim}"
            );
        }
    }

    #[test]
    fn negative_arguments_are_domain_errors() {
        let p = default_params();
        let ants = AntennaConfig::new(1, 1).unwrap();
        assert!(matches!(pdf_gain(&p, &ants, User::Near, -1.0), Err(Error::Domain(_))));
        assert!(matches!(cdf_gain(&p, &ants, User::Far, -0.5), Err(Error::Domain(_))));
        assert!(matches!(pdf_ratio(&p, &ants, User::Near, -2.0), Err(Error::Domain(_))));
        assert!(matches!(ccdf_ratio(&p, &ants, User::Far, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(pdf_gain_min(&p, &ants, -1e-9), Err(Error::Domain(_))));
        assert!(matches!(pdf_ratio_min(&p, &ants, -1e-9), Err(Error::Domain(_))));
    }

    /// Two-sided Kolmogorov–Smirnov distance of `samples` (sorted in place)
    /// against `cdf`.
    fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mut worst = 0.0f64;
        for (i, &x) in samples.iter().enumerate() {
            let f = cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            worst = worst.max((f - lo).abs()).max((hi - f).abs());
        }
        worst
    }

    #[test]
    fn sampled_gains_match_distributions() {
        let p = default_params();
        let ants = AntennaConfig::new(2, 3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_cafe);
        let trials = 200_000;
        let mut gp = Vec::with_capacity(trials);
        let mut gn = Vec::with_capacity(trials);
        let mut xf = Vec::with_capacity(trials);
        let mut gmin = Vec::with_capacity(trials);
        for _ in 0..trials {
            let s = sample_gains(&p, &ants, &mut rng);
            gp.push(s.g_p);
            gn.push(s.g_n);
            xf.push(s.g_f / s.g_p);
            gmin.push(s.g_n.min(s.g_f));
        }
        // KS critical value at alpha ~ 1e-3 for n = 2e5 is ~0.0044; the
        // bound below also covers the fixed-seed draw comfortably.
        let bound = 0.005;

        let d = ks_distance(&mut gp, |x| 1.0 - (-x / p.omega_p()).exp());
        assert!(d < bound, "g_p KS distance {d}");

        let d = ks_distance(&mut gn, |x| cdf_gain(&p, &ants, User::Near, x).unwrap());
        assert!(d < bound, "g_n KS distance {d}");

        let d = ks_distance(&mut xf, |x| 1.0 - ccdf_ratio(&p, &ants, User::Far, x).unwrap());
        assert!(d < bound, "X_f KS distance {d}");

        // min(g_n, g_f) of independent gamma gains
        let d = ks_distance(&mut gmin, |x| {
            let fn_ = cdf_gain(&p, &ants, User::Near, x).unwrap();
            let ff = cdf_gain(&p, &ants, User::Far, x).unwrap();
            fn_ + ff - fn_ * ff
        });
        assert!(d < bound, "g_min KS distance {d}");
    }
}
