//! Agreement of the three evaluation routes — closed form, quadrature and
//! Monte Carlo — on every regime, plus the headline NOMA-vs-OMA comparisons.

use noma_underlay::analytic::{self, Method, MetricRequest};
use noma_underlay::channel::{AntennaConfig, LinkParams};
use noma_underlay::montecarlo::{simulate, McConfig, McEstimate, Metric, Scheme};
use noma_underlay::oracle::{self, QuadratureSpec};
use noma_underlay::policy::{PowerSplit, Scenario, Thresholds};
use noma_underlay::powalloc;

const TRIALS: u64 = 1_000_000;

fn request(scenario: Scenario, n_n: u32, n_f: u32) -> MetricRequest {
    let params = LinkParams::from_distances(30.0, 100.0, 200.0, 2.0).unwrap();
    let antennas = AntennaConfig::new(n_n, n_f).unwrap();
    let split = PowerSplit::from_near_fraction(0.2).unwrap();
    let thresholds = Thresholds::from_rate_target(1.0, &split).unwrap();
    MetricRequest {
        scenario,
        params,
        antennas,
        split,
        thresholds,
    }
}

fn all_regimes(i: f64) -> [Scenario; 5] {
    [
        Scenario::int_icsi(i).unwrap(),
        Scenario::int_scsi(i, 0.1).unwrap(),
        Scenario::pow_int_icsi(i, 1e5).unwrap(),
        Scenario::pow_int_scsi(i, 0.1, 1e5).unwrap(),
        Scenario::pow_int_one_bit(i, 1e5).unwrap(),
    ]
}

fn assert_close(value: f64, reference: f64, rel_tol: f64, what: &str) {
    let rel = ((value - reference) / reference).abs();
    assert!(
        rel <= rel_tol,
        "{what}: {value:.12e} vs {reference:.12e} (rel {rel:.3e})"
    );
}

fn assert_within_se(estimate: &McEstimate, reference: f64, k: f64, what: &str) {
    let dev = (estimate.mean - reference).abs();
    assert!(
        dev <= k * estimate.std_error,
        "{what}: mean {:.8} vs {reference:.8} ({:.1} standard errors at {} trials)",
        estimate.mean,
        dev / estimate.std_error,
        estimate.trials
    );
}

#[test]
fn noma_routes_agree_on_every_regime() {
    let spec = QuadratureSpec::default();
    let config = McConfig::new(TRIALS, 0x00C0_FFEE);
    for scenario in all_regimes(10.0) {
        let label = format!("{:?}", scenario.kind());
        let req = request(scenario, 2, 3);

        let outage = analytic::outage_noma(&req).unwrap();
        let outage_quad = oracle::outage_noma_by_quadrature(&req, &spec).unwrap();
        assert_close(outage_quad, outage, 1e-6, &format!("{label} outage quadrature"));
        let outage_mc = simulate(&req, Metric::Outage, Scheme::Noma, &config).unwrap();
        assert_within_se(&outage_mc, outage, 4.0, &format!("{label} outage simulation"));

        let rate = analytic::sumrate_noma(&req).unwrap();
        if rate.method == Method::ClosedForm {
            let rate_quad = oracle::sumrate_noma_by_quadrature(&req, &spec).unwrap();
            assert_close(rate_quad, rate.value, 1e-6, &format!("{label} rate quadrature"));
        }
        let rate_mc = simulate(&req, Metric::SumRate, Scheme::Noma, &config).unwrap();
        assert_within_se(&rate_mc, rate.value, 4.0, &format!("{label} rate simulation"));
    }
}

#[test]
fn oma_routes_agree_on_every_regime() {
    let spec = QuadratureSpec::default();
    let config = McConfig::new(TRIALS, 0x0BAD_5EED);
    for scenario in all_regimes(10.0) {
        let label = format!("{:?}", scenario.kind());
        let req = request(scenario, 2, 3);

        let outage = analytic::outage_oma(&req).unwrap();
        let outage_quad = oracle::outage_oma_by_quadrature(&req, &spec).unwrap();
        assert_close(outage_quad, outage, 1e-6, &format!("{label} OMA outage quadrature"));
        let outage_mc = simulate(&req, Metric::Outage, Scheme::Oma, &config).unwrap();
        assert_within_se(&outage_mc, outage, 4.0, &format!("{label} OMA outage simulation"));

        let rate = analytic::sumrate_oma(&req).unwrap();
        if rate.method == Method::ClosedForm {
            let rate_quad = oracle::sumrate_oma_by_quadrature(&req, &spec).unwrap();
            assert_close(rate_quad, rate.value, 1e-6, &format!("{label} OMA rate quadrature"));
        }
        let rate_mc = simulate(&req, Metric::SumRate, Scheme::Oma, &config).unwrap();
        assert_within_se(&rate_mc, rate.value, 4.0, &format!("{label} OMA rate simulation"));
    }
}

#[test]
fn noma_outperforms_oma_at_the_optimal_split() {
    let params = LinkParams::from_distances(30.0, 100.0, 200.0, 2.0).unwrap();
    let antennas = AntennaConfig::new(2, 2).unwrap();
    let scenario = Scenario::int_icsi(100.0).unwrap();
    let best = powalloc::optimal_near_fraction_numeric(&scenario, &params, &antennas, 1.0)
        .unwrap();
    let split = PowerSplit::from_near_fraction(best.a_n_star).unwrap();
    let req = MetricRequest {
        scenario,
        params,
        antennas,
        split,
        thresholds: Thresholds::from_rate_target(1.0, &split).unwrap(),
    };
    let noma = analytic::outage_noma(&req).unwrap();
    let oma = analytic::outage_oma(&req).unwrap();
    assert!(
        noma < oma,
        "optimally allocated NOMA outage {noma:.3e} should beat OMA {oma:.3e}"
    );

    // And the average sum-rate advantage holds as well, by simulation.
    let config = McConfig::new(TRIALS, 77);
    let noma_rate = simulate(&req, Metric::SumRate, Scheme::Noma, &config).unwrap();
    let oma_rate = simulate(&req, Metric::SumRate, Scheme::Oma, &config).unwrap();
    assert!(
        noma_rate.mean - 3.0 * noma_rate.std_error
            > oma_rate.mean + 3.0 * oma_rate.std_error,
        "NOMA rate {:.4} should exceed OMA rate {:.4}",
        noma_rate.mean,
        oma_rate.mean
    );
}
