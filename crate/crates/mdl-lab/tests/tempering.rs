//! Tempering invariants on full experiment reports.
//!
//! Under label noise the shortest interpolator must sit strictly between
//! the noise floor and chance, every audited bound must hold, and at
//! noticeable noise the interpolator must test worse than the penalized
//! search. Two noise rates at m = 12 are shared across the tests.

use std::sync::OnceLock;

use mdl_lab::bitlang::Expr;
use mdl_lab::experiments::{run_experiment, ExperimentReport};
use mdl_lab::sources::{SourceModel, SourceSpec};

const RATES: [(u64, u64); 2] = [(1, 8), (1, 4)];

fn reports() -> &'static [(f64, ExperimentReport); 2] {
    static REPORTS: OnceLock<[(f64, ExperimentReport); 2]> = OnceLock::new();
    REPORTS.get_or_init(|| {
        RATES.map(|(num, den)| {
            let spec = SourceSpec::new(
                SourceModel::RandomLabelNoise {
                    h_star: Expr::Bit(1),
                    noise_num: num,
                    noise_den: den,
                },
                42,
            )
            .expect("valid source");
            (
                num as f64 / den as f64,
                run_experiment(&spec, 12, 20, 34, 1.0),
            )
        })
    })
}

#[test]
fn interpolator_error_is_tempered_not_catastrophic() {
    for (l_star, report) in reports() {
        let mean = report.mdl_test_error.mean;
        let sigma = report.mdl_test_error.std_err;
        assert!(
            *l_star - 3.0 * sigma < mean && mean < 0.5,
            "noise rate {l_star}: mean test error {mean:.4} (sigma {sigma:.4}) \
             is outside the tempered range"
        );
    }
}

#[test]
fn every_emitted_audit_holds() {
    for (l_star, report) in reports() {
        let audits = &report.audits;
        let length = audits.length.as_ref().expect("length bound audited");
        let kl = audits.kl.as_ref().expect("divergence audited");
        let band = audits.band.as_ref().expect("noise band audited");
        assert!(
            length.pass && kl.pass && band.pass,
            "noise rate {l_star}: an audit failed \
             (length {}, divergence {}, band {})",
            length.pass,
            kl.pass,
            band.pass
        );
    }
}

#[test]
fn interpolating_tests_worse_than_penalized_search_under_noise() {
    let (_, report) = &reports()[1];
    let margin = report.mdl_test_error.mean - report.srm_test_error.mean;
    assert!(
        margin > 0.0,
        "at noise rate 1/4 the interpolator should test worse than the \
         penalized rule, but the margin is {margin:.4}"
    );
}
