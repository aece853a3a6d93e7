//! Seeded Monte Carlo harness: tempering-curve tables, inequality sweeps,
//! full sample-search-audit experiment runs, hash-construction statistics,
//! the pigeonhole lower-bound demo, and quenched prefix studies.
//!
//! Everything here is reproducible: all randomness flows from a master seed
//! through the counter-based streams in [`crate::sources`], trials are
//! independent, and aggregates reduce in trial-index order, so reports and
//! their CSV renderings are byte-identical across runs and worker counts.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bitlang::{self, enumerate, Expr, Instance};
use crate::bounds::{
    self, dedup_entropy_gap, envelope_shift_gap, gen_bound_from_length, kl_bernoulli, l_ag,
    l_samp, rln_band, rln_kl_budget, seed_length_r, strong_pinsker_gap, union_bound_log_fail,
};
use crate::hash_family::{assemble_interpolator, find_seed};
use crate::learners::{
    lower_bound_pair, mdl_search, population_disagreement, population_loss, srm_search,
    LossEstimate, LowerBoundError,
};
use crate::sources::{self, disambiguation_prefix, SourceError, SourceModel, SourceSpec};
use crate::BitVec;

/// Monte Carlo test-set size for population losses that cannot be computed
/// exactly.
pub const N_TEST: u64 = 200_000;

/// Stream namespace for demo-harness randomness; see [`sources::sample`] on
/// reserved trial indices.
const DEMO_STREAM: u64 = u64::MAX - 1;

fn real(x: f64) -> String {
    format!("{x:.6}")
}

/// Gap columns span many orders of magnitude around 1e-12, so they keep six
/// digits in scientific notation instead of fixed-point.
fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn program_hex(e: &Expr) -> String {
    bitlang::encode(e)
        .expect("search and construction emit encodable programs")
        .to_string()
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Which source family to draw from; see [`SourceModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    RandomLabelNoise,
    AgnosticMixture,
    AllZerosY,
    SparseDiff,
}

impl std::str::FromStr for SourceKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<SourceKind, ConfigError> {
        match s {
            "rln" => Ok(SourceKind::RandomLabelNoise),
            "mixture" => Ok(SourceKind::AgnosticMixture),
            "zeros" => Ok(SourceKind::AllZerosY),
            "sparse" => Ok(SourceKind::SparseDiff),
            _ => Err(ConfigError::BadValue {
                key: "source".into(),
                value: s.into(),
                expected: "one of rln, mixture, zeros, sparse",
            }),
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SourceKind::RandomLabelNoise => "rln",
            SourceKind::AgnosticMixture => "mixture",
            SourceKind::AllZerosY => "zeros",
            SourceKind::SparseDiff => "sparse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line} is not a key=value setting")]
    BadLine { line: usize },
    #[error("unknown configuration key {key:?}")]
    UnknownKey { key: String },
    #[error("bad value {value:?} for {key} (expected {expected})")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// Source settings assembled from defaults, a config file, and flag
/// overrides, in that order. Irrelevant keys for the chosen source are
/// accepted and ignored, so one file can describe several runs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: SourceKind,
    /// Label-flip rate numerator/denominator for the noisy realizable source.
    pub lstar_num: u64,
    pub lstar_den: u64,
    /// Mixture weight of the noisy branch and its label bias.
    pub alpha: f64,
    pub beta: f64,
    /// Sparse-bit scale.
    pub c: f64,
    /// Reference program for the noisy realizable source.
    pub hstar: Expr,
    pub master_seed: u64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            source: SourceKind::RandomLabelNoise,
            lstar_num: 1,
            lstar_den: 4,
            alpha: 0.25,
            beta: 0.25,
            c: 1.0,
            hstar: Expr::Bit(1),
            master_seed: 0,
        }
    }
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(
            key: &str,
            value: &str,
            expected: &'static str,
        ) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.into(),
                value: value.into(),
                expected,
            })
        }
        match key {
            "source" => self.source = value.parse()?,
            "lstar_num" => self.lstar_num = parse(key, value, "an unsigned integer")?,
            "lstar_den" => self.lstar_den = parse(key, value, "an unsigned integer")?,
            "alpha" => self.alpha = parse(key, value, "a real number")?,
            "beta" => self.beta = parse(key, value, "a real number")?,
            "c" => self.c = parse(key, value, "a real number")?,
            "hstar" => {
                self.hstar = Expr::from_code_str(value).map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                    expected: "a program as <bitlen>:<hex>",
                })?;
            }
            "master_seed" => self.master_seed = parse(key, value, "an unsigned integer")?,
            _ => return Err(ConfigError::UnknownKey { key: key.into() }),
        }
        Ok(())
    }

    /// Applies a config file: one `key=value` per line, `#` starts a
    /// comment, blank lines are skipped, later lines override earlier ones.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::BadLine { line: idx + 1 })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Builds the validated source this configuration describes.
    pub fn build_spec(&self) -> Result<SourceSpec, ConfigError> {
        let model = match self.source {
            SourceKind::RandomLabelNoise => SourceModel::RandomLabelNoise {
                h_star: self.hstar.clone(),
                noise_num: self.lstar_num,
                noise_den: self.lstar_den,
            },
            SourceKind::AgnosticMixture => SourceModel::AgnosticMixture {
                alpha: self.alpha,
                beta: self.beta,
            },
            SourceKind::AllZerosY => SourceModel::AllZerosY,
            SourceKind::SparseDiff => SourceModel::SparseDiff { c: self.c },
        };
        Ok(SourceSpec::new(model, self.master_seed)?)
    }
}

// ---------------------------------------------------------------------------
// Tempering curves
// ---------------------------------------------------------------------------

/// One row of the asymptotic-error table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub alpha: f64,
    pub l_ag: f64,
    pub l_samp: f64,
}

/// The two asymptotic error curves tabulated over `alpha` in `[0, 0.5]`
/// at the given step; the endpoint 0.5 is always included exactly.
///
/// Panics unless `0 < step <= 0.1`.
pub fn tempering_curves(step: f64) -> Vec<CurveRow> {
    assert!(
        step.is_finite() && step > 0.0 && step <= 0.1,
        "step {step} outside (0, 0.1]"
    );
    let mut rows = Vec::new();
    for i in 0u64.. {
        let alpha = i as f64 * step;
        if alpha > 0.5 + 1e-12 {
            break;
        }
        let alpha = alpha.min(0.5);
        rows.push(CurveRow {
            alpha,
            l_ag: l_ag(alpha),
            l_samp: l_samp(alpha),
        });
    }
    if rows.last().expect("alpha = 0 always emitted").alpha < 0.5 {
        rows.push(CurveRow {
            alpha: 0.5,
            l_ag: l_ag(0.5),
            l_samp: l_samp(0.5),
        });
    }
    rows
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("alpha,l_ag,l_samp\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", real(r.alpha), real(r.l_ag), real(r.l_samp));
    }
    out
}

// ---------------------------------------------------------------------------
// Inequality sweeps
// ---------------------------------------------------------------------------

/// Result of one grid sweep: the extreme gaps observed and whether they sit
/// on the right side of the stated tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub cases: u64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
    pub pass: bool,
}

fn fold_gap((lo, hi, n): (f64, f64, u64), g: f64) -> (f64, f64, u64) {
    (lo.min(g), hi.max(g), n + 1)
}

/// Sweeps every proved inequality over its standard grid and reports the
/// extreme gaps:
///
/// - the entropy-envelope shift bound over `alpha in [0, 1] x shift in
///   [0, 8]`, plus its equality case at shift 0;
/// - the one-sided Pinsker strengthening over `(0.01..=0.99)^2`;
/// - duplicate-removal entropy savings, exhaustively for all label counts
///   up to m = 200;
/// - the seeded-hash union-bound certificate at the recommended seed length
///   for every `(m <= 64, k <= m, b <= 64)` with `2^b >= m`, including the
///   frozen spot value at `(4, 2, 8, r=10)`.
pub fn verify_lemmas() -> LemmaReport {
    let mut checks = Vec::new();

    let mut all = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
    let mut at_zero = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
    for i in 0..=1000u64 {
        let alpha = i as f64 / 1000.0;
        for j in 0..=800u64 {
            let g = envelope_shift_gap(alpha, j as f64 / 100.0);
            all = fold_gap(all, g);
            if j == 0 {
                at_zero = fold_gap(at_zero, g);
            }
        }
    }
    checks.push(LemmaCheck {
        name: "envelope-shift",
        cases: all.2,
        min_gap: all.0,
        max_gap: all.1,
        pass: all.0 >= -1e-9,
    });
    checks.push(LemmaCheck {
        name: "envelope-shift-equality-at-zero",
        cases: at_zero.2,
        min_gap: at_zero.0,
        max_gap: at_zero.1,
        pass: at_zero.0 >= -1e-9 && at_zero.1 <= 1e-9,
    });

    let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
    for i in 1..=99u64 {
        for j in 1..=99u64 {
            acc = fold_gap(acc, strong_pinsker_gap(i as f64 / 100.0, j as f64 / 100.0));
        }
    }
    checks.push(LemmaCheck {
        name: "pinsker-strengthening",
        cases: acc.2,
        min_gap: acc.0,
        max_gap: acc.1,
        pass: acc.0 >= -1e-12,
    });

    // Exhaustive over (m, ones, removed ones, removed zeros); the per-m
    // scans are independent and min/max folds are order-free, so this
    // parallel reduction stays deterministic.
    let dedup = (1..=200u64)
        .into_par_iter()
        .map(|m| {
            let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
            for k in 0..=m {
                for k_plus in 0..=k {
                    for k_minus in 0..=(m - k) {
                        if k_plus + k_minus >= m {
                            continue;
                        }
                        let g = dedup_entropy_gap(m, k_plus, k_minus, k)
                            .expect("loop ranges satisfy the count preconditions");
                        acc = fold_gap(acc, g);
                    }
                }
            }
            acc
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY, 0u64),
            |a, b| (a.0.min(b.0), a.1.max(b.1), a.2 + b.2),
        );
    checks.push(LemmaCheck {
        name: "dedup-entropy",
        cases: dedup.2,
        min_gap: dedup.0,
        max_gap: dedup.1,
        pass: dedup.0 >= -1e-9,
    });

    let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
    for m in 1..=64u64 {
        for k in 0..=m {
            for b in 1..=64u64 {
                if b < 64 && (1u64 << b) < m {
                    continue;
                }
                let v = union_bound_log_fail(m, k, b, seed_length_r(m, k, b))
                    .expect("grid satisfies the count preconditions");
                acc = fold_gap(acc, v);
            }
        }
    }
    checks.push(LemmaCheck {
        name: "hash-union-certificate",
        cases: acc.2,
        min_gap: acc.0,
        max_gap: acc.1,
        pass: acc.1 < 0.0,
    });

    let spot = union_bound_log_fail(4, 2, 8, 10).expect("valid spot arguments");
    checks.push(LemmaCheck {
        name: "union-certificate-spot-4-2-8-10",
        cases: 1,
        min_gap: spot,
        max_gap: spot,
        pass: (spot + 65.4).abs() <= 0.5,
    });

    let pass = checks.iter().all(|c| c.pass);
    LemmaReport { checks, pass }
}

pub fn lemmas_csv(report: &LemmaReport) -> String {
    let mut out = String::from("check,cases,min_gap,max_gap,pass\n");
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.name,
            c.cases,
            sci(c.min_gap),
            sci(c.max_gap),
            c.pass
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment runs
// ---------------------------------------------------------------------------

/// Everything recorded about one trial. Search fields are absent when the
/// length budget was exhausted; every field except `trial` and `m` is
/// absent when the trial failed outright (see `error`).
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub m: u64,
    /// Shortest prefix width that separates the sample's distinct pairs.
    pub b_s: Option<u64>,
    pub exhausted: bool,
    pub mdl_len: Option<u64>,
    pub mdl_program: Option<Expr>,
    pub mdl_test_error: Option<LossEstimate>,
    /// Population disagreement between the MDL program and the reference
    /// labeler; noisy realizable sources only.
    pub hstar_disagreement: Option<LossEstimate>,
    pub srm_len: Option<u64>,
    pub srm_train_error: Option<f64>,
    pub srm_program: Option<Expr>,
    pub srm_test_error: Option<LossEstimate>,
    /// Code length of the corrected-reference interpolator, absent when its
    /// seed search failed.
    pub construct_len: Option<u64>,
    pub error: Option<String>,
}

/// Mean and standard error of one per-trial quantity over the `n` trials
/// that reported it. `n = 0` leaves NaNs; `n = 1` reports standard error 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SummaryStat {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
}

fn summarize(values: &[f64]) -> SummaryStat {
    let n = values.len();
    if n == 0 {
        return SummaryStat {
            mean: f64::NAN,
            std_err: f64::NAN,
            n: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_err = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    SummaryStat {
        mean,
        std_err,
        n: n as u64,
    }
}

/// Interpolation-length audit: mean test error against the bound implied by
/// mean program length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthAudit {
    /// `1 - 2^(-mean_len/m)`.
    pub bound: f64,
    /// `bound - mean test error`; negative means the bound was breached.
    pub slack: f64,
    /// Combined standard error of the slack (test error plus, by the delta
    /// method, the length term).
    pub sigma: f64,
    /// `slack >= -3 sigma`.
    pub pass: bool,
}

/// Divergence-budget audit: how far the noise rate sits from the observed
/// mean disagreement with the reference, against the information budget the
/// mean program length affords.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlAudit {
    pub observed_kl: f64,
    pub budget: f64,
    pub sigma: f64,
    /// `observed_kl <= budget + 3 sigma`.
    pub pass: bool,
}

/// Band containment for the mean test error under label noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandAudit {
    pub lo: f64,
    pub hi: f64,
    pub mean_test_error: f64,
    pub pass: bool,
}

/// The audits a report carries; divergence and band audits exist only for
/// the noisy realizable source, and none exist when every trial exhausted
/// or failed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExperimentAudits {
    pub length: Option<LengthAudit>,
    pub kl: Option<KlAudit>,
    pub band: Option<BandAudit>,
}

/// Aggregated outcome of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub source: SourceSpec,
    pub m: usize,
    pub trials: u64,
    pub max_len: usize,
    pub lambda: f64,
    pub records: Vec<TrialRecord>,
    pub exhausted_count: u64,
    pub error_count: u64,
    /// Statistics over trials where the search found a program and its test
    /// loss was measured.
    pub mdl_len: SummaryStat,
    pub mdl_test_error: SummaryStat,
    pub hstar_disagreement: SummaryStat,
    pub srm_test_error: SummaryStat,
    pub b_s: SummaryStat,
    pub construct_len: SummaryStat,
    pub audits: ExperimentAudits,
}

fn run_trial(spec: &SourceSpec, m: usize, trial: u64, max_len: usize, lambda: f64) -> TrialRecord {
    let mut rec = TrialRecord {
        trial,
        m: m as u64,
        b_s: None,
        exhausted: false,
        mdl_len: None,
        mdl_program: None,
        mdl_test_error: None,
        hstar_disagreement: None,
        srm_len: None,
        srm_train_error: None,
        srm_program: None,
        srm_test_error: None,
        construct_len: None,
        error: None,
    };
    let s = match sources::sample(spec, m, trial) {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.b_s = Some(disambiguation_prefix(&s));

    let mdl = mdl_search(&s, max_len);
    rec.exhausted = mdl.exhausted();
    if let Some(f) = mdl.found {
        match population_loss(&f.program, spec, N_TEST) {
            Ok(l) => rec.mdl_test_error = Some(l),
            Err(e) => rec.error = Some(e.to_string()),
        }
        if let SourceModel::RandomLabelNoise { h_star, .. } = spec.model() {
            match population_disagreement(&f.program, h_star, spec, N_TEST) {
                Ok(l) => rec.hstar_disagreement = Some(l),
                Err(e) => rec.error = Some(e.to_string()),
            }
        }
        rec.mdl_len = Some(f.code_len);
        rec.mdl_program = Some(f.program);
    }

    let srm = srm_search(&s, max_len, lambda)
        .found
        .expect("constants always fit any budget of at least 2");
    match population_loss(&srm.program, spec, N_TEST) {
        Ok(l) => rec.srm_test_error = Some(l),
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec.srm_len = Some(srm.code_len);
    rec.srm_train_error = Some(srm.train_error);
    rec.srm_program = Some(srm.program);

    let h_ref = match spec.model() {
        SourceModel::RandomLabelNoise { h_star, .. } => h_star.clone(),
        _ => Expr::Zero,
    };
    if let Ok(a) = assemble_interpolator(&h_ref, &s) {
        rec.construct_len = Some(a.code_len as u64);
    }
    rec
}

/// Runs `trials` independent trials of sampling, both searches, the
/// corrected-reference construction, and loss measurement, then aggregates
/// and audits. Trials run in parallel; every statistic reduces in
/// trial-index order, so the report is identical for any worker count.
///
/// Panics on `trials = 0` or a search budget below 2.
pub fn run_experiment(
    spec: &SourceSpec,
    m: usize,
    trials: u64,
    max_len: usize,
    lambda: f64,
) -> ExperimentReport {
    assert!(trials >= 1, "need at least one trial");
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(spec, m, t, max_len, lambda))
        .collect();

    let pick = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Vec<f64> {
        records.iter().filter_map(f).collect()
    };
    let mdl_rows: Vec<&TrialRecord> = records.iter().filter(|r| r.mdl_test_error.is_some()).collect();
    let mdl_len = summarize(&mdl_rows.iter().map(|r| r.mdl_len.unwrap() as f64).collect::<Vec<_>>());
    let mdl_test_error = summarize(
        &mdl_rows
            .iter()
            .map(|r| r.mdl_test_error.unwrap().value)
            .collect::<Vec<_>>(),
    );
    let hstar_disagreement = summarize(&pick(&|r| r.hstar_disagreement.map(|l| l.value)));
    let srm_test_error = summarize(&pick(&|r| r.srm_test_error.map(|l| l.value)));
    let b_s = summarize(&pick(&|r| r.b_s.map(|b| b as f64)));
    let construct_len = summarize(&pick(&|r| r.construct_len.map(|l| l as f64)));

    let mut audits = ExperimentAudits::default();
    if mdl_test_error.n > 0 {
        let bound = gen_bound_from_length(mdl_len.mean, m as u64);
        // d/dlen [1 - 2^(-len/m)] = ln2/m * 2^(-len/m)
        let dbound = std::f64::consts::LN_2 / m as f64 * (-mdl_len.mean / m as f64).exp2();
        let sigma = mdl_test_error.std_err + mdl_len.std_err * dbound;
        let slack = bound - mdl_test_error.mean;
        audits.length = Some(LengthAudit {
            bound,
            slack,
            sigma,
            pass: slack >= -3.0 * sigma,
        });
    }
    if let SourceModel::RandomLabelNoise {
        h_star,
        noise_num,
        noise_den,
    } = spec.model()
    {
        let l_star = *noise_num as f64 / *noise_den as f64;
        if hstar_disagreement.n > 0 && mdl_len.n > 0 {
            let q = hstar_disagreement.mean;
            let observed_kl = kl_bernoulli(l_star, q);
            let budget = rln_kl_budget(mdl_len.mean, m as u64, l_star);
            // d/dq KL(p||q) = (q - p) / (q (1-q) ln 2); the budget side
            // moves with mean length at rate 1/m.
            let dkl = if q > 0.0 && q < 1.0 {
                ((q - l_star) / (q * (1.0 - q) * std::f64::consts::LN_2)).abs()
            } else {
                0.0
            };
            let sigma = dkl * hstar_disagreement.std_err + mdl_len.std_err / m as f64;
            audits.kl = Some(KlAudit {
                observed_kl,
                budget,
                sigma,
                pass: observed_kl <= budget + 3.0 * sigma,
            });
        }
        if mdl_test_error.n > 0 && b_s.n > 0 {
            let hstar_len = bitlang::code_len(h_star).expect("validated reference") as f64;
            let log_m_bbar = (m as f64 * b_s.mean.max(1.0)).log2();
            let report = rln_band(m as u64, hstar_len, l_star, log_m_bbar, bounds::C_BIG_DEFAULT);
            let (lo, hi) = report.band.expect("noise band is two-sided");
            let mean = mdl_test_error.mean;
            audits.band = Some(BandAudit {
                lo: lo.value(),
                hi: hi.value(),
                mean_test_error: mean,
                pass: lo.value() <= mean && mean <= hi.value(),
            });
        }
    }

    ExperimentReport {
        source: spec.clone(),
        m,
        trials,
        max_len,
        lambda,
        exhausted_count: records.iter().filter(|r| r.exhausted).count() as u64,
        error_count: records.iter().filter(|r| r.error.is_some()).count() as u64,
        records,
        mdl_len,
        mdl_test_error,
        hstar_disagreement,
        srm_test_error,
        b_s,
        construct_len,
        audits,
    }
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_loss(v: &Option<LossEstimate>) -> String {
    v.map(|l| real(l.value)).unwrap_or_default()
}

fn opt_program(v: &Option<Expr>) -> String {
    v.as_ref().map(program_hex).unwrap_or_default()
}

/// Per-trial rows of an experiment report. Programs appear in their
/// `<bitlen>:<hex>` code form; absent fields are empty; error text has
/// commas and line breaks flattened so rows stay single-line.
pub fn trials_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "trial,m,b_s,exhausted,mdl_len,mdl_test_error,mdl_loss_mode,mdl_program,\
         srm_len,srm_train_error,srm_test_error,srm_program,\
         hstar_disagreement,construct_len,error\n",
    );
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.m,
            opt_u64(r.b_s),
            r.exhausted,
            opt_u64(r.mdl_len),
            opt_loss(&r.mdl_test_error),
            r.mdl_test_error
                .map(|l| l.mode.to_string())
                .unwrap_or_default(),
            opt_program(&r.mdl_program),
            opt_u64(r.srm_len),
            r.srm_train_error.map(real).unwrap_or_default(),
            opt_loss(&r.srm_test_error),
            opt_program(&r.srm_program),
            opt_loss(&r.hstar_disagreement),
            opt_u64(r.construct_len),
            r.error
                .as_deref()
                .unwrap_or_default()
                .replace([',', '\n'], ";"),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Hash-construction statistics
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashDemoTrial {
    pub trial: u64,
    pub success: bool,
    /// Found seed length; absent when no seed fit the budget.
    pub seed_len: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct HashDemoReport {
    pub m: u64,
    pub k: u64,
    pub b: u64,
    pub master_seed: u64,
    /// Seed-length budget the success rate is measured at.
    pub budget_r: u64,
    pub rows: Vec<HashDemoTrial>,
    pub success_rate: f64,
    /// Mean found seed length over successful trials; NaN if none succeeded.
    pub mean_seed_len: f64,
    /// Exact union-bound certificate at the budget; negative certifies that
    /// a seed exists for every target set of this shape.
    pub certificate: f64,
}

/// Repeatedly draws `m` distinct random `b`-bit prefixes, labels exactly
/// `k` of them 1, and searches for a seed within the recommended budget
/// `r = seed_length_r(m, k, b)`.
///
/// Panics unless `1 <= m <= 2^b`, `k <= m`, `trials >= 1`, and the budget
/// lands below 64 bits (the demo's seed-search limit).
pub fn hash_demo(m: u64, k: u64, b: u64, trials: u64, master_seed: u64) -> HashDemoReport {
    assert!(m >= 1 && k <= m, "bad (m, k) = ({m}, {k})");
    assert!(
        (1..=64).contains(&b) && (b >= 64 || (1u64 << b) >= m),
        "2^{b} prefixes cannot host {m} distinct targets"
    );
    assert!(trials >= 1, "need at least one trial");
    let budget_r = seed_length_r(m, k, b);
    assert!(budget_r < 64, "budget {budget_r} exceeds the demo seed-search limit");
    let mask = if b == 64 { u64::MAX } else { (1u64 << b) - 1 };

    let mut rows = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut vals: Vec<u64> = Vec::with_capacity(m as usize);
        let mut seen = HashSet::with_capacity(m as usize);
        for attempt in 0u64.. {
            if vals.len() as u64 == m {
                break;
            }
            let v = sources::stream_u64(master_seed, &[DEMO_STREAM, t, attempt]) & mask;
            if seen.insert(v) {
                vals.push(v);
            }
        }
        // Exactly k ones via a partial shuffle of the index list.
        let mut idx: Vec<u64> = (0..m).collect();
        for i in 0..k {
            let left = m - i;
            let j = i + sources::stream_u64(master_seed, &[DEMO_STREAM, t, i, 0]) % left;
            idx.swap(i as usize, j as usize);
        }
        let one_positions: HashSet<u64> = idx[..k as usize].iter().copied().collect();
        let targets: Vec<(BitVec, bool)> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut p = BitVec::with_capacity(b as usize);
                p.push_uint_msb(v, b as u32);
                (p, one_positions.contains(&(i as u64)))
            })
            .collect();
        match find_seed(&targets, budget_r) {
            Ok(seed) => rows.push(HashDemoTrial {
                trial: t,
                success: true,
                seed_len: Some(seed.len() as u64),
            }),
            Err(_) => rows.push(HashDemoTrial {
                trial: t,
                success: false,
                seed_len: None,
            }),
        }
    }

    let successes: Vec<u64> = rows.iter().filter_map(|r| r.seed_len).collect();
    let success_rate = successes.len() as f64 / trials as f64;
    let mean_seed_len = if successes.is_empty() {
        f64::NAN
    } else {
        successes.iter().sum::<u64>() as f64 / successes.len() as f64
    };
    let certificate =
        union_bound_log_fail(m, k, b, budget_r).expect("arguments validated above");
    HashDemoReport {
        m,
        k,
        b,
        master_seed,
        budget_r,
        rows,
        success_rate,
        mean_seed_len,
        certificate,
    }
}

pub fn hash_demo_csv(report: &HashDemoReport) -> String {
    let mut out = String::from("trial,success,seed_len\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{}", r.trial, r.success, opt_u64(r.seed_len));
    }
    out
}

// ---------------------------------------------------------------------------
// Pigeonhole lower-bound demo
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub b: u64,
    pub len_budget: usize,
    pub x1: Instance,
    pub x2: Instance,
    /// Programs under the budget re-checked during verification.
    pub programs_checked: u64,
    /// Exhaustive confirmation that no program under the budget tells the
    /// pair apart (so none can interpolate it labeled 0 and 1).
    pub verified: bool,
    /// What the shortest-interpolator search actually needs on the pair.
    pub mdl_len: Option<u64>,
}

/// Finds a colliding instance pair under the budget, re-verifies the
/// collision exhaustively, and measures the search length the adversarial
/// labeling forces.
pub fn lower_bound_demo(b: u64, len_budget: usize) -> Result<LowerBoundReport, LowerBoundError> {
    let (x1, x2) = lower_bound_pair(b, len_budget)?;
    let mut verified = true;
    let mut programs_checked = 0u64;
    for len in 2..len_budget {
        for e in enumerate(len) {
            programs_checked += 1;
            if e.eval(x1).unwrap_or(false) != e.eval(x2).unwrap_or(false) {
                verified = false;
            }
        }
    }
    let s = sources::Sample::new(vec![(x1, false), (x2, true)])
        .expect("the pair is distinct and labels are single-valued");
    let mdl = mdl_search(&s, len_budget.max(34));
    Ok(LowerBoundReport {
        b,
        len_budget,
        x1,
        x2,
        programs_checked,
        verified,
        mdl_len: mdl.found.map(|f| f.code_len),
    })
}

pub fn lower_bound_csv(report: &LowerBoundReport) -> String {
    format!(
        "b,len_budget,x1,x2,programs_checked,verified,mdl_len\n{},{},{},{},{},{},{}\n",
        report.b,
        report.len_budget,
        report.x1,
        report.x2,
        report.programs_checked,
        report.verified,
        opt_u64(report.mdl_len),
    )
}

// ---------------------------------------------------------------------------
// Quenched prefix study
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct QuenchReport {
    pub m: usize,
    pub trials: u64,
    /// Per-trial separating prefix widths, by trial index.
    pub rows: Vec<(u64, u64)>,
    /// Mean of `log2(max(b_S, 1))` over trials.
    pub quenched: f64,
    /// The `log2(4 log2 m)` envelope the quenched mean is expected to obey;
    /// meaningful for m >= 2.
    pub threshold: f64,
}

/// Measures the separating prefix width of fresh size-`m` samples over
/// `trials` trials.
pub fn quench(spec: &SourceSpec, m: usize, trials: u64) -> Result<QuenchReport, SourceError> {
    assert!(trials >= 1, "need at least one trial");
    let mut rows = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let s = sources::sample(spec, m, t)?;
        rows.push((t, disambiguation_prefix(&s)));
    }
    let quenched = rows
        .iter()
        .map(|&(_, b)| (b.max(1) as f64).log2())
        .sum::<f64>()
        / trials as f64;
    Ok(QuenchReport {
        m,
        trials,
        rows,
        quenched,
        threshold: (4.0 * (m as f64).log2()).log2(),
    })
}

pub fn quench_csv(report: &QuenchReport) -> String {
    let mut out = String::from("trial,b_s\n");
    for &(t, b) in &report.rows {
        let _ = writeln!(out, "{t},{b}");
    }
    out
}
