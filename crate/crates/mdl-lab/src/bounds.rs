//! Entropy, divergence, the two asymptotic error curves, and the bound
//! evaluators used by the experiment audits.
//!
//! Functions here take `f64` and assert their stated domains; the `Prob` and
//! `Bits` newtypes carry the invariants on report fields. Everything is plain
//! 64-bit floating point, with one numerically careful spot: the union-bound
//! certificate evaluates `2^r * log2(1 - x)` through a series when `x` is too
//! small for `log2(1 - x)` to be representable directly.

use std::f64::consts::LN_2;

/// A probability. Construction outside `[0, 1]` (or NaN) is rejected.
#[derive(Copy, Clone, PartialEq, PartialOrd, Debug)]
pub struct Prob(f64);

impl Prob {
    pub fn new(value: f64) -> Result<Self, MathError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Prob(value))
        } else {
            Err(MathError::ProbRange { value })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Prob {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An information quantity in bits: nonnegative, possibly infinite.
#[derive(Copy, Clone, PartialEq, PartialOrd, Debug)]
pub struct Bits(f64);

impl Bits {
    pub fn new(value: f64) -> Result<Self, MathError> {
        if value >= 0.0 {
            Ok(Bits(value))
        } else {
            Err(MathError::BitsRange { value })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MathError {
    #[error("probability {value} outside [0, 1]")]
    ProbRange { value: f64 },
    #[error("bit count {value} is negative or NaN")]
    BitsRange { value: f64 },
    #[error("invalid counts: {what}")]
    BadCounts { what: String },
}

/// Default stand-in for the unspecified constant in the asymptotic bounds.
pub const C_BIG_DEFAULT: f64 = 4.0;

fn assert_prob(p: f64, name: &str) {
    assert!(
        p.is_finite() && (0.0..=1.0).contains(&p),
        "{name} = {p} outside [0, 1]"
    );
}

/// Binary entropy in bits, with `0 * log2(0) = 0`. Domain `[0, 1]`.
pub fn binary_entropy(p: f64) -> f64 {
    assert_prob(p, "entropy argument");
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

/// KL divergence between Bernoulli(alpha) and Bernoulli(beta), in bits.
/// Infinite when `beta` is 0 or 1 while `alpha` is not.
pub fn kl_bernoulli(alpha: f64, beta: f64) -> f64 {
    assert_prob(alpha, "kl alpha");
    assert_prob(beta, "kl beta");
    let mut kl = 0.0;
    if alpha > 0.0 {
        kl += alpha * (alpha / beta).log2();
    }
    if alpha < 1.0 {
        kl += (1.0 - alpha) * ((1.0 - alpha) / (1.0 - beta)).log2();
    }
    // -0.0 shows up from exact equality; normalize.
    kl + 0.0
}

/// Asymptotic error of the shortest-interpolator rule against adversarial
/// labels flipped at rate `alpha`: `1 - 2^(-H(alpha))`.
pub fn l_ag(alpha: f64) -> f64 {
    1.0 - (-binary_entropy(alpha)).exp2()
}

/// Asymptotic error under label noise `l_star`, where predictions sample the
/// label posterior: `2 * l_star * (1 - l_star)`.
pub fn l_samp(l_star: f64) -> f64 {
    assert_prob(l_star, "l_samp argument");
    2.0 * l_star * (1.0 - l_star)
}

/// Gap of the shift inequality `1 - 2^(-H(alpha) - c) <= l_ag(alpha) + c`
/// for `c >= 0`; nonnegative, and zero at `c = 0`.
pub fn envelope_shift_gap(alpha: f64, c: f64) -> f64 {
    assert!(c >= 0.0, "shift {c} must be nonnegative");
    (l_ag(alpha) + c) - (1.0 - (-binary_entropy(alpha) - c).exp2())
}

/// Gap of the one-sided Pinsker strengthening
/// `|beta - alpha| <= sqrt(2 * alpha * KL) + 2 * KL`; nonnegative.
/// Requires finite `kl_bernoulli(alpha, beta)`.
pub fn strong_pinsker_gap(alpha: f64, beta: f64) -> f64 {
    let kl = kl_bernoulli(alpha, beta);
    assert!(kl.is_finite(), "strong_pinsker_gap needs finite divergence");
    (2.0 * alpha * kl).sqrt() + 2.0 * kl - (beta - alpha).abs()
}

/// Entropy cost saved by deleting duplicates: with `k` ones among `m`
/// labels, removing `k_plus` duplicate ones and `k_minus` duplicate zeros
/// never increases the total memorization cost `m * H(k/m)`.
/// Returns `m*H(k/m) - m'*H(k'/m')` with `m' = m - k_plus - k_minus`,
/// `k' = k - k_plus`; nonnegative.
pub fn dedup_entropy_gap(m: u64, k_plus: u64, k_minus: u64, k: u64) -> Result<f64, MathError> {
    let bad = |what: String| Err(MathError::BadCounts { what });
    if k > m {
        return bad(format!("k = {k} exceeds m = {m}"));
    }
    if k_plus > k {
        return bad(format!("k_plus = {k_plus} exceeds k = {k}"));
    }
    if k_minus > m - k {
        return bad(format!("k_minus = {k_minus} exceeds m - k = {}", m - k));
    }
    if k_plus + k_minus >= m {
        return bad(format!(
            "removals {} leave no sample from m = {m}",
            k_plus + k_minus
        ));
    }
    let m2 = m - k_plus - k_minus;
    let k2 = k - k_plus;
    let full = m as f64 * binary_entropy(k as f64 / m as f64);
    let reduced = m2 as f64 * binary_entropy(k2 as f64 / m2 as f64);
    Ok(full - reduced)
}

/// Seed length sufficient for the seeded-hash existence argument:
/// `ceil(m*H(k/m) + log2 m + log2 b + 1)`.
pub fn seed_length_r(m: u64, k: u64, b: u64) -> u64 {
    assert!(m >= 1 && k <= m && b >= 1, "bad (m, k, b) = ({m}, {k}, {b})");
    let raw = m as f64 * binary_entropy(k as f64 / m as f64)
        + (m as f64).log2()
        + (b as f64).log2()
        + 1.0;
    raw.ceil() as u64
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln C(n, k)` for a real-valued `n >= k`, via the falling factorial.
fn ln_choose(n: f64, k: u64) -> f64 {
    let mut s = 0.0;
    for i in 0..k {
        s += (n - i as f64).ln();
    }
    s - ln_factorial(k)
}

/// Log2 of the union-bound failure mass for a truly random hash family:
/// `log2[C(m,k) * C(2^b, m)] + 2^r * log2(1 - 2^(-m*H(k/m)))`.
/// A negative value certifies that some seed of length `r` realizes every
/// target set. Evaluated in the log domain; when `x = 2^(-m*H(k/m))` is
/// below 1e-8, `2^r * log2(1-x)` is expanded as
/// `-2^r * x/ln2 * (1 + x/2 + x^2/3)` to dodge underflow.
pub fn union_bound_log_fail(m: u64, k: u64, b: u64, r: u64) -> Result<f64, MathError> {
    if k > m {
        return Err(MathError::BadCounts {
            what: format!("k = {k} exceeds m = {m}"),
        });
    }
    if m == 0 || b == 0 || b > 1024 {
        return Err(MathError::BadCounts {
            what: format!("bad (m, b) = ({m}, {b})"),
        });
    }
    if b < 64 && (1u64 << b) < m {
        return Err(MathError::BadCounts {
            what: format!("2^{b} instances cannot host m = {m} distinct targets"),
        });
    }
    let n_instances = (b as f64).exp2();
    let log2_choose = (ln_choose(m as f64, k) + ln_choose(n_instances, m)) / LN_2;
    let ent = m as f64 * binary_entropy(k as f64 / m as f64);
    let x = (-ent).exp2();
    let pow_r = (r as f64).exp2();
    let tail = if x < 1e-8 {
        -pow_r * x / LN_2 * (1.0 + x / 2.0 + x * x / 3.0)
    } else {
        pow_r * (1.0 - x).log2()
    };
    Ok(log2_choose + tail)
}

/// Expected-error bound for any interpolating rule whose expected program
/// length is `mean_len` on samples of size `m`: `1 - 2^(-mean_len/m)`.
pub fn gen_bound_from_length(mean_len: f64, m: u64) -> f64 {
    assert!(mean_len >= 0.0 && m >= 1, "bad (mean_len, m) = ({mean_len}, {m})");
    1.0 - (-mean_len / m as f64).exp2()
}

/// Divergence budget for an interpolator of expected length `mean_len`
/// under label noise `l_star`: `max(0, (mean_len - m*H(l_star)) / m)`.
/// Bounds the divergence of the noise rate from the mean disagreement with
/// the reference labeler.
pub fn rln_kl_budget(mean_len: f64, m: u64, l_star: f64) -> f64 {
    assert!(m >= 1, "m must be positive");
    ((mean_len - m as f64 * binary_entropy(l_star)) / m as f64).max(0.0)
}

/// Kind tag for a [`BoundReport`].
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum BoundKind {
    Agnostic,
    RandomLabelNoise,
    InterpolatorLength,
    KlBudget,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Agnostic => "agnostic",
            BoundKind::RandomLabelNoise => "random-label-noise",
            BoundKind::InterpolatorLength => "interpolator-length",
            BoundKind::KlBudget => "kl-budget",
        })
    }
}

/// Echo of the inputs a bound was evaluated at.
#[derive(Copy, Clone, Debug)]
pub struct BoundInputs {
    pub m: u64,
    pub h_len: f64,
    pub rate: f64,
    pub log_m_bbar: f64,
    pub c_big: f64,
}

/// A bound value: a probability bound or an information budget.
#[derive(Copy, Clone, Debug)]
pub enum BoundValue {
    Probability(Prob),
    Information(Bits),
}

impl BoundValue {
    pub fn as_f64(self) -> f64 {
        match self {
            BoundValue::Probability(p) => p.value(),
            BoundValue::Information(b) => b.value(),
        }
    }
}

/// An evaluated bound, with its inputs echoed for reporting.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub inputs: BoundInputs,
    pub value: BoundValue,
    /// Present only for the random-label-noise band.
    pub band: Option<(Prob, Prob)>,
}

/// Upper bound on interpolating-MDL error against a competitor of length
/// `h_len` and error `l_h`: `l_ag(l_h) + c_big*(h_len + log_m_bbar)/m`,
/// clamped to at most 1.
pub fn agnostic_rhs(m: u64, h_len: f64, l_h: f64, log_m_bbar: f64, c_big: f64) -> BoundReport {
    assert!(m >= 1 && c_big > 0.0, "bad (m, c_big) = ({m}, {c_big})");
    assert!(h_len >= 0.0 && log_m_bbar >= 0.0);
    let value = (l_ag(l_h) + c_big * (h_len + log_m_bbar) / m as f64).min(1.0);
    BoundReport {
        kind: BoundKind::Agnostic,
        inputs: BoundInputs {
            m,
            h_len,
            rate: l_h,
            log_m_bbar,
            c_big,
        },
        value: BoundValue::Probability(Prob::new(value).expect("clamped to [0, 1]")),
        band: None,
    }
}

/// Two-sided band around `l_samp(l_star)` for mean MDL error under random
/// label noise at finite m: half-width `c_big * (R + sqrt(l_star * R))`
/// where `R = (hstar_len + log_m_bbar) / m`, clamped to `[0, 1]`.
pub fn rln_band(m: u64, hstar_len: f64, l_star: f64, log_m_bbar: f64, c_big: f64) -> BoundReport {
    assert!(m >= 1 && c_big > 0.0, "bad (m, c_big) = ({m}, {c_big})");
    assert_prob(l_star, "l_star");
    let r = (hstar_len + log_m_bbar) / m as f64;
    let center = l_samp(l_star);
    let half_width = c_big * (r + (l_star * r).sqrt());
    let lo = (center - half_width).max(0.0);
    let hi = (center + half_width).min(1.0);
    BoundReport {
        kind: BoundKind::RandomLabelNoise,
        inputs: BoundInputs {
            m,
            h_len: hstar_len,
            rate: l_star,
            log_m_bbar,
            c_big,
        },
        value: BoundValue::Probability(Prob::new(center).expect("l_samp maps into [0, 1]")),
        band: Some((
            Prob::new(lo).expect("clamped"),
            Prob::new(hi).expect("clamped"),
        )),
    }
}
