//! Generative sources over 64-bit instances, the deterministic sampler, the
//! disambiguation prefix length and its quenched average, prefix min-entropy,
//! and Bayes quantities.
//!
//! Randomness serialization (normative for reproducibility): every draw is
//! `prf64(seed, x)` where `seed` is the 64-bit master seed MSB-first and `x`
//! concatenates 64-bit fields MSB-first. Instance bit `j` (1-based) of
//! example `i` in trial `t` uses fields `[t, i, j]`; label draws reserve the
//! `j = 0` slot and use `[t, i, 0, attempt]`, where `attempt` counts
//! rejection-sampling retries for exact rational noise. Trial index
//! `u64::MAX` is reserved for the shared Monte Carlo test stream.

use crate::bitlang::{Expr, Instance};
use crate::hash_family::{pack_bits, prf64_words};

/// Instance prefix capacity: programs observe at most this many bits.
pub const B_MAX: u64 = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SourceError {
    #[error("label noise {num}/{den} outside [0, 1/2)")]
    NoiseRange { num: u64, den: u64 },
    #[error("probability {value} outside [0, 1]")]
    ProbRange { value: f64 },
    #[error("sparse scale {c} must be finite and positive")]
    BadScale { c: f64 },
    #[error("reference program reads bit {index} beyond the {B_MAX}-bit instance")]
    HStarCapacity { index: u64 },
    #[error("sampler produced one instance with both labels (trial {trial})")]
    ContradictorySample { trial: u64 },
}

/// The generative model for one source distribution.
#[derive(Clone, Debug)]
pub enum SourceModel {
    /// Uniform instance bits; `y = h_star(x) XOR Ber(noise_num/noise_den)`.
    /// The noise rate is kept rational so flips are exact threshold draws.
    RandomLabelNoise {
        h_star: Expr,
        noise_num: u64,
        noise_den: u64,
    },
    /// Bit 1 is Ber(alpha), the rest uniform; `y = x2` when bit 1 is 0,
    /// otherwise `y ~ Ber(beta)`.
    AgnosticMixture { alpha: f64, beta: f64 },
    /// Uniform instance bits, constant label 0.
    AllZerosY,
    /// Bit `i` is Ber(min(1/2, c/i)); `y = x1` noiselessly.
    SparseDiff { c: f64 },
}

/// A validated source: model plus master seed.
#[derive(Clone, Debug)]
pub struct SourceSpec {
    model: SourceModel,
    master_seed: u64,
}

impl SourceSpec {
    pub fn new(model: SourceModel, master_seed: u64) -> Result<Self, SourceError> {
        match &model {
            SourceModel::RandomLabelNoise {
                h_star,
                noise_num,
                noise_den,
            } => {
                if *noise_den == 0 || 2 * noise_num >= *noise_den {
                    return Err(SourceError::NoiseRange {
                        num: *noise_num,
                        den: *noise_den,
                    });
                }
                if let Some(&max_dep) = h_star.dependency_bits().iter().next_back() {
                    if max_dep > B_MAX {
                        return Err(SourceError::HStarCapacity { index: max_dep });
                    }
                }
            }
            SourceModel::AgnosticMixture { alpha, beta } => {
                for p in [*alpha, *beta] {
                    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                        return Err(SourceError::ProbRange { value: p });
                    }
                }
            }
            SourceModel::AllZerosY => {}
            SourceModel::SparseDiff { c } => {
                if !c.is_finite() || *c <= 0.0 {
                    return Err(SourceError::BadScale { c: *c });
                }
            }
        }
        Ok(SourceSpec { model, master_seed })
    }

    pub fn model(&self) -> &SourceModel {
        &self.model
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Same model, different master seed.
    pub fn reseeded(&self, master_seed: u64) -> SourceSpec {
        SourceSpec {
            model: self.model.clone(),
            master_seed,
        }
    }
}

/// A labeled sample. Never contains one instance with both labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pairs: Vec<(Instance, bool)>,
}

impl Sample {
    /// Validates nonemptiness and label consistency.
    pub fn new(pairs: Vec<(Instance, bool)>) -> Result<Self, SourceError> {
        assert!(!pairs.is_empty(), "a sample holds at least one pair");
        let mut seen = std::collections::HashMap::with_capacity(pairs.len());
        for (x, y) in &pairs {
            if *seen.entry(x.0).or_insert(*y) != *y {
                return Err(SourceError::ContradictorySample { trial: 0 });
            }
        }
        Ok(Sample { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pairs(&self) -> &[(Instance, bool)] {
        &self.pairs
    }
}

/// One 64-bit pseudorandom word for the given field tuple: the prf applied
/// to seed = master_seed (64 bits) and x = the concatenated 64-bit fields.
pub(crate) fn stream_u64(master_seed: u64, fields: &[u64]) -> u64 {
    debug_assert!(fields.len() <= 4);
    let mut w = [0u64; 8];
    // gamma(65) = 13 bits, then the 64-bit seed.
    pack_bits(&mut w, 0, 65, 13);
    pack_bits(&mut w, 13, master_seed as u128, 64);
    let x_len = 64 * fields.len() as u32;
    let g_len = 2 * (x_len + 1).ilog2() + 1;
    pack_bits(&mut w, 77, (x_len + 1) as u128, g_len);
    let mut at = 77 + g_len;
    for &f in fields {
        pack_bits(&mut w, at, f as u128, 64);
        at += 64;
    }
    prf64_words(&w[..(at as usize).div_ceil(64)])
}

/// Exact dyadic Bernoulli: true with probability `floor(p * 2^64) / 2^64`.
/// The bias against the real-valued `p` is below `2^-64`.
fn bernoulli_dyadic(u: u64, p: f64) -> bool {
    debug_assert!((0.0..=1.0).contains(&p));
    if p >= 1.0 {
        return true;
    }
    // multiplying by 2^64 only shifts the exponent, so the product is exact
    u < (p * 18446744073709551616.0) as u64
}

/// Bernoulli probability of instance bit `j` (1-based) under the model.
pub(crate) fn bit_probability(model: &SourceModel, j: u64) -> f64 {
    debug_assert!((1..=B_MAX).contains(&j));
    match model {
        SourceModel::RandomLabelNoise { .. } | SourceModel::AllZerosY => 0.5,
        SourceModel::AgnosticMixture { alpha, .. } => {
            if j == 1 {
                *alpha
            } else {
                0.5
            }
        }
        SourceModel::SparseDiff { c } => (c / j as f64).min(0.5),
    }
}

/// Instance `i` of trial `trial`, bit by bit.
pub(crate) fn draw_instance(spec: &SourceSpec, trial: u64, i: u64) -> Instance {
    let mut v = 0u64;
    for j in 1..=B_MAX {
        let u = stream_u64(spec.master_seed, &[trial, i, j]);
        let p = bit_probability(&spec.model, j);
        v = (v << 1) | bernoulli_dyadic(u, p) as u64;
    }
    Instance(v)
}

/// Exact Ber(num/den) from the label stream of `(trial, i)`, by rejection
/// on the `2^64 mod den` overhang.
fn bernoulli_rational(spec: &SourceSpec, trial: u64, i: u64, num: u64, den: u64) -> bool {
    debug_assert!(den >= 1 && num <= den);
    let groups = ((1u128 << 64) / den as u128) as u64;
    let limit = groups as u128 * den as u128;
    for attempt in 0..128 {
        let u = stream_u64(spec.master_seed, &[trial, i, 0, attempt]);
        if (u as u128) < limit {
            return (u % den) < num;
        }
    }
    unreachable!("rejection sampling failed 128 times; the stream is broken");
}

pub(crate) fn draw_label(spec: &SourceSpec, trial: u64, i: u64, x: Instance) -> bool {
    match &spec.model {
        SourceModel::RandomLabelNoise {
            h_star,
            noise_num,
            noise_den,
        } => {
            let base = h_star
                .eval(x)
                .expect("dependency bits validated at construction");
            let flip = *noise_num > 0
                && bernoulli_rational(spec, trial, i, *noise_num, *noise_den);
            base ^ flip
        }
        SourceModel::AgnosticMixture { beta, .. } => {
            if x.bit(1) {
                let u = stream_u64(spec.master_seed, &[trial, i, 0, 0]);
                bernoulli_dyadic(u, *beta)
            } else {
                x.bit(2)
            }
        }
        SourceModel::AllZerosY => false,
        SourceModel::SparseDiff { .. } => x.bit(1),
    }
}

/// Draws `m` labeled examples for the given trial index. Deterministic in
/// `(spec.master_seed, trial)`. The two largest trial indices are reserved:
/// `u64::MAX` for the test stream used by Monte Carlo loss estimates and
/// `u64::MAX - 1` for demo-harness randomness.
pub fn sample(spec: &SourceSpec, m: usize, trial: u64) -> Result<Sample, SourceError> {
    assert!(m >= 1, "sample size must be positive");
    debug_assert!(trial < u64::MAX - 1, "the two largest trial indices are reserved");
    let mut pairs = Vec::with_capacity(m);
    for i in 0..m as u64 {
        let x = draw_instance(spec, trial, i);
        let y = draw_label(spec, trial, i, x);
        pairs.push((x, y));
    }
    Sample::new(pairs).map_err(|_| SourceError::ContradictorySample { trial })
}

/// Minimal prefix length `b` such that equal `b`-bit prefixes imply equal
/// `(x, y)` pairs; 0 when every pair is identical or the sample is a
/// singleton. The `Sample` invariant rules out the undisambiguable case of
/// one instance carrying both labels.
pub fn disambiguation_prefix(s: &Sample) -> u64 {
    let pairs = s.pairs();
    let mut b = 0u64;
    for (idx, (xi, yi)) in pairs.iter().enumerate() {
        for (xj, yj) in &pairs[idx + 1..] {
            if xi == xj {
                debug_assert_eq!(yi, yj, "Sample invariant");
                continue;
            }
            b = b.max(xi.common_prefix_len(*xj) + 1);
        }
    }
    b
}

/// Monte Carlo estimate of the quenched prefix length `E[log2 b(S)]` over
/// `trials` seeded samples of size `m`; trials with `b(S) = 0` contribute 0.
pub fn quenched_estimate(spec: &SourceSpec, m: usize, trials: u64) -> Result<f64, SourceError> {
    assert!(trials >= 1, "need at least one trial");
    let mut total = 0.0;
    for t in 0..trials {
        let s = sample(spec, m, t)?;
        let b = disambiguation_prefix(&s).max(1);
        total += (b as f64).log2();
    }
    Ok(total / trials as f64)
}

/// Min-entropy of the first `b` instance bits: since every model here has
/// independent bits, this is `sum_i -log2 max(p_i, 1-p_i)`.
pub fn min_entropy_prefix(spec: &SourceSpec, b: u64) -> f64 {
    assert!(b <= B_MAX, "prefix width {b} exceeds capacity");
    (1..=b)
        .map(|j| {
            let p = bit_probability(&spec.model, j);
            -p.max(1.0 - p).log2()
        })
        .sum()
}

/// Minimal achievable population error.
pub fn bayes_error(spec: &SourceSpec) -> f64 {
    match &spec.model {
        SourceModel::RandomLabelNoise {
            noise_num,
            noise_den,
            ..
        } => *noise_num as f64 / *noise_den as f64,
        SourceModel::AgnosticMixture { alpha, beta } => alpha * beta,
        SourceModel::AllZerosY => 0.0,
        SourceModel::SparseDiff { .. } => 0.0,
    }
}

/// Large-sample error of the shortest-interpolator rule, where a closed
/// form is known: `2L*(1-L*)` under random label noise and `2ab(1-b)` for
/// the mixture; no closed form is claimed for the other models.
pub fn asymptotic_mdl_error(spec: &SourceSpec) -> Option<f64> {
    match &spec.model {
        SourceModel::RandomLabelNoise {
            noise_num,
            noise_den,
            ..
        } => {
            let l = *noise_num as f64 / *noise_den as f64;
            Some(crate::bounds::l_samp(l))
        }
        SourceModel::AgnosticMixture { alpha, beta } => {
            Some(2.0 * alpha * beta * (1.0 - beta))
        }
        SourceModel::AllZerosY | SourceModel::SparseDiff { .. } => None,
    }
}
