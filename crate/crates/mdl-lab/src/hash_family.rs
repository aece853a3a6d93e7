//! The seeded hash family: a fixed 64-bit mixing PRF, the Bernoulli
//! predictor built on it, seed search, duplicate removal, and the composite
//! interpolator (reference program XOR seeded hash of the disambiguating
//! prefix).
//!
//! The PRF is normative and bit-exact: the message is
//! `gamma(|seed|+1) || seed || gamma(|x|+1) || x` packed MSB-first into
//! 64-bit words (zero-padded), absorbed word by word into a splitmix-style
//! finalizer chain. Golden values below were produced by an independent
//! straight-line implementation of this paragraph.

use crate::bitlang::{self, Expr, HashExpr};
use crate::bits::BitVec;
use crate::bounds::seed_length_r;
use crate::sources::{disambiguation_prefix, Sample};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HashError {
    #[error("no seed of length <= {max_len} matches the targets")]
    NotFound { max_len: u64 },
    #[error("target prefixes are not pairwise distinct")]
    DuplicateTargets,
    #[error("the same prefix appears with both labels")]
    ContradictoryTargets,
    #[error("reference program failed to evaluate: {0}")]
    Eval(#[from] bitlang::EvalError),
}

const GOLDEN_GAMMA: u64 = 0x9E3779B97F4A7C15;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D049BB133111EB);
    z ^= z >> 31;
    z
}

/// Core absorption loop over the packed message words.
pub(crate) fn prf64_words(words: &[u64]) -> u64 {
    let mut state = GOLDEN_GAMMA;
    for (i, &w) in words.iter().enumerate() {
        state = mix64(state ^ w ^ (i as u64 + 1).wrapping_mul(GOLDEN_GAMMA));
    }
    mix64(state)
}

pub(crate) fn build_message(seed: &BitVec, x_prefix: &BitVec) -> BitVec {
    let mut msg = BitVec::with_capacity(seed.len() + x_prefix.len() + 32);
    append_message_head(&mut msg, seed);
    append_message_tail(&mut msg, x_prefix);
    msg
}

/// `gamma(|seed|+1) || seed`; the head is shared by every evaluation point.
pub(crate) fn append_message_head(msg: &mut BitVec, seed: &BitVec) {
    let g = bitlang::gamma_encode(seed.len() as u64 + 1).expect("len + 1 >= 1");
    msg.extend_bits(&g);
    msg.extend_bits(seed);
}

/// `gamma(|x|+1) || x`.
pub(crate) fn append_message_tail(msg: &mut BitVec, x_prefix: &BitVec) {
    let g = bitlang::gamma_encode(x_prefix.len() as u64 + 1).expect("len + 1 >= 1");
    msg.extend_bits(&g);
    msg.extend_bits(x_prefix);
}

/// The seeded pseudorandom function. Both argument lengths are coded into
/// the message, so `("0", x)` and `("00", x)` hash differently.
pub fn prf64(seed: &BitVec, x_prefix: &BitVec) -> u64 {
    prf64_words(build_message(seed, x_prefix).words())
}

/// The prediction threshold: `prf64 < floor(k * 2^64 / m)` means predict 1.
pub(crate) fn prf_threshold(k: u64, m: u64) -> u128 {
    debug_assert!(m >= 1 && k <= m, "bad (k, m) = ({k}, {m})");
    ((k as u128) << 64) / m as u128
}

/// Writes the `len` low bits of `val`, MSB-first, into `buf` starting at
/// global bit offset `at`. Touched bits must currently be zero; this is the
/// allocation-free mirror of `BitVec::push_uint_msb` for hot paths.
pub(crate) fn pack_bits(buf: &mut [u64], at: u32, val: u128, len: u32) {
    debug_assert!(len <= 128);
    let mut done = 0u32;
    while done < len {
        let pos = at + done;
        let word = (pos / 64) as usize;
        let off = pos % 64;
        let room = 64 - off;
        let take = room.min(len - done);
        let chunk = (val >> (len - done - take)) as u64 & (u64::MAX >> (64 - take));
        buf[word] |= chunk << (room - take);
        done += take;
    }
}

/// Predicts 1 iff `prf64(seed, x_prefix) < floor(k * 2^64 / m)`; the
/// prediction frequency over fresh inputs is `k/m` up to a threshold
/// rounding bias below `2^-60`. `k = m` predicts 1 unconditionally.
pub fn hash_predict(seed: &BitVec, k: u64, m: u64, x_prefix: &BitVec) -> bool {
    (prf64(seed, x_prefix) as u128) < prf_threshold(k, m)
}

fn predict_all(seed: &BitVec, k: u64, m: u64, targets: &[(BitVec, bool)]) -> bool {
    let mut head = BitVec::with_capacity(seed.len() + 16);
    append_message_head(&mut head, seed);
    let head_len = head.len();
    let threshold = prf_threshold(k, m);
    let mut msg = head;
    for (x, y) in targets {
        msg.truncate(head_len);
        append_message_tail(&mut msg, x);
        let hit = (prf64_words(msg.words()) as u128) < threshold;
        if hit != *y {
            return false;
        }
    }
    true
}

/// Finds the first seed, in ascending length then ascending value, whose
/// predictions match every `(x_prefix, y)` target, with `k = #ones` and
/// `m = #targets`. Prefixes must be pairwise distinct.
pub fn find_seed(targets: &[(BitVec, bool)], max_len: u64) -> Result<BitVec, HashError> {
    let mut seen = std::collections::HashSet::new();
    for (x, _) in targets {
        if !seen.insert(x) {
            return Err(HashError::DuplicateTargets);
        }
    }
    if targets.is_empty() {
        return Ok(BitVec::new());
    }
    let m = targets.len() as u64;
    let k = targets.iter().filter(|(_, y)| *y).count() as u64;
    assert!(max_len < 64, "seed search beyond 63 bits is not supported");
    for s in 0..=max_len {
        for sv in 0..(1u64 << s) {
            let mut seed = BitVec::with_capacity(s as usize);
            seed.push_uint_msb(sv, s as u32);
            if predict_all(&seed, k, m, targets) {
                return Ok(seed);
            }
        }
    }
    Err(HashError::NotFound { max_len })
}

/// Removes exact duplicate `(x_prefix, y)` pairs, keeping first occurrences
/// in order; errors if a prefix appears with both labels.
pub fn dedupe(targets: &[(BitVec, bool)]) -> Result<Vec<(BitVec, bool)>, HashError> {
    let mut seen: HashMap<BitVec, bool> = HashMap::with_capacity(targets.len());
    let mut out = Vec::with_capacity(targets.len());
    for (x, y) in targets {
        match seen.get(x) {
            None => {
                seen.insert(x.clone(), *y);
                out.push((x.clone(), *y));
            }
            Some(y0) if y0 == y => {}
            Some(_) => return Err(HashError::ContradictoryTargets),
        }
    }
    Ok(out)
}

/// The composite interpolator returned by [`assemble_interpolator`].
#[derive(Clone, Debug)]
pub struct AssembledInterpolator {
    pub program: Expr,
    /// Distinct targets after duplicate removal.
    pub m_dedup: u64,
    /// Residual ones among the distinct targets.
    pub k_dedup: u64,
    /// Hash prefix width: the sample's disambiguation prefix, at least 1.
    pub b: u64,
    pub seed: BitVec,
    pub code_len: usize,
}

/// Exact code length of `Xor(h_ref, Hash(m', k', b, seed))`:
/// `|h_ref| + 7` opcode bits plus the four gamma headers plus the seed.
pub fn composite_code_len(
    h_ref_len: usize,
    m_dedup: u64,
    k_dedup: u64,
    b: u64,
    seed_len: usize,
) -> usize {
    let g = |n: u64| bitlang::gamma_len(n).expect("positive parameter");
    h_ref_len
        + 7
        + g(m_dedup)
        + g(k_dedup + 1)
        + g(b)
        + g(seed_len as u64 + 1)
        + seed_len
}

/// Corrects `h_ref` into an exact interpolator of `s`: computes residual
/// labels `y_i XOR h_ref(x_i)`, truncates instances to the sample's
/// disambiguation prefix (widened to 1 for fully-duplicate samples), removes
/// duplicates, searches for a seed with budget `seed_length_r(m',k',b) + 8`,
/// and returns `Xor(h_ref, Hash(m', k', b, seed))`.
pub fn assemble_interpolator(h_ref: &Expr, s: &Sample) -> Result<AssembledInterpolator, HashError> {
    let b = disambiguation_prefix(s).max(1);
    let mut targets = Vec::with_capacity(s.len());
    for (x, y) in s.pairs() {
        let residual = *y ^ h_ref.eval(*x)?;
        targets.push((x.prefix(b), residual));
    }
    let distinct = dedupe(&targets)?;
    let m_dedup = distinct.len() as u64;
    let k_dedup = distinct.iter().filter(|(_, y)| *y).count() as u64;
    let budget = seed_length_r(m_dedup, k_dedup, b) + 8;
    let seed = find_seed(&distinct, budget)?;
    let program = Expr::Xor(
        Box::new(h_ref.clone()),
        Box::new(Expr::Hash(HashExpr {
            m: m_dedup,
            k: k_dedup,
            b,
            seed: seed.clone(),
        })),
    );
    let code_len = bitlang::encode(&program)
        .expect("composite parameters are valid")
        .len();
    debug_assert!(
        s.pairs()
            .iter()
            .all(|(x, y)| program.eval(*x).map(|p| p == *y).unwrap_or(false)),
        "assembled program must interpolate the sample"
    );
    Ok(AssembledInterpolator {
        program,
        m_dedup,
        k_dedup,
        b,
        seed,
        code_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitlang::Instance;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitVec {
        BitVec::from_bits_str(s)
    }

    /// Golden values from an independent straight-line implementation of the
    /// documented message layout and mixer.
    #[test]
    fn prf64_golden_values() {
        assert_eq!(prf64(&bits(""), &bits("")), 0x356EF2E0A4928FC5);
        assert_eq!(prf64(&bits("1"), &bits("01")), 0x6F352F9AAADEFA8F);
        assert_eq!(prf64(&bits("0110"), &bits("10110010")), 0x124C7973F2FB30DA);
        assert_eq!(
            prf64(&bits("11111111111111111111"), &BitVec::from_iter(std::iter::repeat(false).take(40))),
            0x201A0C7D17141878
        );
    }

    /// `pack_bits` must lay out words exactly as `BitVec` does, including
    /// zero padding, or the packed prf fast path would diverge.
    #[test]
    fn pack_bits_matches_bitvec_layout() {
        let cases: &[&[(u128, u32)]] = &[
            &[(0, 0)],
            &[(1, 1), (0b01, 2)],
            &[(65, 13), (0xDEAD_BEEF_DEAD_BEEF, 64), (0x1FF, 9)],
            &[(u64::MAX as u128, 64), (u64::MAX as u128, 64), (7, 3)],
            &[((1u128 << 77) - 1, 77), (0b101, 3)],
            &[(0x1234_5678_9ABC_DEF0_1122, 80)],
        ];
        for fields in cases {
            let mut bv = BitVec::new();
            let mut buf = [0u64; 4];
            let mut at = 0u32;
            for &(val, len) in *fields {
                pack_bits(&mut buf, at, val, len);
                at += len;
                // BitVec takes u64 chunks; split wide values.
                if len > 64 {
                    bv.push_uint_msb((val >> 64) as u64, len - 64);
                    bv.push_uint_msb(val as u64, 64);
                } else {
                    bv.push_uint_msb(val as u64, len);
                }
            }
            let n = (at as usize).div_ceil(64);
            assert_eq!(&buf[..n], bv.words(), "fields {fields:?}");
            assert_eq!(
                prf64_words(&buf[..n]),
                prf64_words(bv.words()),
                "fields {fields:?}"
            );
        }
    }

    #[test]
    fn prf64_is_length_sensitive() {
        let s1 = bits("0");
        let s2 = bits("00");
        let mut differing = 0;
        for i in 0u64..1000 {
            let mut x = BitVec::new();
            x.push_uint_msb(i, 32);
            if prf64(&s1, &x) != prf64(&s2, &x) {
                differing += 1;
            }
        }
        assert!(differing >= 990, "only {differing}/1000 inputs differ");
    }

    #[test]
    fn hash_predict_constant_rates() {
        for i in 0u64..64 {
            let mut x = BitVec::new();
            x.push_uint_msb(i, 16);
            assert!(!hash_predict(&bits("1011"), 0, 7, &x), "k = 0 must predict 0");
            assert!(hash_predict(&bits("1011"), 7, 7, &x), "k = m must predict 1");
        }
    }

    /// Marginal frequency over distinct inputs; duplicated inputs would
    /// inflate the variance (the hash is deterministic per input).
    #[test]
    fn hash_predict_marginal_frequency() {
        let seed = bits("110");
        let n = 100_000u64;
        let mut ones = 0u64;
        for i in 0..n {
            let mut x = BitVec::new();
            x.push_uint_msb(i, 20);
            if hash_predict(&seed, 1, 4, &x) {
                ones += 1;
            }
        }
        let mean = ones as f64 / n as f64;
        assert!(
            (mean - 0.25).abs() <= 0.01,
            "marginal {mean} too far from 1/4"
        );
    }

    #[test]
    fn find_seed_trivial_cases() {
        let zeros = vec![(bits("0011"), false), (bits("1100"), false)];
        assert_eq!(find_seed(&zeros, 10).unwrap(), BitVec::new());

        let single_one = vec![(bits("0011"), true)];
        assert_eq!(find_seed(&single_one, 10).unwrap(), BitVec::new());

        let dup = vec![(bits("0011"), false), (bits("0011"), false)];
        assert_eq!(find_seed(&dup, 10), Err(HashError::DuplicateTargets));
    }

    #[test]
    fn find_seed_returns_first_matching_seed() {
        let targets = vec![
            (bits("000001"), true),
            (bits("000010"), false),
            (bits("000011"), true),
            (bits("000100"), false),
        ];
        let seed = find_seed(&targets, 20).unwrap();
        let (m, k) = (4, 2);
        assert!(predict_all(&seed, k, m, &targets));
        // nothing earlier in (length, value) order works
        'outer: for s in 0..=seed.len() as u64 {
            for sv in 0..(1u64 << s) {
                let mut cand = BitVec::new();
                cand.push_uint_msb(sv, s as u32);
                if cand == seed {
                    break 'outer;
                }
                assert!(
                    !predict_all(&cand, k, m, &targets),
                    "seed {cand} precedes {seed} and also matches"
                );
            }
        }
    }

    #[test]
    fn dedupe_cases() {
        let clean = vec![(bits("01"), true), (bits("10"), false)];
        assert_eq!(dedupe(&clean).unwrap(), clean);

        let doubled = vec![(bits("01"), true), (bits("01"), true), (bits("10"), false)];
        assert_eq!(dedupe(&doubled).unwrap(), clean);

        let contradictory = vec![(bits("01"), true), (bits("01"), false)];
        assert_eq!(dedupe(&contradictory), Err(HashError::ContradictoryTargets));
    }

    fn sample_from(points: &[(u64, bool)]) -> Sample {
        Sample::new(points.iter().map(|&(x, y)| (Instance(x), y)).collect()).unwrap()
    }

    #[test]
    fn assemble_with_interpolating_reference_uses_empty_seed() {
        // labels equal bit 1, reference Bit(1): residuals all zero
        let s = sample_from(&[
            (0x0123_4567_89AB_CDEF, false),
            (0x8123_4567_89AB_CDEF, true),
            (0x4123_4567_89AB_CDEF, false),
        ]);
        let a = assemble_interpolator(&Expr::Bit(1), &s).unwrap();
        assert_eq!(a.k_dedup, 0);
        assert!(a.seed.is_empty());
        assert_eq!(
            a.code_len,
            composite_code_len(4, a.m_dedup, a.k_dedup, a.b, 0)
        );
        for (x, y) in s.pairs() {
            assert_eq!(a.program.eval(*x).unwrap(), *y);
        }
    }

    #[test]
    fn assemble_corrects_residual_errors() {
        // eight points labeled by bit 1 except two flips
        let mut points = Vec::new();
        for i in 0u64..8 {
            let x = (i << 60) | 0x0012_3456_789A_BCDE;
            let mut y = (x >> 63) & 1 == 1;
            if i == 2 || i == 5 {
                y = !y;
            }
            points.push((x, y));
        }
        let s = sample_from(&points);
        let a = assemble_interpolator(&Expr::Bit(1), &s).unwrap();
        assert_eq!(a.m_dedup, 8);
        assert_eq!(a.k_dedup, 2);
        for (x, y) in s.pairs() {
            assert_eq!(a.program.eval(*x).unwrap(), *y, "point {x}");
        }
        let enc = bitlang::encode(&a.program).unwrap();
        assert_eq!(enc.len(), a.code_len);
        assert_eq!(
            a.code_len,
            composite_code_len(4, 8, 2, a.b, a.seed.len())
        );
    }

    #[test]
    fn composite_overhead_stays_within_coarse_bound() {
        for m in 1u64..=64 {
            for k in [0, 1, m / 2, m.saturating_sub(1), m] {
                if k > m {
                    continue;
                }
                for b in [1u64, 3, 12, 40, 64] {
                    for seed_len in [0usize, 1, 5, 16, 30] {
                        let exact = composite_code_len(2, m, k, b, seed_len);
                        let coarse = 2
                            + seed_len
                            + 4 * ((m + 2) as f64).log2().ceil() as usize
                            + 2 * ((b + 1) as f64).log2().ceil() as usize
                            + 2 * ((seed_len as u64 + 2) as f64).log2().ceil() as usize
                            + 7;
                        assert!(
                            exact <= coarse,
                            "overhead bound fails at m={m} k={k} b={b} s={seed_len}: {exact} > {coarse}"
                        );
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn find_seed_is_deterministic(xs in proptest::collection::hash_set(0u64..256, 1..6), labels in any::<u64>()) {
            let targets: Vec<(BitVec, bool)> = xs.iter().enumerate().map(|(i, &v)| {
                let mut x = BitVec::new();
                x.push_uint_msb(v, 8);
                (x, (labels >> i) & 1 == 1)
            }).collect();
            let a = find_seed(&targets, 24);
            let b = find_seed(&targets, 24);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn dedupe_never_increases_memorization_cost(raw in proptest::collection::vec((0u64..16, any::<bool>()), 1..20)) {
            // force duplicates by a tiny prefix space, drop contradictions
            let mut chosen: HashMap<u64, bool> = HashMap::new();
            let mut targets = Vec::new();
            for (v, y) in raw {
                let y = *chosen.entry(v).or_insert(y);
                let mut x = BitVec::new();
                x.push_uint_msb(v, 4);
                targets.push((x, y));
            }
            let m = targets.len() as u64;
            let k = targets.iter().filter(|(_, y)| *y).count() as u64;
            let distinct = dedupe(&targets).unwrap();
            let m2 = distinct.len() as u64;
            let k2 = distinct.iter().filter(|(_, y)| *y).count() as u64;
            let full = m as f64 * crate::bounds::binary_entropy(k as f64 / m as f64);
            let reduced = m2 as f64 * crate::bounds::binary_entropy(k2 as f64 / m2 as f64);
            prop_assert!(reduced <= full + 1e-9);
        }
    }
}
