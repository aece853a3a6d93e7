//! Learning rules over the program language: exact shortest-interpolator
//! search, penalized structural search, population loss in exact or Monte
//! Carlo mode, and the pigeonhole lower-bound construction.
//!
//! Searches never build expression trees while scanning. A program's entire
//! behavior on an m-point sample is one u64 mask (bit i = prediction on
//! point i), and the grammar walk composes masks with bitwise ops; the
//! winning program is then rebuilt by re-walking its exact code length.

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::bitlang::{
    self, enumerate, Budget, BuildSem, EvalError, Expr, Instance,
};
use crate::hash_family::{pack_bits, prf64_words, prf_threshold};
use crate::sources::{self, Sample, SourceModel, SourceSpec};

/// Dependency-footprint cutoff for exact population loss: at or below this
/// many bits the loss is an exact sum over all assignments.
pub const EXACT_LOSS_MAX_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Source(#[from] sources::SourceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LowerBoundError {
    #[error("the {programs} programs under the budget distinguish all {instances} prefixes")]
    NotFound { programs: usize, instances: u64 },
}

/// How a population loss was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossMode {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossMode::Exact => "exact",
            LossMode::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossEstimate {
    pub value: f64,
    pub mode: LossMode,
    /// Evaluation points drawn; 0 in exact mode.
    pub n_eval: u64,
    /// Binomial standard error; 0 in exact mode.
    pub std_err: f64,
}

impl LossEstimate {
    fn exact(value: f64) -> LossEstimate {
        debug_assert!((0.0..=1.0).contains(&value));
        LossEstimate {
            value,
            mode: LossMode::Exact,
            n_eval: 0,
            std_err: 0.0,
        }
    }
}

/// A search winner.
#[derive(Clone, Debug, PartialEq)]
pub struct FoundProgram {
    pub program: Expr,
    pub code_len: u64,
    pub train_error: f64,
}

/// Result of a length-budgeted search.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerResult {
    /// The winning program; `None` exactly when the budget was exhausted
    /// before any candidate qualified.
    pub found: Option<FoundProgram>,
    pub search_len_budget: u64,
}

impl LearnerResult {
    pub fn exhausted(&self) -> bool {
        self.found.is_none()
    }
}

/// Fraction of sample points the program misclassifies.
pub fn train_error(h: &Expr, s: &Sample) -> Result<f64, EvalError> {
    let mut bad = 0usize;
    for &(x, y) in s.pairs() {
        bad += (h.eval(x)? != y) as usize;
    }
    Ok(bad as f64 / s.len() as f64)
}

/// The penalized objective `err + lambda * (len/m + sqrt(err * len/m))`
/// minimized by [`srm_search`].
pub fn srm_objective(train_error: f64, code_len: u64, m: usize, lambda: f64) -> f64 {
    let rate = code_len as f64 / m as f64;
    train_error + lambda * (rate + (train_error * rate).sqrt())
}

/// Shortest interpolator of `s` in code order, scanning lengths 1..=max_len
/// ascending; ties within a length resolve to the first program in code
/// order. `found: None` means no program of length ≤ `max_len` interpolates.
///
/// Panics if `max_len < 2` or the sample has more than 64 points.
pub fn mdl_search(s: &Sample, max_len: usize) -> LearnerResult {
    assert!(max_len >= 2, "no program is shorter than 2 bits");
    let ctx = Ctx::new(s);
    let mut sem = MaskSem::new(&ctx);
    for len in 2..=max_len {
        let mut hit = false;
        let _ = bitlang::walk(&mut sem, Budget::Exact(len), &mut |sem, v, _| {
            if *v == Some(sem.ctx.target) {
                hit = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if hit {
            let program = rebuild(&ctx, len, &mut |mask| mask == ctx.target)
                .expect("scan found an interpolator at this length");
            return LearnerResult {
                found: Some(FoundProgram {
                    program,
                    code_len: len as u64,
                    train_error: 0.0,
                }),
                search_len_budget: max_len as u64,
            };
        }
    }
    LearnerResult {
        found: None,
        search_len_budget: max_len as u64,
    }
}

/// First minimizer, in code order over lengths 2..=max_len, of
/// [`srm_objective`]. Always finds something (the constants qualify).
/// Lengths with `lambda * len / m` above the best objective so far cannot
/// contain an improvement and are not walked.
///
/// Panics if `max_len < 2`, `lambda` is not finite and positive, or the
/// sample has more than 64 points.
pub fn srm_search(s: &Sample, max_len: usize, lambda: f64) -> LearnerResult {
    assert!(max_len >= 2, "no program is shorter than 2 bits");
    assert!(lambda.is_finite() && lambda > 0.0, "lambda must be positive");
    let ctx = Ctx::new(s);
    let m = ctx.m;
    let mut sem = MaskSem::new(&ctx);
    let mut best = f64::INFINITY;
    let mut best_len = 0usize;
    for len in 2..=max_len {
        if lambda * (len as f64 / m as f64) >= best {
            break;
        }
        let _ = bitlang::walk(&mut sem, Budget::Exact(len), &mut |sem, v, _| {
            if let Some(mask) = *v {
                let err = (mask ^ sem.ctx.target).count_ones() as f64 / m as f64;
                let obj = srm_objective(err, len as u64, m, lambda);
                if obj < best {
                    best = obj;
                    best_len = len;
                }
            }
            ControlFlow::Continue(())
        });
    }
    let program = rebuild(&ctx, best_len, &mut |mask| {
        let err = (mask ^ ctx.target).count_ones() as f64 / m as f64;
        srm_objective(err, best_len as u64, m, lambda) == best
    })
    .expect("scan recorded a best length");
    let err = train_mask_error(&ctx, &program);
    LearnerResult {
        found: Some(FoundProgram {
            program,
            code_len: best_len as u64,
            train_error: err,
        }),
        search_len_budget: max_len as u64,
    }
}

/// `P[h(X) != Y]` under the source. Exact (an enumeration over every
/// assignment of the bits `h` or the labeler reads, weighted by the product
/// distribution) when that footprint is at most [`EXACT_LOSS_MAX_BITS`];
/// otherwise Monte Carlo over `n_test` points from the reserved test stream.
pub fn population_loss(
    h: &Expr,
    spec: &SourceSpec,
    n_test: u64,
) -> Result<LossEstimate, LearnError> {
    population_loss_impl(h, spec, n_test, None)
}

fn population_loss_impl(
    h: &Expr,
    spec: &SourceSpec,
    n_test: u64,
    force: Option<LossMode>,
) -> Result<LossEstimate, LearnError> {
    let mut deps = h.dependency_bits();
    deps.extend(labeler_bits(spec.model()));
    validate_deps(&deps)?;
    let exact = match force {
        Some(LossMode::Exact) => true,
        Some(LossMode::MonteCarlo) => false,
        None => deps.len() <= EXACT_LOSS_MAX_BITS,
    };
    if exact {
        let dims: Vec<u64> = deps.into_iter().collect();
        let mut total = 0.0;
        for_each_assignment(spec.model(), &dims, &mut |x, weight| {
            let hy = h.eval(x).expect("dependencies validated");
            total += weight * mismatch_prob(spec, x, hy);
        });
        Ok(LossEstimate::exact(total.clamp(0.0, 1.0)))
    } else {
        assert!(n_test >= 1, "Monte Carlo needs at least one point");
        let mut bad = 0u64;
        for i in 0..n_test {
            let x = sources::draw_instance(spec, u64::MAX, i);
            let y = sources::draw_label(spec, u64::MAX, i, x);
            bad += (h.eval(x)? != y) as u64;
        }
        Ok(monte_carlo_estimate(bad, n_test))
    }
}

/// `P[h(X) != g(X)]` over the instance distribution, with the same
/// exact/Monte-Carlo split as [`population_loss`].
pub fn population_disagreement(
    h: &Expr,
    g: &Expr,
    spec: &SourceSpec,
    n_test: u64,
) -> Result<LossEstimate, LearnError> {
    let mut deps = h.dependency_bits();
    deps.extend(g.dependency_bits());
    validate_deps(&deps)?;
    if deps.len() <= EXACT_LOSS_MAX_BITS {
        let dims: Vec<u64> = deps.into_iter().collect();
        let mut total = 0.0;
        for_each_assignment(spec.model(), &dims, &mut |x, weight| {
            let hy = h.eval(x).expect("dependencies validated");
            let gy = g.eval(x).expect("dependencies validated");
            total += weight * (hy != gy) as u64 as f64;
        });
        Ok(LossEstimate::exact(total.clamp(0.0, 1.0)))
    } else {
        assert!(n_test >= 1, "Monte Carlo needs at least one point");
        let mut bad = 0u64;
        for i in 0..n_test {
            let x = sources::draw_instance(spec, u64::MAX, i);
            bad += (h.eval(x)? != g.eval(x)?) as u64;
        }
        Ok(monte_carlo_estimate(bad, n_test))
    }
}

/// Two distinct `b`-bit prefixes (padded with zeros) that no program of
/// code length below `len_budget` tells apart, as the lexicographically
/// first such pair; labeling them 0 and 1 therefore defeats every program
/// under the budget. Programs that cannot evaluate count as constant 0.
///
/// Panics if `b` is outside 1..=24 (the construction enumerates all `2^b`
/// prefixes) or `len_budget` is 0.
pub fn lower_bound_pair(
    b: u64,
    len_budget: usize,
) -> Result<(Instance, Instance), LowerBoundError> {
    assert!((1..=24).contains(&b), "prefix width {b} outside 1..=24");
    assert!(len_budget >= 1, "budget must be positive");
    let programs: Vec<Expr> = (2..len_budget).flat_map(enumerate).collect();
    let count = 1u64 << b;
    let pad = 64 - b as u32;

    // Group instances by a rolling fingerprint hash, then confirm real
    // fingerprint equality inside each bucket.
    let mut groups: HashMap<u64, Vec<u64>> = HashMap::new();
    for v in 0..count {
        let x = Instance(v << pad);
        let mut acc = 0xcbf29ce484222325u64;
        for p in &programs {
            let bit = p.eval(x).unwrap_or(false);
            acc = (acc ^ bit as u64).wrapping_mul(0x100000001b3);
        }
        groups.entry(acc).or_default().push(v);
    }

    let fingerprint = |v: u64| -> Vec<bool> {
        let x = Instance(v << pad);
        programs.iter().map(|p| p.eval(x).unwrap_or(false)).collect()
    };
    let mut best: Option<(u64, u64)> = None;
    for bucket in groups.into_values() {
        if bucket.len() < 2 {
            continue;
        }
        let mut classes: Vec<(Vec<bool>, u64, Option<u64>)> = Vec::new();
        for &v in &bucket {
            match classes.iter_mut().find(|(fp, _, _)| *fp == fingerprint(v)) {
                Some((_, _, second)) => {
                    if second.is_none() {
                        *second = Some(v);
                    }
                }
                None => classes.push((fingerprint(v), v, None)),
            }
        }
        for (_, first, second) in classes {
            if let Some(second) = second {
                if best.is_none_or(|p| (first, second) < p) {
                    best = Some((first, second));
                }
            }
        }
    }
    match best {
        Some((a, c)) => Ok((Instance(a << pad), Instance(c << pad))),
        None => Err(LowerBoundError::NotFound {
            programs: programs.len(),
            instances: count,
        }),
    }
}

// ---------------------------------------------------------------------------
// Mask engine
// ---------------------------------------------------------------------------

/// Per-sample context: point i of the sample occupies bit i of every mask.
struct Ctx {
    m: usize,
    /// Mask with one bit per sample point.
    full: u64,
    /// Labels as a mask.
    target: u64,
    /// `cols[j]` holds instance bit j of every point, for j in 1..=64.
    cols: Box<[u64; 65]>,
    points: Vec<Instance>,
}

impl Ctx {
    fn new(s: &Sample) -> Ctx {
        let m = s.len();
        assert!(m <= 64, "the search engine handles at most 64 points");
        let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let mut cols = Box::new([0u64; 65]);
        let mut target = 0u64;
        let mut points = Vec::with_capacity(m);
        for (i, &(x, y)) in s.pairs().iter().enumerate() {
            points.push(x);
            target |= (y as u64) << i;
            for (j, col) in cols.iter_mut().enumerate().skip(1) {
                *col |= (x.bit(j as u64) as u64) << i;
            }
        }
        Ctx {
            m,
            full,
            target,
            cols,
            points,
        }
    }

    /// `gamma(b+1) || prefix_b(x)` for every point, as packable values.
    fn raw_tails(&self, b: u64) -> Vec<(u128, u32)> {
        let g_len = 2 * (b as u32 + 1).ilog2() + 1;
        self.points
            .iter()
            .map(|x| {
                let prefix = if b == 64 { x.0 } else { x.0 >> (64 - b) };
                (((b as u128 + 1) << b) | prefix as u128, g_len + b as u32)
            })
            .collect()
    }
}

/// Skips hash families no search winner can come from: constant families
/// (k = 0 or k = m behave exactly like the earlier and shorter `Zero`/`One`,
/// so they lose every tie) and families that cannot evaluate (b > 64).
fn family_is_searchable(m: u64, k: u64, b: u64) -> bool {
    k != 0 && k != m && b <= 64
}

/// Per-(family, seed length) state for bulk mask evaluation: the message
/// head with the seed bits left blank, and per-point tails pre-shifted to
/// their final word positions.
struct HashBlock {
    base: [u64; 3],
    /// Bit offset where the seed value lands (after gamma(s+1)).
    seed_at: u32,
    seed_len: u32,
    n_words: usize,
    threshold: u128,
    tails: Vec<[u64; 3]>,
}

/// Mask-building semantics: `Some(mask)` of predictions, or `None` for
/// programs that cannot evaluate (an out-of-range `Bit` index).
struct MaskSem<'a> {
    ctx: &'a Ctx,
    raw_tails: Vec<Option<Vec<(u128, u32)>>>,
    block: Option<HashBlock>,
}

impl<'a> MaskSem<'a> {
    fn new(ctx: &'a Ctx) -> MaskSem<'a> {
        let mut raw_tails = Vec::new();
        raw_tails.resize_with(65, || None);
        MaskSem {
            ctx,
            raw_tails,
            block: None,
        }
    }
}

impl BuildSem for MaskSem<'_> {
    type V = Option<u64>;

    fn zero(&mut self) -> Self::V {
        Some(0)
    }

    fn one(&mut self) -> Self::V {
        Some(self.ctx.full)
    }

    fn bit(&mut self, i: u64) -> Self::V {
        (1..=64).contains(&i).then(|| self.ctx.cols[i as usize])
    }

    fn not(&mut self, a: &Self::V) -> Self::V {
        Some(!(*a)? & self.ctx.full)
    }

    fn xor(&mut self, a: &Self::V, b: &Self::V) -> Self::V {
        Some((*a)? ^ (*b)?)
    }

    fn ite(&mut self, c: &Self::V, t: &Self::V, e: &Self::V) -> Self::V {
        let c = (*c)?;
        Some((c & (*t)?) | (!c & (*e)?))
    }

    fn hash_family_useful(&mut self, m: u64, k: u64, b: u64) -> bool {
        family_is_searchable(m, k, b)
    }

    fn hash_block(&mut self, m: u64, k: u64, b: u64, seed_len: u64) {
        debug_assert!(family_is_searchable(m, k, b));
        let bi = b as usize;
        if self.raw_tails[bi].is_none() {
            self.raw_tails[bi] = Some(self.ctx.raw_tails(b));
        }
        let raw = self.raw_tails[bi].as_ref().unwrap();

        let s = seed_len as u32;
        let g_len = 2 * (s + 1).ilog2() + 1;
        let head_len = g_len + s;
        let mut base = [0u64; 3];
        pack_bits(&mut base, 0, (s as u128) + 1, g_len);
        let tail_len = raw[0].1;
        let tails = raw
            .iter()
            .map(|&(val, len)| {
                debug_assert_eq!(len, tail_len);
                let mut w = [0u64; 3];
                pack_bits(&mut w, head_len, val, len);
                w
            })
            .collect();
        self.block = Some(HashBlock {
            base,
            seed_at: g_len,
            seed_len: s,
            n_words: ((head_len + tail_len) as usize).div_ceil(64),
            threshold: prf_threshold(k, m),
            tails,
        });
    }

    fn hash(&mut self, _m: u64, _k: u64, _b: u64, _seed_len: u64, seed_val: u64) -> Self::V {
        let block = self.block.as_ref().expect("hash_block precedes hash");
        let mut head = block.base;
        pack_bits(&mut head, block.seed_at, seed_val as u128, block.seed_len);
        let mut mask = 0u64;
        for (i, t) in block.tails.iter().enumerate() {
            let words = [head[0] | t[0], head[1] | t[1], head[2] | t[2]];
            let u = prf64_words(&words[..block.n_words]);
            mask |= (((u as u128) < block.threshold) as u64) << i;
        }
        Some(mask)
    }
}

/// Expression semantics with the same family skips as the mask walk, so a
/// rebuild pass visits exactly the candidates the scan did.
struct SearchExprSem(bitlang::ExprSem);

impl BuildSem for SearchExprSem {
    type V = Expr;

    fn zero(&mut self) -> Expr {
        self.0.zero()
    }

    fn one(&mut self) -> Expr {
        self.0.one()
    }

    fn bit(&mut self, i: u64) -> Expr {
        self.0.bit(i)
    }

    fn not(&mut self, a: &Expr) -> Expr {
        self.0.not(a)
    }

    fn xor(&mut self, a: &Expr, b: &Expr) -> Expr {
        self.0.xor(a, b)
    }

    fn ite(&mut self, c: &Expr, t: &Expr, e: &Expr) -> Expr {
        self.0.ite(c, t, e)
    }

    fn hash_family_useful(&mut self, m: u64, k: u64, b: u64) -> bool {
        family_is_searchable(m, k, b)
    }

    fn hash(&mut self, m: u64, k: u64, b: u64, seed_len: u64, seed_val: u64) -> Expr {
        self.0.hash(m, k, b, seed_len, seed_val)
    }
}

/// First program at exactly `len` bits whose mask satisfies the predicate.
fn rebuild(ctx: &Ctx, len: usize, pred: &mut dyn FnMut(u64) -> bool) -> Option<Expr> {
    let mut sem = SearchExprSem(bitlang::ExprSem);
    let mut winner = None;
    let _ = bitlang::walk(&mut sem, Budget::Exact(len), &mut |_, e: &Expr, _| {
        match expr_mask(ctx, e) {
            Some(mask) if pred(mask) => {
                winner = Some(e.clone());
                ControlFlow::Break(())
            }
            _ => ControlFlow::Continue(()),
        }
    });
    winner
}

/// Evaluates a program on every sample point at once; `None` when it cannot
/// evaluate. The slow single-candidate counterpart of the `MaskSem` walk.
fn expr_mask(ctx: &Ctx, e: &Expr) -> Option<u64> {
    match e {
        Expr::Zero => Some(0),
        Expr::One => Some(ctx.full),
        Expr::Bit(i) => (1..=64).contains(i).then(|| ctx.cols[*i as usize]),
        Expr::Not(a) => Some(!expr_mask(ctx, a)? & ctx.full),
        Expr::Xor(a, b) => Some(expr_mask(ctx, a)? ^ expr_mask(ctx, b)?),
        Expr::If(c, t, e) => {
            let c = expr_mask(ctx, c)?;
            Some((c & expr_mask(ctx, t)?) | (!c & expr_mask(ctx, e)?))
        }
        Expr::Hash(h) => {
            if h.b > 64 || h.seed.len() >= 64 {
                return None;
            }
            let mut sv = 0u64;
            for bit in h.seed.iter() {
                sv = (sv << 1) | bit as u64;
            }
            let s = h.seed.len() as u32;
            let g_len = 2 * (s + 1).ilog2() + 1;
            let mut head = [0u64; 3];
            pack_bits(&mut head, 0, (s as u128) + 1, g_len);
            pack_bits(&mut head, g_len, sv as u128, s);
            let head_len = g_len + s;
            let threshold = prf_threshold(h.k, h.m);
            let mut mask = 0u64;
            for (i, &(val, len)) in ctx.raw_tails(h.b).iter().enumerate() {
                let mut w = head;
                pack_bits(&mut w, head_len, val, len);
                let u = prf64_words(&w[..((head_len + len) as usize).div_ceil(64)]);
                mask |= (((u as u128) < threshold) as u64) << i;
            }
            Some(mask)
        }
    }
}

fn train_mask_error(ctx: &Ctx, e: &Expr) -> f64 {
    match expr_mask(ctx, e) {
        Some(mask) => (mask ^ ctx.target).count_ones() as f64 / ctx.m as f64,
        None => 1.0,
    }
}

// ---------------------------------------------------------------------------
// Population loss internals
// ---------------------------------------------------------------------------

/// Instance bits the label model reads.
fn labeler_bits(model: &SourceModel) -> std::collections::BTreeSet<u64> {
    match model {
        SourceModel::RandomLabelNoise { h_star, .. } => h_star.dependency_bits(),
        SourceModel::AgnosticMixture { .. } => [1, 2].into_iter().collect(),
        SourceModel::AllZerosY => Default::default(),
        SourceModel::SparseDiff { .. } => [1].into_iter().collect(),
    }
}

fn validate_deps(deps: &std::collections::BTreeSet<u64>) -> Result<(), EvalError> {
    match deps.iter().next_back() {
        Some(&max) if max > 64 => Err(EvalError::BitIndexRange { index: max }),
        _ => Ok(()),
    }
}

/// Visits every assignment of the `dims` bits (all other instance bits 0)
/// with its probability under the source's product distribution, in a fixed
/// ascending order so float accumulation is reproducible.
fn for_each_assignment(model: &SourceModel, dims: &[u64], f: &mut dyn FnMut(Instance, f64)) {
    assert!(dims.len() <= EXACT_LOSS_MAX_BITS);
    let probs: Vec<f64> = dims
        .iter()
        .map(|&j| sources::bit_probability(model, j))
        .collect();
    for a in 0u64..(1u64 << dims.len()) {
        let mut x = 0u64;
        let mut weight = 1.0;
        for (t, (&j, &p)) in dims.iter().zip(&probs).enumerate() {
            if a >> t & 1 == 1 {
                x |= 1 << (64 - j);
                weight *= p;
            } else {
                weight *= 1.0 - p;
            }
        }
        f(Instance(x), weight);
    }
}

/// `P[h(x) != Y | X = x]` given the prediction `hy = h(x)`.
fn mismatch_prob(spec: &SourceSpec, x: Instance, hy: bool) -> f64 {
    match spec.model() {
        SourceModel::RandomLabelNoise {
            h_star,
            noise_num,
            noise_den,
        } => {
            let lstar = *noise_num as f64 / *noise_den as f64;
            let sy = h_star.eval(x).expect("dependencies validated");
            if hy == sy {
                lstar
            } else {
                1.0 - lstar
            }
        }
        SourceModel::AgnosticMixture { beta, .. } => {
            if x.bit(1) {
                if hy {
                    1.0 - beta
                } else {
                    *beta
                }
            } else {
                (hy != x.bit(2)) as u64 as f64
            }
        }
        SourceModel::AllZerosY => hy as u64 as f64,
        SourceModel::SparseDiff { .. } => (hy != x.bit(1)) as u64 as f64,
    }
}

fn monte_carlo_estimate(bad: u64, n: u64) -> LossEstimate {
    let p = bad as f64 / n as f64;
    LossEstimate {
        value: p,
        mode: LossMode::MonteCarlo,
        n_eval: n,
        std_err: (p * (1.0 - p) / n as f64).sqrt(),
    }
}
