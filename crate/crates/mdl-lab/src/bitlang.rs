//! A prefix-free language of boolean programs over 64-bit instances.
//!
//! Opcode map (MSB-first):
//!
//! ```text
//! 00    Zero          constant false
//! 01    One           constant true
//! 100   Bit(i)        gamma(i); reads instance bit i (1-based from the MSB)
//! 101   Not(a)
//! 110   Xor(a, b)
//! 1110  If(c, t, e)   evaluates only the taken branch
//! 1111  Hash(m,k,b,s) gamma(m) gamma(k+1) gamma(b) gamma(|s|+1), then s raw
//! ```
//!
//! Parameters ride on Elias gamma codes, so every syntactically valid code is
//! self-delimiting; `decode` additionally rejects codes with unread trailing
//! bits, which makes the set of valid codes prefix-free.

use crate::bits::BitVec;
use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::str::FromStr;

/// A 64-bit instance. Bit 1 is the most significant bit.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Instance(pub u64);

impl Instance {
    /// Reads bit `j`, 1-based from the most significant end. Panics unless
    /// `1 <= j <= 64`; programs go through `Expr::eval`, which range-checks
    /// first and reports an error instead.
    pub fn bit(self, j: u64) -> bool {
        assert!((1..=64).contains(&j), "instance bit index {j} out of range");
        (self.0 >> (64 - j)) & 1 == 1
    }

    /// The first `b` bits as a bit string, `0 <= b <= 64`.
    pub fn prefix(self, b: u64) -> BitVec {
        assert!(b <= 64, "prefix width {b} out of range");
        let mut out = BitVec::with_capacity(b as usize);
        if b > 0 {
            out.push_uint_msb(self.0 >> (64 - b), b as u32);
        }
        out
    }

    /// Length of the longest common prefix with `other`, in bits.
    pub fn common_prefix_len(self, other: Instance) -> u64 {
        (self.0 ^ other.0).leading_zeros() as u64
    }
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Hash-program parameters: a pseudorandom predictor that hashes the first
/// `b` instance bits and predicts 1 with frequency `k / m`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HashExpr {
    pub m: u64,
    pub k: u64,
    pub b: u64,
    pub seed: BitVec,
}

/// A program.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Zero,
    One,
    Bit(u64),
    Not(Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Hash(HashExpr),
}

/// Errors from encoding or decoding program codes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodeError {
    #[error("gamma code is undefined for 0")]
    GammaZero,
    #[error("code ended before a complete expression was read")]
    Truncated,
    #[error("{trailing} unread bits after a complete expression")]
    TrailingBits { trailing: usize },
    #[error("gamma-coded parameter exceeds the supported range")]
    ParamTooLarge,
    #[error("hash weight {k} exceeds table size {m}")]
    WeightExceedsSize { k: u64, m: u64 },
    #[error("expression nesting exceeds the decoder limit")]
    NestingTooDeep,
}

/// Errors from evaluating a program on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("instance bit index {index} exceeds the 64-bit instance width")]
    BitIndexRange { index: u64 },
    #[error("hash prefix width {width} exceeds the 64-bit instance width")]
    PrefixRange { width: u64 },
}

/// Length of the gamma code for `n >= 1`: `2 * floor(log2 n) + 1` bits.
pub fn gamma_len(n: u64) -> Result<usize, CodeError> {
    if n == 0 {
        return Err(CodeError::GammaZero);
    }
    Ok(2 * (63 - n.leading_zeros()) as usize + 1)
}

/// The gamma code of `n >= 1`: `floor(log2 n)` zeros, then `n` in binary.
pub fn gamma_encode(n: u64) -> Result<BitVec, CodeError> {
    let mut out = BitVec::new();
    gamma_push(&mut out, n)?;
    Ok(out)
}

fn gamma_push(out: &mut BitVec, n: u64) -> Result<(), CodeError> {
    if n == 0 {
        return Err(CodeError::GammaZero);
    }
    let j = 63 - n.leading_zeros();
    out.push_uint_msb(0, j);
    out.push(true);
    if j > 0 {
        out.push_uint_msb(n & ((1u64 << j) - 1), j);
    }
    Ok(())
}

/// The binary code of a program, with its exact bit length.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ProgramCode(pub BitVec);

impl ProgramCode {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Serializes a program to its code. Fails only on malformed hash parameters
/// (`m = 0`, `b = 0`, or `k > m`), which have no code.
pub fn encode(e: &Expr) -> Result<ProgramCode, CodeError> {
    let mut bits = BitVec::with_capacity(32);
    push_expr(&mut bits, e)?;
    Ok(ProgramCode(bits))
}

fn push_expr(out: &mut BitVec, e: &Expr) -> Result<(), CodeError> {
    match e {
        Expr::Zero => out.push_uint_msb(0b00, 2),
        Expr::One => out.push_uint_msb(0b01, 2),
        Expr::Bit(i) => {
            out.push_uint_msb(0b100, 3);
            gamma_push(out, *i)?;
        }
        Expr::Not(a) => {
            out.push_uint_msb(0b101, 3);
            push_expr(out, a)?;
        }
        Expr::Xor(a, b) => {
            out.push_uint_msb(0b110, 3);
            push_expr(out, a)?;
            push_expr(out, b)?;
        }
        Expr::If(c, t, e2) => {
            out.push_uint_msb(0b1110, 4);
            push_expr(out, c)?;
            push_expr(out, t)?;
            push_expr(out, e2)?;
        }
        Expr::Hash(h) => {
            if h.k > h.m {
                return Err(CodeError::WeightExceedsSize { k: h.k, m: h.m });
            }
            out.push_uint_msb(0b1111, 4);
            gamma_push(out, h.m)?;
            gamma_push(out, h.k.checked_add(1).ok_or(CodeError::ParamTooLarge)?)?;
            gamma_push(out, h.b)?;
            let sl = h.seed.len() as u64;
            gamma_push(out, sl.checked_add(1).ok_or(CodeError::ParamTooLarge)?)?;
            out.extend_bits(&h.seed);
        }
    }
    Ok(())
}

/// Code length of a program in bits, without keeping the code.
pub fn code_len(e: &Expr) -> Result<usize, CodeError> {
    Ok(encode(e)?.len())
}

const MAX_DECODE_DEPTH: usize = 10_000;

/// Parses a code back into a program. The whole string must be consumed.
pub fn decode(code: &ProgramCode) -> Result<Expr, CodeError> {
    let mut cur = Cursor {
        bits: &code.0,
        pos: 0,
    };
    let e = cur.expr(0)?;
    if cur.pos != code.0.len() {
        return Err(CodeError::TrailingBits {
            trailing: code.0.len() - cur.pos,
        });
    }
    Ok(e)
}

struct Cursor<'a> {
    bits: &'a BitVec,
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self) -> Result<bool, CodeError> {
        if self.pos >= self.bits.len() {
            return Err(CodeError::Truncated);
        }
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    fn gamma(&mut self) -> Result<u64, CodeError> {
        let mut j = 0u32;
        while !self.take()? {
            j += 1;
            if j > 63 {
                return Err(CodeError::ParamTooLarge);
            }
        }
        let mut n = 1u64;
        for _ in 0..j {
            n = (n << 1) | self.take()? as u64;
        }
        Ok(n)
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, CodeError> {
        if depth > MAX_DECODE_DEPTH {
            return Err(CodeError::NestingTooDeep);
        }
        Ok(if !self.take()? {
            if !self.take()? {
                Expr::Zero
            } else {
                Expr::One
            }
        } else if !self.take()? {
            if !self.take()? {
                Expr::Bit(self.gamma()?)
            } else {
                Expr::Not(Box::new(self.expr(depth + 1)?))
            }
        } else if !self.take()? {
            let a = self.expr(depth + 1)?;
            let b = self.expr(depth + 1)?;
            Expr::Xor(Box::new(a), Box::new(b))
        } else if !self.take()? {
            let c = self.expr(depth + 1)?;
            let t = self.expr(depth + 1)?;
            let e = self.expr(depth + 1)?;
            Expr::If(Box::new(c), Box::new(t), Box::new(e))
        } else {
            let m = self.gamma()?;
            let k = self.gamma()? - 1;
            if k > m {
                return Err(CodeError::WeightExceedsSize { k, m });
            }
            let b = self.gamma()?;
            let seed_len = self.gamma()? - 1;
            if seed_len > (1 << 24) {
                return Err(CodeError::ParamTooLarge);
            }
            let mut seed = BitVec::with_capacity(seed_len as usize);
            for _ in 0..seed_len {
                seed.push(self.take()?);
            }
            Expr::Hash(HashExpr { m, k, b, seed })
        })
    }
}

impl Expr {
    /// Evaluates the program on an instance. `If` evaluates only the branch
    /// selected by the condition, so range errors in the untaken branch are
    /// not observed.
    pub fn eval(&self, x: Instance) -> Result<bool, EvalError> {
        match self {
            Expr::Zero => Ok(false),
            Expr::One => Ok(true),
            Expr::Bit(i) => {
                if !(1..=64).contains(i) {
                    return Err(EvalError::BitIndexRange { index: *i });
                }
                Ok(x.bit(*i))
            }
            Expr::Not(a) => Ok(!a.eval(x)?),
            Expr::Xor(a, b) => Ok(a.eval(x)? ^ b.eval(x)?),
            Expr::If(c, t, e) => {
                if c.eval(x)? {
                    t.eval(x)
                } else {
                    e.eval(x)
                }
            }
            Expr::Hash(h) => {
                if h.b > 64 {
                    return Err(EvalError::PrefixRange { width: h.b });
                }
                Ok(crate::hash_family::hash_predict(&h.seed, h.k, h.m, &x.prefix(h.b)))
            }
        }
    }

    /// The set of instance bit indices the program can read on some input.
    /// `Hash` reads its whole `b`-bit prefix; `If` contributes both branches.
    pub fn dependency_bits(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        self.collect_deps(&mut out);
        out
    }

    fn collect_deps(&self, out: &mut BTreeSet<u64>) {
        match self {
            Expr::Zero | Expr::One => {}
            Expr::Bit(i) => {
                out.insert(*i);
            }
            Expr::Not(a) => a.collect_deps(out),
            Expr::Xor(a, b) => {
                a.collect_deps(out);
                b.collect_deps(out);
            }
            Expr::If(c, t, e) => {
                c.collect_deps(out);
                t.collect_deps(out);
                e.collect_deps(out);
            }
            Expr::Hash(h) => {
                out.extend(1..=h.b);
            }
        }
    }

    /// Parses `"<bitlen>:<hex>"` and decodes the program.
    pub fn from_code_str(s: &str) -> Result<Expr, ProgramParseError> {
        let code = ProgramCode::from_str(s)?;
        decode(&code).map_err(ProgramParseError::Code)
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Zero => write!(f, "0"),
            Expr::One => write!(f, "1"),
            Expr::Bit(i) => write!(f, "x{i}"),
            Expr::Not(a) => write!(f, "not({a})"),
            Expr::Xor(a, b) => write!(f, "xor({a}, {b})"),
            Expr::If(c, t, e) => write!(f, "if({c}, {t}, {e})"),
            Expr::Hash(h) => write!(
                f,
                "hash(m={}, k={}, b={}, seed={})",
                h.m,
                h.k,
                h.b,
                if h.seed.is_empty() {
                    "~".to_string()
                } else {
                    h.seed.to_string()
                }
            ),
        }
    }
}

/// Errors from parsing the `"<bitlen>:<hex>"` serialization.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramParseError {
    #[error("expected \"<bitlen>:<hex>\"")]
    BadFormat,
    #[error("invalid bit length")]
    BadLength,
    #[error("invalid hex digit {0:?}")]
    BadHexDigit(char),
    #[error("hex digit count does not match the stated bit length")]
    LengthMismatch,
    #[error("padding bits past the stated length must be zero")]
    NonZeroPadding,
    #[error(transparent)]
    Code(CodeError),
}

impl std::fmt::Display for ProgramCode {
    /// `"<bitlen>:<hex>"`, hex MSB-first with zero padding to a nibble.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:", self.0.len())?;
        let n_nibbles = self.0.len().div_ceil(4);
        for nib in 0..n_nibbles {
            let mut v = 0u32;
            for b in 0..4 {
                let i = nib * 4 + b;
                v = (v << 1) | (i < self.0.len() && self.0.get(i)) as u32;
            }
            write!(f, "{v:x}")?;
        }
        Ok(())
    }
}

impl FromStr for ProgramCode {
    type Err = ProgramParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (len_part, hex_part) = s.split_once(':').ok_or(ProgramParseError::BadFormat)?;
        let len: usize = len_part
            .parse()
            .map_err(|_| ProgramParseError::BadLength)?;
        if hex_part.len() != len.div_ceil(4) {
            return Err(ProgramParseError::LengthMismatch);
        }
        let mut bits = BitVec::with_capacity(hex_part.len() * 4);
        for c in hex_part.chars() {
            let v = c
                .to_digit(16)
                .ok_or(ProgramParseError::BadHexDigit(c))? as u64;
            bits.push_uint_msb(v, 4);
        }
        for i in len..bits.len() {
            if bits.get(i) {
                return Err(ProgramParseError::NonZeroPadding);
            }
        }
        bits.truncate(len);
        Ok(ProgramCode(bits))
    }
}

/// Length constraint for a grammar walk: exactly `n` bits, or at most `n`.
#[derive(Copy, Clone, Debug)]
pub(crate) enum Budget {
    Exact(usize),
    AtMost(usize),
}

impl Budget {
    pub(crate) fn cap(self) -> usize {
        match self {
            Budget::Exact(n) | Budget::AtMost(n) => n,
        }
    }

    fn admits(self, l: usize) -> bool {
        match self {
            Budget::Exact(n) => l == n,
            Budget::AtMost(n) => l <= n,
        }
    }

    /// Budget left for a final child after `used` bits, if a program can
    /// still fit (every program takes at least 2 bits).
    pub(crate) fn child(self, used: usize) -> Option<Budget> {
        match self {
            Budget::Exact(n) => (used + 2 <= n).then(|| Budget::Exact(n - used)),
            Budget::AtMost(n) => (used + 2 <= n).then(|| Budget::AtMost(n - used)),
        }
    }
}

/// Constructors for the values a grammar walk produces: expression trees,
/// evaluation masks, or anything else derivable node by node. The walker
/// calls these in ascending code order; child values are passed by reference
/// because one child is reused across every sibling of its parent.
pub(crate) trait BuildSem {
    type V: Clone;
    fn zero(&mut self) -> Self::V;
    fn one(&mut self) -> Self::V;
    fn bit(&mut self, i: u64) -> Self::V;
    fn not(&mut self, a: &Self::V) -> Self::V;
    fn xor(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn ite(&mut self, c: &Self::V, t: &Self::V, e: &Self::V) -> Self::V;
    /// Whether the hash family (m, k, b) should be walked at all. Searches
    /// return false for families that provably cannot win (constant k = 0 or
    /// k = m, unevaluable b > 64); enumeration keeps everything.
    fn hash_family_useful(&mut self, _m: u64, _k: u64, _b: u64) -> bool {
        true
    }
    /// Called once before a run of `hash` calls sharing (m, k, b, seed_len),
    /// so implementations can precompute per-family state.
    fn hash_block(&mut self, _m: u64, _k: u64, _b: u64, _seed_len: u64) {}
    /// Seed bits are the low `seed_len` bits of `seed_val`, MSB-first.
    fn hash(&mut self, m: u64, k: u64, b: u64, seed_len: u64, seed_val: u64) -> Self::V;
}

/// Builds ordinary expression trees.
pub(crate) struct ExprSem;

impl BuildSem for ExprSem {
    type V = Expr;

    fn zero(&mut self) -> Expr {
        Expr::Zero
    }

    fn one(&mut self) -> Expr {
        Expr::One
    }

    fn bit(&mut self, i: u64) -> Expr {
        Expr::Bit(i)
    }

    fn not(&mut self, a: &Expr) -> Expr {
        Expr::Not(Box::new(a.clone()))
    }

    fn xor(&mut self, a: &Expr, b: &Expr) -> Expr {
        Expr::Xor(Box::new(a.clone()), Box::new(b.clone()))
    }

    fn ite(&mut self, c: &Expr, t: &Expr, e: &Expr) -> Expr {
        Expr::If(Box::new(c.clone()), Box::new(t.clone()), Box::new(e.clone()))
    }

    fn hash(&mut self, m: u64, k: u64, b: u64, seed_len: u64, seed_val: u64) -> Expr {
        let mut seed = BitVec::with_capacity(seed_len as usize);
        seed.push_uint_msb(seed_val, seed_len as u32);
        Expr::Hash(HashExpr { m, k, b, seed })
    }
}

pub(crate) type Sink<'a, S> =
    &'a mut dyn FnMut(&mut S, &<S as BuildSem>::V, usize) -> ControlFlow<()>;

/// All programs whose code is exactly `len` bits, in ascending code order.
///
/// Code order sorts gamma-coded parameters with longer codes first (more
/// leading zeros), so for example `Bit(2)` at 6 bits precedes nothing at its
/// own length but `Bit(2)` and `Bit(3)` both sort before any `Not` of the
/// same length, opcode-major.
pub fn enumerate(len: usize) -> Vec<Expr> {
    let mut out = Vec::new();
    let _ = walk_exprs(Budget::Exact(len), &mut |e, _| {
        out.push(e);
        ControlFlow::Continue(())
    });
    out
}

/// Expression-tree walk within `budget`; see [`walk`].
pub(crate) fn walk_exprs(
    budget: Budget,
    f: &mut dyn FnMut(Expr, usize) -> ControlFlow<()>,
) -> ControlFlow<()> {
    walk(&mut ExprSem, budget, &mut |_, e: &Expr, l| f(e.clone(), l))
}

/// Walks programs within `budget` in ascending code order, opcode-major.
/// The sink receives each program's value with its exact code length;
/// returning `Break` stops the walk.
pub(crate) fn walk<S: BuildSem>(sem: &mut S, budget: Budget, f: Sink<'_, S>) -> ControlFlow<()> {
    let cap = budget.cap();
    if budget.admits(2) {
        let v = sem.zero();
        f(sem, &v, 2)?;
        let v = sem.one();
        f(sem, &v, 2)?;
    }
    // Bit: 3 + (2j + 1) bits for indices in [2^j, 2^(j+1)). Longer gamma
    // codes sort first, hence the descending j.
    if cap >= 4 {
        let j_max = (((cap - 4) / 2) as u32).min(62);
        for j in (0..=j_max).rev() {
            let l = 4 + 2 * j as usize;
            if !budget.admits(l) {
                continue;
            }
            for i in (1u64 << j)..(1u64 << (j + 1)) {
                let v = sem.bit(i);
                f(sem, &v, l)?;
            }
        }
    }
    if cap >= 5 {
        if let Some(cb) = budget.child(3) {
            walk(sem, cb, &mut |sem, a, la| {
                let v = sem.not(a);
                f(sem, &v, la + 3)
            })?;
        }
    }
    if cap >= 7 {
        walk(sem, Budget::AtMost(cap - 5), &mut |sem, a, la| {
            let Some(cb) = budget.child(3 + la) else {
                return ControlFlow::Continue(());
            };
            walk(sem, cb, &mut |sem, b, lb| {
                let v = sem.xor(a, b);
                f(sem, &v, 3 + la + lb)
            })
        })?;
    }
    if cap >= 10 {
        walk(sem, Budget::AtMost(cap - 8), &mut |sem, c, lc| {
            walk(sem, Budget::AtMost(cap - 6 - lc), &mut |sem, t, lt| {
                let Some(cb) = budget.child(4 + lc + lt) else {
                    return ControlFlow::Continue(());
                };
                walk(sem, cb, &mut |sem, e, le| {
                    let v = sem.ite(c, t, e);
                    f(sem, &v, 4 + lc + lt + le)
                })
            })
        })?;
    }
    if cap >= 8 {
        walk_hash(sem, budget, f)?;
    }
    ControlFlow::Continue(())
}

/// Seed lengths compatible with spending exactly `ws` bits on
/// `gamma(s + 1) || seed`: `s` such that `2 * floor(log2(s + 1)) + 1 + s = ws`.
fn exact_seed_lens(ws: usize) -> impl Iterator<Item = u64> {
    (0u32..=32).filter_map(move |js| {
        let block = 2 * js as usize + 1;
        if ws < block {
            return None;
        }
        let s = (ws - block) as u64;
        let lo = 1u64 << js;
        let hi = 2u64 << js;
        (s + 1 >= lo && s + 1 < hi).then_some(s)
    })
}

fn walk_hash<S: BuildSem>(sem: &mut S, budget: Budget, f: Sink<'_, S>) -> ControlFlow<()> {
    let w = budget.cap() - 4;
    if w < 4 {
        return ControlFlow::Continue(());
    }
    // gamma(m), then gamma(k+1), gamma(b), gamma(s+1) each at least 1 bit.
    let jm_max = (((w - 4) / 2) as u32).min(32);
    for jm in (0..=jm_max).rev() {
        let gm = 2 * jm as usize + 1;
        for m in (1u64 << jm)..(1u64 << (jm + 1)) {
            let wk = w - gm;
            if wk < 3 {
                break;
            }
            let jk_max = (((wk - 3) / 2) as u32).min(32);
            for jk in (0..=jk_max).rev() {
                let gk = 2 * jk as usize + 1;
                for kp in (1u64 << jk)..(1u64 << (jk + 1)) {
                    let k = kp - 1;
                    if k > m {
                        break;
                    }
                    let wb = wk - gk;
                    let jb_max = (((wb - 2) / 2) as u32).min(32);
                    for jb in (0..=jb_max).rev() {
                        let gb = 2 * jb as usize + 1;
                        for b in (1u64 << jb)..(1u64 << (jb + 1)) {
                            let ws = wb - gb;
                            if !sem.hash_family_useful(m, k, b) {
                                continue;
                            }
                            walk_hash_seeds(sem, budget, m, k, b, 4 + gm + gk + gb, ws, f)?;
                        }
                    }
                }
            }
        }
    }
    ControlFlow::Continue(())
}

#[allow(clippy::too_many_arguments)]
fn walk_hash_seeds<S: BuildSem>(
    sem: &mut S,
    budget: Budget,
    m: u64,
    k: u64,
    b: u64,
    header: usize,
    ws: usize,
    f: Sink<'_, S>,
) -> ControlFlow<()> {
    match budget {
        Budget::Exact(_) => {
            // At an exact total length the seed length is pinned: the bands
            // s + (2 * floor(log2(s+1)) + 1) are disjoint across lengths.
            for s in exact_seed_lens(ws) {
                emit_seeds(sem, m, k, b, s, header, f)?;
            }
        }
        Budget::AtMost(_) => {
            let js_top = (((ws.saturating_sub(1)) / 2) as u32).min(32);
            for js in (0..=js_top).rev() {
                let block = 2 * js as usize + 1;
                if ws < block {
                    continue;
                }
                let s_lo = (1u64 << js) - 1;
                let s_hi = (2u64 << js) - 2;
                let s_fit = (ws - block) as u64;
                for s in s_lo..=s_hi.min(s_fit) {
                    emit_seeds(sem, m, k, b, s, header, f)?;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

fn emit_seeds<S: BuildSem>(
    sem: &mut S,
    m: u64,
    k: u64,
    b: u64,
    s: u64,
    header: usize,
    f: Sink<'_, S>,
) -> ControlFlow<()> {
    assert!(s < 64, "seed enumeration beyond 63 bits is not supported");
    let glen = 2 * (63 - (s + 1).leading_zeros()) as usize + 1;
    let total = header + glen + s as usize;
    sem.hash_block(m, k, b, s);
    for sv in 0u64..(1u64 << s) {
        let v = sem.hash(m, k, b, s, sv);
        f(sem, &v, total)?;
    }
    ControlFlow::Continue(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code_str(e: &Expr) -> String {
        let code = encode(e).unwrap();
        code.0.to_string()
    }

    fn bit(i: u64) -> Expr {
        Expr::Bit(i)
    }

    fn not(a: Expr) -> Expr {
        Expr::Not(Box::new(a))
    }

    fn xor(a: Expr, b: Expr) -> Expr {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    fn hash(m: u64, k: u64, b: u64, seed: &str) -> Expr {
        Expr::Hash(HashExpr {
            m,
            k,
            b,
            seed: BitVec::from_bits_str(seed),
        })
    }

    #[test]
    fn gamma_code_examples() {
        for (n, want) in [(1, "1"), (2, "010"), (4, "00100"), (12, "0001100")] {
            assert_eq!(gamma_encode(n).unwrap().to_string(), want, "gamma({n})");
            assert_eq!(gamma_len(n).unwrap(), want.len());
        }
        assert_eq!(gamma_encode(0), Err(CodeError::GammaZero));
        assert_eq!(gamma_len(0), Err(CodeError::GammaZero));
    }

    #[test]
    fn encode_examples() {
        assert_eq!(code_str(&Expr::Zero), "00");
        assert_eq!(code_str(&Expr::One), "01");
        assert_eq!(code_str(&bit(1)), "1001");
        assert_eq!(code_str(&not(Expr::One)), "10101");
        assert_eq!(code_str(&xor(bit(1), Expr::One)), "110100101");
        assert_eq!(code_len(&xor(bit(1), Expr::One)).unwrap(), 9);
        // hash with m=2, k=1, b=1 and an empty seed
        assert_eq!(code_str(&hash(2, 1, 1, "")), "111101001011");
    }

    #[test]
    fn decode_examples() {
        let c = ProgramCode(BitVec::from_bits_str("110100101"));
        assert_eq!(decode(&c).unwrap(), xor(bit(1), Expr::One));

        let c = ProgramCode(BitVec::from_bits_str("111101001011"));
        assert_eq!(decode(&c).unwrap(), hash(2, 1, 1, ""));
    }

    #[test]
    fn decode_rejects_malformed_codes() {
        let trunc = ProgramCode(BitVec::from_bits_str("1101001"));
        assert_eq!(decode(&trunc), Err(CodeError::Truncated));

        let trailing = ProgramCode(BitVec::from_bits_str("0010"));
        assert_eq!(decode(&trailing), Err(CodeError::TrailingBits { trailing: 2 }));

        // hash with m=1 but k=2: "1111" gamma(1) gamma(3) gamma(1) gamma(1)
        let overweight = ProgramCode(BitVec::from_bits_str("1111101111"));
        assert_eq!(
            decode(&overweight),
            Err(CodeError::WeightExceedsSize { k: 2, m: 1 })
        );
    }

    #[test]
    fn encode_rejects_overweight_hash() {
        assert_eq!(
            encode(&hash(1, 2, 1, "")),
            Err(CodeError::WeightExceedsSize { k: 2, m: 1 })
        );
    }

    #[test]
    fn eval_basics() {
        let x = Instance(1u64 << 63); // only bit 1 set
        assert!(!Expr::Zero.eval(x).unwrap());
        assert!(Expr::One.eval(x).unwrap());
        assert!(bit(1).eval(x).unwrap());
        assert!(!bit(2).eval(x).unwrap());
        assert!(bit(64).eval(Instance(1)).unwrap());
        assert_eq!(
            bit(65).eval(x),
            Err(EvalError::BitIndexRange { index: 65 })
        );
        assert!(!xor(bit(1), Expr::One).eval(x).unwrap());
    }

    #[test]
    fn if_evaluates_only_the_taken_branch() {
        let x = Instance(0);
        let lazy_t = Expr::If(
            Box::new(Expr::One),
            Box::new(Expr::One),
            Box::new(bit(70)),
        );
        assert!(lazy_t.eval(x).unwrap());
        let lazy_e = Expr::If(
            Box::new(Expr::Zero),
            Box::new(bit(70)),
            Box::new(Expr::One),
        );
        assert!(lazy_e.eval(x).unwrap());
        let strict = Expr::If(
            Box::new(Expr::One),
            Box::new(bit(70)),
            Box::new(Expr::One),
        );
        assert_eq!(strict.eval(x), Err(EvalError::BitIndexRange { index: 70 }));
    }

    #[test]
    fn eval_rejects_wide_hash_prefix() {
        assert_eq!(
            hash(2, 1, 65, "").eval(Instance(0)),
            Err(EvalError::PrefixRange { width: 65 })
        );
    }

    #[test]
    fn dependency_bits_examples() {
        assert!(Expr::Zero.dependency_bits().is_empty());
        assert_eq!(
            xor(bit(3), hash(4, 2, 2, "01")).dependency_bits(),
            [1, 2, 3].into_iter().collect()
        );
        let nested = Expr::If(Box::new(bit(7)), Box::new(bit(5)), Box::new(Expr::Zero));
        assert_eq!(nested.dependency_bits(), [5, 7].into_iter().collect());
    }

    #[test]
    fn hex_serialization_round_trip() {
        for (e, want) in [
            (Expr::Zero, "2:0"),
            (Expr::One, "2:4"),
            (bit(1), "4:9"),
            (xor(bit(1), Expr::One), "9:d28"),
            (hash(2, 1, 1, ""), "12:f4b"),
        ] {
            let code = encode(&e).unwrap();
            assert_eq!(code.to_string(), want, "{e}");
            let back: ProgramCode = want.parse().unwrap();
            assert_eq!(back, code);
            assert_eq!(Expr::from_code_str(want).unwrap(), e);
        }
    }

    #[test]
    fn hex_parse_rejects_malformed_strings() {
        assert!(matches!(
            "9d28".parse::<ProgramCode>(),
            Err(ProgramParseError::BadFormat)
        ));
        assert!(matches!(
            "9:d2".parse::<ProgramCode>(),
            Err(ProgramParseError::LengthMismatch)
        ));
        assert!(matches!(
            "9:d29".parse::<ProgramCode>(),
            Err(ProgramParseError::NonZeroPadding)
        ));
        assert!(matches!(
            "9:dz8".parse::<ProgramCode>(),
            Err(ProgramParseError::BadHexDigit('z'))
        ));
    }

    #[test]
    fn enumerate_small_lengths() {
        assert_eq!(enumerate(2), vec![Expr::Zero, Expr::One]);
        assert_eq!(enumerate(3), vec![]);
        assert_eq!(enumerate(4), vec![bit(1)]);
        assert_eq!(enumerate(5), vec![not(Expr::Zero), not(Expr::One)]);
        assert_eq!(enumerate(6), vec![bit(2), bit(3)]);
        assert_eq!(
            enumerate(7),
            vec![
                not(bit(1)),
                xor(Expr::Zero, Expr::Zero),
                xor(Expr::Zero, Expr::One),
                xor(Expr::One, Expr::Zero),
                xor(Expr::One, Expr::One),
            ]
        );
        assert_eq!(
            enumerate(8),
            vec![
                bit(4),
                bit(5),
                bit(6),
                bit(7),
                not(not(Expr::Zero)),
                not(not(Expr::One)),
                hash(1, 0, 1, ""),
            ]
        );
    }

    /// Every valid code of length `l` must be produced by the enumerator,
    /// exactly once, in ascending code order; and everything the enumerator
    /// produces must round-trip through the codec at the stated length.
    #[test]
    fn enumerate_matches_exhaustive_decode_up_to_14_bits() {
        for l in 2..=14usize {
            let programs = enumerate(l);
            let mut codes = Vec::with_capacity(programs.len());
            for e in &programs {
                let code = encode(e).unwrap();
                assert_eq!(code.len(), l, "stated length of {e}");
                assert_eq!(decode(&code).unwrap(), *e);
                codes.push(code.0);
            }
            for pair in codes.windows(2) {
                assert!(pair[0] < pair[1], "codes out of order at length {l}");
            }
            let mut expected = 0usize;
            for raw in 0u64..(1u64 << l) {
                let mut bits = BitVec::new();
                bits.push_uint_msb(raw, l as u32);
                if decode(&ProgramCode(bits)).is_ok() {
                    expected += 1;
                }
            }
            assert_eq!(programs.len(), expected, "program count at length {l}");
        }
    }

    /// Three-variable parity is expressible; check a hand-built program
    /// against truth-table evaluation on all 8 assignments of bits 1..3.
    #[test]
    fn expresses_parity_of_three_bits() {
        let parity = xor(bit(1), xor(bit(2), bit(3)));
        for v in 0u64..8 {
            let x = Instance(v << 61);
            let want = (v.count_ones() % 2) == 1;
            assert_eq!(parity.eval(x).unwrap(), want, "v = {v:03b}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            Just(Expr::Zero),
            Just(Expr::One),
            (1u64..2000).prop_map(Expr::Bit),
            (1u64..40, 1u64..40, 1u64..80, proptest::collection::vec(any::<bool>(), 0..24))
                .prop_map(|(m, kraw, b, seed)| {
                    let k = kraw.min(m);
                    Expr::Hash(HashExpr {
                        m,
                        k,
                        b,
                        seed: seed.into_iter().collect(),
                    })
                }),
        ];
        leaf.prop_recursive(4, 64, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Not(Box::new(a))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Xor(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone(), inner)
                    .prop_map(|(c, t, e)| Expr::If(Box::new(c), Box::new(t), Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn codec_round_trip(e in arb_expr()) {
            let code = encode(&e).unwrap();
            prop_assert_eq!(decode(&code).unwrap(), e.clone());
            let shown = code.to_string();
            let parsed: ProgramCode = shown.parse().unwrap();
            prop_assert_eq!(parsed, code);
        }

        #[test]
        fn eval_is_total_over_results(e in arb_expr(), x in any::<u64>()) {
            // Never panics; range errors surface as values.
            let _ = e.eval(Instance(x));
        }

        #[test]
        fn gamma_round_trips_through_bit_codes(i in 1u64..u64::MAX / 2) {
            let code = encode(&Expr::Bit(i)).unwrap();
            prop_assert_eq!(decode(&code).unwrap(), Expr::Bit(i));
            prop_assert_eq!(code.len(), 3 + gamma_len(i).unwrap());
        }
    }
}
