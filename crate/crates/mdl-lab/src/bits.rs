//! Growable bit strings packed MSB-first into 64-bit words.
//!
//! Bit `i` (0-based) lives in `words[i / 64]` at word bit `63 - (i % 64)`, and
//! unused trailing bits of the last word are kept zero. That invariant makes
//! derived equality, hashing, and ordering coincide with bitwise-lexicographic
//! semantics (word arrays compare lexicographically, then length breaks prefix
//! ties), and lets the word slice feed a word-at-a-time mixer directly.

/// A bit string. Empty by default.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitVec {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The backing words, MSB-first, zero-padded past `len`.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i / 64] >> (63 - (i % 64))) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        self.push_uint_msb(bit as u64, 1);
    }

    /// Appends the `width` low bits of `value`, most significant first.
    pub fn push_uint_msb(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value < (1u64 << width));
        if width == 0 {
            return;
        }
        let off = (self.len % 64) as u32;
        if off == 0 {
            self.words.push(0);
        }
        let room = 64 - off;
        let last = self.words.last_mut().expect("word present after push");
        if width <= room {
            *last |= value << (room - width);
        } else {
            *last |= value >> (width - room);
            self.words.push(value << (64 - (width - room)));
        }
        self.len += width as usize;
    }

    pub fn extend_bits(&mut self, other: &BitVec) {
        let mut remaining = other.len;
        for &w in &other.words {
            if remaining == 0 {
                break;
            }
            let take = remaining.min(64) as u32;
            self.push_uint_msb(w >> (64 - take), take);
            remaining -= take as usize;
        }
    }

    /// Shortens to `new_len` bits, re-zeroing the vacated padding.
    pub fn truncate(&mut self, new_len: usize) {
        assert!(new_len <= self.len);
        let nwords = new_len.div_ceil(64);
        self.words.truncate(nwords);
        if let Some(last) = self.words.last_mut() {
            let keep = (new_len - (nwords - 1) * 64) as u32;
            if keep < 64 {
                *last &= !0u64 << (64 - keep);
            }
        }
        self.len = new_len;
    }

    pub fn clear(&mut self) {
        self.words.clear();
        self.len = 0;
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Parses a string of `0`/`1` characters. Panics on anything else.
    pub fn from_bits_str(s: &str) -> Self {
        let mut out = BitVec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => panic!("invalid bit character {c:?}"),
            }
        }
        out
    }
}

impl FromIterator<bool> for BitVec {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        let mut out = BitVec::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl std::fmt::Display for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVec({self})")
    }
}
