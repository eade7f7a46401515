//! Bit-parallel LCS rows (Allison-Dix / Hyyro).
//!
//! For a text `t`, running the update with the characters of `a` over the bit
//! range starting at `start` leaves a vector whose zero bits below
//! `start + len` number exactly `lcs(a, t[start..start + len])`, for every
//! `len` at once.

use std::collections::HashMap;

use crate::string::Symbol;

pub(crate) struct MaskTable {
    words: usize,
    len: usize,
    /// Dense id of each text position.
    ids: Vec<u32>,
    /// `masks[id * words + w]`: bit p set iff text[p] has that id.
    masks: Vec<u64>,
    dense: HashMap<Symbol, u32>,
}

impl MaskTable {
    pub fn new(text: &[Symbol]) -> Self {
        let mut dense = HashMap::new();
        let ids: Vec<u32> = text
            .iter()
            .map(|&s| {
                let next = dense.len() as u32;
                *dense.entry(s).or_insert(next)
            })
            .collect();
        let words = text.len().div_ceil(64).max(1);
        let mut masks = vec![0u64; dense.len() * words];
        for (p, &id) in ids.iter().enumerate() {
            masks[id as usize * words + p / 64] |= 1 << (p % 64);
        }
        Self { words, len: text.len(), ids, masks, dense }
    }

    pub fn id_at(&self, p: usize) -> u32 {
        self.ids[p]
    }

    pub fn id_of(&self, s: Symbol) -> Option<u32> {
        self.dense.get(&s).copied()
    }

    /// Fresh all-ones row covering bits [start, end).
    pub fn row(&self, start: usize, end: usize) -> Row {
        let w0 = start / 64;
        debug_assert!(start < end && end <= self.len);
        let w1 = end.div_ceil(64);
        Row { w0, start, bits: vec![!0u64; w1 - w0] }
    }

    /// Feeds one character (by dense id) of the left string.
    #[inline]
    pub fn feed(&self, row: &mut Row, id: u32) {
        let base = id as usize * self.words + row.w0;
        let masks = &self.masks[base..base + row.bits.len()];
        let first = !0u64 << (row.start % 64);
        let mut carry = false;
        for (w, (v, &m)) in row.bits.iter_mut().zip(masks).enumerate() {
            let m = if w == 0 { m & first } else { m };
            let x = *v;
            let u = x & m;
            let (s1, c1) = x.overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            carry = c1 | c2;
            *v = s2 | (x & !m);
        }
    }
}

pub(crate) struct Row {
    w0: usize,
    start: usize,
    bits: Vec<u64>,
}

impl Row {
    /// Zero count within bits [start, start + len), i.e. LCS against that prefix.
    pub fn prefix_lcs(&self, len: usize) -> usize {
        let lo = self.start - self.w0 * 64;
        let hi = lo + len;
        let mut total = 0usize;
        let mut w = lo / 64;
        while w * 64 < hi {
            let mut z = !self.bits[w];
            if w == lo / 64 {
                z &= !0u64 << (lo % 64);
            }
            if (w + 1) * 64 > hi {
                z &= (1u64 << (hi % 64)) - 1;
            }
            total += z.count_ones() as usize;
            w += 1;
        }
        total
    }

    /// Walks prefix lengths 1..=max_len, yielding (len, lcs) incrementally.
    pub fn scan(&self, max_len: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let lo = self.start - self.w0 * 64;
        let mut acc = 0usize;
        (1..=max_len).map(move |len| {
            let p = lo + len - 1;
            if self.bits[p / 64] >> (p % 64) & 1 == 0 {
                acc += 1;
            }
            (len, acc)
        })
    }
}

/// LCS length of two arbitrary sequences.
pub(crate) fn lcs_len(a: &[Symbol], b: &[Symbol]) -> usize {
    let (a, b) = if a.len() > b.len() { (b, a) } else { (a, b) };
    if a.is_empty() {
        return 0;
    }
    let table = MaskTable::new(b);
    let mut row = table.row(0, b.len());
    for &c in a {
        if let Some(id) = table.id_of(c) {
            table.feed(&mut row, id);
        }
    }
    row.prefix_lcs(b.len())
}
