//! LCS and insertion/deletion edit distance.

use crate::bitlcs;
use crate::string::{Matching, Symbol};

/// LCS length with a deterministic witness.
///
/// The witness has the lexicographically least sequence of left indices among
/// all maximum matchings; each left index is paired with the earliest right
/// index that keeps the remainder optimal.
pub fn lcs(a: &[Symbol], b: &[Symbol]) -> (usize, Matching) {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    // suffix[x * w + y] = LCS(a[x..], b[y..])
    let mut suffix = vec![0u32; (n + 1) * w];
    for x in (0..n).rev() {
        for y in (0..m).rev() {
            suffix[x * w + y] = if a[x] == b[y] {
                suffix[(x + 1) * w + y + 1] + 1
            } else {
                suffix[(x + 1) * w + y].max(suffix[x * w + y + 1])
            };
        }
    }
    let total = suffix[0] as usize;
    let mut pairs = Vec::with_capacity(total);
    let (mut x, mut y) = (0, 0);
    while pairs.len() < total {
        let want = suffix[x * w + y];
        let hit = (y..m).find(|&yy| a[x] == b[yy] && suffix[(x + 1) * w + yy + 1] + 1 == want);
        if let Some(yy) = hit {
            pairs.push((x + 1, yy + 1));
            y = yy + 1;
        }
        x += 1;
    }
    (total, Matching { pairs })
}

/// LCS length only (bit-parallel).
pub fn lcs_len(a: &[Symbol], b: &[Symbol]) -> usize {
    bitlcs::lcs_len(a, b)
}

/// Minimum number of insertions and deletions turning `a` into `b`.
pub fn edit_distance(a: &[Symbol], b: &[Symbol]) -> usize {
    a.len() + b.len() - 2 * lcs_len(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::string::SyncString;

    fn s(t: &str) -> Vec<u32> {
        SyncString::from_letters(t).into_symbols()
    }

    #[test]
    fn examples() {
        assert_eq!(lcs(&s("abcabc"), &s("bca")).0, 3);
        assert_eq!(lcs(&s("abc"), &s("cba")).0, 1);
        assert_eq!(edit_distance(&s("ab"), &s("ba")), 2);
        assert_eq!(edit_distance(&s("abc"), &[]), 3);
        assert_eq!(edit_distance(&s("abcab"), &s("abcab")), 0);
    }

    #[test]
    fn witness_prefers_early_left_indices() {
        let (len, m) = lcs(&s("aab"), &s("ab"));
        assert_eq!(len, 2);
        assert_eq!(m.pairs, vec![(1, 1), (3, 2)]);
        let (_, m) = lcs(&s("ab"), &s("aab"));
        assert_eq!(m.pairs, vec![(1, 1), (2, 3)]);
    }
}
