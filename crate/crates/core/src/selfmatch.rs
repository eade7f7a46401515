//! Self-matchings and twin words of a single string.

use std::collections::HashMap;

use crate::error::Error;
use crate::string::{Matching, Symbol};

/// Largest string accepted by [`max_self_matching`] (quadratic table).
pub const SELF_MATCHING_LIMIT: usize = 2048;
/// Largest string accepted by [`longest_twin`] (exponential worst case).
pub const TWIN_LIMIT: usize = 24;

/// Maximum monotone matching of `s` against itself using only pairs (a, b)
/// with a < b and s[a] = s[b]. Returns the size and a witness.
pub fn max_self_matching(s: &[Symbol]) -> Result<(usize, Matching), Error> {
    let n = s.len();
    if n > SELF_MATCHING_LIMIT {
        return Err(Error::InstanceTooLarge { what: format!("self-matching of length {n}"), limit: SELF_MATCHING_LIMIT });
    }
    let w = n + 1;
    let mut t = vec![0u32; w * w];
    for x in 1..=n {
        for y in 1..=n {
            let mut best = t[(x - 1) * w + y].max(t[x * w + y - 1]);
            if x < y && s[x - 1] == s[y - 1] {
                best = best.max(t[(x - 1) * w + y - 1] + 1);
            }
            t[x * w + y] = best;
        }
    }
    let mut pairs = Vec::new();
    let (mut x, mut y) = (n, n);
    while x > 0 && y > 0 {
        let here = t[x * w + y];
        if here == t[(x - 1) * w + y] {
            x -= 1;
        } else if here == t[x * w + y - 1] {
            y -= 1;
        } else {
            pairs.push((x, y));
            x -= 1;
            y -= 1;
        }
    }
    pairs.reverse();
    Ok((t[n * w + n] as usize, Matching { pairs }))
}

/// Length of the longest pair of disjoint, equal subsequences.
///
/// Scans positions left to right tracking the symbols taken by the leading
/// copy that the trailing copy has not matched yet.
pub fn longest_twin(s: &[Symbol]) -> Result<usize, Error> {
    let n = s.len();
    if n > TWIN_LIMIT {
        return Err(Error::InstanceTooLarge { what: format!("twin search on length {n}"), limit: TWIN_LIMIT });
    }
    let mut memo = HashMap::new();
    Ok(twin_from(s, 0, &mut Vec::new(), &mut memo))
}

fn twin_from(s: &[Symbol], pos: usize, pending: &mut Vec<Symbol>, memo: &mut HashMap<(usize, Vec<Symbol>), usize>) -> usize {
    if pos == s.len() || pending.len() > s.len() - pos {
        return 0;
    }
    if let Some(&v) = memo.get(&(pos, pending.clone())) {
        return v;
    }
    let c = s[pos];
    let mut best = twin_from(s, pos + 1, pending, memo);
    pending.push(c);
    best = best.max(twin_from(s, pos + 1, pending, memo));
    pending.pop();
    if pending.first() == Some(&c) {
        let front = pending.remove(0);
        best = best.max(1 + twin_from(s, pos + 1, pending, memo));
        pending.insert(0, front);
    }
    memo.insert((pos, pending.clone()), best);
    best
}
