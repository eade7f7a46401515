//! Slow reference implementations used as test oracles.
//!
//! Each function follows the textbook definition directly: quadratic DP for
//! every interval pair and a rational comparison per pair.

use num::rational::BigRational;
use num::BigInt;

use crate::fraction::ExactFraction;
use crate::string::Symbol;

pub fn lcs_dp(a: &[Symbol], b: &[Symbol]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 0..a.len() {
        for j in 0..b.len() {
            t[i + 1][j + 1] = if a[i] == b[j] { t[i][j] + 1 } else { t[i][j + 1].max(t[i + 1][j]) };
        }
    }
    t[a.len()][b.len()]
}

pub fn edit_distance_dp(a: &[Symbol], b: &[Symbol]) -> usize {
    a.len() + b.len() - 2 * lcs_dp(a, b)
}

fn slack_times(eps: &ExactFraction, l: usize) -> BigRational {
    (BigRational::from_integer(1.into()) - eps.as_big()) * BigRational::from_integer(BigInt::from(l))
}

fn strict_ok(eps: &ExactFraction, ed: usize, l: usize) -> bool {
    BigRational::from_integer(BigInt::from(ed)) > slack_times(eps, l)
}

fn weak_ok(eps: &ExactFraction, ed: usize, l: usize) -> bool {
    BigRational::from_integer(BigInt::from(ed)) >= slack_times(eps, l).floor()
}

fn first_triple(s: &[Symbol], ok: impl Fn(usize, usize) -> bool) -> Option<(usize, usize, usize)> {
    let n = s.len();
    for i in 1..=n + 1 {
        for j in i + 1..=n + 1 {
            for k in j + 1..=n + 1 {
                let ed = edit_distance_dp(&s[i - 1..j - 1], &s[j - 1..k - 1]);
                if !ok(ed, k - i) {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Lexicographically smallest 1-based violating (i, j, k), if any.
pub fn sync_violation(s: &[Symbol], eps: &ExactFraction) -> Option<(usize, usize, usize)> {
    first_triple(s, |ed, l| strict_ok(eps, ed, l))
}

pub fn weak_violation(s: &[Symbol], eps: &ExactFraction) -> Option<(usize, usize, usize)> {
    first_triple(s, |ed, l| weak_ok(eps, ed, l))
}

pub fn is_circle(s: &[Symbol], eps: &ExactFraction) -> bool {
    (0..s.len().max(1)).all(|r| {
        let rot: Vec<Symbol> = s[r.min(s.len())..].iter().chain(&s[..r.min(s.len())]).copied().collect();
        sync_violation(&rot, eps).is_none()
    })
}

/// Long-distance property straight from the distance-function definition:
/// pairs [i, j), [i2, j2) with i2 - j <= f(l), f(l) = n when l > t and 0 otherwise.
pub fn long_distance_ok(s: &[Symbol], eps: &ExactFraction, t: usize) -> bool {
    let n = s.len();
    for i in 1..=n {
        for j in i + 1..=n + 1 {
            for i2 in j..=n {
                for j2 in i2 + 1..=n + 1 {
                    let l = (j - i) + (j2 - i2);
                    let gap_allowed = if l > t { n } else { 0 };
                    if i2 - j > gap_allowed {
                        continue;
                    }
                    let ed = edit_distance_dp(&s[i - 1..j - 1], &s[i2 - 1..j2 - 1]);
                    if !strict_ok(eps, ed, l) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Minimum insert/delete script length by exhaustive search over deletion
/// sets: any script can be reordered to delete first and insert second, so
/// the answer is min over equal subsequences c of (|a| - |c|) + (|b| - |c|).
pub fn edit_script_brute_force(a: &[Symbol], b: &[Symbol]) -> usize {
    assert!(a.len() <= 16 && b.len() <= 16);
    let subs = |x: &[Symbol]| -> Vec<Vec<Symbol>> {
        (0u32..1 << x.len())
            .map(|mask| (0..x.len()).filter(|&p| mask >> p & 1 == 1).map(|p| x[p]).collect())
            .collect()
    };
    let sa = subs(a);
    let sb: std::collections::HashSet<Vec<Symbol>> = subs(b).into_iter().collect();
    sa.iter().filter(|c| sb.contains(*c)).map(|c| a.len() + b.len() - 2 * c.len()).min().unwrap()
}

/// Largest monotone chain of pairs (a < b, equal symbols) by exhaustive DFS.
pub fn self_matching_brute_force(s: &[Symbol]) -> usize {
    fn extend(s: &[Symbol], last: Option<(usize, usize)>) -> usize {
        let n = s.len();
        let (a0, b0) = last.map_or((0, 0), |(a, b)| (a + 1, b + 1));
        let mut best = 0;
        for a in a0..n {
            for b in b0.max(a + 1)..n {
                if s[a] == s[b] {
                    best = best.max(1 + extend(s, Some((a, b))));
                }
            }
        }
        best
    }
    extend(s, None)
}

/// Longest twin by trying every assignment of positions to {unused, first, second}.
pub fn twin_brute_force(s: &[Symbol]) -> usize {
    let n = s.len();
    assert!(n <= 12);
    let mut best = 0;
    for code in 0..3usize.pow(n as u32) {
        let (mut first, mut second) = (Vec::new(), Vec::new());
        let mut c = code;
        for &sym in s {
            match c % 3 {
                1 => first.push(sym),
                2 => second.push(sym),
                _ => {}
            }
            c /= 3;
        }
        if first == second {
            best = best.max(first.len());
        }
    }
    best
}
