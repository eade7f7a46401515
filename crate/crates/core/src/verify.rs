//! Exact verifiers for the synchronization-string family of properties.
//!
//! Every check reduces to "LCS of two intervals exceeds an integer cap that
//! depends only on the total length", so the caps are computed once per call
//! in exact arithmetic and the scans compare integers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitlcs::MaskTable;
use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::string::{Symbol, SyncString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Sync,
    Circle,
    Weak,
    LongDistance,
    SquareFree,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Sync => "sync",
            Property::Circle => "circle",
            Property::Weak => "weak",
            Property::LongDistance => "long-distance",
            Property::SquareFree => "square-free",
        }
    }
}

/// A failing witness. Indices are 1-based: (i, j, k) for adjacent intervals
/// [i, j) and [j, k); (i, j, i2, j2) for [i, j) and [i2, j2); (i, l) for a
/// square of half-length l at i. For circles, `rotation` is the 1-based start
/// of the rotation and the triple is relative to it.
///
/// `achieved` is the edit distance; the property needs `achieved > required`
/// (strict kinds) or `achieved >= required` (weak).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: Property,
    pub indices: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotation: Option<usize>,
    pub achieved: ExactFraction,
    pub required: ExactFraction,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{} violation at ({})", self.kind.name(), idx.join(","))?;
        if let Some(r) = self.rotation {
            write!(f, " in rotation {r}")?;
        }
        write!(f, ": achieved {}, required {}", self.achieved, self.required)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Violation(Violation),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Verdict::Pass => None,
            Verdict::Violation(v) => Some(v),
        }
    }
}

fn check_eps(eps: &ExactFraction) -> Result<(), Error> {
    if eps.in_open_unit() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Strictness {
    /// ED > (1-eps) L
    Strict,
    /// ED >= floor((1-eps) L)
    Floored,
}

/// Per-total-length LCS caps: a pair of total length L is fine iff LCS <= cap[L].
pub(crate) struct Caps {
    cap: Vec<usize>,
    eps: ExactFraction,
    strictness: Strictness,
}

impl Caps {
    pub fn new(eps: &ExactFraction, strictness: Strictness, max_len: usize) -> Self {
        let slack = eps.one_minus();
        let cap = (0..=max_len)
            .map(|l| {
                let floor = slack.floor_mul(l as u64) as usize;
                let need = match strictness {
                    Strictness::Strict => floor + 1,
                    Strictness::Floored => floor,
                };
                l.saturating_sub(need) / 2
            })
            .collect();
        Self { cap, eps: eps.clone(), strictness }
    }

    #[inline]
    pub fn cap(&self, l: usize) -> usize {
        self.cap[l]
    }

    pub fn max_len(&self) -> usize {
        self.cap.len() - 1
    }

    /// Range of right lengths b (b <= b_max) for which a left interval of
    /// length a can possibly violate: needs min(a, b) > cap[a + b].
    #[inline]
    pub fn right_range(&self, a: usize, b_max: usize) -> Option<(usize, usize)> {
        let b_max = b_max.min(self.max_len() - a);
        let mut lo = 1;
        while lo <= b_max && lo <= self.cap[a + lo] {
            lo += 1;
        }
        if lo > b_max || a <= self.cap[a + lo] {
            return None;
        }
        let mut hi = lo;
        while hi < b_max && a > self.cap[a + hi + 1] {
            hi += 1;
        }
        Some((lo, hi))
    }

    pub fn violation(&self, kind: Property, indices: Vec<usize>, total: usize, lcs: usize) -> Violation {
        let ed = total - 2 * lcs;
        let bound = self.eps.one_minus().mul_int(total as u64);
        let required = match self.strictness {
            Strictness::Strict => bound,
            Strictness::Floored => ExactFraction::from_integer(bound.floor_u64() as i64),
        };
        Violation { kind, indices, rotation: None, achieved: ExactFraction::from_integer(ed as i64), required }
    }
}

/// First violating (j, k, lcs) for a fixed 0-based left start `i`, with
/// right intervals ending no later than `end` (exclusive).
fn first_adjacent_from(
    table: &MaskTable,
    caps: &Caps,
    i: usize,
    end: usize,
) -> Option<(usize, usize, usize)> {
    for j in i + 1..end {
        let a = j - i;
        let Some((lo, hi)) = caps.right_range(a, end - j) else { continue };
        let mut row = table.row(j, j + hi);
        for p in i..j {
            table.feed(&mut row, table.id_at(p));
        }
        for (b, l) in row.scan(hi) {
            if b >= lo && l > caps.cap(a + b) {
                return Some((j, j + b, l));
            }
        }
    }
    None
}

/// Shortest violating (total, j, lcs) for a fixed left start with total <= `limit`;
/// ties go to the smallest j.
fn shortest_adjacent_from(
    table: &MaskTable,
    caps: &Caps,
    i: usize,
    end: usize,
    mut limit: usize,
) -> Option<(usize, usize, usize)> {
    let mut best = None;
    for j in i + 1..end {
        let a = j - i;
        if a + 1 > limit {
            break;
        }
        let Some((lo, hi)) = caps.right_range(a, (end - j).min(limit - a)) else { continue };
        let mut row = table.row(j, j + hi);
        for p in i..j {
            table.feed(&mut row, table.id_at(p));
        }
        for (b, l) in row.scan(hi) {
            if b >= lo && l > caps.cap(a + b) {
                best = Some((a + b, j, l));
                limit = a + b - 1;
                break;
            }
        }
    }
    best
}

/// Exact check of the adjacent-interval property on a whole string.
fn adjacent_scan(s: &[Symbol], eps: &ExactFraction, strictness: Strictness, kind: Property) -> Verdict {
    let n = s.len();
    if n < 2 {
        return Verdict::Pass;
    }
    let caps = Caps::new(eps, strictness, n);
    let table = MaskTable::new(s);
    let hit = (0..n - 1)
        .into_par_iter()
        .find_map_first(|i| first_adjacent_from(&table, &caps, i, n).map(|(j, k, l)| (i, j, k, l)));
    match hit {
        None => Verdict::Pass,
        Some((i, j, k, l)) => Verdict::Violation(caps.violation(kind, vec![i + 1, j + 1, k + 1], k - i, l)),
    }
}

/// Every split of every interval has edit distance > (1-eps)(k-i).
pub fn verify_sync(s: &SyncString, eps: &ExactFraction) -> Result<Verdict, Error> {
    check_eps(eps)?;
    Ok(adjacent_scan(s.symbols(), eps, Strictness::Strict, Property::Sync))
}

/// Weak variant: edit distance >= floor((1-eps)(k-i)).
pub fn verify_weak(s: &SyncString, eps: &ExactFraction) -> Result<Verdict, Error> {
    check_eps(eps)?;
    Ok(adjacent_scan(s.symbols(), eps, Strictness::Floored, Property::Weak))
}

/// Exact check restricted to triples with k - i <= span.
pub fn verify_sync_local(s: &SyncString, eps: &ExactFraction, span: usize) -> Result<Verdict, Error> {
    check_eps(eps)?;
    let v = s.symbols();
    let n = v.len();
    if n < 2 {
        return Ok(Verdict::Pass);
    }
    let caps = Caps::new(eps, Strictness::Strict, span.min(n));
    let table = MaskTable::new(v);
    let hit = (0..n - 1)
        .into_par_iter()
        .find_map_first(|i| first_adjacent_from(&table, &caps, i, n.min(i + span)).map(|(j, k, l)| (i, j, k, l)));
    Ok(match hit {
        None => Verdict::Pass,
        Some((i, j, k, l)) => Verdict::Violation(caps.violation(Property::Sync, vec![i + 1, j + 1, k + 1], k - i, l)),
    })
}

/// Every rotation is a synchronization string. A violation is reported in
/// the rotation that starts where the offending window starts.
pub fn verify_circle(s: &SyncString, eps: &ExactFraction) -> Result<Verdict, Error> {
    check_eps(eps)?;
    let n = s.len();
    if n < 2 {
        return Ok(Verdict::Pass);
    }
    let doubled: Vec<Symbol> = s.symbols().iter().chain(s.symbols()).copied().collect();
    let caps = Caps::new(eps, Strictness::Strict, n);
    let table = MaskTable::new(&doubled);
    let hit = (0..n)
        .into_par_iter()
        .find_map_first(|i| first_adjacent_from(&table, &caps, i, i + n).map(|(j, k, l)| (i, j, k, l)));
    Ok(match hit {
        None => Verdict::Pass,
        Some((i, j, k, l)) => {
            let mut v = caps.violation(Property::Circle, vec![1, j - i + 1, k - i + 1], k - i, l);
            v.rotation = Some(i + 1);
            Verdict::Violation(v)
        }
    })
}

/// Lexicographically smallest shortest violation: minimizes (k - i, i, j).
/// Returned as 0-based (i, j, k, lcs).
pub(crate) fn shortest_violation(s: &[Symbol], caps: &Caps) -> Option<(usize, usize, usize, usize)> {
    let n = s.len();
    if n < 2 {
        return None;
    }
    let table = MaskTable::new(s);
    let mut best: Option<(usize, usize, usize, usize)> = None;
    for i in 0..n - 1 {
        let limit = best.map_or(n, |(l, ..)| l - 1);
        if limit < 2 {
            break;
        }
        if let Some((total, j, l)) = shortest_adjacent_from(&table, caps, i, n, limit) {
            best = Some((total, i, j, l));
        }
    }
    best.map(|(total, i, j, l)| (i, j, i + total, l))
}

/// Which pairs of intervals a long-distance check covers.
#[derive(Clone, Copy, Debug)]
struct PairClasses {
    /// Adjacent pairs with total length <= this.
    adjacent_max: usize,
    /// Non-adjacent pairs with total length in (nonadjacent_min, nonadjacent_max].
    nonadjacent_min: usize,
    nonadjacent_max: usize,
}

/// The long-distance property with threshold T = ceil(c log2 n).
///
/// Default mode checks adjacent pairs of total length <= 2T and non-adjacent
/// pairs with T < total <= 2T. Exhaustive mode checks every adjacent pair and
/// every non-adjacent pair longer than T.
pub fn verify_long_distance(
    s: &SyncString,
    eps: &ExactFraction,
    c: &ExactFraction,
    exhaustive: bool,
) -> Result<Verdict, Error> {
    check_eps(eps)?;
    if !c.is_positive() {
        return Err(Error::Parameter(format!("c must be positive, got {c}")));
    }
    let n = s.len();
    let t = c.ceil_times_log2(n as u64) as usize;
    let classes = if exhaustive {
        PairClasses { adjacent_max: n, nonadjacent_min: t, nonadjacent_max: n }
    } else {
        PairClasses { adjacent_max: 2 * t, nonadjacent_min: t, nonadjacent_max: 2 * t }
    };
    Ok(long_distance_scan(s.symbols(), eps, classes))
}

pub fn long_distance_threshold(n: usize, c: &ExactFraction) -> usize {
    c.ceil_times_log2(n as u64) as usize
}

fn long_distance_scan(s: &[Symbol], eps: &ExactFraction, classes: PairClasses) -> Verdict {
    let n = s.len();
    if n < 2 {
        return Verdict::Pass;
    }
    let caps = Caps::new(eps, Strictness::Strict, n);
    let table = MaskTable::new(s);
    let max_total = classes.adjacent_max.max(classes.nonadjacent_max).min(n);
    let hit = (0..n - 1).into_par_iter().find_map_first(|i| {
        for j in i + 1..n {
            let a = j - i;
            if a >= max_total {
                break;
            }
            for i2 in j..n {
                let (lo_total, hi_total) = if i2 == j {
                    (0, classes.adjacent_max)
                } else {
                    (classes.nonadjacent_min, classes.nonadjacent_max)
                };
                let b_max = (n - i2).min(hi_total.saturating_sub(a));
                let Some((lo, hi)) = caps.right_range(a, b_max) else { continue };
                let lo = lo.max((lo_total + 1).saturating_sub(a));
                if lo > hi {
                    continue;
                }
                let mut row = table.row(i2, i2 + hi);
                for p in i..j {
                    table.feed(&mut row, table.id_at(p));
                }
                for (b, l) in row.scan(hi) {
                    if b >= lo && l > caps.cap(a + b) {
                        return Some((i, j, i2, i2 + b, l));
                    }
                }
            }
        }
        None
    });
    match hit {
        None => Verdict::Pass,
        Some((i, j, i2, j2, l)) => Verdict::Violation(caps.violation(
            Property::LongDistance,
            vec![i + 1, j + 1, i2 + 1, j2 + 1],
            (j - i) + (j2 - i2),
            l,
        )),
    }
}

/// No factor of the form xx. Smallest start first, then shortest half.
pub fn verify_square_free(s: &SyncString) -> Verdict {
    let v = s.symbols();
    let n = v.len();
    for i in 0..n {
        for l in 1..=(n - i) / 2 {
            if v[i..i + l] == v[i + l..i + 2 * l] {
                return Verdict::Violation(Violation {
                    kind: Property::SquareFree,
                    indices: vec![i + 1, l],
                    rotation: None,
                    achieved: ExactFraction::zero(),
                    required: ExactFraction::zero(),
                });
            }
        }
    }
    Verdict::Pass
}

/// Settings for sampled verification of strings too long for exact scans.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledCheck {
    pub samples: usize,
    pub window: usize,
    pub seed: u64,
}

impl Default for SampledCheck {
    fn default() -> Self {
        Self { samples: 1_000_000, window: 600, seed: 0 }
    }
}

/// LCS of text[i..j) and text[i2..j2), feeding the shorter interval over the longer one's bits.
fn interval_lcs(table: &MaskTable, i: usize, j: usize, i2: usize, j2: usize) -> usize {
    let ((fi, fj), (bi, bj)) = if j - i <= j2 - i2 { ((i, j), (i2, j2)) } else { ((i2, j2), (i, j)) };
    let mut row = table.row(bi, bj);
    for p in fi..fj {
        table.feed(&mut row, table.id_at(p));
    }
    row.prefix_lcs(bj - bi)
}

/// Uniformly sampled triples plus an exact scan of one random window.
/// Any violation found is genuine; a pass is evidence, not proof.
pub fn verify_sync_sampled(s: &SyncString, eps: &ExactFraction, check: &SampledCheck) -> Result<Verdict, Error> {
    check_eps(eps)?;
    let v = s.symbols();
    let n = v.len();
    if n <= check.window {
        return verify_sync(s, eps);
    }
    let caps = Caps::new(eps, Strictness::Strict, n);
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let start = rng.random_range(0..=n - check.window);
    let window = SyncString::new(v[start..start + check.window].to_vec(), s.alphabet_size())?;
    if let Verdict::Violation(mut bad) = verify_sync(&window, eps)? {
        for idx in bad.indices.iter_mut() {
            *idx += start;
        }
        return Ok(Verdict::Violation(bad));
    }
    let draws: Vec<(usize, usize, usize)> = (0..check.samples)
        .map(|_| {
            let mut t = [0usize; 3];
            loop {
                for x in t.iter_mut() {
                    *x = rng.random_range(0..=n);
                }
                t.sort_unstable();
                if t[0] < t[1] && t[1] < t[2] {
                    return (t[0], t[1], t[2]);
                }
            }
        })
        .collect();
    let table = MaskTable::new(v);
    let hit = draws.par_iter().find_map_first(|&(i, j, k)| {
        let l = interval_lcs(&table, i, j, j, k);
        (l > caps.cap(k - i)).then_some((i, j, k, l))
    });
    Ok(match hit {
        None => Verdict::Pass,
        Some((i, j, k, l)) => Verdict::Violation(caps.violation(Property::Sync, vec![i + 1, j + 1, k + 1], k - i, l)),
    })
}

/// Sampled long-distance check: random adjacent triples and random pairs of
/// total length in (T, 2T], plus an exact default-mode scan of one window.
pub fn verify_long_distance_sampled(
    s: &SyncString,
    eps: &ExactFraction,
    c: &ExactFraction,
    check: &SampledCheck,
) -> Result<Verdict, Error> {
    check_eps(eps)?;
    let v = s.symbols();
    let n = v.len();
    if n <= check.window {
        return verify_long_distance(s, eps, c, false);
    }
    let t = long_distance_threshold(n, c);
    let classes = PairClasses { adjacent_max: 2 * t, nonadjacent_min: t, nonadjacent_max: 2 * t };
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let start = rng.random_range(0..=n - check.window);
    if let Verdict::Violation(mut bad) = long_distance_scan(&v[start..start + check.window], eps, classes) {
        for idx in bad.indices.iter_mut() {
            *idx += start;
        }
        return Ok(Verdict::Violation(bad));
    }
    let caps = Caps::new(eps, Strictness::Strict, n);
    let two_t = (2 * t).min(n);
    let draws: Vec<(usize, usize, usize, usize)> = (0..check.samples)
        .map(|k| {
            if k % 2 == 0 {
                let i = rng.random_range(0..n - 1);
                let total = rng.random_range(2..=two_t.min(n - i).max(2));
                let j = i + rng.random_range(1..total);
                (i, j, j, i + total)
            } else {
                loop {
                    let total = rng.random_range(t + 1..=two_t.max(t + 1));
                    let a = rng.random_range(1..total);
                    let b = total - a;
                    if a + b + 1 > n {
                        continue;
                    }
                    let i = rng.random_range(0..=n - a - b - 1);
                    let i2 = rng.random_range(i + a + 1..=n - b);
                    return (i, i + a, i2, i2 + b);
                }
            }
        })
        .collect();
    let table = MaskTable::new(v);
    let hit = draws.par_iter().find_map_first(|&(i, j, i2, j2)| {
        let total = (j - i) + (j2 - i2);
        let l = interval_lcs(&table, i, j, i2, j2);
        (l > caps.cap(total)).then_some((i, j, i2, j2, l))
    });
    Ok(match hit {
        None => Verdict::Pass,
        Some((i, j, i2, j2, l)) => Verdict::Violation(caps.violation(
            Property::LongDistance,
            vec![i + 1, j + 1, i2 + 1, j2 + 1],
            (j - i) + (j2 - i2),
            l,
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> ExactFraction {
        s.parse().unwrap()
    }

    fn st(t: &str) -> SyncString {
        SyncString::from_letters(t)
    }

    #[test]
    fn sync_examples() {
        let v = verify_sync(&st("aa"), &f("1/2")).unwrap();
        assert_eq!(v.violation().unwrap().indices, vec![1, 2, 3]);
        assert!(verify_sync(&st("a"), &f("1/3")).unwrap().is_pass());
        assert!(verify_sync(&st("a"), &f("2/1")).is_err());
        assert!(verify_sync(&st("a"), &f("0")).is_err());
    }

    #[test]
    fn weak_examples() {
        assert!(verify_weak(&st("aa"), &f("3/4")).unwrap().is_pass());
        assert!(!verify_weak(&st("aaaa"), &f("1/2")).unwrap().is_pass());
    }

    #[test]
    fn circle_examples() {
        assert!(verify_circle(&st("ab"), &f("1/2")).unwrap().is_pass());
        assert!(!verify_circle(&st("aab"), &f("99/100")).unwrap().is_pass());
        assert!(!verify_circle(&st("aba"), &f("99/100")).unwrap().is_pass());
        assert!(verify_circle(&st("a"), &f("1/2")).unwrap().is_pass());
    }

    #[test]
    fn square_free_examples() {
        assert!(verify_square_free(&st("abcacb")).is_pass());
        assert_eq!(verify_square_free(&st("abab")).violation().unwrap().indices, vec![1, 2]);
        assert_eq!(verify_square_free(&st("aa")).violation().unwrap().indices, vec![1, 1]);
    }

    #[test]
    fn caps_at_boundary() {
        // eps = 12/13, L = 13: need ED > 1, i.e. ED >= 2, so LCS <= 5.
        let caps = Caps::new(&f("12/13"), Strictness::Strict, 13);
        assert_eq!(caps.cap(13), 5);
        assert_eq!(caps.cap(2), 0);
        let weak = Caps::new(&f("1/2"), Strictness::Floored, 4);
        assert_eq!(weak.cap(4), 1);
    }
}
