//! Exhaustive depth-first enumeration of synchronization strings over small
//! alphabets, up to relabeling.
//!
//! A string is canonical when its letters first appear in the order 0, 1, 2, ...
//! Each extension is checked only against the triples that end at the new
//! position; earlier triples were checked when their own end was the frontier.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitlcs::MaskTable;
use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::string::Symbol;
use crate::verify::{Caps, Strictness};

/// Longest string the search will extend.
pub const MAX_DEPTH: usize = 4096;
pub const CHECKPOINT_SCHEMA: &str = "syncstr.search-checkpoint/1";

/// Calls `visit(a, b, lcs)` for every split of `s` into a left part of length a
/// and a right part of length b that ends at the last position, in order of
/// increasing b and then increasing a. Stops when `visit` returns false.
fn frontier_scan(s: &[Symbol], visit: impl FnMut(usize, usize, usize) -> bool) -> bool {
    if s.len() <= 128 {
        frontier_scan_word(s, visit)
    } else {
        frontier_scan_wide(s, visit)
    }
}

fn frontier_scan_word(s: &[Symbol], mut visit: impl FnMut(usize, usize, usize) -> bool) -> bool {
    let n = s.len();
    let mut masks = [0u128; 8];
    for j in (1..n).rev() {
        let b = n - j;
        masks[s[j] as usize] |= 1 << (b - 1);
        let width: u128 = if b == 128 { !0 } else { (1 << b) - 1 };
        let mut v = width;
        for a in 1..=j {
            let u = v & masks[s[j - a] as usize];
            v = (v.wrapping_add(u) | v.wrapping_sub(u)) & width;
            let lcs = b - v.count_ones() as usize;
            if !visit(a, b, lcs) {
                return false;
            }
        }
    }
    true
}

/// Same scan over the reversed string with multiword rows.
fn frontier_scan_wide(s: &[Symbol], mut visit: impl FnMut(usize, usize, usize) -> bool) -> bool {
    let n = s.len();
    let rev: Vec<Symbol> = s.iter().rev().copied().collect();
    let table = MaskTable::new(&rev);
    for b in 1..n {
        let mut row = table.row(0, b);
        for a in 1..=n - b {
            table.feed(&mut row, table.id_at(b + a - 1));
            if !visit(a, b, row.prefix_lcs(b)) {
                return false;
            }
        }
    }
    true
}

/// Edit distance over total length, kept as an unreduced pair for cheap comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Ratio {
    ed: u64,
    len: u64,
}

impl Ratio {
    const ONE: Ratio = Ratio { ed: 1, len: 1 };

    fn lt(self, other: Ratio) -> bool {
        self.ed * other.len < other.ed * self.len
    }

    fn min(self, other: Ratio) -> Ratio {
        if other.lt(self) { other } else { self }
    }

    fn exact(self) -> ExactFraction {
        ExactFraction::new(self.ed as i64, self.len as i64).unwrap()
    }
}

/// Smallest frontier ratio if every frontier triple satisfies the caps.
fn check_frontier(s: &[Symbol], caps: &Caps) -> Option<Ratio> {
    let mut worst = Ratio::ONE;
    let ok = frontier_scan(s, |a, b, lcs| {
        let len = a + b;
        if lcs > caps.cap(len) {
            return false;
        }
        worst = worst.min(Ratio { ed: (len - 2 * lcs) as u64, len: len as u64 });
        true
    });
    ok.then_some(worst)
}

/// True iff each prefix of `s` passes the frontier check; equivalent to the
/// string being eps-synchronized.
pub fn passes_incrementally(s: &[Symbol], eps: &ExactFraction) -> bool {
    let caps = Caps::new(eps, Strictness::Strict, s.len());
    (1..=s.len()).all(|n| check_frontier(&s[..n], &caps).is_some())
}

pub fn is_canonical(s: &[Symbol]) -> bool {
    let mut next = 0;
    for &c in s {
        if c > next {
            return false;
        }
        if c == next {
            next += 1;
        }
    }
    true
}

/// Relabels letters in order of first appearance.
pub fn canonicalize(s: &[Symbol]) -> Vec<Symbol> {
    let mut map = std::collections::HashMap::new();
    s.iter()
        .map(|&c| {
            let fresh = map.len() as Symbol;
            *map.entry(c).or_insert(fresh)
        })
        .collect()
}

fn children(s: &[Symbol], k: usize) -> std::ops::Range<Symbol> {
    let used = s.iter().max().map_or(0, |&m| m + 1);
    0..(used + 1).min(k as Symbol)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchCertificate {
    pub k: usize,
    pub eps: ExactFraction,
    /// The whole canonical tree was explored within budget.
    pub terminated: bool,
    pub max_length: usize,
    /// Extensions attempted, accepted or not.
    pub nodes_visited: u64,
    pub accepted_nodes: u64,
    /// Smallest edit distance over total length among all checked triples of accepted strings.
    pub worst_ratio_seen: ExactFraction,
    /// Lexicographically least canonical string of length `max_length`.
    pub witness: Vec<Symbol>,
}

/// Resumable search state: the pending canonical prefixes plus the
/// statistics gathered so far.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: String,
    pub k: usize,
    pub eps: ExactFraction,
    pub stack: Vec<Vec<Symbol>>,
    stats: Stats,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Stats {
    attempted: u64,
    accepted: u64,
    witness: Vec<Symbol>,
    worst: Ratio,
}

impl Stats {
    fn root() -> Self {
        Stats { attempted: 1, accepted: 1, witness: vec![0], worst: Ratio::ONE }
    }

    fn empty() -> Self {
        Stats { attempted: 0, accepted: 0, witness: Vec::new(), worst: Ratio::ONE }
    }

    fn record(&mut self, s: &[Symbol], worst: Ratio) {
        self.accepted += 1;
        self.worst = self.worst.min(worst);
        if s.len() > self.witness.len() || (s.len() == self.witness.len() && s < &self.witness[..]) {
            self.witness = s.to_vec();
        }
    }

    fn merge(mut self, other: Stats) -> Stats {
        self.attempted += other.attempted;
        self.accepted += other.accepted;
        self.worst = self.worst.min(other.worst);
        let w = other.witness;
        if w.len() > self.witness.len() || (w.len() == self.witness.len() && w < self.witness) {
            self.witness = w;
        }
        self
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub k: usize,
    pub eps: ExactFraction,
    pub node_budget: u64,
    /// Split the tree into subtrees and search them on the rayon pool.
    pub parallel: bool,
}

impl SearchConfig {
    pub fn new(k: usize, eps: ExactFraction, node_budget: u64) -> Result<Self, Error> {
        if !(2..=6).contains(&k) {
            return Err(Error::Parameter(format!("alphabet size must be in 2..=6, got {k}")));
        }
        if !eps.in_open_unit() {
            return Err(Error::Parameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        Ok(SearchConfig { k, eps, node_budget, parallel: false })
    }

    pub fn fresh_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            schema: CHECKPOINT_SCHEMA.into(),
            k: self.k,
            eps: self.eps.clone(),
            stack: vec![vec![0]],
            stats: Stats::root(),
        }
    }
}

pub struct SearchOutcome {
    pub certificate: SearchCertificate,
    /// Present when the budget ran out; feeding it back continues the search.
    pub checkpoint: Option<Checkpoint>,
}

/// Runs until the tree is exhausted or `node_budget` extensions were attempted.
/// A budget overrun is reported through `terminated = false`.
pub fn search_bk(k: usize, eps: &ExactFraction, node_budget: u64) -> Result<SearchCertificate, Error> {
    let cfg = SearchConfig::new(k, eps.clone(), node_budget)?;
    Ok(run_search(&cfg, None)?.certificate)
}

/// Sequential DFS from `stack`, charging attempts to the shared counter.
fn dfs(
    mut stack: Vec<Vec<Symbol>>,
    k: usize,
    caps: &Caps,
    spent: &AtomicU64,
    budget: u64,
) -> Result<(Stats, Vec<Vec<Symbol>>), Error> {
    let mut stats = Stats::empty();
    while let Some(node) = stack.pop() {
        let range = children(&node, k);
        let cost = range.len() as u64;
        if spent.fetch_add(cost, Ordering::Relaxed) + cost > budget {
            spent.fetch_sub(cost, Ordering::Relaxed);
            stack.push(node);
            return Ok((stats, stack));
        }
        if node.len() >= MAX_DEPTH {
            return Err(Error::InstanceTooLarge { what: "search depth".into(), limit: MAX_DEPTH });
        }
        stats.attempted += cost;
        let mut child = node;
        child.push(0);
        let mut accepted = Vec::new();
        for c in range {
            *child.last_mut().unwrap() = c;
            if let Some(worst) = check_frontier(&child, caps) {
                stats.record(&child, worst);
                accepted.push(child.clone());
            }
        }
        stack.extend(accepted.into_iter().rev());
    }
    Ok((stats, stack))
}

pub fn run_search(cfg: &SearchConfig, resume: Option<Checkpoint>) -> Result<SearchOutcome, Error> {
    let start = match resume {
        Some(cp) => {
            if cp.schema != CHECKPOINT_SCHEMA || cp.k != cfg.k || cp.eps != cfg.eps {
                return Err(Error::Format("checkpoint does not match the search parameters".into()));
            }
            cp
        }
        None => cfg.fresh_checkpoint(),
    };
    let caps = Caps::new(&cfg.eps, Strictness::Strict, MAX_DEPTH);
    let spent = AtomicU64::new(start.stats.attempted);
    let budget = cfg.node_budget;
    let (stats, leftover) = if cfg.parallel {
        // Expand breadth-first until there is enough independent work.
        let mut frontier = start.stack;
        let mut stats = start.stats;
        let want = 8 * rayon::current_num_threads();
        while !frontier.is_empty() && frontier.len() < want {
            let mut next = Vec::new();
            let mut expanded = false;
            for node in frontier.drain(..).rev() {
                let (s, rest) = dfs_one_level(node, cfg.k, &caps, &spent, budget)?;
                expanded |= s.attempted > 0;
                stats = stats.merge(s);
                next.extend(rest);
            }
            if !expanded || next.iter().all(|n| n.len() >= MAX_DEPTH) || spent.load(Ordering::Relaxed) >= budget {
                frontier = next;
                break;
            }
            // Keep lexicographic order: `dfs` pops from the back.
            next.reverse();
            frontier = next;
        }
        let parts: Vec<_> = frontier
            .par_iter()
            .rev()
            .map(|root| dfs(vec![root.clone()], cfg.k, &caps, &spent, budget))
            .collect::<Result<_, _>>()?;
        let mut leftover = Vec::new();
        for (s, rest) in parts.into_iter().rev() {
            stats = stats.merge(s);
            leftover.extend(rest);
        }
        (stats, leftover)
    } else {
        let (s, rest) = dfs(start.stack, cfg.k, &caps, &spent, budget)?;
        (start.stats.merge(s), rest)
    };
    let terminated = leftover.is_empty();
    let certificate = SearchCertificate {
        k: cfg.k,
        eps: cfg.eps.clone(),
        terminated,
        max_length: stats.witness.len(),
        nodes_visited: stats.attempted,
        accepted_nodes: stats.accepted,
        worst_ratio_seen: stats.worst.exact(),
        witness: stats.witness.clone(),
    };
    let checkpoint = (!terminated).then(|| Checkpoint {
        schema: CHECKPOINT_SCHEMA.into(),
        k: cfg.k,
        eps: cfg.eps.clone(),
        stack: leftover,
        stats,
    });
    Ok(SearchOutcome { certificate, checkpoint })
}

/// Expands a single node; returns its accepted children in lexicographic order.
fn dfs_one_level(
    node: Vec<Symbol>,
    k: usize,
    caps: &Caps,
    spent: &AtomicU64,
    budget: u64,
) -> Result<(Stats, Vec<Vec<Symbol>>), Error> {
    let (mut stats, mut out) = (Stats::empty(), Vec::new());
    let range = children(&node, k);
    let cost = range.len() as u64;
    if node.len() >= MAX_DEPTH || spent.fetch_add(cost, Ordering::Relaxed) + cost > budget {
        if node.len() < MAX_DEPTH {
            spent.fetch_sub(cost, Ordering::Relaxed);
        }
        return Ok((stats, vec![node]));
    }
    stats.attempted += cost;
    for c in range {
        let mut child = node.clone();
        child.push(c);
        if let Some(worst) = check_frontier(&child, caps) {
            stats.record(&child, worst);
            out.push(child);
        }
    }
    Ok((stats, out))
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstRatio {
    pub ratio: ExactFraction,
    pub witness: Vec<Symbol>,
}

/// Best achievable worst-case triple ratio: the maximum, over canonical
/// strings of length exactly `len` on k letters, of the minimum over triples
/// of ED(S[i,j), S[j,l)) / (l - i). Strings of length below 2 have no triples
/// and score 1.
pub fn worst_ratio(k: usize, len: usize, node_budget: u64) -> Result<WorstRatio, Error> {
    if k == 0 || len > MAX_DEPTH {
        return Err(Error::Parameter("worst_ratio needs k >= 1 and a length within the depth limit".into()));
    }
    if len == 0 {
        return Ok(WorstRatio { ratio: ExactFraction::one(), witness: Vec::new() });
    }
    let mut best: Option<(Ratio, Vec<Symbol>)> = None;
    let mut spent = 0u64;
    let mut stack = vec![(vec![0 as Symbol], Ratio::ONE)];
    while let Some((node, worst)) = stack.pop() {
        if best.as_ref().is_some_and(|(b, _)| !b.lt(worst)) {
            continue;
        }
        if node.len() == len {
            best = Some((worst, node));
            continue;
        }
        spent += 1;
        if spent > node_budget {
            return Err(Error::BudgetExhausted);
        }
        let mut kids = Vec::new();
        for c in children(&node, k) {
            let mut child = node.clone();
            child.push(c);
            let mut w = worst;
            frontier_scan(&child, |a, b, lcs| {
                w = w.min(Ratio { ed: (a + b - 2 * lcs) as u64, len: (a + b) as u64 });
                true
            });
            kids.push((child, w));
        }
        stack.extend(kids.into_iter().rev());
    }
    let (ratio, witness) = best.expect("some canonical string of every length exists");
    Ok(WorstRatio { ratio: ratio.exact(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::lcs_len;

    #[test]
    fn frontier_scan_matches_lcs() {
        let s: Vec<Symbol> = vec![0, 1, 2, 0, 2, 1, 1, 0, 2];
        let mut seen = 0;
        frontier_scan(&s, |a, b, lcs| {
            let n = s.len();
            assert_eq!(lcs, lcs_len(&s[n - b - a..n - b], &s[n - b..]));
            seen += 1;
            true
        });
        assert_eq!(seen, s.len() * (s.len() - 1) / 2);
        let long: Vec<Symbol> = (0..150u32).map(|i| (i * i + i / 7) % 3).collect();
        let (mut narrow, mut wide) = (Vec::new(), Vec::new());
        frontier_scan_word(&long[..128], |a, b, l| { narrow.push((a, b, l)); true });
        frontier_scan_wide(&long[..128], |a, b, l| { wide.push((a, b, l)); true });
        assert_eq!(narrow, wide);
    }

    #[test]
    fn canonical_forms() {
        assert!(is_canonical(&[0, 1, 0, 2]));
        assert!(!is_canonical(&[1, 0]));
        assert_eq!(canonicalize(&[2, 2, 0, 1]), vec![0, 0, 1, 2]);
    }

    #[test]
    fn binary_half_terminates_short() {
        let cert = search_bk(2, &"1/2".parse().unwrap(), 1000).unwrap();
        assert!(cert.terminated);
        assert!(cert.max_length <= 3);
        assert_eq!(cert.witness, vec![0, 1]);
    }

    #[test]
    fn tiny_eps_terminates_fast() {
        let cert = search_bk(3, &"1/100".parse().unwrap(), 1000).unwrap();
        assert!(cert.terminated);
        // Only all-distinct strings survive.
        assert_eq!((cert.max_length, cert.witness.clone()), (3, vec![0, 1, 2]));
    }

    #[test]
    fn worst_ratio_small_cases() {
        assert_eq!(worst_ratio(1, 3, 100).unwrap().ratio, ExactFraction::zero());
        assert_eq!(worst_ratio(2, 3, 100).unwrap().ratio.to_string(), "1/3");
        assert_eq!(worst_ratio(2, 4, 100).unwrap().ratio, ExactFraction::zero());
        assert_eq!(worst_ratio(3, 1, 100).unwrap().ratio, ExactFraction::one());
        assert!(matches!(worst_ratio(3, 12, 3), Err(Error::BudgetExhausted)));
    }

    #[test]
    fn budget_and_resume() {
        let eps: ExactFraction = "3/4".parse().unwrap();
        let full = search_bk(3, &eps, u64::MAX).unwrap();
        assert!(full.terminated && full.nodes_visited > 30, "{full:?}");
        let cfg = SearchConfig::new(3, eps.clone(), 10).unwrap();
        let mut out = run_search(&cfg, None).unwrap();
        assert!(!out.certificate.terminated);
        let mut rounds = 0;
        while let Some(cp) = out.checkpoint.take() {
            let cfg = SearchConfig { node_budget: cp.stats.attempted + 10, ..cfg.clone() };
            out = run_search(&cfg, Some(cp)).unwrap();
            rounds += 1;
        }
        assert!(rounds > 0);
        assert_eq!(out.certificate.nodes_visited, full.nodes_visited);
        assert_eq!(out.certificate.max_length, full.max_length);
        assert_eq!(out.certificate.witness, full.witness);
        let par = run_search(&SearchConfig { parallel: true, ..SearchConfig::new(3, eps, u64::MAX).unwrap() }, None)
            .unwrap()
            .certificate;
        assert_eq!((par.nodes_visited, par.max_length, &par.witness), (full.nodes_visited, full.max_length, &full.witness));
        assert_eq!(par.worst_ratio_seen, full.worst_ratio_seen);
    }
}
