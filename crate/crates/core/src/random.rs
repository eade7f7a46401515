//! Randomized construction: a non-uniform sampler whose every window of
//! `t` symbols is distinct, plus resampling of bad intervals until the exact
//! verifier accepts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::string::{Symbol, SyncString};
use crate::verify::{self, Caps, SampledCheck, Strictness, Verdict, Violation};

/// Identifier of the pseudo-random generator recorded in reports.
pub const PRNG_ID: &str = "chacha8-seed_from_u64";

/// Derives an independent 64-bit seed for item `index` of a family (splitmix64 finalizer).
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerParams {
    pub eps: ExactFraction,
    /// Alphabet constant: |alphabet| = ceil(c1 / eps^2).
    pub c1: ExactFraction,
    /// Memory constant: t = ceil(c2 / eps^2).
    pub c2: ExactFraction,
    pub seed: u64,
}

impl SamplerParams {
    pub fn new(eps: ExactFraction, seed: u64) -> Result<Self, Error> {
        Self::with_constants(eps, ExactFraction::from_integer(32), ExactFraction::from_integer(16), seed)
    }

    pub fn with_constants(eps: ExactFraction, c1: ExactFraction, c2: ExactFraction, seed: u64) -> Result<Self, Error> {
        if !eps.in_open_unit() {
            return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
        }
        if !c2.is_positive() || c2 >= c1 {
            return Err(Error::Parameter(format!("need 0 < c2 < c1, got c1={c1}, c2={c2}")));
        }
        let p = Self { eps, c1, c2, seed };
        if p.memory() < 2 || p.alphabet_size() as u64 <= p.memory() as u64 {
            return Err(Error::Parameter("derived t must be >= 2 and below the alphabet size".into()));
        }
        Ok(p)
    }

    fn scaled(&self, c: &ExactFraction) -> u64 {
        (c / &(&self.eps * &self.eps)).ceil_u64()
    }

    pub fn alphabet_size(&self) -> u32 {
        u32::try_from(self.scaled(&self.c1)).expect("alphabet fits in u32")
    }

    /// Window length t within which symbols never repeat.
    pub fn memory(&self) -> usize {
        self.scaled(&self.c2) as usize
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Number of choices for the 1-based position i.
    pub fn range_at(&self, i: usize) -> u32 {
        self.alphabet_size() - self.recent_at(i) as u32
    }

    fn recent_at(&self, i: usize) -> usize {
        (self.memory() - 1).min(i - 1)
    }
}

/// Sampler variables; `p[i-1]` lies in 1..=|alphabet| - min(t-1, i-1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableTrace {
    pub p: Vec<u32>,
}

/// Maps a trace to its string. At step i the alphabet is reordered so the
/// previous h = min(t-1, i-1) symbols come first, most recent first, with the
/// rest keeping their prior relative order; symbol i sits at position p[i] + h.
///
/// The reordered alphabet always reads: the h recent symbols, then symbols
/// that have left the recent window (most recently dropped first), then
/// never-used symbols ascending. Keeping those three parts separately makes a
/// step cost O(dropped + log q) instead of O(q).
pub fn derive_string(trace: &VariableTrace, params: &SamplerParams) -> Result<SyncString, Error> {
    let q = params.alphabet_size();
    let mut unused = Fenwick::full(q as usize);
    // Dropped symbols, most recent drop last.
    let mut dropped: Vec<Symbol> = Vec::new();
    let mut out: Vec<Symbol> = Vec::with_capacity(trace.p.len());
    for (idx, &p) in trace.p.iter().enumerate() {
        let i = idx + 1;
        let h = params.recent_at(i);
        if p < 1 || p > params.range_at(i) {
            return Err(Error::Parameter(format!("trace entry {i} = {p} outside 1..={}", params.range_at(i))));
        }
        // The window slides once it is full: its oldest member drops out.
        if i > 1 && h == params.recent_at(i - 1) {
            dropped.push(out[out.len() - h - 1]);
        }
        let p = p as usize;
        let sym = if p <= dropped.len() {
            dropped.remove(dropped.len() - p)
        } else {
            let sym = unused.kth(p - dropped.len()) as Symbol;
            unused.remove(sym as usize);
            sym
        };
        out.push(sym);
    }
    SyncString::new(out, q)
}

/// Counts of never-used symbols with k-th lookup.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn full(n: usize) -> Self {
        let mut tree = vec![0u32; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Self { tree }
    }

    fn remove(&mut self, sym: usize) {
        let mut i = sym + 1;
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// 0-based symbol holding the k-th (1-based) remaining slot.
    fn kth(&self, mut k: usize) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && (self.tree[next] as usize) < k {
                pos = next;
                k -= self.tree[next] as usize;
            }
            step >>= 1;
        }
        pos
    }
}

fn draw(rng: &mut ChaCha8Rng, params: &SamplerParams, i: usize) -> u32 {
    rng.random_range(1..=params.range_at(i))
}

/// Independent draws for positions 1..=n from the seeded generator.
pub fn sample_trace(n: usize, params: &SamplerParams) -> VariableTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    VariableTrace { p: (1..=n).map(|i| draw(&mut rng, params, i)).collect() }
}

/// How a construction decides that a candidate is acceptable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GatePolicy {
    /// Strings up to this length are verified exactly.
    pub exact_limit: usize,
    /// Used above `exact_limit`.
    pub sampled: SampledCheck,
    /// Above `exact_limit`, every triple of total length up to this is also checked exactly.
    pub local_span: usize,
    /// Above this length the sample count shrinks by (limit / n)^3, keeping
    /// the sampled work roughly constant since one triple costs O(n^2 / 64).
    pub full_samples_limit: usize,
}

impl Default for GatePolicy {
    fn default() -> Self {
        Self { exact_limit: 1500, sampled: SampledCheck::default(), local_span: 128, full_samples_limit: 4096 }
    }
}

impl GatePolicy {
    pub fn is_exact(&self, n: usize) -> bool {
        n <= self.exact_limit
    }

    /// The sampled check applied to a candidate of length n.
    pub fn sampled_for(&self, n: usize, seed: u64) -> SampledCheck {
        let mut samples = self.sampled.samples as f64;
        if n > self.full_samples_limit {
            samples *= (self.full_samples_limit as f64 / n as f64).powi(3);
        }
        SampledCheck { samples: (samples.ceil() as usize).max(1), window: self.sampled.window, seed }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LllOutcome {
    pub string: SyncString,
    pub trace: VariableTrace,
    pub rounds: usize,
    pub gate: String,
    pub prng: String,
}

/// Samples a trace, then repeatedly finds a bad interval (shortest first,
/// then leftmost), redraws the trace variables inside it and re-derives the
/// string, until the verifier accepts or `max_rounds` redraws are spent.
pub fn construct_lll(n: usize, params: &SamplerParams, max_rounds: usize) -> Result<LllOutcome, Error> {
    construct_lll_gated(n, params, max_rounds, &GatePolicy::default())
}

pub fn construct_lll_gated(
    n: usize,
    params: &SamplerParams,
    max_rounds: usize,
    gate: &GatePolicy,
) -> Result<LllOutcome, Error> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trace = VariableTrace { p: (1..=n).map(|i| draw(&mut rng, params, i)).collect() };
    let exact = gate.is_exact(n);
    let caps = Caps::new(&params.eps, Strictness::Strict, n);
    let mut rounds = 0;
    loop {
        let s = derive_string(&trace, params)?;
        let bad = if exact {
            verify::shortest_violation(s.symbols(), &caps)
                .map(|(i, j, k, l)| caps.violation(verify::Property::Sync, vec![i + 1, j + 1, k + 1], k - i, l))
        } else {
            let check = gate.sampled_for(n, params.seed ^ rounds as u64);
            match verify::verify_sync_local(&s, &params.eps, gate.local_span)? {
                Verdict::Violation(v) => Some(v),
                Verdict::Pass => match verify::verify_sync_sampled(&s, &params.eps, &check)? {
                    Verdict::Pass => None,
                    Verdict::Violation(v) => Some(v),
                },
            }
        };
        let Some(bad) = bad else {
            let gate = if exact { "exact" } else { "sampled" };
            return Ok(LllOutcome { string: s, trace, rounds, gate: gate.into(), prng: PRNG_ID.into() });
        };
        if rounds >= max_rounds {
            return Err(Error::RoundBudgetExhausted { rounds, last: Some(Box::new(bad)) });
        }
        resample(&mut trace, &bad, params, &mut rng);
        rounds += 1;
    }
}

/// Redraws the variables of positions i..k-1 of a violating triple.
fn resample(trace: &mut VariableTrace, bad: &Violation, params: &SamplerParams, rng: &mut ChaCha8Rng) {
    let (i, k) = (bad.indices[0], bad.indices[2]);
    for pos in i..k {
        trace.p[pos - 1] = draw(rng, params, pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> SamplerParams {
        // eps = 1/2: c1 = 1 -> 4 symbols, c2 = 3/4 -> t = 3.
        SamplerParams::with_constants("1/2".parse().unwrap(), "1".parse().unwrap(), "3/4".parse().unwrap(), 1).unwrap()
    }

    #[test]
    fn hand_simulated_trace() {
        let params = small_params();
        assert_eq!((params.alphabet_size(), params.memory()), (4, 3));
        let trace = VariableTrace { p: vec![2, 1, 2, 1, 2] };
        assert_eq!(derive_string(&trace, &params).unwrap().symbols(), &[1, 0, 3, 1, 2]);
    }

    /// The reorder rule applied literally, one full permutation per step.
    fn derive_literally(trace: &VariableTrace, params: &SamplerParams) -> Vec<u32> {
        let mut order: Vec<u32> = (0..params.alphabet_size()).collect();
        let mut out: Vec<u32> = Vec::new();
        for (idx, &p) in trace.p.iter().enumerate() {
            let h = (params.memory() - 1).min(idx);
            let recent: Vec<u32> = out[out.len() - h..].iter().rev().copied().collect();
            let mut next = recent.clone();
            next.extend(order.iter().filter(|s| !recent.contains(s)));
            out.push(next[p as usize + h - 1]);
            order = next;
        }
        out
    }

    #[test]
    fn fast_derivation_matches_literal_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (c1, c2) in [("1", "3/4"), ("2", "1"), ("3/4", "1/2"), ("8", "1")] {
            let params = SamplerParams::with_constants("1/2".parse().unwrap(), c1.parse().unwrap(), c2.parse().unwrap(), 0).unwrap();
            for _ in 0..50 {
                let n = rng.random_range(1..60);
                let trace = VariableTrace { p: (1..=n).map(|i| rng.random_range(1..=params.range_at(i))).collect() };
                assert_eq!(derive_string(&trace, &params).unwrap().symbols(), derive_literally(&trace, &params).as_slice());
            }
        }
    }

    #[test]
    fn rejects_out_of_range_entries() {
        let params = small_params();
        assert!(derive_string(&VariableTrace { p: vec![5] }, &params).is_err());
        assert!(derive_string(&VariableTrace { p: vec![1, 1, 3] }, &params).is_err());
        assert!(derive_string(&VariableTrace { p: vec![0] }, &params).is_err());
    }

    #[test]
    fn default_constants() {
        let p = SamplerParams::new("1/2".parse().unwrap(), 0).unwrap();
        assert_eq!((p.alphabet_size(), p.memory()), (128, 64));
        let p = SamplerParams::new("1/4".parse().unwrap(), 0).unwrap();
        assert_eq!((p.alphabet_size(), p.memory()), (512, 256));
        assert!(SamplerParams::with_constants("1/2".parse().unwrap(), "1".parse().unwrap(), "2".parse().unwrap(), 0).is_err());
    }

    #[test]
    fn all_ones_trace_starts_distinct() {
        let p = SamplerParams::new("1/2".parse().unwrap(), 0).unwrap();
        let s = derive_string(&VariableTrace { p: vec![1; 100] }, &p).unwrap();
        let mut head = s.symbols()[..64].to_vec();
        head.sort_unstable();
        head.dedup();
        assert_eq!(head.len(), 64);
    }

    #[test]
    fn short_strings_need_no_resampling() {
        let p = SamplerParams::new("1/2".parse().unwrap(), 9).unwrap();
        let out = construct_lll(64, &p, 10).unwrap();
        assert_eq!(out.rounds, 0);
    }

    #[test]
    fn zero_budget_reports_last_violation() {
        // A 2-symbol memory over 3 symbols forces bad intervals quickly.
        let p = SamplerParams::with_constants("1/2".parse().unwrap(), "3/4".parse().unwrap(), "1/2".parse().unwrap(), 3).unwrap();
        match construct_lll(40, &p, 0) {
            Err(Error::RoundBudgetExhausted { rounds: 0, last: Some(v) }) => assert_eq!(v.indices.len(), 3),
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }
}
