//! Insertion/deletion codes from a block code and a synchronization string:
//! every codeword symbol travels with the matching symbol of the string, the
//! receiver aligns the index symbols against the string by LCS and hands the
//! placed payload to a half-error decoder.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ecc::{decode_half_errors, next_prime, rs_code, Code};
use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::metrics::lcs;
use crate::random::{construct_lll, mix_seed, SamplerParams};
use crate::string::{Symbol, SyncString};

/// Largest message space the demo picks by default for exhaustive decoding.
pub const DEMO_MESSAGE_LIMIT: u128 = 1 << 12;

/// (payload, index) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexedWord {
    pub pairs: Vec<(Symbol, Symbol)>,
}

impl IndexedWord {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn payload(&self) -> Vec<Symbol> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn index(&self) -> Vec<Symbol> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

pub fn encode(message: u128, code: &dyn Code, s: &SyncString) -> Result<IndexedWord, Error> {
    if code.block_length() != s.len() {
        return Err(Error::LengthMismatch { expected: code.block_length(), got: s.len() });
    }
    let word = code.encode(message)?;
    Ok(IndexedWord { pairs: word.into_iter().zip(s.symbols().iter().copied()).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Insertion {
    /// The pair is inserted before this 1-based original position (n + 1 appends).
    pub before: usize,
    pub pair: (Symbol, Symbol),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChannelTrace {
    /// 1-based positions removed from the sent word.
    pub deletions: BTreeSet<usize>,
    pub insertions: Vec<Insertion>,
}

impl ChannelTrace {
    /// `count` distinct deletions drawn uniformly from 1..=n.
    pub fn random_deletions(n: usize, count: usize, rng: &mut impl Rng) -> Self {
        let deletions = sample(rng, n, count.min(n)).into_iter().map(|p| p + 1).collect();
        ChannelTrace { deletions, insertions: Vec::new() }
    }
}

pub fn transmit(w: &IndexedWord, trace: &ChannelTrace) -> Result<Vec<(Symbol, Symbol)>, Error> {
    let n = w.len();
    if trace.deletions.iter().any(|&p| p == 0 || p > n) || trace.insertions.iter().any(|i| i.before == 0 || i.before > n + 1) {
        return Err(Error::Parameter("channel trace refers to positions outside the word".into()));
    }
    let mut out = Vec::with_capacity(n + trace.insertions.len());
    for pos in 1..=n + 1 {
        out.extend(trace.insertions.iter().filter(|i| i.before == pos).map(|i| i.pair));
        if pos <= n && !trace.deletions.contains(&pos) {
            out.push(w.pairs[pos - 1]);
        }
    }
    Ok(out)
}

/// 1-based index of `s` assigned to each received position by the
/// deterministic LCS witness between the received index symbols and `s`.
pub fn recover_indices(received: &[(Symbol, Symbol)], s: &SyncString) -> Vec<Option<usize>> {
    let idx: Vec<Symbol> = received.iter().map(|p| p.1).collect();
    let (_, matching) = lcs(&idx, s.symbols());
    let mut out = vec![None; received.len()];
    for (r, i) in matching.pairs {
        out[r - 1] = Some(i);
    }
    out
}

/// Payload placed by recovered index; unassigned indices are erasures.
pub fn place_payload(received: &[(Symbol, Symbol)], s: &SyncString) -> Vec<Option<Symbol>> {
    let mut placed = vec![None; s.len()];
    for (r, at) in recover_indices(received, s).into_iter().enumerate() {
        if let Some(i) = at {
            debug_assert!(placed[i - 1].is_none(), "monotone matchings never reuse an index");
            placed[i - 1] = Some(received[r].0);
        }
    }
    placed
}

pub fn decode(received: &[(Symbol, Symbol)], code: &dyn Code, s: &SyncString) -> Result<u128, Error> {
    if code.block_length() != s.len() {
        return Err(Error::LengthMismatch { expected: code.block_length(), got: s.len() });
    }
    decode_half_errors(code, &place_payload(received, s))
}

/// Erasures plus twice the wrongly placed symbols, against the sent codeword.
pub fn half_errors(placed: &[Option<Symbol>], codeword: &[Symbol]) -> usize {
    placed.iter().zip(codeword).map(|(p, &c)| match p {
        None => 1,
        Some(x) if *x == c => 0,
        Some(_) => 2,
    }).sum()
}

/// Largest deletion count D with D (1 + eps) / (1 - eps) < d.
pub fn deletion_budget(eps: &ExactFraction, distance: usize) -> usize {
    let factor = &(&ExactFraction::one() + eps) / &eps.one_minus();
    (0..distance).take_while(|&dl| factor.mul_int(dl as u64).as_big() < &num::BigRational::from_integer(distance.into())).last().unwrap_or(0)
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub n: usize,
    pub eps: ExactFraction,
    /// Deletions per trace are at most floor(n * delta).
    pub delta: ExactFraction,
    pub traces: usize,
    pub seed: u64,
    /// Reed-Solomon dimension; defaults to the largest that meets the
    /// deletion budget and keeps the message space within the demo limit.
    pub dimension: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceResult {
    pub message: String,
    pub deletions: usize,
    pub half_errors: usize,
    pub decoded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub n: usize,
    pub eps: ExactFraction,
    pub delta: ExactFraction,
    pub max_deletions: usize,
    pub code: String,
    pub distance: usize,
    pub deletion_budget: usize,
    pub sync_alphabet: u32,
    pub successes: usize,
    pub traces: usize,
    pub max_half_errors: usize,
    pub results: Vec<TraceResult>,
}

pub struct DemoSetup {
    pub code: Box<dyn Code>,
    pub sync: SyncString,
    pub max_deletions: usize,
    pub label: String,
}

pub fn demo_setup(cfg: &DemoConfig) -> Result<DemoSetup, Error> {
    if cfg.n < 2 || !cfg.eps.in_open_unit() || !(cfg.delta.in_open_unit() || cfg.delta == ExactFraction::zero()) {
        return Err(Error::Parameter("codec demo needs n >= 2, eps in (0, 1) and delta in [0, 1)".into()));
    }
    let max_deletions = cfg.delta.floor_mul(cfg.n as u64) as usize;
    let q = next_prime(cfg.n as u64) as u32;
    // d = n - k + 1 must exceed the half-errors D (1 + eps) / (1 - eps).
    let k_max = (1..=cfg.n).rev().find(|&k| deletion_budget(&cfg.eps, cfg.n - k + 1) >= max_deletions);
    let Some(k_max) = k_max else {
        return Err(Error::PlanInfeasible(format!("{max_deletions} deletions exceed every Reed-Solomon budget at n={}", cfg.n)));
    };
    let k = match cfg.dimension {
        Some(k) if k > k_max || k == 0 => {
            return Err(Error::PlanInfeasible(format!("dimension {k} leaves too little distance (max {k_max})")))
        }
        Some(k) => k,
        None => (1..=k_max).take_while(|&k| (q as u128).checked_pow(k as u32).is_some_and(|c| c <= DEMO_MESSAGE_LIMIT)).last().unwrap_or(1),
    };
    let code = rs_code(cfg.n, k, q)?;
    let params = SamplerParams::new(cfg.eps.clone(), mix_seed(cfg.seed, 0))?;
    let sync = construct_lll(cfg.n, &params, 50 * cfg.n)?.string;
    Ok(DemoSetup {
        label: format!("RS[{}, {}, {}] over {}", cfg.n, k, cfg.n - k + 1, q),
        code: Box::new(code),
        sync,
        max_deletions,
    })
}

/// Seeded random messages through random deletion channels, each deleting
/// exactly `max_deletions` positions.
pub fn codec_demo(cfg: &DemoConfig) -> Result<DemoReport, Error> {
    let setup = demo_setup(cfg)?;
    let code = setup.code.as_ref();
    let results = (0..cfg.traces)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, t as u64 + 1));
            let message = rng.random_range(0..code.message_count());
            let count = setup.max_deletions;
            let trace = ChannelTrace::random_deletions(cfg.n, count, &mut rng);
            let word = encode(message, code, &setup.sync)?;
            let received = transmit(&word, &trace)?;
            let placed = place_payload(&received, &setup.sync);
            let half = half_errors(&placed, &word.payload());
            let decoded = matches!(decode_half_errors(code, &placed), Ok(m) if m == message);
            Ok(TraceResult { message: message.to_string(), deletions: count, half_errors: half, decoded })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(DemoReport {
        n: cfg.n,
        eps: cfg.eps.clone(),
        delta: cfg.delta.clone(),
        max_deletions: setup.max_deletions,
        code: setup.label,
        distance: code.min_distance(),
        deletion_budget: deletion_budget(&cfg.eps, code.min_distance()),
        sync_alphabet: setup.sync.alphabet_size(),
        successes: results.iter().filter(|r| r.decoded).count(),
        traces: cfg.traces,
        max_half_errors: results.iter().map(|r| r.half_errors).max().unwrap_or(0),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::BlockCode;

    fn distinct(n: u32) -> SyncString {
        SyncString::from_symbols((0..n).collect())
    }

    #[test]
    fn encode_pairs_payload_with_index() {
        let code = BlockCode::new(vec![vec![4, 4, 4]], 3, 5, 3).unwrap();
        let s = SyncString::from_letters("abc");
        let w = encode(0, &code, &s).unwrap();
        assert_eq!(w.index(), s.symbols());
        assert_eq!(w.payload(), vec![4, 4, 4]);
        assert!(encode(0, &code, &SyncString::from_letters("ab")).is_err());
    }

    #[test]
    fn channel_rules() {
        let w = IndexedWord { pairs: vec![(1, 0), (2, 1), (3, 2)] };
        assert_eq!(transmit(&w, &ChannelTrace::default()).unwrap(), w.pairs);
        let all = ChannelTrace { deletions: (1..=3).collect(), insertions: vec![] };
        assert!(transmit(&w, &all).unwrap().is_empty());
        let ins = ChannelTrace { deletions: [2].into(), insertions: vec![Insertion { before: 4, pair: (9, 9) }] };
        assert_eq!(transmit(&w, &ins).unwrap(), vec![(1, 0), (3, 2), (9, 9)]);
        assert!(transmit(&w, &ChannelTrace { deletions: [4].into(), insertions: vec![] }).is_err());
    }

    #[test]
    fn recovery_on_distinct_index() {
        let s = distinct(6);
        let w = IndexedWord { pairs: s.symbols().iter().map(|&x| (x, x)).collect() };
        assert_eq!(recover_indices(&w.pairs, &s), (1..=6).map(Some).collect::<Vec<_>>());
        let recv = transmit(&w, &ChannelTrace { deletions: [3].into(), insertions: vec![] }).unwrap();
        assert_eq!(recover_indices(&recv, &s), vec![Some(1), Some(2), Some(4), Some(5), Some(6)]);
    }

    #[test]
    fn budget_matches_inequality() {
        // (1 + 3/4) / (1 - 3/4) = 7; 7 * 8 = 56 < 59 <= 7 * 9.
        assert_eq!(deletion_budget(&"3/4".parse().unwrap(), 59), 8);
        assert_eq!(deletion_budget(&"1/2".parse().unwrap(), 3), 0);
        assert_eq!(deletion_budget(&"1/2".parse().unwrap(), 4), 1);
    }

    #[test]
    fn demo_setup_shape() {
        let cfg = DemoConfig { n: 60, eps: "3/4".parse().unwrap(), delta: "2/15".parse().unwrap(), traces: 0, seed: 0, dimension: None };
        let setup = demo_setup(&cfg).unwrap();
        assert_eq!(setup.max_deletions, 8);
        assert_eq!((setup.code.block_length(), setup.code.alphabet_size(), setup.code.min_distance()), (60, 61, 59));
        assert_eq!(setup.code.message_count(), 61 * 61);
    }
}
