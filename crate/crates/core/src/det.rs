//! Deterministic constructions: circles from two halves, codewords indexed by
//! a circle, and the concatenated long-distance string.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ecc::{next_prime, rs_code, Code};
use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::metrics::lcs_len;
use crate::random::{construct_lll, mix_seed, GatePolicy, SamplerParams};
use crate::string::{Symbol, SyncString};
use crate::verify::{self, Verdict};

/// Parameters tying circle quality and code distance to the guarantees of
/// the concatenation: alpha = 1 - ((1 - eps0) / (1 + eps0)) delta, adjacent
/// quality eps1 = 10 alpha, long-distance quality eps_long = 12 alpha.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirclePlan {
    pub eps0: ExactFraction,
    pub delta: ExactFraction,
    pub alpha: ExactFraction,
    pub eps1: ExactFraction,
    pub eps_long: ExactFraction,
}

impl CirclePlan {
    pub fn new(eps0: ExactFraction, delta: ExactFraction) -> Result<Self, Error> {
        if !eps0.in_open_unit() {
            return Err(Error::Parameter(format!("eps0 must lie in (0,1), got {eps0}")));
        }
        if !delta.is_positive() || delta > ExactFraction::one() {
            return Err(Error::Parameter(format!("delta must lie in (0,1], got {delta}")));
        }
        let one = ExactFraction::one();
        let ratio = &(&one - &eps0) / &(&one + &eps0);
        let alpha = &one - &(&ratio * &delta);
        let eps1 = alpha.mul_int(10);
        let eps_long = alpha.mul_int(12);
        Ok(Self { eps0, delta, alpha, eps1, eps_long })
    }

    /// The long-distance bound says something only below 1.
    pub fn is_useful(&self) -> bool {
        self.eps_long < ExactFraction::one()
    }

    pub fn meets(&self, eps: &ExactFraction) -> bool {
        &self.eps_long <= eps
    }
}

/// eps0 = eps/36 and the smallest delta = j/64 with 12 alpha <= eps.
pub fn solve_plan(eps: &ExactFraction) -> Result<CirclePlan, Error> {
    if !eps.in_open_unit() {
        return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let eps0 = eps / &ExactFraction::from_integer(36);
    for j in 1..=64 {
        let plan = CirclePlan::new(eps0.clone(), ExactFraction::new(j, 64)?)?;
        if plan.meets(eps) {
            return Ok(plan);
        }
    }
    Err(Error::PlanInfeasible(format!("no delta = j/64 gives 12 alpha <= {eps} with eps0 = {eps0}")))
}

/// Concatenates two halves over disjoint symbol sets; |s1| = |s2| or |s2| + 1.
pub fn circle_from_halves(s1: &SyncString, s2: &SyncString) -> Result<SyncString, Error> {
    if s1.len() != s2.len() && s1.len() != s2.len() + 1 {
        return Err(Error::Parameter(format!("half lengths {} and {} are not ceil/floor of a split", s1.len(), s2.len())));
    }
    let left: HashSet<Symbol> = s1.symbols().iter().copied().collect();
    if let Some(&shared) = s2.symbols().iter().find(|s| left.contains(s)) {
        return Err(Error::Parameter(format!("halves share symbol {shared}")));
    }
    let mut symbols = s1.symbols().to_vec();
    symbols.extend_from_slice(s2.symbols());
    SyncString::new(symbols, s1.alphabet_size().max(s2.alphabet_size()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedCircle {
    pub circle: SyncString,
    pub attempts: usize,
}

pub const SEED_CIRCLE_RETRIES: usize = 100;

/// A length-m circle: two randomized halves over disjoint banks, joined and
/// checked with the circle verifier, retrying with derived seeds.
pub fn seed_circle(m: usize, eps0: &ExactFraction, seed: u64) -> Result<SeedCircle, Error> {
    if m < 2 {
        return Err(Error::Parameter("circle length must be at least 2".into()));
    }
    let base = SamplerParams::new(eps0.clone(), seed)?;
    let bank = base.alphabet_size();
    for attempt in 0..SEED_CIRCLE_RETRIES {
        let first = base.with_seed(mix_seed(seed, 2 * attempt as u64));
        let second = base.with_seed(mix_seed(seed, 2 * attempt as u64 + 1));
        let budget = 50 * m;
        let (Ok(h1), Ok(h2)) = (construct_lll(m.div_ceil(2), &first, budget), construct_lll(m / 2, &second, budget)) else {
            continue;
        };
        let shifted: Vec<Symbol> = h2.string.symbols().iter().map(|&s| s + bank).collect();
        let s2 = SyncString::new(shifted, 2 * bank)?;
        let circle = circle_from_halves(&h1.string, &s2)?;
        if verify::verify_circle(&circle, eps0)?.is_pass() {
            return Ok(SeedCircle { circle, attempts: attempt + 1 });
        }
    }
    Err(Error::RetryBudgetExhausted(SEED_CIRCLE_RETRIES))
}

/// A codeword zipped with the circle: position p holds (codeword[p], circle[p]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedCodeword {
    pub pairs: Vec<(Symbol, Symbol)>,
}

impl IndexedCodeword {
    /// Pair (c, x) becomes c * circle_alphabet + x.
    pub fn flatten(&self, circle_alphabet: u32) -> Vec<Symbol> {
        self.pairs.iter().map(|&(c, x)| c * circle_alphabet + x).collect()
    }
}

/// Indexes the given messages of `code` with the circle.
pub fn index_pairing(code: &dyn Code, messages: impl IntoIterator<Item = u128>, circle: &SyncString) -> Result<Vec<IndexedCodeword>, Error> {
    if code.block_length() != circle.len() {
        return Err(Error::LengthMismatch { expected: code.block_length(), got: circle.len() });
    }
    messages
        .into_iter()
        .map(|msg| {
            let word = code.encode(msg)?;
            Ok(IndexedCodeword { pairs: word.into_iter().zip(circle.symbols().iter().copied()).collect() })
        })
        .collect()
}

/// Largest LCS between two distinct indexed codewords.
pub fn max_pairwise_lcs(words: &[IndexedCodeword], circle_alphabet: u32) -> usize {
    let flat: Vec<Vec<Symbol>> = words.iter().map(|w| w.flatten(circle_alphabet)).collect();
    (0..flat.len())
        .flat_map(|i| (i + 1..flat.len()).map(move |j| (i, j)))
        .map(|(i, j)| lcs_len(&flat[i], &flat[j]))
        .max()
        .unwrap_or(0)
}

/// Optional overrides for the long-distance builder.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DetOptions {
    /// Block and circle length; default ceil(c log2 n).
    pub m: Option<usize>,
    pub delta: Option<ExactFraction>,
    /// Long-distance constant; default ceil(1/eps^2).
    pub c: Option<ExactFraction>,
    pub gate: Option<GatePolicy>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeStats {
    pub kind: String,
    pub block_length: usize,
    pub dimension: usize,
    pub alphabet_size: u32,
    pub min_distance: usize,
    pub message_count: String,
    pub used: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LongDistanceBuild {
    pub string: SyncString,
    pub plan: CirclePlan,
    pub m: usize,
    pub c: ExactFraction,
    pub code: CodeStats,
    pub circle_attempts: usize,
    pub circle_alphabet: u32,
    pub gate: String,
    /// Circle check of the untruncated concatenation at eps1, when eps1 < 1.
    pub concatenation_circle: Option<bool>,
}

/// Concatenation of ceil(n/m) codewords of a Reed-Solomon code with distance
/// ceil(delta m), each indexed by one fixed circle, truncated to n symbols.
pub fn build_long_distance(n: usize, eps: &ExactFraction, seed: u64) -> Result<LongDistanceBuild, Error> {
    build_long_distance_with(n, eps, seed, &DetOptions::default())
}

pub fn default_constant(eps: &ExactFraction) -> ExactFraction {
    ExactFraction::from_integer((eps * eps).recip().ceil_u64() as i64)
}

pub fn build_long_distance_with(n: usize, eps: &ExactFraction, seed: u64, opts: &DetOptions) -> Result<LongDistanceBuild, Error> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let plan = match &opts.delta {
        None => solve_plan(eps)?,
        Some(delta) => {
            let plan = CirclePlan::new(eps / &ExactFraction::from_integer(36), delta.clone())?;
            if !plan.meets(eps) {
                return Err(Error::PlanInfeasible(format!("12 alpha = {} exceeds eps = {eps}", plan.eps_long)));
            }
            plan
        }
    };
    let c = opts.c.clone().unwrap_or_else(|| default_constant(eps));
    let m = opts.m.unwrap_or_else(|| verify::long_distance_threshold(n, &c)).max(2);
    let blocks = n.div_ceil(m);
    let distance = plan.delta.ceil_mul(m as u64).max(1) as usize;
    let k = m - distance + 1;
    let mut q = next_prime(m as u64);
    while (q as u128).checked_pow(k as u32).is_some_and(|count| count < blocks as u128) {
        q = next_prime(q + 1);
    }
    let code = rs_code(m, k, q as u32)?;
    if code.message_count() < blocks as u128 {
        return Err(Error::CodeUndersupply { available: code.message_count(), needed: blocks as u128 });
    }
    let circle = seed_circle(m, &plan.eps0, seed)?;
    let circle_alphabet = circle.circle.alphabet_size();
    let words = index_pairing(&code, 0..blocks as u128, &circle.circle)?;
    let full: Vec<Symbol> = words.iter().flat_map(|w| w.flatten(circle_alphabet)).collect();
    let alphabet = code
        .alphabet_size()
        .checked_mul(circle_alphabet)
        .ok_or_else(|| Error::Parameter("paired alphabet exceeds 32 bits".into()))?;
    let string = SyncString::new(full[..n].to_vec(), alphabet)?;

    let gate = opts.gate.clone().unwrap_or_default();
    let (verdict, concatenation_circle, gate_name) = if gate.is_exact(full.len()) {
        let verdict = verify::verify_long_distance(&string, eps, &c, false)?;
        let circle_ok = if plan.eps1.in_open_unit() && verdict.is_pass() {
            let whole = SyncString::new(full.clone(), alphabet)?;
            if let Verdict::Violation(v) = verify::verify_circle(&whole, &plan.eps1)? {
                return Err(Error::GateFailed(Box::new(v)));
            }
            Some(true)
        } else {
            None
        };
        (verdict, circle_ok, "exact")
    } else {
        let check = gate.sampled_for(full.len(), seed);
        (verify::verify_long_distance_sampled(&string, eps, &c, &check)?, None, "sampled")
    };
    if let Verdict::Violation(v) = verdict {
        return Err(Error::GateFailed(Box::new(v)));
    }
    Ok(LongDistanceBuild {
        string,
        plan,
        m,
        c,
        code: CodeStats {
            kind: "reed-solomon".into(),
            block_length: m,
            dimension: k,
            alphabet_size: q as u32,
            min_distance: distance,
            message_count: code.message_count().to_string(),
            used: blocks,
        },
        circle_attempts: circle.attempts,
        circle_alphabet,
        gate: gate_name.into(),
        concatenation_circle,
    })
}
