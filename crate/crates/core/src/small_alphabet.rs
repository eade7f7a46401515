//! Constant-size alphabets: uniform morphisms, a ternary square-free source,
//! binary weak synchronization strings and four-letter synchronization strings.
//!
//! Letters are stored 0-based: the ternary letters 1, 2, 3 are symbols
//! 0, 1, 2 and the fourth letter is symbol 3.

use serde::Serialize;

use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::metrics::lcs_len;
use crate::random::{construct_lll, mix_seed, SamplerParams};
use crate::string::{Symbol, SyncString};
use crate::verify::{verify_square_free, verify_sync, Verdict};

/// Sub-seeds tried by [`four_letter`] before giving up.
pub const FOUR_LETTER_RETRIES: usize = 64;

/// Longest iterate the degradation report materializes.
pub const MORPHISM_LENGTH_LIMIT: usize = 1 << 19;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    rank: usize,
    images: Vec<Vec<Symbol>>,
}

impl Morphism {
    pub fn new(images: Vec<Vec<Symbol>>) -> Result<Self, Error> {
        let rank = images.first().map_or(0, Vec::len);
        let q = images.len() as u32;
        if rank == 0 {
            return Err(Error::Parameter("morphism needs non-empty images".into()));
        }
        for img in &images {
            if img.len() != rank {
                return Err(Error::Parameter("morphism images must share one length".into()));
            }
            if let Some(&s) = img.iter().find(|&&s| s >= q) {
                return Err(Error::SymbolOutOfRange { symbol: s, alphabet: q });
            }
        }
        Ok(Morphism { rank, images })
    }

    /// Leech's rank-13 square-free ternary morphism.
    pub fn leech() -> Self {
        let img = |w: &str| w.bytes().map(|b| (b - b'a') as Symbol).collect();
        Morphism::new(vec![img("abcbacbcabcba"), img("bcacbacabcacb"), img("cabacbabcabac")]).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn alphabet_size(&self) -> u32 {
        self.images.len() as u32
    }

    pub fn image(&self, s: Symbol) -> &[Symbol] {
        &self.images[s as usize]
    }
}

pub fn apply_morphism(phi: &Morphism, s: &SyncString) -> Result<SyncString, Error> {
    let q = phi.alphabet_size();
    let mut out = Vec::with_capacity(s.len() * phi.rank);
    for &c in s.symbols() {
        if c >= q {
            return Err(Error::SymbolOutOfRange { symbol: c, alphabet: q });
        }
        out.extend_from_slice(phi.image(c));
    }
    SyncString::new(out, q)
}

/// Prefix of the fixed point of 1 -> 123, 2 -> 13, 3 -> 2.
pub fn thue_square_free(n: usize) -> Result<SyncString, Error> {
    let mut w: Vec<Symbol> = vec![0];
    while w.len() < n {
        w = w
            .iter()
            .flat_map(|&c| match c {
                0 => &[0, 1, 2][..],
                1 => &[0, 2][..],
                _ => &[1][..],
            })
            .copied()
            .collect();
    }
    w.truncate(n);
    let s = SyncString::new(w, 3)?;
    if let Verdict::Violation(v) = verify_square_free(&s) {
        return Err(Error::GateFailed(Box::new(v)));
    }
    if let Some(p) = s.symbols().windows(4).position(|win| !win.contains(&0)) {
        return Err(Error::Parameter(format!("square-free source lacks letter 1 in window at {}", p + 1)));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakBinaryPlan {
    pub inner_eps: ExactFraction,
    pub inner_alphabet: u32,
    pub k: usize,
    pub eps: ExactFraction,
}

impl WeakBinaryPlan {
    /// Plan for a source built by the randomized sampler with default constants.
    pub fn new(inner_eps: ExactFraction) -> Result<Self, Error> {
        let q = SamplerParams::new(inner_eps.clone(), 0)?.alphabet_size();
        Self::with_alphabet(inner_eps, q)
    }

    pub fn with_alphabet(inner_eps: ExactFraction, inner_alphabet: u32) -> Result<Self, Error> {
        if !inner_eps.in_open_unit() || inner_alphabet < 2 {
            return Err(Error::Parameter("weak binary plan needs eps' in (0, 1) and at least 2 letters".into()));
        }
        let k = (32 - (inner_alphabet - 1).leading_zeros()) as usize;
        let slack = &inner_eps.one_minus() * &ExactFraction::new(1, 18 * k as i64)?;
        Ok(WeakBinaryPlan { eps: slack.one_minus(), inner_eps, inner_alphabet, k })
    }

    pub fn block_len(&self) -> usize {
        3 * self.k
    }
}

/// k bits of `symbol` (most significant first), then 0^k 1^k.
pub fn binary_block(symbol: Symbol, k: usize) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = (0..k).rev().map(|b| (symbol >> b) & 1).collect();
    out.extend(std::iter::repeat_n(0, k));
    out.extend(std::iter::repeat_n(1, k));
    out
}

pub fn weak_binary_from_source(source: &[Symbol], k: usize, n: usize) -> Result<SyncString, Error> {
    let mut bits: Vec<Symbol> = source.iter().flat_map(|&c| binary_block(c, k)).collect();
    if bits.len() < n {
        return Err(Error::LengthMismatch { expected: n, got: bits.len() });
    }
    bits.truncate(n);
    SyncString::new(bits, 2)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakBinaryOutcome {
    pub string: SyncString,
    pub plan: WeakBinaryPlan,
    pub source: SyncString,
}

/// Binary weak synchronization string of length n from a randomized eps'-sync source.
pub fn weak_binary(n: usize, plan: &WeakBinaryPlan, seed: u64) -> Result<WeakBinaryOutcome, Error> {
    let blocks = n.div_ceil(plan.block_len()).max(1);
    let params = SamplerParams::new(plan.inner_eps.clone(), seed)?;
    if params.alphabet_size() > plan.inner_alphabet {
        return Err(Error::Parameter("plan alphabet smaller than the sampler's".into()));
    }
    let source = construct_lll(blocks, &params, 50 * blocks)?.string;
    let string = weak_binary_from_source(source.symbols(), plan.k, n)?;
    Ok(WeakBinaryOutcome { string, plan: plan.clone(), source })
}

/// Inverse of the block encoding: full blocks back to symbols, plus the
/// length of the trailing partial block. Fails on any grammar violation.
pub fn parse_weak_binary(bits: &[Symbol], k: usize) -> Result<(Vec<Symbol>, usize), Error> {
    let chunks = bits.chunks(3 * k);
    let mut symbols = Vec::new();
    let mut partial = 0;
    for chunk in chunks {
        let expect = |p: usize| if p < 2 * k { 0 } else { 1 };
        if chunk.iter().any(|&b| b > 1) || chunk.iter().enumerate().skip(k).any(|(p, &b)| b != expect(p)) {
            return Err(Error::Format("bits do not follow the block grammar".into()));
        }
        if chunk.len() == 3 * k {
            symbols.push(chunk[..k].iter().fold(0, |acc, &b| acc << 1 | b));
        } else {
            partial = chunk.len();
        }
    }
    Ok((symbols, partial))
}

/// Replaces the i-th occurrence of letter 1 (symbol 0) by letter 4 (symbol 3) iff bits[i] = 1.
pub fn mark_occurrences(ternary: &[Symbol], bits: &[Symbol]) -> Result<Vec<Symbol>, Error> {
    let mut next = bits.iter();
    ternary
        .iter()
        .map(|&c| match c {
            0 => match next.next() {
                Some(1) => Ok(3),
                Some(_) => Ok(0),
                None => Err(Error::LengthMismatch { expected: ternary.iter().filter(|&&c| c == 0).count(), got: bits.len() }),
            },
            c => Ok(c),
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FourLetterOutcome {
    pub string: SyncString,
    pub eps: ExactFraction,
    /// 12 eps - 11, the weak binary parameter the construction calls for.
    pub eps_prime: ExactFraction,
    /// Parameters of the binary source actually used.
    pub binary_plan: WeakBinaryPlan,
    pub binary: SyncString,
    pub attempts: usize,
}

pub fn four_letter_eps_prime(eps: &ExactFraction) -> Result<ExactFraction, Error> {
    let lo = ExactFraction::new(11, 12)?;
    if !(eps.as_big() > lo.as_big() && eps.in_open_unit()) {
        return Err(Error::Parameter(format!("four-letter construction needs eps in (11/12, 1), got {eps}")));
    }
    Ok(&eps.mul_int(12) - &ExactFraction::from_integer(11))
}

/// Four-letter eps-sync string: a square-free ternary string with its letter-1
/// occurrences marked by a binary weak synchronization string. The binary
/// source comes from [`weak_binary`] with eps' = 1/2; candidates are gated by
/// the exact verifier and re-drawn with fresh sub-seeds on failure.
pub fn four_letter(n: usize, eps: &ExactFraction, seed: u64) -> Result<FourLetterOutcome, Error> {
    let eps_prime = four_letter_eps_prime(eps)?;
    let ternary = thue_square_free(n.max(1))?;
    let ternary = &ternary.symbols()[..n];
    let ones = ternary.iter().filter(|&&c| c == 0).count();
    let plan = WeakBinaryPlan::new(ExactFraction::new(1, 2)?)?;
    for attempt in 0..FOUR_LETTER_RETRIES {
        let binary = weak_binary(ones.max(1), &plan, mix_seed(seed, attempt as u64))?.string;
        let string = SyncString::new(mark_occurrences(ternary, binary.symbols())?, 4)?;
        if verify_sync(&string, eps)?.is_pass() && verify_square_free(&string).is_pass() {
            return Ok(FourLetterOutcome {
                string,
                eps: eps.clone(),
                eps_prime,
                binary_plan: plan,
                binary,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::RetryBudgetExhausted(FOUR_LETTER_RETRIES))
}

#[derive(Clone, Debug, Serialize)]
pub struct DegradationRow {
    pub m: usize,
    pub length: usize,
    pub max_lcs: usize,
    pub ratio: ExactFraction,
    pub pair: (Symbol, Symbol),
}

/// For m = 0..=max_m: the largest LCS between images of two distinct letters
/// under the m-th iterate, relative to r^m.
pub fn morphism_degradation_report(phi: &Morphism, max_m: usize) -> Result<Vec<DegradationRow>, Error> {
    let q = phi.alphabet_size();
    let top = phi.rank.checked_pow(max_m as u32).filter(|&l| l <= MORPHISM_LENGTH_LIMIT);
    if top.is_none() || q < 2 {
        return Err(Error::InstanceTooLarge { what: format!("rank {} iterated {max_m} times", phi.rank), limit: MORPHISM_LENGTH_LIMIT });
    }
    let mut words: Vec<SyncString> = (0..q).map(|c| SyncString::new(vec![c], q)).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for m in 0..=max_m {
        if m > 0 {
            words = words.iter().map(|w| apply_morphism(phi, w)).collect::<Result<_, _>>()?;
        }
        let length = words[0].len();
        let mut best = (0, (0, 1));
        for a in 0..q {
            for b in a + 1..q {
                let l = lcs_len(words[a as usize].symbols(), words[b as usize].symbols());
                if l > best.0 {
                    best = (l, (a, b));
                }
            }
        }
        rows.push(DegradationRow {
            m,
            length,
            max_lcs: best.0,
            ratio: ExactFraction::new(best.0 as i64, length as i64)?,
            pair: best.1,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn morphism_basics() {
        let phi = Morphism::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(apply_morphism(&phi, &SyncString::empty(2)).unwrap().is_empty());
        assert_eq!(apply_morphism(&phi, &SyncString::from_symbols(vec![1, 0])).unwrap().symbols(), &[1, 0, 0, 1]);
        let id = Morphism::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        let s = SyncString::from_letters("abcca");
        assert_eq!(apply_morphism(&id, &s).unwrap().symbols(), s.symbols());
        assert!(Morphism::new(vec![vec![0, 1], vec![1]]).is_err());
        assert!(apply_morphism(&phi, &SyncString::from_symbols(vec![2])).is_err());
    }

    #[test]
    fn leech_iterates_are_square_free() {
        let phi = Morphism::leech();
        let s = apply_morphism(&phi, &apply_morphism(&phi, &SyncString::from_letters("abcacb")).unwrap()).unwrap();
        assert!(verify_square_free(&s).is_pass());
    }

    #[test]
    fn square_free_prefixes() {
        assert_eq!(thue_square_free(3).unwrap().symbols(), &[0, 1, 2]);
        let long = thue_square_free(500).unwrap();
        let short = thue_square_free(499).unwrap();
        assert_eq!(&long.symbols()[..499], short.symbols());
        assert!(thue_square_free(0).unwrap().is_empty());
    }

    #[test]
    fn weak_binary_plan_and_blocks() {
        let plan = WeakBinaryPlan::new("1/2".parse().unwrap()).unwrap();
        assert_eq!((plan.inner_alphabet, plan.k), (128, 7));
        assert_eq!(plan.eps.to_string(), "251/252");
        assert_eq!(WeakBinaryPlan::with_alphabet("1/2".parse().unwrap(), 4).unwrap().k, 2);
        assert_eq!(binary_block(3, 2), vec![1, 1, 0, 0, 1, 1]);
        let bits = weak_binary_from_source(&[3, 0, 2], 2, 14).unwrap();
        assert_eq!(parse_weak_binary(bits.symbols(), 2).unwrap(), (vec![3, 0], 2));
        assert!(parse_weak_binary(&[1, 1, 0, 1, 1, 1], 2).is_err());
    }

    #[test]
    fn four_letter_rules() {
        assert_eq!(four_letter_eps_prime(&"35/36".parse().unwrap()).unwrap().to_string(), "2/3");
        assert!(four_letter_eps_prime(&"11/12".parse().unwrap()).is_err());
        assert!(four_letter_eps_prime(&"1".parse().unwrap()).is_err());
        // Letters 1,2,1,3 with bits 1,0 become 4,2,1,3.
        assert_eq!(mark_occurrences(&[0, 1, 0, 2], &[1, 0]).unwrap(), vec![3, 1, 0, 2]);
        assert!(mark_occurrences(&[0, 0], &[1]).is_err());
    }

    #[test]
    fn degradation_starts_at_zero() {
        let rows = morphism_degradation_report(&Morphism::leech(), 2).unwrap();
        assert_eq!(rows[0].ratio, ExactFraction::zero());
        assert_eq!(rows[1].length, 13);
        assert!(morphism_degradation_report(&Morphism::leech(), 9).is_err());
    }
}
