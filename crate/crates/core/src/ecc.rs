//! Block codes under the Hamming metric: greedy codes, Reed-Solomon codes,
//! concatenation, and exhaustive half-error decoding.

use std::sync::Arc;

use num::bigint::BigUint;
use num::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::string::Symbol;

/// Rational upper bound on 2e (2e = 5.436563...), rounded up at 5 decimals.
pub const TWO_E_UPPER: (i64, i64) = (543_657, 100_000);
/// Claimed distances are checked pairwise up to this many codewords.
pub const DISTANCE_CHECK_LIMIT: usize = 1 << 14;
/// Largest q^m the greedy construction will enumerate.
pub const GREEDY_SPACE_LIMIT: u128 = 1 << 24;
/// Largest message space exhaustive decoding will scan.
pub const DECODE_LIMIT: u128 = 1 << 22;

/// A code viewed through its encoder: messages are indices 0..message_count.
pub trait Code: Send + Sync {
    fn block_length(&self) -> usize;
    fn alphabet_size(&self) -> u32;
    fn min_distance(&self) -> usize;
    fn message_count(&self) -> u128;
    fn encode(&self, message: u128) -> Result<Vec<Symbol>, Error>;
}

pub fn hamming(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Explicit list of codewords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCode {
    block_length: usize,
    alphabet_size: u32,
    min_distance: usize,
    codewords: Vec<Vec<Symbol>>,
}

impl BlockCode {
    /// Validates shapes and, for small codes, the claimed distance.
    pub fn new(codewords: Vec<Vec<Symbol>>, block_length: usize, alphabet_size: u32, min_distance: usize) -> Result<Self, Error> {
        for w in &codewords {
            if w.len() != block_length {
                return Err(Error::LengthMismatch { expected: block_length, got: w.len() });
            }
            if let Some(&bad) = w.iter().find(|&&s| s >= alphabet_size) {
                return Err(Error::SymbolOutOfRange { symbol: bad, alphabet: alphabet_size });
            }
        }
        let code = Self { block_length, alphabet_size, min_distance, codewords };
        if code.codewords.len() <= DISTANCE_CHECK_LIMIT {
            if let Some(actual) = code.actual_min_distance() {
                if actual < min_distance {
                    return Err(Error::Parameter(format!("claimed distance {min_distance}, actual {actual}")));
                }
            }
        }
        Ok(code)
    }

    pub fn codewords(&self) -> &[Vec<Symbol>] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Exhaustive pairwise minimum; None for fewer than two codewords.
    pub fn actual_min_distance(&self) -> Option<usize> {
        let c = &self.codewords;
        (0..c.len()).flat_map(|i| (i + 1..c.len()).map(move |j| hamming(&c[i], &c[j]))).min()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("m={} q={} d={} count={}\n", self.block_length, self.alphabet_size, self.min_distance, self.len());
        for w in &self.codewords {
            let parts: Vec<String> = w.iter().map(|s| s.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Format("missing code header".into()))?;
        let field = |key: &str| -> Result<usize, Error> {
            header
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Format(format!("code header lacks {key}")))
        };
        let (m, q, d, count) = (field("m")?, field("q")?, field("d")?, field("count")?);
        let words = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|_| Error::Format(format!("bad symbol {t:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if words.len() != count {
            return Err(Error::Format(format!("header says {count} codewords, found {}", words.len())));
        }
        Self::new(words, m, q as u32, d)
    }
}

impl Code for BlockCode {
    fn block_length(&self) -> usize {
        self.block_length
    }
    fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }
    fn min_distance(&self) -> usize {
        self.min_distance
    }
    fn message_count(&self) -> u128 {
        self.codewords.len() as u128
    }
    fn encode(&self, message: u128) -> Result<Vec<Symbol>, Error> {
        usize::try_from(message)
            .ok()
            .and_then(|i| self.codewords.get(i))
            .cloned()
            .ok_or_else(|| Error::Parameter(format!("message {message} outside code of size {}", self.len())))
    }
}

/// Result of the greedy construction: the code plus how it fared against its target.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub code: BlockCode,
    pub target: Option<String>,
    pub achieved: usize,
}

/// Greedy code with q = ceil(2e/eps), distance ceil((1-eps) m), aiming for floor(2^(eps m)) words.
pub fn greedy_code(m: usize, eps: &ExactFraction) -> Result<GreedyOutcome, Error> {
    if m == 0 || !eps.is_positive() || eps > &ExactFraction::one() {
        return Err(Error::Parameter("need m >= 1 and 0 < eps <= 1".into()));
    }
    let two_e = ExactFraction::new(TWO_E_UPPER.0, TWO_E_UPPER.1)?;
    let q = (&two_e / eps).ceil_u64();
    let d = eps.one_minus().ceil_mul(m as u64).max(1) as usize;
    let target = eps.mul_int(m as u64).floor_pow2();
    let q = u32::try_from(q).map_err(|_| Error::Parameter("alphabet too large".into()))?;
    greedy_code_with(m, q, d, Some(target))
}

/// Lexicographic greedy code over q letters with distance d, stopping at `target` words.
pub fn greedy_code_with(m: usize, q: u32, d: usize, target: Option<BigUint>) -> Result<GreedyOutcome, Error> {
    let space = (q as u128).checked_pow(m as u32).filter(|&s| s <= GREEDY_SPACE_LIMIT);
    let Some(space) = space else {
        return Err(Error::InstanceTooLarge { what: format!("greedy search over {q}^{m} words"), limit: GREEDY_SPACE_LIMIT as usize });
    };
    let cap = target.as_ref().and_then(|t| t.to_usize()).unwrap_or(usize::MAX);
    let mut chosen: Vec<Vec<Symbol>> = Vec::new();
    let mut word = vec![0u32; m];
    for _ in 0..space {
        if chosen.len() >= cap {
            break;
        }
        if chosen.iter().all(|c| hamming(c, &word) >= d) {
            chosen.push(word.clone());
        }
        // Increment with the last coordinate fastest (lexicographic order).
        for pos in (0..m).rev() {
            word[pos] += 1;
            if word[pos] < q {
                break;
            }
            word[pos] = 0;
        }
    }
    let achieved = chosen.len();
    let code = BlockCode::new(chosen, m, q, d)?;
    Ok(GreedyOutcome { code, target: target.map(|t| t.to_string()), achieved })
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|p| p * p <= q).all(|p| !q.is_multiple_of(p))
}

pub fn next_prime(from: u64) -> u64 {
    (from.max(2)..).find(|&p| is_prime(p)).unwrap()
}

fn pow_mod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    r
}

/// Reed-Solomon code: messages are the values of a degree < k polynomial at
/// points 0..k-1; the codeword lists its values at 0..m-1 (systematic).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReedSolomon {
    m: usize,
    k: usize,
    q: u32,
    /// lagrange[x * k + j]: weight of message value j in the value at point x.
    lagrange: Vec<u64>,
}

pub fn rs_code(m: usize, k: usize, q: u32) -> Result<ReedSolomon, Error> {
    if !is_prime(q as u64) {
        return Err(Error::Parameter(format!("q = {q} is not prime")));
    }
    if (q as usize) < m {
        return Err(Error::Parameter(format!("q = {q} is below the block length {m}")));
    }
    if k < 1 || k > m {
        return Err(Error::Parameter(format!("need 1 <= k <= m, got k = {k}, m = {m}")));
    }
    let qq = q as u64;
    let mut lagrange = vec![0u64; m * k];
    for x in 0..m as u64 {
        for j in 0..k as u64 {
            let (mut num, mut den) = (1u64, 1u64);
            for l in (0..k as u64).filter(|&l| l != j) {
                num = num * ((x + qq - l) % qq) % qq;
                den = den * ((j + qq - l) % qq) % qq;
            }
            lagrange[x as usize * k + j as usize] = num * pow_mod(den, qq - 2, qq) % qq;
        }
    }
    Ok(ReedSolomon { m, k, q, lagrange })
}

impl ReedSolomon {
    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn encode_symbols(&self, message: &[Symbol]) -> Result<Vec<Symbol>, Error> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: message.len() });
        }
        if let Some(&bad) = message.iter().find(|&&s| s >= self.q) {
            return Err(Error::SymbolOutOfRange { symbol: bad, alphabet: self.q });
        }
        let q = self.q as u64;
        Ok((0..self.m)
            .map(|x| {
                let row = &self.lagrange[x * self.k..(x + 1) * self.k];
                (row.iter().zip(message).map(|(&w, &v)| w * v as u64 % q).sum::<u64>() % q) as Symbol
            })
            .collect())
    }

    /// Message index digits, least significant first.
    pub fn message_symbols(&self, mut message: u128) -> Vec<Symbol> {
        (0..self.k)
            .map(|_| {
                let d = (message % self.q as u128) as Symbol;
                message /= self.q as u128;
                d
            })
            .collect()
    }
}

impl Code for ReedSolomon {
    fn block_length(&self) -> usize {
        self.m
    }
    fn alphabet_size(&self) -> u32 {
        self.q
    }
    fn min_distance(&self) -> usize {
        self.m - self.k + 1
    }
    fn message_count(&self) -> u128 {
        (self.q as u128).checked_pow(self.k as u32).unwrap_or(u128::MAX)
    }
    fn encode(&self, message: u128) -> Result<Vec<Symbol>, Error> {
        if message >= self.message_count() {
            return Err(Error::Parameter(format!("message {message} out of range")));
        }
        self.encode_symbols(&self.message_symbols(message))
    }
}

/// Outer code whose symbols are replaced by inner codewords.
#[derive(Clone)]
pub struct Concatenated {
    outer: Arc<dyn Code>,
    inner: Arc<dyn Code>,
}

pub fn concat_code(outer: Arc<dyn Code>, inner: Arc<dyn Code>) -> Result<Concatenated, Error> {
    if inner.message_count() < outer.alphabet_size() as u128 {
        return Err(Error::Parameter(format!(
            "inner code has {} codewords but the outer alphabet has {} symbols",
            inner.message_count(),
            outer.alphabet_size()
        )));
    }
    Ok(Concatenated { outer, inner })
}

impl Code for Concatenated {
    fn block_length(&self) -> usize {
        self.outer.block_length() * self.inner.block_length()
    }
    fn alphabet_size(&self) -> u32 {
        self.inner.alphabet_size()
    }
    /// Designed distance d_out * d_in.
    fn min_distance(&self) -> usize {
        self.outer.min_distance() * self.inner.min_distance()
    }
    fn message_count(&self) -> u128 {
        self.outer.message_count()
    }
    fn encode(&self, message: u128) -> Result<Vec<Symbol>, Error> {
        let mut out = Vec::with_capacity(self.block_length());
        for s in self.outer.encode(message)? {
            out.extend(self.inner.encode(s as u128)?);
        }
        Ok(out)
    }
}

/// Lists every codeword of a small code.
pub fn materialize(code: &dyn Code) -> Result<BlockCode, Error> {
    let count = code.message_count();
    if count > DECODE_LIMIT {
        return Err(Error::InstanceTooLarge { what: format!("{count} codewords"), limit: DECODE_LIMIT as usize });
    }
    let words = (0..count).map(|i| code.encode(i)).collect::<Result<Vec<_>, _>>()?;
    BlockCode::new(words, code.block_length(), code.alphabet_size(), code.min_distance())
}

/// Nearest-codeword decoding with erasures (`None`): the score of a codeword
/// is 2 * (substitutions on non-erased positions) + erasures. Succeeds only
/// for a unique minimum below the code distance.
pub fn decode_half_errors(code: &dyn Code, received: &[Option<Symbol>]) -> Result<u128, Error> {
    if received.len() != code.block_length() {
        return Err(Error::LengthMismatch { expected: code.block_length(), got: received.len() });
    }
    let count = code.message_count();
    if count > DECODE_LIMIT {
        return Err(Error::InstanceTooLarge { what: format!("decoding over {count} messages"), limit: DECODE_LIMIT as usize });
    }
    let erasures = received.iter().filter(|r| r.is_none()).count();
    let mut best: Option<(usize, u128)> = None;
    let mut tied = false;
    for msg in 0..count {
        let word = code.encode(msg)?;
        let subs = word.iter().zip(received).filter(|(w, r)| matches!(r, Some(x) if x != *w)).count();
        let score = 2 * subs + erasures;
        match best {
            Some((b, _)) if score > b => {}
            Some((b, _)) if score == b => tied = true,
            _ => {
                best = Some((score, msg));
                tied = false;
            }
        }
    }
    match best {
        Some((score, msg)) if !tied && score < code.min_distance() => Ok(msg),
        Some((score, _)) if tied => Err(Error::DecodeFailure(format!("nearest codewords tie at score {score}"))),
        Some((score, _)) => Err(Error::DecodeFailure(format!("nearest score {score} not below distance {}", code.min_distance()))),
        None => Err(Error::DecodeFailure("empty code".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep3() -> BlockCode {
        BlockCode::new(vec![vec![0, 0, 0], vec![1, 1, 1]], 3, 2, 3).unwrap()
    }

    #[test]
    fn greedy_forced_small() {
        let out = greedy_code_with(3, 3, 3, None).unwrap();
        assert_eq!(out.code.codewords(), &[vec![0, 0, 0], vec![1, 1, 1], vec![2, 2, 2]]);
        let singles = greedy_code_with(1, 5, 1, None).unwrap();
        assert_eq!(singles.achieved, 5);
    }

    #[test]
    fn greedy_parameters() {
        let out = greedy_code(4, &"1/2".parse().unwrap()).unwrap();
        // q = ceil(5.43657 * 2) = 11, d = 2, target floor(2^2) = 4.
        assert_eq!(out.code.alphabet_size(), 11);
        assert_eq!(out.code.min_distance(), 2);
        assert_eq!(out.target.as_deref(), Some("4"));
        assert_eq!(out.achieved, 4);
    }

    #[test]
    fn rs_examples() {
        let rs = rs_code(4, 2, 5).unwrap();
        assert_eq!(rs.min_distance(), 3);
        assert_eq!(rs.encode_symbols(&[1, 1]).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(rs.encode_symbols(&[0, 1]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(materialize(&rs).unwrap().actual_min_distance(), Some(3));
        assert_eq!(rs_code(4, 4, 5).unwrap().min_distance(), 1);
        assert!(rs_code(4, 2, 6).is_err());
        assert!(rs_code(7, 2, 5).is_err());
    }

    #[test]
    fn decode_examples() {
        let c = rep3();
        assert_eq!(decode_half_errors(&c, &[Some(1), Some(1), Some(1)]).unwrap(), 1);
        assert_eq!(decode_half_errors(&c, &[Some(0), None, Some(0)]).unwrap(), 0);
        // 01? scores 2*1+1 = 3 for both codewords: a tie, hence failure.
        assert!(matches!(decode_half_errors(&c, &[Some(0), Some(1), None]), Err(Error::DecodeFailure(_))));
    }

    #[test]
    fn concatenation_distance() {
        let outer: Arc<dyn Code> = Arc::new(rs_code(3, 1, 3).unwrap());
        let inner: Arc<dyn Code> = Arc::new(BlockCode::new(vec![vec![0, 0], vec![1, 1], vec![0, 1]], 2, 2, 1).unwrap());
        let cat = concat_code(outer.clone(), inner).unwrap();
        assert_eq!(cat.block_length(), 6);
        let even: Arc<dyn Code> = Arc::new(BlockCode::new(vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1]], 3, 2, 2).unwrap());
        let cat = concat_code(outer.clone(), even).unwrap();
        assert_eq!(cat.min_distance(), 6);
        assert!(materialize(&cat).unwrap().actual_min_distance().unwrap() >= 6);
        let identity: Arc<dyn Code> = Arc::new(BlockCode::new(vec![vec![0], vec![1], vec![2]], 1, 3, 1).unwrap());
        let same = concat_code(outer.clone(), identity).unwrap();
        assert_eq!(materialize(&same).unwrap(), materialize(outer.as_ref()).unwrap());
        let small: Arc<dyn Code> = Arc::new(BlockCode::new(vec![vec![0], vec![1]], 1, 2, 1).unwrap());
        assert!(concat_code(outer, small).is_err());
    }

    #[test]
    fn code_text_round_trip() {
        let c = materialize(&rs_code(3, 2, 3).unwrap()).unwrap();
        assert_eq!(BlockCode::parse_text(&c.to_text()).unwrap(), c);
    }
}
