//! Random access into an infinite synchronization string built from blocks
//! of lengths k, k^2, k^3, ... over two alternating alphabet banks.

use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;
use serde::Serialize;

use crate::error::Error;
use crate::fraction::ExactFraction;
use crate::random::{construct_lll_gated, mix_seed, GatePolicy, SamplerParams};
use crate::string::{Symbol, SyncString};

/// Largest block index served; k^t must stay addressable in memory.
pub const MAX_BLOCK_LEN: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct StreamConfig {
    pub eps: ExactFraction,
    pub k: usize,
    /// Size of one alphabet bank; the stream alphabet is 2q.
    pub q: u32,
    pub seed: u64,
    pub block_params: SamplerParams,
    pub gate: GatePolicy,
    /// Redraw budget per block, as a multiple of the block length.
    pub rounds_per_symbol: usize,
    pub cache_blocks: usize,
}

impl StreamConfig {
    pub fn new(eps: ExactFraction, seed: u64) -> Result<Self, Error> {
        if !eps.in_open_unit() {
            return Err(Error::Parameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        let k = eps.recip().mul_int(4).ceil_u64() as usize;
        let half = &eps * &ExactFraction::new(1, 2)?;
        let block_params = SamplerParams::new(half, 0)?;
        Ok(StreamConfig {
            q: block_params.alphabet_size(),
            eps,
            k,
            seed,
            block_params,
            gate: GatePolicy::default(),
            rounds_per_symbol: 50,
            cache_blocks: 8,
        })
    }

    pub fn alphabet_size(&self) -> u32 {
        2 * self.q
    }

    pub fn block_seed(&self, t: usize) -> u64 {
        mix_seed(self.seed, t as u64)
    }

    pub fn bank(&self, t: usize) -> u32 {
        (t % 2) as u32
    }

    /// l_t = k + k^2 + ... + k^t, saturating.
    pub fn block_end(&self, t: usize) -> u128 {
        let k = self.k as u128;
        let mut total = 0u128;
        let mut pow = 1u128;
        for _ in 0..t {
            pow = pow.saturating_mul(k);
            total = total.saturating_add(pow);
        }
        total
    }

    pub fn block_len(&self, t: usize) -> u128 {
        (self.k as u128).saturating_pow(t as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockLocator {
    pub block: usize,
    /// 1-based position inside the block.
    pub offset: usize,
    /// 1-based stream position of the block's first symbol.
    pub start: u128,
}

pub fn locate(pos: u128, cfg: &StreamConfig) -> Result<BlockLocator, Error> {
    if pos == 0 {
        return Err(Error::Parameter("positions are 1-based".into()));
    }
    let mut t = 1;
    while cfg.block_end(t) < pos {
        t += 1;
    }
    let prev = cfg.block_end(t - 1);
    Ok(BlockLocator { block: t, offset: (pos - prev) as usize, start: prev + 1 })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockInfo {
    pub block: usize,
    pub length: usize,
    pub seed: u64,
    pub bank: u32,
    pub source: String,
    pub gate: String,
    pub rounds: usize,
}

struct Block {
    symbols: Vec<Symbol>,
    info: BlockInfo,
}

pub struct Stream {
    cfg: StreamConfig,
    cache: Mutex<LruCache<usize, Arc<Block>>>,
}

impl Stream {
    pub fn new(cfg: StreamConfig) -> Self {
        let cap = NonZeroUsize::new(cfg.cache_blocks.max(1)).unwrap();
        Stream { cfg, cache: Mutex::new(LruCache::new(cap)) }
    }

    pub fn config(&self) -> &StreamConfig {
        &self.cfg
    }

    /// The standalone block string S_{k^t} (own alphabet, before bank offset).
    pub fn raw_block(&self, t: usize) -> Result<SyncString, Error> {
        let b = self.block(t)?;
        SyncString::new(b.symbols.iter().map(|&s| s - self.cfg.bank(t) * self.cfg.q).collect(), self.cfg.q)
    }

    pub fn block_info(&self, t: usize) -> Result<BlockInfo, Error> {
        Ok(self.block(t)?.info.clone())
    }

    fn block(&self, t: usize) -> Result<Arc<Block>, Error> {
        if let Some(b) = self.cache.lock().unwrap().get(&t) {
            return Ok(b.clone());
        }
        let built = Arc::new(self.build_block(t)?);
        self.cache.lock().unwrap().put(t, built.clone());
        Ok(built)
    }

    fn build_block(&self, t: usize) -> Result<Block, Error> {
        let len = self.cfg.block_len(t);
        if t == 0 || len > MAX_BLOCK_LEN as u128 {
            return Err(Error::InstanceTooLarge { what: format!("stream block {t}"), limit: MAX_BLOCK_LEN });
        }
        let n = len as usize;
        let seed = self.cfg.block_seed(t);
        let params = self.cfg.block_params.with_seed(seed);
        let out = construct_lll_gated(n, &params, self.cfg.rounds_per_symbol * n, &self.cfg.gate)?;
        let bank = self.cfg.bank(t);
        let symbols = out.string.symbols().iter().map(|&s| s + bank * self.cfg.q).collect();
        let info =
            BlockInfo { block: t, length: n, seed, bank, source: "lll".into(), gate: out.gate, rounds: out.rounds };
        Ok(Block { symbols, info })
    }

    pub fn symbol_at(&self, pos: u128) -> Result<Symbol, Error> {
        let at = locate(pos, &self.cfg)?;
        Ok(self.block(at.block)?.symbols[at.offset - 1])
    }

    /// Symbols pos, pos+1, ..., pos+len-1.
    pub fn window(&self, pos: u128, len: usize) -> Result<SyncString, Error> {
        let mut out = Vec::with_capacity(len);
        if len > 0 {
            let mut at = locate(pos, &self.cfg)?;
            while out.len() < len {
                let block = self.block(at.block)?;
                let take = (len - out.len()).min(block.symbols.len() - at.offset + 1);
                out.extend_from_slice(&block.symbols[at.offset - 1..at.offset - 1 + take]);
                at = BlockLocator { block: at.block + 1, offset: 1, start: at.start + block.symbols.len() as u128 };
            }
        }
        SyncString::new(out, self.cfg.alphabet_size())
    }

    pub fn prefix(&self, n: usize) -> Result<SyncString, Error> {
        self.window(1, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> StreamConfig {
        StreamConfig::new("1/2".parse().unwrap(), 7).unwrap()
    }

    #[test]
    fn config_defaults() {
        let c = cfg();
        assert_eq!((c.k, c.q, c.alphabet_size()), (8, 512, 1024));
        assert_eq!(StreamConfig::new("1/3".parse().unwrap(), 0).unwrap().k, 12);
        assert!(StreamConfig::new("1".parse().unwrap(), 0).is_err());
    }

    #[test]
    fn locate_examples() {
        let c = cfg();
        let at = |p| {
            let l = locate(p, &c).unwrap();
            (l.block, l.offset)
        };
        assert_eq!(at(100), (3, 28));
        assert_eq!(at(8), (1, 8));
        assert_eq!(at(73), (3, 1));
        assert_eq!(at(1), (1, 1));
        assert_eq!(locate(100, &c).unwrap().start, 73);
        assert!(locate(0, &c).is_err());
    }

    #[test]
    fn windows_compose_and_switch_banks() {
        let s = Stream::new(cfg());
        assert!(s.window(5, 0).unwrap().is_empty());
        let w = s.window(3, 20).unwrap();
        let head = s.window(3, 1).unwrap();
        let tail = s.window(4, 19).unwrap();
        assert_eq!(w.symbols()[0], head.symbols()[0]);
        assert_eq!(&w.symbols()[1..], tail.symbols());
        assert_eq!(s.window(1, 8).unwrap().symbols(), s.raw_block(1).unwrap().symbols().iter().map(|x| x + 512).collect::<Vec<_>>().as_slice());
        let across = s.window(7, 4).unwrap();
        assert!(across.symbols()[..2].iter().all(|&x| x >= 512));
        assert!(across.symbols()[2..].iter().all(|&x| x < 512));
    }
}
