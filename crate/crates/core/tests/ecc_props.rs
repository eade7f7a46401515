use std::sync::Arc;

use proptest::prelude::*;
use syncstr::ecc::{concat_code, decode_half_errors, greedy_code_with, hamming, materialize, rs_code, BlockCode, Code};

fn pairwise_min(code: &dyn Code) -> usize {
    let words = materialize(code).unwrap();
    let w = words.codewords();
    let mut best = usize::MAX;
    for a in 0..w.len() {
        for b in a + 1..w.len() {
            best = best.min(hamming(&w[a], &w[b]));
        }
    }
    best
}

#[test]
fn reed_solomon_meets_the_singleton_bound_exactly() {
    for (m, k, q) in [(4, 1, 5), (4, 2, 5), (5, 3, 5), (6, 2, 7), (7, 3, 7), (10, 2, 11)] {
        let code = rs_code(m, k, q).unwrap();
        assert_eq!(pairwise_min(&code), m - k + 1, "RS[{m},{k}] over {q}");
    }
}

#[test]
fn reed_solomon_is_systematic_on_the_first_points() {
    let code = rs_code(8, 3, 11).unwrap();
    for msg in 0..code.message_count() {
        let word = code.encode(msg).unwrap();
        assert_eq!(&word[..3], &code.message_symbols(msg)[..]);
    }
}

#[test]
fn rejects_bad_parameters() {
    assert!(rs_code(5, 2, 6).is_err());
    assert!(rs_code(8, 2, 7).is_err());
    assert!(rs_code(5, 0, 7).is_err());
    assert!(rs_code(5, 6, 7).is_err());
}

#[test]
fn concatenation_multiplies_distances() {
    let outer: Arc<dyn Code> = Arc::new(rs_code(4, 2, 5).unwrap());
    let inner: Arc<dyn Code> = Arc::new(rs_code(5, 1, 5).unwrap());
    let code = concat_code(outer, inner).unwrap();
    assert_eq!(code.block_length(), 20);
    assert!(pairwise_min(&code) >= code.min_distance());
    assert_eq!(code.min_distance(), 15);

    let tiny: Arc<dyn Code> = Arc::new(rs_code(2, 1, 3).unwrap());
    assert!(concat_code(Arc::new(rs_code(4, 2, 5).unwrap()), tiny).is_err());
}

#[test]
fn greedy_codes_honor_their_distance() {
    for (m, q, d) in [(5, 2, 3), (6, 3, 4), (4, 4, 3)] {
        let out = greedy_code_with(m, q, d, None).unwrap();
        assert!(out.code.len() >= 2);
        assert!(out.code.actual_min_distance().unwrap() >= d);
    }
}

proptest! {
    #[test]
    fn decoding_corrects_within_half_the_distance(
        msg in 0u128..121,
        noise in prop::collection::vec((0usize..9, 0u32..11, any::<bool>()), 0..6),
    ) {
        let code = rs_code(9, 2, 11).unwrap();
        let sent = code.encode(msg).unwrap();
        let mut recv: Vec<Option<u32>> = sent.iter().copied().map(Some).collect();
        for (pos, val, erase) in noise {
            recv[pos] = if erase { None } else { Some(val) };
        }
        let cost: usize = recv.iter().zip(&sent).map(|(r, &c)| match r {
            None => 1,
            Some(x) if *x == c => 0,
            Some(_) => 2,
        }).sum();
        if cost < code.min_distance() {
            prop_assert_eq!(decode_half_errors(&code, &recv).unwrap(), msg);
        }
    }

    #[test]
    fn block_codes_round_trip_through_text(
        words in prop::collection::btree_set(prop::collection::vec(0u32..4, 5), 1..8),
    ) {
        let words: Vec<_> = words.into_iter().collect();
        let d = if words.len() > 1 {
            (0..words.len()).flat_map(|a| (a + 1..words.len()).map(move |b| (a, b))).map(|(a, b)| hamming(&words[a], &words[b])).min().unwrap()
        } else {
            5
        };
        let code = BlockCode::new(words, 5, 4, d).unwrap();
        let back = BlockCode::parse_text(&code.to_text()).unwrap();
        prop_assert_eq!(back.codewords(), code.codewords());
        prop_assert_eq!(back.min_distance(), code.min_distance());
    }
}
