use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use syncstr::codec::{
    codec_demo, decode, deletion_budget, encode, half_errors, place_payload, recover_indices, transmit, ChannelTrace, DemoConfig,
    Insertion,
};
use syncstr::ecc::{rs_code, Code};
use syncstr::random::{construct_lll, SamplerParams};
use syncstr::{ExactFraction, SyncString};

fn frac(s: &str) -> ExactFraction {
    s.parse().unwrap()
}

fn distinct(n: u32) -> SyncString {
    SyncString::from_symbols((0..n).collect())
}

#[test]
fn every_message_survives_a_clean_channel() {
    let code = rs_code(7, 2, 7).unwrap();
    let s = distinct(7);
    for msg in 0..code.message_count() {
        let word = encode(msg, &code, &s).unwrap();
        let received = transmit(&word, &ChannelTrace::default()).unwrap();
        assert_eq!(decode(&received, &code, &s).unwrap(), msg);
    }
}

#[test]
fn budget_is_the_largest_safe_deletion_count() {
    assert_eq!(deletion_budget(&frac("3/4"), 59), 8);
    assert_eq!(deletion_budget(&frac("1/2"), 4), 1);
    assert_eq!(deletion_budget(&frac("1/2"), 3), 0);
    for d in 1..40 {
        let b = deletion_budget(&frac("1/3"), d);
        assert!(b * 2 < d);
        assert!((b + 1) * 2 >= d || b + 1 == d);
    }
}

#[test]
fn small_demo_decodes_every_trace() {
    let cfg = DemoConfig { n: 30, eps: frac("3/4"), delta: frac("1/10"), traces: 40, seed: 3, dimension: None };
    let report = codec_demo(&cfg).unwrap();
    assert_eq!(report.successes, report.traces);
    assert!(report.max_half_errors < report.distance);
    assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&codec_demo(&cfg).unwrap()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recovered_indices_are_strictly_increasing(
        n in 2usize..40,
        dels in prop::collection::btree_set(1usize..40, 0..10),
        ins in prop::collection::vec((1usize..41, 0u32..5, 0u32..64), 0..6),
        seed in any::<u64>(),
    ) {
        let s = construct_lll(n, &SamplerParams::new(frac("1/2"), seed).unwrap(), 50 * n).unwrap().string;
        let word = syncstr::codec::IndexedWord { pairs: s.symbols().iter().map(|&c| (0, c)).collect() };
        let trace = ChannelTrace {
            deletions: dels.into_iter().filter(|&p| p <= n).collect(),
            insertions: ins.into_iter().map(|(b, p, i)| Insertion { before: b.min(n + 1), pair: (p, i % s.alphabet_size()) }).collect(),
        };
        let received = transmit(&word, &trace).unwrap();
        let got: Vec<usize> = recover_indices(&received, &s).into_iter().flatten().collect();
        prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn distinct_indices_make_deletions_pure_erasures(
        msg in 0u128..(11 * 11),
        dels in prop::collection::btree_set(1usize..=10, 0..10),
    ) {
        let code = rs_code(10, 2, 11).unwrap();
        let s = distinct(10);
        let word = encode(msg, &code, &s).unwrap();
        let trace = ChannelTrace { deletions: dels.clone(), insertions: Vec::new() };
        let placed = place_payload(&transmit(&word, &trace).unwrap(), &s);
        let sent = code.encode(msg).unwrap();
        prop_assert_eq!(half_errors(&placed, &sent), dels.len());
        for (i, p) in placed.iter().enumerate() {
            prop_assert_eq!(p.is_none(), dels.contains(&(i + 1)));
        }
    }

    #[test]
    fn random_deletions_are_distinct_and_in_range(n in 1usize..200, count in 0usize..250, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ChannelTrace::random_deletions(n, count, &mut rng);
        prop_assert_eq!(t.deletions.len(), count.min(n));
        prop_assert!(t.deletions.iter().all(|&p| (1..=n).contains(&p)));
    }
}
