use std::time::Instant;

use jsamode::ingest::{default_window_ps, parse_stream, serialize, CoincidenceFinder, Fold, TagStream, TimeTagRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REP_NS: f64 = 12.5;
const RECORDS: usize = 3_000_000;
const MIN_RECORDS_PER_S: f64 = 1e6;

/// Three-fold events on a tenth of the pulses plus sparse singles.
fn stream() -> TagStream {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut records = Vec::with_capacity(RECORDS);
    let mut pulse = 0u64;
    while records.len() < RECORDS {
        pulse += rng.random_range(1..20);
        let base = pulse * 12_500;
        let mut recs = Vec::with_capacity(3);
        for c in 0..3u8 {
            if rng.random_bool(0.9) {
                recs.push(TimeTagRecord {
                    timestamp_ps: base + rng.random_range(1_000..5_000),
                    channel: c,
                });
            }
        }
        recs.sort_by_key(|r: &TimeTagRecord| r.timestamp_ps);
        records.extend(recs);
    }
    TagStream::new(REP_NS, records).unwrap()
}

#[test]
fn parse_and_coincidence_search_exceed_a_million_records_per_second() {
    let bytes = serialize(&stream());
    let start = Instant::now();
    let s = parse_stream(&bytes).unwrap();
    let mut f = CoincidenceFinder::new(REP_NS, default_window_ps(REP_NS), Fold::Three).unwrap();
    let mut out = Vec::new();
    for chunk in s.records.chunks(1 << 16) {
        f.push(chunk, &mut out).unwrap();
    }
    let stats = f.finish(&mut out);
    let rate = s.len() as f64 / start.elapsed().as_secs_f64();
    println!("{} records, {} three-folds, {rate:.3e} records/s", s.len(), stats.events);
    assert!(out.len() > RECORDS / 5);
    assert!(rate >= MIN_RECORDS_PER_S, "{rate:.3e} records/s");
}
