use super::*;
use crate::{
    analysis::chi_square,
    forward::{apply_detector_blur_3d, synthesize_tag_stream, DetectorModel, TagRates},
    grid::{ghz_to_angular, wavelength_to_angular},
    Error, FrequencyGrid, HeraldedInterferogram,
};
use ndarray::Array3;
use proptest::prelude::*;

const REP_NS: f64 = 12.5;
const REP_PS: u64 = 12_500;

fn rec(t: u64, c: u8) -> TimeTagRecord {
    TimeTagRecord {
        timestamp_ps: t,
        channel: c,
    }
}

fn stream(records: Vec<TimeTagRecord>) -> TagStream {
    TagStream::new(REP_NS, records).unwrap()
}

fn det() -> DetectorModel {
    DetectorModel {
        dispersion_ps_per_nm: -997.0,
        jitter_fwhm_ps: 40.0,
        efficiency: 1.0,
        rep_period_ns: REP_NS,
    }
}

fn grid(n: usize, nm: f64) -> FrequencyGrid {
    FrequencyGrid::from_spacing(wavelength_to_angular(nm), ghz_to_angular(10.0), n).unwrap()
}

#[test]
fn header_layout() {
    let b = serialize(&stream(vec![rec(7, 1)]));
    assert_eq!(&b[..4], b"TTG1");
    assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 1);
    assert_eq!(f64::from_le_bytes(b[16..24].try_into().unwrap()), REP_NS);
    assert_eq!(u64::from_le_bytes(b[24..32].try_into().unwrap()), 7);
    assert_eq!(b[32], 1);
    assert!(b[33..40].iter().all(|&x| x == 0));
    assert_eq!(b.len(), TTG1_HEADER_LEN + TTG1_RECORD_LEN);
}

#[test]
fn empty_stream_parses() {
    let s = parse_stream(&serialize(&stream(vec![]))).unwrap();
    assert!(s.is_empty());
    assert_eq!(s.rep_period_ns, REP_NS);
}

#[test]
fn one_period_lands_on_pulse_one() {
    let s = parse_stream(&serialize(&stream(vec![rec(12_500, CH_HERALD)]))).unwrap();
    let f = CoincidenceFinder::new(s.rep_period_ns, default_window_ps(REP_NS), Fold::Three).unwrap();
    assert_eq!(f.assign(s.records[0].timestamp_ps), (1, 0.0));
    assert_eq!(f.assign(18_749), (1, 6249.0));
    assert_eq!(f.assign(18_750), (2, -6250.0));
}

#[test]
fn corrupted_magic_reports_byte_zero() {
    let mut b = serialize(&stream(vec![rec(1, 0)]));
    b[0] = b'X';
    match parse_stream(&b) {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_stream(b"TT"), Err(Error::Format { offset: 0, .. })));
}

#[test]
fn header_and_record_corruption() {
    let good = serialize(&stream(vec![rec(1, 0), rec(2, 1)]));
    let mut b = good.clone();
    b[4] = 2;
    assert!(matches!(parse_stream(&b), Err(Error::Format { offset: 4, .. })));
    let mut b = good.clone();
    b[16..24].copy_from_slice(&(-1.0f64).to_le_bytes());
    assert!(matches!(parse_stream(&b), Err(Error::Format { offset: 16, .. })));
    let mut b = good.clone();
    b[24 + 8] = 3;
    assert!(matches!(parse_stream(&b), Err(Error::Format { offset: 32, .. })));
    let mut b = good.clone();
    b[24 + 9] = 1;
    assert!(matches!(parse_stream(&b), Err(Error::Format { offset: 33, .. })));
    let mut b = good.clone();
    b[24 + 16 + 15] = 1;
    assert!(matches!(parse_stream(&b), Err(Error::Format { offset: 55, .. })));
    // truncated second record
    assert!(matches!(parse_stream(&good[..good.len() - 3]), Err(Error::Format { offset: 40..=56, .. })));
    // truncated header
    assert!(matches!(parse_stream(&good[..10]), Err(Error::Format { .. })));
    let mut b = good.clone();
    b.push(0);
    assert!(matches!(parse_stream(&b), Err(Error::Format { offset: 56, .. })));
}

#[test]
fn mild_disorder_is_repaired_and_gross_disorder_fails() {
    let mut recs: Vec<TimeTagRecord> = (0..3000).map(|k| rec(10 * k, (k % 3) as u8)).collect();
    recs.swap(10, 12);
    recs.swap(500, 900);
    let bytes = encode_raw(&recs);
    let s = parse_stream(&bytes).unwrap();
    assert!(s.records.windows(2).all(|w| w[0].timestamp_ps <= w[1].timestamp_ps));
    assert_eq!(s.len(), 3000);

    let mut recs: Vec<TimeTagRecord> = (0..3000).map(|k| rec(10 * k, 0)).collect();
    recs[2500] = rec(5, 0);
    match parse_stream(&encode_raw(&recs)) {
        Err(Error::DecreasingTimestamp { offset, current, .. }) => {
            assert_eq!(offset, (TTG1_HEADER_LEN + 2500 * TTG1_RECORD_LEN) as u64);
            assert_eq!(current, 5);
        }
        other => panic!("{other:?}"),
    }
}

/// Writes records in the given order, bypassing the sortedness check.
fn encode_raw(recs: &[TimeTagRecord]) -> Vec<u8> {
    let mut b = serialize(&stream(vec![]));
    b[8..16].copy_from_slice(&(recs.len() as u64).to_le_bytes());
    for r in recs {
        b.extend_from_slice(&r.timestamp_ps.to_le_bytes());
        b.push(r.channel);
        b.extend_from_slice(&[0; 7]);
    }
    b
}

#[test]
fn streaming_reader_matches_whole_parse() {
    let recs: Vec<TimeTagRecord> = (0..5000).map(|k| rec(k * 37, (k % 3) as u8)).collect();
    let s = stream(recs);
    let mut buf = Vec::new();
    write_stream(&mut buf, &s).unwrap();
    assert_eq!(buf, serialize(&s));
    let r = TagReader::new(std::io::Cursor::new(&buf)).unwrap();
    assert_eq!(r.header().record_count, 5000);
    let got: Vec<TimeTagRecord> = r.collect::<crate::Result<_>>().unwrap();
    assert_eq!(got, s.records);
}

#[test]
fn stream_validation() {
    assert!(TagStream::new(REP_NS, vec![rec(5, 0), rec(4, 1)]).is_err());
    assert!(TagStream::new(REP_NS, vec![rec(5, 3)]).is_err());
    assert!(TagStream::new(0.0, vec![]).is_err());
}

#[test]
fn three_tags_one_pulse_make_one_threefold() {
    let s = stream(vec![rec(25_000 - 40, 0), rec(25_000 + 3, 2), rec(25_000 + 100, 1)]);
    let (ev, stats) = find_coincidences(&s, default_window_ps(REP_NS), Fold::Three).unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].pulse_index, 2);
    assert_eq!(ev[0].fold, 3);
    assert_eq!(ev[0].offsets_ps, [Some(-40.0), Some(100.0), Some(3.0)]);
    assert_eq!(stats.events, 1);
    assert_eq!(stats.per_channel, [1, 1, 1]);
}

#[test]
fn adjacent_pulses_do_not_coincide() {
    let s = stream(vec![rec(12_500, 0), rec(25_000, 1), rec(37_500, 2)]);
    let (ev, stats) = find_coincidences(&s, default_window_ps(REP_NS), Fold::Three).unwrap();
    assert!(ev.is_empty());
    assert_eq!(stats.incomplete_pulses, 3);
    let (ev, _) = find_coincidences(&s, default_window_ps(REP_NS), Fold::Two).unwrap();
    assert!(ev.is_empty());
}

#[test]
fn twofold_and_multihit() {
    let s = stream(vec![
        rec(12_500, 0),
        rec(12_510, 1),
        rec(25_000, 0),
        rec(25_001, 0),
        rec(25_002, 1),
        rec(37_500 + 6_200, 0),
    ]);
    let (ev, stats) = find_coincidences(&s, 1_000.0, Fold::Two).unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].offsets_ps, [Some(0.0), Some(10.0), None]);
    assert_eq!(stats.multi_hit_pulses, 1);
    assert_eq!(stats.outside_window, 1);
}

#[test]
fn window_beyond_half_period_is_ambiguous() {
    assert!(matches!(
        CoincidenceFinder::new(REP_NS, 6_300.0, Fold::Three),
        Err(Error::CoincidenceWindow { .. })
    ));
    assert!(CoincidenceFinder::new(REP_NS, 6_250.0, Fold::Three).is_ok());
    assert!(Fold::from_order(4).is_err());
    assert_eq!(Fold::from_order(2).unwrap(), Fold::Two);
}

#[test]
fn decreasing_input_to_finder_is_an_error() {
    let mut f = CoincidenceFinder::new(REP_NS, 1000.0, Fold::Two).unwrap();
    let mut out = Vec::new();
    f.push(&[rec(100, 0)], &mut out).unwrap();
    assert!(matches!(
        f.push(&[rec(50, 1)], &mut out),
        Err(Error::DecreasingTimestamp { .. })
    ));
}

#[test]
fn zero_offset_maps_to_zero_detuning() {
    let ev = CoincidenceEvent {
        pulse_index: 0,
        offsets_ps: [Some(0.0), None, Some(0.0)],
        fold: 2,
    };
    let c = ChannelCenters::from_wavelengths_nm([1550.0, 1550.0, 1560.0]);
    let w = offsets_to_frequencies(&ev, &det(), &c).unwrap();
    assert_eq!(w, [Some(0.0), None, Some(0.0)]);
}

#[test]
fn one_bin_of_dispersion_is_five_ghz() {
    // −39.88 ps at −997 ps/nm is +0.040 nm, about −5 GHz at 1550 nm
    let ev = CoincidenceEvent {
        pulse_index: 0,
        offsets_ps: [Some(-39.88), None, None],
        fold: 2,
    };
    let c = ChannelCenters::from_wavelengths_nm([1550.0; 3]);
    let w = offsets_to_frequencies(&ev, &det(), &c).unwrap()[0].unwrap();
    let ghz = w / ghz_to_angular(1.0);
    assert!((ghz + 4.99).abs() < 0.02, "{ghz}");

    let mut d2 = det();
    d2.dispersion_ps_per_nm *= 2.0;
    let w2 = offsets_to_frequencies(&ev, &d2, &c).unwrap()[0].unwrap();
    assert!((w2 / w - 0.5).abs() < 1e-4, "{}", w2 / w);
}

/// Tag time for a photon at bin `k` of `g` in pulse `p`.
fn tag(p: u64, g: &FrequencyGrid, k: usize, ch: u8) -> TimeTagRecord {
    let off = det().arrival_offset_ps(g.detuning(k), g.center());
    rec((p as f64 * REP_PS as f64 + off).round() as u64, ch)
}

fn sorted(mut v: Vec<TimeTagRecord>) -> TagStream {
    v.sort();
    stream(v)
}

#[test]
fn bin_centres_histogram_to_identity() {
    let (g1, g2, gh) = (grid(8, 1550.0), grid(8, 1550.0), grid(8, 1560.0));
    let mut recs = Vec::new();
    for i in 0..8 {
        let p = 10 + i as u64;
        recs.push(tag(p, &g1, i, CH_OUT_C));
        recs.push(tag(p, &g2, i, CH_OUT_D));
        recs.push(tag(p, &gh, 7 - i, CH_HERALD));
    }
    let s = sorted(recs);
    let (ev, _) = find_coincidences(&s, default_window_ps(REP_NS), Fold::Three).unwrap();
    let c = ChannelCenters::from_grids(&g1, &g2, &gh);
    let (h2, st2) = histogram_2d(&ev, &det(), &c, &g1, &g2).unwrap();
    for ((i, j), v) in h2.counts().indexed_iter() {
        assert_eq!(*v, f64::from(i == j));
    }
    assert_eq!(st2.binned, 8);
    let (h3, st3) = histogram_3d(&ev, &det(), &c, &gh, &g1, &g2).unwrap();
    assert_eq!(st3.binned, 8);
    for i in 0..8 {
        assert_eq!(h3.counts()[[7 - i, i, i]], 1.0);
    }
    assert_eq!(h3.marginal(), h2);
}

#[test]
fn out_of_range_events_are_counted() {
    let g = grid(8, 1550.0);
    let wide = FrequencyGrid::from_spacing(g.center(), g.spacing(), 20).unwrap();
    let recs = vec![tag(3, &wide, 0, 0), tag(3, &wide, 10, 1), tag(4, &wide, 10, 0), tag(4, &wide, 11, 1)];
    let (ev, _) = find_coincidences(&sorted(recs), default_window_ps(REP_NS), Fold::Two).unwrap();
    let (h, st) = histogram_2d(&ev, &det(), &ChannelCenters::from_grids(&g, &g, &g), &g, &g).unwrap();
    assert_eq!(st.events, 2);
    assert_eq!(st.dropped_out_of_range, 1);
    assert_eq!(st.binned + st.dropped_out_of_range + st.dropped_missing_channel, st.events);
    assert_eq!(h.total(), 1.0);
    assert!(histogram_3d(&ev, &det(), &ChannelCenters::from_grids(&g, &g, &g), &g, &g, &g).is_err());
}

fn small_histogram() -> HeraldedInterferogram {
    let (g1, gh) = (grid(12, 1550.0), grid(12, 1560.0));
    let c = Array3::from_shape_fn((12, 12, 12), |(h, i, j)| {
        let x = |k: usize, w: f64| (-((k as f64 - 5.5) / w).powi(2)).exp();
        x(h, 3.0) * x(i, 3.5) * x(j, 2.5) * (1.2 + (0.9 * (i as f64 - j as f64)).cos())
    });
    HeraldedInterferogram::new(gh, g1, g1, c).unwrap()
}

#[test]
fn synthesize_ingest_round_trip() {
    let h = small_histogram();
    let rates = TagRates {
        coincidences_per_s: 1000.0,
        singles_per_s: [0.0; 3],
    };
    let s = synthesize_tag_stream(&h, &det(), 150.0, &rates, 21).unwrap();
    let s = parse_stream(&serialize(&s.stream)).unwrap();
    let (ev, _) = find_coincidences(&s, default_window_ps(REP_NS), Fold::Three).unwrap();
    assert!(ev.len() >= 100_000, "{}", ev.len());
    let c = ChannelCenters::from_grids(h.grid1(), h.grid2(), h.herald_grid());
    let (got, st) = histogram_3d(&ev, &det(), &c, h.herald_grid(), h.grid1(), h.grid2()).unwrap();
    assert_eq!(st.binned + st.dropped_out_of_range, st.events);
    let want = apply_detector_blur_3d(&h, &det()).unwrap();
    let o: Vec<f64> = got.counts().iter().copied().collect();
    let e: Vec<f64> = want.counts().iter().copied().collect();
    let chi = chi_square(&o, &e).unwrap();
    assert!(chi.per_dof() < 1.5, "{chi:?}");
}

#[test]
fn lab_rates_recover_threefold_count() {
    let h = small_histogram();
    let rates = TagRates {
        coincidences_per_s: 100.0,
        singles_per_s: [0.0, 0.0, 1.0e5],
    };
    let s = synthesize_tag_stream(&h, &det(), 40.0, &rates, 8).unwrap();
    let (ev, stats) = find_coincidences(&s.stream, default_window_ps(REP_NS), Fold::Three).unwrap();
    let truth = s.bookkeeping.detected_events as f64;
    assert!((ev.len() as f64 / truth - 1.0).abs() < 0.05, "{} vs {truth}", ev.len());
    let sparsest = *stats.per_channel.iter().min().unwrap();
    assert!(stats.events <= sparsest);
}

fn arbitrary_stream() -> impl Strategy<Value = TagStream> {
    prop::collection::vec((0u64..40_000, 0u8..3), 0..400).prop_map(|v| {
        let mut t = 0u64;
        let recs = v
            .into_iter()
            .map(|(dt, c)| {
                t += dt;
                rec(t, c)
            })
            .collect();
        stream(recs)
    })
}

fn chunked(s: &TagStream, k: usize, fold: Fold) -> (Vec<CoincidenceEvent>, CoincidenceStats) {
    let mut f = CoincidenceFinder::new(s.rep_period_ns, default_window_ps(REP_NS), fold).unwrap();
    let mut out = Vec::new();
    let size = s.len().div_ceil(k).max(1);
    for c in s.records.chunks(size) {
        f.push(c, &mut out).unwrap();
    }
    let st = f.finish(&mut out);
    (out, st)
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(s in arbitrary_stream()) {
        let b = serialize(&s);
        let back = parse_stream(&b).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(serialize(&back), b);
    }

    #[test]
    fn chunking_does_not_change_events(s in arbitrary_stream(), three in any::<bool>()) {
        let fold = if three { Fold::Three } else { Fold::Two };
        let whole = find_coincidences(&s, default_window_ps(REP_NS), fold).unwrap();
        for k in [1, 2, 7, 64] {
            prop_assert_eq!(&chunked(&s, k, fold), &whole);
        }
    }

    #[test]
    fn events_bounded_by_sparsest_channel(s in arbitrary_stream()) {
        let (ev, st) = find_coincidences(&s, default_window_ps(REP_NS), Fold::Three).unwrap();
        prop_assert!(ev.len() as u64 <= *st.per_channel.iter().min().unwrap());
        let g = grid(16, 1550.0);
        let c = ChannelCenters::from_grids(&g, &g, &g);
        let (_, hs) = histogram_3d(&ev, &det(), &c, &g, &g, &g).unwrap();
        prop_assert_eq!(hs.binned + hs.dropped_out_of_range + hs.dropped_missing_channel, hs.events);
    }
}
