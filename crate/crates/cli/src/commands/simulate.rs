use jsamode::{
    forward::{synthesize_tag_stream, synthesize_twofold_stream, with_flat_background, SynthesizedStream, TagRates},
    grid::angular_to_ghz,
    ingest::serialize,
    io::{encode_heralded, encode_interferogram, encode_jsa, mode_to_csv},
    presets::{derive_seed, Measurement},
};

use super::{csv_string, load_scenario, measured_heralded, seed_file, tags_file, with_hash_header, Arm, SEEDS_FILE, TRUTH_FILE};
use crate::{
    error::{CliError, CliResult},
    rundir::{Report, RunDir, CONFIG_FILE},
};

const PRODUCER: &str = "simulate";

fn tag_rates(rd: &RunDir) -> CliResult<(f64, TagRates)> {
    let t = &rd.config.tags;
    let events = rd.config.sampling.events;
    if events == 0 {
        return Err(CliError::Precondition(
            "[tags] needs sampling.events > 0 to set the acquisition time".into(),
        ));
    }
    Ok((
        events as f64 / t.coincidences_per_s,
        TagRates {
            coincidences_per_s: t.coincidences_per_s,
            singles_per_s: t.singles_per_s,
        },
    ))
}

fn record_tags(rd: &mut RunDir, report: &mut Report, name: &str, s: SynthesizedStream) -> CliResult<()> {
    for w in &s.warnings {
        log::warn!("{name}: {w}");
        report.kv("warning", format!("{name}: {w}"));
    }
    let b = s.bookkeeping;
    report.kv(
        name,
        format!(
            "{} records, {} pulses, {} generated events, {} fully detected, singles {:?}, {} dead-time losses",
            s.stream.len(),
            b.pulses,
            b.generated_events,
            b.detected_events,
            b.singles,
            b.dead_time_losses
        ),
    );
    rd.write(name, &serialize(&s.stream), PRODUCER)
}

pub fn simulate(rd: &mut RunDir) -> CliResult<()> {
    rd.clear_previous_outputs()?;
    let config_text = rd.config_text.clone();
    rd.write(CONFIG_FILE, config_text.as_bytes(), PRODUCER)?;
    let scenario = load_scenario(rd)?;
    let hash = rd.hash;
    let h = Some(&hash);
    let seed = rd.config.run.seed;
    let det = scenario.detector;

    let mut report = Report::new("simulate", rd);
    report.kv("mode", format!("{:?}", rd.config.measurement.mode).to_lowercase());
    report.kv("seed", seed);
    report.kv("delay_fs", scenario.tau());
    report.kv(
        "fringe_period_bins",
        format!("{:.3}", 2.0 * std::f64::consts::PI / (scenario.tau() * scenario.signal_grid.spacing())),
    );
    report.kv(
        "detector_resolution",
        format!(
            "{:.1} pm, {:.3} GHz FWHM at {} nm",
            det.blur_fwhm_nm() * 1e3,
            angular_to_ghz(det.blur_fwhm_angular(rd.config.grid.signal_center_nm)),
            rd.config.grid.signal_center_nm
        ),
    );

    rd.write(TRUTH_FILE, &encode_jsa(&scenario.jsa, h), PRODUCER)?;
    rd.write(
        "reference_signal.csv",
        mode_to_csv(&scenario.reference_signal, h).as_bytes(),
        PRODUCER,
    )?;
    rd.write(
        "reference_herald.csv",
        mode_to_csv(&scenario.reference_herald, h).as_bytes(),
        PRODUCER,
    )?;

    let expected = scenario.expected()?;
    let measured = scenario.sample(&expected, seed)?;
    let tags = rd.config.tags.enabled;
    match (&expected, &measured) {
        (Measurement::Heralded { a: ea, b: eb }, Measurement::Heralded { a, b }) => {
            let arms = [(Arm::A, Some(ea), Some(a)), (Arm::B, eb.as_ref(), b.as_ref())];
            for (k, (arm, e, m)) in arms.into_iter().enumerate() {
                let (Some(e), Some(m)) = (e, m) else { continue };
                rd.write(&format!("expected_{arm}.jsh3"), &encode_heralded(e, h), PRODUCER)?;
                rd.write(&measured_heralded(arm), &encode_heralded(m, h), PRODUCER)?;
                report.kv(&format!("events_{arm}"), m.total());
                if tags {
                    let (duration, rates) = tag_rates(rd)?;
                    let src = with_flat_background(e, rd.config.sampling.background_fraction)?;
                    let s = synthesize_tag_stream(&src, &det, duration, &rates, derive_seed(seed, 10 + k as u64))?;
                    record_tags(rd, &mut report, &tags_file(Some(arm)), s)?;
                }
            }
        }
        (Measurement::Seeded(es), Measurement::Seeded(ms)) => {
            if tags {
                return Err(CliError::Precondition(
                    "[tags] is supported for heralded and unseeded measurements only".into(),
                ));
            }
            let mut rows = Vec::new();
            for ((d, e), (_, m)) in es.measurements.iter().zip(&ms.measurements) {
                let bin = es.seed_grid.index_of(*d).expect("seed lies on its grid");
                let name = seed_file("measured", bin);
                rd.write(&seed_file("expected", bin), &encode_interferogram(e, h), PRODUCER)?;
                rd.write(&name, &encode_interferogram(m, h), PRODUCER)?;
                rows.push((bin, *d, name, m.total()));
            }
            report.kv("seeds", rows.len());
            report.kv("events", rows.iter().map(|r| r.3).sum::<f64>());
            let table = csv_string(|w| {
                w.write_record(["bin", "detuning_rad_per_fs", "file"])?;
                for (bin, d, name, _) in &rows {
                    w.write_record([bin.to_string(), d.to_string(), name.clone()])?;
                }
                Ok(())
            });
            let table = with_hash_header(rd, table);
            rd.write(SEEDS_FILE, &table, PRODUCER)?;
        }
        (Measurement::Unseeded(e), Measurement::Unseeded(m)) => {
            rd.write("expected.jsab", &encode_interferogram(e, h), PRODUCER)?;
            rd.write("measured.jsab", &encode_interferogram(m, h), PRODUCER)?;
            report.kv("events", m.total());
            if tags {
                let (duration, rates) = tag_rates(rd)?;
                let s = synthesize_twofold_stream(e, &det, duration, &rates, derive_seed(seed, 10))?;
                record_tags(rd, &mut report, &tags_file(None), s)?;
            }
        }
        _ => unreachable!("sampling preserves the measurement kind"),
    }
    rd.write("simulate_report.txt", report.as_bytes(), PRODUCER)?;
    rd.save_manifest()
}
