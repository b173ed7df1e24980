use std::{fmt, fs::File, io::BufReader, path::Path};

use jsamode::{
    ingest::{
        default_window_ps, histogram_2d, histogram_3d, ChannelCenters, CoincidenceEvent, CoincidenceFinder,
        CoincidenceStats, Fold, HistogramStats, TagReader,
    },
    io::{encode_heralded, encode_interferogram},
    presets::MeasurementMode,
    FrequencyGrid,
};

use super::{ingested_heralded, load_scenario, tags_file};
use crate::{
    error::{CliError, CliResult},
    rundir::{Report, RunDir},
};

const PRODUCER: &str = "ingest";
const CHUNK_RECORDS: usize = 1 << 16;

/// Which photon heralds: arm `a` resolves the signal and heralds on the
/// idler, arm `b` swaps the roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Arm {
    A,
    B,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::A => "a",
            Arm::B => "b",
        })
    }
}

/// Streams a tag file through the coincidence search.
fn coincidences(
    path: &Path,
    window: Option<f64>,
    fold: Fold,
    expected_rep_ns: f64,
) -> CliResult<(Vec<CoincidenceEvent>, CoincidenceStats, u64)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = TagReader::new(BufReader::new(file)).map_err(|e| CliError::file(path, e))?;
    let header = *reader.header();
    if (header.rep_period_ns - expected_rep_ns).abs() > 1e-9 * expected_rep_ns {
        log::warn!(
            "{}: repetition period {} ns differs from the configured {} ns; using the file's",
            path.display(),
            header.rep_period_ns,
            expected_rep_ns
        );
    }
    let window = window.unwrap_or_else(|| default_window_ps(header.rep_period_ns));
    let mut finder = CoincidenceFinder::new(header.rep_period_ns, window, fold)?;
    let mut events = Vec::new();
    let mut chunk = Vec::with_capacity(CHUNK_RECORDS);
    for rec in reader {
        chunk.push(rec.map_err(|e| CliError::file(path, e))?);
        if chunk.len() == CHUNK_RECORDS {
            finder.push(&chunk, &mut events).map_err(|e| CliError::file(path, e))?;
            chunk.clear();
        }
    }
    finder.push(&chunk, &mut events).map_err(|e| CliError::file(path, e))?;
    let stats = finder.finish(&mut events);
    Ok((events, stats, header.record_count))
}

fn report_stats(report: &mut Report, name: &str, c: &CoincidenceStats, h: &HistogramStats) {
    report.kv(&format!("{name}.records"), c.records);
    report.kv(&format!("{name}.records_per_channel"), format!("{:?}", c.per_channel));
    report.kv(&format!("{name}.coincidences"), c.events);
    report.kv(&format!("{name}.outside_window"), c.outside_window);
    report.kv(&format!("{name}.multi_hit_pulses"), c.multi_hit_pulses);
    report.kv(&format!("{name}.incomplete_pulses"), c.incomplete_pulses);
    report.kv(&format!("{name}.binned"), h.binned);
    report.kv(&format!("{name}.dropped_out_of_range"), h.dropped_out_of_range);
    report.kv(&format!("{name}.dropped_missing_channel"), h.dropped_missing_channel);
    eprintln!(
        "{name}: {} records, {} coincidences, {} binned, {} out of range",
        c.records, c.events, h.binned, h.dropped_out_of_range
    );
}

/// Histograms the run's tag streams (or one explicit stream).
pub fn ingest(rd: &mut RunDir, explicit: Option<(&Path, Arm)>) -> CliResult<()> {
    let scenario = load_scenario(rd)?;
    let hash = rd.hash;
    let det = scenario.detector;
    let window = rd.config.tags.window_ps;
    let (sg, hg) = (scenario.signal_grid, scenario.herald_grid);
    let mut report = Report::new("ingest", rd);
    let mut done = 0;
    match rd.config.measurement.mode {
        MeasurementMode::Heralded => {
            let jobs: Vec<(std::path::PathBuf, Arm)> = match explicit {
                Some((p, arm)) => vec![(p.to_path_buf(), arm)],
                None => [Arm::A, Arm::B]
                    .into_iter()
                    .map(|a| (rd.path(&tags_file(Some(a))), a))
                    .filter(|(p, _)| p.is_file())
                    .collect(),
            };
            for (path, arm) in jobs {
                let (g1, gh): (FrequencyGrid, FrequencyGrid) = match arm {
                    Arm::A => (sg, hg),
                    Arm::B => (hg, sg),
                };
                let (events, cs, _) = coincidences(&path, window, Fold::Three, det.rep_period_ns)?;
                let centers = ChannelCenters::from_grids(&g1, &g1, &gh);
                let (h, hs) = histogram_3d(&events, &det, &centers, &gh, &g1, &g1)?;
                let name = ingested_heralded(arm);
                report_stats(&mut report, &name, &cs, &hs);
                rd.write(&name, &encode_heralded(&h, Some(&hash)), PRODUCER)?;
                done += 1;
            }
        }
        MeasurementMode::Unseeded => {
            let path = match explicit {
                Some((p, _)) => p.to_path_buf(),
                None => rd.path(&tags_file(None)),
            };
            if path.is_file() || explicit.is_some() {
                let (events, cs, _) = coincidences(&path, window, Fold::Two, det.rep_period_ns)?;
                let centers = ChannelCenters::from_grids(&sg, &sg, &hg);
                let (g, hs) = histogram_2d(&events, &det, &centers, &sg, &sg)?;
                report_stats(&mut report, "ingested.jsab", &cs, &hs);
                rd.write("ingested.jsab", &encode_interferogram(&g, Some(&hash)), PRODUCER)?;
                done += 1;
            }
        }
        MeasurementMode::Seeded => {
            return Err(CliError::Precondition(
                "seeded runs are simulated as histograms; there are no tag streams to ingest".into(),
            ));
        }
    }
    if done == 0 {
        return Err(CliError::Precondition(format!(
            "no tag streams in {}; enable [tags] and run `simulate`, or pass --tags",
            rd.root.display()
        )));
    }
    rd.write("ingest_report.txt", report.as_bytes(), PRODUCER)?;
    rd.save_manifest()
}
