//! Subcommand implementations. Every command works inside one run
//! directory; file names below are the directory's fixed layout.

mod analyze;
mod ingest;
mod reconstruct;
mod simulate;

use jsamode::{
    io::{decode_heralded, decode_interferogram, mode_from_csv},
    presets::Scenario,
    HeraldedInterferogram, Interferogram,
};

pub use analyze::analyze;
pub use ingest::{ingest, Arm};
pub use reconstruct::reconstruct;
pub use simulate::simulate;

use crate::{
    error::{CliError, CliResult},
    rundir::{read_file, RunDir},
};

pub const TRUTH_FILE: &str = "truth.jsab";
pub const JSA_FILE: &str = "jsa.jsab";
pub const PARTIAL_JSA_FILE: &str = "jsa_partial.jsab";
pub const SEEDS_FILE: &str = "seeds.csv";
pub const MODES_FILE: &str = "modes.csv";

pub fn measured_heralded(arm: Arm) -> String {
    format!("measured_{arm}.jsh3")
}

pub fn ingested_heralded(arm: Arm) -> String {
    format!("ingested_{arm}.jsh3")
}

pub fn tags_file(arm: Option<Arm>) -> String {
    match arm {
        Some(a) => format!("tags_{a}.ttg"),
        None => "tags.ttg".into(),
    }
}

pub fn seed_file(kind: &str, bin: usize) -> String {
    format!("{kind}_seed_{bin:03}.jsab")
}

/// Scenario of the run, with the reference spectrum file if one is
/// configured.
pub fn load_scenario(rd: &RunDir) -> CliResult<Scenario> {
    let reference = match &rd.config.run.reference_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(mode_from_csv(&text).map_err(|e| CliError::file(p, e))?)
        }
        None => None,
    };
    Ok(Scenario::with_reference(rd.config.clone(), reference)?)
}

fn load_heralded(rd: &RunDir, name: &str) -> CliResult<HeraldedInterferogram> {
    let p = rd.path(name);
    let (h, hash) = decode_heralded(&read_file(&p)?).map_err(|e| CliError::file(&p, e))?;
    rd.check_hash(&p, hash)?;
    Ok(h)
}

fn load_interferogram(rd: &RunDir, name: &str) -> CliResult<Interferogram> {
    let p = rd.path(name);
    let (g, hash) = decode_interferogram(&read_file(&p)?).map_err(|e| CliError::file(&p, e))?;
    rd.check_hash(&p, hash)?;
    Ok(g)
}

/// Histogram of one heralded arm: ingested from tags when available,
/// otherwise the simulated one.
pub fn heralded_input(rd: &RunDir, arm: Arm) -> CliResult<Option<(String, HeraldedInterferogram)>> {
    for name in [ingested_heralded(arm), measured_heralded(arm)] {
        if rd.exists(&name) {
            let h = load_heralded(rd, &name)?;
            return Ok(Some((name, h)));
        }
    }
    Ok(None)
}

pub fn unseeded_input(rd: &RunDir) -> CliResult<Option<(String, Interferogram)>> {
    for name in ["ingested.jsab", "measured.jsab"] {
        if rd.exists(name) {
            return Ok(Some((name.to_string(), load_interferogram(rd, name)?)));
        }
    }
    Ok(None)
}

/// `(bin, detuning, file)` rows of the seed table.
pub fn read_seed_table(rd: &RunDir) -> CliResult<Vec<(usize, f64, String)>> {
    let p = rd.path(SEEDS_FILE);
    let bytes = read_file(&p)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes.as_slice());
    let mut rows = Vec::new();
    for rec in r.deserialize::<(usize, f64, String)>() {
        let row = rec.map_err(|e| {
            let offset = e.position().map_or(0, |p| p.byte());
            CliError::file(&p, jsamode::Error::Format {
                offset,
                message: e.to_string(),
            })
        })?;
        if row.2.contains(['/', '\\']) {
            return Err(CliError::Precondition(format!("{}: file names must be local", p.display())));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_seed_measurement(rd: &RunDir, name: &str) -> CliResult<Interferogram> {
    load_interferogram(rd, name)
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("in-memory csv");
    w.into_inner().expect("in-memory csv")
}

fn with_hash_header(rd: &RunDir, body: Vec<u8>) -> Vec<u8> {
    let mut out = format!("# config_hash={}\n", rd.hash_hex()).into_bytes();
    out.extend(body);
    out
}
