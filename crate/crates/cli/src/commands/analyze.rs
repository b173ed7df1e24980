use std::path::Path;

use jsamode::{
    analysis::{fit_chirp, fringe_visibility, g2_predicted, overlap, schmidt},
    io::{decode_jsa, real_matrix_to_csv},
    presets::MeasurementMode,
    reconstruction::fourier_plane,
    Interferogram, Jsa,
};
use serde_json::{json, Map, Value};

use super::{
    csv_string, heralded_input, load_seed_measurement, read_seed_table, unseeded_input, with_hash_header, Arm,
    JSA_FILE, MODES_FILE, TRUTH_FILE,
};
use crate::{
    error::{CliError, CliResult},
    rundir::{read_file, Report, RunDir},
};

const PRODUCER: &str = "analyze";
/// Phase is written only where `|f|` exceeds this fraction of its peak.
const PHASE_LEVEL: f64 = 1e-3;
/// Fewer populated columns leave the cross term unconstrained.
const MIN_FIT_COLUMNS: usize = 3;

fn load_jsa(rd: &RunDir, path: &Path) -> CliResult<Jsa> {
    if !path.is_file() {
        return Err(CliError::Precondition(format!(
            "{} not found; run `reconstruct` first or pass a JSA file",
            path.display()
        )));
    }
    let (jsa, hash) = decode_jsa(&read_file(path)?).map_err(|e| CliError::file(path, e))?;
    rd.check_hash(path, hash)?;
    Ok(jsa)
}

/// The measured two-fold pattern behind the reconstruction, if any.
fn measured_pattern(rd: &RunDir) -> CliResult<Option<(String, Interferogram)>> {
    Ok(match rd.config.measurement.mode {
        MeasurementMode::Heralded => heralded_input(rd, Arm::A)?.map(|(n, h)| (format!("{n} (marginal)"), h.marginal())),
        MeasurementMode::Unseeded => unseeded_input(rd)?,
        MeasurementMode::Seeded => {
            if !rd.exists(super::SEEDS_FILE) {
                return Ok(None);
            }
            match read_seed_table(rd)?.into_iter().next() {
                Some((_, _, name)) => {
                    let g = load_seed_measurement(rd, &name)?;
                    Some((name, g))
                }
                None => None,
            }
        }
    })
}

fn pattern_outputs(rd: &mut RunDir, report: &mut Report, json: &mut Map<String, Value>) -> CliResult<()> {
    let Some((name, g)) = measured_pattern(rd)? else {
        return Ok(());
    };
    report.kv("measured_pattern", &name);
    match fringe_visibility(&g) {
        Ok(v) => {
            report.kv("fringe_visibility", format!("{v:.4}"));
            json.insert("fringe_visibility".into(), json!(v));
        }
        Err(e) => {
            log::warn!("visibility: {e}");
            report.kv("fringe_visibility", format!("unavailable ({e})"));
        }
    }
    let plane = fourier_plane(&g);
    let table = csv_string(|w| {
        let mut header = vec!["t1_fs\\t2_fs".to_string()];
        header.extend(plane.t2.iter().map(|t| t.to_string()));
        w.write_record(&header)?;
        for (t1, row) in plane.t1.iter().zip(plane.magnitude.rows()) {
            let mut rec = vec![t1.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        Ok(())
    });
    let table = with_hash_header(rd, table);
    rd.write("fourier_magnitude.csv", &table, PRODUCER)
}

/// Weights from `modes.csv` of an unseeded run.
fn mode_weights(rd: &RunDir) -> CliResult<Vec<f64>> {
    let p = rd.path(MODES_FILE);
    if !p.is_file() {
        return Err(CliError::Precondition(format!("{} not found; run `reconstruct` first", p.display())));
    }
    let bytes = read_file(&p)?;
    let hash_line = format!("# config_hash={}", rd.hash_hex());
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    if first != hash_line.as_bytes() {
        let found = String::from_utf8_lossy(first).trim_start_matches("# config_hash=").to_string();
        let err = CliError::HashMismatch {
            path: p.clone(),
            found,
            expected: rd.hash_hex(),
        };
        if !rd.force {
            return Err(err);
        }
        log::warn!("{err}");
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes.as_slice());
    r.deserialize::<(usize, f64)>()
        .map(|row| {
            row.map(|(_, w)| w).map_err(|e| {
                CliError::file(&p, jsamode::Error::Format {
                    offset: e.position().map_or(0, |p| p.byte()),
                    message: e.to_string(),
                })
            })
        })
        .collect()
}

fn analyze_modes(rd: &mut RunDir) -> CliResult<()> {
    let weights = mode_weights(rd)?;
    let sum_sq: f64 = weights.iter().map(|p| p * p).sum();
    if weights.is_empty() || sum_sq <= 0.0 {
        return Err(CliError::Precondition(format!("{MODES_FILE} holds no weights")));
    }
    let k = 1.0 / sum_sq;
    let mut report = Report::new("analyze", rd);
    let mut out = Map::new();
    report.kv("input", MODES_FILE);
    report.kv("purity", format!("{:.5}", weights[0]));
    report.kv("effective_modes", format!("{k:.5}"));
    report.kv("g2_predicted", format!("{:.5}", g2_predicted(k)?));
    out.insert("purity".into(), json!(weights[0]));
    out.insert("effective_modes".into(), json!(k));
    out.insert("g2_predicted".into(), json!(g2_predicted(k)?));
    out.insert("weights".into(), json!(weights));
    pattern_outputs(rd, &mut report, &mut out)?;
    finish(rd, report, out)
}

fn finish(rd: &mut RunDir, report: Report, mut out: Map<String, Value>) -> CliResult<()> {
    out.insert("config_hash".into(), json!(rd.hash_hex()));
    let mut text = serde_json::to_string_pretty(&Value::Object(out)).expect("json");
    text.push('\n');
    rd.write("analysis.json", text.as_bytes(), PRODUCER)?;
    rd.write("analysis_report.txt", report.as_bytes(), PRODUCER)?;
    rd.save_manifest()
}

/// Schmidt analysis, chirp fit and plot tables of a reconstructed JSA.
pub fn analyze(rd: &mut RunDir, explicit: Option<&Path>) -> CliResult<()> {
    if explicit.is_none() && rd.config.measurement.mode == MeasurementMode::Unseeded {
        return analyze_modes(rd);
    }
    let path = explicit.map_or_else(|| rd.path(JSA_FILE), Path::to_path_buf);
    let jsa = load_jsa(rd, &path)?;
    let hash = rd.hash;
    let mut report = Report::new("analyze", rd);
    let mut out = Map::new();
    report.kv("input", path.strip_prefix(&rd.root).unwrap_or(&path).display());

    let s = schmidt(&jsa)?;
    let k_amp = schmidt(&jsa.amplitude_only())?.k;
    let g2 = g2_predicted(s.k)?;
    report.kv("schmidt_number", format!("{:.5}", s.k));
    report.kv("schmidt_number_amplitude_only", format!("{k_amp:.5}"));
    report.kv("g2_predicted", format!("{g2:.5}"));
    report.line("lambda:");
    for (i, l) in s.coefficients.iter().enumerate().take(8) {
        report.line(format!("  {}: {l:.6}", i + 1));
    }
    out.insert("schmidt_number".into(), json!(s.k));
    out.insert("schmidt_number_amplitude_only".into(), json!(k_amp));
    out.insert("g2_predicted".into(), json!(g2));
    out.insert("schmidt_coefficients".into(), json!(s.coefficients));

    let populated: Vec<bool> = jsa.matrix().columns().into_iter().map(|c| c.iter().any(|z| z.norm() > 0.0)).collect();
    let n_populated = populated.iter().filter(|&&p| p).count();
    let fit = if n_populated < MIN_FIT_COLUMNS {
        report.kv("beta_fs2", format!("not fitted ({n_populated} populated columns)"));
        None
    } else {
        Some(fit_chirp(&jsa))
    };
    match fit {
        None => {}
        Some(Ok(fit)) => {
            report.kv("beta_fs2", format!("{:.6e}", fit.beta));
            report.kv("beta_std_error_fs2", format!("{:.3e}", fit.beta_std_error));
            report.kv("chirp_fit_bins", fit.bins_used);
            report.kv("chirp_fit_residual_rms_rad", format!("{:.4e}", fit.residual_rms));
            out.insert(
                "chirp".into(),
                json!({
                    "beta_fs2": fit.beta,
                    "beta_std_error_fs2": fit.beta_std_error,
                    "coefficients": fit.coefficients,
                    "bins_used": fit.bins_used,
                    "residual_rms_rad": fit.residual_rms,
                }),
            );
        }
        Some(Err(e)) => {
            log::warn!("chirp fit: {e}");
            report.kv("beta_fs2", format!("unavailable ({e})"));
        }
    }

    if rd.exists(TRUTH_FILE) && path != rd.path(TRUTH_FILE) {
        let truth = load_jsa(rd, &rd.path(TRUTH_FILE))?;
        match overlap(&jsa, &truth) {
            Ok(o) => {
                report.kv("overlap_with_truth", format!("{o:.6}"));
                out.insert("overlap_with_truth".into(), json!(o));
            }
            Err(e) => log::warn!("overlap with truth: {e}"),
        }
        if n_populated < populated.len() && truth.matrix().dim() == jsa.matrix().dim() {
            let mut m = truth.matrix().clone();
            for (mut c, &p) in m.columns_mut().into_iter().zip(&populated) {
                if !p {
                    c.fill(Default::default());
                }
            }
            if let Ok(o) = Jsa::new(*truth.grid1(), *truth.grid2(), m).and_then(|t| overlap(&jsa, &t)) {
                report.kv("overlap_with_truth_on_measured_columns", format!("{o:.6}"));
                out.insert("overlap_with_truth_on_measured_columns".into(), json!(o));
            }
        }
    }

    let table = csv_string(|w| {
        w.write_record(["k", "lambda", "lambda_sq"])?;
        for (i, l) in s.coefficients.iter().enumerate() {
            w.write_record([(i + 1).to_string(), l.to_string(), (l * l).to_string()])?;
        }
        Ok(())
    });
    let table = with_hash_header(rd, table);
    rd.write("schmidt.csv", &table, PRODUCER)?;

    let f = jsa.matrix();
    let amp = f.mapv(|z| z.norm());
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    let phase = ndarray::Zip::from(f)
        .and(&amp)
        .map_collect(|z, &a| if a >= PHASE_LEVEL * peak { z.arg() } else { f64::NAN });
    let (g1, g2) = (jsa.grid1(), jsa.grid2());
    rd.write("jsa_amplitude.csv", real_matrix_to_csv(g1, g2, &amp, Some(&hash)).as_bytes(), PRODUCER)?;
    rd.write("jsa_phase.csv", real_matrix_to_csv(g1, g2, &phase, Some(&hash)).as_bytes(), PRODUCER)?;

    pattern_outputs(rd, &mut report, &mut out)?;
    finish(rd, report, out)
}
