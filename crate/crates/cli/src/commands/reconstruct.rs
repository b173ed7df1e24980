use jsamode::{
    io::{complex_matrix_to_csv, encode_jsa, mode_to_csv},
    presets::MeasurementMode,
    reconstruction::{
        assemble_jsa, cross_sections_from_seeds, locate_sideband, reconstruct_heralded, reconstruct_mode,
        CrossSections, SeededScan, StitchedJsa,
    },
    Error, Interferogram,
};

use super::{
    csv_string, heralded_input, load_scenario, load_seed_measurement, read_seed_table, unseeded_input,
    with_hash_header, Arm, JSA_FILE, MODES_FILE, PARTIAL_JSA_FILE,
};
use crate::{
    error::{CliError, CliResult},
    rundir::{Report, RunDir},
};

const PRODUCER: &str = "reconstruct";
/// Modes written individually for a mixed signal.
const WRITTEN_MODES: usize = 4;

/// Delay used for the division: the configured one, or the sideband
/// estimate when `reconstruction.estimate_delay` is set.
fn delay(report: &mut Report, g: &Interferogram, configured: f64, estimate: bool) -> CliResult<f64> {
    report.kv("delay_configured_fs", configured);
    let tau = match locate_sideband(g) {
        Ok(s) => {
            report.kv("delay_estimate_fs", format!("{:.2}", s.tau));
            report.kv("sideband_snr", format!("{:.1}", s.snr));
            if estimate {
                s.tau
            } else {
                configured
            }
        }
        Err(e) if !estimate => {
            report.kv("delay_estimate_fs", format!("unavailable ({e})"));
            configured
        }
        Err(e) => return Err(e.into()),
    };
    report.kv("delay_used_fs", tau);
    Ok(tau)
}

fn summarise(report: &mut Report, name: &str, s: &CrossSections) {
    let reps: Vec<_> = s.reports.iter().flatten().collect();
    report.kv(&format!("{name}.sections"), format!("{} of {}", reps.len(), s.sections.len()));
    if reps.is_empty() {
        return;
    }
    let max = |f: &dyn Fn(&jsamode::reconstruction::SliceReport) -> f64| reps.iter().map(|r| f(r)).fold(0.0, f64::max);
    report.kv(&format!("{name}.max_masked_fraction"), format!("{:.4}", max(&|r| r.masked_fraction)));
    report.kv(
        &format!("{name}.max_hermiticity_residual"),
        format!("{:.3e}", max(&|r| r.hermiticity_residual)),
    );
    report.kv(&format!("{name}.max_clipped_mass"), format!("{:.3e}", max(&|r| r.clipped_mass)));
    let min_purity = reps.iter().map(|r| r.purity).fold(1.0, f64::min);
    report.kv(&format!("{name}.min_purity"), format!("{min_purity:.4}"));
}

fn write_stitched(rd: &mut RunDir, report: &mut Report, name: &str, st: &StitchedJsa) -> CliResult<()> {
    let hash = rd.hash;
    report.kv("stitch.components", st.components);
    report.kv("stitch.iterations", st.iterations);
    report.kv("stitch.residual", format!("{:.3e}", st.residual));
    let disc = st.amplitude_discrepancy.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    report.kv("stitch.max_amplitude_discrepancy", format!("{disc:.3e}"));
    rd.write(name, &encode_jsa(&st.jsa, Some(&hash)), PRODUCER)?;
    if name == JSA_FILE {
        let csv = complex_matrix_to_csv(st.jsa.grid1(), st.jsa.grid2(), st.jsa.matrix(), Some(&hash));
        rd.write("jsa.csv", csv.as_bytes(), PRODUCER)?;
    }
    Ok(())
}

/// Writes the stitched JSA, or the partial one before passing the
/// underdetermined error on.
fn finish(rd: &mut RunDir, mut report: Report, stitched: jsamode::Result<StitchedJsa>) -> CliResult<()> {
    let result = match stitched {
        Ok(st) => write_stitched(rd, &mut report, JSA_FILE, &st),
        Err(Error::StitchingUnderdetermined { components, partial }) => {
            write_stitched(rd, &mut report, PARTIAL_JSA_FILE, &partial)?;
            report.kv(
                "error",
                format!("phase stitching underdetermined: {components} disconnected components"),
            );
            Err(Error::StitchingUnderdetermined { components, partial }.into())
        }
        Err(e) => Err(e.into()),
    };
    rd.write("reconstruction_report.txt", report.as_bytes(), PRODUCER)?;
    rd.save_manifest()?;
    result
}

pub fn reconstruct(rd: &mut RunDir) -> CliResult<()> {
    let scenario = load_scenario(rd)?;
    let hash = rd.hash;
    let configured = scenario.tau();
    let estimate = rd.config.reconstruction.estimate_delay;
    let mut report = Report::new("reconstruct", rd);
    match rd.config.measurement.mode {
        MeasurementMode::Heralded => {
            let (name_a, a) = heralded_input(rd, Arm::A)?.ok_or_else(|| {
                CliError::Precondition(format!("no heralded histogram in {}; run `simulate` first", rd.root.display()))
            })?;
            let b = if rd.config.measurement.both_arms { heralded_input(rd, Arm::B)? } else { None };
            report.kv("input_a", &name_a);
            let tau = delay(&mut report, &a.marginal(), configured, estimate)?;
            let sa = reconstruct_heralded(&a, &scenario.processing(tau, false)?)?;
            summarise(&mut report, "a", &sa);
            let sb = match b {
                Some((name_b, hb)) => {
                    report.kv("input_b", &name_b);
                    let sb = reconstruct_heralded(&hb, &scenario.processing(tau, true)?)?;
                    summarise(&mut report, "b", &sb);
                    Some(sb)
                }
                None => None,
            };
            let st = assemble_jsa(&sa, sb.as_ref());
            finish(rd, report, st)
        }
        MeasurementMode::Seeded => {
            let rows = read_seed_table(rd)?;
            if rows.is_empty() {
                return Err(CliError::Precondition("seed table is empty".into()));
            }
            let mut measurements = Vec::with_capacity(rows.len());
            for (_, d, name) in &rows {
                measurements.push((*d, load_seed_measurement(rd, name)?));
            }
            let mut sum = measurements[0].1.clone();
            for (_, g) in &measurements[1..] {
                sum = sum.plus(g)?;
            }
            report.kv("seeds", rows.len());
            let tau = delay(&mut report, &sum, configured, estimate)?;
            let scan = SeededScan {
                seed_grid: scenario.herald_grid,
                measurements,
            };
            let sections = cross_sections_from_seeds(&scan, &scenario.processing(tau, false)?)?;
            summarise(&mut report, "seeded", &sections);
            if let [(bin, _, _)] = rows.as_slice() {
                if let Some(m) = &sections.sections[*bin] {
                    let csv = mode_to_csv(&m.normalized()?, Some(&hash));
                    rd.write("signal_mode.csv", csv.as_bytes(), PRODUCER)?;
                }
            }
            let st = assemble_jsa(&sections, None);
            finish(rd, report, st)
        }
        MeasurementMode::Unseeded => {
            let (name, g) = unseeded_input(rd)?.ok_or_else(|| {
                CliError::Precondition(format!("no interferogram in {}; run `simulate` first", rd.root.display()))
            })?;
            report.kv("input", &name);
            let tau = delay(&mut report, &g, configured, estimate)?;
            let (est, dec) = reconstruct_mode(&g, &scenario.processing(tau, false)?)?;
            report.kv("masked_fraction", format!("{:.4}", est.masked_fraction));
            report.kv("hermiticity_residual", format!("{:.3e}", est.hermiticity_residual));
            report.kv("clipped_mass", format!("{:.3e}", dec.clipped_mass));
            report.kv("purity", format!("{:.4}", dec.purity()));
            let table = csv_string(|w| {
                w.write_record(["rank", "weight"])?;
                for (k, p) in dec.weights.iter().enumerate() {
                    w.write_record([(k + 1).to_string(), p.to_string()])?;
                }
                Ok(())
            });
            let table = with_hash_header(rd, table);
            rd.write(MODES_FILE, &table, PRODUCER)?;
            for (k, m) in dec.modes.iter().take(WRITTEN_MODES).enumerate() {
                let name = if k == 0 { "signal_mode.csv".to_string() } else { format!("signal_mode_{}.csv", k + 1) };
                rd.write(&name, mode_to_csv(&m.with_canonical_phase(), Some(&hash)).as_bytes(), PRODUCER)?;
            }
            rd.write("reconstruction_report.txt", report.as_bytes(), PRODUCER)?;
            rd.save_manifest()
        }
    }
}
