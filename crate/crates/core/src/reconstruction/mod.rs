//! Inversion of measured interferograms: sideband isolation, reference
//! division, mode extraction and JSA assembly from cross-sections.

mod filter;
pub(crate) use filter::apply_window;
mod modes;
mod stitch;

use rayon::prelude::*;

use crate::{Error, FrequencyGrid, HeraldedInterferogram, Interferogram, Result, SpectralMode};

pub use filter::{
    fourier_filter, fourier_plane, locate_sideband, FilterSpec, FilteredSideband, FourierPlane, SidebandLocation,
    WindowShape, FILTER_PAD,
    LOCATE_PAD, SIDEBAND_SNR,
};
pub use modes::{
    extract_modes, remove_reference, ModeDecomposition, ModeEstimate, DEFAULT_REFERENCE_THRESHOLD, SUPPORT_LEVEL,
};
pub use stitch::{
    assemble_jsa, CrossSections, SliceReport, StitchedJsa, STITCH_MAX_ITERATIONS, STITCH_TOLERANCE,
};

/// Settings shared by every slice of a reconstruction.
#[derive(Debug, Clone)]
pub struct SliceProcessing {
    pub reference: SpectralMode,
    pub tau: f64,
    pub filter: FilterSpec,
    pub threshold: f64,
}

/// Filter, divide and decompose one interferogram.
pub fn reconstruct_mode(g: &Interferogram, p: &SliceProcessing) -> Result<(ModeEstimate, ModeDecomposition)> {
    let sb = fourier_filter(g, &p.filter)?;
    let est = remove_reference(&sb, &p.reference, p.tau, p.threshold)?;
    let dec = extract_modes(&est)?;
    Ok((est, dec))
}

fn section(g: &Interferogram, p: &SliceProcessing) -> Result<Option<(SpectralMode, SliceReport)>> {
    if g.total() == 0.0 {
        return Ok(None);
    }
    match reconstruct_mode(g, p) {
        Ok((est, dec)) => Ok(Some((
            dec.leading_field(),
            SliceReport {
                masked_fraction: est.masked_fraction,
                hermiticity_residual: est.hermiticity_residual,
                clipped_mass: dec.clipped_mass,
                purity: dec.purity(),
            },
        ))),
        Err(Error::ZeroMatrix(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Cross-sections `f(·, ω_h)` from each herald slice of a histogram.
pub fn reconstruct_heralded(h: &HeraldedInterferogram, p: &SliceProcessing) -> Result<CrossSections> {
    let results: Vec<Option<(SpectralMode, SliceReport)>> = (0..h.herald_grid().len())
        .into_par_iter()
        .map(|j| section(&h.slice(j), p))
        .collect::<Result<_>>()?;
    let mut out = CrossSections::new(*h.grid1(), *h.herald_grid());
    for (j, r) in results.into_iter().enumerate() {
        if let Some((m, rep)) = r {
            out.sections[j] = Some(m);
            out.reports[j] = Some(rep);
        }
    }
    Ok(out)
}

/// Two-fold interferograms of a seeded signal, keyed by seed detuning on
/// `seed_grid`.
#[derive(Debug, Clone)]
pub struct SeededScan {
    pub seed_grid: FrequencyGrid,
    pub measurements: Vec<(f64, Interferogram)>,
}

pub fn cross_sections_from_seeds(scan: &SeededScan, p: &SliceProcessing) -> Result<CrossSections> {
    let first = scan
        .measurements
        .first()
        .ok_or_else(|| Error::param("no seeded measurements"))?;
    let mut out = CrossSections::new(*first.1.grid1(), scan.seed_grid);
    for (seed, g) in &scan.measurements {
        g.grid1().require_match(&out.signal_grid, "seeded interferograms")?;
        let j = scan
            .seed_grid
            .index_of(*seed)
            .ok_or_else(|| Error::param(format!("seed detuning {seed} rad/fs lies outside the seed grid")))?;
        if out.sections[j].is_some() {
            return Err(Error::param(format!("two seeds fall in seed bin {j}")));
        }
        if let Some((m, rep)) = section(g, p)? {
            out.sections[j] = Some(m);
            out.reports[j] = Some(rep);
        }
    }
    Ok(out)
}

/// Seeded (stimulated) reconstruction: one cross-section per seed, then
/// stitching across the seed axis.
pub fn reconstruct_seeded(scan: &SeededScan, p: &SliceProcessing) -> Result<StitchedJsa> {
    let a = cross_sections_from_seeds(scan, p)?;
    assemble_jsa(&a, None)
}
