use ndarray::{Array2, Array3};

use super::{CoincidenceEvent, CH_HERALD, CH_OUT_C, CH_OUT_D, N_CHANNELS};
use crate::{
    forward::DetectorModel, grid::wavelength_to_angular, Error, FrequencyGrid, HeraldedInterferogram,
    Interferogram, Result,
};

/// Absolute centre frequency (rad/fs) each channel's offsets are measured
/// against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCenters(pub [f64; N_CHANNELS]);

impl ChannelCenters {
    pub fn from_wavelengths_nm(nm: [f64; N_CHANNELS]) -> Self {
        Self(nm.map(wavelength_to_angular))
    }

    /// Channels 0 and 1 on the two interferogram axes, 2 on the herald axis.
    pub fn from_grids(grid1: &FrequencyGrid, grid2: &FrequencyGrid, herald: &FrequencyGrid) -> Self {
        Self([grid1.center(), grid2.center(), herald.center()])
    }
}

/// Detunings (rad/fs) of the event's photons, `Δλ = offset/D`.
pub fn offsets_to_frequencies(
    ev: &CoincidenceEvent,
    det: &DetectorModel,
    centers: &ChannelCenters,
) -> Result<[Option<f64>; N_CHANNELS]> {
    det.validate()?;
    let mut out = [None; N_CHANNELS];
    for c in 0..N_CHANNELS {
        out[c] = ev.offsets_ps[c].map(|o| det.detuning_from_offset(o, centers.0[c]));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HistogramStats {
    pub events: u64,
    pub binned: u64,
    pub dropped_out_of_range: u64,
    pub dropped_missing_channel: u64,
}

impl HistogramStats {
    pub fn merge(&mut self, other: &HistogramStats) {
        self.events += other.events;
        self.binned += other.binned;
        self.dropped_out_of_range += other.dropped_out_of_range;
        self.dropped_missing_channel += other.dropped_missing_channel;
    }
}

fn bin_event(
    ev: &CoincidenceEvent,
    det: &DetectorModel,
    centers: &ChannelCenters,
    axes: &[(u8, &FrequencyGrid)],
    stats: &mut HistogramStats,
) -> Result<Option<[usize; 3]>> {
    stats.events += 1;
    let w = offsets_to_frequencies(ev, det, centers)?;
    let mut idx = [0usize; 3];
    for (k, (ch, g)) in axes.iter().enumerate() {
        let Some(d) = w[*ch as usize] else {
            stats.dropped_missing_channel += 1;
            return Ok(None);
        };
        match g.index_of(d) {
            Some(i) => idx[k] = i,
            None => {
                stats.dropped_out_of_range += 1;
                return Ok(None);
            }
        }
    }
    stats.binned += 1;
    Ok(Some(idx))
}

/// Two-fold histogram over channels 0 and 1 (any herald tag is ignored).
pub fn histogram_2d(
    events: &[CoincidenceEvent],
    det: &DetectorModel,
    centers: &ChannelCenters,
    grid1: &FrequencyGrid,
    grid2: &FrequencyGrid,
) -> Result<(Interferogram, HistogramStats)> {
    let mut counts = Array2::<f64>::zeros((grid1.len(), grid2.len()));
    let mut stats = HistogramStats::default();
    let axes = [(CH_OUT_C, grid1), (CH_OUT_D, grid2)];
    for ev in events {
        if let Some([i, j, _]) = bin_event(ev, det, centers, &axes, &mut stats)? {
            counts[[i, j]] += 1.0;
        }
    }
    Ok((Interferogram::new(*grid1, *grid2, counts)?, stats))
}

/// Three-fold histogram `N(ω_h, ω₁, ω₂)`.
pub fn histogram_3d(
    events: &[CoincidenceEvent],
    det: &DetectorModel,
    centers: &ChannelCenters,
    herald_grid: &FrequencyGrid,
    grid1: &FrequencyGrid,
    grid2: &FrequencyGrid,
) -> Result<(HeraldedInterferogram, HistogramStats)> {
    if events.iter().any(|e| e.fold != 3) {
        return Err(Error::param("three-fold histogram needs three-fold events"));
    }
    let mut counts = Array3::<f64>::zeros((herald_grid.len(), grid1.len(), grid2.len()));
    let mut stats = HistogramStats::default();
    let axes = [(CH_HERALD, herald_grid), (CH_OUT_C, grid1), (CH_OUT_D, grid2)];
    for ev in events {
        if let Some([h, i, j]) = bin_event(ev, det, centers, &axes, &mut stats)? {
            counts[[h, i, j]] += 1.0;
        }
    }
    Ok((HeraldedInterferogram::new(*herald_grid, *grid1, *grid2, counts)?, stats))
}
