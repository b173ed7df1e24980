//! Synthetic time-tag streams.
//!
//! Coincidence events are Poisson in number, land on uniformly random
//! pulses and take their frequencies from a categorical draw over the
//! expected histogram (photons at bin centres). Each photon becomes a tag at
//! `pulse·T + D·(λ − λ_c) + jitter`, survives with the detector efficiency,
//! and only the earliest tag per pulse and channel is kept (detector dead
//! time). Extra uncorrelated singles are drawn from the axis marginals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{DetectorModel, FWHM_PER_SIGMA};
use crate::{
    ingest::{TagStream, TimeTagRecord, N_CHANNELS},
    Error, FrequencyGrid, HeraldedInterferogram, Interferogram, Result,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TagRates {
    /// Mean rate of generated coincidence events (before efficiency), 1/s.
    pub coincidences_per_s: f64,
    /// Extra uncorrelated detections per channel, 1/s.
    pub singles_per_s: [f64; N_CHANNELS],
}

/// Generator-side counts for checking the ingestion chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagBookkeeping {
    pub pulses: u64,
    pub generated_events: u64,
    /// Events whose photons all survived the efficiency thinning.
    pub detected_events: u64,
    pub singles: [u64; N_CHANNELS],
    /// Tags removed because an earlier tag shared their pulse and channel.
    pub dead_time_losses: u64,
}

#[derive(Debug, Clone)]
pub struct SynthesizedStream {
    pub stream: TagStream,
    pub bookkeeping: TagBookkeeping,
    pub warnings: Vec<String>,
}

struct Axis<'a> {
    channel: u8,
    grid: &'a FrequencyGrid,
}

fn cdf(weights: impl Iterator<Item = f64>) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let c: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if !(acc > 0.0) {
        return Err(Error::ZeroMatrix("cannot synthesise tags from an all-zero expectation"));
    }
    Ok(c)
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

#[allow(clippy::too_many_arguments)]
fn synthesize(
    shape: &[usize],
    flat: &[f64],
    axes: &[Axis<'_>],
    marginals: &[Vec<f64>],
    det: &DetectorModel,
    duration_s: f64,
    rates: &TagRates,
    seed: u64,
) -> Result<SynthesizedStream> {
    det.validate()?;
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::param("duration must be positive"));
    }
    if !(rates.coincidences_per_s >= 0.0) || rates.singles_per_s.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::param("rates must be non-negative"));
    }
    let rep_ps = det.rep_period_ps();
    let pulses = (duration_s * 1e12 / rep_ps).floor() as u64;
    if pulses == 0 {
        return Err(Error::param("duration shorter than one repetition period"));
    }
    let mut warnings = Vec::new();
    let used: Vec<usize> = axes.iter().map(|a| a.channel as usize).collect();
    for c in 0..N_CHANNELS {
        let rate = rates.singles_per_s[c] + if used.contains(&c) { rates.coincidences_per_s } else { 0.0 };
        let per_pulse = rate * rep_ps * 1e-12;
        if per_pulse > 1.0 {
            warnings.push(format!(
                "channel {c}: {per_pulse:.3} expected detections per pulse; pile-up is not modelled"
            ));
        }
    }
    for a in axes {
        let reach = [0, a.grid.len() - 1]
            .iter()
            .map(|&k| det.arrival_offset_ps(a.grid.detuning(k), a.grid.center()).abs())
            .fold(0.0, f64::max);
        if reach > rep_ps / 2.0 {
            warnings.push(format!(
                "channel {}: dispersed arrivals reach {reach:.0} ps, beyond half the repetition period",
                a.channel
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, det.jitter_fwhm_ps / FWHM_PER_SIGMA).expect("finite jitter");
    let joint = cdf(flat.iter().copied())?;
    let mut book = TagBookkeeping {
        pulses,
        ..Default::default()
    };
    // (pulse, channel, timestamp)
    let mut tags: Vec<(u64, u8, u64)> = Vec::new();
    let mut emit = |pulse: u64, channel: u8, detuning: f64, grid: &FrequencyGrid, rng: &mut ChaCha8Rng| {
        let off = det.arrival_offset_ps(detuning, grid.center()) + jitter.sample(rng);
        let t = (pulse as f64 * rep_ps + off).round().max(0.0) as u64;
        tags.push((pulse, channel, t));
    };

    let mean_events = rates.coincidences_per_s * duration_s;
    let n_events = if mean_events > 0.0 {
        Poisson::new(mean_events).expect("positive mean").sample(&mut rng) as u64
    } else {
        0
    };
    book.generated_events = n_events;
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..n_events {
        let pulse = rng.random_range(1..=pulses);
        let mut flat_idx = draw(&joint, &mut rng);
        for k in (0..shape.len()).rev() {
            idx[k] = flat_idx % shape[k];
            flat_idx /= shape[k];
        }
        let mut all = true;
        for (a, &i) in axes.iter().zip(&idx) {
            if rng.random::<f64>() < det.efficiency {
                emit(pulse, a.channel, a.grid.detuning(i), a.grid, &mut rng);
            } else {
                all = false;
            }
        }
        if all {
            book.detected_events += 1;
        }
    }

    for (a, m) in axes.iter().zip(marginals) {
        let c = a.channel as usize;
        let mean = rates.singles_per_s[c] * duration_s;
        if mean <= 0.0 {
            continue;
        }
        let n = Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64;
        book.singles[c] = n;
        let mcdf = cdf(m.iter().copied())?;
        for _ in 0..n {
            let pulse = rng.random_range(1..=pulses);
            let i = draw(&mcdf, &mut rng);
            emit(pulse, a.channel, a.grid.detuning(i), a.grid, &mut rng);
        }
    }

    tags.sort_unstable_by_key(|&(p, c, t)| (p, c, t));
    let before = tags.len();
    tags.dedup_by_key(|&mut (p, c, _)| (p, c));
    book.dead_time_losses = (before - tags.len()) as u64;
    let mut records: Vec<TimeTagRecord> = tags
        .into_iter()
        .map(|(_, channel, timestamp_ps)| TimeTagRecord { timestamp_ps, channel })
        .collect();
    records.sort_unstable();
    Ok(SynthesizedStream {
        stream: TagStream::new(det.rep_period_ns, records)?,
        bookkeeping: book,
        warnings,
    })
}

/// Three-fold stream from a heralded histogram: channel 0 carries `ω₁`,
/// channel 1 `ω₂` and channel 2 the herald.
pub fn synthesize_tag_stream(
    expected: &HeraldedInterferogram,
    det: &DetectorModel,
    duration_s: f64,
    rates: &TagRates,
    seed: u64,
) -> Result<SynthesizedStream> {
    let c = expected.counts();
    let (nh, n1, n2) = c.dim();
    let mh: Vec<f64> = (0..nh).map(|h| expected.slice_total(h)).collect();
    let m1: Vec<f64> = (0..n1).map(|i| c.slice(ndarray::s![.., i, ..]).sum()).collect();
    let m2: Vec<f64> = (0..n2).map(|j| c.slice(ndarray::s![.., .., j]).sum()).collect();
    let axes = [
        Axis {
            channel: 2,
            grid: expected.herald_grid(),
        },
        Axis {
            channel: 0,
            grid: expected.grid1(),
        },
        Axis {
            channel: 1,
            grid: expected.grid2(),
        },
    ];
    let flat: Vec<f64> = c.iter().copied().collect();
    synthesize(&[nh, n1, n2], &flat, &axes, &[mh, m1, m2], det, duration_s, rates, seed)
}

/// Two-fold stream (channels 0 and 1) from a 2D interferogram.
pub fn synthesize_twofold_stream(
    expected: &Interferogram,
    det: &DetectorModel,
    duration_s: f64,
    rates: &TagRates,
    seed: u64,
) -> Result<SynthesizedStream> {
    let c = expected.counts();
    let m1 = c.sum_axis(ndarray::Axis(1)).to_vec();
    let m2 = c.sum_axis(ndarray::Axis(0)).to_vec();
    let axes = [
        Axis {
            channel: 0,
            grid: expected.grid1(),
        },
        Axis {
            channel: 1,
            grid: expected.grid2(),
        },
    ];
    let flat: Vec<f64> = c.iter().copied().collect();
    synthesize(&[c.nrows(), c.ncols()], &flat, &axes, &[m1, m2], det, duration_s, rates, seed)
}
