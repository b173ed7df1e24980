//! Pulse-aligned coincidence search.
//!
//! Every tag is assigned to its nearest pulse epoch,
//! `pulse = floor((t + T/2)/T)`, with offset `t − pulse·T`. Tags whose
//! offset exceeds the acceptance window are ignored. A pulse yields an event
//! when exactly the fold's channel set is present with one tag each; pulses
//! with a repeated channel are rejected.

use super::{TagStream, TimeTagRecord, N_CHANNELS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fold {
    /// Outputs `c` and `d` only.
    Two,
    /// Outputs `c`, `d` and the herald.
    Three,
}

impl Fold {
    fn mask(self) -> u8 {
        match self {
            Fold::Two => 0b011,
            Fold::Three => 0b111,
        }
    }

    pub fn order(self) -> u8 {
        match self {
            Fold::Two => 2,
            Fold::Three => 3,
        }
    }

    pub fn from_order(n: u8) -> Result<Self> {
        match n {
            2 => Ok(Fold::Two),
            3 => Ok(Fold::Three),
            _ => Err(Error::param(format!("fold must be 2 or 3, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceEvent {
    pub pulse_index: u64,
    /// Arrival offset from the pulse epoch per channel, ps.
    pub offsets_ps: [Option<f64>; N_CHANNELS],
    pub fold: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoincidenceStats {
    pub records: u64,
    pub events: u64,
    pub outside_window: u64,
    pub multi_hit_pulses: u64,
    /// Pulses with in-window tags on a channel set other than the fold's.
    pub incomplete_pulses: u64,
    pub per_channel: [u64; N_CHANNELS],
}

/// Incremental coincidence search; feeding a stream in any number of
/// chunks gives the same events as one call.
#[derive(Debug, Clone)]
pub struct CoincidenceFinder {
    rep_ps: f64,
    integral_rep: Option<u64>,
    window_ps: f64,
    fold: Fold,
    current: Option<u64>,
    hits: [u32; N_CHANNELS],
    offsets: [f64; N_CHANNELS],
    last_ts: Option<u64>,
    stats: CoincidenceStats,
}

/// Default acceptance window: half the repetition period minus 2 %.
pub fn default_window_ps(rep_period_ns: f64) -> f64 {
    0.49 * rep_period_ns * 1e3
}

impl CoincidenceFinder {
    pub fn new(rep_period_ns: f64, window_ps: f64, fold: Fold) -> Result<Self> {
        if !(rep_period_ns > 0.0 && rep_period_ns.is_finite()) {
            return Err(Error::param("repetition period must be positive"));
        }
        let rep_ps = rep_period_ns * 1e3;
        if !(window_ps > 0.0) {
            return Err(Error::param("coincidence window must be positive"));
        }
        if window_ps > rep_ps / 2.0 {
            return Err(Error::CoincidenceWindow {
                window_ps,
                limit_ps: rep_ps / 2.0,
            });
        }
        let integral_rep = (rep_ps.fract() == 0.0 && rep_ps < 1e15).then_some(rep_ps as u64);
        Ok(Self {
            rep_ps,
            integral_rep,
            window_ps,
            fold,
            current: None,
            hits: [0; N_CHANNELS],
            offsets: [0.0; N_CHANNELS],
            last_ts: None,
            stats: CoincidenceStats::default(),
        })
    }

    /// Nearest pulse and the offset from its epoch.
    pub fn assign(&self, t: u64) -> (u64, f64) {
        match self.integral_rep {
            Some(rep) => {
                let pulse = ((2 * t as u128 + rep as u128) / (2 * rep as u128)) as u64;
                let off = t as i128 - pulse as i128 * rep as i128;
                (pulse, off as f64)
            }
            None => {
                let pulse = ((t as f64 + self.rep_ps / 2.0) / self.rep_ps).floor() as u64;
                (pulse, t as f64 - pulse as f64 * self.rep_ps)
            }
        }
    }

    fn close(&mut self, out: &mut Vec<CoincidenceEvent>) {
        let Some(pulse) = self.current.take() else { return };
        let hits = std::mem::take(&mut self.hits);
        if hits.iter().any(|&h| h > 1) {
            self.stats.multi_hit_pulses += 1;
            return;
        }
        let mask = hits.iter().enumerate().fold(0u8, |m, (c, &h)| if h == 1 { m | (1 << c) } else { m });
        if mask == self.fold.mask() {
            let mut offsets_ps = [None; N_CHANNELS];
            for (c, o) in offsets_ps.iter_mut().enumerate() {
                if mask & (1 << c) != 0 {
                    *o = Some(self.offsets[c]);
                }
            }
            out.push(CoincidenceEvent {
                pulse_index: pulse,
                offsets_ps,
                fold: self.fold.order(),
            });
            self.stats.events += 1;
        } else if mask != 0 {
            self.stats.incomplete_pulses += 1;
        }
    }

    pub fn push(&mut self, records: &[TimeTagRecord], out: &mut Vec<CoincidenceEvent>) -> Result<()> {
        for r in records {
            if let Some(prev) = self.last_ts {
                if r.timestamp_ps < prev {
                    return Err(Error::DecreasingTimestamp {
                        offset: self.stats.records,
                        previous: prev,
                        current: r.timestamp_ps,
                    });
                }
            }
            let ch = r.channel as usize;
            if ch >= N_CHANNELS {
                return Err(Error::param(format!("channel {ch} outside 0..=2")));
            }
            self.last_ts = Some(r.timestamp_ps);
            self.stats.records += 1;
            self.stats.per_channel[ch] += 1;
            let (pulse, off) = self.assign(r.timestamp_ps);
            if off.abs() > self.window_ps {
                self.stats.outside_window += 1;
                continue;
            }
            if self.current != Some(pulse) {
                self.close(out);
                self.current = Some(pulse);
            }
            self.hits[ch] += 1;
            self.offsets[ch] = off;
        }
        Ok(())
    }

    /// Flushes the last open pulse.
    pub fn finish(mut self, out: &mut Vec<CoincidenceEvent>) -> CoincidenceStats {
        self.close(out);
        self.stats
    }
}

/// One-shot search over a whole stream.
pub fn find_coincidences(
    stream: &TagStream,
    window_ps: f64,
    fold: Fold,
) -> Result<(Vec<CoincidenceEvent>, CoincidenceStats)> {
    let mut f = CoincidenceFinder::new(stream.rep_period_ns, window_ps, fold)?;
    let mut out = Vec::new();
    f.push(&stream.records, &mut out)?;
    let stats = f.finish(&mut out);
    Ok((out, stats))
}
