//! Time-tag acquisition chain: the `TTG1` stream format, pulse-aligned
//! coincidence search, arrival-time to frequency mapping and histogramming.

mod coincidence;
mod format;
mod histogram;

pub use coincidence::{default_window_ps, find_coincidences, CoincidenceEvent, CoincidenceFinder, CoincidenceStats, Fold};
pub use format::{
    parse_stream, serialize, write_stream, TagHeader, TagReader, TagStream, TimeTagRecord, REORDER_CAPACITY,
    TTG1_HEADER_LEN, TTG1_MAGIC, TTG1_RECORD_LEN,
};
pub use histogram::{histogram_2d, histogram_3d, offsets_to_frequencies, ChannelCenters, HistogramStats};

/// Channel of beam-splitter output `c` (first interferogram axis).
pub const CH_OUT_C: u8 = 0;
/// Channel of beam-splitter output `d` (second interferogram axis).
pub const CH_OUT_D: u8 = 1;
pub const CH_HERALD: u8 = 2;
pub const N_CHANNELS: usize = 3;

#[cfg(test)]
mod tests;
