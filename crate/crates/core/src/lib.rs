//! Simulation and reconstruction of the joint spectral mode of photon pairs
//! measured with spectrally resolved intensity interferometry.
//!
//! An unknown signal field is mixed with a delayed reference pulse of known
//! spectral mode on a balanced beam splitter, and the frequency-resolved
//! coincidence rate between the two outputs is recorded. The interference term
//! sits in a sideband of the two-dimensional Fourier transform of that
//! interferogram; isolating it and dividing out the reference yields the
//! signal's spectral coherence `ψ(ω₁)ψ*(ω₂)`, amplitude and phase. Conditioning on
//! the frequency of a herald photon gives cross-sections of the joint spectral
//! amplitude, which are phase-stitched into the full complex JSA.
//!
//! Modules, bottom-up:
//!
//! - [`grid`], [`mode`], [`jsa`], [`interferogram`]: shared containers and unit
//!   conventions (angular frequency in rad/fs, time in fs, GDD in fs²).
//! - [`io`]: CSV and little-endian binary matrix formats.
//! - [`forward`]: source models, expected/sampled interferograms, detector
//!   blur and synthetic time-tag streams.
//! - [`reconstruction`]: sideband location, Fourier filtering, reference
//!   division, mode extraction and JSA assembly.
//! - [`analysis`]: Schmidt decomposition, g⁽²⁾, chirp fitting, visibility.
//! - [`ingest`]: the `TTG1` time-tag format, coincidence search and
//!   histogramming.
//! - [`presets`]: the four reference measurement scenarios.

pub mod analysis;
pub mod error;
mod fft2;
pub mod forward;
pub mod grid;
pub mod ingest;
pub mod interferogram;
pub mod io;
pub mod jsa;
pub mod mode;
pub mod presets;
pub mod reconstruction;

pub use error::{Error, ErrorKind, Result};
pub use grid::FrequencyGrid;
pub use interferogram::{HeraldedInterferogram, Interferogram};
pub use jsa::Jsa;
pub use mode::{inner_product, SpectralMode};

/// Complex scalar used for every amplitude in the crate.
pub type C64 = num_complex::Complex64;
