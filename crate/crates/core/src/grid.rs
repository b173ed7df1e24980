//! Uniform angular-frequency grids and unit conversions.
//!
//! Working units are angular frequency in rad/fs, time in fs and group-delay
//! dispersion in fs². Grid coordinates are detunings from a stored centre
//! frequency.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

/// Minimum number of bins on any grid.
pub const MIN_BINS: usize = 8;

/// Absolute angular frequency (rad/fs) of a vacuum wavelength in nm.
pub fn wavelength_to_angular(lambda_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_NM_PER_FS / lambda_nm
}

/// Vacuum wavelength in nm of an absolute angular frequency in rad/fs.
pub fn angular_to_wavelength(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_NM_PER_FS / omega
}

/// Ordinary frequency in GHz to angular frequency in rad/fs.
pub fn ghz_to_angular(ghz: f64) -> f64 {
    2.0 * PI * ghz * 1e-6
}

pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e-6)
}

pub fn thz_to_angular(thz: f64) -> f64 {
    ghz_to_angular(thz * 1e3)
}

/// Angular-frequency width (rad/fs) of a small wavelength interval around
/// `center_nm`, `|Δω| = 2πc·Δλ/λ²`.
pub fn wavelength_width_to_angular(delta_nm: f64, center_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_NM_PER_FS * delta_nm.abs() / (center_nm * center_nm)
}

/// Uniform grid of detunings about a centre frequency, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    spacing: f64,
    n_bins: usize,
}

impl FrequencyGrid {
    /// Grid of `n_bins` detunings covering `[-span/2, span/2]`.
    pub fn new(center: f64, span: f64, n_bins: usize) -> Result<Self> {
        if n_bins < MIN_BINS {
            return Err(Error::param(format!(
                "grid needs at least {MIN_BINS} bins, got {n_bins}"
            )));
        }
        if !span.is_finite() || span <= 0.0 {
            return Err(Error::param(format!("grid span must be positive, got {span}")));
        }
        Self::from_spacing(center, span / (n_bins - 1) as f64, n_bins)
    }

    pub fn from_spacing(center: f64, spacing: f64, n_bins: usize) -> Result<Self> {
        if !center.is_finite() || center <= 0.0 {
            return Err(Error::param(format!(
                "grid centre frequency must be positive, got {center}"
            )));
        }
        if !spacing.is_finite() || spacing <= 0.0 {
            return Err(Error::param(format!("grid spacing must be positive, got {spacing}")));
        }
        if n_bins < MIN_BINS {
            return Err(Error::param(format!(
                "grid needs at least {MIN_BINS} bins, got {n_bins}"
            )));
        }
        Ok(Self {
            center,
            spacing,
            n_bins,
        })
    }

    /// Grid whose spacing is as close as possible to `target_spacing` while
    /// covering `span` exactly: `n_bins = round(span / target) + 1`.
    pub fn with_target_spacing(center: f64, span: f64, target_spacing: f64) -> Result<Self> {
        if !target_spacing.is_finite() || target_spacing <= 0.0 {
            return Err(Error::param("target spacing must be positive"));
        }
        let n = (span / target_spacing).round() as usize + 1;
        Self::new(center, span, n)
    }

    /// Centre frequency (absolute, rad/fs).
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn span(&self) -> f64 {
        self.spacing * (self.n_bins - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_bins
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Detuning of bin `k`: `-span/2 + k·Δω`.
    pub fn detuning(&self, k: usize) -> f64 {
        -0.5 * self.span() + k as f64 * self.spacing
    }

    pub fn absolute(&self, k: usize) -> f64 {
        self.center + self.detuning(k)
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n_bins).map(|k| self.detuning(k)).collect()
    }

    /// Fractional bin coordinate of a detuning.
    pub fn position(&self, detuning: f64) -> f64 {
        (detuning + 0.5 * self.span()) / self.spacing
    }

    /// Bin whose half-open cell `[centre - Δω/2, centre + Δω/2)` contains
    /// `detuning`, or `None` when it falls outside the grid.
    pub fn index_of(&self, detuning: f64) -> Option<usize> {
        let p = (self.position(detuning) + 0.5).floor();
        if p.is_finite() && p >= 0.0 && p < self.n_bins as f64 {
            Some(p as usize)
        } else {
            None
        }
    }

    /// Centre wavelength in nm.
    pub fn center_wavelength_nm(&self) -> f64 {
        angular_to_wavelength(self.center)
    }

    /// Time coordinates (fs) of an `n_fft`-point DFT over this grid, in the
    /// usual FFT ordering (non-negative times first).
    pub fn fft_times(&self, n_fft: usize) -> Vec<f64> {
        let dt = 2.0 * PI / (n_fft as f64 * self.spacing);
        (0..n_fft)
            .map(|k| {
                let k = if k < n_fft.div_ceil(2) {
                    k as f64
                } else {
                    k as f64 - n_fft as f64
                };
                k * dt
            })
            .collect()
    }

    /// Equality up to a relative tolerance of 1e-9 on centre and spacing.
    pub fn matches(&self, other: &FrequencyGrid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        self.n_bins == other.n_bins
            && close(self.center, other.center)
            && close(self.spacing, other.spacing)
    }

    pub(crate) fn require_match(&self, other: &FrequencyGrid, what: &str) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {self:?} vs {other:?}"
            )))
        }
    }

    /// Index of the bin closest to zero detuning.
    pub fn zero_index(&self) -> usize {
        self.index_of(0.0).unwrap_or(self.n_bins / 2)
    }
}
