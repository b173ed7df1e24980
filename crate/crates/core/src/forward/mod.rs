//! Parametric photon-pair sources and the expected, sampled and tag-level
//! measurement records they produce.
//!
//! The signal field `ψ` (or a mixture `Σ pᵢ φᵢφᵢ*`) and a delayed coherent
//! reference `α(ω)e^{iωτ}` meet on a balanced beam splitter. The coincidence
//! density between outputs `c` and `d` is
//!
//! ```text
//! G = ¼ [ S + n(|α₁|²ρ₂₂ + ρ₁₁|α₂|²) + |α₁α₂|² − 2n·Re(ρ₁₂ α₁* α₂ e^{i(ω₂−ω₁)τ}) ]
//! ```
//!
//! with `ρ` the normalised signal coherence, `n` the signal mean photon
//! number and `S` the signal-signal term fixed by the photon statistics
//! (`0` for a single photon, `n²Σpᵢ|φᵢ₁φᵢ₂|²` coherent, `n²(ρ₁₁ρ₂₂+|ρ₁₂|²)`
//! thermal). The reference keeps its own normalisation: `‖α‖²` is the mean
//! number of reference photons per pulse.

mod blur;
mod monte_carlo;
mod sampling;
mod tags;

use std::f64::consts::PI;

use ndarray::{Array2, Array3, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{
    grid::{angular_to_wavelength, wavelength_to_angular},
    FrequencyGrid, HeraldedInterferogram, Interferogram, Jsa, Error, Result, SpectralMode, C64,
};

pub use blur::{apply_detector_blur, apply_detector_blur_3d, blur_kernel};
pub use monte_carlo::{monte_carlo_interferogram, MonteCarloEstimate, MC_BLOCK_SHOTS};
pub(crate) use sampling::multinomial;
pub use sampling::{sample_counts, sample_counts_3d, with_flat_background};
pub use tags::{synthesize_tag_stream, synthesize_twofold_stream, TagBookkeeping, TagRates, SynthesizedStream};

/// Minimum fringe period `2π/τ`, in bins, accepted by the forward model.
pub const MIN_FRINGE_PERIOD_BINS: f64 = 2.5;

/// `sinc²` and the Gaussian intensity share their half-maximum points when
/// the sinc argument is `u·SINC_MATCH/σ`.
const SINC_MATCH: f64 = 1.671_430_750_130_011;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMatching {
    #[default]
    Gaussian,
    /// Unfiltered `sinc` ridge with the same half-maximum width.
    Sinc,
}

/// Parametric SPDC source: `f(ω₁,ω₂) = A(ω₁+ω₂)·φ(u)` with
/// `u = −ω₁ sinθ + ω₂ cosθ` measured across the phase-matching ridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    /// Amplitude standard deviation of the pump envelope `|A|` (rad/fs).
    pub pump_bandwidth: f64,
    /// Pump group-delay dispersion β (fs²).
    pub pump_gdd: f64,
    /// Amplitude standard deviation of the phase-matching ridge (rad/fs).
    pub phasematch_bandwidth: f64,
    /// Ridge orientation θ (rad); 45° for equal group-velocity mismatch.
    pub phasematch_angle: f64,
    pub phasematch_shape: PhaseMatching,
}

impl SourceModel {
    /// Source whose unchirped JSA factorises into Gaussians of amplitude
    /// standard deviations `std1` and `std2`.
    pub fn separable(std1: f64, std2: f64, pump_gdd: f64) -> Result<Self> {
        if !(std1 > 0.0 && std2 > 0.0 && std1.is_finite() && std2.is_finite()) {
            return Err(Error::param("marginal bandwidths must be positive"));
        }
        let a11 = 1.0 / (2.0 * std1 * std1);
        let a22 = 1.0 / (2.0 * std2 * std2);
        let theta = (a11 / a22).atan();
        let (s, c) = theta.sin_cos();
        let ridge = a22 / (c * (c + s));
        let pump = ridge * s * c;
        let m = Self {
            pump_bandwidth: (1.0 / (2.0 * pump)).sqrt(),
            pump_gdd,
            phasematch_bandwidth: (1.0 / (2.0 * ridge)).sqrt(),
            phasematch_angle: theta,
            phasematch_shape: PhaseMatching::Gaussian,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump_bandwidth > 0.0 && self.pump_bandwidth.is_finite()) {
            return Err(Error::param("pump bandwidth must be positive"));
        }
        if !(self.phasematch_bandwidth > 0.0 && self.phasematch_bandwidth.is_finite()) {
            return Err(Error::param("phase-matching bandwidth must be positive"));
        }
        if !self.pump_gdd.is_finite() || !self.phasematch_angle.is_finite() {
            return Err(Error::param("pump GDD and phase-matching angle must be finite"));
        }
        Ok(())
    }

    fn pump(&self, w: f64) -> C64 {
        let s = self.pump_bandwidth;
        C64::from_polar((-w * w / (2.0 * s * s)).exp(), -0.5 * self.pump_gdd * w * w)
    }

    fn ridge(&self, w1: f64, w2: f64) -> f64 {
        let (s, c) = self.phasematch_angle.sin_cos();
        let u = -w1 * s + w2 * c;
        let sig = self.phasematch_bandwidth;
        match self.phasematch_shape {
            PhaseMatching::Gaussian => (-u * u / (2.0 * sig * sig)).exp(),
            PhaseMatching::Sinc => {
                let x = u * SINC_MATCH / sig;
                if x.abs() < 1e-8 {
                    1.0
                } else {
                    x.sin() / x
                }
            }
        }
    }
}

/// Pump envelope `|A(ω)|e^{−i(β/2)ω²}` on a grid of pump detunings.
pub fn pump_mode(model: &SourceModel, grid: &FrequencyGrid) -> Result<SpectralMode> {
    model.validate()?;
    Ok(SpectralMode::from_fn(*grid, |w| model.pump(w)))
}

/// Normalised JSA of the source on `grid1 × grid2`.
pub fn build_jsa(model: &SourceModel, grid1: &FrequencyGrid, grid2: &FrequencyGrid) -> Result<Jsa> {
    model.validate()?;
    Jsa::from_fn(*grid1, *grid2, |w1, w2| model.pump(w1 + w2) * model.ridge(w1, w2)).normalized()
}

/// Photon statistics of the signal arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SignalStatistics {
    SinglePhoton,
    Coherent { mean_photons: f64 },
    Thermal { mean_photons: f64 },
}

impl SignalStatistics {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SignalStatistics::SinglePhoton => Ok(()),
            SignalStatistics::Coherent { mean_photons } | SignalStatistics::Thermal { mean_photons } => {
                if mean_photons > 0.0 && mean_photons.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param(format!("mean photon number must be positive, got {mean_photons}")))
                }
            }
        }
    }

    pub fn mean_photons(&self) -> f64 {
        match *self {
            SignalStatistics::SinglePhoton => 1.0,
            SignalStatistics::Coherent { mean_photons } | SignalStatistics::Thermal { mean_photons } => mean_photons,
        }
    }
}

/// Dispersive single-photon spectrometer: a fibre maps wavelength to arrival
/// time, and timing jitter sets the spectral resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Group-delay dispersion in ps/nm (signed).
    pub dispersion_ps_per_nm: f64,
    pub jitter_fwhm_ps: f64,
    pub efficiency: f64,
    pub rep_period_ns: f64,
}

/// `FWHM / σ` of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.dispersion_ps_per_nm.is_finite() && self.dispersion_ps_per_nm != 0.0) {
            return Err(Error::param("dispersion must be finite and non-zero"));
        }
        if !(self.jitter_fwhm_ps >= 0.0 && self.jitter_fwhm_ps.is_finite()) {
            return Err(Error::param("jitter must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::param(format!("efficiency {} outside [0, 1]", self.efficiency)));
        }
        if !(self.rep_period_ns > 0.0 && self.rep_period_ns.is_finite()) {
            return Err(Error::param("repetition period must be positive"));
        }
        Ok(())
    }

    pub fn rep_period_ps(&self) -> f64 {
        self.rep_period_ns * 1e3
    }

    /// Wavelength resolution `jitter/|D|` in nm.
    pub fn blur_fwhm_nm(&self) -> f64 {
        self.jitter_fwhm_ps / self.dispersion_ps_per_nm.abs()
    }

    /// Angular-frequency FWHM of the blur at `center_nm`.
    pub fn blur_fwhm_angular(&self, center_nm: f64) -> f64 {
        crate::grid::wavelength_width_to_angular(self.blur_fwhm_nm(), center_nm)
    }

    pub fn blur_sigma_angular(&self, center_nm: f64) -> f64 {
        self.blur_fwhm_angular(center_nm) / FWHM_PER_SIGMA
    }

    /// Arrival-time offset (ps) of a photon at `detuning` from a channel
    /// centred on absolute frequency `center`: `D·(λ(ω) − λ_c)`.
    pub fn arrival_offset_ps(&self, detuning: f64, center: f64) -> f64 {
        let lc = angular_to_wavelength(center);
        let l = angular_to_wavelength(center + detuning);
        self.dispersion_ps_per_nm * (l - lc)
    }

    /// Inverse of [`DetectorModel::arrival_offset_ps`].
    pub fn detuning_from_offset(&self, offset_ps: f64, center: f64) -> f64 {
        let lc = angular_to_wavelength(center);
        wavelength_to_angular(lc + offset_ps / self.dispersion_ps_per_nm) - center
    }
}

/// Signal state entering the interferometer.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalState {
    Pure(SpectralMode),
    /// Weighted modes `{pᵢ, φᵢ}`; weights and modes are normalised on use and
    /// the modes need not be orthogonal.
    Mixture(Vec<(f64, SpectralMode)>),
}

impl SignalState {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        match self {
            SignalState::Pure(m) => Ok(*m.grid()),
            SignalState::Mixture(parts) => parts
                .first()
                .map(|(_, m)| *m.grid())
                .ok_or_else(|| Error::param("empty mixture")),
        }
    }

    /// Normalised `(pᵢ, φᵢ)` components.
    pub fn components(&self) -> Result<Vec<(f64, SpectralMode)>> {
        let raw: Vec<(f64, &SpectralMode)> = match self {
            SignalState::Pure(m) => vec![(1.0, m)],
            SignalState::Mixture(parts) => parts.iter().map(|(p, m)| (*p, m)).collect(),
        };
        let grid = self.grid()?;
        let total: f64 = raw.iter().map(|(p, _)| *p).sum();
        if raw.iter().any(|(p, _)| !(*p >= 0.0) || !p.is_finite()) || total <= 0.0 {
            return Err(Error::param("mixture weights must be non-negative with a positive sum"));
        }
        raw.into_iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, m)| {
                grid.require_match(m.grid(), "mixture component")?;
                Ok((p / total, m.normalized()?))
            })
            .collect()
    }

    /// Normalised coherence matrix `ρ(ω₁,ω₂) = Σ pᵢ φᵢ(ω₁)φᵢ*(ω₂)`.
    pub fn coherence(&self) -> Result<Array2<C64>> {
        let comps = self.components()?;
        let n = self.grid()?.len();
        let mut rho = Array2::<C64>::zeros((n, n));
        for (p, m) in &comps {
            let a = m.amplitudes();
            for i in 0..n {
                let ai = a[i] * *p;
                for j in 0..n {
                    rho[[i, j]] += ai * a[j].conj();
                }
            }
        }
        Ok(rho)
    }
}

/// Fails when the fringe period `2π/|τ|` is shorter than
/// [`MIN_FRINGE_PERIOD_BINS`] bins.
pub fn check_aliasing(grid: &FrequencyGrid, tau: f64) -> Result<()> {
    if !tau.is_finite() {
        return Err(Error::param("delay must be finite"));
    }
    if tau == 0.0 {
        return Ok(());
    }
    let period = 2.0 * PI / (tau.abs() * grid.spacing());
    if period < MIN_FRINGE_PERIOD_BINS {
        return Err(Error::Aliasing {
            fringe_period_bins: period,
            required_bins: MIN_FRINGE_PERIOD_BINS,
        });
    }
    Ok(())
}

/// `ζ = |α₁ψ₂|² + |ψ₁α₂|² + |α₁α₂|²`.
pub fn zeta(psi: &SpectralMode, alpha: &SpectralMode) -> Result<Array2<f64>> {
    psi.grid().require_match(alpha.grid(), "zeta")?;
    let (p, a) = (psi.amplitudes(), alpha.amplitudes());
    let n = p.len();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        (a[i] * p[j]).norm_sqr() + (p[i] * a[j]).norm_sqr() + (a[i] * a[j]).norm_sqr()
    }))
}

/// `Γ = ψ₁ψ₂* α₁* α₂ e^{i(ω₂−ω₁)τ}`.
pub fn gamma(psi: &SpectralMode, alpha: &SpectralMode, tau: f64) -> Result<Array2<C64>> {
    psi.grid().require_match(alpha.grid(), "gamma")?;
    let g = *psi.grid();
    let (p, a) = (psi.amplitudes(), alpha.amplitudes());
    let n = p.len();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        let ph = C64::from_polar(1.0, (g.detuning(j) - g.detuning(i)) * tau);
        p[i] * p[j].conj() * a[i].conj() * a[j] * ph
    }))
}

/// Expected coincidence density `⟨Ĝ(ω₁,ω₂)⟩` of a signal state interfered
/// with the delayed reference.
pub fn expected_interferogram(
    state: &SignalState,
    reference: &SpectralMode,
    tau: f64,
    stats: SignalStatistics,
) -> Result<Interferogram> {
    stats.validate()?;
    let grid = state.grid()?;
    grid.require_match(reference.grid(), "signal vs reference")?;
    check_aliasing(&grid, tau)?;
    let n_mean = stats.mean_photons();
    let comps = state.components()?;
    let n = grid.len();
    let a = reference.amplitudes();
    let rho = state.coherence()?;
    let diag: Vec<f64> = (0..n).map(|i| rho[[i, i]].re).collect();
    let fringe: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, grid.detuning(k) * tau)).collect();

    let counts = Array2::from_shape_fn((n, n), |(i, j)| {
        let signal_signal = match stats {
            SignalStatistics::SinglePhoton => 0.0,
            SignalStatistics::Coherent { .. } => {
                n_mean
                    * n_mean
                    * comps
                        .iter()
                        .map(|(p, m)| p * m.amplitudes()[i].norm_sqr() * m.amplitudes()[j].norm_sqr())
                        .sum::<f64>()
            }
            SignalStatistics::Thermal { .. } => n_mean * n_mean * (diag[i] * diag[j] + rho[[i, j]].norm_sqr()),
        };
        let (a1, a2) = (a[i], a[j]);
        let cross = n_mean * (a1.norm_sqr() * diag[j] + diag[i] * a2.norm_sqr());
        let refref = a1.norm_sqr() * a2.norm_sqr();
        let interference = rho[[i, j]] * a1.conj() * a2 * fringe[j] * fringe[i].conj();
        0.25 * (signal_signal + cross + refref - 2.0 * n_mean * interference.re)
    });
    Interferogram::from_computed(grid, grid, counts)
}

/// Herald-resolved expected histogram. Slice `h` is the single-photon
/// interferogram of the normalised cross-section `f(·, ω_h)` weighted by the
/// herald probability of that bin.
pub fn expected_heralded_histogram(
    jsa: &Jsa,
    reference: &SpectralMode,
    tau: f64,
    herald_grid: &FrequencyGrid,
) -> Result<HeraldedInterferogram> {
    herald_grid.require_match(jsa.grid2(), "herald grid vs JSA")?;
    jsa.grid1().require_match(reference.grid(), "JSA signal grid vs reference")?;
    check_aliasing(jsa.grid1(), tau)?;
    let n1 = jsa.grid1().len();
    let nh = herald_grid.len();
    let slices: Vec<Array2<f64>> = (0..nh)
        .into_par_iter()
        .map(|h| -> Result<Array2<f64>> {
            let p = jsa.herald_probability(h);
            if p <= 0.0 {
                return Ok(Array2::zeros((n1, n1)));
            }
            let psi = jsa.column(h).normalized()?;
            let g = expected_interferogram(&SignalState::Pure(psi), reference, tau, SignalStatistics::SinglePhoton)?;
            Ok(g.into_counts() * p)
        })
        .collect::<Result<_>>()?;
    let mut counts = Array3::<f64>::zeros((nh, n1, n1));
    for (h, s) in slices.into_iter().enumerate() {
        counts.index_axis_mut(Axis(0), h).assign(&s);
    }
    HeraldedInterferogram::from_computed(*herald_grid, *jsa.grid1(), *jsa.grid1(), counts)
}
