//! Pipeline configuration and the four reference scenarios.
//!
//! A configuration is a TOML document with the sections below. Every key
//! except `source.signal_bandwidth_ghz`, `source.herald_bandwidth_ghz` and
//! `measurement.mode` has a default; unknown keys are rejected.
//!
//! ```toml
//! [run]
//! name = "chirped-heralded"
//! seed = 1
//!
//! [grid]
//! signal_center_nm = 1550.0
//! herald_center_nm = 1560.0
//! spacing_ghz = 10.0
//! n_bins = 128
//!
//! [source]
//! signal_bandwidth_ghz = 280.0   # amplitude std of the unchirped marginal
//! herald_bandwidth_ghz = 280.0
//! pump_gdd_fs2 = 2.0e5
//! phasematch_shape = "gaussian"  # or "sinc"
//!
//! [reference]
//! bandwidth_ratio = 1.5          # reference std / signal marginal std
//! photons_per_pulse = 0.0125
//! offset_ghz = 0.0
//! gdd_fs2 = 0.0
//!
//! [measurement]
//! mode = "heralded"              # "heralded" | "seeded" | "unseeded"
//! delay_ps = 10.0
//! signal_photons = 0.0125        # seeded / unseeded mean photons per pulse
//! both_arms = true               # heralded: also herald on the other photon
//! seed_scan = true               # seeded: one measurement per herald bin
//! seed_thz = 192.0               # seeded: seed when seed_scan = false
//!
//! [detector]
//! dispersion_ps_per_nm = -997.0
//! jitter_fwhm_ps = 40.0
//! efficiency = 1.0
//! rep_period_ns = 12.5
//!
//! [sampling]
//! events = 0                     # 0 keeps the noiseless expectation
//! blur = false
//! background_fraction = 0.0
//!
//! [tags]
//! enabled = false
//! coincidences_per_s = 100.0
//! singles_per_s = [0.0, 0.0, 0.0]
//!
//! [reconstruction]
//! window = "tukey"               # or "gaussian"
//! taper = 0.5
//! width_fraction = 0.25          # σ_t / τ
//! reference_threshold = 0.05
//! estimate_delay = false
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::{
    forward::{
        self, apply_detector_blur, apply_detector_blur_3d, build_jsa, expected_heralded_histogram,
        expected_interferogram, sample_counts, sample_counts_3d, with_flat_background, DetectorModel, PhaseMatching,
        SignalState, SignalStatistics, SourceModel,
    },
    grid::{ghz_to_angular, thz_to_angular, wavelength_to_angular},
    reconstruction::{FilterSpec, SeededScan, SliceProcessing, WindowShape},
    Error, FrequencyGrid, HeraldedInterferogram, Interferogram, Jsa, Result, SpectralMode,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub grid: GridSection,
    pub source: SourceSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub tags: TagSection,
    #[serde(default)]
    pub reconstruction: ReconstructionSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    pub seed: u64,
    /// Reference spectrum CSV (mode format) replacing the parametric one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_file: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            seed: 1,
            reference_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub signal_center_nm: f64,
    pub herald_center_nm: f64,
    pub spacing_ghz: f64,
    pub n_bins: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            signal_center_nm: 1550.0,
            herald_center_nm: 1560.0,
            spacing_ghz: 10.0,
            n_bins: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub signal_bandwidth_ghz: f64,
    pub herald_bandwidth_ghz: f64,
    #[serde(default)]
    pub pump_gdd_fs2: f64,
    #[serde(default)]
    pub phasematch_shape: PhaseMatching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    pub bandwidth_ratio: f64,
    pub photons_per_pulse: f64,
    pub offset_ghz: f64,
    pub gdd_fs2: f64,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self {
            bandwidth_ratio: 1.5,
            photons_per_pulse: 0.0125,
            offset_ghz: 0.0,
            gdd_fs2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    /// Three-fold coincidences, single-photon signal conditioned on the
    /// herald frequency.
    Heralded,
    /// Two-fold coincidences of a coherent signal stimulated by a seed at
    /// each herald frequency.
    Seeded,
    /// Two-fold coincidences of the thermal signal arm alone.
    Unseeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub mode: MeasurementMode,
    #[serde(default = "default_delay_ps")]
    pub delay_ps: f64,
    #[serde(default = "default_photons")]
    pub signal_photons: f64,
    #[serde(default = "yes")]
    pub both_arms: bool,
    #[serde(default = "yes")]
    pub seed_scan: bool,
    #[serde(default = "default_seed_thz")]
    pub seed_thz: f64,
}

fn default_delay_ps() -> f64 {
    10.0
}

fn default_photons() -> f64 {
    0.0125
}

fn default_seed_thz() -> f64 {
    192.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub dispersion_ps_per_nm: f64,
    pub jitter_fwhm_ps: f64,
    pub efficiency: f64,
    pub rep_period_ns: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            dispersion_ps_per_nm: -997.0,
            jitter_fwhm_ps: 40.0,
            efficiency: 1.0,
            rep_period_ns: 12.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub events: u64,
    pub blur: bool,
    pub background_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TagSection {
    pub enabled: bool,
    pub coincidences_per_s: f64,
    pub singles_per_s: [f64; 3],
    /// Acceptance window in ps; defaults to just under half a period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_ps: Option<f64>,
}

impl Default for TagSection {
    fn default() -> Self {
        Self {
            enabled: false,
            coincidences_per_s: 100.0,
            singles_per_s: [0.0; 3],
            window_ps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Gaussian,
    Tukey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionSection {
    pub window: WindowKind,
    pub taper: f64,
    pub width_fraction: f64,
    pub reference_threshold: f64,
    pub estimate_delay: bool,
}

impl Default for ReconstructionSection {
    fn default() -> Self {
        Self {
            window: WindowKind::Tukey,
            taper: 0.5,
            width_fraction: 0.25,
            reference_threshold: crate::reconstruction::DEFAULT_REFERENCE_THRESHOLD,
            estimate_delay: false,
        }
    }
}

pub const PRESET_NAMES: [&str; 4] = ["unchirped-heralded", "chirped-heralded", "seeded-coherent", "unseeded-thermal"];

/// Chirp of the chirped preset, fs².
pub const PRESET_CHIRP_FS2: f64 = 2.0e5;

/// Events sampled by the noisy presets.
pub const PRESET_EVENTS: u64 = 360_000;

impl Config {
    /// Configuration with every optional key at its default.
    pub fn defaults(mode: MeasurementMode) -> Self {
        Self {
            run: RunSection::default(),
            grid: GridSection::default(),
            source: SourceSection {
                signal_bandwidth_ghz: 280.0,
                herald_bandwidth_ghz: 280.0,
                pump_gdd_fs2: 0.0,
                phasematch_shape: PhaseMatching::Gaussian,
            },
            reference: ReferenceSection::default(),
            measurement: MeasurementSection {
                mode,
                delay_ps: default_delay_ps(),
                signal_photons: default_photons(),
                both_arms: true,
                seed_scan: true,
                seed_thz: default_seed_thz(),
            },
            detector: DetectorSection::default(),
            sampling: SamplingSection::default(),
            tags: TagSection::default(),
            reconstruction: ReconstructionSection::default(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        let mut c = match name {
            "unchirped-heralded" => Self::defaults(MeasurementMode::Heralded),
            "chirped-heralded" => {
                let mut c = Self::defaults(MeasurementMode::Heralded);
                c.source.pump_gdd_fs2 = PRESET_CHIRP_FS2;
                c.sampling = SamplingSection {
                    events: PRESET_EVENTS,
                    blur: true,
                    background_fraction: 0.0,
                };
                c.tags.enabled = true;
                c
            }
            "seeded-coherent" => {
                let mut c = Self::defaults(MeasurementMode::Seeded);
                c.measurement.seed_scan = false;
                c.sampling.events = PRESET_EVENTS;
                c.sampling.blur = true;
                c
            }
            "unseeded-thermal" => {
                let mut c = Self::defaults(MeasurementMode::Unseeded);
                c.sampling.events = PRESET_EVENTS;
                c.sampling.blur = true;
                c
            }
            _ => return None,
        };
        c.run.name = name.into();
        Some(c)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| Error::param(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, key: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("config: `{key}` must be positive, got {v}")))
            }
        };
        positive(self.grid.signal_center_nm, "grid.signal_center_nm")?;
        positive(self.grid.herald_center_nm, "grid.herald_center_nm")?;
        positive(self.grid.spacing_ghz, "grid.spacing_ghz")?;
        if self.grid.n_bins < 8 {
            return Err(Error::param("config: `grid.n_bins` must be at least 8"));
        }
        positive(self.source.signal_bandwidth_ghz, "source.signal_bandwidth_ghz")?;
        positive(self.source.herald_bandwidth_ghz, "source.herald_bandwidth_ghz")?;
        positive(self.reference.bandwidth_ratio, "reference.bandwidth_ratio")?;
        positive(self.reference.photons_per_pulse, "reference.photons_per_pulse")?;
        positive(self.measurement.delay_ps, "measurement.delay_ps")?;
        positive(self.measurement.signal_photons, "measurement.signal_photons")?;
        positive(self.reconstruction.width_fraction, "reconstruction.width_fraction")?;
        if !(0.0..1.0).contains(&self.reconstruction.reference_threshold) {
            return Err(Error::param("config: `reconstruction.reference_threshold` must lie in [0, 1)"));
        }
        if !(self.sampling.background_fraction >= 0.0 && self.sampling.background_fraction.is_finite()) {
            return Err(Error::param("config: `sampling.background_fraction` must be non-negative"));
        }
        positive(self.tags.coincidences_per_s, "tags.coincidences_per_s")?;
        self.detector_model().validate()
    }

    pub fn detector_model(&self) -> DetectorModel {
        DetectorModel {
            dispersion_ps_per_nm: self.detector.dispersion_ps_per_nm,
            jitter_fwhm_ps: self.detector.jitter_fwhm_ps,
            efficiency: self.detector.efficiency,
            rep_period_ns: self.detector.rep_period_ns,
        }
    }

    pub fn tau_fs(&self) -> f64 {
        self.measurement.delay_ps * 1e3
    }
}

/// Deterministic per-stream seed derived from the run seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Herald bins below this fraction of the peak marginal get no seeded
/// measurement.
pub const SEED_MIN_WEIGHT: f64 = 1e-3;

/// Measured (or expected) data of one scenario.
#[derive(Debug, Clone)]
pub enum Measurement {
    /// `a` heralds on the idler and resolves the signal; `b` swaps roles.
    Heralded {
        a: HeraldedInterferogram,
        b: Option<HeraldedInterferogram>,
    },
    Seeded(SeededScan),
    Unseeded(Interferogram),
}

/// A configuration resolved into grids, source, reference and detector.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: Config,
    pub signal_grid: FrequencyGrid,
    pub herald_grid: FrequencyGrid,
    pub source: SourceModel,
    pub jsa: Jsa,
    pub detector: DetectorModel,
    /// Reference on the signal grid (and on the herald grid, for the
    /// swapped arm).
    pub reference_signal: SpectralMode,
    pub reference_herald: SpectralMode,
}

impl Scenario {
    pub fn new(config: Config) -> Result<Self> {
        Self::with_reference(config, None)
    }

    /// Uses `reference` (on the signal grid) in place of the parametric
    /// signal-arm reference.
    pub fn with_reference(config: Config, reference: Option<SpectralMode>) -> Result<Self> {
        config.validate()?;
        let g = &config.grid;
        let spacing = ghz_to_angular(g.spacing_ghz);
        let signal_grid = FrequencyGrid::from_spacing(wavelength_to_angular(g.signal_center_nm), spacing, g.n_bins)?;
        let herald_grid = FrequencyGrid::from_spacing(wavelength_to_angular(g.herald_center_nm), spacing, g.n_bins)?;
        let s1 = ghz_to_angular(config.source.signal_bandwidth_ghz);
        let s2 = ghz_to_angular(config.source.herald_bandwidth_ghz);
        let mut source = SourceModel::separable(s1, s2, config.source.pump_gdd_fs2)?;
        source.phasematch_shape = config.source.phasematch_shape;
        let jsa = build_jsa(&source, &signal_grid, &herald_grid)?;
        let reference_signal = match reference {
            Some(r) => {
                signal_grid.require_match(r.grid(), "reference spectrum")?;
                r
            }
            None => Self::parametric_reference(&config, signal_grid, s1)?,
        };
        let reference_herald = Self::parametric_reference(&config, herald_grid, s2)?;
        let detector = config.detector_model();
        Ok(Self {
            config,
            signal_grid,
            herald_grid,
            source,
            jsa,
            detector,
            reference_signal,
            reference_herald,
        })
    }

    fn parametric_reference(config: &Config, grid: FrequencyGrid, std: f64) -> Result<SpectralMode> {
        let r = &config.reference;
        let m = SpectralMode::gaussian(grid, ghz_to_angular(r.offset_ghz), r.bandwidth_ratio * std, r.gdd_fs2);
        Ok(m.normalized()?.scaled(r.photons_per_pulse.sqrt().into()))
    }

    pub fn tau(&self) -> f64 {
        self.config.tau_fs()
    }

    pub fn statistics(&self) -> SignalStatistics {
        let n = self.config.measurement.signal_photons;
        match self.config.measurement.mode {
            MeasurementMode::Heralded => SignalStatistics::SinglePhoton,
            MeasurementMode::Seeded => SignalStatistics::Coherent { mean_photons: n },
            MeasurementMode::Unseeded => SignalStatistics::Thermal { mean_photons: n },
        }
    }

    pub fn filter(&self, tau: f64) -> Result<FilterSpec> {
        let r = &self.config.reconstruction;
        let shape = match r.window {
            WindowKind::Gaussian => WindowShape::Gaussian,
            WindowKind::Tukey => WindowShape::Tukey { taper: r.taper },
        };
        let w = r.width_fraction * tau.abs();
        FilterSpec::new(shape, (-tau, tau), (w, w))
    }

    /// Slice settings for the signal arm (`swapped = false`) or the arm
    /// resolved on the herald grid.
    pub fn processing(&self, tau: f64, swapped: bool) -> Result<SliceProcessing> {
        Ok(SliceProcessing {
            reference: if swapped {
                self.reference_herald.clone()
            } else {
                self.reference_signal.clone()
            },
            tau,
            filter: self.filter(tau)?,
            threshold: self.config.reconstruction.reference_threshold,
        })
    }

    /// Herald bins that receive a seeded measurement.
    pub fn seed_bins(&self) -> Result<Vec<usize>> {
        let m = &self.config.measurement;
        if !m.seed_scan {
            let d = thz_to_angular(m.seed_thz) - self.herald_grid.center();
            let j = self
                .herald_grid
                .index_of(d)
                .ok_or_else(|| Error::param(format!("seed {} THz lies outside the herald grid", m.seed_thz)))?;
            return Ok(vec![j]);
        }
        let p: Vec<f64> = (0..self.herald_grid.len()).map(|j| self.jsa.herald_probability(j)).collect();
        let pmax = p.iter().copied().fold(0.0, f64::max);
        Ok((0..p.len()).filter(|&j| p[j] >= SEED_MIN_WEIGHT * pmax).collect())
    }

    /// Noiseless expectation of the configured measurement.
    pub fn expected(&self) -> Result<Measurement> {
        let tau = self.tau();
        match self.config.measurement.mode {
            MeasurementMode::Heralded => {
                let a = expected_heralded_histogram(&self.jsa, &self.reference_signal, tau, &self.herald_grid)?;
                let b = if self.config.measurement.both_arms {
                    Some(expected_heralded_histogram(
                        &self.jsa.transposed(),
                        &self.reference_herald,
                        tau,
                        &self.signal_grid,
                    )?)
                } else {
                    None
                };
                Ok(Measurement::Heralded { a, b })
            }
            MeasurementMode::Seeded => {
                let n = self.config.measurement.signal_photons;
                let pmax = (0..self.herald_grid.len())
                    .map(|j| self.jsa.herald_probability(j))
                    .fold(0.0, f64::max);
                let measurements = self
                    .seed_bins()?
                    .into_iter()
                    .map(|j| {
                        // a stimulated signal is as bright as its cross-section
                        let mean = n * self.jsa.herald_probability(j) / pmax;
                        let psi = self.jsa.column(j).normalized()?;
                        let g = expected_interferogram(
                            &SignalState::Pure(psi),
                            &self.reference_signal,
                            tau,
                            SignalStatistics::Coherent { mean_photons: mean },
                        )?;
                        Ok((self.herald_grid.detuning(j), g))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Measurement::Seeded(SeededScan {
                    seed_grid: self.herald_grid,
                    measurements,
                }))
            }
            MeasurementMode::Unseeded => {
                let state = SignalState::Mixture(self.jsa.reduced_signal_state());
                let g = expected_interferogram(&state, &self.reference_signal, tau, self.statistics())?;
                Ok(Measurement::Unseeded(g))
            }
        }
    }

    /// Applies background, detector blur and multinomial sampling per the
    /// `[sampling]` section. With `events = 0` only background and blur are
    /// applied.
    pub fn sample(&self, expected: &Measurement, seed: u64) -> Result<Measurement> {
        let s = &self.config.sampling;
        let det = &self.detector;
        let events = s.events;
        let blur2 = |g: &Interferogram| if s.blur { apply_detector_blur(g, det) } else { Ok(g.clone()) };
        let arm = |h: &HeraldedInterferogram, k: u64| -> Result<HeraldedInterferogram> {
            let mut h = with_flat_background(h, s.background_fraction)?;
            if s.blur {
                h = apply_detector_blur_3d(&h, det)?;
            }
            if events > 0 {
                h = sample_counts_3d(&h, events, derive_seed(seed, k))?;
            }
            Ok(h)
        };
        match expected {
            Measurement::Heralded { a, b } => Ok(Measurement::Heralded {
                a: arm(a, 0)?,
                b: b.as_ref().map(|b| arm(b, 1)).transpose()?,
            }),
            Measurement::Seeded(scan) => {
                let blurred: Vec<Interferogram> =
                    scan.measurements.iter().map(|(_, g)| blur2(g)).collect::<Result<_>>()?;
                let split = if events > 0 {
                    let totals: Vec<f64> = blurred.iter().map(|g| g.total()).collect();
                    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(derive_seed(seed, 2));
                    Some(forward::multinomial(&totals, events, &mut rng)?)
                } else {
                    None
                };
                let mut measurements = Vec::with_capacity(blurred.len());
                for (k, ((seed_det, _), g)) in scan.measurements.iter().zip(blurred).enumerate() {
                    let g = match &split {
                        Some(n) if n[k] > 0 => sample_counts(&g, n[k], derive_seed(seed, 1000 + k as u64))?,
                        Some(_) => g.scaled(0.0)?,
                        None => g,
                    };
                    measurements.push((*seed_det, g));
                }
                Ok(Measurement::Seeded(SeededScan {
                    seed_grid: scan.seed_grid,
                    measurements,
                }))
            }
            Measurement::Unseeded(g) => {
                let g = blur2(g)?;
                Ok(Measurement::Unseeded(if events > 0 {
                    sample_counts(&g, events, derive_seed(seed, 3))?
                } else {
                    g
                }))
            }
        }
    }
}
