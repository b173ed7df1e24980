use crate::{grid::FrequencyGrid, Error, Result, C64};

/// Complex spectral amplitude sampled on a [`FrequencyGrid`].
///
/// Norms and inner products include the bin width, so `Σ|amp|²·Δω` is the
/// discretised `∫|ψ(ω)|²dω` and does not depend on grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMode {
    grid: FrequencyGrid,
    amp: Vec<C64>,
}

impl SpectralMode {
    pub fn new(grid: FrequencyGrid, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != grid.len() {
            return Err(Error::param(format!(
                "mode has {} samples for a {}-bin grid",
                amp.len(),
                grid.len()
            )));
        }
        if amp.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("mode amplitudes must be finite"));
        }
        Ok(Self { grid, amp })
    }

    /// Samples `f(detuning)` at every bin.
    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> C64) -> Self {
        let amp = (0..grid.len()).map(|k| f(grid.detuning(k))).collect();
        Self { grid, amp }
    }

    /// Gaussian amplitude `exp(-(ω-ω₀)²/(2σ²))` with quadratic spectral phase
    /// `exp(-i·gdd/2·(ω-ω₀)²)`. `std` is the standard deviation of the
    /// amplitude profile (not the intensity).
    pub fn gaussian(grid: FrequencyGrid, offset: f64, std: f64, gdd: f64) -> Self {
        Self::from_fn(grid, |w| {
            let x = w - offset;
            C64::from_polar((-x * x / (2.0 * std * std)).exp(), -0.5 * gdd * x * x)
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amp
    }

    pub fn len(&self) -> usize {
        self.amp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amp.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Unit-norm copy. Fails for an all-zero mode.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroMatrix("cannot normalise a zero mode"));
        }
        Ok(self.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid,
            amp: self.amp.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.amp.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Rotates the global phase so the largest-magnitude sample is real and
    /// positive.
    pub fn with_canonical_phase(&self) -> Self {
        let peak = self
            .amp
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .unwrap_or_default();
        if peak.norm() == 0.0 {
            return self.clone();
        }
        self.scaled(peak.conj() / peak.norm())
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
    pub fn fidelity(&self, other: &SpectralMode) -> Result<f64> {
        let ip = inner_product(self, other)?;
        let d = self.norm_sqr() * other.norm_sqr();
        if d == 0.0 {
            return Err(Error::ZeroMatrix("fidelity with a zero mode"));
        }
        Ok(ip.norm_sqr() / d)
    }
}

/// `⟨a|b⟩ = Σ conj(a)·b·Δω`.
pub fn inner_product(a: &SpectralMode, b: &SpectralMode) -> Result<C64> {
    a.grid.require_match(&b.grid, "inner product")?;
    let s: C64 = a.amp.iter().zip(&b.amp).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.grid.spacing())
}
