use ndarray::Array2;

use crate::{grid::FrequencyGrid, mode::SpectralMode, Error, Result, C64};

/// Joint spectral amplitude `f(ω₁, ω₂)` on `grid1 × grid2`.
///
/// Rows index the signal arm (`ω₁`), columns the herald arm (`ω₂`). The
/// global phase is unobservable; use [`Jsa::equivalent`] rather than `==` to
/// compare physical states.
#[derive(Debug, Clone, PartialEq)]
pub struct Jsa {
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    f: Array2<C64>,
}

impl Jsa {
    pub fn new(grid1: FrequencyGrid, grid2: FrequencyGrid, f: Array2<C64>) -> Result<Self> {
        if f.dim() != (grid1.len(), grid2.len()) {
            return Err(Error::param(format!(
                "JSA matrix is {:?}, grids are {}x{}",
                f.dim(),
                grid1.len(),
                grid2.len()
            )));
        }
        if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::param("JSA entries must be finite"));
        }
        Ok(Self { grid1, grid2, f })
    }

    pub fn from_fn(grid1: FrequencyGrid, grid2: FrequencyGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let m = Array2::from_shape_fn((grid1.len(), grid2.len()), |(i, j)| {
            f(grid1.detuning(i), grid2.detuning(j))
        });
        Self { grid1, grid2, f: m }
    }

    pub fn grid1(&self) -> &FrequencyGrid {
        &self.grid1
    }

    pub fn grid2(&self) -> &FrequencyGrid {
        &self.grid2
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.f
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.f
    }

    /// Bin area `Δω₁Δω₂`.
    pub fn cell(&self) -> f64 {
        self.grid1.spacing() * self.grid2.spacing()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.f.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroMatrix("cannot normalise a zero JSA"));
        }
        let s = 1.0 / n.sqrt();
        Ok(Self {
            grid1: self.grid1,
            grid2: self.grid2,
            f: self.f.mapv(|z| z * s),
        })
    }

    /// Cross-section `f(·, ω₂ⱼ)` as an unnormalised signal-arm mode.
    pub fn column(&self, j: usize) -> SpectralMode {
        SpectralMode::new(self.grid1, self.f.column(j).to_vec()).expect("column length matches grid1")
    }

    /// Cross-section `f(ω₁ᵢ, ·)` as an unnormalised herald-arm mode.
    pub fn row(&self, i: usize) -> SpectralMode {
        SpectralMode::new(self.grid2, self.f.row(i).to_vec()).expect("row length matches grid2")
    }

    /// Same state with the arms exchanged, `f(ω₂, ω₁)`.
    pub fn transposed(&self) -> Self {
        Self {
            grid1: self.grid2,
            grid2: self.grid1,
            f: self.f.t().to_owned(),
        }
    }

    /// Phase-stripped copy `|f|`.
    pub fn amplitude_only(&self) -> Self {
        Self {
            grid1: self.grid1,
            grid2: self.grid2,
            f: self.f.mapv(|z| C64::new(z.norm(), 0.0)),
        }
    }

    /// Probability of a herald detection in bin `j`,
    /// `Σᵢ|f(ω₁ᵢ, ω₂ⱼ)|²Δω₁Δω₂` (sums to one for a normalised JSA).
    pub fn herald_probability(&self, j: usize) -> f64 {
        self.f.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    /// Reduced signal-arm state as a mixture of the (non-orthogonal)
    /// cross-sections: weights are herald probabilities, modes are the
    /// normalised columns. Zero columns are skipped.
    pub fn reduced_signal_state(&self) -> Vec<(f64, SpectralMode)> {
        (0..self.grid2.len())
            .filter_map(|j| {
                let p = self.herald_probability(j);
                if p > 0.0 {
                    Some((p, self.column(j).normalized().ok()?))
                } else {
                    None
                }
            })
            .collect()
    }

    /// True when the two JSAs agree up to a single unit-modulus factor, to a
    /// relative Frobenius tolerance `tol`.
    pub fn equivalent(&self, other: &Jsa, tol: f64) -> bool {
        if !self.grid1.matches(&other.grid1) || !self.grid2.matches(&other.grid2) {
            return false;
        }
        let ip: C64 = self.f.iter().zip(other.f.iter()).map(|(a, b)| a.conj() * b).sum();
        let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
        let diff: f64 = self
            .f
            .iter()
            .zip(other.f.iter())
            .map(|(a, b)| (a * phase - b).norm_sqr())
            .sum();
        let scale: f64 = self.f.iter().map(|z| z.norm_sqr()).sum::<f64>().max(1e-300);
        (diff / scale).sqrt() <= tol
    }
}
