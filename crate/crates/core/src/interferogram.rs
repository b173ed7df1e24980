use ndarray::{Array, Array2, Array3, Axis, Dimension};

use crate::{grid::FrequencyGrid, Error, Result};

/// Expected or sampled coincidence counts `⟨Ĝ(ω₁, ω₂)⟩` between the two beam
/// splitter outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    counts: Array2<f64>,
}

fn check_counts<'a>(values: impl Iterator<Item = &'a f64>) -> Result<()> {
    for v in values {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::param(format!(
                "interferogram entries must be finite and non-negative, found {v}"
            )));
        }
    }
    Ok(())
}

impl Interferogram {
    pub fn new(grid1: FrequencyGrid, grid2: FrequencyGrid, counts: Array2<f64>) -> Result<Self> {
        if counts.dim() != (grid1.len(), grid2.len()) {
            return Err(Error::param(format!(
                "interferogram is {:?}, grids are {}x{}",
                counts.dim(),
                grid1.len(),
                grid2.len()
            )));
        }
        check_counts(counts.iter())?;
        Ok(Self {
            grid1,
            grid2,
            counts,
        })
    }

    /// Builds from computed intensities, clamping round-off negatives
    /// (no larger than 1e-12 of the peak) to zero.
    pub(crate) fn from_computed(grid1: FrequencyGrid, grid2: FrequencyGrid, mut counts: Array2<f64>) -> Result<Self> {
        clamp_roundoff(&mut counts);
        Self::new(grid1, grid2, counts)
    }

    pub fn grid1(&self) -> &FrequencyGrid {
        &self.grid1
    }

    pub fn grid2(&self) -> &FrequencyGrid {
        &self.grid2
    }

    pub fn counts(&self) -> &Array2<f64> {
        &self.counts
    }

    pub fn into_counts(self) -> Array2<f64> {
        self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }

    /// Adds another interferogram on the same grids.
    pub fn plus(&self, other: &Interferogram) -> Result<Self> {
        self.grid1.require_match(&other.grid1, "interferogram sum")?;
        self.grid2.require_match(&other.grid2, "interferogram sum")?;
        Ok(Self {
            grid1: self.grid1,
            grid2: self.grid2,
            counts: &self.counts + &other.counts,
        })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid1, self.grid2, self.counts.mapv(|c| c * factor))
    }
}

/// Herald-resolved histogram `N(ω₁, ω₂, ω_h)`, stored as `[h, i, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedInterferogram {
    herald_grid: FrequencyGrid,
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    counts: Array3<f64>,
}

impl HeraldedInterferogram {
    pub fn new(
        herald_grid: FrequencyGrid,
        grid1: FrequencyGrid,
        grid2: FrequencyGrid,
        counts: Array3<f64>,
    ) -> Result<Self> {
        if counts.dim() != (herald_grid.len(), grid1.len(), grid2.len()) {
            return Err(Error::param(format!(
                "heralded histogram is {:?}, grids are {}x{}x{}",
                counts.dim(),
                herald_grid.len(),
                grid1.len(),
                grid2.len()
            )));
        }
        check_counts(counts.iter())?;
        Ok(Self {
            herald_grid,
            grid1,
            grid2,
            counts,
        })
    }

    pub(crate) fn from_computed(
        herald_grid: FrequencyGrid,
        grid1: FrequencyGrid,
        grid2: FrequencyGrid,
        mut counts: Array3<f64>,
    ) -> Result<Self> {
        clamp_roundoff(&mut counts);
        Self::new(herald_grid, grid1, grid2, counts)
    }

    pub fn herald_grid(&self) -> &FrequencyGrid {
        &self.herald_grid
    }

    pub fn grid1(&self) -> &FrequencyGrid {
        &self.grid1
    }

    pub fn grid2(&self) -> &FrequencyGrid {
        &self.grid2
    }

    pub fn counts(&self) -> &Array3<f64> {
        &self.counts
    }

    pub fn into_counts(self) -> Array3<f64> {
        self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }

    /// Interferogram conditioned on herald bin `j`.
    pub fn slice(&self, j: usize) -> Interferogram {
        Interferogram {
            grid1: self.grid1,
            grid2: self.grid2,
            counts: self.counts.index_axis(Axis(0), j).to_owned(),
        }
    }

    pub fn slice_total(&self, j: usize) -> f64 {
        self.counts.index_axis(Axis(0), j).sum()
    }

    /// Sum over the herald axis.
    pub fn marginal(&self) -> Interferogram {
        Interferogram {
            grid1: self.grid1,
            grid2: self.grid2,
            counts: self.counts.sum_axis(Axis(0)),
        }
    }
}

fn clamp_roundoff<D: Dimension>(values: &mut Array<f64, D>) {
    let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for v in values.iter_mut() {
        if *v < 0.0 && *v >= -1e-12 * peak {
            *v = 0.0;
        }
    }
}
