//! Reference division and eigen-decomposition of the signal coherence.

use nalgebra::DMatrix;
use ndarray::Array2;

use super::FilteredSideband;
use crate::{Error, FrequencyGrid, Result, SpectralMode, C64};

/// Default division threshold as a fraction of `max|α|`.
pub const DEFAULT_REFERENCE_THRESHOLD: f64 = 0.05;
/// Bins with `|Γ̂| ≥ SUPPORT_LEVEL·max|Γ̂|` make up the signal support.
pub const SUPPORT_LEVEL: f64 = 1e-4;

/// Estimated signal coherence `Φ̂(ω₁,ω₂) ≈ Σ pᵢφᵢ(ω₁)φᵢ*(ω₂)` up to scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEstimate {
    pub grid: FrequencyGrid,
    /// Hermitian-symmetrised estimate; masked bins are zero.
    pub phi: Array2<C64>,
    /// Estimate before symmetrisation.
    pub raw: Array2<C64>,
    /// Bins where the reference cleared the division threshold.
    pub mask: Vec<bool>,
    /// Fraction of signal-support bins lost to the mask.
    pub masked_fraction: f64,
    /// `‖Φ̂ − Φ̂†‖ / (2‖Φ̂‖)` before symmetrisation.
    pub hermiticity_residual: f64,
}

/// Divides the filtered sideband by `α*(ω₁)α(ω₂)e^{i(ω₂−ω₁)τ}` on bins where
/// `|α| ≥ threshold·max|α|`. A conjugate-sideband input is divided by the
/// conjugate factor and transposed, so it yields `Φ̂†` of the primary
/// sideband.
pub fn remove_reference(
    sb: &FilteredSideband,
    reference: &SpectralMode,
    tau: f64,
    threshold: f64,
) -> Result<ModeEstimate> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::param(format!("threshold {threshold} outside [0, 1)")));
    }
    sb.grid1.require_match(&sb.grid2, "mode estimate needs a square interferogram")?;
    sb.grid1.require_match(reference.grid(), "sideband vs reference")?;
    let grid = sb.grid1;
    let n = grid.len();
    let a = reference.amplitudes();
    let amax = reference.max_abs();
    if amax == 0.0 {
        return Err(Error::ZeroMatrix("reference spectrum is zero"));
    }
    let mask: Vec<bool> = a.iter().map(|x| x.norm() >= threshold * amax).collect();

    let gmax = sb.gamma.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if gmax == 0.0 {
        return Err(Error::ZeroMatrix("filtered sideband is zero"));
    }
    let mut support = 0usize;
    let mut lost = 0usize;
    for ((i, j), z) in sb.gamma.indexed_iter() {
        if z.norm() >= SUPPORT_LEVEL * gmax {
            support += 1;
            if !(mask[i] && mask[j]) {
                lost += 1;
            }
        }
    }
    let masked_fraction = lost as f64 / support as f64;
    if masked_fraction > 0.5 {
        return Err(Error::ReferenceTooNarrow { masked_fraction });
    }

    let fringe: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, grid.detuning(k) * tau)).collect();
    let divided = Array2::from_shape_fn((n, n), |(i, j)| {
        if !(mask[i] && mask[j]) {
            return C64::default();
        }
        let den = a[i].conj() * a[j] * fringe[j] * fringe[i].conj();
        if sb.conjugate {
            sb.gamma[[i, j]] / den.conj()
        } else {
            sb.gamma[[i, j]] / den
        }
    });
    let raw = if sb.conjugate { divided.t().to_owned() } else { divided };
    let adj = raw.t().mapv(|z| z.conj());
    let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let diff: f64 = raw.iter().zip(adj.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let hermiticity_residual = if norm > 0.0 { diff / (2.0 * norm) } else { 0.0 };
    let phi = (&raw + &adj).mapv(|z| z * 0.5);
    Ok(ModeEstimate {
        grid,
        phi,
        raw,
        mask,
        masked_fraction,
        hermiticity_residual,
    })
}

/// Eigen-decomposition `{pᵢ, φᵢ}` of a mode estimate.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    /// Normalised non-negative weights, descending.
    pub weights: Vec<f64>,
    /// Unit-norm modes matching `weights`.
    pub modes: Vec<SpectralMode>,
    /// All eigenvalues of `Φ̂·Δω` before clipping, descending.
    pub eigenvalues: Vec<f64>,
    /// Negative eigenvalue mass relative to the positive mass.
    pub clipped_mass: f64,
    /// Sum of the positive eigenvalues (the estimate's scale).
    pub scale: f64,
}

impl ModeDecomposition {
    pub fn purity(&self) -> f64 {
        self.weights[0]
    }

    /// Leading mode scaled by the square root of its eigenvalue; for a pure
    /// estimate this is the signal field up to a global phase.
    pub fn leading_field(&self) -> SpectralMode {
        self.modes[0].scaled(C64::new((self.weights[0] * self.scale).sqrt(), 0.0))
    }
}

pub fn extract_modes(est: &ModeEstimate) -> Result<ModeDecomposition> {
    let n = est.grid.len();
    if est.phi.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroMatrix("mode estimate is zero"));
    }
    let dw = est.grid.spacing();
    let m = DMatrix::from_fn(n, n, |i, j| est.phi[[i, j]] * dw);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let positive: f64 = eigenvalues.iter().filter(|l| **l > 0.0).sum();
    let negative: f64 = -eigenvalues.iter().filter(|l| **l < 0.0).sum::<f64>();
    if !(positive > 0.0) {
        return Err(Error::ZeroMatrix("mode estimate has no positive eigenvalue"));
    }
    let scale_mode = 1.0 / dw.sqrt();
    let mut weights = Vec::new();
    let mut modes = Vec::new();
    for (&k, &l) in order.iter().zip(&eigenvalues) {
        if l <= 0.0 {
            break;
        }
        weights.push(l / positive);
        let v: Vec<C64> = eig.eigenvectors.column(k).iter().map(|z| z * scale_mode).collect();
        modes.push(SpectralMode::new(est.grid, v)?);
    }
    Ok(ModeDecomposition {
        weights,
        modes,
        eigenvalues,
        clipped_mass: negative / positive,
        scale: positive,
    })
}
