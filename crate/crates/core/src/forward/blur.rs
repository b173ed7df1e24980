//! Spectral blur from detector timing jitter.
//!
//! Each source bin spreads into neighbouring bins with weights equal to the
//! Gaussian probability mass over each target bin, truncated at 6σ. Weights
//! are renormalised over the targets that exist, so the blur conserves the
//! total count exactly (up to rounding) even at the grid edges.

use ndarray::{Array, Axis, Dimension};
use statrs::function::erf::erf;

use super::DetectorModel;
use crate::{FrequencyGrid, HeraldedInterferogram, Interferogram, Result};

/// Below this width (in bins) the blur is a documented no-op.
pub const MIN_BLUR_SIGMA_BINS: f64 = 0.1;

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Per-source-bin `(first target, weights)` for a blur of `sigma_bins` on an
/// `n`-bin axis, or `None` when the blur is below [`MIN_BLUR_SIGMA_BINS`].
pub fn blur_kernel(n: usize, sigma_bins: f64) -> Option<Vec<(usize, Vec<f64>)>> {
    if !(sigma_bins >= MIN_BLUR_SIGMA_BINS) {
        return None;
    }
    let reach = (6.0 * sigma_bins).ceil() as isize;
    Some(
        (0..n as isize)
            .map(|k| {
                let lo = (k - reach).max(0);
                let hi = (k + reach).min(n as isize - 1);
                let mut w: Vec<f64> = (lo..=hi)
                    .map(|m| {
                        let d = (m - k) as f64;
                        normal_cdf((d + 0.5) / sigma_bins) - normal_cdf((d - 0.5) / sigma_bins)
                    })
                    .collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= s);
                (lo as usize, w)
            })
            .collect(),
    )
}

fn blur_axis<D: Dimension>(data: &mut Array<f64, D>, axis: Axis, kernel: &[(usize, Vec<f64>)]) {
    let n = data.len_of(axis);
    let mut buf = vec![0.0; n];
    for mut lane in data.lanes_mut(axis) {
        buf.iter_mut().for_each(|b| *b = 0.0);
        for (k, v) in lane.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let (lo, w) = &kernel[k];
            for (o, wi) in buf[*lo..*lo + w.len()].iter_mut().zip(w) {
                *o += v * wi;
            }
        }
        lane.iter_mut().zip(&buf).for_each(|(l, b)| *l = *b);
    }
}

fn sigma_bins(det: &DetectorModel, grid: &FrequencyGrid) -> f64 {
    det.blur_sigma_angular(grid.center_wavelength_nm()) / grid.spacing()
}

/// Blurs both frequency axes of a 2D interferogram.
pub fn apply_detector_blur(h: &Interferogram, det: &DetectorModel) -> Result<Interferogram> {
    det.validate()?;
    let mut c = h.counts().clone();
    if let Some(k) = blur_kernel(h.grid1().len(), sigma_bins(det, h.grid1())) {
        blur_axis(&mut c, Axis(0), &k);
    }
    if let Some(k) = blur_kernel(h.grid2().len(), sigma_bins(det, h.grid2())) {
        blur_axis(&mut c, Axis(1), &k);
    }
    Interferogram::from_computed(*h.grid1(), *h.grid2(), c)
}

/// Blurs all three axes (herald included) of a heralded histogram.
pub fn apply_detector_blur_3d(h: &HeraldedInterferogram, det: &DetectorModel) -> Result<HeraldedInterferogram> {
    det.validate()?;
    let mut c = h.counts().clone();
    for (axis, grid) in [(0, h.herald_grid()), (1, h.grid1()), (2, h.grid2())] {
        if let Some(k) = blur_kernel(grid.len(), sigma_bins(det, grid)) {
            blur_axis(&mut c, Axis(axis), &k);
        }
    }
    HeraldedInterferogram::from_computed(*h.herald_grid(), *h.grid1(), *h.grid2(), c)
}
