//! Classical ensemble oracle for coherent and thermal signals.
//!
//! Each shot draws the signal amplitude(s) and an independent uniformly
//! random reference phase, forms the classical output fields
//! `c, d = (E_s ± α e^{iωτ} e^{iφ})/√2` and records `|c(ω₁)|²|d(ω₂)|²`.
//! Shots are grouped in fixed blocks, each with its own ChaCha stream, and
//! block sums are reduced in block order, so the estimate is bit-identical
//! for any thread count.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{check_aliasing, SignalState, SignalStatistics};
use crate::{Error, Result, SpectralMode, C64};

/// Shots per RNG stream.
pub const MC_BLOCK_SHOTS: u64 = 1024;

/// Ensemble mean and its standard error per bin.
#[derive(Debug, Clone)]
pub struct MonteCarloEstimate {
    pub mean: Array2<f64>,
    pub std_error: Array2<f64>,
    pub shots: u64,
}

pub fn monte_carlo_interferogram(
    state: &SignalState,
    reference: &SpectralMode,
    tau: f64,
    stats: SignalStatistics,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    stats.validate()?;
    if matches!(stats, SignalStatistics::SinglePhoton) {
        return Err(Error::param("a single photon has no classical ensemble"));
    }
    if shots < 2 {
        return Err(Error::param("need at least two shots"));
    }
    let grid = state.grid()?;
    grid.require_match(reference.grid(), "signal vs reference")?;
    check_aliasing(&grid, tau)?;
    let comps = state.components()?;
    let n = grid.len();
    let n_mean = stats.mean_photons();
    let delayed: Vec<C64> = reference
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| a * C64::from_polar(1.0, grid.detuning(k) * tau))
        .collect();
    let cumulative: Vec<f64> = comps
        .iter()
        .scan(0.0, |acc, (p, _)| {
            *acc += p;
            Some(*acc)
        })
        .collect();

    let blocks = shots.div_ceil(MC_BLOCK_SHOTS);
    let partial: Vec<(Array2<f64>, Array2<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BLOCK_SHOTS.min(shots - b * MC_BLOCK_SHOTS);
            let mut sum = Array2::<f64>::zeros((n, n));
            let mut sq = Array2::<f64>::zeros((n, n));
            let mut field = vec![C64::default(); n];
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for _ in 0..count {
                field.iter_mut().for_each(|f| *f = C64::default());
                match stats {
                    SignalStatistics::Thermal { .. } => {
                        for (p, m) in &comps {
                            let s = (n_mean * p / 2.0).sqrt();
                            let amp = C64::new(
                                s * rng.sample::<f64, _>(StandardNormal),
                                s * rng.sample::<f64, _>(StandardNormal),
                            );
                            for (f, a) in field.iter_mut().zip(m.amplitudes()) {
                                *f += amp * a;
                            }
                        }
                    }
                    _ => {
                        let u: f64 = rng.random();
                        let k = cumulative.partition_point(|c| *c < u).min(comps.len() - 1);
                        let amp = C64::from_polar(n_mean.sqrt(), 2.0 * PI * rng.random::<f64>());
                        for (f, a) in field.iter_mut().zip(comps[k].1.amplitudes()) {
                            *f = amp * a;
                        }
                    }
                }
                let phi = C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
                for k in 0..n {
                    let r = delayed[k] * phi;
                    c[k] = 0.5 * (field[k] + r).norm_sqr();
                    d[k] = 0.5 * (field[k] - r).norm_sqr();
                }
                for i in 0..n {
                    let ci = c[i];
                    let mut srow = sum.row_mut(i);
                    for (s, dj) in srow.iter_mut().zip(&d) {
                        *s += ci * dj;
                    }
                    let mut qrow = sq.row_mut(i);
                    for (q, dj) in qrow.iter_mut().zip(&d) {
                        let g = ci * dj;
                        *q += g * g;
                    }
                }
            }
            (sum, sq)
        })
        .collect();

    let mut sum = Array2::<f64>::zeros((n, n));
    let mut sq = Array2::<f64>::zeros((n, n));
    for (s, q) in &partial {
        sum += s;
        sq += q;
    }
    let m = shots as f64;
    let mean = &sum / m;
    let std_error = Array2::from_shape_fn((n, n), |(i, j)| {
        let var = (sq[[i, j]] / m - mean[[i, j]].powi(2)).max(0.0) * m / (m - 1.0);
        (var / m).sqrt()
    });
    Ok(MonteCarloEstimate { mean, std_error, shots })
}
