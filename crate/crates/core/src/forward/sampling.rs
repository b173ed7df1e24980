use ndarray::{Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::{Error, HeraldedInterferogram, Interferogram, Result};

/// Multinomial draw of `n` events over bins with the given non-negative
/// weights, as a chain of conditional binomials.
pub(crate) fn multinomial(weights: &[f64], n: u64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let mut suffix = vec![0.0; weights.len() + 1];
    for k in (0..weights.len()).rev() {
        suffix[k] = suffix[k + 1] + weights[k];
    }
    if !(suffix[0] > 0.0) || !suffix[0].is_finite() {
        return Err(Error::ZeroMatrix("cannot sample from an all-zero expectation"));
    }
    let mut out = vec![0u64; weights.len()];
    let mut left = n;
    for (k, &w) in weights.iter().enumerate() {
        if left == 0 {
            break;
        }
        if w <= 0.0 {
            continue;
        }
        let p = w / suffix[k];
        let x = if p >= 1.0 {
            left
        } else {
            Binomial::new(left, p).expect("probability in [0, 1)").sample(rng)
        };
        out[k] = x;
        left -= x;
    }
    Ok(out)
}

/// Integer-count interferogram holding `total_events` events drawn
/// multinomially from `expected`.
pub fn sample_counts(expected: &Interferogram, total_events: u64, seed: u64) -> Result<Interferogram> {
    if total_events == 0 {
        return Err(Error::param("total_events must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = expected.counts().iter().copied().collect();
    let draws = multinomial(&w, total_events, &mut rng)?;
    let counts = Array2::from_shape_vec(expected.counts().dim(), draws.into_iter().map(|c| c as f64).collect())
        .expect("shape preserved");
    Interferogram::new(*expected.grid1(), *expected.grid2(), counts)
}

pub fn sample_counts_3d(expected: &HeraldedInterferogram, total_events: u64, seed: u64) -> Result<HeraldedInterferogram> {
    if total_events == 0 {
        return Err(Error::param("total_events must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = expected.counts().iter().copied().collect();
    let draws = multinomial(&w, total_events, &mut rng)?;
    let counts = Array3::from_shape_vec(expected.counts().dim(), draws.into_iter().map(|c| c as f64).collect())
        .expect("shape preserved");
    HeraldedInterferogram::new(*expected.herald_grid(), *expected.grid1(), *expected.grid2(), counts)
}

/// Adds a spectrally flat background carrying `fraction` of the signal's
/// total weight.
pub fn with_flat_background(expected: &HeraldedInterferogram, fraction: f64) -> Result<HeraldedInterferogram> {
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::param("background fraction must be non-negative"));
    }
    let level = fraction * expected.total() / expected.counts().len() as f64;
    HeraldedInterferogram::new(
        *expected.herald_grid(),
        *expected.grid1(),
        *expected.grid2(),
        expected.counts().mapv(|v| v + level),
    )
}
