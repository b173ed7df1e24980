//! Two-dimensional DFT helpers on row-major `ndarray` matrices.
//!
//! Forward transforms are unnormalised, `F[k,l] = Σ g[m,n]·e^{-2πi(km/M + ln/N)}`;
//! the inverse carries the `1/(MN)` factor.

use ndarray::{Array2, Axis};
use rustfft::FftPlanner;

use crate::C64;

fn transform_axis(data: &mut Array2<C64>, axis: Axis, inverse: bool, planner: &mut FftPlanner<f64>) {
    let len = data.len_of(axis);
    let fft = if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    };
    let mut buf = vec![C64::default(); len];
    let mut scratch = vec![C64::default(); fft.get_inplace_scratch_len()];
    for mut lane in data.lanes_mut(axis) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (v, b) in lane.iter_mut().zip(&buf) {
            *v = *b;
        }
    }
}

pub(crate) fn fft2(data: &Array2<C64>) -> Array2<C64> {
    let mut out = data.clone();
    let mut planner = FftPlanner::new();
    transform_axis(&mut out, Axis(1), false, &mut planner);
    transform_axis(&mut out, Axis(0), false, &mut planner);
    out
}

pub(crate) fn ifft2(data: &Array2<C64>) -> Array2<C64> {
    let mut out = data.clone();
    let mut planner = FftPlanner::new();
    transform_axis(&mut out, Axis(1), true, &mut planner);
    transform_axis(&mut out, Axis(0), true, &mut planner);
    let scale = 1.0 / out.len() as f64;
    out.mapv_inplace(|z| z * scale);
    out
}

/// Forward transform of a real matrix zero-padded to `pad` times its size
/// along each axis.
pub(crate) fn fft2_real_padded(data: &Array2<f64>, pad: usize) -> Array2<C64> {
    let (m, n) = data.dim();
    let mut padded = Array2::<C64>::zeros((m * pad, n * pad));
    for ((i, j), v) in data.indexed_iter() {
        padded[[i, j]] = C64::new(*v, 0.0);
    }
    fft2(&padded)
}
