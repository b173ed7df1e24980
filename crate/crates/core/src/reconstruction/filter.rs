//! Sideband location and Fourier filtering.
//!
//! Transforms use `F(t₁,t₂) = Σ g(ω₁,ω₂) e^{−i(ω₁t₁+ω₂t₂)}`. The interference
//! term `−¼Γ ∝ e^{i(ω₂−ω₁)τ}` then sits at `(t₁,t₂) = (−τ, +τ)` and its
//! conjugate at `(+τ, −τ)`.

use ndarray::{Array1, Array2};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{
    fft2::{fft2_real_padded, ifft2},
    Error, FrequencyGrid, Interferogram, Result, C64,
};

/// Zero-padding factor of the sideband search.
pub const LOCATE_PAD: usize = 4;
/// Zero-padding factor of the filter, which keeps the frequency-domain
/// convolution from wrapping around the grid.
pub const FILTER_PAD: usize = 2;
/// Required ratio of the sideband peak to the median magnitude in the
/// search region.
pub const SIDEBAND_SNR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum WindowShape {
    /// `exp(−½Σ((t−c)/σ)²)`.
    Gaussian,
    /// Radially symmetric (in σ units) flat top with a raised-cosine edge.
    /// The window reaches zero at `3σ`; the cosine edge occupies the outer
    /// `taper` fraction of that radius.
    Tukey { taper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub shape: WindowShape,
    /// Window centre `(t₁, t₂)` in fs.
    pub center: (f64, f64),
    /// Widths `σ_t` per axis in fs.
    pub widths: (f64, f64),
}

impl FilterSpec {
    pub fn new(shape: WindowShape, center: (f64, f64), widths: (f64, f64)) -> Result<Self> {
        if !(widths.0 > 0.0 && widths.1 > 0.0 && widths.0.is_finite() && widths.1.is_finite()) {
            return Err(Error::param("filter widths must be positive"));
        }
        if !(center.0.is_finite() && center.1.is_finite()) {
            return Err(Error::param("filter centre must be finite"));
        }
        if let WindowShape::Tukey { taper } = shape {
            if !(0.0..=1.0).contains(&taper) {
                return Err(Error::param(format!("Tukey taper {taper} outside [0, 1]")));
            }
        }
        let d = ((center.0 / widths.0).powi(2) + (center.1 / widths.1).powi(2)).sqrt();
        if d < 3.0 {
            return Err(Error::FilterOverlapsBaseband { distance_widths: d });
        }
        Ok(Self { shape, center, widths })
    }

    /// Gaussian window of width `τ/4` on the `(−τ, +τ)` sideband.
    pub fn gaussian_for_delay(tau: f64) -> Result<Self> {
        Self::new(WindowShape::Gaussian, (-tau, tau), (tau.abs() / 4.0, tau.abs() / 4.0))
    }

    /// Tukey window of width `τ/4` (support radius `0.75τ`) on the
    /// `(−τ, +τ)` sideband.
    pub fn tukey_for_delay(tau: f64, taper: f64) -> Result<Self> {
        Self::new(WindowShape::Tukey { taper }, (-tau, tau), (tau.abs() / 4.0, tau.abs() / 4.0))
    }

    /// Same window moved to the conjugate sideband.
    pub fn mirrored(&self) -> Self {
        Self {
            center: (-self.center.0, -self.center.1),
            ..*self
        }
    }

    /// True when the window sits on the conjugate `(+τ, −τ)` sideband.
    pub fn is_conjugate(&self) -> bool {
        self.center.0 > self.center.1
    }

    pub fn value(&self, t1: f64, t2: f64) -> f64 {
        let x = (t1 - self.center.0) / self.widths.0;
        let y = (t2 - self.center.1) / self.widths.1;
        match self.shape {
            WindowShape::Gaussian => (-0.5 * (x * x + y * y)).exp(),
            WindowShape::Tukey { taper } => {
                let rho = (x * x + y * y).sqrt() / 3.0;
                let flat = 1.0 - taper;
                if rho <= flat {
                    1.0
                } else if rho >= 1.0 {
                    0.0
                } else {
                    0.5 * (1.0 + (std::f64::consts::PI * (rho - flat) / taper).cos())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandLocation {
    pub t1: f64,
    pub t2: f64,
    /// `(t₂ − t₁)/2`.
    pub tau: f64,
    /// Peak magnitude over the median of the search region.
    pub snr: f64,
}

fn fft1_abs(v: &[f64], pad: usize) -> Vec<f64> {
    let n = v.len() * pad;
    let mut buf: Vec<C64> = v.iter().map(|x| C64::new(*x, 0.0)).collect();
    buf.resize(n, C64::default());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|z| z.norm()).collect()
}

/// Smallest positive time beyond which the baseband (judged from the
/// marginal's transform) is below 1 % of its peak, at least three unpadded
/// time bins.
fn guard_time(marginal: &[f64], grid: &FrequencyGrid) -> f64 {
    let mag = fft1_abs(marginal, LOCATE_PAD);
    let n = mag.len();
    let times = grid.fft_times(n);
    let floor = 0.01 * mag[0];
    let k = (1..n / 2).find(|&k| mag[k] < floor).unwrap_or(n / 2);
    let min_guard = 3.0 * 2.0 * std::f64::consts::PI / (grid.len() as f64 * grid.spacing());
    times[k].max(min_guard)
}

fn log_parabola(a: f64, b: f64, c: f64) -> f64 {
    let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
    let d = la - 2.0 * lb + lc;
    if d.abs() < 1e-300 || !d.is_finite() {
        0.0
    } else {
        (0.5 * (la - lc) / d).clamp(-0.5, 0.5)
    }
}

/// Finds the interference sideband in the `t₁ < 0, t₂ > 0` quadrant.
pub fn locate_sideband(g: &Interferogram) -> Result<SidebandLocation> {
    let c = g.counts();
    if c.iter().all(|v| *v == 0.0) {
        return Err(Error::NoSideband("interferogram is empty".into()));
    }
    let f = fft2_real_padded(c, LOCATE_PAD);
    let (n1, n2) = f.dim();
    let t1s = g.grid1().fft_times(n1);
    let t2s = g.grid2().fft_times(n2);
    let m1: Vec<f64> = c.sum_axis(ndarray::Axis(1)).to_vec();
    let m2: Vec<f64> = c.sum_axis(ndarray::Axis(0)).to_vec();
    let guard1 = guard_time(&m1, g.grid1());
    let guard2 = guard_time(&m2, g.grid2());

    let rows: Vec<usize> = (0..n1).filter(|&k| t1s[k] < -guard1).collect();
    let cols: Vec<usize> = (0..n2).filter(|&k| t2s[k] > guard2).collect();
    if rows.len() < 3 || cols.len() < 3 {
        return Err(Error::NoSideband("search region is empty".into()));
    }
    let mag = f.mapv(|z| z.norm());
    let mut values = Vec::with_capacity(rows.len() * cols.len());
    let mut best = (0usize, 0usize, -1.0);
    for &i in &rows {
        for &j in &cols {
            let v = mag[[i, j]];
            values.push(v);
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    values.sort_unstable_by(f64::total_cmp);
    let median = values[values.len() / 2];
    let (bi, bj, peak) = best;
    let snr = if median > 0.0 { peak / median } else { f64::INFINITY };
    let interior = rows.contains(&(bi.wrapping_sub(1)))
        && rows.contains(&(bi + 1))
        && cols.contains(&(bj.wrapping_sub(1)))
        && cols.contains(&(bj + 1));
    if !interior {
        return Err(Error::NoSideband(
            "strongest off-baseband component lies on the edge of the search region".into(),
        ));
    }
    for di in [-1isize, 0, 1] {
        for dj in [-1isize, 0, 1] {
            if (di, dj) != (0, 0) {
                let v = mag[[(bi as isize + di) as usize, (bj as isize + dj) as usize]];
                if v >= peak {
                    return Err(Error::NoSideband("no isolated off-baseband peak".into()));
                }
            }
        }
    }
    if snr < SIDEBAND_SNR {
        return Err(Error::NoSideband(format!(
            "peak is {snr:.2} times the noise floor, need {SIDEBAND_SNR}"
        )));
    }
    let d1 = log_parabola(mag[[bi - 1, bj]], peak, mag[[bi + 1, bj]]);
    let d2 = log_parabola(mag[[bi, bj - 1]], peak, mag[[bi, bj + 1]]);
    let dt1 = t1s[1] - t1s[0];
    let dt2 = t2s[1] - t2s[0];
    let t1 = t1s[bi] + d1 * dt1;
    let t2 = t2s[bj] + d2 * dt2;
    Ok(SidebandLocation {
        t1,
        t2,
        tau: 0.5 * (t2 - t1),
        snr,
    })
}

/// Filtered sideband rescaled to estimate `Γ` (or `Γ*` for the conjugate
/// window).
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSideband {
    pub grid1: FrequencyGrid,
    pub grid2: FrequencyGrid,
    pub gamma: Array2<C64>,
    pub conjugate: bool,
}

/// Multiplies the (padded) transform of `g` by `window(t₁, t₂)` and
/// transforms back onto the original grid.
pub(crate) fn apply_window(g: &Interferogram, window: impl Fn(f64, f64) -> f64) -> Array2<C64> {
    let (n1, n2) = g.counts().dim();
    let mut f = fft2_real_padded(g.counts(), FILTER_PAD);
    let (p1, p2) = f.dim();
    let t1s = Array1::from(g.grid1().fft_times(p1));
    let t2s = Array1::from(g.grid2().fft_times(p2));
    for ((i, j), z) in f.indexed_iter_mut() {
        let w = window(t1s[i], t2s[j]);
        *z = if w == 0.0 { C64::default() } else { *z * w };
    }
    let back = ifft2(&f);
    back.slice(ndarray::s![..n1, ..n2]).to_owned()
}

pub fn fourier_filter(g: &Interferogram, spec: &FilterSpec) -> Result<FilteredSideband> {
    let spec = FilterSpec::new(spec.shape, spec.center, spec.widths)?;
    let gamma = apply_window(g, |t1, t2| spec.value(t1, t2)).mapv(|z| z * -4.0);
    Ok(FilteredSideband {
        grid1: *g.grid1(),
        grid2: *g.grid2(),
        gamma,
        conjugate: spec.is_conjugate(),
    })
}

/// `|F(t₁,t₂)|` of an interferogram with both time axes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPlane {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub magnitude: Array2<f64>,
}

pub fn fourier_plane(g: &Interferogram) -> FourierPlane {
    let f = fft2_real_padded(g.counts(), 1);
    let (n1, n2) = f.dim();
    let order = |n: usize| -> Vec<usize> { (0..n).map(|k| (k + n / 2) % n).collect() };
    let (o1, o2) = (order(n1), order(n2));
    let (t1s, t2s) = (g.grid1().fft_times(n1), g.grid2().fft_times(n2));
    let cell = g.grid1().spacing() * g.grid2().spacing();
    FourierPlane {
        t1: o1.iter().map(|&k| t1s[k]).collect(),
        t2: o2.iter().map(|&k| t2s[k]).collect(),
        magnitude: Array2::from_shape_fn((n1, n2), |(i, j)| f[[o1[i], o2[j]]].norm() * cell),
    }
}
