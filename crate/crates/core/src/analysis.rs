//! Derived quantities: Schmidt decomposition, g⁽²⁾, chirp fits, fringe
//! visibility and comparison metrics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix6, Vector6};
use ndarray::Array2;

use crate::{
    reconstruction::{apply_window, locate_sideband, FilterSpec, WindowShape},
    Error, Interferogram, Jsa, Result, SpectralMode, C64,
};

/// Schmidt modes kept in a [`SchmidtResult`].
pub const MAX_SCHMIDT_MODES: usize = 16;

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Schmidt coefficients λₖ, descending, `Σλₖ² = 1`.
    pub coefficients: Vec<f64>,
    pub signal_modes: Vec<SpectralMode>,
    pub herald_modes: Vec<SpectralMode>,
    /// Schmidt number `1/Σλₖ⁴`.
    pub k: f64,
}

/// Singular-value decomposition of `f·√(Δω₁Δω₂)`, so that
/// `f(ω₁,ω₂) ∝ Σ λₖ uₖ(ω₁) vₖ(ω₂)` with unit-norm modes.
pub fn schmidt(jsa: &Jsa) -> Result<SchmidtResult> {
    let f = jsa.matrix();
    if f.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroMatrix("Schmidt decomposition of a zero JSA"));
    }
    let (n1, n2) = f.dim();
    let root = jsa.cell().sqrt();
    let m = DMatrix::from_fn(n1, n2, |i, j| f[[i, j]] * root);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let coefficients: Vec<f64> = order.iter().map(|&k| svd.singular_values[k] / total.sqrt()).collect();
    let k = 1.0 / coefficients.iter().map(|l| l.powi(4)).sum::<f64>();
    let (s1, s2) = (jsa.grid1().spacing().sqrt(), jsa.grid2().spacing().sqrt());
    let mut signal_modes = Vec::new();
    let mut herald_modes = Vec::new();
    for &idx in order.iter().take(MAX_SCHMIDT_MODES) {
        let uc: Vec<C64> = u.column(idx).iter().map(|z| z / s1).collect();
        let vr: Vec<C64> = vt.row(idx).iter().map(|z| z / s2).collect();
        signal_modes.push(SpectralMode::new(*jsa.grid1(), uc)?);
        herald_modes.push(SpectralMode::new(*jsa.grid2(), vr)?);
    }
    Ok(SchmidtResult {
        coefficients,
        signal_modes,
        herald_modes,
        k,
    })
}

/// Heralded-arm marginal autocorrelation `g⁽²⁾ = 1 + 1/K`.
pub fn g2_predicted(k: f64) -> Result<f64> {
    if k.is_nan() || k < 1.0 {
        return Err(Error::param(format!("Schmidt number must be at least 1, got {k}")));
    }
    Ok(1.0 + 1.0 / k)
}

/// `|Σ a*·b|² / (‖a‖²‖b‖²)`.
pub fn overlap(a: &Jsa, b: &Jsa) -> Result<f64> {
    a.grid1().require_match(b.grid1(), "overlap")?;
    a.grid2().require_match(b.grid2(), "overlap")?;
    let ip: C64 = a.matrix().iter().zip(b.matrix().iter()).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.matrix().iter().map(|z| z.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroMatrix("overlap with a zero JSA"));
    }
    Ok((ip.norm_sqr() / (na * nb)).min(1.0))
}

/// Bins below this fraction of the peak amplitude are left out of phase
/// unwrapping and fitting.
pub const UNWRAP_LEVEL: f64 = 0.05;

#[derive(PartialEq)]
struct Candidate {
    amp: f64,
    at: (usize, usize),
    from: (usize, usize),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.amp
            .total_cmp(&other.amp)
            .then_with(|| other.at.cmp(&self.at))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Unwrapped phase of `f`, grown from the strongest bin in order of
/// decreasing amplitude over bins with `|f| ≥ level·max|f|`. Rejected bins
/// are `None`.
pub fn unwrap_phase(jsa: &Jsa, level: f64) -> Result<Array2<Option<f64>>> {
    let f = jsa.matrix();
    let (n1, n2) = f.dim();
    let amp = f.mapv(|z| z.norm());
    let (start, peak) = amp
        .indexed_iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(ij, v)| (ij, *v))
        .expect("non-empty");
    if peak == 0.0 {
        return Err(Error::ZeroMatrix("phase of a zero JSA"));
    }
    let floor = level * peak;
    let mut out: Array2<Option<f64>> = Array2::from_elem((n1, n2), None);
    let mut heap = BinaryHeap::new();
    out[start] = Some(f[start].arg());
    let neighbours = |(i, j): (usize, usize)| {
        let mut v = Vec::with_capacity(4);
        if i > 0 {
            v.push((i - 1, j));
        }
        if i + 1 < n1 {
            v.push((i + 1, j));
        }
        if j > 0 {
            v.push((i, j - 1));
        }
        if j + 1 < n2 {
            v.push((i, j + 1));
        }
        v
    };
    let push = |heap: &mut BinaryHeap<Candidate>, out: &Array2<Option<f64>>, at: (usize, usize)| {
        for nb in neighbours(at) {
            if out[nb].is_none() && amp[nb] >= floor {
                heap.push(Candidate {
                    amp: amp[nb],
                    at: nb,
                    from: at,
                });
            }
        }
    };
    push(&mut heap, &out, start);
    while let Some(c) = heap.pop() {
        if out[c.at].is_some() {
            continue;
        }
        let base = out[c.from].expect("parent accepted");
        let raw = f[c.at].arg();
        let k = ((base - raw) / (2.0 * PI)).round();
        out[c.at] = Some(raw + 2.0 * PI * k);
        push(&mut heap, &out, c.at);
    }
    for i in 0..n1 {
        for j in 0..n2 {
            let Some(u) = out[[i, j]] else { continue };
            for nb in [(i + 1, j), (i, j + 1)] {
                if nb.0 < n1 && nb.1 < n2 {
                    if let Some(v) = out[nb] {
                        if (u - v).abs() > PI {
                            return Err(Error::UnwrapFailure {
                                jump: (u - v).abs(),
                                at: (i, j),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpFit {
    /// Cross-term coefficient β (fs²) of the phase `−βω₁ω₂`.
    pub beta: f64,
    pub beta_std_error: f64,
    /// `[c₀, c₁, c₂, c₁₁, c₂₂, β]` of `c₀ + c₁ω₁ + c₂ω₂ + c₁₁ω₁² + c₂₂ω₂² − βω₁ω₂`
    /// in rad, fs and fs².
    pub coefficients: [f64; 6],
    pub bins_used: usize,
    /// Weighted RMS phase residual (rad).
    pub residual_rms: f64,
}

/// Weighted (`|f|²`) least-squares fit of the unwrapped JSA phase.
pub fn fit_chirp(jsa: &Jsa) -> Result<ChirpFit> {
    let phase = unwrap_phase(jsa, UNWRAP_LEVEL)?;
    let (d1, d2) = (jsa.grid1().spacing(), jsa.grid2().spacing());
    let mut xtwx = Matrix6::<f64>::zeros();
    let mut xtwy = Vector6::<f64>::zeros();
    let mut rows = Vec::new();
    for ((i, j), u) in phase.indexed_iter() {
        let Some(u) = *u else { continue };
        let x = jsa.grid1().detuning(i) / d1;
        let y = jsa.grid2().detuning(j) / d2;
        let row = Vector6::new(1.0, x, y, x * x, y * y, -x * y);
        let w = jsa.matrix()[[i, j]].norm_sqr();
        xtwx += row * row.transpose() * w;
        xtwy += row * (w * u);
        rows.push((row, w, u));
    }
    if rows.len() <= 6 {
        return Err(Error::param(format!("only {} bins above the amplitude floor", rows.len())));
    }
    let inv = xtwx
        .try_inverse()
        .ok_or_else(|| Error::param("phase fit is singular (support too narrow)"))?;
    let c = inv * xtwy;
    let (mut wr2, mut wsum) = (0.0, 0.0);
    for (row, w, u) in &rows {
        let r = u - row.dot(&c);
        wr2 += w * r * r;
        wsum += w;
    }
    let sigma2 = wr2 / (rows.len() - 6) as f64;
    let scale = [1.0, 1.0 / d1, 1.0 / d2, 1.0 / (d1 * d1), 1.0 / (d2 * d2), 1.0 / (d1 * d2)];
    let coefficients: [f64; 6] = std::array::from_fn(|k| c[k] * scale[k]);
    Ok(ChirpFit {
        beta: coefficients[5],
        beta_std_error: (sigma2 * inv[(5, 5)]).sqrt() * scale[5],
        coefficients,
        bins_used: rows.len(),
        residual_rms: (wr2 / wsum).sqrt(),
    })
}

/// Level, relative to the peak baseband intensity on the antidiagonal, that
/// delimits the fringe window.
pub const VISIBILITY_WINDOW_LEVEL: f64 = 0.1;

fn bilinear(m: &Array2<f64>, x: f64, y: f64) -> Option<f64> {
    let (n1, n2) = m.dim();
    if x < 0.0 || y < 0.0 || x > (n1 - 1) as f64 || y > (n2 - 1) as f64 {
        return None;
    }
    let (i, j) = ((x.floor() as usize).min(n1 - 2), (y.floor() as usize).min(n2 - 2));
    let (fx, fy) = (x - i as f64, y - j as f64);
    Some(
        m[[i, j]] * (1.0 - fx) * (1.0 - fy)
            + m[[i + 1, j]] * fx * (1.0 - fy)
            + m[[i, j + 1]] * (1.0 - fx) * fy
            + m[[i + 1, j + 1]] * fx * fy,
    )
}

/// Fringe visibility along the antidiagonal through the intensity centroid.
///
/// The pattern is split by Fourier filtering into the fringe-free
/// background `b` and the interference sideband `s`, so `G = b + 2Re s`
/// and the local contrast `(max−min)/(max+min)` equals `2|s|/b`. The result
/// is the `b`-weighted mean of that contrast over the central fringe period.
pub fn fringe_visibility(g: &Interferogram) -> Result<f64> {
    let loc = locate_sideband(g).map_err(|e| Error::InsufficientFringes(e.to_string()))?;
    let tau = loc.tau;
    let width = tau.abs() / 4.0;
    let shape = WindowShape::Tukey { taper: 0.5 };
    let side = FilterSpec::new(shape, (loc.t1, loc.t2), (width, width))?;
    let base_window = FilterSpec {
        shape,
        center: (0.0, 0.0),
        widths: (width, width),
    };
    let b = apply_window(g, |t1, t2| base_window.value(t1, t2)).mapv(|z| z.re);
    let s = apply_window(g, |t1, t2| side.value(t1, t2)).mapv(|z| z.norm());

    let (g1, g2) = (g.grid1(), g.grid2());
    let total = g.total();
    let (mut c1, mut c2) = (0.0, 0.0);
    for ((i, j), v) in g.counts().indexed_iter() {
        c1 += v * g1.detuning(i);
        c2 += v * g2.detuning(j);
    }
    let (p1, p2) = (g1.position(c1 / total), g2.position(c2 / total));
    // along the line ω₁ = c₁ + x, ω₂ = c₂ − x, one fringe spans x = π/τ
    let period = PI / tau.abs();
    let step = g1.spacing().min(g2.spacing()) / 8.0;
    let reach = (g1.span() + g2.span()) as f64;
    let samples = (reach / step) as i64;
    let at = |x: f64| {
        let (a, b2) = (p1 + x / g1.spacing(), p2 - x / g2.spacing());
        Some((bilinear(&b, a, b2)?, bilinear(&s, a, b2)?))
    };
    let line: Vec<(f64, f64)> = (-samples..=samples)
        .filter_map(|k| {
            let x = k as f64 * step;
            at(x).map(|(bb, _)| (x, bb))
        })
        .collect();
    let bmax = line.iter().map(|p| p.1).fold(0.0, f64::max);
    if !(bmax > 0.0) {
        return Err(Error::InsufficientFringes("no intensity on the antidiagonal".into()));
    }
    let inside: Vec<f64> = line
        .iter()
        .filter(|p| p.1 >= VISIBILITY_WINDOW_LEVEL * bmax)
        .map(|p| p.0)
        .collect();
    let extent = inside.last().unwrap() - inside.first().unwrap();
    if extent < 2.0 * period {
        return Err(Error::InsufficientFringes(format!(
            "pattern spans {:.2} fringe periods, need at least 2",
            extent / period
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    let n = 64;
    for k in 0..=n {
        let x = -0.5 * period + period * k as f64 / n as f64;
        if let Some((bb, ss)) = at(x) {
            if bb > 0.0 {
                num += 2.0 * ss;
                den += bb;
            }
        }
    }
    if den <= 0.0 {
        return Err(Error::InsufficientFringes("central fringe has no intensity".into()));
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Pearson χ² of observed counts against an expectation scaled to the same
/// total. Expected bins below [`CHI_SQUARE_MIN_EXPECTED`] are pooled into
/// one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub dof: usize,
}

impl ChiSquare {
    pub fn per_dof(&self) -> f64 {
        self.chi2 / self.dof as f64
    }
}

pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::param("observed and expected lengths differ"));
    }
    let to: f64 = observed.iter().sum();
    let te: f64 = expected.iter().sum();
    if !(to > 0.0 && te > 0.0) {
        return Err(Error::ZeroMatrix("chi-square of empty histograms"));
    }
    let s = to / te;
    let (mut chi2, mut bins) = (0.0, 0usize);
    let (mut po, mut pe) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected) {
        let e = e * s;
        if e < CHI_SQUARE_MIN_EXPECTED {
            po += o;
            pe += e;
        } else {
            chi2 += (o - e).powi(2) / e;
            bins += 1;
        }
    }
    if pe > 0.0 {
        chi2 += (po - pe).powi(2) / pe;
        bins += 1;
    }
    if bins < 2 {
        return Err(Error::param("too few populated bins for a chi-square test"));
    }
    Ok(ChiSquare { chi2, dof: bins - 1 })
}

#[cfg(test)]
mod tests;
