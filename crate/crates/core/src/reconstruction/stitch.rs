//! Phase stitching of JSA cross-sections.
//!
//! Dataset A holds columns `f(·, ω₂ⱼ)` each known up to a phase `θⱼ`;
//! dataset B holds rows `f(ω₁ᵢ, ·)` each known up to `φᵢ`. The phases
//! minimise `Σᵢⱼ wᵢⱼ |e^{iθⱼ}Aᵢⱼ − e^{iφᵢ}Bᵢⱼ|²` with `wᵢⱼ = |Aᵢⱼ||Bᵢⱼ|`,
//! found by alternating closed-form phase updates.

use ndarray::Array2;

use crate::{Error, FrequencyGrid, Jsa, Result, SpectralMode, C64};

pub const STITCH_TOLERANCE: f64 = 1e-8;
pub const STITCH_MAX_ITERATIONS: usize = 100_000;

/// Per-slice diagnostics of a cross-section reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceReport {
    pub masked_fraction: f64,
    pub hermiticity_residual: f64,
    pub clipped_mass: f64,
    pub purity: f64,
}

/// Cross-sections of a JSA along the signal axis, one per conditioning bin.
#[derive(Debug, Clone)]
pub struct CrossSections {
    pub signal_grid: FrequencyGrid,
    pub herald_grid: FrequencyGrid,
    /// Field estimate per conditioning bin; `None` where nothing was measured.
    pub sections: Vec<Option<SpectralMode>>,
    pub reports: Vec<Option<SliceReport>>,
}

impl CrossSections {
    pub fn new(signal_grid: FrequencyGrid, herald_grid: FrequencyGrid) -> Self {
        Self {
            signal_grid,
            herald_grid,
            sections: vec![None; herald_grid.len()],
            reports: vec![None; herald_grid.len()],
        }
    }

    /// Exact cross-sections of a known JSA (columns), for testing and
    /// simulation shortcuts.
    pub fn from_jsa_columns(jsa: &Jsa) -> Self {
        let mut s = Self::new(*jsa.grid1(), *jsa.grid2());
        for j in 0..jsa.grid2().len() {
            s.sections[j] = Some(jsa.column(j));
        }
        s
    }

    fn matrix(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.signal_grid.len(), self.herald_grid.len()));
        for (j, s) in self.sections.iter().enumerate() {
            if let Some(s) = s {
                for (i, v) in s.amplitudes().iter().enumerate() {
                    m[[i, j]] = *v;
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct StitchedJsa {
    /// Normalised JSA with `arg f = 0` at the zero-detuning bin (or at the
    /// amplitude peak when that bin is empty).
    pub jsa: Jsa,
    pub column_phases: Vec<f64>,
    pub row_phases: Vec<f64>,
    pub iterations: usize,
    /// Weighted misfit relative to the weighted power of both datasets.
    pub residual: f64,
    pub components: usize,
    pub column_component: Vec<Option<usize>>,
    pub row_component: Vec<Option<usize>>,
    /// `(|A| − |B|)/max|f|` where both datasets are non-zero.
    pub amplitude_discrepancy: Array2<f64>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn wrap(x: f64) -> f64 {
    C64::from_polar(1.0, x).arg()
}

/// Merges column sections `a` with optional row sections `b` into one JSA.
/// `b` is indexed by the first axis of `a` and resolves along the second.
pub fn assemble_jsa(a: &CrossSections, b: Option<&CrossSections>) -> Result<StitchedJsa> {
    let grid1 = a.signal_grid;
    let grid2 = a.herald_grid;
    let (n1, n2) = (grid1.len(), grid2.len());
    let am = a.matrix();
    let mut bm = match b {
        Some(b) => {
            b.signal_grid.require_match(&grid2, "dataset B signal axis vs dataset A herald axis")?;
            b.herald_grid.require_match(&grid1, "dataset B herald axis vs dataset A signal axis")?;
            b.matrix().t().to_owned()
        }
        None => Array2::zeros((n1, n2)),
    };
    let col_active: Vec<bool> = (0..n2).map(|j| am.column(j).iter().any(|z| z.norm() > 0.0)).collect();
    let row_active: Vec<bool> = (0..n1).map(|i| bm.row(i).iter().any(|z| z.norm() > 0.0)).collect();
    if !col_active.iter().any(|x| *x) && !row_active.iter().any(|x| *x) {
        return Err(Error::ZeroMatrix("no cross-sections to assemble"));
    }

    // bring B to A's scale on the common support
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in am.iter().zip(bm.iter()) {
        if x.norm() > 0.0 && y.norm() > 0.0 {
            pa += x.norm_sqr();
            pb += y.norm_sqr();
        }
    }
    if pa > 0.0 && pb > 0.0 {
        let s = (pa / pb).sqrt();
        bm.mapv_inplace(|z| z * s);
    }

    let w = Array2::from_shape_fn((n1, n2), |(i, j)| am[[i, j]].norm() * bm[[i, j]].norm());
    let wmax = w.iter().copied().fold(0.0, f64::max);
    let edge = |i: usize, j: usize| wmax > 0.0 && w[[i, j]] > 1e-12 * wmax;

    // nodes: rows 0..n1, columns n1..n1+n2
    let mut uf = UnionFind((0..n1 + n2).collect());
    for i in 0..n1 {
        for j in 0..n2 {
            if edge(i, j) {
                uf.union(i, n1 + j);
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut label = |uf: &mut UnionFind, node: usize| {
        let r = uf.find(node);
        match roots.iter().position(|x| *x == r) {
            Some(k) => k,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        }
    };
    let column_component: Vec<Option<usize>> =
        (0..n2).map(|j| col_active[j].then(|| label(&mut uf, n1 + j))).collect();
    let row_component: Vec<Option<usize>> = (0..n1).map(|i| row_active[i].then(|| label(&mut uf, i))).collect();
    let components = roots.len();

    // gauge: first active column of each component, else first active row
    let mut gauge_col: Vec<Option<usize>> = vec![None; components];
    let mut gauge_row: Vec<Option<usize>> = vec![None; components];
    for (j, c) in column_component.iter().enumerate() {
        if let Some(c) = c {
            gauge_col[*c].get_or_insert(j);
        }
    }
    for (i, c) in row_component.iter().enumerate() {
        if let Some(c) = c {
            gauge_row[*c].get_or_insert(i);
        }
    }

    let mut theta = vec![0.0; n2];
    let mut phi = vec![0.0; n1];
    let mut iterations = 0;
    // P = w·A·B*; φᵢ = arg Σⱼ Pᵢⱼ e^{iθⱼ}, θⱼ = arg Σᵢ Pᵢⱼ* e^{iφᵢ}
    let p = Array2::from_shape_fn((n1, n2), |(i, j)| am[[i, j]] * bm[[i, j]].conj() * w[[i, j]]);
    if wmax > 0.0 {
        loop {
            iterations += 1;
            let et: Vec<C64> = theta.iter().map(|t| C64::from_polar(1.0, *t)).collect();
            let new_phi: Vec<f64> = (0..n1)
                .map(|i| {
                    let s: C64 = p.row(i).iter().zip(&et).map(|(x, e)| x * e).sum();
                    if s.norm() > 0.0 { s.arg() } else { phi[i] }
                })
                .collect();
            let ep: Vec<C64> = new_phi.iter().map(|t| C64::from_polar(1.0, *t)).collect();
            let mut new_theta: Vec<f64> = (0..n2)
                .map(|j| {
                    let s: C64 = p.column(j).iter().zip(&ep).map(|(x, e)| x.conj() * e).sum();
                    if s.norm() > 0.0 { s.arg() } else { theta[j] }
                })
                .collect();
            let mut new_phi = new_phi;
            for c in 0..components {
                let shift = match (gauge_col[c], gauge_row[c]) {
                    (Some(j), _) => new_theta[j],
                    (None, Some(i)) => new_phi[i],
                    _ => 0.0,
                };
                for (j, cc) in column_component.iter().enumerate() {
                    if *cc == Some(c) {
                        new_theta[j] = wrap(new_theta[j] - shift);
                    }
                }
                for (i, cc) in row_component.iter().enumerate() {
                    if *cc == Some(c) {
                        new_phi[i] = wrap(new_phi[i] - shift);
                    }
                }
            }
            let delta = theta
                .iter()
                .zip(&new_theta)
                .chain(phi.iter().zip(&new_phi))
                .map(|(x, y)| wrap(x - y).abs())
                .fold(0.0, f64::max);
            theta = new_theta;
            phi = new_phi;
            if delta < STITCH_TOLERANCE || iterations >= STITCH_MAX_ITERATIONS {
                break;
            }
        }
    }

    let fa = Array2::from_shape_fn((n1, n2), |(i, j)| am[[i, j]] * C64::from_polar(1.0, theta[j]));
    let fb = Array2::from_shape_fn((n1, n2), |(i, j)| bm[[i, j]] * C64::from_polar(1.0, phi[i]));
    let mut f = Array2::from_shape_fn((n1, n2), |(i, j)| {
        let (x, y) = (fa[[i, j]], fb[[i, j]]);
        match (x.norm() > 0.0, y.norm() > 0.0) {
            (true, true) => C64::from_polar((x.norm() * y.norm()).sqrt(), (x + y).arg()),
            (true, false) => x,
            (false, true) => y,
            (false, false) => C64::default(),
        }
    });
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, y), ww) in fa.iter().zip(fb.iter()).zip(w.iter()) {
        num += ww * (x - y).norm_sqr();
        den += ww * (x.norm_sqr() + y.norm_sqr());
    }
    let residual = if den > 0.0 { num / den } else { 0.0 };

    let fmax = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (zi, zj) = (grid1.zero_index(), grid2.zero_index());
    let anchor = if f[[zi, zj]].norm() >= 1e-3 * fmax {
        f[[zi, zj]]
    } else {
        *f.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("non-empty")
    };
    let rot = anchor.conj() / anchor.norm();
    f.mapv_inplace(|z| z * rot);
    let amplitude_discrepancy = Array2::from_shape_fn((n1, n2), |(i, j)| {
        let (x, y) = (am[[i, j]].norm(), bm[[i, j]].norm());
        if x > 0.0 && y > 0.0 { (x - y) / fmax } else { 0.0 }
    });
    let stitched = StitchedJsa {
        jsa: Jsa::new(grid1, grid2, f)?.normalized()?,
        column_phases: theta,
        row_phases: phi,
        iterations,
        residual,
        components,
        column_component,
        row_component,
        amplitude_discrepancy,
    };
    if components > 1 {
        return Err(Error::StitchingUnderdetermined {
            components,
            partial: Box::new(stitched),
        });
    }
    Ok(stitched)
}
