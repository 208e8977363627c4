//! Obstruction density on circle bundles over flat tori, by finite
//! differences.
//!
//! With the periodic 5-point Laplacian `Δ_h`,
//!
//! ```text
//! K = −½e^{−2φ}Δ_hφ,   Δ_g f = ½e^{−2φ}Δ_h f,   D = Δ_g²K + Δ_g K²,
//! ∫ D dV ≈ Σ D · 2e^{2φ} h_x h_y.
//! ```
//!
//! Since `Δ_g f · 2e^{2φ} = Δ_h f` and `Σ Δ_h f = 0` on a periodic grid,
//! the discrete integral vanishes up to rounding for every `φ`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("grid must be at least 8x8, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite sample at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("periods must be positive")]
    Period,
    #[error("need at least 2 refinement levels")]
    Levels,
}

/// Periodic samples of `φ` on `[0, lx) × [0, ly)`, row-major in `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGrid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    values: Vec<f64>,
}

impl TorusGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, values: Vec<f64>) -> Result<Self, TorusError> {
        if nx < 8 || ny < 8 {
            return Err(TorusError::TooSmall(nx, ny));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(TorusError::Period);
        }
        if values.len() != nx * ny {
            return Err(TorusError::Shape { expected: nx * ny, got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(TorusError::NonFinite(k % nx, k / nx));
        }
        Ok(TorusGrid { nx, ny, lx, ly, values })
    }

    /// Samples `f(x, y)` at `x = i·lx/nx`, `y = j·ly/ny`.
    pub fn from_fn(nx: usize, ny: usize, lx: f64, ly: f64, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self, TorusError> {
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        let values = (0..nx * ny).into_par_iter().map(|k| f((k % nx) as f64 * hx, (k / nx) as f64 * hy)).collect();
        Self::new(nx, ny, lx, ly, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn periods(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.lx / self.nx as f64, self.ly / self.ny as f64)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn same_shape(&self, values: Vec<f64>) -> TorusGrid {
        TorusGrid { values, ..self.clone() }
    }

    /// Periodic 5-point Laplacian of a field on this grid.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let (hx, hy) = self.spacing();
        let (cx, cy) = (1.0 / (hx * hx), 1.0 / (hy * hy));
        let mut out = vec![0.0; nx * ny];
        out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            let up = ((j + 1) % ny) * nx;
            let down = ((j + ny - 1) % ny) * nx;
            let here = j * nx;
            for i in 0..nx {
                let (l, r) = ((i + nx - 1) % nx, (i + 1) % nx);
                let c = f[here + i];
                row[i] = (f[here + l] - 2.0 * c + f[here + r]) * cx + (f[down + i] - 2.0 * c + f[up + i]) * cy;
            }
        });
        out
    }

    /// `Δ_g f = ½e^{−2φ}Δ_h f`.
    pub fn laplace_g(&self, f: &[f64]) -> Vec<f64> {
        let mut l = self.laplacian(f);
        l.par_iter_mut().zip(self.values.par_iter()).for_each(|(x, p)| *x *= 0.5 * (-2.0 * p).exp());
        l
    }

    /// Every other sample in each direction: the same field on the grid
    /// with twice the spacing.
    pub fn coarsen(&self) -> Result<TorusGrid, TorusError> {
        if !self.nx.is_multiple_of(2) || !self.ny.is_multiple_of(2) {
            return Err(TorusError::Shape { expected: 2 * (self.nx / 2) * 2 * (self.ny / 2), got: self.nx * self.ny });
        }
        let (mx, my) = (self.nx / 2, self.ny / 2);
        let values = (0..mx * my).map(|k| self.values[(2 * (k / mx)) * self.nx + 2 * (k % mx)]).collect();
        TorusGrid::new(mx, my, self.lx, self.ly, values)
    }

    /// Two-fold spectral upsampling (band-limited interpolation).
    pub fn upsample(&self) -> TorusGrid {
        let (nx, ny) = (self.nx, self.ny);
        let (mx, my) = (2 * nx, 2 * ny);
        let mut planner = FftPlanner::<f64>::new();
        let mut spec: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut planner, &mut spec, nx, ny, false);
        let mut big = vec![Complex64::new(0.0, 0.0); mx * my];
        for j in 0..ny {
            for (tj, wj) in spread(j, ny, my) {
                for i in 0..nx {
                    for (ti, wi) in spread(i, nx, mx) {
                        big[tj * mx + ti] += spec[j * nx + i] * (wi * wj);
                    }
                }
            }
        }
        fft2(&mut planner, &mut big, mx, my, true);
        let scale = 1.0 / (nx * ny) as f64;
        let values = big.iter().map(|c| c.re * scale).collect();
        TorusGrid { nx: mx, ny: my, lx: self.lx, ly: self.ly, values }
    }
}

/// Where frequency `k` of an `n`-point transform lands in an `m`-point one;
/// the Nyquist mode is split evenly between `±n/2`.
fn spread(k: usize, n: usize, m: usize) -> Vec<(usize, f64)> {
    if n.is_multiple_of(2) && k == n / 2 {
        vec![(k, 0.5), (m - k, 0.5)]
    } else if k < n / 2 + n % 2 {
        vec![(k, 1.0)]
    } else {
        vec![(m - (n - k), 1.0)]
    }
}

fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let row = if inverse { planner.plan_fft_inverse(nx) } else { planner.plan_fft_forward(nx) };
    for chunk in data.chunks_mut(nx) {
        row.process(chunk);
    }
    let col = if inverse { planner.plan_fft_inverse(ny) } else { planner.plan_fft_forward(ny) };
    let mut buf = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            buf[j] = data[j * nx + i];
        }
        col.process(&mut buf);
        for j in 0..ny {
            data[j * nx + i] = buf[j];
        }
    }
}

/// Fixed-order pairwise sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `K = −½e^{−2φ}Δ_hφ`.
pub fn grid_curvature(g: &TorusGrid) -> TorusGrid {
    let mut k = g.laplace_g(&g.values);
    k.par_iter_mut().for_each(|x| *x = -*x);
    g.same_shape(k)
}

/// A grid edge across which `D` changes sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignChange {
    pub i: usize,
    pub j: usize,
    /// `"x"`: between `(i, j)` and `(i+1, j)`; `"y"`: between `(i, j)` and `(i, j+1)`.
    pub axis: char,
    /// Linear-interpolation estimate of the crossing.
    pub x: f64,
    pub y: f64,
}

/// A closed grid line on which `D` changes sign at every crossing edge,
/// i.e. a circle of zeros of the interpolated density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroCircle {
    /// `"x = const"` circles are detected column-wise, `"y = const"` row-wise.
    pub kind: &'static str,
    pub index: usize,
    /// Mean crossing coordinate.
    pub position: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub nx: usize,
    pub ny: usize,
    #[serde(skip)]
    pub density: Vec<f64>,
    /// `Σ D · 2e^{2φ} h_x h_y`.
    pub integral: f64,
    /// `Σ |D| · 2e^{2φ} h_x h_y`, for scale.
    pub abs_integral: f64,
    pub min: f64,
    pub max: f64,
    /// `10 h² · max|φ|`, with `h = max(h_x, h_y)`.
    pub tol: f64,
    pub zero_set: Vec<SignChange>,
    pub zero_circles: Vec<ZeroCircle>,
}

impl DensityReport {
    /// Discrete form of "D ≥ 0 forces D ≡ 0": either `D` takes both signs
    /// beyond `tol`, or it is within `tol` of zero on one side.
    pub fn sign_dichotomy_holds(&self) -> bool {
        let both = self.max > self.tol && self.min < -self.tol;
        let none = self.max <= self.tol && self.min >= -self.tol;
        both || none || self.max.abs().max(self.min.abs()) <= self.tol
    }
}

/// `D = Δ_g²K + Δ_g K²` with its integral and sign-change set.
pub fn grid_density(g: &TorusGrid) -> DensityReport {
    let k = grid_curvature(g);
    let lk = g.laplace_g(&k.values);
    let llk = g.laplace_g(&lk);
    let k2: Vec<f64> = k.values.iter().map(|x| x * x).collect();
    let lk2 = g.laplace_g(&k2);
    let d: Vec<f64> = llk.iter().zip(&lk2).map(|(a, b)| a + b).collect();
    let (hx, hy) = g.spacing();
    let weighted: Vec<f64> = d.iter().zip(&g.values).map(|(x, p)| x * 2.0 * (2.0 * p).exp() * hx * hy).collect();
    let integral = pairwise_sum(&weighted);
    let abs: Vec<f64> = weighted.iter().map(|x| x.abs()).collect();
    let abs_integral = pairwise_sum(&abs);
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = g.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let h = hx.max(hy);
    let tol = 10.0 * h * h * scale;
    let (zero_set, zero_circles) = sign_changes(g, &d, tol);
    DensityReport { nx: g.nx, ny: g.ny, density: d, integral, abs_integral, min, max, tol, zero_set, zero_circles }
}

fn sign_changes(g: &TorusGrid, d: &[f64], tol: f64) -> (Vec<SignChange>, Vec<ZeroCircle>) {
    let (nx, ny) = (g.nx, g.ny);
    let (hx, hy) = g.spacing();
    let significant = |a: f64, b: f64| (a > tol && b < -tol) || (a < -tol && b > tol) || (a * b < 0.0 && (a - b).abs() > tol);
    let mut out = Vec::new();
    let mut col_hits = vec![0usize; nx];
    let mut col_pos = vec![0.0f64; nx];
    let mut row_hits = vec![0usize; ny];
    let mut row_pos = vec![0.0f64; ny];
    for j in 0..ny {
        for i in 0..nx {
            let a = d[j * nx + i];
            let r = d[j * nx + (i + 1) % nx];
            if significant(a, r) {
                let t = a / (a - r);
                let x = (i as f64 + t) * hx;
                out.push(SignChange { i, j, axis: 'x', x, y: j as f64 * hy });
                col_hits[i] += 1;
                col_pos[i] += x;
            }
            let u = d[((j + 1) % ny) * nx + i];
            if significant(a, u) {
                let t = a / (a - u);
                let y = (j as f64 + t) * hy;
                out.push(SignChange { i, j, axis: 'y', x: i as f64 * hx, y });
                row_hits[j] += 1;
                row_pos[j] += y;
            }
        }
    }
    let mut circles = Vec::new();
    for i in 0..nx {
        if col_hits[i] == ny {
            circles.push(ZeroCircle { kind: "x = const", index: i, position: col_pos[i] / ny as f64 });
        }
    }
    for j in 0..ny {
        if row_hits[j] == nx {
            circles.push(ZeroCircle { kind: "y = const", index: j, position: row_pos[j] / nx as f64 });
        }
    }
    (out, circles)
}

/// One row of a refinement study.
#[derive(Clone, Debug, Serialize)]
pub struct LevelRow {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub integral: f64,
    pub max_abs_density: f64,
    pub min: f64,
    pub max: f64,
    pub zero_circles: usize,
    /// `max |D_level − D_next|` over the points of this level.
    pub diff_to_next: Option<f64>,
    /// `log2(diff_to_next(prev) / diff_to_next(this))`.
    pub observed_order: Option<f64>,
    /// Rough size of rounding noise in `D`: machine epsilon times
    /// `max|φ|` amplified by three applications of the stencil.
    pub roundoff_estimate: f64,
    /// `diff_to_next` is below the rounding estimate of the next finer
    /// level (64 times this one), so the observed
    /// order carries no information about the stencil.
    pub roundoff_dominated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<LevelRow>,
}

impl ConvergenceTable {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.observed_order).collect()
    }
}

/// How to produce the next finer grid.
pub enum Refiner<'a> {
    /// Resample an analytic `φ(x, y)`.
    Analytic(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
    /// Band-limited interpolation of the given samples.
    Spectral,
}

/// Densities on `levels` grids, each twice as fine as the previous, with
/// successive differences at shared points and the observed order.
pub fn refine_and_extrapolate(g: &TorusGrid, levels: usize, refiner: Refiner<'_>) -> Result<ConvergenceTable, TorusError> {
    if levels < 2 {
        return Err(TorusError::Levels);
    }
    let mut grids = vec![g.clone()];
    for _ in 1..levels {
        let last = grids.last().expect("non-empty");
        let next = match &refiner {
            Refiner::Analytic(f) => TorusGrid::from_fn(2 * last.nx, 2 * last.ny, last.lx, last.ly, f)?,
            Refiner::Spectral => last.upsample(),
        };
        grids.push(next);
    }
    convergence_table(&grids)
}

/// Refinement study that ends at `g`: the coarser levels are `g`
/// subsampled, so no interpolation enters. Useful when refining past `g`
/// would push the stencil into rounding noise.
pub fn coarsening_study(g: &TorusGrid, levels: usize) -> Result<ConvergenceTable, TorusError> {
    if levels < 2 {
        return Err(TorusError::Levels);
    }
    let mut grids = vec![g.clone()];
    for _ in 1..levels {
        let next = grids.last().expect("non-empty").coarsen()?;
        grids.push(next);
    }
    grids.reverse();
    convergence_table(&grids)
}

/// Table for a chain of grids, each twice as fine as the previous.
pub fn convergence_table(grids: &[TorusGrid]) -> Result<ConvergenceTable, TorusError> {
    if grids.len() < 2 {
        return Err(TorusError::Levels);
    }
    for w in grids.windows(2) {
        if w[1].nx != 2 * w[0].nx || w[1].ny != 2 * w[0].ny {
            return Err(TorusError::Shape { expected: 4 * w[0].nx * w[0].ny, got: w[1].nx * w[1].ny });
        }
    }
    let reports: Vec<DensityReport> = grids.iter().map(grid_density).collect();
    let mut rows = Vec::new();
    for (l, (grid, rep)) in grids.iter().zip(&reports).enumerate() {
        let diff_to_next = reports.get(l + 1).map(|fine| {
            let mut worst = 0.0f64;
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let c = rep.density[j * grid.nx + i];
                    let f = fine.density[(2 * j) * (2 * grid.nx) + 2 * i];
                    worst = worst.max((c - f).abs());
                }
            }
            worst
        });
        let max_abs_density = rep.max.abs().max(rep.min.abs());
        let (hx, hy) = grid.spacing();
        let amp = 4.0 / (hx * hx) + 4.0 / (hy * hy);
        let phi_scale = grid.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let roundoff_estimate = f64::EPSILON * phi_scale * amp.powi(3);
        let roundoff_dominated = diff_to_next.is_some_and(|d| d < 64.0 * roundoff_estimate);
        rows.push(LevelRow {
            nx: grid.nx,
            ny: grid.ny,
            h: hx.max(hy),
            integral: rep.integral,
            max_abs_density,
            min: rep.min,
            max: rep.max,
            zero_circles: rep.zero_circles.len(),
            diff_to_next,
            observed_order: None,
            roundoff_estimate,
            roundoff_dominated,
        });
    }
    for l in 1..rows.len() {
        if let (Some(a), Some(b)) = (rows[l - 1].diff_to_next, rows[l].diff_to_next) {
            if a > 0.0 && b > 0.0 {
                rows[l].observed_order = Some((a / b).log2());
            }
        }
    }
    Ok(ConvergenceTable { rows })
}

/// `φ = ε cos(2πx/lx)`.
pub fn cos_family(eps: f64, lx: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |x, _y| eps * (2.0 * std::f64::consts::PI * x / lx).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_fields_have_zero_density() {
        for c in [0.0, 0.7] {
            let g = TorusGrid::from_fn(16, 16, 1.0, 1.0, |_, _| c).unwrap();
            assert!(grid_curvature(&g).values().iter().all(|&k| k == 0.0));
            let r = grid_density(&g);
            assert_eq!((r.min, r.max, r.integral), (0.0, 0.0, 0.0));
            assert!(r.zero_set.is_empty());
        }
    }

    #[test]
    fn rejects_small_grids() {
        assert!(TorusGrid::new(4, 8, 1.0, 1.0, vec![0.0; 32]).is_err());
        assert!(TorusGrid::new(8, 8, 1.0, 1.0, vec![0.0; 63]).is_err());
    }

    #[test]
    fn upsampling_is_exact_for_trig() {
        let f = |x: f64, y: f64| (2.0 * std::f64::consts::PI * x).cos() + 0.3 * (4.0 * std::f64::consts::PI * y).sin();
        let g = TorusGrid::from_fn(16, 16, 1.0, 1.0, f).unwrap();
        let up = g.upsample();
        let direct = TorusGrid::from_fn(32, 32, 1.0, 1.0, f).unwrap();
        for (a, b) in up.values().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }
}
