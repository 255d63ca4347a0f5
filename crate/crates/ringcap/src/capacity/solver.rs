//! Discrete p-Dirichlet energy minimizer on a uniform node grid.
//!
//! The potential lives on grid nodes; each cell contributes
//! `(|grad u|^2 + mu)^{p/2} h^n` with forward-difference gradients. Nodes on
//! the inner set are fixed at 1 (with a half-cell dilation), nodes outside
//! the eroded outer set at 0, so the interpolated potential stays admissible
//! for the continuum condenser and the discrete energy approaches the
//! capacity from above as the grid refines. Minimization is projected
//! preconditioned nonlinear conjugate gradient (Polak-Ribiere with restarts,
//! diagonal preconditioner from the current cell weights), declared
//! converged when the relative energy change over a 10-iteration window
//! drops below 1e-9. Coarse-to-fine continuation warm-starts each level.

use super::{contains_with_gap, Condenser};
use crate::dims::Exponents;
use crate::error::{Error, Result};
use crate::fields::grid::{AxisSpec, SampledGrid};
use crate::geom::Domain;
use rayon::prelude::*;
use std::time::Instant;

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Nodes per axis on the finest grid (>= 32).
    pub resolution: usize,
    /// Iteration cap per level; exceeding it flags the result.
    pub max_iterations: usize,
    /// Window-relative energy decrease below this means converged.
    pub energy_rel_tol: f64,
    /// Window length (iterations) for the convergence test.
    pub tol_window: usize,
    /// Smoothing of the energy density at vanishing gradients.
    pub mu: f64,
    /// Dilation/erosion margin in cells applied to C and A rasterization.
    pub boundary_margin_cells: f64,
    /// Bounding-box padding as a fraction of the largest extent.
    pub padding_fraction: f64,
    /// Warm-start from coarser grids.
    pub multilevel: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            resolution: 128,
            max_iterations: 6000,
            energy_rel_tol: 1e-9,
            tol_window: 10,
            mu: 1e-12,
            boundary_margin_cells: 0.5,
            padding_fraction: 0.015,
            multilevel: true,
        }
    }
}

/// Minimizer output: the potential with its grid placement and diagnostics.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub potential: Vec<f64>,
    /// Discrete p-Dirichlet energy; the capacity estimate.
    pub energy: f64,
    pub iterations: usize,
    /// Window-relative energy change at the stop.
    pub residual: f64,
    pub converged: bool,
    pub wall_seconds: f64,
}

impl GridSolution {
    /// The potential as a sampled grid in the shared file format.
    pub fn to_grid(&self) -> Result<SampledGrid> {
        let axes: Vec<AxisSpec> = self
            .shape
            .iter()
            .enumerate()
            .map(|(d, count)| AxisSpec {
                min: self.origin[d],
                max: self.origin[d] + self.spacing * (*count as f64 - 1.0),
                count: *count,
            })
            .collect();
        SampledGrid::new(axes, self.potential.clone())
    }
}

const FREE: u8 = 0;
const FIXED_ONE: u8 = 1;
const FIXED_ZERO: u8 = 2;

struct Level {
    n: usize,
    m: usize,
    h: f64,
    origin: Vec<f64>,
    node_strides: Vec<usize>,
    cell_strides: Vec<usize>,
    node_count: usize,
    cell_count: usize,
    fixed: Vec<u8>,
    p: f64,
    mu: f64,
}

impl Level {
    fn build(cond: &Condenser, p: f64, mu: f64, m: usize, set: &SolverSettings) -> Result<Level> {
        let n = cond.dim();
        let (lo, hi) = cond.outer().bounding_box();
        let extent = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .fold(0.0f64, f64::max);
        let pad = extent * set.padding_fraction;
        let len = extent + 2.0 * pad;
        // cubic grid centered on the outer bounding box
        let origin: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| 0.5 * (a + b) - 0.5 * len)
            .collect();
        let h = len / (m - 1) as f64;
        let mut node_strides = vec![1usize; n];
        let mut cell_strides = vec![1usize; n];
        for d in (0..n - 1).rev() {
            node_strides[d] = node_strides[d + 1] * m;
            cell_strides[d] = cell_strides[d + 1] * (m - 1);
        }
        let node_count = m.pow(n as u32);
        let cell_count = (m - 1).pow(n as u32);

        let margin = set.boundary_margin_cells * h;
        let mut fixed = vec![FREE; node_count];
        let mut x = vec![0.0; n];
        let mut coords = vec![0usize; n];
        let mut ones = 0usize;
        let mut zeros = 0usize;
        for node in 0..node_count {
            for d in 0..n {
                x[d] = origin[d] + coords[d] as f64 * h;
            }
            let in_c = signed_violation(cond.inner(), &x) <= margin;
            let deep_in_a = signed_violation(cond.outer(), &x) <= -margin;
            if in_c && !deep_in_a {
                return Err(Error::invalid(
                    "resolution too coarse: rasterized C touches the A boundary layer",
                ));
            }
            if in_c {
                fixed[node] = FIXED_ONE;
                ones += 1;
            } else if !deep_in_a {
                fixed[node] = FIXED_ZERO;
                zeros += 1;
            }
            // odometer, last axis fastest
            for d in (0..n).rev() {
                coords[d] += 1;
                if coords[d] < m {
                    break;
                }
                coords[d] = 0;
            }
        }
        if ones == 0 {
            return Err(Error::invalid(
                "resolution too coarse: the inner set captured no grid nodes",
            ));
        }
        if zeros == 0 {
            return Err(Error::invalid("grid does not reach outside the outer set"));
        }
        Ok(Level {
            n,
            m,
            h,
            origin,
            node_strides,
            cell_strides,
            node_count,
            cell_count,
            fixed,
            p,
            mu,
        })
    }

    #[inline]
    fn base_node(&self, cell: usize) -> usize {
        let mut base = 0usize;
        let mut rem = cell;
        for d in 0..self.n {
            let c = rem / self.cell_strides[d];
            rem %= self.cell_strides[d];
            base += c * self.node_strides[d];
        }
        base
    }

    fn apply_fixed(&self, u: &mut [f64]) {
        for (v, f) in u.iter_mut().zip(&self.fixed) {
            match *f {
                FIXED_ONE => *v = 1.0,
                FIXED_ZERO => *v = 0.0,
                _ => *v = v.clamp(0.0, 1.0),
            }
        }
    }

    /// Energy plus per-cell fluxes and weights (one full sweep).
    fn sweep_full(&self, u: &[f64], flux: &mut [f64], wcell: &mut [f64]) -> f64 {
        let chunk = 1 << 15;
        let n = self.n;
        let inv_h = 1.0 / self.h;
        let hn = self.h.powi(n as i32);
        let hflux = self.h.powi(n as i32 - 1);
        let p = self.p;
        let mu = self.mu;
        let energies: Vec<f64> = flux
            .par_chunks_mut(chunk * n)
            .zip(wcell.par_chunks_mut(chunk))
            .enumerate()
            .map(|(ci, (fch, wch))| {
                let start = ci * chunk;
                let end = (start + chunk).min(self.cell_count);
                let mut local = 0.0;
                let mut g = [0.0f64; 8];
                for cell in start..end {
                    let base = self.base_node(cell);
                    let u0 = u[base];
                    let mut s = 0.0;
                    for d in 0..n {
                        let gd = (u[base + self.node_strides[d]] - u0) * inv_h;
                        g[d] = gd;
                        s += gd * gd;
                    }
                    let sm = s + mu;
                    let (e, w) = if p == 2.0 {
                        (sm * hn, 2.0)
                    } else {
                        let half = sm.powf(0.5 * p - 1.0);
                        (half * sm * hn, p * half)
                    };
                    local += e;
                    let j = cell - start;
                    for d in 0..n {
                        fch[j * n + d] = w * g[d] * hflux;
                    }
                    wch[j] = w;
                }
                local
            })
            .collect();
        energies.iter().sum()
    }

    /// Energy only (line-search evaluations).
    fn sweep_energy(&self, u: &[f64]) -> f64 {
        let chunk = 1 << 15;
        let n = self.n;
        let inv_h = 1.0 / self.h;
        let hn = self.h.powi(n as i32);
        let p = self.p;
        let mu = self.mu;
        let nchunks = self.cell_count.div_ceil(chunk);
        let energies: Vec<f64> = (0..nchunks)
            .into_par_iter()
            .map(|ci| {
                let start = ci * chunk;
                let end = (start + chunk).min(self.cell_count);
                let mut local = 0.0;
                for cell in start..end {
                    let base = self.base_node(cell);
                    let u0 = u[base];
                    let mut s = 0.0;
                    for d in 0..n {
                        let gd = (u[base + self.node_strides[d]] - u0) * inv_h;
                        s += gd * gd;
                    }
                    let sm = s + mu;
                    local += if p == 2.0 { sm * hn } else { sm.powf(0.5 * p) * hn };
                }
                local
            })
            .collect();
        energies.iter().sum()
    }

    /// Scatter fluxes into the nodal gradient; fixed nodes get 0.
    fn gradient(&self, flux: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for cell in 0..self.cell_count {
            let base = self.base_node(cell);
            for d in 0..self.n {
                let f = flux[cell * self.n + d];
                grad[base] -= f;
                grad[base + self.node_strides[d]] += f;
            }
        }
        for (g, f) in grad.iter_mut().zip(&self.fixed) {
            if *f != FREE {
                *g = 0.0;
            }
        }
    }

    /// Diagonal preconditioner assembled from current cell weights.
    fn preconditioner(&self, wcell: &[f64], m_diag: &mut [f64]) {
        let scale = self.h.powi(self.n as i32 - 2);
        m_diag.iter_mut().for_each(|v| *v = 0.0);
        for cell in 0..self.cell_count {
            let base = self.base_node(cell);
            let w = wcell[cell] * scale;
            for d in 0..self.n {
                m_diag[base] += w;
                m_diag[base + self.node_strides[d]] += w;
            }
        }
        for v in m_diag.iter_mut() {
            if *v <= 0.0 {
                *v = 1.0;
            }
        }
    }

    fn as_grid(&self, u: &[f64]) -> Result<SampledGrid> {
        let axes: Vec<AxisSpec> = (0..self.n)
            .map(|d| AxisSpec {
                min: self.origin[d],
                max: self.origin[d] + self.h * (self.m as f64 - 1.0),
                count: self.m,
            })
            .collect();
        SampledGrid::new(axes, u.to_vec())
    }
}

/// Signed violation of set membership: <= 0 inside, > 0 outside, scaled so
/// comparisons against a length margin make sense.
fn signed_violation(domain: &Domain, x: &[f64]) -> f64 {
    match domain {
        Domain::Ball { center, radius } => crate::geom::dist(x, center) - radius,
        Domain::Box { min, max } => {
            let mut worst = f64::NEG_INFINITY;
            for d in 0..min.len() {
                worst = worst.max(min[d] - x[d]).max(x[d] - max[d]);
            }
            worst
        }
        Domain::Annulus { .. } => unreachable!("condensers are balls or boxes"),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes the discrete p-Dirichlet energy for the condenser.
pub fn discrete_p_capacity(
    cond: &Condenser,
    exps: &Exponents,
    set: &SolverSettings,
) -> Result<GridSolution> {
    if set.resolution < 32 {
        return Err(Error::invalid(format!(
            "solver resolution must be >= 32, got {}",
            set.resolution
        )));
    }
    let n = cond.dim();
    if n != exps.n() as usize {
        return Err(Error::invalid("condenser and exponent dimensions differ"));
    }
    let node_estimate = (set.resolution as u64).pow(n as u32);
    if node_estimate > 1 << 28 {
        return Err(Error::invalid(format!(
            "grid of {node_estimate} nodes exceeds the solver memory budget"
        )));
    }
    let started = Instant::now();

    // coarse-to-fine resolutions
    let mut resolutions = vec![set.resolution];
    if set.multilevel {
        let mut r = set.resolution;
        while r / 2 + 1 >= 49 {
            r = r / 2 + 1;
            resolutions.push(r);
        }
        resolutions.reverse();
    }

    let mut total_iterations = 0usize;
    let mut warm: Option<(Level, Vec<f64>)> = None;
    let mut last: Option<(Level, Vec<f64>, f64, f64, bool)> = None;
    for &m in &resolutions {
        let level = match Level::build(cond, exps.p(), set.mu, m, set) {
            Ok(l) => l,
            // coarse levels may fail rasterization for thin inner sets;
            // skip them and start finer
            Err(e) if m != set.resolution => {
                let _ = e;
                continue;
            }
            Err(e) => return Err(e),
        };
        // gap sanity at the final level
        if m == set.resolution {
            let needed = (2.0 * set.boundary_margin_cells + 1.0) * level.h;
            if !contains_with_gap(cond.outer(), cond.inner(), needed) {
                return Err(Error::invalid(
                    "resolution too coarse for the gap between C and the A boundary",
                ));
            }
        }
        let mut u = vec![0.0; level.node_count];
        match &warm {
            Some((coarse, cu)) => {
                let grid = coarse.as_grid(cu)?;
                let mut coords = vec![0usize; level.n];
                let mut x = vec![0.0; level.n];
                for node in 0..level.node_count {
                    for d in 0..level.n {
                        x[d] = level.origin[d] + coords[d] as f64 * level.h;
                    }
                    u[node] = grid.interpolate(&x).unwrap_or(0.0);
                    for d in (0..level.n).rev() {
                        coords[d] += 1;
                        if coords[d] < level.m {
                            break;
                        }
                        coords[d] = 0;
                    }
                }
            }
            None => u.iter_mut().for_each(|v| *v = 0.5),
        }
        level.apply_fixed(&mut u);
        let (iters, energy, residual, converged) = minimize(&level, &mut u, set);
        total_iterations += iters;
        last = Some((level, u, energy, residual, converged));
        let (l, v, ..) = last.as_ref().unwrap();
        warm = Some((
            Level {
                n: l.n,
                m: l.m,
                h: l.h,
                origin: l.origin.clone(),
                node_strides: l.node_strides.clone(),
                cell_strides: l.cell_strides.clone(),
                node_count: l.node_count,
                cell_count: l.cell_count,
                fixed: l.fixed.clone(),
                p: l.p,
                mu: l.mu,
            },
            v.clone(),
        ));
    }
    let (level, u, energy, residual, converged) =
        last.ok_or_else(|| Error::numerical("no solvable level"))?;
    Ok(GridSolution {
        shape: vec![level.m; level.n],
        origin: level.origin.clone(),
        spacing: level.h,
        potential: u,
        energy,
        iterations: total_iterations,
        residual,
        converged,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Projected preconditioned NCG on one level. Returns
/// (iterations, energy, window residual, converged).
fn minimize(level: &Level, u: &mut [f64], set: &SolverSettings) -> (usize, f64, f64, bool) {
    let nn = level.node_count;
    let mut flux = vec![0.0; level.cell_count * level.n];
    let mut wcell = vec![0.0; level.cell_count];
    let mut grad = vec![0.0; nn];
    let mut grad_new = vec![0.0; nn];
    let mut z = vec![0.0; nn];
    let mut m_diag = vec![0.0; nn];
    let mut dir = vec![0.0; nn];
    let mut trial = vec![0.0; nn];

    let mut energy = level.sweep_full(u, &mut flux, &mut wcell);
    level.gradient(&flux, &mut grad);
    level.preconditioner(&wcell, &mut m_diag);
    for i in 0..nn {
        z[i] = grad[i] / m_diag[i];
        dir[i] = -z[i];
    }
    let mut gz = dot(&grad, &z);

    let window = set.tol_window.max(1);
    let mut history: Vec<f64> = vec![energy];
    let mut step = 1.0f64;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iter = 0usize;

    while iter < set.max_iterations {
        iter += 1;
        if gz.abs() <= 1e-300 {
            converged = true;
            residual = 0.0;
            break;
        }
        let mut dd0 = dot(&grad, &dir);
        if dd0 >= 0.0 {
            // stale conjugate direction: restart on steepest descent
            for i in 0..nn {
                dir[i] = -z[i];
            }
            dd0 = dot(&grad, &dir);
            if dd0 >= 0.0 {
                converged = true;
                residual = 0.0;
                break;
            }
        }
        // quadratic fit through E(0), E'(0), E(a1); exact for p = 2
        let a1 = step.max(1e-12);
        for i in 0..nn {
            trial[i] = u[i] + a1 * dir[i];
        }
        level.apply_fixed(&mut trial);
        let e1 = level.sweep_energy(&trial);
        let curv = (e1 - energy - dd0 * a1) / (a1 * a1);
        let mut a = if curv > 0.0 {
            (-0.5 * dd0 / curv).clamp(1e-3 * a1, 1e3 * a1)
        } else {
            4.0 * a1
        };
        // backtrack to guarantee decrease under the projection
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..nn {
                trial[i] = u[i] + a * dir[i];
            }
            level.apply_fixed(&mut trial);
            let e_try = level.sweep_energy(&trial);
            if e_try < energy {
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        if !accepted {
            converged = true;
            residual = 0.0;
            break;
        }
        u.copy_from_slice(&trial);
        step = a;

        energy = level.sweep_full(u, &mut flux, &mut wcell);
        level.gradient(&flux, &mut grad_new);
        level.preconditioner(&wcell, &mut m_diag);
        let mut beta_num = 0.0;
        for i in 0..nn {
            let zn = grad_new[i] / m_diag[i];
            beta_num += zn * (grad_new[i] - grad[i]);
            z[i] = zn;
        }
        let beta = (beta_num / gz).max(0.0);
        for i in 0..nn {
            dir[i] = -z[i] + beta * dir[i];
        }
        grad.copy_from_slice(&grad_new);
        gz = dot(&grad, &z);

        history.push(energy);
        if history.len() > window {
            let past = history[history.len() - 1 - window];
            residual = (past - energy) / energy.abs().max(1e-300);
            if residual.abs() <= set.energy_rel_tol {
                converged = true;
                break;
            }
        }
    }
    (iter, energy, residual, converged)
}
