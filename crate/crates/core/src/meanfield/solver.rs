use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::MeanFieldProblem;
use crate::error::{Error, Result};
use crate::grid::{trapezoid, GridFunction};
use crate::specfun::{lorentz, UniformHilbert};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub grid_points: usize,
    /// Mixing weight of the new iterate, in (0, 1].
    pub damping: f64,
    pub max_iter: usize,
    /// L1 tolerance on F(rho) - rho.
    pub tol: f64,
    /// Regulator added to Im G, as a fraction of the grid span.
    pub eta: f64,
    pub renormalize: bool,
    /// Explicit grid bounds; derived from the channel centers when absent.
    pub grid: Option<(f64, f64)>,
    /// Window over which a non-decreasing residual counts as a stall.
    pub stall_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_points: 1024,
            damping: 0.3,
            max_iter: 500,
            tol: 1e-8,
            eta: 1e-4,
            renormalize: true,
            grid: None,
            stall_window: 50,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 16 {
            return Err(Error::Config("grid_points must be at least 16".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping {} outside (0, 1]", self.damping)));
        }
        if !(self.tol > 0.0) || !(self.eta >= 0.0) {
            return Err(Error::Config("tol must be positive and eta non-negative".into()));
        }
        if let Some((lo, hi)) = self.grid {
            if !(hi > lo) {
                return Err(Error::Config(format!("grid bounds ({lo}, {hi}) are empty")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldSolution {
    pub grid: Vec<f64>,
    /// exp(S) p per channel.
    pub rho: Vec<GridFunction>,
    /// p = rho / exp(S) with exp(S) = sum_k multiplicity_k rho_k.
    pub p_of: Vec<GridFunction>,
    pub im_g: Vec<GridFunction>,
    pub re_g: Vec<GridFunction>,
    pub density: GridFunction,
    pub iterations: usize,
    /// L1 size of F(rho) - rho at the returned iterate (max over channels).
    pub residual: f64,
    pub converged: bool,
    pub trace: Vec<f64>,
    /// Mass of each raw update before renormalization, last sweep.
    pub raw_mass: Vec<f64>,
    pub clipped: usize,
    pub diagnostic: Option<String>,
}

struct Sweep {
    rho: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    re: Vec<Vec<f64>>,
    raw_mass: Vec<f64>,
    clipped: usize,
}

struct Map<'a> {
    problem: &'a MeanFieldProblem,
    grid: Vec<f64>,
    hilbert: UniformHilbert,
    eta: f64,
    renormalize: bool,
}

/// Per channel: rho, Im G, Re G, residual, clipped points.
type ChannelUpdate = (Vec<f64>, Vec<f64>, Vec<f64>, f64, usize);

impl Map<'_> {
    fn apply(&self, rho: &[Vec<f64>]) -> Sweep {
        let g = self.grid.len();
        let out: Vec<ChannelUpdate> = self
            .problem
            .channels
            .par_iter()
            .map(|ch| {
                let mut im = vec![0.0; g];
                for &(nu, w) in &ch.couplings {
                    for (o, r) in im.iter_mut().zip(&rho[nu]) {
                        *o += PI * w * r;
                    }
                }
                let mut clipped = 0;
                for v in im.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                        clipped += 1;
                    }
                }
                let re = self.hilbert.apply(&im);
                let mut new: Vec<f64> = (0..g)
                    .map(|i| {
                        let y = im[i] + self.eta;
                        let x = self.grid[i] - ch.center - re[i];
                        y / (PI * (x * x + y * y))
                    })
                    .collect();
                let mass = trapezoid(&self.grid, &new);
                if self.renormalize && mass > 0.0 {
                    new.iter_mut().for_each(|v| *v /= mass);
                }
                (new, im, re, mass, clipped)
            })
            .collect();
        let mut s = Sweep { rho: vec![], im: vec![], re: vec![], raw_mass: vec![], clipped: 0 };
        for (r, i, e, m, c) in out {
            s.rho.push(r);
            s.im.push(i);
            s.re.push(e);
            s.raw_mass.push(m);
            s.clipped += c;
        }
        s
    }
}

fn l1(grid: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    trapezoid(grid, &d)
}

/// Damped fixed-point iteration rho <- (1 - a) rho + a F(rho).
///
/// Stops when the full-map residual drops below `tol`, when `max_iter` is
/// reached, or when the residual has not improved over `stall_window`
/// sweeps; in the last two cases the best iterate seen is returned with
/// `converged = false`.
pub fn solve(problem: &MeanFieldProblem, opts: &SolverOptions) -> Result<MeanFieldSolution> {
    opts.validate()?;
    if problem.channels.iter().all(|c| c.couplings.is_empty()) {
        return Err(Error::Degenerate("no channel is coupled".into()));
    }
    let widths: Vec<f64> = (0..problem.len()).map(|k| problem.golden_rule_width(k)).collect();
    let (lo, hi) = opts.grid.unwrap_or_else(|| {
        let cmin = problem.channels.iter().map(|c| c.center).fold(f64::INFINITY, f64::min);
        let cmax = problem.channels.iter().map(|c| c.center).fold(f64::NEG_INFINITY, f64::max);
        let strong = (0..problem.len()).map(|k| problem.total_coupling(k).sqrt()).fold(0.0, f64::max);
        let wmax = widths.iter().cloned().fold(0.0, f64::max);
        let pad = 4.0 * strong + 20.0 * wmax;
        (cmin - pad, cmax + pad)
    });
    let n = opts.grid_points;
    let h = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| lo + h * k as f64).collect();
    let map = Map {
        problem,
        hilbert: UniformHilbert::new(lo, h, n),
        eta: opts.eta * (hi - lo),
        renormalize: opts.renormalize,
        grid: grid.clone(),
    };

    // Lorentzian seed at each center with the golden-rule width
    let mut rho: Vec<Vec<f64>> = problem
        .channels
        .iter()
        .zip(&widths)
        .map(|(ch, &w)| {
            let w = w.max(2.0 * h);
            let mut r: Vec<f64> = grid.iter().map(|&l| lorentz(l - ch.center, w)).collect();
            let m = trapezoid(&grid, &r);
            r.iter_mut().for_each(|v| *v /= m);
            r
        })
        .collect();

    let alpha = opts.damping;
    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<Vec<f64>>, Sweep)> = None;
    let mut converged = false;
    let mut diagnostic = None;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let sweep = map.apply(&rho);
        let residual = (0..rho.len()).map(|k| l1(&grid, &sweep.rho[k], &rho[k])).fold(0.0, f64::max);
        trace.push(residual);
        log::debug!("mean-field sweep {it}: residual {residual:e}");
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iterations, residual });
        }
        let next: Vec<Vec<f64>> = rho
            .iter()
            .zip(&sweep.rho)
            .map(|(old, new)| old.iter().zip(new).map(|(o, n)| (1.0 - alpha) * o + alpha * n).collect())
            .collect();
        let improved = best.as_ref().is_none_or(|b| residual < b.0);
        if improved {
            best = Some((residual, rho.clone(), sweep));
        }
        if residual <= opts.tol {
            converged = true;
            break;
        }
        let w = opts.stall_window;
        if w > 0 && it >= w && trace[it] >= trace[it - w] {
            diagnostic = Some(format!(
                "residual {:.3e} at sweep {it} is not below {:.3e} at sweep {}; stopping",
                trace[it],
                trace[it - w],
                it - w
            ));
            break;
        }
        rho = next;
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("max_iter = {} reached", opts.max_iter));
    }
    let (residual, rho, sweep) = best.expect("at least one sweep");

    let to_grid = |v: Vec<f64>| GridFunction::new(grid.clone(), v);
    let mut dos = vec![0.0; n];
    for (ch, r) in problem.channels.iter().zip(&rho) {
        for (d, x) in dos.iter_mut().zip(r) {
            *d += ch.multiplicity * x;
        }
    }
    let p_of = rho
        .iter()
        .map(|r| to_grid(r.iter().zip(&dos).map(|(x, d)| if *d > 0.0 { x / d } else { 0.0 }).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanFieldSolution {
        rho: rho.into_iter().map(to_grid).collect::<Result<_>>()?,
        p_of,
        im_g: sweep.im.into_iter().map(to_grid).collect::<Result<_>>()?,
        re_g: sweep.re.into_iter().map(to_grid).collect::<Result<_>>()?,
        density: to_grid(dos)?,
        iterations,
        residual,
        converged,
        trace,
        raw_mass: sweep.raw_mass,
        clipped: sweep.clipped,
        diagnostic,
        grid,
    })
}

impl MeanFieldSolution {
    /// One more application of the map to the returned iterate; the L1
    /// change per channel.
    pub fn certificate(&self, problem: &MeanFieldProblem, opts: &SolverOptions) -> Vec<f64> {
        let lo = self.grid[0];
        let n = self.grid.len();
        let h = (self.grid[n - 1] - lo) / (n - 1) as f64;
        let map = Map {
            problem,
            hilbert: UniformHilbert::new(lo, h, n),
            eta: opts.eta * (self.grid[n - 1] - lo),
            renormalize: opts.renormalize,
            grid: self.grid.clone(),
        };
        let rho: Vec<Vec<f64>> = self.rho.iter().map(|r| r.values().to_vec()).collect();
        let sweep = map.apply(&rho);
        (0..rho.len()).map(|k| l1(&self.grid, &sweep.rho[k], &rho[k])).collect()
    }

    /// CSV with columns `lambda,p,rho,im_g,re_g` for one channel.
    pub fn channel_csv(&self, k: usize) -> String {
        let mut s = String::from("lambda,p,rho,im_g,re_g\n");
        for i in 0..self.grid.len() {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                self.grid[i],
                self.p_of[k].values()[i],
                self.rho[k].values()[i],
                self.im_g[k].values()[i],
                self.re_g[k].values()[i]
            ));
        }
        s
    }

    /// CSV with columns `iter,residual`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iter,residual\n");
        for (i, r) in self.trace.iter().enumerate() {
            s.push_str(&format!("{i},{r:.12e}\n"));
        }
        s
    }
}
