//! Principal-value Hilbert transforms of sampled functions.
//!
//! H f(l) = (1/pi) PV int f(x) / (l - x) dx, with f taken as zero outside
//! the grid. The singular part is removed by subtracting f(l):
//!
//! PV int_a^b f / (l - x) = int_a^b (f(x) - f(l)) / (l - x) dx + f(l) ln((l - a) / (b - l)),
//!
//! and the smooth remainder is integrated with the trapezoid rule.

use std::f64::consts::PI;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Edge value, relative to the peak, above which a result is flagged.
pub const EDGE_TOLERANCE: f64 = 1e-3;

/// A transform value with the truncation flag of its input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvEstimate {
    pub value: f64,
    pub edge_warning: bool,
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = 0.5 * (x[k + 1] - x[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// ln((l - a) / (b - l)) with the distances floored at half a cell, so the
/// endpoints stay finite.
fn log_term(x: &[f64], i_or_l: f64) -> f64 {
    let n = x.len();
    let left = (i_or_l - x[0]).max(0.5 * (x[1] - x[0]));
    let right = (x[n - 1] - i_or_l).max(0.5 * (x[n - 1] - x[n - 2]));
    (left / right).ln()
}

/// Hilbert transform of `f` at an arbitrary point inside the grid.
pub fn hilbert_pv(f: &GridFunction, lambda: f64) -> Result<PvEstimate> {
    if !(lambda >= f.lo() && lambda <= f.hi()) {
        return Err(Error::Domain(format!("lambda = {lambda} outside grid [{}, {}]", f.lo(), f.hi())));
    }
    let x = f.lambdas();
    let y = f.values();
    let edge_warning = f.edge_fraction() > EDGE_TOLERANCE;
    if let Ok(i) = x.binary_search_by(|v| v.total_cmp(&lambda)) {
        return Ok(PvEstimate { value: node_transform(x, y, i), edge_warning });
    }
    let fl = f.interp_cubic(lambda);
    let k = f.segment(lambda);
    let h = x[k + 1] - x[k];
    let w = trapezoid_weights(x);
    let mut s = 0.0;
    for j in 0..x.len() {
        let d = lambda - x[j];
        let g = if d.abs() < 1e-9 * h { -f.slope(j) } else { (y[j] - fl) / d };
        s += w[j] * g;
    }
    s += fl * log_term(x, lambda);
    Ok(PvEstimate { value: s / PI, edge_warning })
}

fn node_transform(x: &[f64], y: &[f64], i: usize) -> f64 {
    let w = trapezoid_weights(x);
    let li = x[i];
    let mut s = 0.0;
    for j in 0..x.len() {
        if j != i {
            s += w[j] * (y[j] - y[i]) / (li - x[j]);
        }
    }
    s += w[i] * (-three_point_slope(x, y, i));
    s += y[i] * log_term(x, li);
    s / PI
}

fn three_point_slope(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    if i == 0 {
        (y[1] - y[0]) / (x[1] - x[0])
    } else if i == n - 1 {
        (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2])
    } else {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1]
    }
}

/// Transform evaluated at every grid node.
pub fn hilbert_on_grid(f: &GridFunction) -> GridFunction {
    let x = f.lambdas();
    let y = f.values();
    let values: Vec<f64> = (0..x.len()).into_par_iter().map(|i| node_transform(x, y, i)).collect();
    f.with_values(values).expect("transform of a finite grid function is finite")
}

/// Dense linear operator reproducing [`hilbert_on_grid`] on a fixed grid.
#[derive(Debug, Clone)]
pub struct HilbertMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl HilbertMatrix {
    pub fn new(x: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 3, "Hilbert matrix needs at least three nodes");
        let w = trapezoid_weights(x);
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![0.0; n];
                let li = x[i];
                let mut diag = 0.0;
                for j in 0..n {
                    if j != i {
                        let c = w[j] / (li - x[j]);
                        row[j] += c;
                        diag -= c;
                    }
                }
                // -w_i f'(x_i), with f' from the three-point stencil
                let wi = w[i];
                if i == 0 {
                    let c = 1.0 / (x[1] - x[0]);
                    row[0] += wi * c;
                    row[1] -= wi * c;
                } else if i == n - 1 {
                    let c = 1.0 / (x[n - 1] - x[n - 2]);
                    row[n - 1] -= wi * c;
                    row[n - 2] += wi * c;
                } else {
                    let h0 = li - x[i - 1];
                    let h1 = x[i + 1] - li;
                    row[i - 1] -= wi * (-h1 / (h0 * (h0 + h1)));
                    diag -= wi * ((h1 - h0) / (h0 * h1));
                    row[i + 1] -= wi * (h0 / (h1 * (h0 + h1)));
                }
                diag += log_term(x, li);
                row[i] += diag;
                row.iter_mut().for_each(|v| *v /= PI);
                row
            })
            .collect();
        Self { n, entries: rows.concat() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n);
        self.entries.par_chunks(self.n).map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Fast version of [`hilbert_on_grid`] for uniform grids: the off-diagonal
/// part of the node rule is a Toeplitz product, applied by FFT.
pub struct UniformHilbert {
    n: usize,
    h: f64,
    diag: Vec<f64>,
    kernel_hat: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for UniformHilbert {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UniformHilbert").field("n", &self.n).field("h", &self.h).finish()
    }
}

impl UniformHilbert {
    /// Grid `lo + k h`, k = 0..n.
    pub fn new(lo: f64, h: f64, n: usize) -> Self {
        assert!(n >= 3 && h > 0.0);
        let x: Vec<f64> = (0..n).map(|k| lo + h * k as f64).collect();
        let w = trapezoid_weights(&x);
        let diag = (0..n)
            .map(|i| {
                let mut d = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    if j != i {
                        d -= wj / (h * (i as f64 - j as f64));
                    }
                }
                d + log_term(&x, x[i])
            })
            .collect();
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        let mut kernel_hat: Vec<Complex64> = (0..m)
            .map(|k| {
                let d = if k < n {
                    k as f64
                } else if k == n {
                    0.0
                } else {
                    k as f64 - m as f64
                };
                Complex64::new(if d == 0.0 { 0.0 } else { 1.0 / d }, 0.0)
            })
            .collect();
        fft.process(&mut kernel_hat);
        Self { n, h, diag, kernel_hat, fft, ifft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(y.len(), n);
        let m = 2 * n;
        let mut buf: Vec<Complex64> = (0..m)
            .map(|j| {
                if j < n {
                    let wj = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                    Complex64::new(wj * y[j], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.ifft.process(&mut buf);
        let h = self.h;
        let scale = 1.0 / m as f64;
        (0..n)
            .map(|i| {
                let conv = buf[i].re * scale;
                let wi = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                let slope = if i == 0 {
                    (y[1] - y[0]) / h
                } else if i == n - 1 {
                    (y[n - 1] - y[n - 2]) / h
                } else {
                    (y[i + 1] - y[i - 1]) / (2.0 * h)
                };
                (conv + self.diag[i] * y[i] - wi * slope) / PI
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{symmetric, uniform};
    use crate::specfun::profiles::{gauss, gaussian_dispersion, lorentz};

    #[test]
    fn lorentzian_transform() {
        let chi = 1.0;
        let f = GridFunction::from_fn(uniform(-2000.0, 2000.0, 400_001), |x| lorentz(x, chi)).unwrap();
        for &l in &[-3.0, -0.5, 0.25, 1.0, 4.0] {
            let h = hilbert_pv(&f, l).unwrap().value;
            let want = l / (PI * (l * l + chi * chi));
            assert!((h - want).abs() < 1e-4, "{l}: {h} vs {want}");
        }
    }

    #[test]
    fn gaussian_transform_off_node() {
        let f = GridFunction::from_fn(uniform(-12.0, 12.0, 4001), |x| gauss(x, 1.0)).unwrap();
        assert!(!hilbert_pv(&f, 0.0).unwrap().edge_warning);
        for &l in &[-2.2345, -0.0001, 0.731, 1.5] {
            let h = hilbert_pv(&f, l).unwrap().value;
            assert!((h - gaussian_dispersion(l, 1.0)).abs() < 1e-4);
        }
    }

    #[test]
    fn even_function_vanishes_at_center() {
        let f = GridFunction::from_fn(symmetric(0.3, 8.0, 2001), |x| gauss(x - 0.3, 0.7)).unwrap();
        assert!(hilbert_pv(&f, 0.3).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn matrix_matches_pointwise() {
        let f = GridFunction::from_fn(uniform(-6.0, 6.0, 301), |x| gauss(x - 0.2, 0.9)).unwrap();
        let m = HilbertMatrix::new(f.lambdas());
        let a = m.apply(f.values());
        let b = hilbert_on_grid(&f);
        for (u, v) in a.iter().zip(b.values()) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn fft_transform_matches_node_rule() {
        let x = uniform(-5.0, 7.0, 257);
        let h = x[1] - x[0];
        let f = GridFunction::from_fn(x, |t| gauss(t - 0.4, 0.8) + 0.3 * lorentz(t + 1.0, 0.5)).unwrap();
        let fast = UniformHilbert::new(-5.0, h, 257).apply(f.values());
        let slow = hilbert_on_grid(&f);
        for (a, b) in fast.iter().zip(slow.values()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn outside_grid_is_rejected_and_edges_flagged() {
        let f = GridFunction::from_fn(uniform(-1.0, 1.0, 11), |_| 1.0).unwrap();
        assert!(hilbert_pv(&f, 1.5).is_err());
        assert!(hilbert_pv(&f, 0.0).unwrap().edge_warning);
    }
}
