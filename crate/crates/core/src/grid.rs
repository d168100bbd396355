//! Real-valued functions sampled on a sorted energy grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real function sampled at strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    lambdas: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lambdas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if lambdas.len() != values.len() {
            return Err(Error::Shape(format!("grid has {} points but {} values", lambdas.len(), values.len())));
        }
        if lambdas.len() < 2 {
            return Err(Error::Size("a grid needs at least two points".into()));
        }
        if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("grid abscissae must be strictly increasing".into()));
        }
        if lambdas.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid function contains non-finite entries".into()));
        }
        Ok(Self { lambdas, values })
    }

    pub fn from_fn(lambdas: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = lambdas.iter().map(|&x| f(x)).collect();
        Self::new(lambdas, values)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.lambdas.clone(), values)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.lambdas, self.values)
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn hi(&self) -> f64 {
        self.lambdas[self.lambdas.len() - 1]
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.lambdas == other.lambdas
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Shape("grid functions live on different grids".into()))
        }
    }

    /// Trapezoid integral over the whole grid.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.lambdas, &self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Index and abscissa of the largest value.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best, self.lambdas[best])
    }

    /// Largest edge value relative to the largest absolute value.
    pub fn edge_fraction(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.values[0].abs().max(self.values[self.len() - 1].abs()) / m
    }

    /// Piecewise-linear interpolation; zero outside the grid.
    pub fn interp_linear(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        let k = self.segment(x);
        let (x0, x1) = (self.lambdas[k], self.lambdas[k + 1]);
        let t = (x - x0) / (x1 - x0);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    /// Cubic Hermite interpolation with finite-difference slopes; zero outside the grid.
    pub fn interp_cubic(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        let k = self.segment(x);
        let (x0, x1) = (self.lambdas[k], self.lambdas[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (m0, m1) = (self.slope(k), self.slope(k + 1));
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1
    }

    /// Finite-difference derivative estimate at grid node `i`.
    pub fn slope(&self, i: usize) -> f64 {
        let n = self.len();
        let (x, y) = (&self.lambdas, &self.values);
        if n == 2 {
            (y[1] - y[0]) / (x[1] - x[0])
        } else if i == 0 {
            let h0 = x[1] - x[0];
            let h1 = x[2] - x[1];
            (-(2.0 * h0 + h1) / (h0 * (h0 + h1))) * y[0] + ((h0 + h1) / (h0 * h1)) * y[1]
                - (h0 / (h1 * (h0 + h1))) * y[2]
        } else if i == n - 1 {
            let h0 = x[n - 2] - x[n - 3];
            let h1 = x[n - 1] - x[n - 2];
            (h1 / (h0 * (h0 + h1))) * y[n - 3] - ((h0 + h1) / (h0 * h1)) * y[n - 2]
                + ((2.0 * h1 + h0) / (h1 * (h0 + h1))) * y[n - 1]
        } else {
            // three-point formula, exact for quadratics on uneven spacing
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1]
        }
    }

    /// Index k such that lambdas[k] <= x <= lambdas[k+1].
    pub fn segment(&self, x: f64) -> usize {
        let n = self.len();
        match self.lambdas.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// L1 distance to another function on the same grid.
    pub fn l1_distance(&self, other: &GridFunction) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let diff: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).collect();
        Ok(trapezoid(&self.lambdas, &diff))
    }

    /// Half width at half maximum measured from the global peak, using
    /// linear interpolation to locate the two half-maximum crossings.
    pub fn hwhm(&self) -> Option<f64> {
        let (ip, _) = self.argmax();
        let half = 0.5 * self.values[ip];
        if half <= 0.0 {
            return None;
        }
        let (x, y) = (&self.lambdas, &self.values);
        let mut right = None;
        for i in ip..self.len() - 1 {
            if y[i + 1] <= half {
                right = Some(x[i] + (y[i] - half) / (y[i] - y[i + 1]) * (x[i + 1] - x[i]));
                break;
            }
        }
        let mut left = None;
        for i in (1..=ip).rev() {
            if y[i - 1] <= half {
                left = Some(x[i] - (y[i] - half) / (y[i] - y[i - 1]) * (x[i] - x[i - 1]));
                break;
            }
        }
        Some(0.5 * (right? - left?))
    }
}

/// Trapezoid rule on arbitrary (sorted) abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1])).sum()
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + h * i as f64 }).collect()
}

/// `n` points on `[center - half_width, center + half_width]`, mirror
/// symmetric about `center` to the last bit.
pub fn symmetric(center: f64, half_width: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && half_width > 0.0);
    let h = 2.0 * half_width / (n - 1) as f64;
    let mut offsets = vec![0.0; n];
    for i in 0..n / 2 {
        let d = half_width - h * i as f64;
        offsets[i] = -d;
        offsets[n - 1 - i] = d;
    }
    offsets.into_iter().map(|d| center + d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn symmetric_grid_mirrors_exactly() {
        let g = symmetric(0.0, 3.0, 1001);
        for i in 0..g.len() {
            assert_eq!(g[i], -g[g.len() - 1 - i]);
        }
        assert_eq!(g[500], 0.0);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let x = uniform(0.0, 2.0, 7);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((trapezoid(&x, &y) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_interpolation_reproduces_quadratics() {
        let f = GridFunction::from_fn(uniform(-1.0, 1.0, 21), |x| x * x - 0.5 * x).unwrap();
        for &x in &[-0.93, -0.2, 0.0101, 0.77] {
            assert!((f.interp_cubic(x) - (x * x - 0.5 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn hwhm_of_a_tent() {
        let f = GridFunction::from_fn(uniform(-2.0, 2.0, 401), |x| (1.0 - x.abs()).max(0.0)).unwrap();
        assert!((f.hwhm().unwrap() - 0.5).abs() < 1e-12);
    }
}
