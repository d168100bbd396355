use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shell-counted log density of states.
///
/// Shell k covers [lo + k w, lo + (k+1) w) with the last shell closed, and
/// is reported at its center. Empty shells are dropped from `lambdas` and
/// `s_of_lambda` and listed in `excluded`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub lambdas: Vec<f64>,
    pub s_of_lambda: Vec<f64>,
    pub window: f64,
    pub lo: f64,
    pub counts: Vec<usize>,
    pub excluded: Vec<f64>,
    /// Shell index of each reported grid point.
    pub shell_index: Vec<usize>,
    pub n_shells: usize,
}

impl EntropyEstimate {
    /// Shell containing `lambda`, if within the binned range.
    pub fn shell_of(&self, lambda: f64) -> Option<usize> {
        let k = ((lambda - self.lo) / self.window).floor();
        if k < 0.0 {
            return None;
        }
        let k = k as usize;
        if k < self.n_shells {
            Some(k)
        } else if k == self.n_shells && lambda <= self.lo + self.window * self.n_shells as f64 {
            Some(k - 1)
        } else {
            None
        }
    }

    pub fn shell_center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.window
    }

    /// Position of shell `k` in the reported (non-empty) grid.
    pub fn grid_position(&self, k: usize) -> Option<usize> {
        self.shell_index.binary_search(&k).ok()
    }

    /// exp(S) at `lambda`: count in its shell over the window; zero outside.
    pub fn density_at(&self, lambda: f64) -> f64 {
        match self.shell_of(lambda).and_then(|k| self.grid_position(k)) {
            Some(i) => self.s_of_lambda[i].exp(),
            None => 0.0,
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.s_of_lambda.iter().map(|s| s.exp()).collect()
    }
}

/// Bins `eigenvalues` into shells of width `window`.
pub fn estimate_entropy(eigenvalues: &[f64], window: f64) -> Result<EntropyEstimate> {
    let n = eigenvalues.len();
    if n < 2 {
        return Err(Error::Size("need at least two eigenvalues".into()));
    }
    if !(window > 0.0) {
        return Err(Error::Domain(format!("window must be positive, got {window}")));
    }
    let lo = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spacing = (hi - lo) / (n - 1) as f64;
    if !(window > spacing) {
        return Err(Error::Domain(format!("window {window} does not exceed the mean level spacing {spacing}")));
    }
    let n_shells = (((hi - lo) / window).ceil() as usize).max(1);
    let mut counts = vec![0usize; n_shells];
    for &e in eigenvalues {
        let k = (((e - lo) / window).floor() as usize).min(n_shells - 1);
        counts[k] += 1;
    }
    let mut est = EntropyEstimate {
        lambdas: Vec::new(),
        s_of_lambda: Vec::new(),
        window,
        lo,
        counts: counts.clone(),
        excluded: Vec::new(),
        shell_index: Vec::new(),
        n_shells,
    };
    for (k, &c) in counts.iter().enumerate() {
        let center = est.shell_center(k);
        if c == 0 {
            est.excluded.push(center);
        } else {
            est.lambdas.push(center);
            est.s_of_lambda.push((c as f64 / window).ln());
            est.shell_index.push(k);
        }
    }
    Ok(est)
}
