//! Thin wrapper over argmin's Nelder-Mead for closures on `Vec<f64>`.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Cost<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Cost<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let v = (self.0)(p);
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    }
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of size `step`.
/// Returns the best point and its cost.
pub(crate) fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    max_iter: u64,
    sd_tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let mut simplex = vec![x0.to_vec()];
    for (i, s) in step.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += s;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(sd_tol).map_err(|e| Error::Config(e.to_string()))?;
    let res = Executor::new(Cost(f), solver)
        .configure(|s| s.max_iters(max_iter))
        .run()
        .map_err(|e| Error::Config(format!("Nelder-Mead: {e}")))?;
    let state = res.state();
    let best = state.get_best_param().cloned().unwrap_or_else(|| x0.to_vec());
    Ok((best, state.get_best_cost()))
}

/// Restarts Nelder-Mead from its own optimum until the cost stops improving.
pub(crate) fn nelder_mead_restarts(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    max_iter: u64,
    sd_tol: f64,
    restarts: usize,
) -> Result<(Vec<f64>, f64)> {
    let (mut x, mut c) = nelder_mead(&f, x0, step, max_iter, sd_tol)?;
    for _ in 0..restarts {
        let (x2, c2) = nelder_mead(&f, &x, step, max_iter, sd_tol)?;
        if !(c2 < c) {
            break;
        }
        x = x2;
        c = c2;
    }
    Ok((x, c))
}
