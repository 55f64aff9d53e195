//! Normalised sup-statistics of the covariance and zero-energy processes,
//! and the moment-truncation diagnostic for the disturbance innovations.
//!
//! Both statistics take the form
//! `(e_n h)^(-1/2) * sup_a |sum_t f((x_t - d_n a)/h) * w_t|`
//! with `w_t = u_t` (covariance) or `w_t = 1` (zero energy); the supremum is
//! taken over a finite grid that exhausts the compact support of `f`, so
//! nothing is lost relative to the supremum over the whole line.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::SamplePath;
use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernels::{simpson_integral, Kernel};
use crate::signal::{window_ranges, SortedPath};

/// A sup-statistic with its location and log-normalised value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupStatistic {
    pub value: f64,
    /// Arg max in a-units (x / d_n).
    pub argmax_a: f64,
    pub n: usize,
    pub h: f64,
    pub scaled_by_log: f64,
}

fn sup_over_grid(
    path: &SamplePath,
    support_radius: f64,
    h: f64,
    grid: &EvalGrid,
    eval: impl Fn(f64) -> f64 + Sync,
    weights: Option<&[f64]>,
) -> SupStatistic {
    let sorted = SortedPath::new(&path.x);
    let ranges = window_ranges(&sorted.xs, grid.points(), support_radius * h);
    let norm = 1.0 / (path.e_n() * h).sqrt();
    let (value, argmax) = grid
        .points()
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(&x0, &(lo, hi))| {
            let mut acc = 0.0;
            for j in lo as usize..hi as usize {
                let f = eval((sorted.xs[j] - x0) / h);
                match weights {
                    Some(w) => acc += f * w[sorted.time_index[j] as usize],
                    None => acc += f,
                }
            }
            (acc.abs() * norm, x0)
        })
        .reduce(
            || (0.0, f64::NAN),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    SupStatistic {
        value,
        argmax_a: argmax / path.d_n(),
        n: path.n,
        h,
        scaled_by_log: value / (path.n as f64).ln(),
    }
}

/// Covariance-process supremum:
/// `(e_n h)^(-1/2) * sup_a |sum_t f((x_t - d_n a)/h) * u_t|` for a bounded,
/// integrable, Lipschitz `f` (any catalog kernel qualifies).
pub fn covariance_sup(
    path: &SamplePath,
    f: &Kernel,
    h: f64,
    grid: &EvalGrid,
) -> Result<SupStatistic> {
    if !(h > 0.0) {
        return Err(Error::config(format!("bandwidth must be positive, got {h}")));
    }
    Ok(sup_over_grid(
        path,
        f.support_radius,
        h,
        grid,
        |z| f.eval(z),
        Some(&path.u),
    ))
}

/// A zero-mean test function for the zero-energy process, certified at
/// construction: `integral g = 0` (within 1e-9) and finite first absolute
/// moment, both by Simpson quadrature over the compact support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroMeanFn {
    kernel: Kernel,
    pub support_radius: f64,
}

impl ZeroMeanFn {
    /// The built-in family `g = K^[1] : z -> z * K(z)`, which inherits the
    /// zero integral from the kernel's symmetry.
    pub fn kernel_first_moment(kernel: Kernel) -> Result<Self> {
        let r = kernel.support_radius;
        let mass = simpson_integral(|z| z * kernel.eval(z), r, 100_000);
        if mass.abs() > 1e-9 {
            return Err(Error::config(format!(
                "zero-mean certificate failed: integral g = {mass}"
            )));
        }
        Ok(ZeroMeanFn {
            kernel,
            support_radius: r,
        })
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        z * self.kernel.eval(z)
    }
}

/// Zero-energy-process supremum:
/// `(e_n h)^(-1/2) * sup_a |sum_t g((x_t - d_n a)/h)|`.
pub fn zero_energy_sup(
    path: &SamplePath,
    g: &ZeroMeanFn,
    h: f64,
    grid: &EvalGrid,
) -> Result<SupStatistic> {
    if !(h > 0.0) {
        return Err(Error::config(format!("bandwidth must be positive, got {h}")));
    }
    Ok(sup_over_grid(
        path,
        g.support_radius,
        h,
        grid,
        |z| g.eval(z),
        None,
    ))
}

/// Truncates and recentres an innovation series at the moment-growth cutoff
/// `n^(1/q0)`: `eta * 1{|eta| <= n^(1/q0)}` minus the empirical mean of the
/// truncated series (the exact truncated expectation has no closed form for
/// general laws, so the empirical mean stands in for it).
pub fn truncate_eta(eta: &[f64], n: usize, q0: f64) -> Result<Vec<f64>> {
    if !(q0 > 2.0) {
        return Err(Error::config(format!("q0 must exceed 2, got {q0}")));
    }
    if eta.is_empty() {
        return Err(Error::config("empty eta series".to_string()));
    }
    let cutoff = (n as f64).powf(1.0 / q0);
    let truncated: Vec<f64> = eta
        .iter()
        .map(|&e| if e.abs() <= cutoff { e } else { 0.0 })
        .collect();
    let mean = truncated.iter().sum::<f64>() / truncated.len() as f64;
    Ok(truncated.iter().map(|&e| e - mean).collect())
}
