//! The kernel signal process: the normalised kernel sum
//! `L_n(a) = (e_n h)^(-1) * sum_t K((x_t - d_n a) / h)`, an empirical
//! occupation density of the standardised regressor. Evaluation is windowed:
//! the sample is sorted once and every grid node only touches observations
//! within the kernel support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::SamplePath;
use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::innovations::StreamId;
use crate::kernels::Kernel;

/// Ascending view of the sample with the original time indices, so windowed
/// scans can recover the matching `y_t` or `u_t`.
pub(crate) struct SortedPath {
    pub xs: Vec<f64>,
    pub time_index: Vec<u32>,
}

impl SortedPath {
    pub fn new(x: &[f64]) -> Self {
        let mut order: Vec<u32> = (0..x.len() as u32).collect();
        order.sort_by(|&a, &b| x[a as usize].partial_cmp(&x[b as usize]).unwrap());
        let xs = order.iter().map(|&i| x[i as usize]).collect();
        SortedPath {
            xs,
            time_index: order,
        }
    }
}

/// Half-open index ranges `[start, end)` into the sorted sample of the
/// points within `radius` of each node. Two-pointer scan over the ascending
/// node list.
pub(crate) fn window_ranges(xs: &[f64], nodes: &[f64], radius: f64) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut lo = 0usize;
    let mut hi = 0usize;
    for &x0 in nodes {
        while lo < xs.len() && xs[lo] < x0 - radius {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < xs.len() && xs[hi] <= x0 + radius {
            hi += 1;
        }
        out.push((lo as u32, hi as u32));
    }
    out
}

/// Signal process values on the grid. The grid is in x-units; node `x0`
/// carries the value `L_n(x0 / d_n)`.
pub fn signal_process(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    grid: &EvalGrid,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::config(format!("bandwidth must be positive, got {h}")));
    }
    let sorted = SortedPath::new(&path.x);
    let ranges = window_ranges(&sorted.xs, grid.points(), kernel.support_radius * h);
    let norm = 1.0 / (path.e_n() * h);
    let values = grid
        .points()
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(&x0, &(lo, hi))| {
            let mut acc = 0.0;
            for &xt in &sorted.xs[lo as usize..hi as usize] {
                acc += kernel.eval((xt - x0) / h);
            }
            acc * norm
        })
        .collect();
    Ok(values)
}

/// Mesh divisor for the mass-identity quadrature. The trapezoid error on a
/// kernel sum scales like (mesh/h)^2 with sign fluctuating across kernels,
/// so h/500 holds the total comfortably below 1e-6; the default evaluation
/// mesh of h/5 is far too coarse for that tolerance.
const MASS_MESH_DIVISOR: f64 = 500.0;

/// Trapezoid quadrature of `integral of L_n(a) da` on a refined grid padded
/// beyond the sample range by the kernel support. The exact value is 1 for
/// any path and bandwidth, because `e_n * d_n = n` and each kernel carries
/// unit mass.
///
/// The signal vanishes outside the kernel-support neighbourhood of the
/// sample, so the quadrature covers only that union of segments; heavy
/// tails can stretch the sample range arbitrarily without inflating the
/// node count, which stays bounded by the sample size.
pub fn signal_mass(path: &SamplePath, kernel: &Kernel, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::config(format!("bandwidth must be positive, got {h}")));
    }
    let mesh = h / MASS_MESH_DIVISOR;
    let reach = kernel.support_radius * h + mesh;
    let mut xs = path.x.clone();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut total = 0.0;
    let mut seg_lo = xs[0] - reach;
    let mut seg_hi = xs[0] + reach;
    for &x in &xs[1..] {
        if x - reach > seg_hi {
            total += segment_mass(path, kernel, h, seg_lo, seg_hi, mesh)?;
            seg_lo = x - reach;
        }
        seg_hi = x + reach;
    }
    total += segment_mass(path, kernel, h, seg_lo, seg_hi, mesh)?;
    Ok(total / path.d_n())
}

fn segment_mass(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    lo: f64,
    hi: f64,
    mesh: f64,
) -> Result<f64> {
    let steps = ((hi - lo) / mesh).ceil().max(1.0) as usize;
    let grid = EvalGrid::uniform(lo, hi, (hi - lo) / steps as f64)?;
    let values = signal_process(path, kernel, h, &grid)?;
    Ok(trapezoid(&values, grid.mesh()))
}

pub(crate) fn trapezoid(values: &[f64], mesh: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    mesh * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: usize,
}

/// Monte Carlo estimate of `P{max_t x_t <= c0 * sqrt(n) / 2}` for the
/// standard Gaussian random walk. The weak limit is `2 * Phi(c0/2) - 1` by
/// the reflection principle, which is why no deterministic interval growing
/// at the full `sqrt(n)` rate can carry signal mass with probability one.
pub fn reflection_probability_check(
    n: usize,
    c0: f64,
    reps: usize,
    seed: u64,
) -> Result<ReflectionEstimate> {
    if n == 0 || reps == 0 {
        return Err(Error::config("n and reps must be positive".to_string()));
    }
    if !(c0 > 0.0) {
        return Err(Error::config(format!("c0 must be positive, got {c0}")));
    }
    let threshold = c0 * (n as f64).sqrt() / 2.0;
    let hits: usize = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = StreamId::new(seed, rep).rng();
            let mut x = 0.0;
            for _ in 0..n {
                x += rng.standard_normal();
                if x > threshold {
                    return 0usize;
                }
            }
            1usize
        })
        .sum();
    let p = hits as f64 / reps as f64;
    Ok(ReflectionEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        reps,
    })
}
