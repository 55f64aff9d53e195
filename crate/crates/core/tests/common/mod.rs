//! Shared test utilities: brute-force oracles (independent of the library's
//! windowed fast paths), random configuration sampling, and small numeric
//! helpers.

#![allow(dead_code)]

use cointreg::dgp::{DgpConfig, SamplePath};
use cointreg::grid::EvalGrid;
use cointreg::innovations::{InnovationConfig, StableLaw};
use cointreg::kernels::Kernel;
use cointreg::m0::RegressionFunction;
use cointreg::norming::RegressorCoeffSpec;

/// Unit-root regressor with N(0,1) innovations (alpha = 2, scale = 1/2).
pub fn unit_root_gaussian(m0: RegressionFunction, theta: Vec<f64>) -> DgpConfig {
    DgpConfig::new(
        InnovationConfig::exogenous(StableLaw::standard_normal()),
        RegressorCoeffSpec::unit_root(2.0).unwrap(),
        theta,
        m0,
    )
}

/// Brute-force signal process: double loop, no sorting, no windows.
pub fn brute_signal(path: &SamplePath, kernel: &Kernel, h: f64, grid: &EvalGrid) -> Vec<f64> {
    let norm = 1.0 / (path.e_n() * h);
    grid.points()
        .iter()
        .map(|&x0| {
            path.x
                .iter()
                .map(|&xt| kernel.eval((xt - x0) / h))
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Brute-force Nadaraya-Watson.
pub fn brute_nw(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    grid: &EvalGrid,
) -> Vec<Option<f64>> {
    grid.points()
        .iter()
        .map(|&x0| {
            let mut sk = 0.0;
            let mut sky = 0.0;
            for t in 0..path.n {
                let w = kernel.eval((path.x[t] - x0) / h) / h;
                sk += w;
                sky += w * path.y[t];
            }
            if sk > 0.0 {
                Some(sky / sk)
            } else {
                None
            }
        })
        .collect()
}

/// Brute-force local-linear via dense normal equations centred at the node
/// (unscaled regressor powers). Returns the estimate and the condition
/// number of the bandwidth-scaled design for tolerance bookkeeping.
pub fn brute_ll(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    grid: &EvalGrid,
) -> Vec<(Option<f64>, f64)> {
    grid.points()
        .iter()
        .map(|&x0| {
            let mut s = [0.0f64; 3];
            let mut t = [0.0f64; 2];
            let mut sz = [0.0f64; 3];
            let mut support = 0usize;
            for i in 0..path.n {
                let d = path.x[i] - x0;
                let w = kernel.eval(d / h) / h;
                if w == 0.0 {
                    continue;
                }
                support += 1;
                s[0] += w;
                s[1] += w * d;
                s[2] += w * d * d;
                let z = d / h;
                sz[0] += w;
                sz[1] += w * z;
                sz[2] += w * z * z;
                t[0] += w * path.y[i];
                t[1] += w * d * path.y[i];
            }
            let half_tr = 0.5 * (sz[0] + sz[2]);
            let disc = (0.25 * (sz[0] - sz[2]) * (sz[0] - sz[2]) + sz[1] * sz[1]).sqrt();
            let cond = if half_tr - disc > 0.0 {
                (half_tr + disc) / (half_tr - disc)
            } else {
                f64::INFINITY
            };
            let det = s[0] * s[2] - s[1] * s[1];
            if support < 2 || !(det > 0.0) || cond > 1e12 {
                (None, cond)
            } else {
                ((Some((t[0] * s[2] - t[1] * s[1]) / det)), cond)
            }
        })
        .collect()
}

/// Brute-force covariance-process supremum.
pub fn brute_covariance_sup(path: &SamplePath, f: &Kernel, h: f64, grid: &EvalGrid) -> f64 {
    let norm = 1.0 / (path.e_n() * h).sqrt();
    grid.points()
        .iter()
        .map(|&x0| {
            (0..path.n)
                .map(|t| f.eval((path.x[t] - x0) / h) * path.u[t])
                .sum::<f64>()
                .abs()
                * norm
        })
        .fold(0.0f64, f64::max)
}

/// Brute-force zero-energy supremum with g = z * K(z).
pub fn brute_zero_energy_sup(path: &SamplePath, k: &Kernel, h: f64, grid: &EvalGrid) -> f64 {
    let norm = 1.0 / (path.e_n() * h).sqrt();
    grid.points()
        .iter()
        .map(|&x0| {
            (0..path.n)
                .map(|t| {
                    let z = (path.x[t] - x0) / h;
                    z * k.eval(z)
                })
                .sum::<f64>()
                .abs()
                * norm
        })
        .fold(0.0f64, f64::max)
}

/// A sampled test configuration.
pub struct RandomCase {
    pub label: String,
    pub dgp: DgpConfig,
    pub kernel: Kernel,
    pub h: f64,
    pub seed: u64,
    pub n: usize,
}

/// Deterministic menu of mixed-regime configurations. With `estimation`
/// set, the menu stays within alpha >= 1.5 and bounded-derivative m0 so
/// absolute float tolerances stay meaningful; without it the menu includes
/// heavier tails for signal-only checks.
pub fn random_cases(count: usize, estimation: bool, n: usize) -> Vec<RandomCase> {
    let kernels = cointreg::kernel_catalog();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let kernel = kernels[i % kernels.len()];
        let max_lag = 800;
        let (label, coeff, alpha) = match i % 3 {
            0 => {
                let menus: [(&str, Vec<f64>, f64); 3] = [
                    ("sm-rw", vec![1.0], 2.0),
                    ("sm-ma", vec![0.7, 0.2, 0.1], 2.0),
                    ("sm-heavy", vec![1.0, -0.3], 1.5),
                ];
                let (l, phi, a) = menus[(i / 3) % menus.len()].clone();
                (l, RegressorCoeffSpec::sm(phi, a).unwrap(), a)
            }
            1 => {
                let menus: [(f64, f64); 3] = [(0.6, 2.0), (0.75, 2.0), (0.8, 1.5)];
                let (hurst, a) = menus[(i / 3) % menus.len()];
                (
                    "lm",
                    RegressorCoeffSpec::lm(hurst, a, max_lag).unwrap(),
                    a,
                )
            }
            _ => {
                let menus: [(f64, f64); 3] = if estimation {
                    [(0.4, 2.0), (0.45, 2.0), (0.4, 1.5)]
                } else {
                    [(0.4, 2.0), (0.4, 1.0), (0.4, 0.8)]
                };
                let (hurst, a) = menus[(i / 3) % menus.len()];
                (
                    "ap",
                    RegressorCoeffSpec::ap(hurst, a, max_lag).unwrap(),
                    a,
                )
            }
        };
        let law = StableLaw::new(alpha, 0.0, 1.0).unwrap();
        let endo = if estimation && alpha > 1.0 && i % 4 == 0 {
            0.5
        } else {
            0.0
        };
        let innov = InnovationConfig::new(law, endo, 8.0).unwrap();
        let m0 = if estimation {
            match i % 5 {
                0 => RegressionFunction::Sin,
                1 => RegressionFunction::Logistic,
                2 => RegressionFunction::Constant(1.0),
                3 if alpha == 2.0 && label.starts_with("sm") => {
                    RegressionFunction::Linear { a: 2.0, b: 1.0 }
                }
                3 => RegressionFunction::Sin,
                _ => RegressionFunction::parse("spline").unwrap(),
            }
        } else {
            RegressionFunction::Zero
        };
        let theta = if estimation {
            (0..50).map(|k| 0.5f64.powi(k)).collect()
        } else {
            vec![1.0]
        };
        let h = if label == "lm" {
            0.5 + 0.2 * ((i / 2) % 3) as f64
        } else {
            0.25 + 0.075 * (i % 8) as f64
        };
        out.push(RandomCase {
            label: format!("{label}-{i}"),
            dgp: DgpConfig::new(innov, coeff, theta, m0),
            kernel,
            h,
            seed: 1000 + i as u64,
            n,
        });
    }
    out
}

/// Hill tail-index estimator over the top fraction of absolute values.
pub fn hill_index(xs: &[f64], top_fraction: f64) -> f64 {
    let mut a: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let k = ((xs.len() as f64) * top_fraction) as usize;
    let threshold = a[k];
    let mean_log = a[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    1.0 / mean_log
}
