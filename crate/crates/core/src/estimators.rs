//! Nadaraya-Watson and local-linear regression estimators on a shared grid,
//! the bias/noise/denominator decomposition of the NW error, and uniform
//! error metrics over a domain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::SamplePath;
use crate::domain::DomainSet;
use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernels::Kernel;
use crate::m0::RegressionFunction;
use crate::signal::{window_ranges, SortedPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    #[serde(alias = "nadaraya_watson")]
    Nw,
    #[serde(alias = "local_linear")]
    Ll,
}

/// Per-node estimates. `m_hat` is `None` where the estimator is undefined
/// (zero denominator for NW, degenerate design for LL); `slope` is the
/// local-linear slope and `None` for NW sheets.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSheet {
    pub grid: EvalGrid,
    pub m_hat: Vec<Option<f64>>,
    /// Kernel-sum denominator `sum_t K_h(x_t - x)` at each node.
    pub denom: Vec<f64>,
    pub slope: Vec<Option<f64>>,
    pub degenerate: Vec<bool>,
}

impl EstimateSheet {
    pub fn defined_count(&self) -> usize {
        self.m_hat.iter().filter(|m| m.is_some()).count()
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

/// Condition-number ceiling for the scaled local-linear design.
const LL_CONDITION_LIMIT: f64 = 1e12;

/// Per-node local-linear output: estimate, denominator, slope, degenerate.
type LlRow = (Option<f64>, f64, Option<f64>, bool);

/// `m_hat(x) = sum_t K_h(x_t - x) y_t / sum_t K_h(x_t - x)`.
pub fn nadaraya_watson(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    grid: &EvalGrid,
) -> Result<EstimateSheet> {
    check_h(h)?;
    let sorted = SortedPath::new(&path.x);
    let ranges = window_ranges(&sorted.xs, grid.points(), kernel.support_radius * h);
    let rows: Vec<(Option<f64>, f64)> = grid
        .points()
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(&x0, &(lo, hi))| {
            let mut sk = 0.0;
            let mut sky = 0.0;
            for j in lo as usize..hi as usize {
                let w = kernel.eval_scaled(sorted.xs[j] - x0, h);
                sk += w;
                sky += w * path.y[sorted.time_index[j] as usize];
            }
            if sk > 0.0 {
                (Some(sky / sk), sk)
            } else {
                (None, sk)
            }
        })
        .collect();
    let (m_hat, denom): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let degenerate = m_hat.iter().map(|m| m.is_none()).collect();
    Ok(EstimateSheet {
        grid: grid.clone(),
        slope: vec![None; m_hat.len()],
        m_hat,
        denom,
        degenerate,
    })
}

/// Local-linear estimator: per node the weighted least-squares fit of
/// `y_t` on `(1, x_t - x)`, solved on the bandwidth-scaled design for
/// conditioning. Nodes with fewer than two support points or a condition
/// number above 1e12 are flagged degenerate.
pub fn local_linear(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    grid: &EvalGrid,
) -> Result<EstimateSheet> {
    check_h(h)?;
    let sorted = SortedPath::new(&path.x);
    let ranges = window_ranges(&sorted.xs, grid.points(), kernel.support_radius * h);
    let rows: Vec<LlRow> = grid
        .points()
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(&x0, &(lo, hi))| {
            // Scaled moments s_j = sum w * z^j, t_j = sum w * z^j * y with
            // z = (x_t - x0) / h.
            let mut s = [0.0f64; 3];
            let mut t = [0.0f64; 2];
            let mut support = 0usize;
            for j in lo as usize..hi as usize {
                let z = (sorted.xs[j] - x0) / h;
                let w = kernel.eval(z) / h;
                if w == 0.0 {
                    continue;
                }
                support += 1;
                let y = path.y[sorted.time_index[j] as usize];
                s[0] += w;
                s[1] += w * z;
                s[2] += w * z * z;
                t[0] += w * y;
                t[1] += w * z * y;
            }
            if support < 2 {
                return (None, s[0], None, true);
            }
            let det = s[0] * s[2] - s[1] * s[1];
            // Symmetric 2x2 spectral condition number.
            let half_tr = 0.5 * (s[0] + s[2]);
            let disc = (0.25 * (s[0] - s[2]) * (s[0] - s[2]) + s[1] * s[1]).sqrt();
            let eig_max = half_tr + disc;
            let eig_min = half_tr - disc;
            if !(eig_min > 0.0) || eig_max / eig_min > LL_CONDITION_LIMIT || det <= 0.0 {
                return (None, s[0], None, true);
            }
            // Solve around the local weighted mean of y; the cancellation
            // then happens at the scale of the local variation, not of y.
            let ybar = t[0] / s[0];
            let t1c = t[1] - ybar * s[1];
            let b0 = ybar - t1c * s[1] / det;
            let b1_scaled = t1c * s[0] / det;
            (Some(b0), s[0], Some(b1_scaled / h), false)
        })
        .collect();
    let len = rows.len();
    let mut m_hat = Vec::with_capacity(len);
    let mut denom = Vec::with_capacity(len);
    let mut slope = Vec::with_capacity(len);
    let mut degenerate = Vec::with_capacity(len);
    for (m, d, sl, deg) in rows {
        m_hat.push(m);
        denom.push(d);
        slope.push(sl);
        degenerate.push(deg);
    }
    Ok(EstimateSheet {
        grid: grid.clone(),
        m_hat,
        denom,
        slope,
        degenerate,
    })
}

/// The three components of the NW error at each node:
/// `bias(x) = sum K_h(x_t - x) [m0(x_t) - m0(x)]`,
/// `noise(x) = sum K_h(x_t - x) u_t`, and the denominator
/// `sum K_h(x_t - x)`; `m_hat - m0 = bias/denom + noise/denom` wherever the
/// denominator is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct NwDecomposition {
    pub bias: Vec<f64>,
    pub noise: Vec<f64>,
    pub denom: Vec<f64>,
}

pub fn decompose_nw(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    grid: &EvalGrid,
    m0: &RegressionFunction,
) -> Result<NwDecomposition> {
    check_h(h)?;
    let sorted = SortedPath::new(&path.x);
    let ranges = window_ranges(&sorted.xs, grid.points(), kernel.support_radius * h);
    let rows: Vec<(f64, f64, f64)> = grid
        .points()
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(&x0, &(lo, hi))| {
            let m0_x0 = m0.eval(x0);
            let mut bias = 0.0;
            let mut noise = 0.0;
            let mut denom = 0.0;
            for j in lo as usize..hi as usize {
                let xt = sorted.xs[j];
                let w = kernel.eval_scaled(xt - x0, h);
                let t = sorted.time_index[j] as usize;
                bias += w * (m0.eval(xt) - m0_x0);
                noise += w * path.u[t];
                denom += w;
            }
            (bias, noise, denom)
        })
        .collect();
    let mut bias = Vec::with_capacity(rows.len());
    let mut noise = Vec::with_capacity(rows.len());
    let mut denom = Vec::with_capacity(rows.len());
    for (b, v, d) in rows {
        bias.push(b);
        noise.push(v);
        denom.push(d);
    }
    Ok(NwDecomposition { bias, noise, denom })
}

/// `max |m_hat(x) - m0(x)|` over the defined grid nodes inside the domain.
/// An undefined node inside the domain is an error: the domain is supposed
/// to guarantee signal mass, so an undefined estimate there signals a
/// domain/bandwidth inconsistency. An empty evaluation set is an error.
pub fn sup_error(sheet: &EstimateSheet, m0: &RegressionFunction, domain: &DomainSet) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for (i, &x0) in sheet.grid.points().iter().enumerate() {
        if !domain.contains(x0) {
            continue;
        }
        match sheet.m_hat[i] {
            Some(m) => {
                let err = (m - m0.eval(x0)).abs();
                worst = Some(worst.map_or(err, |w: f64| w.max(err)));
            }
            None => return Err(Error::UndefinedNodeInDomain(x0)),
        }
    }
    worst.ok_or(Error::EmptyEvaluationSet)
}

/// Suprema of |m0'| and |m0''| over the domain, scanned on a sub-grid ten
/// times finer than the evaluation grid.
pub fn derivative_bounds(
    m0: &RegressionFunction,
    domain: &DomainSet,
    grid: &EvalGrid,
) -> Result<(f64, f64)> {
    if domain.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    let step = grid.mesh() / 10.0;
    let mut sup_d1: f64 = 0.0;
    let mut sup_d2: f64 = 0.0;
    for &(l, r) in domain.intervals() {
        let count = ((r - l) / step).ceil() as usize + 1;
        for i in 0..count {
            let x = (l + i as f64 * step).min(r);
            sup_d1 = sup_d1.max(m0.d1(x).abs());
            sup_d2 = sup_d2.max(m0.d2(x).abs());
        }
    }
    Ok((sup_d1, sup_d2))
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::config(format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::DgpConfig;
    use crate::innovations::{InnovationConfig, StableLaw, StreamId};
    use crate::norming::RegressorCoeffSpec;

    fn noiseless_path(m0: RegressionFunction, n: usize, seed: u64) -> SamplePath {
        let cfg = DgpConfig::new(
            InnovationConfig::exogenous(StableLaw::standard_normal()),
            RegressorCoeffSpec::unit_root(2.0).unwrap(),
            vec![0.0],
            m0,
        );
        crate::dgp::simulate_path(&cfg, n, StreamId::new(seed, 0)).unwrap()
    }

    #[test]
    fn nw_reproduces_constants() {
        let m0 = RegressionFunction::Constant(3.5);
        let path = noiseless_path(m0.clone(), 512, 1);
        let k = Kernel::epanechnikov();
        let grid = EvalGrid::default_policy(&path, &k, 0.5).unwrap();
        let sheet = nadaraya_watson(&path, &k, 0.5, &grid).unwrap();
        for m in sheet.m_hat.iter().flatten() {
            assert!((m - 3.5).abs() <= 1e-12);
        }
        assert!(sheet.defined_count() > 0);
    }

    #[test]
    fn nw_single_observation() {
        let mut path = noiseless_path(RegressionFunction::Zero, 1, 2);
        path.x = vec![0.0];
        path.y = vec![2.0];
        let k = Kernel::epanechnikov();
        let grid = EvalGrid::uniform(-1.0, 1.0, 0.5).unwrap();
        let sheet = nadaraya_watson(&path, &k, 0.6, &grid).unwrap();
        for (i, &x0) in grid.points().iter().enumerate() {
            if x0.abs() < 0.6 {
                assert_eq!(sheet.m_hat[i], Some(2.0));
            } else {
                assert_eq!(sheet.m_hat[i], None);
            }
        }
    }

    #[test]
    fn nw_respects_data_range() {
        // Nonnegative kernel weights: the estimate is a convex combination
        // of contributing y values.
        let cfg = DgpConfig::new(
            InnovationConfig::exogenous(StableLaw::standard_normal()),
            RegressorCoeffSpec::unit_root(2.0).unwrap(),
            vec![1.0],
            RegressionFunction::Sin,
        );
        let path = crate::dgp::simulate_path(&cfg, 512, StreamId::new(5, 0)).unwrap();
        let k = Kernel::triangular();
        let grid = EvalGrid::default_policy(&path, &k, 0.4).unwrap();
        let sheet = nadaraya_watson(&path, &k, 0.4, &grid).unwrap();
        let y_min = path.y.iter().cloned().fold(f64::INFINITY, f64::min);
        let y_max = path.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for m in sheet.m_hat.iter().flatten() {
            assert!(*m >= y_min - 1e-12 && *m <= y_max + 1e-12);
        }
    }

    #[test]
    fn ll_reproduces_affine_functions() {
        // Weighted least squares reproduces affine functions exactly. The
        // 1e-10 check runs on the nodes carrying signal mass; isolated edge
        // nodes can sit near the condition limit, where the delta-z^2
        // cancellation caps f64 accuracy well short of 1e-10, so those only
        // face a coarser envelope.
        let m0 = RegressionFunction::Linear { a: -1.5, b: 2.0 };
        let path = noiseless_path(m0.clone(), 512, 3);
        let k = Kernel::biweight();
        let grid = EvalGrid::default_policy(&path, &k, 0.5).unwrap();
        let sheet = local_linear(&path, &k, 0.5, &grid).unwrap();
        let signal = crate::signal::signal_process(&path, &k, 0.5, &grid).unwrap();
        let eps = 0.05;
        let mut checked = 0;
        for (i, &x0) in grid.points().iter().enumerate() {
            if let Some(m) = sheet.m_hat[i] {
                let err = (m - m0.eval(x0)).abs();
                if signal[i] >= eps {
                    assert!(err <= 1e-10, "node {x0}: {m} vs {}", m0.eval(x0));
                    let sl = sheet.slope[i].unwrap();
                    assert!((sl + 1.5).abs() <= 1e-8, "slope {sl}");
                    checked += 1;
                } else {
                    assert!(err <= 1e-6, "edge node {x0}: err {err}");
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn ll_flags_single_support_point() {
        let mut path = noiseless_path(RegressionFunction::Zero, 1, 4);
        path.x = vec![0.0];
        path.y = vec![1.0];
        let k = Kernel::epanechnikov();
        let grid = EvalGrid::uniform(-0.2, 0.2, 0.2).unwrap();
        let sheet = local_linear(&path, &k, 0.5, &grid).unwrap();
        assert!(sheet.degenerate.iter().all(|&d| d));
        assert!(sheet.m_hat.iter().all(|m| m.is_none()));
    }

    #[test]
    fn decomposition_identity() {
        let theta = crate::norming::build_theta(&crate::norming::ThetaKind::Geometric { r: 0.5 }, 64)
            .unwrap();
        let m0 = RegressionFunction::Sin;
        let cfg = DgpConfig::new(
            InnovationConfig::exogenous(StableLaw::standard_normal()),
            RegressorCoeffSpec::unit_root(2.0).unwrap(),
            theta.coeffs,
            m0.clone(),
        );
        let path = crate::dgp::simulate_path(&cfg, 1024, StreamId::new(6, 0)).unwrap();
        let k = Kernel::epanechnikov();
        let h = 0.45;
        let grid = EvalGrid::default_policy(&path, &k, h).unwrap();
        let sheet = nadaraya_watson(&path, &k, h, &grid).unwrap();
        let dec = decompose_nw(&path, &k, h, &grid, &m0).unwrap();
        let mut checked = 0;
        for (i, &x0) in grid.points().iter().enumerate() {
            if let Some(m) = sheet.m_hat[i] {
                let lhs = m - m0.eval(x0);
                let rhs = dec.bias[i] / dec.denom[i] + dec.noise[i] / dec.denom[i];
                assert!((lhs - rhs).abs() <= 1e-10, "node {i}: {lhs} vs {rhs}");
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn decomposition_trivial_cases() {
        // Zero disturbance kills the noise term; constant m0 kills the bias.
        let m0 = RegressionFunction::Constant(2.0);
        let path = noiseless_path(m0.clone(), 256, 7);
        let k = Kernel::epanechnikov();
        let grid = EvalGrid::default_policy(&path, &k, 0.5).unwrap();
        let dec = decompose_nw(&path, &k, 0.5, &grid, &m0).unwrap();
        assert!(dec.noise.iter().all(|&v| v == 0.0));
        assert!(dec.bias.iter().all(|&b| b.abs() <= 1e-12));
    }

    #[test]
    fn sup_error_contract() {
        let m0 = RegressionFunction::Constant(1.0);
        let path = noiseless_path(m0.clone(), 256, 8);
        let k = Kernel::epanechnikov();
        let grid = EvalGrid::default_policy(&path, &k, 0.5).unwrap();
        let sheet = nadaraya_watson(&path, &k, 0.5, &grid).unwrap();

        let sig = crate::signal::signal_process(&path, &k, 0.5, &grid).unwrap();
        let dom = crate::domain::threshold_domain(&sig, &grid, 0.05).unwrap();
        let sup = sup_error(&sheet, &m0, &dom).unwrap();
        assert!(sup <= 1e-12, "sup = {sup}");

        match sup_error(&sheet, &m0, &DomainSet::empty()) {
            Err(Error::EmptyEvaluationSet) => {}
            other => panic!("expected empty evaluation set error, got {other:?}"),
        }

        // A domain reaching beyond the signal support hits undefined nodes.
        let wide = DomainSet::interval(grid.lo() - 1.0, grid.hi() + 1.0).unwrap();
        match sup_error(&sheet, &m0, &wide) {
            Err(Error::UndefinedNodeInDomain(_)) => {}
            other => panic!("expected undefined-node error, got {other:?}"),
        }
    }

    #[test]
    fn denominator_bounded_below_on_threshold_domain() {
        // On the domain where the signal is at least eps, the estimator
        // denominator satisfies denom / e_n >= eps by construction; this
        // guards the shared-grid invariant against grid or snapping bugs.
        let cfg = DgpConfig::new(
            InnovationConfig::exogenous(StableLaw::standard_normal()),
            RegressorCoeffSpec::unit_root(2.0).unwrap(),
            vec![1.0],
            RegressionFunction::Sin,
        );
        let path = crate::dgp::simulate_path(&cfg, 2048, StreamId::new(9, 0)).unwrap();
        let k = Kernel::epanechnikov();
        let h = 0.5;
        let grid = EvalGrid::default_policy(&path, &k, h).unwrap();
        let signal = crate::signal::signal_process(&path, &k, h, &grid).unwrap();
        let eps = 0.05;
        let domain = crate::domain::threshold_domain(&signal, &grid, eps).unwrap();
        let sheet = nadaraya_watson(&path, &k, h, &grid).unwrap();
        let e_n = path.e_n();
        let mut inside = 0;
        for (i, &x0) in grid.points().iter().enumerate() {
            if domain.contains(x0) {
                assert!(
                    sheet.denom[i] / e_n >= eps * (1.0 - 1e-9),
                    "node {x0}: denom/e_n = {}",
                    sheet.denom[i] / e_n
                );
                inside += 1;
            }
        }
        assert!(inside > 100);
    }

    #[test]
    fn derivative_bounds_examples() {
        let grid = EvalGrid::uniform(-4.0, 4.0, 0.01).unwrap();
        let lin = RegressionFunction::Linear { a: -3.0, b: 0.5 };
        let d = DomainSet::interval(-2.0, 2.0).unwrap();
        assert_eq!(derivative_bounds(&lin, &d, &grid).unwrap(), (3.0, 0.0));

        let pi = std::f64::consts::PI;
        let dsin = DomainSet::interval(-pi, pi).unwrap();
        let (d1, d2) = derivative_bounds(&RegressionFunction::Sin, &dsin, &grid).unwrap();
        assert!((d1 - 1.0).abs() <= 1e-3 && (d2 - 1.0).abs() <= 1e-3);

        let c = RegressionFunction::Constant(9.0);
        assert_eq!(derivative_bounds(&c, &d, &grid).unwrap(), (0.0, 0.0));
    }
}
