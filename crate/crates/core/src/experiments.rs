//! Monte Carlo harness: rate experiments over a grid of sample sizes,
//! order-statistic experiments, and log-log regression of the results.
//!
//! Replications run in parallel; every task derives its random stream purely
//! from `(base_seed, n_index, rep)`, so the output is identical for any
//! scheduling or thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{simulate_path, DgpConfig};
use crate::domain::{coverage_fraction, domain_r, threshold_domain};
use crate::empirical::{covariance_sup, zero_energy_sup, ZeroMeanFn};
use crate::error::{Error, Result};
use crate::estimators::{local_linear, nadaraya_watson, sup_error, EstimatorKind};
use crate::grid::EvalGrid;
use crate::innovations::StreamId;
use crate::kernels::{select_bandwidth, BandwidthKind, BandwidthRule, Kernel};
use crate::signal::signal_process;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// Signal-threshold domain.
    A,
    /// Trimmed-range interval.
    R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateExperimentConfig {
    pub dgp: DgpConfig,
    pub estimator: EstimatorKind,
    pub kernel: Kernel,
    pub bandwidth: BandwidthRule,
    pub eps: f64,
    pub domain_kind: DomainKind,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub base_seed: u64,
}

pub const DEFAULT_EPS: f64 = 0.05;

impl RateExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        self.bandwidth.validate()?;
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "n_grid must be nonempty and strictly increasing".to_string(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::config("reps must be at least 1".to_string()));
        }
        if self.reps as u64 > u32::MAX as u64 {
            return Err(Error::config("reps must fit a stream index".to_string()));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::config(format!("eps must be nonnegative, got {}", self.eps)));
        }
        Ok(())
    }

    /// Stream for replication `rep` at position `n_index` of the grid.
    pub fn stream(&self, n_index: usize, rep: usize) -> StreamId {
        StreamId::new(self.base_seed, (n_index as u64) << 32 | rep as u64)
    }
}

/// One replication of a rate experiment. `sup_err` is absent when the row
/// errored; the error text is recorded instead of aborting the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub rep: usize,
    pub h: f64,
    pub sup_err: Option<f64>,
    pub coverage: f64,
    pub domain_measure: f64,
    pub degenerate_count: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

pub fn run_rate_experiment(cfg: &RateExperimentConfig) -> Result<RateTable> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..cfg.reps).map(move |rep| (i, rep)))
        .collect();
    let rows: Vec<RateRow> = tasks
        .par_iter()
        .map(|&(n_index, rep)| rate_row(cfg, n_index, rep))
        .collect();
    Ok(RateTable { rows })
}

fn rate_row(cfg: &RateExperimentConfig, n_index: usize, rep: usize) -> RateRow {
    let n = cfg.n_grid[n_index];
    match try_rate_row(cfg, n, cfg.stream(n_index, rep)) {
        Ok((h, sup, coverage, measure, degenerate)) => RateRow {
            n,
            rep,
            h,
            sup_err: Some(sup),
            coverage,
            domain_measure: measure,
            degenerate_count: degenerate,
            error: None,
        },
        Err(e) => RateRow {
            n,
            rep,
            h: f64::NAN,
            sup_err: None,
            coverage: f64::NAN,
            domain_measure: f64::NAN,
            degenerate_count: 0,
            error: Some(e.to_string()),
        },
    }
}

fn try_rate_row(
    cfg: &RateExperimentConfig,
    n: usize,
    stream: StreamId,
) -> Result<(f64, f64, f64, f64, usize)> {
    let path = simulate_path(&cfg.dgp, n, stream)?;
    let sel = select_bandwidth(&cfg.bandwidth, &path)?;
    let grid = EvalGrid::default_policy(&path, &cfg.kernel, sel.h)?;
    let domain = match cfg.domain_kind {
        DomainKind::A => {
            let signal = signal_process(&path, &cfg.kernel, sel.h, &grid)?;
            threshold_domain(&signal, &grid, cfg.eps)?
        }
        DomainKind::R => domain_r(&path, cfg.eps)?,
    };
    let sheet = match cfg.estimator {
        EstimatorKind::Nw => nadaraya_watson(&path, &cfg.kernel, sel.h, &grid)?,
        EstimatorKind::Ll => local_linear(&path, &cfg.kernel, sel.h, &grid)?,
    };
    let sup = sup_error(&sheet, &cfg.dgp.m0, &domain)?;
    let coverage = coverage_fraction(&path, &domain);
    Ok((
        sel.h,
        sup,
        coverage,
        domain.measure(),
        sheet.degenerate_count(),
    ))
}

/// Column selector for table aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseColumn {
    SupErr,
    Coverage,
    DomainMeasure,
}

impl ResponseColumn {
    fn extract(&self, row: &RateRow) -> Option<f64> {
        if row.error.is_some() {
            return None;
        }
        match self {
            ResponseColumn::SupErr => row.sup_err,
            ResponseColumn::Coverage => Some(row.coverage),
            ResponseColumn::DomainMeasure => Some(row.domain_measure),
        }
    }
}

/// Per-n aggregate of a response column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub count: usize,
    pub errors: usize,
}

pub fn aggregate(table: &RateTable, response: ResponseColumn) -> Vec<Aggregate> {
    let mut ns: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let mut values: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.n == n)
                .filter_map(|r| response.extract(r))
                .collect();
            let errors = table
                .rows
                .iter()
                .filter(|r| r.n == n && r.error.is_some())
                .count();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let count = values.len();
            let mean = if count > 0 {
                values.iter().sum::<f64>() / count as f64
            } else {
                f64::NAN
            };
            let median = if count == 0 {
                f64::NAN
            } else if count % 2 == 1 {
                values[count / 2]
            } else {
                0.5 * (values[count / 2 - 1] + values[count / 2])
            };
            Aggregate {
                n,
                mean,
                median,
                count,
                errors,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// OLS of `log(mean response per n)` on `log n`.
pub fn fit_loglog(table: &RateTable, response: ResponseColumn) -> Result<LogLogFit> {
    let agg = aggregate(table, response);
    let usable: Vec<&Aggregate> = agg.iter().filter(|a| a.count > 0).collect();
    if usable.len() < 3 {
        return Err(Error::config(format!(
            "log-log fit needs at least 3 sample sizes with data, got {}",
            usable.len()
        )));
    }
    let mut xs = Vec::with_capacity(usable.len());
    let mut ys = Vec::with_capacity(usable.len());
    for a in usable {
        if !(a.mean > 0.0) {
            return Err(Error::numeric(format!(
                "nonpositive mean response {} at n = {}",
                a.mean, a.n
            )));
        }
        xs.push((a.n as f64).ln());
        ys.push(a.mean.ln());
    }
    fit_line(&xs, &ys)
}

/// OLS line fit with the usual slope standard error.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    let m = xs.len();
    if m < 3 || ys.len() != m {
        return Err(Error::config(
            "line fit needs at least 3 matched points".to_string(),
        ));
    }
    let xbar = xs.iter().sum::<f64>() / m as f64;
    let ybar = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::numeric("degenerate abscissae in line fit".to_string()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = (rss / (m as f64 - 2.0) / sxx).sqrt();
    Ok(LogLogFit {
        slope,
        intercept,
        stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponent {
    pub exponent: f64,
    /// Reminder that logarithmic factors drag measured slopes upward
    /// (toward zero) relative to the power-law exponent.
    pub log_factor_note: &'static str,
}

/// Closed-form rate exponent in `n` for fixed and power bandwidth rules.
///
/// With memory index `H`, `e_n` is regularly varying with index `1 - H`;
/// the noise term carries `(e_n h)^(-1/2)` and the squared-bandwidth bias
/// `h^2`, so a rule `h ~ e_n^(-kappa)` yields exponent
/// `-(1 - H) * min(2 kappa, (1 - kappa)/2)`; `kappa = 1/5` balances the two.
pub fn predicted_exponent(cfg: &RateExperimentConfig) -> Result<PredictedExponent> {
    let hurst = cfg.dgp.coeff.memory_index();
    let exponent = match cfg.bandwidth.kind {
        // Fixed bandwidth: the noise term sets the decay; the bias term is
        // n-free and ignored by the prediction.
        BandwidthKind::Fixed { .. } => -(1.0 - hurst) / 2.0,
        BandwidthKind::Power { kappa, .. } => {
            -(1.0 - hurst) * (2.0 * kappa).min((1.0 - kappa) / 2.0)
        }
        BandwidthKind::Plugin { .. } => {
            return Err(Error::config(
                "no closed-form exponent for the plugin bandwidth rule".to_string(),
            ))
        }
    };
    Ok(PredictedExponent {
        exponent,
        log_factor_note: "log factors bias measured slopes upward",
    })
}

/// Order-statistic experiment: covariance and zero-energy suprema across a
/// grid of sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderExperimentConfig {
    pub dgp: DgpConfig,
    pub kernel: Kernel,
    pub bandwidth: BandwidthRule,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub n: usize,
    pub rep: usize,
    pub h: f64,
    pub covariance_sup: f64,
    pub zero_energy_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OrderTable {
    pub rows: Vec<OrderRow>,
}

pub fn run_order_experiment(cfg: &OrderExperimentConfig) -> Result<OrderTable> {
    cfg.dgp.validate()?;
    cfg.bandwidth.validate()?;
    if cfg.n_grid.is_empty() || cfg.n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "n_grid must be nonempty and strictly increasing".to_string(),
        ));
    }
    if cfg.reps == 0 {
        return Err(Error::config("reps must be at least 1".to_string()));
    }
    let g = ZeroMeanFn::kernel_first_moment(cfg.kernel)?;
    let tasks: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..cfg.reps).map(move |rep| (i, rep)))
        .collect();
    let rows: Vec<Result<OrderRow>> = tasks
        .par_iter()
        .map(|&(n_index, rep)| {
            let n = cfg.n_grid[n_index];
            let stream = StreamId::new(cfg.base_seed, (n_index as u64) << 32 | rep as u64);
            let path = simulate_path(&cfg.dgp, n, stream)?;
            let sel = select_bandwidth(&cfg.bandwidth, &path)?;
            let grid = EvalGrid::default_policy(&path, &cfg.kernel, sel.h)?;
            let cov = covariance_sup(&path, &cfg.kernel, sel.h, &grid)?;
            let zero = zero_energy_sup(&path, &g, sel.h, &grid)?;
            Ok(OrderRow {
                n,
                rep,
                h: sel.h,
                covariance_sup: cov.value,
                zero_energy_sup: zero.value,
            })
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.push(r?);
    }
    Ok(OrderTable { rows: out })
}

/// Per-n means of an order table column and the log-log slope over them.
pub fn fit_order_loglog(table: &OrderTable, zero_energy: bool) -> Result<LogLogFit> {
    let mut ns: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in ns {
        let vals: Vec<f64> = table
            .rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| {
                if zero_energy {
                    r.zero_energy_sup
                } else {
                    r.covariance_sup
                }
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::numeric(format!("nonpositive mean at n = {n}")));
        }
        xs.push((n as f64).ln());
        ys.push(mean.ln());
    }
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::{InnovationConfig, StableLaw};
    use crate::m0::RegressionFunction;
    use crate::norming::RegressorCoeffSpec;

    fn tiny_cfg() -> RateExperimentConfig {
        RateExperimentConfig {
            dgp: DgpConfig::new(
                InnovationConfig::exogenous(StableLaw::standard_normal()),
                RegressorCoeffSpec::unit_root(2.0).unwrap(),
                vec![0.0],
                RegressionFunction::Zero,
            ),
            estimator: EstimatorKind::Nw,
            kernel: Kernel::epanechnikov(),
            bandwidth: BandwidthRule::fixed(0.5),
            eps: 0.05,
            domain_kind: DomainKind::A,
            n_grid: vec![256],
            reps: 1,
            base_seed: 1,
        }
    }

    #[test]
    fn noiseless_zero_function_has_zero_sup() {
        let table = run_rate_experiment(&tiny_cfg()).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = &table.rows[0];
        assert!(row.error.is_none());
        assert_eq!(row.sup_err, Some(0.0));
        assert!(row.coverage <= 0.2);
    }

    #[test]
    fn identical_configs_give_identical_tables() {
        let cfg = {
            let mut c = tiny_cfg();
            c.n_grid = vec![128, 256];
            c.reps = 4;
            c.dgp.theta = vec![1.0, 0.5];
            c.dgp.m0 = RegressionFunction::Sin;
            c
        };
        let a = run_rate_experiment(&cfg).unwrap();
        let b = run_rate_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_independent_of_thread_count() {
        let cfg = {
            let mut c = tiny_cfg();
            c.n_grid = vec![128, 256];
            c.reps = 3;
            c.dgp.theta = vec![1.0];
            c.dgp.m0 = RegressionFunction::Sin;
            c
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_rate_experiment(&cfg).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_rate_experiment(&cfg).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn invalid_grids_rejected() {
        let mut cfg = tiny_cfg();
        cfg.n_grid = vec![256, 128];
        assert!(run_rate_experiment(&cfg).is_err());
        cfg.n_grid = vec![];
        assert!(run_rate_experiment(&cfg).is_err());
        let mut cfg = tiny_cfg();
        cfg.reps = 0;
        assert!(run_rate_experiment(&cfg).is_err());
    }

    #[test]
    fn loglog_recovers_exact_power_law() {
        let mut table = RateTable::default();
        for (i, n) in [1024usize, 2048, 4096, 8192, 16384].iter().enumerate() {
            table.rows.push(RateRow {
                n: *n,
                rep: i,
                h: 0.5,
                sup_err: Some(3.0 * (*n as f64).powf(-0.25)),
                coverage: 0.0,
                domain_measure: 1.0,
                degenerate_count: 0,
                error: None,
            });
        }
        let fit = fit_loglog(&table, ResponseColumn::SupErr).unwrap();
        assert!((fit.slope + 0.25).abs() <= 1e-12, "slope = {}", fit.slope);
        assert!(fit.stderr <= 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn loglog_constant_response_has_zero_slope() {
        let mut table = RateTable::default();
        for n in [256usize, 512, 1024] {
            table.rows.push(RateRow {
                n,
                rep: 0,
                h: 0.5,
                sup_err: Some(2.0),
                coverage: 0.0,
                domain_measure: 1.0,
                degenerate_count: 0,
                error: None,
            });
        }
        let fit = fit_loglog(&table, ResponseColumn::SupErr).unwrap();
        assert!(fit.slope.abs() <= 1e-12);
    }

    #[test]
    fn loglog_log_factor_drag() {
        // Response C * n^(-1/4) * log n over n = 2^10..2^16. The OLS slope,
        // computed here by an independent closed-form oracle, quantifies the
        // upward drag of the log factor (~0.113 at these n).
        let ns: Vec<usize> = (10..=16).map(|k| 1usize << k).collect();
        let mut table = RateTable::default();
        for &n in &ns {
            table.rows.push(RateRow {
                n,
                rep: 0,
                h: 0.5,
                sup_err: Some(2.0 * (n as f64).powf(-0.25) * (n as f64).ln()),
                coverage: 0.0,
                domain_measure: 1.0,
                degenerate_count: 0,
                error: None,
            });
        }
        let fit = fit_loglog(&table, ResponseColumn::SupErr).unwrap();

        // Oracle: slope = -1/4 + cov(ln x, ln ln x) / var(ln x).
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ls: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
        let lbar = ls.iter().sum::<f64>() / ls.len() as f64;
        let cov: f64 = xs.iter().zip(&ls).map(|(x, l)| (x - xbar) * (l - lbar)).sum();
        let var: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        let oracle = -0.25 + cov / var;
        assert!((fit.slope - oracle).abs() <= 1e-12, "{} vs {oracle}", fit.slope);
        assert!(
            oracle > -0.25 + 0.05 && oracle < 0.0,
            "drag should pull the slope well above -1/4: {oracle}"
        );
    }

    #[test]
    fn nonpositive_means_rejected() {
        let mut table = RateTable::default();
        for n in [256usize, 512, 1024] {
            table.rows.push(RateRow {
                n,
                rep: 0,
                h: 0.5,
                sup_err: Some(0.0),
                coverage: 0.0,
                domain_measure: 1.0,
                degenerate_count: 0,
                error: None,
            });
        }
        assert!(matches!(
            fit_loglog(&table, ResponseColumn::SupErr),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn predicted_exponent_cases() {
        let mut cfg = tiny_cfg(); // H = 1/2 via the unit root
        cfg.bandwidth = BandwidthRule::fixed(0.5);
        assert!((predicted_exponent(&cfg).unwrap().exponent + 0.25).abs() < 1e-15);
        cfg.bandwidth = BandwidthRule::balanced(1.0);
        assert!((predicted_exponent(&cfg).unwrap().exponent + 0.2).abs() < 1e-15);
        cfg.dgp.coeff = RegressorCoeffSpec::lm(0.75, 2.0, 100).unwrap();
        cfg.bandwidth = BandwidthRule::fixed(0.5);
        assert!((predicted_exponent(&cfg).unwrap().exponent + 0.125).abs() < 1e-15);
        cfg.bandwidth = BandwidthRule::plugin(1.0);
        assert!(predicted_exponent(&cfg).is_err());
    }

    #[test]
    fn order_experiment_runs_and_is_deterministic() {
        let cfg = OrderExperimentConfig {
            dgp: DgpConfig::new(
                InnovationConfig::exogenous(StableLaw::standard_normal()),
                RegressorCoeffSpec::unit_root(2.0).unwrap(),
                vec![1.0],
                RegressionFunction::Zero,
            ),
            kernel: Kernel::epanechnikov(),
            bandwidth: BandwidthRule::fixed(0.5),
            n_grid: vec![128, 256],
            reps: 2,
            base_seed: 9,
        };
        let a = run_order_experiment(&cfg).unwrap();
        let b = run_order_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
        assert!(a.rows.iter().all(|r| r.covariance_sup >= 0.0));
    }
}
