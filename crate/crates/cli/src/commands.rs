//! Subcommand implementations. Every command writes a manifest recording the
//! config hash, seed, and library version; outputs are deterministic given
//! (config, seed) and invariant to the worker thread count.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use cointreg::domain::{coverage_fraction, domain_r, threshold_domain};
use cointreg::experiments::{
    aggregate, fit_loglog, fit_order_loglog, predicted_exponent, run_order_experiment,
    run_rate_experiment, Aggregate, ResponseColumn,
};
use cointreg::io as csv_io;
use cointreg::norming::phi_tail_l1;
use cointreg::signal::signal_process;
use cointreg::{
    select_bandwidth, simulate_path, Error, EstimatorKind, EvalGrid, Result, StreamId,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub struct CommandContext {
    pub config: RunConfig,
    pub config_sha256: String,
    pub out_dir: std::path::PathBuf,
}

impl CommandContext {
    pub fn load(config_path: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(config_path).map_err(|e| {
            Error::config(format!("cannot read config {}: {e}", config_path.display()))
        })?;
        let mut config = RunConfig::from_json(&text)?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let config_sha256 = format!("{:x}", hasher.finalize());
        fs::create_dir_all(out_dir)
            .map_err(|e| Error::numeric(format!("cannot create output dir: {e}")))?;
        Ok(CommandContext {
            config,
            config_sha256,
            out_dir: out_dir.to_path_buf(),
        })
    }

    fn write_manifest(&self, command: &str) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            config_sha256: &'a str,
            seed: u64,
            version: &'a str,
        }
        self.write_json(
            "manifest.json",
            &Manifest {
                command,
                config_sha256: &self.config_sha256,
                seed: self.config.seed,
                version: env!("CARGO_PKG_VERSION"),
            },
        )
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.out_dir.join(name);
        let file = File::create(&path)
            .map_err(|e| Error::numeric(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(|e| Error::numeric(format!("cannot write {}: {e}", path.display())))?;
        w.write_all(b"\n")
            .map_err(|e| Error::numeric(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    fn write_csv(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.out_dir.join(name);
        let file = File::create(&path)
            .map_err(|e| Error::numeric(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| Error::numeric(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

pub fn cmd_simulate(ctx: &CommandContext) -> Result<()> {
    let n = ctx.config.required_n()?;
    let dgp = ctx.config.dgp_config()?;
    let path = simulate_path(&dgp, n, StreamId::new(ctx.config.seed, 0))?;
    ctx.write_csv("path.csv", |w| csv_io::write_path_csv(w, &path))?;

    #[derive(Serialize)]
    struct Metadata {
        n: usize,
        c_n: f64,
        d_n: f64,
        e_n: f64,
        rho_scale: f64,
        /// Absolute coefficient mass beyond the truncation lag; absent when
        /// the untruncated family is not absolutely summable (long memory).
        phi_truncation_tail_l1: Option<f64>,
        phi_absolutely_summable: bool,
        theta_len: usize,
        theta_admissible: bool,
        m0: String,
    }
    let tail = phi_tail_l1(&dgp.coeff);
    ctx.write_json(
        "metadata.json",
        &Metadata {
            n,
            c_n: path.norming.c_n,
            d_n: path.norming.d_n,
            e_n: path.norming.e_n,
            rho_scale: path.norming.rho_scale,
            phi_truncation_tail_l1: tail.is_finite().then_some(tail),
            phi_absolutely_summable: tail.is_finite(),
            theta_len: dgp.theta.len(),
            theta_admissible: cointreg::norming::theta_list_admissible(&dgp.theta),
            m0: dgp.m0.id(),
        },
    )?;
    ctx.write_manifest("simulate")
}

#[derive(Serialize)]
struct EstimationSummary {
    n: usize,
    h: f64,
    h_clipped: bool,
    eps: f64,
    e_n: f64,
    d_n: f64,
    estimator: &'static str,
    defined_nodes: usize,
    degenerate_nodes: usize,
    grid_nodes: usize,
    coverage_outside_a: f64,
    coverage_outside_r: f64,
    measure_a: f64,
    measure_r: f64,
}

fn estimation_pass(ctx: &CommandContext, write_sheet: bool) -> Result<()> {
    let n = ctx.config.required_n()?;
    let dgp = ctx.config.dgp_config()?;
    let kernel = ctx.config.kernel()?;
    let rule = ctx.config.bandwidth_rule()?;
    let eps = ctx.config.eps();
    let estimator = ctx.config.estimator.unwrap_or(EstimatorKind::Nw);

    let path = simulate_path(&dgp, n, StreamId::new(ctx.config.seed, 0))?;
    let sel = select_bandwidth(&rule, &path)?;
    let grid = EvalGrid::default_policy(&path, &kernel, sel.h)?;
    let signal = signal_process(&path, &kernel, sel.h, &grid)?;
    let dom_a = threshold_domain(&signal, &grid, eps)?;
    let dom_r = domain_r(&path, eps)?;

    ctx.write_csv("signal.csv", |w| {
        csv_io::write_signal_csv(w, &grid, &signal, path.d_n())
    })?;
    ctx.write_csv("domain_a.csv", |w| csv_io::write_domain_csv(w, &dom_a))?;
    ctx.write_csv("domain_r.csv", |w| csv_io::write_domain_csv(w, &dom_r))?;

    let (defined, degenerate) = if write_sheet {
        let sheet = match estimator {
            EstimatorKind::Nw => cointreg::nadaraya_watson(&path, &kernel, sel.h, &grid)?,
            EstimatorKind::Ll => cointreg::local_linear(&path, &kernel, sel.h, &grid)?,
        };
        ctx.write_csv("estimate.csv", |w| csv_io::write_sheet_csv(w, &sheet))?;
        (sheet.defined_count(), sheet.degenerate_count())
    } else {
        (0, 0)
    };

    ctx.write_json(
        "summary.json",
        &EstimationSummary {
            n,
            h: sel.h,
            h_clipped: sel.clipped,
            eps,
            e_n: path.e_n(),
            d_n: path.d_n(),
            estimator: match estimator {
                EstimatorKind::Nw => "nw",
                EstimatorKind::Ll => "ll",
            },
            defined_nodes: defined,
            degenerate_nodes: degenerate,
            grid_nodes: grid.len(),
            coverage_outside_a: coverage_fraction(&path, &dom_a),
            coverage_outside_r: coverage_fraction(&path, &dom_r),
            measure_a: dom_a.measure(),
            measure_r: dom_r.measure(),
        },
    )?;
    ctx.write_manifest(if write_sheet { "estimate" } else { "domains" })
}

pub fn cmd_estimate(ctx: &CommandContext) -> Result<()> {
    estimation_pass(ctx, true)
}

pub fn cmd_domains(ctx: &CommandContext) -> Result<()> {
    estimation_pass(ctx, false)
}

#[derive(Serialize)]
struct RatesSummary {
    slope: f64,
    stderr: f64,
    intercept: f64,
    predicted_exponent: Option<f64>,
    expected_slope_range: Option<(f64, f64)>,
    pass: Option<bool>,
    eps: f64,
    aggregates: Vec<Aggregate>,
}

pub fn cmd_rates(ctx: &CommandContext) -> Result<()> {
    let cfg = ctx.config.rate_experiment()?;
    let table = run_rate_experiment(&cfg)?;
    ctx.write_csv("rates.csv", |w| csv_io::write_rate_csv(w, &table))?;

    let fit = fit_loglog(&table, ResponseColumn::SupErr)?;
    let predicted = predicted_exponent(&cfg).ok().map(|p| p.exponent);
    let range = ctx
        .config
        .experiment
        .as_ref()
        .and_then(|e| e.expected_slope_range);
    let pass = range.map(|(lo, hi)| fit.slope >= lo && fit.slope <= hi);
    let aggregates: Vec<Aggregate> = aggregate(&table, ResponseColumn::SupErr)
        .into_iter()
        .filter(|a| a.count > 0)
        .collect();
    ctx.write_json(
        "summary.json",
        &RatesSummary {
            slope: fit.slope,
            stderr: fit.stderr,
            intercept: fit.intercept,
            predicted_exponent: predicted,
            expected_slope_range: range,
            pass,
            eps: cfg.eps,
            aggregates,
        },
    )?;
    ctx.write_manifest("rates")
}

#[derive(Serialize)]
struct OrderSummary {
    covariance_slope: f64,
    covariance_stderr: f64,
    zero_energy_slope: f64,
    zero_energy_stderr: f64,
}

pub fn cmd_orderest(ctx: &CommandContext) -> Result<()> {
    let cfg = ctx.config.order_experiment()?;
    let table = run_order_experiment(&cfg)?;
    ctx.write_csv("order.csv", |w| csv_io::write_order_csv(w, &table))?;
    let cov = fit_order_loglog(&table, false)?;
    let zero = fit_order_loglog(&table, true)?;
    ctx.write_json(
        "summary.json",
        &OrderSummary {
            covariance_slope: cov.slope,
            covariance_stderr: cov.stderr,
            zero_energy_slope: zero.slope,
            zero_energy_stderr: zero.stderr,
        },
    )?;
    ctx.write_manifest("orderest")
}
