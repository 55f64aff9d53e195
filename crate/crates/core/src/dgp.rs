//! Sample-path simulation of the model `y_t = m0(x_t) + u_t`, where the
//! regressor is the partial sum of a (truncated) linear process in the stable
//! innovations and the disturbance is a linear process in `eta`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{draw_innovation_pair, InnovationConfig, StreamId};
use crate::m0::RegressionFunction;
use crate::norming::{norming_at, NormingSnapshot, RegressorCoeffSpec};

/// Full specification of the data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub innov: InnovationConfig,
    pub coeff: RegressorCoeffSpec,
    /// Disturbance coefficients `theta_0..`; build via
    /// [`crate::norming::build_theta`].
    pub theta: Vec<f64>,
    pub m0: RegressionFunction,
    /// Pre-sample length; defaults to `max(max_lag, theta.len())`.
    pub burn_in: Option<usize>,
    /// Accept a theta list that fails the weighted-summability certificate.
    #[serde(default)]
    pub waive_theta_check: bool,
}

impl DgpConfig {
    pub fn new(
        innov: InnovationConfig,
        coeff: RegressorCoeffSpec,
        theta: Vec<f64>,
        m0: RegressionFunction,
    ) -> Self {
        DgpConfig {
            innov,
            coeff,
            theta,
            m0,
            burn_in: None,
            waive_theta_check: false,
        }
    }

    /// Norming constant for the innovation partial sums implied by the
    /// stable law's scale.
    pub fn rho_scale(&self) -> f64 {
        self.innov.stable.scale.powf(1.0 / self.innov.stable.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        self.coeff.validate()?;
        if self.innov.stable.alpha != self.coeff.alpha {
            return Err(Error::config(format!(
                "innovation alpha {} disagrees with coefficient alpha {}",
                self.innov.stable.alpha, self.coeff.alpha
            )));
        }
        if self.theta.is_empty() {
            return Err(Error::config("theta list is empty".to_string()));
        }
        if !self.waive_theta_check && !crate::norming::theta_list_admissible(&self.theta) {
            return Err(Error::config(
                "theta fails the weighted-summability certificate; set waive_theta_check to proceed"
                    .to_string(),
            ));
        }
        Ok(())
    }
}

/// One realisation of the model, with the norming constants at `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub n: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub norming: NormingSnapshot,
}

impl SamplePath {
    pub fn d_n(&self) -> f64 {
        self.norming.d_n
    }

    pub fn e_n(&self) -> f64 {
        self.norming.e_n
    }

    pub fn x_min(&self) -> f64 {
        self.x.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn x_max(&self) -> f64 {
        self.x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Simulates a path of length `n` from the given stream.
///
/// Innovation pairs are drawn in time order for `t = -(B + M)..=n`, so the
/// regressor's first observation already carries `M` lags of pre-sample
/// innovations and the disturbance its full coefficient window.
pub fn simulate_path(cfg: &DgpConfig, n: usize, stream: StreamId) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::config("path length must be at least 1".to_string()));
    }
    cfg.validate()?;
    let phi = crate::norming::build_phi(&cfg.coeff)?;
    let m = phi.len() - 1;
    let burn = cfg.burn_in.unwrap_or_else(|| m.max(cfg.theta.len()));
    if burn < m || burn < cfg.theta.len() {
        return Err(Error::config(format!(
            "insufficient burn-in: {burn} < max(max_lag {m}, theta length {})",
            cfg.theta.len()
        )));
    }

    let total = n + burn + m + 1; // indices t = -(burn+m)..=n
    let mut eps = Vec::with_capacity(total);
    let mut eta = Vec::with_capacity(total);
    let mut rng = stream.rng();
    for _ in 0..total {
        let (e, h) = draw_innovation_pair(&cfg.innov, &mut rng);
        eps.push(e);
        eta.push(h);
    }

    // v_t and u_t for t = 1..=n; series index of time t is t + burn + m.
    let offset = burn + m + 1;
    let v = lagged_ma(&phi, &eps, offset, n);
    let u = lagged_ma(&cfg.theta, &eta, offset, n);

    let mut x = Vec::with_capacity(n);
    let mut acc = 0.0;
    for vt in &v {
        acc += vt;
        x.push(acc);
    }
    let y: Vec<f64> = x
        .iter()
        .zip(&u)
        .map(|(xt, ut)| cfg.m0.eval(*xt) + ut)
        .collect();

    let norming = norming_at(&cfg.coeff, cfg.rho_scale(), n)?;
    Ok(SamplePath { n, x, u, y, norming })
}

/// `out[i] = sum_k coeffs[k] * series[first + i - k]` for `i = 0..n_out`.
/// Switches to FFT convolution when the direct product is large; both paths
/// are deterministic for fixed inputs.
fn lagged_ma(coeffs: &[f64], series: &[f64], first: usize, n_out: usize) -> Vec<f64> {
    assert!(first >= coeffs.len());
    assert!(first + n_out <= series.len() + 1);
    let work = n_out as u64 * coeffs.len() as u64;
    if work <= (1 << 22) {
        let mut out = Vec::with_capacity(n_out);
        for i in 0..n_out {
            let base = first + i - 1;
            let mut acc = 0.0;
            for (k, c) in coeffs.iter().enumerate() {
                acc += c * series[base - k];
            }
            out.push(acc);
        }
        out
    } else {
        let conv = fft_convolve(coeffs, series);
        (0..n_out).map(|i| conv[first + i - 1]).collect()
    }
}

/// Full linear convolution via FFT.
fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);

    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}
