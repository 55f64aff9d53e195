//! Run configuration: a schema-versioned JSON document. Unknown keys are
//! rejected so a typo cannot silently change an experiment.

use cointreg::experiments::{DomainKind, RateExperimentConfig};
use cointreg::kernels::{BandwidthKind, BandwidthRule, DEFAULT_H_UPPER};
use cointreg::norming::{build_theta, ThetaKind, DEFAULT_MAX_LAG, DEFAULT_THETA_LEN};
use cointreg::{
    DgpConfig, Error, EstimatorKind, InnovationConfig, Kernel, Regime, RegressionFunction,
    RegressorCoeffSpec, Result, StableLaw,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Path length for simulate/estimate/domains.
    #[serde(default)]
    pub n: Option<usize>,
    pub dgp: DgpSection,
    #[serde(default)]
    pub kernel: Option<String>,
    #[serde(default)]
    pub bandwidth: Option<BandwidthSection>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub domain: Option<DomainKind>,
    #[serde(default)]
    pub estimator: Option<EstimatorKind>,
    #[serde(default)]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSection {
    pub innovations: InnovationsSection,
    pub regressor: RegressorSection,
    pub disturbance: DisturbanceSection,
    pub m0: String,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub waive_theta_check: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationsSection {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub endo_rho: f64,
    #[serde(default = "default_eta_q0")]
    pub eta_q0: f64,
}

fn default_scale() -> f64 {
    1.0
}

fn default_eta_q0() -> f64 {
    cointreg::innovations::DEFAULT_ETA_Q0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorSection {
    pub regime: Regime,
    #[serde(default)]
    pub sm_phi: Option<Vec<f64>>,
    #[serde(default)]
    pub hurst: Option<f64>,
    #[serde(default)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    /// One of `geometric`, `polynomial`, `explicit`.
    pub kind: String,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    /// Coefficient count for the generated families; ignored for explicit.
    #[serde(default)]
    pub length: Option<usize>,
}

impl DisturbanceSection {
    fn theta_kind(&self) -> Result<ThetaKind> {
        match self.kind.as_str() {
            "geometric" => Ok(ThetaKind::Geometric {
                r: self
                    .r
                    .ok_or_else(|| Error::config("geometric disturbance requires r".to_string()))?,
            }),
            "polynomial" => Ok(ThetaKind::Polynomial {
                p: self.p.ok_or_else(|| {
                    Error::config("polynomial disturbance requires p".to_string())
                })?,
            }),
            "explicit" => Ok(ThetaKind::Explicit {
                coeffs: self.coeffs.clone().ok_or_else(|| {
                    Error::config("explicit disturbance requires coeffs".to_string())
                })?,
            }),
            other => Err(Error::config(format!("unknown disturbance kind: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthSection {
    /// One of `fixed`, `power`, `plugin`.
    pub kind: String,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub h_upper: Option<f64>,
}

impl BandwidthSection {
    fn bandwidth_kind(&self) -> Result<BandwidthKind> {
        match self.kind.as_str() {
            "fixed" => Ok(BandwidthKind::Fixed {
                h: self
                    .h
                    .ok_or_else(|| Error::config("fixed bandwidth requires h".to_string()))?,
            }),
            "power" => Ok(BandwidthKind::Power {
                c: self.c.unwrap_or(1.0),
                kappa: self
                    .kappa
                    .unwrap_or(cointreg::kernels::BALANCED_KAPPA),
            }),
            "plugin" => Ok(BandwidthKind::Plugin {
                c: self.c.unwrap_or(1.0),
            }),
            other => Err(Error::config(format!("unknown bandwidth kind: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub estimator: EstimatorKind,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    #[serde(default)]
    pub expected_slope_range: Option<(f64, f64)>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("config parse error: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::by_id(self.kernel.as_deref().unwrap_or("epanechnikov"))
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(cointreg::experiments::DEFAULT_EPS)
    }

    pub fn bandwidth_rule(&self) -> Result<BandwidthRule> {
        let kind = match &self.bandwidth {
            Some(b) => b.bandwidth_kind()?,
            None => BandwidthKind::Power {
                c: 1.0,
                kappa: cointreg::kernels::BALANCED_KAPPA,
            },
        };
        let r0 = self
            .bandwidth
            .as_ref()
            .and_then(|b| b.r0)
            .unwrap_or(1.0 / self.dgp.innovations.eta_q0);
        let h_upper = self
            .bandwidth
            .as_ref()
            .and_then(|b| b.h_upper)
            .unwrap_or(DEFAULT_H_UPPER);
        let rule = BandwidthRule { kind, r0, h_upper };
        rule.validate()?;
        Ok(rule)
    }

    pub fn dgp_config(&self) -> Result<DgpConfig> {
        let inn = &self.dgp.innovations;
        let law = StableLaw::new(inn.alpha, inn.beta, inn.scale)?;
        let innov = InnovationConfig::new(law, inn.endo_rho, inn.eta_q0)?;

        let reg = &self.dgp.regressor;
        let max_lag = reg.max_lag.unwrap_or(DEFAULT_MAX_LAG);
        let coeff = match reg.regime {
            Regime::Sm => {
                let phi = reg.sm_phi.clone().ok_or_else(|| {
                    Error::config("sm regressor requires sm_phi".to_string())
                })?;
                RegressorCoeffSpec::sm(phi, inn.alpha)?
            }
            Regime::Lm => {
                let hurst = reg
                    .hurst
                    .ok_or_else(|| Error::config("lm regressor requires hurst".to_string()))?;
                RegressorCoeffSpec::lm(hurst, inn.alpha, max_lag)?
            }
            Regime::Ap => {
                let hurst = reg
                    .hurst
                    .ok_or_else(|| Error::config("ap regressor requires hurst".to_string()))?;
                RegressorCoeffSpec::ap(hurst, inn.alpha, max_lag)?
            }
        };

        let dist = &self.dgp.disturbance;
        let length = dist.length.unwrap_or(DEFAULT_THETA_LEN);
        if length == 0 {
            return Err(Error::config("disturbance length must be positive".to_string()));
        }
        let theta = build_theta(&dist.theta_kind()?, length - 1)?;
        if !theta.admissible && !self.dgp.waive_theta_check {
            return Err(Error::config(
                "disturbance coefficients fail the weighted-summability certificate; \
                 set waive_theta_check to proceed"
                    .to_string(),
            ));
        }

        let m0 = RegressionFunction::parse(&self.dgp.m0)?;
        let mut cfg = DgpConfig::new(innov, coeff, theta.coeffs, m0);
        cfg.burn_in = self.dgp.burn_in;
        cfg.waive_theta_check = self.dgp.waive_theta_check;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rate_experiment(&self) -> Result<RateExperimentConfig> {
        let exp = self
            .experiment
            .as_ref()
            .ok_or_else(|| Error::config("rates requires an experiment section".to_string()))?;
        let cfg = RateExperimentConfig {
            dgp: self.dgp_config()?,
            estimator: exp.estimator,
            kernel: self.kernel()?,
            bandwidth: self.bandwidth_rule()?,
            eps: self.eps(),
            domain_kind: self.domain.unwrap_or(DomainKind::A),
            n_grid: exp.n_grid.clone(),
            reps: exp.reps,
            base_seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn order_experiment(&self) -> Result<cointreg::experiments::OrderExperimentConfig> {
        let exp = self
            .experiment
            .as_ref()
            .ok_or_else(|| Error::config("orderest requires an experiment section".to_string()))?;
        Ok(cointreg::experiments::OrderExperimentConfig {
            dgp: self.dgp_config()?,
            kernel: self.kernel()?,
            bandwidth: self.bandwidth_rule()?,
            n_grid: exp.n_grid.clone(),
            reps: exp.reps,
            base_seed: self.seed,
        })
    }

    pub fn required_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::config("this command requires the n field".to_string()))
    }
}
