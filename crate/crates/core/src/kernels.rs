//! Compactly supported smoothing kernels and bandwidth rules.
//!
//! Every catalog kernel integrates to one, has zero first moment, and is
//! Lipschitz with a documented constant. Bandwidths are projected into the
//! admissible interval `[h_lower_n, h_upper]` with
//! `h_lower_n = n^(2 r0) / e_n`, which keeps the simplified form of the rate
//! bounds applicable whenever `r0 >= 1/q0`.

use serde::{Deserialize, Serialize};

use crate::dgp::SamplePath;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    Epanechnikov,
    Biweight,
    Triangular,
}

/// A smoothing kernel with support `[-support_radius, support_radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub shape: KernelShape,
    pub support_radius: f64,
    pub lipschitz_const: f64,
}

impl Kernel {
    pub fn epanechnikov() -> Self {
        Kernel {
            shape: KernelShape::Epanechnikov,
            support_radius: 1.0,
            lipschitz_const: 1.5,
        }
    }

    pub fn biweight() -> Self {
        Kernel {
            shape: KernelShape::Biweight,
            support_radius: 1.0,
            // max |K'| attained at x = 1/sqrt(3): (15/4) * (2/3) / sqrt(3).
            lipschitz_const: 2.5 / 3f64.sqrt(),
        }
    }

    pub fn triangular() -> Self {
        Kernel {
            shape: KernelShape::Triangular,
            support_radius: 1.0,
            lipschitz_const: 1.0,
        }
    }

    pub fn by_id(id: &str) -> Result<Self> {
        match id {
            "epanechnikov" => Ok(Kernel::epanechnikov()),
            "biweight" => Ok(Kernel::biweight()),
            "triangular" => Ok(Kernel::triangular()),
            _ => Err(Error::config(format!("unknown kernel id: {id}"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.shape {
            KernelShape::Epanechnikov => "epanechnikov",
            KernelShape::Biweight => "biweight",
            KernelShape::Triangular => "triangular",
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() > self.support_radius {
            return 0.0;
        }
        match self.shape {
            KernelShape::Epanechnikov => 0.75 * (1.0 - x * x),
            KernelShape::Biweight => {
                let t = 1.0 - x * x;
                0.9375 * t * t
            }
            KernelShape::Triangular => 1.0 - x.abs(),
        }
    }

    /// `K_h(y) = K(y/h) / h`.
    #[inline]
    pub fn eval_scaled(&self, y: f64, h: f64) -> f64 {
        self.eval(y / h) / h
    }

    /// Peak value, used to reason about minimal support counts.
    pub fn max_value(&self) -> f64 {
        self.eval(0.0)
    }
}

pub fn kernel_catalog() -> Vec<Kernel> {
    vec![
        Kernel::epanechnikov(),
        Kernel::biweight(),
        Kernel::triangular(),
    ]
}

/// Composite Simpson over `[-r, r]` with an even node count, so the kernels'
/// kinks at 0 and at the support edges sit on panel boundaries and the rule
/// is exact for the piecewise-polynomial catalog.
pub fn simpson_integral(f: impl Fn(f64) -> f64, r: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let hstep = 2.0 * r / m as f64;
    let mut acc = f(-r) + f(r);
    for i in 1..m {
        let x = -r + i as f64 * hstep;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * hstep / 3.0
}

/// Bandwidth selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BandwidthKind {
    Fixed { h: f64 },
    /// `h = c * e_n^(-kappa)`.
    Power { c: f64, kappa: f64 },
    /// `h = c * sd_robust(increments) * e_n^(-1/5)` with
    /// `sd_robust = IQR / 1.349`.
    Plugin { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRule {
    #[serde(flatten)]
    pub kind: BandwidthKind,
    /// Lower-interval exponent `r0 > 0`; default `1/q0` of the innovation
    /// configuration so the simplified rate bounds hold.
    pub r0: f64,
    pub h_upper: f64,
}

pub const DEFAULT_H_UPPER: f64 = 1.0;
/// Balancing exponent: equates the orders of the squared-bandwidth bias and
/// the `(e_n h)^(-1/2)` noise term.
pub const BALANCED_KAPPA: f64 = 0.2;

impl BandwidthRule {
    pub fn fixed(h: f64) -> Self {
        BandwidthRule {
            kind: BandwidthKind::Fixed { h },
            r0: 1.0 / crate::innovations::DEFAULT_ETA_Q0,
            h_upper: DEFAULT_H_UPPER,
        }
    }

    pub fn power(c: f64, kappa: f64) -> Self {
        BandwidthRule {
            kind: BandwidthKind::Power { c, kappa },
            r0: 1.0 / crate::innovations::DEFAULT_ETA_Q0,
            h_upper: DEFAULT_H_UPPER,
        }
    }

    pub fn plugin(c: f64) -> Self {
        BandwidthRule {
            kind: BandwidthKind::Plugin { c },
            r0: 1.0 / crate::innovations::DEFAULT_ETA_Q0,
            h_upper: DEFAULT_H_UPPER,
        }
    }

    /// Balanced power rule `h = c * e_n^(-1/5)`.
    pub fn balanced(c: f64) -> Self {
        BandwidthRule::power(c, BALANCED_KAPPA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0) {
            return Err(Error::config(format!("r0 must be positive, got {}", self.r0)));
        }
        if !(self.h_upper > 0.0) {
            return Err(Error::config(format!(
                "h_upper must be positive, got {}",
                self.h_upper
            )));
        }
        match self.kind {
            BandwidthKind::Fixed { h } if !(h > 0.0) => {
                Err(Error::config(format!("fixed bandwidth must be positive, got {h}")))
            }
            BandwidthKind::Power { c, kappa } if !(c > 0.0) || !(kappa >= 0.0) => Err(
                Error::config(format!("power rule needs c > 0 and kappa >= 0, got ({c},{kappa})")),
            ),
            BandwidthKind::Plugin { c } if !(c > 0.0) => {
                Err(Error::config(format!("plugin constant must be positive, got {c}")))
            }
            _ => Ok(()),
        }
    }

    /// Lower end of the admissible interval at sample size `n`.
    pub fn h_lower(&self, n: usize, e_n: f64) -> f64 {
        (n as f64).powf(2.0 * self.r0) / e_n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSelection {
    pub h: f64,
    /// Raw rule output before projection into the admissible interval.
    pub raw: f64,
    pub clipped: bool,
    pub h_lower: f64,
    pub h_upper: f64,
}

/// Applies the rule to a path and projects into `[h_lower_n, h_upper]`.
pub fn select_bandwidth(rule: &BandwidthRule, path: &SamplePath) -> Result<BandwidthSelection> {
    rule.validate()?;
    if path.n == 0 {
        return Err(Error::config("empty path".to_string()));
    }
    let e_n = path.e_n();
    let raw = match rule.kind {
        BandwidthKind::Fixed { h } => h,
        BandwidthKind::Power { c, kappa } => c * e_n.powf(-kappa),
        BandwidthKind::Plugin { c } => {
            c * robust_sd_of_increments(&path.x) * e_n.powf(-0.2)
        }
    };
    let h_lower = rule.h_lower(path.n, e_n);
    if h_lower > rule.h_upper {
        return Err(Error::numeric(format!(
            "empty bandwidth interval: h_lower {h_lower} exceeds h_upper {}",
            rule.h_upper
        )));
    }
    let h = raw.clamp(h_lower, rule.h_upper);
    Ok(BandwidthSelection {
        h,
        raw,
        clipped: h != raw,
        h_lower,
        h_upper: rule.h_upper,
    })
}

/// Interquartile range of the path increments over 1.349, the classical
/// robust spread estimate (equals the standard deviation for a normal law).
/// The first increment is taken from the origin, x_0 = 0.
fn robust_sd_of_increments(x: &[f64]) -> f64 {
    let mut inc = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &v in x {
        inc.push(v - prev);
        prev = v;
    }
    inc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (quantile_sorted(&inc, 0.75) - quantile_sorted(&inc, 0.25)) / 1.349
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}
