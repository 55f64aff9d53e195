//! Simulation and kernel regression toolkit for nonstationary regression
//! `y_t = m0(x_t) + u_t` with an integrated, possibly heavy-tailed and
//! long-memory regressor and a serially dependent, possibly endogenous
//! disturbance.
//!
//! The library simulates sample paths of the model, evaluates the kernel
//! signal process (the empirical occupation density of the standardised
//! regressor), constructs the random domains on which the signal is bounded
//! away from zero, computes Nadaraya-Watson and local-linear estimators with
//! their bias/noise decomposition, and runs Monte Carlo experiments that
//! measure uniform error rates, coverage, and the growth order of the
//! normalised covariance and zero-energy sup-statistics.

// Negated comparisons like `!(x > 0.0)` are load-bearing: they reject NaN,
// which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dgp;
pub mod domain;
pub mod empirical;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod grid;
pub mod innovations;
pub mod io;
pub mod kernels;
pub mod m0;
pub mod norming;
pub mod signal;

pub use dgp::{simulate_path, DgpConfig, SamplePath};
pub use domain::{coverage_fraction, domain_r, threshold_domain, DomainSet};
pub use error::{Error, Result};
pub use estimators::{
    decompose_nw, derivative_bounds, local_linear, nadaraya_watson, sup_error, EstimateSheet,
    EstimatorKind,
};
pub use grid::EvalGrid;
pub use innovations::{
    draw_innovation_pair, draw_stable, InnovationConfig, RngStream, StableLaw, StreamId,
};
pub use kernels::{kernel_catalog, select_bandwidth, BandwidthKind, BandwidthRule, Kernel};
pub use m0::{m0_catalog, RegressionFunction};
pub use norming::{
    build_c, build_norming, build_phi, build_theta, NormingSequences, NormingSnapshot,
    Regime, RegressorCoeffSpec, ThetaKind,
};
pub use signal::{reflection_probability_check, signal_mass, signal_process};
