//! Random evaluation domains: finite unions of disjoint closed intervals on
//! which the kernel signal is bounded away from zero, plus the trimmed-range
//! interval available in the Brownian case.

use serde::{Deserialize, Serialize};

use crate::dgp::SamplePath;
use crate::error::{Error, Result};
use crate::grid::EvalGrid;
use crate::kernels::Kernel;

/// A finite union of disjoint, sorted closed intervals `[l_i, r_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSet {
    intervals: Vec<(f64, f64)>,
}

impl DomainSet {
    pub fn empty() -> Self {
        DomainSet { intervals: Vec::new() }
    }

    /// Builds from arbitrary closed intervals, sorting and merging overlaps.
    pub fn from_intervals(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(l, r) in &intervals {
            if !(l <= r) {
                return Err(Error::config(format!("invalid interval [{l}, {r}]")));
            }
        }
        intervals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (l, r) in intervals {
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(r),
                _ => merged.push((l, r)),
            }
        }
        Ok(DomainSet { intervals: merged })
    }

    pub fn interval(l: f64, r: f64) -> Result<Self> {
        DomainSet::from_intervals(vec![(l, r)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self
            .intervals
            .partition_point(|&(l, _)| l <= x);
        idx > 0 && x <= self.intervals[idx - 1].1
    }

    /// Total Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(l, r)| r - l).sum()
    }

    /// Widens every interval by `pad` on both sides and re-merges.
    pub fn enlarge(&self, pad: f64) -> Result<Self> {
        if !(pad >= 0.0) {
            return Err(Error::config(format!("pad must be nonnegative, got {pad}")));
        }
        DomainSet::from_intervals(
            self.intervals
                .iter()
                .map(|&(l, r)| (l - pad, r + pad))
                .collect(),
        )
    }

    pub fn is_subset_of(&self, other: &DomainSet) -> bool {
        self.intervals
            .iter()
            .all(|&(l, r)| other.intervals.iter().any(|&(ol, or)| ol <= l && r <= or))
    }
}

/// Maximal-domain construction: the union of maximal grid-node runs on which
/// the signal process is at least `eps` (weak inequality, ties included).
/// Endpoints snap to grid nodes.
pub fn threshold_domain(signal: &[f64], grid: &EvalGrid, eps: f64) -> Result<DomainSet> {
    if !(eps >= 0.0) {
        return Err(Error::config(format!("eps must be nonnegative, got {eps}")));
    }
    if signal.len() != grid.len() {
        return Err(Error::config(
            "signal and grid lengths disagree".to_string(),
        ));
    }
    let pts = grid.points();
    let mut intervals = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..signal.len() {
        if signal[i] >= eps {
            if run_start.is_none() {
                run_start = Some(i);
            }
        } else if let Some(s) = run_start.take() {
            intervals.push((pts[s], pts[i - 1]));
        }
    }
    if let Some(s) = run_start {
        intervals.push((pts[s], pts[signal.len() - 1]));
    }
    DomainSet::from_intervals(intervals)
}

/// Trimmed-range domain `[(1 - eps) * min x, (1 - eps) * max x]`.
pub fn domain_r(path: &SamplePath, eps: f64) -> Result<DomainSet> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::config(format!("eps must lie in [0,1), got {eps}")));
    }
    let l = (1.0 - eps) * path.x_min();
    let r = (1.0 - eps) * path.x_max();
    DomainSet::interval(l.min(r), l.max(r))
}

/// Fraction of observations outside the domain, `n^(-1) * #{x_t not in D}`.
pub fn coverage_fraction(path: &SamplePath, domain: &DomainSet) -> f64 {
    let outside = path.x.iter().filter(|&&x| !domain.contains(x)).count();
    outside as f64 / path.n as f64
}

/// Convenience: signal computation plus thresholding in one call.
pub fn domain_a(
    path: &SamplePath,
    kernel: &Kernel,
    h: f64,
    eps: f64,
    grid: &EvalGrid,
) -> Result<DomainSet> {
    let signal = crate::signal::signal_process(path, kernel, h, grid)?;
    threshold_domain(&signal, grid, eps)
}
