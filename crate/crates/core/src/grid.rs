//! Evaluation grids shared by the signal process, the random domains, and
//! the regression estimators.

use serde::{Deserialize, Serialize};

use crate::dgp::SamplePath;
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// A uniform evaluation grid in regressor (x) units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    points: Vec<f64>,
    mesh: f64,
}

/// Hard cap on the node count of the default policy.
const MAX_DEFAULT_NODES: usize = 1 << 20;
/// Floor on the node count of the default policy (when feasible within the
/// cap): the mesh never exceeds range / 2^14.
const MIN_RESOLUTION: usize = 1 << 14;

impl EvalGrid {
    pub fn uniform(lo: f64, hi: f64, mesh: f64) -> Result<Self> {
        if !(mesh > 0.0) || !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::config(format!(
                "invalid grid: [{lo}, {hi}] with mesh {mesh}"
            )));
        }
        let count = ((hi - lo) / mesh).ceil() as usize + 1;
        let points = (0..count).map(|i| lo + i as f64 * mesh).collect();
        Ok(EvalGrid { points, mesh })
    }

    /// Default policy: span the path range padded by the kernel support
    /// `c_K * h`, with mesh `min(h/5, range/2^14)` so kernel features stay
    /// resolved at a bounded node count.
    pub fn default_policy(path: &SamplePath, kernel: &Kernel, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::config(format!("bandwidth must be positive, got {h}")));
        }
        let pad = kernel.support_radius * h;
        let lo = path.x_min() - pad;
        let hi = path.x_max() + pad;
        let range = hi - lo;
        let mut mesh = (h / 5.0).min(range / MIN_RESOLUTION as f64);
        let min_mesh = range / (MAX_DEFAULT_NODES - 1) as f64;
        if mesh < min_mesh {
            mesh = min_mesh;
        }
        EvalGrid::uniform(lo, hi, mesh)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        *self.points.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::DgpConfig;
    use crate::innovations::{InnovationConfig, StableLaw, StreamId};
    use crate::m0::RegressionFunction;
    use crate::norming::RegressorCoeffSpec;

    #[test]
    fn uniform_grid_is_sorted_with_positive_mesh() {
        let g = EvalGrid::uniform(-1.0, 1.0, 0.25).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        assert!(EvalGrid::uniform(1.0, -1.0, 0.25).is_err());
        assert!(EvalGrid::uniform(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn default_policy_covers_padded_range() {
        let cfg = DgpConfig::new(
            InnovationConfig::exogenous(StableLaw::standard_normal()),
            RegressorCoeffSpec::unit_root(2.0).unwrap(),
            vec![1.0],
            RegressionFunction::Zero,
        );
        let path = crate::dgp::simulate_path(&cfg, 1024, StreamId::new(1, 0)).unwrap();
        let k = Kernel::epanechnikov();
        let g = EvalGrid::default_policy(&path, &k, 0.5).unwrap();
        assert!(g.lo() <= path.x_min() - 0.5 + 1e-12);
        assert!(g.hi() >= path.x_max() + 0.5 - g.mesh());
        assert!(g.len() >= 1 << 14);
        assert!(g.len() <= MAX_DEFAULT_NODES + 1);
    }
}
