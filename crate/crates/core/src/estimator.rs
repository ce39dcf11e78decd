//! Least-squares estimators over sampled batches.

use crate::batch::{SampleBatch, Scheme};
use crate::design::DesignOracle;
use crate::error::{Error, Result};
use crate::leverage::rescale;
use crate::linalg::{pseudoinverse, rank, Vector};
use crate::rng::SeedTrace;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorResult {
    pub w: Vector,
    /// `L_D(w)` when the source design can evaluate it exactly.
    pub loss: Option<f64>,
    pub scheme: Scheme,
    pub k: usize,
    pub seed_trace: Option<SeedTrace>,
    /// The fitted design had rank below `d`; `w` is the min-norm solution.
    pub rank_deficient: bool,
}

impl EstimatorResult {
    pub fn with_loss(mut self, oracle: &dyn DesignOracle) -> Self {
        self.loss = oracle.loss(&self.w);
        self
    }
}

fn fit(x: &crate::linalg::Matrix, y: &[f64], batch: &SampleBatch) -> EstimatorResult {
    EstimatorResult {
        w: pseudoinverse(x).mul_vec(y),
        loss: None,
        scheme: batch.scheme,
        k: batch.k(),
        seed_trace: batch.seed_trace,
        rank_deficient: rank(x) < x.cols(),
    }
}

/// `X†y`.
pub fn least_squares(batch: &SampleBatch) -> Result<EstimatorResult> {
    let y = batch.y.as_ref().ok_or(Error::MissingResponses)?;
    Ok(fit(&batch.x, y, batch))
}

/// `(PX)†(Py)` with `P = diag(1/sqrt(l_i))`.
pub fn leveraged_volume_estimator(batch: &SampleBatch) -> Result<EstimatorResult> {
    let (px, py) = rescale(batch)?;
    Ok(fit(&px, &py, batch))
}

/// Entrywise mean of the weight vectors.
pub fn averaged_estimator(results: &[EstimatorResult]) -> Result<EstimatorResult> {
    let first = results.first().ok_or(Error::EmptyList)?;
    let d = first.w.len();
    let mut w = Vector::zeros(d);
    for r in results {
        if r.w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.w.len(),
            });
        }
        for (a, b) in w.iter_mut().zip(r.w.iter()) {
            *a += b;
        }
    }
    let t = results.len() as f64;
    w.iter_mut().for_each(|v| *v /= t);
    Ok(EstimatorResult {
        w,
        loss: None,
        scheme: first.scheme,
        k: first.k,
        seed_trace: first.seed_trace,
        rank_deficient: results.iter().any(|r| r.rank_deficient),
    })
}

/// `‖w - w*‖²`.
pub fn estimation_error(w: &[f64], w_star: &[f64]) -> Result<f64> {
    if w.len() != w_star.len() {
        return Err(Error::DimensionMismatch {
            expected: w_star.len(),
            found: w.len(),
        });
    }
    Ok(w.iter().zip(w_star).map(|(a, b)| (a - b) * (a - b)).sum())
}
