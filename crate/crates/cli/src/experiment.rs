//! The two experiment families: averaging estimators against `T`, and
//! subsampled-estimator loss against `k`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use volsamp_core::estimator::{estimation_error, least_squares, leveraged_volume_estimator};
use volsamp_core::leverage::{exact_scores, sample_lev, sample_lev_oracle, LevMethod};
use volsamp_core::rng::derive_rng;
use volsamp_core::sampler::{
    compose_vs_k, sample_discrete_volume, sample_iid, sample_leveraged_volume,
    sample_leveraged_volume_finite, sample_vs_k, VsMethod, VsOptions,
};
use volsamp_core::{Error, EstimatorResult, LeverageProfile, SampleBatch};

use crate::config::{Design, SchemeName};
use crate::error::{CliError, Result};

pub fn default_k_grid(d: usize) -> Vec<usize> {
    let mut g = vec![d, d + 2, 2 * d, 4 * d, 8 * d];
    g.sort_unstable();
    g.dedup();
    g
}

/// Draws one batch of scheme `scheme` and size parameter `k`, then fits
/// the matching estimator. `profile` must hold the leverage scores of a
/// finite design for the leverage-based schemes.
pub fn sample_and_fit<R: Rng>(
    design: &Design,
    profile: Option<&LeverageProfile>,
    scheme: SchemeName,
    k: usize,
    rng: &mut R,
) -> Result<(SampleBatch, EstimatorResult)> {
    let oracle = design.oracle();
    let d = oracle.dim();
    let need_profile =
        || profile.ok_or_else(|| CliError::Data("leverage scores unavailable".into()));
    let batch = match (scheme, design.finite()) {
        (SchemeName::Iid, _) => sample_iid(oracle, k, rng),
        (SchemeName::Lev, Some(fd)) => sample_lev(fd, need_profile()?, k, rng)?,
        (SchemeName::Lev, None) => sample_lev_oracle(oracle, k, LevMethod::Exact, rng)?.0,
        (SchemeName::Volume, Some(fd)) => sample_discrete_volume(fd, k, rng)?,
        (SchemeName::Volume, None) => sample_vs_k(oracle, k, VsMethod::Auto, rng)?,
        (SchemeName::LeveragedVolume, Some(fd)) => {
            sample_leveraged_volume_finite(fd, need_profile()?, k, rng)?.0
        }
        (SchemeName::LeveragedVolume, None) => {
            sample_leveraged_volume(oracle, k, &VsOptions::default(), rng)?.0
        }
        (SchemeName::IidVsD, _) => {
            let vs_d = sample_vs_k(oracle, d, VsMethod::Auto, rng)?;
            let rest = sample_iid(oracle, k, rng);
            compose_vs_k(&vs_d, &rest, rng)?
        }
    };
    let fit = match scheme {
        SchemeName::Lev | SchemeName::LeveragedVolume => leveraged_volume_estimator(&batch)?,
        _ => least_squares(&batch)?,
    };
    Ok((batch, fit.with_loss(oracle)))
}

fn validate(k_grid: &[usize], d: usize, repetitions: usize) -> Result<()> {
    if repetitions == 0 {
        return Err(CliError::Usage("repetitions must be at least 1".into()));
    }
    if let Some(k) = k_grid.iter().find(|&&k| k < d) {
        return Err(CliError::Usage(format!(
            "k grid entry {k} is below d = {d}"
        )));
    }
    if k_grid.is_empty() {
        return Err(CliError::Usage("empty k grid".into()));
    }
    Ok(())
}

fn leverage_profile(design: &Design, schemes: &[SchemeName]) -> Result<Option<LeverageProfile>> {
    let needs = schemes
        .iter()
        .any(|s| matches!(s, SchemeName::Lev | SchemeName::LeveragedVolume));
    match design.finite() {
        Some(fd) if needs => Ok(Some(exact_scores(fd)?)),
        _ => Ok(None),
    }
}

/// Every `(scheme, k, run)` cell in output order.
fn jobs(
    schemes: &[SchemeName],
    k_grid: &[usize],
    repetitions: usize,
) -> Vec<(SchemeName, usize, usize)> {
    let mut out = Vec::with_capacity(schemes.len() * k_grid.len() * repetitions);
    for &s in schemes {
        for &k in k_grid {
            for run in 0..repetitions {
                out.push((s, k, run));
            }
        }
    }
    out
}

fn stream_tag(family: &str, scheme: SchemeName, k: usize) -> String {
    format!("{family}/{scheme}/{k}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasRow {
    pub scheme: &'static str,
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub run: usize,
    pub error: f64,
}

/// For each run, averages the first `T` estimators for every `T` in
/// `t_grid` and records `‖ŵ_avg - w*‖²`.
pub fn run_bias_experiment(
    design: &Design,
    schemes: &[SchemeName],
    k_grid: &[usize],
    t_grid: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<BiasRow>> {
    let oracle = design.oracle();
    let d = oracle.dim();
    validate(k_grid, d, repetitions)?;
    if t_grid.is_empty() || t_grid.contains(&0) {
        return Err(CliError::Usage("T grid entries must be positive".into()));
    }
    let w_star = oracle.optimum().ok_or(Error::MissingOptimum)?;
    let profile = leverage_profile(design, schemes)?;
    let mut ts = t_grid.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let t_max = *ts.last().unwrap_or(&1);
    let per_run: Vec<Vec<BiasRow>> = jobs(schemes, k_grid, repetitions)
        .into_par_iter()
        .map(|(scheme, k, run)| {
            let (mut rng, _) = derive_rng(seed, &stream_tag("bias", scheme, k), run as u64);
            let mut sum = vec![0.0; d];
            let mut rows = Vec::with_capacity(ts.len());
            let mut next = 0;
            for t in 1..=t_max {
                let (_, fit) = sample_and_fit(design, profile.as_ref(), scheme, k, &mut rng)?;
                sum.iter_mut().zip(fit.w.iter()).for_each(|(a, b)| *a += b);
                if ts[next] == t {
                    let avg: Vec<f64> = sum.iter().map(|v| v / t as f64).collect();
                    rows.push(BiasRow {
                        scheme: scheme.as_str(),
                        k,
                        t,
                        run,
                        error: estimation_error(&avg, &w_star)?,
                    });
                    next += 1;
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossRow {
    pub scheme: &'static str,
    pub k: usize,
    pub run: usize,
    pub loss: f64,
    pub loss_opt: f64,
}

/// `L_D(ŵ)` for every repetition, scheme and `k`, next to `L_D(w*)`.
pub fn run_loss_experiment(
    design: &Design,
    schemes: &[SchemeName],
    k_grid: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<LossRow>> {
    let oracle = design.oracle();
    validate(k_grid, oracle.dim(), repetitions)?;
    let w_star = oracle.optimum().ok_or(Error::MissingOptimum)?;
    let loss_opt = oracle.loss(&w_star).ok_or(Error::MissingOptimum)?;
    let profile = leverage_profile(design, schemes)?;
    jobs(schemes, k_grid, repetitions)
        .into_par_iter()
        .map(|(scheme, k, run)| {
            let (mut rng, _) = derive_rng(seed, &stream_tag("loss", scheme, k), run as u64);
            let (_, fit) = sample_and_fit(design, profile.as_ref(), scheme, k, &mut rng)?;
            Ok(LossRow {
                scheme: scheme.as_str(),
                k,
                run,
                loss: fit.loss.ok_or(Error::MissingOptimum)?,
                loss_opt,
            })
        })
        .collect()
}
