//! Volume-rescaled samplers.
//!
//! `VS^k` is the law of `k` i.i.d. design rows reweighted by `det(XᵀX)`.
//! It is assembled from an exact `VS^d` draw (Gaussian closed form or
//! determinantal rejection) plus `k - d` plain i.i.d. rows placed at random
//! positions. Reverse iterative sampling handles the discrete subset
//! problem on a fixed matrix.

use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::batch::{SampleBatch, Scheme};
use crate::design::{DesignOracle, FiniteDesign, Point};
use crate::dist::DistTable;
use crate::error::{Error, Result};
use crate::leverage::{
    draw_leverage_point, LevMethod, LevRejectionStats, LeverageFunction, LeverageProfile,
    ProfileKind,
};
use crate::linalg::{
    self, cholesky, falling_factorial, logdet_gram, Matrix, Vector, DOWNDATE_FLOOR,
};
use crate::math;

/// Consecutive rejections after which Algorithm 1 gives up.
pub const STALL_LIMIT: usize = 200;
/// Slack allowed on the acceptance probability before it counts as `> 1`.
pub const ACCEPT_SLACK: f64 = 1e-9;
/// Largest enumeration the brute-force oracles attempt.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Discrete volume sampling: a size-`k` subset `S` of the rows of `x` with
/// probability proportional to `det(X_SᵀX_S)`. Returns sorted indices.
pub fn reverse_iterative<R: Rng>(x: &Matrix, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let (n, d) = (x.rows(), x.cols());
    if k < d || k > n {
        return Err(Error::InvalidArgument(
            "reverse iterative sampling needs d <= k <= n",
        ));
    }
    let mut set: Vec<usize> = (0..n).collect();
    let (mut inv, mut lev) = factor(x, &set).map_err(|_| Error::RankDeficient)?;
    let mut q = vec![0.0; n];
    while set.len() > k {
        let denom = (set.len() - d) as f64;
        let mut total = removal_weights(&lev, denom, &mut q);
        if math::abs(total - 1.0) > 1e-6 {
            (inv, lev) = factor(x, &set)?;
            total = removal_weights(&lev, denom, &mut q);
        }
        if !(total > 0.0) {
            return Err(Error::Degenerate);
        }
        let mut u = rng.random::<f64>() * total;
        let mut pos = set.len() - 1;
        for (i, qi) in q[..set.len()].iter().enumerate() {
            if u < *qi {
                pos = i;
                break;
            }
            u -= qi;
        }
        // Round-off may leave u just past the end; step back to a live row.
        while q[pos] <= 0.0 && pos > 0 {
            pos -= 1;
        }
        let j = set.swap_remove(pos);
        let margin = 1.0 - lev.swap_remove(pos);
        if set.len() == k {
            break;
        }
        if margin > DOWNDATE_FLOOR {
            let xj = x.row(j);
            let u = inv.mul_vec(xj);
            inv.rank_one_update(1.0 / margin, &u, &u);
            for (i, l) in set.iter().zip(lev.iter_mut()) {
                let c = linalg::dot(x.row(*i), &u);
                *l += c * c / margin;
            }
        } else {
            (inv, lev) = factor(x, &set)?;
        }
    }
    set.sort_unstable();
    Ok(set)
}

fn removal_weights(lev: &[f64], denom: f64, q: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (qi, l) in q.iter_mut().zip(lev) {
        *qi = (1.0 - l).max(0.0) / denom;
        total += *qi;
    }
    total
}

/// Inverse Gram of the selected rows and their within-set leverages.
fn factor(x: &Matrix, set: &[usize]) -> Result<(Matrix, Vec<f64>)> {
    let sub = x.select_rows(set);
    let chol = cholesky(&sub.gram()).map_err(|_| Error::Degenerate)?;
    let lev = set.iter().map(|&i| chol.inv_quad_form(x.row(i))).collect();
    Ok((chol.inverse(), lev))
}

/// Bookkeeping for determinantal rejection sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RejectionStats {
    pub trials: u64,
    pub accepted: u64,
    /// Largest acceptance probability seen.
    pub max_ratio: f64,
    /// Draws consumed from the leverage sampler.
    pub pool_draws: u64,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accepted as f64 / self.trials as f64
        }
    }

    pub fn merge(&mut self, other: &RejectionStats) {
        self.trials += other.trials;
        self.accepted += other.accepted;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self.pool_draws += other.pool_draws;
    }
}

/// Default pool size `2d²`.
pub fn default_pool_size(d: usize) -> usize {
    (2 * d * d).max(d)
}

/// Default tolerance `1/(2 sqrt d)` on the spectrum of `Σ̂` relative to `Σ`.
pub fn default_epsilon(d: usize) -> f64 {
    0.5 / math::sqrt(d as f64)
}

/// Errors unless every eigenvalue of `Σ^{-1/2} Σ̂ Σ^{-1/2}` lies in
/// `[1 - ε, 1 + ε]`.
pub fn check_covariance_approx(sigma: &Matrix, sigma_hat: &Matrix, eps: f64) -> Result<()> {
    let (lo, hi) = relative_spectrum(sigma, sigma_hat)?;
    if lo < 1.0 - eps {
        return Err(Error::CovarianceOutOfBounds { ratio: lo });
    }
    if hi > 1.0 + eps {
        return Err(Error::CovarianceOutOfBounds { ratio: hi });
    }
    Ok(())
}

/// Extreme eigenvalues of `L⁻¹ Σ̂ L⁻ᵀ` with `L Lᵀ = Σ`.
fn relative_spectrum(sigma: &Matrix, sigma_hat: &Matrix) -> Result<(f64, f64)> {
    let c = cholesky(sigma)?;
    let a = c.solve_lower_mat(sigma_hat);
    let b = c.solve_lower_mat(&a.transpose());
    let b = b.add(&b.transpose()).scaled(0.5);
    let (vals, _) = linalg::symmetric_eigen(&b);
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Determinantal rejection sampling: an exact `VS^d` draw of the design
/// whose leverage sampler (with respect to `sigma_hat`) is `pool`.
///
/// Each trial draws `t` rows, rescales row `x` to `sqrt(d / xᵀΣ̂⁻¹x)·x`,
/// and accepts with probability `det(X̃ᵀX̃/t)/det(Σ̂)`; an accepted pool is
/// thinned to `d` rows by discrete volume sampling. The original rows are
/// returned, in random order.
pub fn det_rejection<R, F>(
    sigma_hat: &Matrix,
    t: usize,
    mut pool: F,
    rng: &mut R,
) -> Result<(Vec<Point>, RejectionStats)>
where
    R: Rng,
    F: FnMut(&mut R) -> Result<Point>,
{
    let d = sigma_hat.rows();
    if t < d {
        return Err(Error::InvalidArgument("pool size must be at least d"));
    }
    let chol = cholesky(sigma_hat)?;
    let log_norm = d as f64 * math::ln(t as f64) + chol.logdet();
    let mut stats = RejectionStats::default();
    let mut streak = 0;
    let mut rescaled = Matrix::zeros(t, d);
    loop {
        let mut points = Vec::with_capacity(t);
        for i in 0..t {
            let p = pool(rng)?;
            stats.pool_draws += 1;
            let s = chol.inv_quad_form(&p.x);
            if !(s > 0.0) {
                return Err(Error::ZeroLeverageRow { row: i });
            }
            let f = math::sqrt(d as f64 / s);
            for (dst, v) in rescaled.row_mut(i).iter_mut().zip(p.x.iter()) {
                *dst = f * v;
            }
            points.push(p);
        }
        let ratio = math::exp(logdet_gram(&rescaled) - log_norm);
        stats.trials += 1;
        stats.max_ratio = stats.max_ratio.max(ratio);
        if ratio > 1.0 + ACCEPT_SLACK {
            return Err(Error::AcceptanceAboveOne { ratio });
        }
        if rng.random::<f64>() < ratio {
            stats.accepted += 1;
            let chosen = reverse_iterative(&rescaled, d, rng)?;
            let mut out: Vec<Point> = chosen.into_iter().map(|i| points[i].clone()).collect();
            out.shuffle(rng);
            return Ok((out, stats));
        }
        streak += 1;
        if streak >= STALL_LIMIT {
            return Err(Error::AcceptanceStall { rejections: streak });
        }
    }
}

/// A closed-form Gaussian `VS^k` draw.
#[derive(Clone, Debug)]
pub struct GaussianVsDraw {
    pub m: Matrix,
    /// `X₂ᵀX₂`, equal to `MᵀM` up to round-off.
    pub target_gram: Matrix,
    /// Redraws forced by a singular `X₁` or `X₂`.
    pub retries: usize,
}

/// `M = X₁ L₁⁻ᵀ L₂ᵀ` where `X₁` has `k` and `X₂` has `k + 2` i.i.d.
/// `N(0, Σ)` rows and `L₁L₁ᵀ = X₁ᵀX₁`, `L₂L₂ᵀ = X₂ᵀX₂`. Then `MᵀM = X₂ᵀX₂`
/// and `M ~ VS^k`.
pub fn gaussian_vs<R: Rng>(sigma: &Matrix, k: usize, rng: &mut R) -> Result<GaussianVsDraw> {
    let d = sigma.rows();
    if k < d {
        return Err(Error::InvalidArgument("gaussian_vs needs k >= d"));
    }
    let l = cholesky(sigma)?;
    let draw = |rows: usize, rng: &mut R| {
        Matrix::from_fn(rows, d, |_, _| StandardNormal.sample(rng)).matmul(&l.lower().transpose())
    };
    let mut retries = 0;
    loop {
        let x1 = draw(k, rng);
        let x2 = draw(k + 2, rng);
        let g2 = x2.gram();
        let (l1, l2) = match (cholesky(&x1.gram()), cholesky(&g2)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                retries += 1;
                if retries > 1000 {
                    return Err(Error::Degenerate);
                }
                continue;
            }
        };
        // B = L₁⁻ᵀ L₂ᵀ, column by column.
        let l2t = l2.lower().transpose();
        let mut b = Matrix::zeros(d, d);
        for c in 0..d {
            let col = l1.solve_upper(&l2t.col(c));
            for r in 0..d {
                b[(r, c)] = col[r];
            }
        }
        return Ok(GaussianVsDraw {
            m: x1.matmul(&b),
            target_gram: g2,
            retries,
        });
    }
}

/// Interleaves a `VS^d` batch with `k - d` further rows at a uniformly
/// random size-`d` position set, then records the positions. If the extra
/// rows are i.i.d. from the design the result is `VS^k`.
pub fn compose_vs_k<R: Rng>(
    vs_d: &SampleBatch,
    rest: &SampleBatch,
    rng: &mut R,
) -> Result<SampleBatch> {
    let d = vs_d.dim();
    if vs_d.k() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: vs_d.k(),
        });
    }
    if rest.k() > 0 && rest.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rest.dim(),
        });
    }
    let k = d + rest.k();
    let mut positions = index::sample(rng, k, d).into_vec();
    positions.sort_unstable();
    let mut vs_order: Vec<usize> = (0..d).collect();
    vs_order.shuffle(rng);
    let mut rest_order: Vec<usize> = (0..rest.k()).collect();
    rest_order.shuffle(rng);

    // source[pos] = (from_vs, row)
    let mut source = Vec::with_capacity(k);
    let (mut a, mut b) = (0, 0);
    for pos in 0..k {
        if positions.binary_search(&pos).is_ok() {
            source.push((true, vs_order[a]));
            a += 1;
        } else {
            source.push((false, rest_order[b]));
            b += 1;
        }
    }
    let pick = |(from_vs, i): (bool, usize)| if from_vs { (vs_d, i) } else { (rest, i) };

    let mut x = Matrix::zeros(k, d);
    for (pos, src) in source.iter().enumerate() {
        let (batch, i) = pick(*src);
        x.row_mut(pos).copy_from_slice(batch.x.row(i));
    }
    let gather = |get: &dyn Fn(&SampleBatch) -> Option<&Vector>| -> Option<Vector> {
        let (u, v) = (
            get(vs_d)?,
            get(rest).or_else(|| if rest.k() == 0 { get(vs_d) } else { None })?,
        );
        Some(
            source
                .iter()
                .map(|&(from_vs, i)| if from_vs { u[i] } else { v[i] })
                .collect(),
        )
    };
    let scheme = if rest.scheme == Scheme::Lev {
        Scheme::LeveragedVolume
    } else {
        Scheme::VsKComposed
    };
    let mut out = SampleBatch::new(x, scheme);
    out.y = gather(&|b| b.y.as_ref());
    out.leverages = gather(&|b| b.leverages.as_ref());
    out.indices = match (&vs_d.indices, &rest.indices) {
        (Some(u), Some(v)) => Some(
            source
                .iter()
                .map(|&(from_vs, i)| if from_vs { u[i] } else { v[i] })
                .collect(),
        ),
        (Some(u), None) if rest.k() == 0 => Some(source.iter().map(|&(_, i)| u[i]).collect()),
        _ => None,
    };
    out.volume_rows = Some(positions);
    out.seed_trace = vs_d.seed_trace;
    Ok(out)
}

/// Splits a batch into a size-`d` subset chosen with probability
/// `∝ det(X_S)²` and the remaining rows. If the input is `VS^k` the two
/// parts are independent `VS^d` and i.i.d. samples.
pub fn decompose_vs_k<R: Rng>(
    batch: &SampleBatch,
    rng: &mut R,
) -> Result<(SampleBatch, SampleBatch)> {
    let d = batch.dim();
    if batch.k() < d {
        return Err(Error::InvalidArgument("batch has fewer than d rows"));
    }
    let chosen = reverse_iterative(&batch.x, d, rng)?;
    let mut vs_idx = chosen.clone();
    vs_idx.shuffle(rng);
    let rest_idx: Vec<usize> = (0..batch.k())
        .filter(|i| chosen.binary_search(i).is_err())
        .collect();
    Ok((
        batch.select(&vs_idx, Scheme::VsD),
        batch.select(&rest_idx, Scheme::Iid),
    ))
}

fn enumeration_guard(size: f64) -> Result<()> {
    if size > ENUMERATION_LIMIT {
        Err(Error::TooLarge { size })
    } else {
        Ok(())
    }
}

/// Exact `VS^k` law of a finite design over ordered `k`-tuples of row
/// indices.
pub fn brute_force_vs(fd: &FiniteDesign, k: usize) -> Result<DistTable<Vec<usize>>> {
    let (n, d) = (fd.n(), fd.x().cols());
    enumeration_guard(math::powi(n as f64, k as i32))?;
    let mut tuple = vec![0usize; k];
    let mut weights = Vec::new();
    let mut total = 0.0;
    loop {
        let w = linalg::det_gram(&fd.x().select_rows(&tuple)).max(0.0);
        total += w;
        weights.push((tuple.clone(), w));
        // Mixed-radix increment.
        let mut pos = k;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
        }
        if tuple.iter().all(|&v| v == 0) {
            break;
        }
    }
    if !(total > 0.0) {
        return Err(Error::RankDeficient);
    }
    // E[det(XᵀX)] over i.i.d. rows equals k^(d falling)·det(Σ).
    let sigma = fd.x().gram().scaled(1.0 / n as f64);
    let expected = falling_factorial(k, d) * linalg::det(&sigma);
    let mean = total / math::powi(n as f64, k as i32);
    assert!(
        math::abs(mean - expected) <= 1e-10 * expected.max(1e-300),
        "volume normalization mismatch: {mean} vs {expected}"
    );
    DistTable::from_weights(weights)
}

/// Exact discrete volume sampling law over sorted size-`k` subsets.
pub fn brute_force_subsets(x: &Matrix, k: usize) -> Result<DistTable<Vec<usize>>> {
    let n = x.rows();
    if k > n {
        return Err(Error::InvalidArgument("k exceeds the number of rows"));
    }
    let count = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    enumeration_guard(count)?;
    let mut subset: Vec<usize> = (0..k).collect();
    let mut weights = Vec::new();
    loop {
        weights.push((
            subset.clone(),
            linalg::det_gram(&x.select_rows(&subset)).max(0.0),
        ));
        // Next combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return DistTable::from_weights(weights).map_err(|_| Error::RankDeficient);
            }
            i -= 1;
            if subset[i] < n - k + i {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// `k` i.i.d. design rows with responses.
pub fn sample_iid<R: Rng>(oracle: &dyn DesignOracle, k: usize, rng: &mut R) -> SampleBatch {
    let points: Vec<Point> = (0..k).map(|_| oracle.draw_point(rng)).collect();
    batch_from_points(oracle, points, Scheme::Iid, rng)
}

fn batch_from_points<R: Rng>(
    oracle: &dyn DesignOracle,
    points: Vec<Point>,
    scheme: Scheme,
    rng: &mut R,
) -> SampleBatch {
    let d = oracle.dim();
    let mut x = Matrix::zeros(points.len(), d);
    let mut y = Vec::with_capacity(points.len());
    let mut idx = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        x.row_mut(i).copy_from_slice(&p.x);
        y.push(oracle.response(p, rng));
        idx.push(p.index);
    }
    let mut b = SampleBatch::new(x, scheme);
    b.y = Some(y.into());
    b.indices = Some(idx);
    b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VsMethod {
    /// Gaussian closed form when available, otherwise rejection.
    Auto,
    Gaussian,
    Rejection,
}

/// Knobs for [`sample_vs_k_with`].
#[derive(Clone, Debug)]
pub struct VsOptions {
    pub method: VsMethod,
    /// Algorithm 1 pool size; defaults to `2d²`.
    pub pool_size: Option<usize>,
    /// Approximate second moment used by the rejection step; defaults to
    /// the design's exact one.
    pub sigma_hat: Option<Matrix>,
}

impl Default for VsOptions {
    fn default() -> Self {
        VsOptions {
            method: VsMethod::Auto,
            pool_size: None,
            sigma_hat: None,
        }
    }
}

impl VsOptions {
    pub fn with_method(method: VsMethod) -> Self {
        VsOptions {
            method,
            ..Self::default()
        }
    }
}

/// One `VS^k` batch with responses.
pub fn sample_vs_k<R: Rng>(
    oracle: &dyn DesignOracle,
    k: usize,
    method: VsMethod,
    rng: &mut R,
) -> Result<SampleBatch> {
    Ok(sample_vs_k_with(oracle, k, &VsOptions::with_method(method), rng)?.0)
}

pub fn sample_vs_k_with<R: Rng>(
    oracle: &dyn DesignOracle,
    k: usize,
    opts: &VsOptions,
    rng: &mut R,
) -> Result<(SampleBatch, RejectionStats)> {
    let d = oracle.dim();
    if k < d {
        return Err(Error::InvalidArgument("k must be at least d"));
    }
    let use_gaussian = match opts.method {
        VsMethod::Gaussian => true,
        VsMethod::Rejection => false,
        VsMethod::Auto => oracle.gaussian_covariance().is_some(),
    };
    if use_gaussian {
        let sigma = oracle
            .gaussian_covariance()
            .ok_or(Error::MethodUnavailable(
                "gaussian sampler needs a Gaussian design",
            ))?;
        let draw = gaussian_vs(sigma, k, rng)?;
        let points = (0..k).map(|i| Point::new(draw.m.row(i).into())).collect();
        let mut b = batch_from_points(oracle, points, Scheme::VsGaussian, rng);
        b.indices = None;
        return Ok((b, RejectionStats::default()));
    }
    let (points, stats) = sample_vs_d_points(oracle, opts, rng)?;
    let vs_d = batch_from_points(oracle, points, Scheme::VsD, rng);
    if k == d {
        return Ok((vs_d, stats));
    }
    let rest = sample_iid(oracle, k - d, rng);
    Ok((compose_vs_k(&vs_d, &rest, rng)?, stats))
}

/// Bounded continuous designs use rejection; everything else must offer an
/// exact leverage sampler.
fn default_lev_method(oracle: &dyn DesignOracle) -> LevMethod {
    if oracle.leverage_bound().is_some() && oracle.as_finite().is_none() {
        LevMethod::Rejection { bound: None }
    } else {
        LevMethod::Exact
    }
}

/// `VS^d` by determinantal rejection, choosing the leverage sampler that
/// matches `opts.sigma_hat`.
fn sample_vs_d_points<R: Rng>(
    oracle: &dyn DesignOracle,
    opts: &VsOptions,
    rng: &mut R,
) -> Result<(Vec<Point>, RejectionStats)> {
    let d = oracle.dim();
    let sigma = oracle.second_moment().ok_or(Error::MethodUnavailable(
        "rejection sampler needs the second moment",
    ))?;
    let t = opts
        .pool_size
        .unwrap_or_else(|| default_pool_size(d))
        .max(d);
    let exact = LeverageFunction::new(&sigma)?;
    let base = default_lev_method(oracle);
    let mut lev_stats = LevRejectionStats::default();
    match &opts.sigma_hat {
        None => det_rejection(
            &sigma,
            t,
            |r: &mut R| draw_leverage_point(oracle, &exact, base, &mut lev_stats, r),
            rng,
        ),
        Some(sigma_hat) => {
            let approx = LeverageFunction::new(sigma_hat)?;
            if let Some(fd) = oracle.as_finite() {
                let w: Vec<f64> = (0..fd.n()).map(|i| approx.eval(fd.x().row(i))).collect();
                let table = WeightedIndex::new(w).map_err(|_| Error::Degenerate)?;
                return det_rejection(
                    sigma_hat,
                    t,
                    |r: &mut R| {
                        let i = table.sample(r);
                        Ok(Point::atom(fd.x().row(i).into(), i))
                    },
                    rng,
                );
            }
            // Thin exact leverage draws by l̂/l, which is at most 1/μ_min.
            let (mu_min, _) = relative_spectrum(&sigma, sigma_hat)?;
            let cap = 1.0 / mu_min;
            det_rejection(
                sigma_hat,
                t,
                |r: &mut R| loop {
                    let p = draw_leverage_point(oracle, &exact, base, &mut lev_stats, r)?;
                    let ratio = approx.eval(&p.x) / exact.eval(&p.x);
                    if r.random::<f64>() * cap < ratio {
                        return Ok(p);
                    }
                },
                rng,
            )
        }
    }
}

/// Leveraged volume sampling of a general design: `VS^d` rows plus `k - d`
/// leverage-sampled rows, every row tagged with `l(x) = xᵀΣ⁻¹x`.
pub fn sample_leveraged_volume<R: Rng>(
    oracle: &dyn DesignOracle,
    k: usize,
    opts: &VsOptions,
    rng: &mut R,
) -> Result<(SampleBatch, RejectionStats)> {
    let d = oracle.dim();
    if k < d {
        return Err(Error::InvalidArgument("k must be at least d"));
    }
    let lev = LeverageFunction::for_oracle(oracle)?;
    let (mut vs_d, stats) = sample_vs_k_with(oracle, d, opts, rng)?;
    vs_d.leverages = Some((0..d).map(|i| lev.eval(vs_d.x.row(i))).collect());
    let method = default_lev_method(oracle);
    let (rest, _) = if k > d {
        crate::leverage::sample_lev_oracle(oracle, k - d, method, rng)?
    } else {
        (empty_lev_batch(d), LevRejectionStats::default())
    };
    let mut out = compose_vs_k(&vs_d, &rest, rng)?;
    out.scheme = Scheme::LeveragedVolume;
    Ok((out, stats))
}

fn empty_lev_batch(d: usize) -> SampleBatch {
    let mut b = SampleBatch::new(Matrix::zeros(0, d), Scheme::Lev);
    b.y = Some(Vector::zeros(0));
    b.leverages = Some(Vector::zeros(0));
    b.indices = Some(Vec::new());
    b
}

/// Leveraged volume sampling of a finite design driven by a (possibly
/// approximate) leverage profile. A sketched profile also supplies the
/// `Σ̂` for the rejection step.
pub fn sample_leveraged_volume_finite<R: Rng>(
    fd: &FiniteDesign,
    profile: &LeverageProfile,
    k: usize,
    rng: &mut R,
) -> Result<(SampleBatch, RejectionStats)> {
    let d = fd.x().cols();
    if k < d {
        return Err(Error::InvalidArgument("k must be at least d"));
    }
    if profile.scores().len() != fd.n() {
        return Err(Error::DimensionMismatch {
            expected: fd.n(),
            found: profile.scores().len(),
        });
    }
    let opts = VsOptions {
        method: VsMethod::Rejection,
        pool_size: None,
        sigma_hat: match profile.kind() {
            ProfileKind::Sketched { .. } => profile.sigma_hat().cloned(),
            _ => None,
        },
    };
    let (points, stats) = sample_vs_d_points(fd, &opts, rng)?;
    let mut vs_d = batch_from_points(fd, points, Scheme::VsD, rng);
    let keys: Vec<usize> = vs_d.atom_keys().ok_or(Error::Degenerate)?;
    vs_d.leverages = Some(keys.iter().map(|&i| profile.scores()[i]).collect());
    let rest = if k > d {
        crate::leverage::sample_lev(fd, profile, k - d, rng)?
    } else {
        empty_lev_batch(d)
    };
    let mut out = compose_vs_k(&vs_d, &rest, rng)?;
    out.scheme = Scheme::LeveragedVolume;
    Ok((out, stats))
}

/// Discrete volume sampling of `k` distinct rows of a finite design
/// (without replacement).
pub fn sample_discrete_volume<R: Rng>(
    fd: &FiniteDesign,
    k: usize,
    rng: &mut R,
) -> Result<SampleBatch> {
    let idx = reverse_iterative(fd.x(), k, rng)?;
    let mut b = SampleBatch::new(fd.x().select_rows(&idx), Scheme::VsDiscrete);
    b.y = Some(idx.iter().map(|&i| fd.y()[i]).collect());
    b.indices = Some(idx.into_iter().map(Some).collect());
    Ok(b)
}
