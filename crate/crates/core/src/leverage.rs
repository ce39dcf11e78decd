//! Leverage scores, leverage-score sampling and the `1/sqrt(l)` rescaling.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;

use crate::batch::{SampleBatch, Scheme};
use crate::design::{DesignOracle, FiniteDesign, Point};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, CholeskyFactor, Matrix, Vector};
use crate::math;

/// Rows audited against exact scores after sketching.
pub const AUDIT_ROWS: usize = 100;
/// Accepted range of sketched/exact ratios.
pub const AUDIT_BAND: (f64, f64) = (0.5, 1.5);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind {
    Exact,
    /// Observed ratio range `[lo, hi]` of approximate to exact scores on
    /// the audited rows.
    Sketched {
        lo: f64,
        hi: f64,
    },
    /// Exact scores multiplied by independent factors in `[lo, hi]`.
    Perturbed {
        lo: f64,
        hi: f64,
    },
}

/// Per-row leverage values of a finite design, scaled so the exact
/// profile averages to `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageProfile {
    scores: Vector,
    total: f64,
    kind: ProfileKind,
    sigma_hat: Option<Matrix>,
}

impl LeverageProfile {
    pub fn from_scores(scores: Vector, kind: ProfileKind) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument(
                "leverage scores must be finite and nonnegative",
            ));
        }
        let total = scores.iter().sum();
        Ok(LeverageProfile {
            scores,
            total,
            kind,
            sigma_hat: None,
        })
    }

    pub fn scores(&self) -> &Vector {
        &self.scores
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// The second-moment approximation the scores were computed from, for
    /// sketched profiles: `score_i = x_iᵀ Σ̂⁻¹ x_i`.
    pub fn sigma_hat(&self) -> Option<&Matrix> {
        self.sigma_hat.as_ref()
    }

    /// Multiplies each score by an independent uniform factor in `[lo, hi]`.
    pub fn perturbed<R: Rng>(&self, lo: f64, hi: f64, rng: &mut R) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidArgument(
                "perturbation range must satisfy 0 < lo <= hi",
            ));
        }
        let scores = self
            .scores
            .iter()
            .map(|s| s * rng.random_range(lo..=hi))
            .collect();
        Self::from_scores(scores, ProfileKind::Perturbed { lo, hi })
    }
}

/// `score_i = n · x_iᵀ(XᵀX)⁻¹x_i`.
pub fn exact_scores(fd: &FiniteDesign) -> Result<LeverageProfile> {
    let scores = fd.leverages().ok_or(Error::RankDeficient)?.clone();
    LeverageProfile::from_scores(scores, ProfileKind::Exact)
}

/// Scores from a dense Rademacher sketch `S X` with `sketch_rows` rows,
/// followed by an audit of up to [`AUDIT_ROWS`] random rows against exact
/// scores.
pub fn sketched_scores<R: Rng>(
    fd: &FiniteDesign,
    sketch_rows: usize,
    rng: &mut R,
) -> Result<LeverageProfile> {
    let (n, d) = (fd.n(), fd.x().cols());
    if sketch_rows < d {
        return Err(Error::InvalidArgument("sketch needs at least d rows"));
    }
    let exact = fd.gram_cholesky().ok_or(Error::RankDeficient)?;
    let x = fd.x();
    let scale = 1.0 / math::sqrt(sketch_rows as f64);
    let mut sx = Matrix::zeros(sketch_rows, d);
    for i in 0..n {
        let row = x.row(i);
        for r in 0..sketch_rows {
            let s = if rng.random::<bool>() { scale } else { -scale };
            for (dst, v) in sx.row_mut(r).iter_mut().zip(row) {
                *dst += s * v;
            }
        }
    }
    let sketched_gram = sx.gram();
    let chol = match cholesky(&sketched_gram) {
        Ok(c) => c,
        Err(_) => return Err(Error::SketchTooCoarse { ratio: 0.0 }),
    };
    let nf = n as f64;
    let scores: Vector = (0..n).map(|i| nf * chol.inv_quad_form(x.row(i))).collect();

    let audit = index::sample(rng, n, AUDIT_ROWS.min(n));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in audit.iter() {
        let truth = nf * exact.inv_quad_form(x.row(i));
        if truth <= 1e-12 * d as f64 {
            continue;
        }
        let ratio = scores[i] / truth;
        if !(AUDIT_BAND.0..=AUDIT_BAND.1).contains(&ratio) {
            return Err(Error::SketchTooCoarse { ratio });
        }
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let mut profile = LeverageProfile::from_scores(scores, ProfileKind::Sketched { lo, hi })?;
    profile.sigma_hat = Some(sketched_gram.scaled(1.0 / nf));
    Ok(profile)
}

/// Default sketch size `40 d ⌈ln d⌉` (at least `4d`).
pub fn default_sketch_rows(d: usize) -> usize {
    let log = math::ceil(math::ln(d as f64)).max(1.0) as usize;
    (40 * d * log).max(4 * d)
}

/// `k` i.i.d. rows drawn with probability proportional to `profile`.
pub fn sample_lev<R: Rng>(
    fd: &FiniteDesign,
    profile: &LeverageProfile,
    k: usize,
    rng: &mut R,
) -> Result<SampleBatch> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive"));
    }
    if profile.scores.len() != fd.n() {
        return Err(Error::DimensionMismatch {
            expected: fd.n(),
            found: profile.scores.len(),
        });
    }
    let table =
        WeightedIndex::new(profile.scores.iter().copied()).map_err(|_| Error::Degenerate)?;
    let idx: Vec<usize> = (0..k).map(|_| table.sample(rng)).collect();
    let mut batch = SampleBatch::new(fd.x().select_rows(&idx), Scheme::Lev);
    batch.y = Some(idx.iter().map(|&i| fd.y()[i]).collect());
    batch.leverages = Some(idx.iter().map(|&i| profile.scores[i]).collect());
    batch.indices = Some(idx.into_iter().map(Some).collect());
    Ok(batch)
}

/// `l(x) = xᵀ Σ⁻¹ x` for a fixed SPD `Σ`.
#[derive(Clone, Debug)]
pub struct LeverageFunction {
    chol: CholeskyFactor,
}

impl LeverageFunction {
    pub fn new(sigma: &Matrix) -> Result<Self> {
        Ok(LeverageFunction {
            chol: cholesky(sigma)?,
        })
    }

    pub fn for_oracle(oracle: &dyn DesignOracle) -> Result<Self> {
        let sigma = oracle
            .second_moment()
            .ok_or(Error::MethodUnavailable("design exposes no second moment"))?;
        Self::new(&sigma)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.chol.inv_quad_form(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevMethod {
    /// Use the design's exact leverage sampler.
    Exact,
    /// Rejection from the design, accepting with probability `l(x)/K`.
    /// `None` falls back to the design's own bound.
    Rejection { bound: Option<f64> },
}

/// Counts from rejection-based leverage sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LevRejectionStats {
    pub proposals: u64,
    pub accepted: u64,
}

/// One draw from leverage-score sampling of a general design.
pub fn draw_leverage_point<R: Rng>(
    oracle: &dyn DesignOracle,
    lev: &LeverageFunction,
    method: LevMethod,
    stats: &mut LevRejectionStats,
    rng: &mut R,
) -> Result<Point> {
    match method {
        LevMethod::Exact => {
            stats.proposals += 1;
            stats.accepted += 1;
            oracle
                .draw_leverage_point(rng)
                .ok_or(Error::MethodUnavailable("no exact leverage sampler"))
        }
        LevMethod::Rejection { bound } => {
            let k = bound
                .or_else(|| oracle.leverage_bound())
                .ok_or(Error::MissingBound)?;
            loop {
                let p = oracle.draw_point(rng);
                let l = lev.eval(&p.x);
                stats.proposals += 1;
                if l > k * (1.0 + 1e-9) {
                    return Err(Error::LeverageBoundExceeded {
                        leverage: l,
                        bound: k,
                    });
                }
                if rng.random::<f64>() * k < l {
                    stats.accepted += 1;
                    return Ok(p);
                }
            }
        }
    }
}

/// `k` i.i.d. leverage-sampled rows of a general design, with responses and
/// the leverages used.
pub fn sample_lev_oracle<R: Rng>(
    oracle: &dyn DesignOracle,
    k: usize,
    method: LevMethod,
    rng: &mut R,
) -> Result<(SampleBatch, LevRejectionStats)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive"));
    }
    let lev = LeverageFunction::for_oracle(oracle)?;
    let mut stats = LevRejectionStats::default();
    let mut rows = Vec::with_capacity(k);
    let mut y = Vec::with_capacity(k);
    let mut l = Vec::with_capacity(k);
    let mut idx = Vec::with_capacity(k);
    for _ in 0..k {
        let p = draw_leverage_point(oracle, &lev, method, &mut stats, rng)?;
        y.push(oracle.response(&p, rng));
        l.push(lev.eval(&p.x));
        idx.push(p.index);
        rows.push(p.x);
    }
    let mut batch = SampleBatch::new(Matrix::from_rows(&rows), Scheme::Lev);
    batch.y = Some(y.into());
    batch.leverages = Some(l.into());
    batch.indices = Some(idx);
    Ok((batch, stats))
}

/// `(P X, P y)` with `P = diag(1/sqrt(l_i))`.
pub fn rescale(batch: &SampleBatch) -> Result<(Matrix, Vector)> {
    let y = batch.y.as_ref().ok_or(Error::MissingResponses)?;
    let lev = batch.leverages.as_ref().ok_or(Error::MissingLeverages)?;
    if lev.len() != batch.k() {
        return Err(Error::DimensionMismatch {
            expected: batch.k(),
            found: lev.len(),
        });
    }
    let mut p = Vec::with_capacity(lev.len());
    for (row, l) in lev.iter().enumerate() {
        if !(*l > 0.0) || !l.is_finite() {
            return Err(Error::ZeroLeverageRow { row });
        }
        p.push(1.0 / math::sqrt(*l));
    }
    let py = y.iter().zip(&p).map(|(v, s)| v * s).collect();
    Ok((batch.x.scale_rows(&p), py))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::OneHotCubicDesign;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_score_examples() {
        let fd = FiniteDesign::from_matrix(Matrix::identity(3)).unwrap();
        let p = exact_scores(&fd).unwrap();
        assert!(p.scores().iter().all(|s| (s - 3.0).abs() < 1e-12));

        let fd = FiniteDesign::from_matrix(Matrix::from_rows(&[[1.0], [2.0]])).unwrap();
        let p = exact_scores(&fd).unwrap();
        assert_abs_diff_eq!(p.scores()[0], 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(p.scores()[1], 1.6, epsilon = 1e-14);
        assert_abs_diff_eq!(p.total() / 2.0, 1.0, epsilon = 1e-14);

        // Orthogonal columns with equal row norms.
        let h = Matrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]);
        let p = exact_scores(&FiniteDesign::from_matrix(h).unwrap()).unwrap();
        assert!(p.scores().iter().all(|s| (s - 2.0).abs() < 1e-12));
    }

    #[test]
    fn sketch_identity_and_coarse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fd = FiniteDesign::from_matrix(Matrix::identity(4)).unwrap();
        match sketched_scores(&fd, 400, &mut rng) {
            Ok(p) => assert!(p.scores().iter().all(|s| (2.0..=6.0).contains(s))),
            Err(e) => assert!(matches!(e, Error::SketchTooCoarse { .. })),
        }

        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let fd = FiniteDesign::from_matrix(Matrix::from_rows(&rows)).unwrap();
        let coarse = (0..20)
            .filter(|_| {
                matches!(
                    sketched_scores(&fd, 6, &mut rng),
                    Err(Error::SketchTooCoarse { .. })
                )
            })
            .count();
        assert_eq!(coarse, 20);
        assert!(sketched_scores(&fd, 5, &mut rng).is_err());
    }

    #[test]
    fn rescale_examples() {
        let mut b = SampleBatch::new(Matrix::from_rows(&[[2.0, 4.0]]), Scheme::Lev);
        b.y = Some(vec![8.0].into());
        b.leverages = Some(vec![4.0].into());
        let (x, y) = rescale(&b).unwrap();
        assert_eq!(x.row(0), &[1.0, 2.0]);
        assert_eq!(y[0], 4.0);

        b.leverages = Some(vec![0.0].into());
        assert_eq!(rescale(&b), Err(Error::ZeroLeverageRow { row: 0 }));
        b.leverages = None;
        assert_eq!(rescale(&b), Err(Error::MissingLeverages));
        b.y = None;
        assert_eq!(rescale(&b), Err(Error::MissingResponses));
    }

    #[test]
    fn oracle_rejection_needs_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let o = OneHotCubicDesign::new(2).unwrap();
        let r = sample_lev_oracle(&o, 3, LevMethod::Rejection { bound: None }, &mut rng);
        assert!(matches!(r, Err(Error::MissingBound)));
        let (b, _) = sample_lev_oracle(&o, 3, LevMethod::Exact, &mut rng).unwrap();
        assert_eq!(b.k(), 3);
        // A bound that is too small is detected instead of silently biasing.
        let r = sample_lev_oracle(
            &o,
            500,
            LevMethod::Rejection { bound: Some(0.01) },
            &mut rng,
        );
        assert!(matches!(r, Err(Error::LeverageBoundExceeded { .. })));
    }

    #[test]
    fn lev_frequencies_on_two_point_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fd = FiniteDesign::from_matrix(Matrix::from_rows(&[[1.0], [2.0]])).unwrap();
        let p = exact_scores(&fd).unwrap();
        let b = sample_lev(&fd, &p, 100_000, &mut rng).unwrap();
        let second = b.atom_keys().unwrap().iter().filter(|&&i| i == 1).count() as f64 / 1e5;
        let se = (0.8f64 * 0.2 / 1e5).sqrt();
        assert!((second - 0.8).abs() < 3.0 * se, "{second}");
    }
}
