//! Monte Carlo verification harness.
//!
//! Every check simulates one expectation identity and compares the result
//! with a closed form or an exhaustive enumeration. The only simulation
//! against simulation comparison is `conditional_equality`, a two-sample KS
//! test. Checks are pure functions of `(name, budget, master seed)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::design::{
    bias_prediction, finite_optimum, CubicGaussianDesign, DesignOracle, FiniteDesign,
    GaussianDesign, LinearResponse, OneHotCubicDesign, ScaledBasisDesign, UniformBoxDesign,
};
use crate::dist::{tv_distance, DistTable};
use crate::error::{Error, Result};
use crate::estimator::{least_squares, leveraged_volume_estimator};
use crate::leverage::exact_scores;
use crate::linalg::{
    self, adjugate, cholesky, det, falling_factorial, inverse, pseudoinverse, Matrix, Vector,
};
use crate::math;
use crate::rng::{derive_rng, SeedTrace};
use crate::sampler::{
    brute_force_vs, compose_vs_k, decompose_vs_k, gaussian_vs, sample_iid,
    sample_leveraged_volume_finite, sample_vs_k, sample_vs_k_with, RejectionStats, VsMethod,
    VsOptions,
};
use crate::stats::{ks_critical_1pct, ks_statistic, RunningStats, VecStats};
use crate::SampleBatch;

/// Smallest accepted trial budget.
pub const MIN_TRIALS: usize = 1000;

/// Registered checks with their trial budgets at scale 1.
pub const CHECKS: [(&str, usize); 16] = [
    ("det_identity", 1_000_000),
    ("adj_identity", 1_000_000),
    ("composition_tv", 100_000),
    ("marginal_mixture", 100_000),
    ("joint_marginal", 100_000),
    ("pinv_expectation", 200_000),
    ("inv_cov", 200_000),
    ("unbiasedness", 100_000),
    ("variance_formula", 200_000),
    ("bias_formula", 1_000_000),
    ("lower_bound_event", 100_000),
    ("wishart_moment", 100_000),
    ("acceptance_rate", 100_000),
    ("pinv_decomposition", 1_000),
    ("conditional_equality", 100_000),
    ("approx_lev_unbiasedness", 100_000),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// How an entry's estimate is judged against its target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule {
    /// `|estimate - target| <= max(ci_halfwidth, floor)`.
    Within { floor: f64 },
    /// `estimate <= target`.
    AtMost,
    /// `estimate >= target`.
    AtLeast,
}

/// One scalar comparison inside a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub label: String,
    pub estimate: f64,
    pub target: f64,
    pub ci_halfwidth: f64,
    pub rule: Rule,
}

impl Entry {
    pub fn within(
        label: impl Into<String>,
        estimate: f64,
        std_err: f64,
        target: f64,
        z: f64,
        floor: f64,
    ) -> Self {
        Entry {
            label: label.into(),
            estimate,
            target,
            ci_halfwidth: z * std_err,
            rule: Rule::Within { floor },
        }
    }

    pub fn at_most(label: impl Into<String>, estimate: f64, threshold: f64) -> Self {
        Entry {
            label: label.into(),
            estimate,
            target: threshold,
            ci_halfwidth: 0.0,
            rule: Rule::AtMost,
        }
    }

    pub fn at_least(label: impl Into<String>, estimate: f64, threshold: f64) -> Self {
        Entry {
            label: label.into(),
            estimate,
            target: threshold,
            ci_halfwidth: 0.0,
            rule: Rule::AtLeast,
        }
    }

    /// `None` when the estimate is not finite.
    pub fn passes(&self) -> Option<bool> {
        if !self.estimate.is_finite() {
            return None;
        }
        Some(match self.rule {
            Rule::Within { floor } => {
                math::abs(self.estimate - self.target) <= self.ci_halfwidth.max(floor)
            }
            Rule::AtMost => self.estimate <= self.target,
            Rule::AtLeast => self.estimate >= self.target,
        })
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub check: String,
    pub entries: Vec<Entry>,
    pub trials: usize,
    pub verdict: Verdict,
    pub seed: SeedTrace,
    pub note: Option<&'static str>,
}

impl McReport {
    pub fn new(
        check: &str,
        entries: Vec<Entry>,
        trials: usize,
        seed: SeedTrace,
        note: Option<&'static str>,
    ) -> Self {
        let outcomes: Vec<Option<bool>> = entries.iter().map(Entry::passes).collect();
        let verdict = if outcomes.contains(&Some(false)) {
            Verdict::Fail
        } else if outcomes.iter().any(Option::is_none) || outcomes.is_empty() {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        McReport {
            check: check.into(),
            entries,
            trials,
            verdict,
            seed,
            note,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn entry(&self, label: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

fn list(f: &mut fmt::Formatter<'_>, key: &str, items: impl Iterator<Item = String>) -> fmt::Result {
    write!(f, " {key}=[")?;
    for (i, s) in items.enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str(&s)?;
    }
    f.write_str("]")
}

/// A single line: `name=… verdict=… trials=… seed=… labels=[…]
/// estimate=[…] target=[…] ci=[…]`.
impl fmt::Display for McReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "name={} verdict={} trials={} seed={}:{:016x}",
            self.check, self.verdict, self.trials, self.seed.master, self.seed.stream
        )?;
        list(f, "labels", self.entries.iter().map(|e| e.label.clone()))?;
        list(
            f,
            "estimate",
            self.entries.iter().map(|e| format!("{:e}", e.estimate)),
        )?;
        list(
            f,
            "target",
            self.entries.iter().map(|e| format!("{:e}", e.target)),
        )?;
        list(
            f,
            "ci",
            self.entries.iter().map(|e| format!("{:e}", e.ci_halfwidth)),
        )?;
        list(
            f,
            "rule",
            self.entries.iter().map(|e| match e.rule {
                Rule::Within { floor } => format!("within:{floor:e}"),
                Rule::AtMost => "at_most".into(),
                Rule::AtLeast => "at_least".into(),
            }),
        )?;
        if let Some(note) = self.note {
            write!(f, " note=\"{note}\"")?;
        }
        Ok(())
    }
}

/// Deliberate defects for mutation testing of the harness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Drop the `(-1)^{i+j}` cofactor sign inside the adjugate.
    pub adjugate_sign: bool,
}

impl Faults {
    pub fn adjugate(&self, a: &Matrix) -> Matrix {
        let mut adj = adjugate(a);
        if self.adjugate_sign {
            for i in 0..adj.rows() {
                for j in 0..adj.cols() {
                    if (i + j) % 2 == 1 {
                        adj[(i, j)] = -adj[(i, j)];
                    }
                }
            }
        }
        adj
    }
}

/// Per-entry z making the family-wise false-failure rate of `entries`
/// two-sided comparisons at most 0.3%; never below 3.
pub fn z_threshold(entries: usize) -> f64 {
    let alpha = 0.003 / entries.max(1) as f64;
    let (mut lo, mut hi) = (0.0, 12.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if math::erfc(mid / core::f64::consts::SQRT_2) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(3.0)
}

/// Registered names containing `filter` (all of them for `None`).
pub fn matching_checks(filter: Option<&str>) -> Vec<&'static str> {
    CHECKS
        .iter()
        .map(|(n, _)| *n)
        .filter(|n| filter.is_none_or(|p| n.contains(p)))
        .collect()
}

/// Trial count for `name` at `budget_scale`.
pub fn scaled_trials(name: &str, budget_scale: f64) -> Result<usize> {
    let base = CHECKS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownCheck(name.into()))?;
    if !(budget_scale > 0.0) || !budget_scale.is_finite() {
        return Err(Error::InvalidArgument(
            "budget scale must be positive and finite",
        ));
    }
    let trials = math::ceil(base as f64 * budget_scale) as usize;
    if trials < MIN_TRIALS {
        return Err(Error::BudgetTooSmall {
            trials,
            minimum: MIN_TRIALS,
        });
    }
    Ok(trials)
}

/// Runs one registered check with its own RNG stream derived from
/// `(master_seed, name)`.
pub fn check(name: &str, budget_scale: f64, master_seed: u64, faults: &Faults) -> Result<McReport> {
    let trials = scaled_trials(name, budget_scale)?;
    let (mut rng, seed) = derive_rng(master_seed, name, 0);
    let r = &mut rng;
    let (entries, note) = match name {
        "det_identity" => (det_identity(&[2, 3, 4], trials, r)?, None),
        "adj_identity" => (adj_identity(&[2, 3, 4], trials, faults, r)?, None),
        "composition_tv" => (composition_tv(trials, r)?, None),
        "marginal_mixture" => (marginal_mixture(trials, r)?, None),
        "joint_marginal" => (joint_marginal(trials, r)?, None),
        "pinv_expectation" => (pinv_expectation(trials, r)?, None),
        "inv_cov" => (
            inv_cov(trials, r)?,
            Some("equality on a continuous bounded design; inequality on a finite design"),
        ),
        "unbiasedness" => (unbiasedness(trials, r)?, None),
        "variance_formula" => (
            variance_formula(trials, r)?,
            Some("continuous bounded design"),
        ),
        "bias_formula" => (bias_formula(5, 10, trials, r)?, None),
        "lower_bound_event" => (lower_bound_event(2, &[2, 4, 8], trials, r)?, None),
        "wishart_moment" => (wishart_moment(3, trials, r)?, None),
        "acceptance_rate" => (
            acceptance_rate(&[2, 5], (trials / 50).max(MIN_TRIALS), trials, r)?,
            None,
        ),
        "pinv_decomposition" => (
            pinv_decomposition(trials, r)?,
            Some("deterministic identity"),
        ),
        "conditional_equality" => (
            conditional_equality(trials, r)?,
            Some("two-sample KS; exact conditioning replaced by a 10% determinant band"),
        ),
        "approx_lev_unbiasedness" => (approx_lev_unbiasedness(trials, r)?, None),
        _ => return Err(Error::UnknownCheck(name.into())),
    };
    Ok(McReport::new(name, entries, trials, seed, note))
}

/// Runs the checks matching `filter` one after another.
pub fn run_suite(
    filter: Option<&str>,
    budget_scale: f64,
    master_seed: u64,
    faults: &Faults,
) -> Result<Vec<McReport>> {
    if !(budget_scale > 0.0) || !budget_scale.is_finite() {
        return Err(Error::InvalidArgument(
            "budget scale must be positive and finite",
        ));
    }
    matching_checks(filter)
        .into_iter()
        .map(|n| check(n, budget_scale, master_seed, faults))
        .collect()
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// `k` i.i.d. `N(0, LLᵀ)` rows.
fn gaussian_rows<R: Rng>(k: usize, lower: &Matrix, rng: &mut R) -> Matrix {
    Matrix::from_fn(k, lower.rows(), |_, _| normal(rng)).matmul(&lower.transpose())
}

fn sigma2() -> Matrix {
    Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]])
}

/// `Σ_ij = 0.5^|i-j|`.
fn ar1(d: usize) -> Matrix {
    Matrix::from_fn(d, d, |i, j| math::powi(0.5, i.abs_diff(j) as i32))
}

fn keys(b: &SampleBatch) -> Result<Vec<usize>> {
    b.atom_keys().ok_or(Error::Degenerate)
}

fn uniform_table(n: usize) -> Result<DistTable<usize>> {
    DistTable::from_weights((0..n).map(|i| (i, 1.0)))
}

/// `k^d·E[det(AᵀA)] / (k^{d falling}·det(E[AᵀA]))` for Gaussian `A`; target 1.
pub fn det_identity<R: Rng>(ks: &[usize], trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let sigma = sigma2();
    let d = sigma.rows();
    let l = cholesky(&sigma)?;
    let z = z_threshold(ks.len());
    let mut out = Vec::new();
    for &k in ks {
        let mut s = RunningStats::new();
        for _ in 0..trials {
            s.push(det(&gaussian_rows(k, l.lower(), rng).gram()));
        }
        // k^d cancels against det(kΣ) = k^d det Σ.
        let norm = falling_factorial(k, d) * det(&sigma);
        out.push(Entry::within(
            format!("k{k}"),
            s.mean() / norm,
            s.std_err() / norm,
            1.0,
            z,
            0.02,
        ));
    }
    Ok(out)
}

/// Entrywise `E[adj(AᵀA)]` against `k^{d-1 falling}/k^{d-1}·det(E)·E⁻¹`
/// with `E = kΣ`.
pub fn adj_identity<R: Rng>(
    ks: &[usize],
    trials: usize,
    faults: &Faults,
    rng: &mut R,
) -> Result<Vec<Entry>> {
    let sigma = sigma2();
    let d = sigma.rows();
    let l = cholesky(&sigma)?;
    let z = z_threshold(ks.len() * d * d);
    let mut out = Vec::new();
    for &k in ks {
        let mut s = VecStats::new(d * d);
        for _ in 0..trials {
            s.push(
                faults
                    .adjugate(&gaussian_rows(k, l.lower(), rng).gram())
                    .data(),
            );
        }
        let e = sigma.scaled(k as f64);
        let c = falling_factorial(k, d - 1) / math::powi(k as f64, d as i32 - 1);
        let target = inverse(&e)?.scaled(c * det(&e));
        for (idx, cell) in s.cells().iter().enumerate() {
            let t = target.data()[idx];
            out.push(Entry::within(
                format!("k{k}[{}{}]", idx / d, idx % d),
                cell.mean(),
                cell.std_err(),
                t,
                z,
                0.02 * math::abs(t),
            ));
        }
    }
    Ok(out)
}

/// Composition of `VS^1` with an i.i.d. row on three atoms, and the
/// decompose/compose round trip, against the enumerated `VS^2` table.
pub fn composition_tv<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let fd = FiniteDesign::new(
        Matrix::from_rows(&[[1.0], [2.0], [3.0]]),
        Vector::from(&[0.5, -1.0, 2.0][..]),
    )?;
    let exact = brute_force_vs(&fd, 2)?;
    let mut composed = Vec::with_capacity(trials);
    let mut round = Vec::with_capacity(trials);
    for _ in 0..trials {
        let vs = sample_vs_k(&fd, 1, VsMethod::Rejection, rng)?;
        let iid = sample_iid(&fd, 1, rng);
        let b = compose_vs_k(&vs, &iid, rng)?;
        composed.push(keys(&b)?);
        let (v, rest) = decompose_vs_k(&b, rng)?;
        round.push(keys(&compose_vs_k(&v, &rest, rng)?)?);
    }
    Ok(alloc::vec![
        Entry::at_most(
            "composed",
            tv_distance(&DistTable::from_samples(composed)?, &exact),
            0.02
        ),
        Entry::at_most(
            "round_trip",
            tv_distance(&DistTable::from_samples(round)?, &exact),
            0.02
        ),
    ])
}

fn four_atoms() -> Matrix {
    Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]])
}

/// Law of one row of `VS^4` on four atoms in the plane against
/// `(d/k)·Lev + (1 - d/k)·D`.
pub fn marginal_mixture<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let (d, k) = (2, 4);
    let fd = FiniteDesign::from_matrix(four_atoms())?;
    let lev = exact_scores(&fd)?;
    let lev_table = DistTable::from_weights(lev.scores().iter().copied().enumerate())?;
    let target = lev_table.mix(d as f64 / k as f64, &uniform_table(fd.n())?);
    let mut rows = Vec::with_capacity(trials);
    for _ in 0..trials {
        let b = sample_vs_k(&fd, k, VsMethod::Rejection, rng)?;
        rows.push(keys(&b)?[0]);
    }
    Ok(alloc::vec![Entry::at_most(
        "tv",
        tv_distance(&DistTable::from_samples(rows)?, &target),
        0.02
    )])
}

/// Pair law of the first two rows of `VS^d` against
/// `det(X_T Σ⁻¹ X_Tᵀ) / (n² d(d-1))`, for `d = 2` and `d = 3`.
pub fn joint_marginal<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let designs = [
        four_atoms(),
        Matrix::from_rows(&[
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
            [0.5, -1.0, 1.0],
        ]),
    ];
    let mut out = Vec::new();
    for x in designs {
        let (n, d) = (x.rows(), x.cols());
        let fd = FiniteDesign::from_matrix(x.clone())?;
        let sigma_inv = inverse(&fd.second_moment().ok_or(Error::RankDeficient)?)?;
        let mut weights = Vec::new();
        let mut mass = 0.0;
        for i in 0..n {
            for j in 0..n {
                let xt = x.select_rows(&[i, j]);
                let w = det(&xt.matmul(&sigma_inv).matmul(&xt.transpose()))
                    / ((n * n) as f64 * falling_factorial(d, 2));
                mass += w;
                weights.push((alloc::vec![i, j], w.max(0.0)));
            }
        }
        let exact = DistTable::from_weights(weights)?;
        let mut pairs = Vec::with_capacity(trials);
        for _ in 0..trials {
            let b = sample_vs_k(&fd, d, VsMethod::Rejection, rng)?;
            let kk = keys(&b)?;
            pairs.push(alloc::vec![kk[0], kk[1]]);
        }
        out.push(Entry::within(
            format!("d{d}_mass"),
            mass,
            0.0,
            1.0,
            0.0,
            1e-10,
        ));
        out.push(Entry::at_most(
            format!("d{d}_tv"),
            tv_distance(&DistTable::from_samples(pairs)?, &exact),
            0.03,
        ));
    }
    Ok(out)
}

fn asymmetric_design() -> Result<FiniteDesign> {
    FiniteDesign::from_matrix(Matrix::from_rows(&[
        [1.0, 0.2],
        [0.3, 1.0],
        [1.5, 1.0],
        [2.0, -0.5],
        [0.5, 0.8],
    ]))
}

/// `E[X̄†]` over `VS^3` against `(kΣ)⁻¹ μ 1ᵀ` on a design with nonzero mean.
pub fn pinv_expectation<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let k = 3;
    let fd = asymmetric_design()?;
    let d = fd.x().cols();
    let sigma = fd.second_moment().ok_or(Error::RankDeficient)?;
    let mu: Vector = (0..d)
        .map(|j| fd.x().col(j).iter().sum::<f64>() / fd.n() as f64)
        .collect();
    let col = inverse(&sigma.scaled(k as f64))?.mul_vec(&mu);
    let mut s = VecStats::new(d * k);
    for _ in 0..trials {
        let b = sample_vs_k(&fd, k, VsMethod::Rejection, rng)?;
        s.push(pseudoinverse(&b.x).data());
    }
    let z = z_threshold(d * k);
    Ok(s.cells()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let t = col[idx / k];
            Entry::within(
                format!("[{}{}]", idx / k, idx % k),
                c.mean(),
                c.std_err(),
                t,
                z,
                0.03 * math::abs(t),
            )
        })
        .collect())
}

fn box_design(d: usize, noise_sd: f64) -> Result<UniformBoxDesign> {
    UniformBoxDesign::new(LinearResponse {
        w: (0..d)
            .map(|i| if i % 2 == 0 { 1.0 } else { -2.0 })
            .collect(),
        noise_sd,
    })
}

/// `E[(X̄ᵀX̄)⁻¹] = k/(k-d+1)·(kΣ)⁻¹` on a continuous design (equality), and
/// `⪯` on a finite design where i.i.d. samples can be singular.
pub fn inv_cov<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let (d, k) = (2, 4);
    let factor = k as f64 / (k - d + 1) as f64;
    let oracle = box_design(d, 0.5)?;
    let sigma = oracle.second_moment().ok_or(Error::RankDeficient)?;
    let target = inverse(&sigma.scaled(k as f64))?.scaled(factor);
    let mut s = VecStats::new(d * d);
    for _ in 0..trials {
        let b = sample_vs_k(&oracle, k, VsMethod::Rejection, rng)?;
        s.push(linalg::spd_inverse(&b.x.gram())?.data());
    }
    let z = z_threshold(d * d + 1);
    let scale = target.max_abs();
    let mut out: Vec<Entry> = s
        .cells()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            Entry::within(
                format!("box[{}{}]", idx / d, idx % d),
                c.mean(),
                c.std_err(),
                target.data()[idx],
                z,
                0.03 * scale,
            )
        })
        .collect();

    // Finite design: the gap target - mean must be PSD up to MC error.
    let kf = 3;
    let fd = FiniteDesign::from_matrix(four_atoms())?;
    let sigma = fd.second_moment().ok_or(Error::RankDeficient)?;
    let target = inverse(&sigma.scaled(kf as f64))?.scaled(kf as f64 / (kf - d + 1) as f64);
    let mut s = VecStats::new(d * d);
    for _ in 0..trials {
        let b = sample_vs_k(&fd, kf, VsMethod::Rejection, rng)?;
        s.push(linalg::spd_inverse(&b.x.gram())?.data());
    }
    let mean = Matrix::new(d, d, s.means())?;
    let gap = target.sub(&mean);
    let gap = gap.add(&gap.transpose()).scaled(0.5);
    let (vals, _) = linalg::symmetric_eigen(&gap);
    let se_frob = math::sqrt(s.std_errs().iter().map(|v| v * v).sum::<f64>());
    out.push(Entry::at_least("finite_min_eig_gap", vals[0], -z * se_frob));
    Ok(out)
}

/// Designs with known optimum used by the unbiasedness check.
fn unbiasedness_designs() -> Result<Vec<(&'static str, alloc::boxed::Box<dyn DesignOracle>)>> {
    let x = Matrix::from_rows(&[
        [1.0, 0.5],
        [-0.3, 1.0],
        [2.0, 1.0],
        [0.7, -1.2],
        [1.5, 0.2],
        [-1.0, -0.4],
    ]);
    let y = Vector::from(&[1.0, -0.5, 3.0, 0.2, 2.2, -1.5][..]);
    Ok(alloc::vec![
        (
            "finite",
            alloc::boxed::Box::new(FiniteDesign::new(x, y)?) as alloc::boxed::Box<dyn DesignOracle>
        ),
        (
            "one_hot_cubic",
            alloc::boxed::Box::new(OneHotCubicDesign::new(2)?)
        ),
        (
            "scaled_basis",
            alloc::boxed::Box::new(ScaledBasisDesign::new(2, 0.5, 0.3)?)
        ),
        (
            "cubic_gaussian",
            alloc::boxed::Box::new(CubicGaussianDesign::new(2)?)
        ),
    ])
}

/// MC mean of `X̄†ȳ` over `VS^k`, `k ∈ {d, d+1, 2d}`, against `w*`.
pub fn unbiasedness<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let designs = unbiasedness_designs()?;
    let total: usize = designs.iter().map(|(_, o)| 3 * o.dim()).sum();
    let z = z_threshold(total);
    let mut out = Vec::new();
    for (name, oracle) in &designs {
        let d = oracle.dim();
        let w_star = oracle.optimum().ok_or(Error::MissingOptimum)?;
        for k in [d, d + 1, 2 * d] {
            let mut s = VecStats::new(d);
            for _ in 0..trials {
                let b = sample_vs_k(oracle.as_ref(), k, VsMethod::Auto, rng)?;
                s.push(&least_squares(&b)?.w);
            }
            for (j, c) in s.cells().iter().enumerate() {
                out.push(Entry::within(
                    format!("{name}_k{k}[{j}]"),
                    c.mean(),
                    c.std_err(),
                    w_star[j],
                    z,
                    0.0,
                ));
            }
        }
    }
    Ok(out)
}

/// Covariance of `X̄†ȳ` over `VS^k` against `k/(k-d+1)·σ²·(kΣ)⁻¹`, as a
/// relative Frobenius error.
pub fn variance_formula<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let (d, k, noise) = (2, 4, 0.5);
    let oracle = box_design(d, noise)?;
    let sigma = oracle.second_moment().ok_or(Error::RankDeficient)?;
    let target =
        inverse(&sigma.scaled(k as f64))?.scaled(noise * noise * k as f64 / (k - d + 1) as f64);
    let mut first = VecStats::new(d);
    let mut second = VecStats::new(d * d);
    for _ in 0..trials {
        let b = sample_vs_k(&oracle, k, VsMethod::Rejection, rng)?;
        let w = least_squares(&b)?.w;
        first.push(&w);
        let outer: Vec<f64> = (0..d * d).map(|i| w[i / d] * w[i % d]).collect();
        second.push(&outer);
    }
    let m = first.means();
    let n = trials as f64;
    let cov = Matrix::from_fn(d, d, |i, j| {
        (second.means()[i * d + j] - m[i] * m[j]) * n / (n - 1.0)
    });
    let rel = cov.sub(&target).frobenius_norm() / target.frobenius_norm();
    Ok(alloc::vec![Entry::at_most("frobenius_rel", rel, 0.05)])
}

/// Plain least squares on `k` i.i.d. draws of the one-hot cubic design:
/// every coordinate of the mean is `3(1-δ)`; also the analytic loss ratio.
pub fn bias_formula<R: Rng>(d: usize, k: usize, trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let oracle = OneHotCubicDesign::new(d)?;
    let pred = bias_prediction(d, k);
    let mut s = VecStats::new(d);
    for _ in 0..trials {
        s.push(&least_squares(&sample_iid(&oracle, k, rng))?.w);
    }
    let z = z_threshold(d);
    let mut out: Vec<Entry> = s
        .cells()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            Entry::within(
                format!("w[{j}]"),
                c.mean(),
                c.std_err(),
                pred.mean_coordinate,
                z,
                0.0,
            )
        })
        .collect();
    let w_star = oracle.optimum().ok_or(Error::MissingOptimum)?;
    let shrunk = Vector::filled(d, pred.mean_coordinate);
    let ratio = oracle.loss(&shrunk).ok_or(Error::MissingOptimum)?
        / oracle.loss(&w_star).ok_or(Error::MissingOptimum)?;
    out.push(Entry::within(
        "loss_ratio",
        ratio,
        0.0,
        pred.loss_ratio,
        0.0,
        1e-10,
    ));
    Ok(out)
}

/// `Pr(L(X̄†ȳ) >= 2 L(w*))` over plain `VS^k` on the scaled-basis design
/// with the lower-bound parameters; must be at least 0.24.
pub fn lower_bound_event<R: Rng>(
    d: usize,
    ks: &[usize],
    trials: usize,
    rng: &mut R,
) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for &k in ks {
        let oracle = ScaledBasisDesign::for_lower_bound(d, k)?;
        let threshold = 2.0 * oracle.optimal_loss();
        let mut hits = 0usize;
        for _ in 0..trials {
            let b = sample_vs_k(&oracle, k, VsMethod::Rejection, rng)?;
            let w = least_squares(&b)?.w;
            if oracle.loss(&w).ok_or(Error::MissingOptimum)? >= threshold {
                hits += 1;
            }
        }
        out.push(Entry::at_least(
            format!("k{k}"),
            hits as f64 / trials as f64,
            0.24,
        ));
    }
    Ok(out)
}

/// Gaussian closed form: `MᵀM = X₂ᵀX₂` on every draw, `E[MᵀM] = (k+2)Σ`
/// within 2%, `E[det MᵀM] = (k+2)^{d falling}·det Σ` within 5%.
pub fn wishart_moment<R: Rng>(k: usize, trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let sigma = sigma2();
    let d = sigma.rows();
    let mut gram = VecStats::new(d * d);
    let mut dets = RunningStats::new();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let g = gaussian_vs(&sigma, k, rng)?;
        let mtm = g.m.gram();
        worst = worst.max(mtm.sub(&g.target_gram).max_abs() / g.target_gram.max_abs());
        gram.push(mtm.data());
        dets.push(det(&mtm));
    }
    let z = z_threshold(d * d + 1);
    let mean_target = sigma.scaled((k + 2) as f64);
    let mut out = alloc::vec![Entry::at_most("identity_rel_err", worst, 1e-8)];
    for (idx, c) in gram.cells().iter().enumerate() {
        let t = mean_target.data()[idx];
        out.push(Entry::within(
            format!("mean[{}{}]", idx / d, idx % d),
            c.mean(),
            c.std_err(),
            t,
            z,
            0.02 * math::abs(t),
        ));
    }
    let det_target = falling_factorial(k + 2, d) * det(&sigma);
    out.push(Entry::within(
        "det",
        dets.mean(),
        dets.std_err(),
        det_target,
        z,
        0.05 * det_target,
    ));
    Ok(out)
}

fn six_atoms() -> Matrix {
    Matrix::from_rows(&[
        [1.0, 0.0],
        [0.0, 1.0],
        [1.0, 1.0],
        [2.0, -1.0],
        [0.5, 1.5],
        [-1.0, 0.5],
    ])
}

/// Determinantal rejection with exact `Σ` and `t = 2d²` on Gaussian
/// designs: acceptance rate at least 1/4 over `accept_trials` Bernoulli
/// trials per `d`; plus the law of the returned pair on six atoms against
/// the enumerated `VS^2`.
pub fn acceptance_rate<R: Rng>(
    ds: &[usize],
    accept_trials: usize,
    tv_trials: usize,
    rng: &mut R,
) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for &d in ds {
        let oracle = GaussianDesign::new(ar1(d))?;
        let opts = VsOptions::with_method(VsMethod::Rejection);
        let mut stats = RejectionStats::default();
        while (stats.trials as usize) < accept_trials {
            let (_, s) = sample_vs_k_with(&oracle, d, &opts, rng)?;
            stats.merge(&s);
        }
        out.push(Entry::at_least(
            format!("d{d}_rate"),
            stats.acceptance_rate(),
            0.25,
        ));
        out.push(Entry::at_most(
            format!("d{d}_max_ratio"),
            stats.max_ratio,
            1.0,
        ));
    }
    let fd = FiniteDesign::from_matrix(six_atoms())?;
    let exact = brute_force_vs(&fd, 2)?;
    let mut pairs = Vec::with_capacity(tv_trials);
    for _ in 0..tv_trials {
        pairs.push(keys(&sample_vs_k(&fd, 2, VsMethod::Rejection, rng)?)?);
    }
    out.push(Entry::at_most(
        "six_atom_tv",
        tv_distance(&DistTable::from_samples(pairs)?, &exact),
        0.02,
    ));
    Ok(out)
}

/// Largest relative violation of
/// `det(XᵀX)·X† = (k-d)⁻¹ Σᵢ det(XᵀI₋ᵢX)·(I₋ᵢX)†` over `count` Gaussian
/// `6 x 3` matrices.
pub fn pinv_decomposition<R: Rng>(count: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let (k, d) = (6, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let x = Matrix::from_fn(k, d, |_, _| normal(rng));
        let lhs = pseudoinverse(&x).scaled(det(&x.gram()));
        let mut rhs = Matrix::zeros(d, k);
        for i in 0..k {
            let mut xi = x.clone();
            xi.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
            rhs.add_assign(&pseudoinverse(&xi).scaled(det(&xi.gram())));
        }
        let rhs = rhs.scaled(1.0 / (k - d) as f64);
        worst = worst.max(lhs.sub(&rhs).max_abs() / lhs.max_abs());
    }
    Ok(alloc::vec![Entry::at_most("max_rel_err", worst, 1e-8)])
}

/// First-row squared norm of `VS^k` against `D^k`, both conditioned on
/// `det(XᵀX)` lying within ±5% of the `VS^k` median; two-sample KS at 1%.
pub fn conditional_equality<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let sigma = sigma2();
    let k = 4;
    let l = cholesky(&sigma)?;
    let mut vs = Vec::with_capacity(trials);
    let mut iid = Vec::with_capacity(trials);
    for _ in 0..trials {
        let m = gaussian_vs(&sigma, k, rng)?.m;
        vs.push((det(&m.gram()), linalg::dot(m.row(0), m.row(0))));
        let x = gaussian_rows(k, l.lower(), rng);
        iid.push((det(&x.gram()), linalg::dot(x.row(0), x.row(0))));
    }
    let mut dets: Vec<f64> = vs.iter().map(|p| p.0).collect();
    dets.sort_by(f64::total_cmp);
    let median = dets[dets.len() / 2];
    let (lo, hi) = (0.95 * median, 1.05 * median);
    let band = |v: &[(f64, f64)]| -> Vec<f64> {
        v.iter()
            .filter(|p| p.0 >= lo && p.0 <= hi)
            .map(|p| p.1)
            .collect()
    };
    let (a, b) = (band(&vs), band(&iid));
    if a.len() < 100 || b.len() < 100 {
        return Ok(alloc::vec![Entry::at_most("ks", f64::NAN, f64::NAN)]);
    }
    Ok(alloc::vec![Entry::at_most(
        "ks",
        ks_statistic(&a, &b),
        ks_critical_1pct(a.len(), b.len())
    )])
}

/// Leveraged volume sampling driven by scores perturbed by independent
/// factors in `[0.6, 1.4]`: the rescaled estimator stays unbiased.
pub fn approx_lev_unbiasedness<R: Rng>(trials: usize, rng: &mut R) -> Result<Vec<Entry>> {
    let (n, d) = (60, 3);
    let fd = FiniteDesign::skewed(n, d, rng)?;
    let profile = exact_scores(&fd)?.perturbed(0.6, 1.4, rng)?;
    let w_star = finite_optimum(&fd)?;
    let k = 2 * d;
    let mut s = VecStats::new(d);
    for _ in 0..trials {
        let (b, _) = sample_leveraged_volume_finite(&fd, &profile, k, rng)?;
        s.push(&leveraged_volume_estimator(&b)?.w);
    }
    let z = z_threshold(d);
    Ok(s.cells()
        .iter()
        .enumerate()
        .map(|(j, c)| Entry::within(format!("w[{j}]"), c.mean(), c.std_err(), w_star[j], z, 0.0))
        .collect())
}
