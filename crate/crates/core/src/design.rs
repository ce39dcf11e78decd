//! Design distributions: the joint law of a covariate vector `x` and a
//! scalar response `y`.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky, CholeskyFactor, Matrix, Vector};
use crate::math;
use crate::stats::RunningStats;

/// A drawn covariate vector. `index` identifies the atom for
/// finite-support designs.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub x: Vector,
    pub index: Option<usize>,
}

impl Point {
    pub fn new(x: Vector) -> Self {
        Point { x, index: None }
    }

    pub fn atom(x: Vector, index: usize) -> Self {
        Point {
            x,
            index: Some(index),
        }
    }
}

/// A `(d,1)`-variate distribution.
///
/// All randomness enters through the caller's RNG; implementations are
/// immutable and can be shared between workers.
pub trait DesignOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point;

    /// Draws `y | x`.
    fn response(&self, point: &Point, rng: &mut dyn RngCore) -> f64;

    fn draw_x(&self, rng: &mut dyn RngCore) -> Vector {
        self.draw_point(rng).x
    }

    fn draw_y(&self, x: &[f64], rng: &mut dyn RngCore) -> f64 {
        self.response(&Point::new(x.into()), rng)
    }

    /// `E[x xᵀ]`.
    fn second_moment(&self) -> Option<Matrix> {
        None
    }

    /// `E[x y]`.
    fn cross_moment(&self) -> Option<Vector> {
        None
    }

    /// The population least-squares solution.
    fn optimum(&self) -> Option<Vector> {
        None
    }

    /// Exact square loss `E[(xᵀw - y)²]`.
    fn loss(&self, _w: &[f64]) -> Option<f64> {
        None
    }

    /// Supremum `K` of `xᵀΣ⁻¹x` over the support, when finite and known.
    fn leverage_bound(&self) -> Option<f64> {
        None
    }

    /// An exact draw from the leverage-reweighted design, when the design
    /// knows how to produce one.
    fn draw_leverage_point(&self, _rng: &mut dyn RngCore) -> Option<Point> {
        None
    }

    /// Covariance of a mean-zero Gaussian design.
    fn gaussian_covariance(&self) -> Option<&Matrix> {
        None
    }

    fn as_finite(&self) -> Option<&FiniteDesign> {
        None
    }
}

/// Monte Carlo loss estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl LossEstimate {
    /// `z`-sigma interval.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_err, self.mean + z * self.std_err)
    }
}

/// Estimates `E[(xᵀw - y)²]` from `budget` fresh draws.
pub fn mc_loss(
    oracle: &dyn DesignOracle,
    w: &[f64],
    budget: usize,
    rng: &mut dyn RngCore,
) -> Result<LossEstimate> {
    if w.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            found: w.len(),
        });
    }
    if budget < 2 {
        return Err(Error::InvalidArgument("loss budget must be at least 2"));
    }
    let mut s = RunningStats::new();
    for _ in 0..budget {
        let p = oracle.draw_point(rng);
        let y = oracle.response(&p, rng);
        let r = linalg::dot(&p.x, w) - y;
        s.push(r * r);
    }
    Ok(LossEstimate {
        mean: s.mean(),
        std_err: s.std_err(),
        samples: budget,
    })
}

/// Paired estimate of `L(a) - L(b)` on common draws.
pub fn mc_loss_difference(
    oracle: &dyn DesignOracle,
    a: &[f64],
    b: &[f64],
    budget: usize,
    rng: &mut dyn RngCore,
) -> Result<LossEstimate> {
    if a.len() != oracle.dim() || b.len() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            found: a.len().max(b.len()),
        });
    }
    let mut s = RunningStats::new();
    for _ in 0..budget {
        let p = oracle.draw_point(rng);
        let y = oracle.response(&p, rng);
        let ra = linalg::dot(&p.x, a) - y;
        let rb = linalg::dot(&p.x, b) - y;
        s.push(ra * ra - rb * rb);
    }
    Ok(LossEstimate {
        mean: s.mean(),
        std_err: s.std_err(),
        samples: budget,
    })
}

fn sq(v: f64) -> f64 {
    v * v
}

fn normal(rng: &mut dyn RngCore) -> f64 {
    StandardNormal.sample(rng)
}

fn normals(d: usize, rng: &mut dyn RngCore) -> Vector {
    (0..d).map(|_| normal(rng)).collect()
}

/// A draw `z` from the standard Gaussian reweighted by `‖z‖²/d`: radius
/// `χ_{d+2}`, direction uniform.
fn leverage_weighted_normal(d: usize, rng: &mut dyn RngCore) -> Vector {
    let r2: f64 = (0..d + 2).map(|_| sq(normal(rng))).sum();
    loop {
        let h = normals(d, rng);
        let n2 = h.norm_sq();
        if n2 > 0.0 {
            return h.scaled(math::sqrt(r2 / n2));
        }
    }
}

/// Uniform distribution over the rows of a fixed `n x d` matrix, with the
/// row's own response.
#[derive(Clone, Debug)]
pub struct FiniteDesign {
    x: Matrix,
    y: Vector,
    chol: Option<CholeskyFactor>,
    leverages: Option<Vector>,
    lev_index: Option<WeightedIndex<f64>>,
}

impl FiniteDesign {
    /// Rank-deficient matrices are accepted; quantities that need `XᵀX⁻¹`
    /// report `RankDeficient` later.
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                found: y.len(),
            });
        }
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::InvalidArgument(
                "design needs at least one row and column",
            ));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite);
        }
        let chol = if linalg::rank(&x) == x.cols() {
            cholesky(&x.gram()).ok()
        } else {
            None
        };
        let n = x.rows() as f64;
        let leverages: Option<Vector> = chol.as_ref().map(|c| {
            (0..x.rows())
                .map(|i| n * c.inv_quad_form(x.row(i)))
                .collect()
        });
        let lev_index = leverages
            .as_ref()
            .and_then(|l| WeightedIndex::new(l.iter().map(|v| v.max(0.0))).ok());
        Ok(FiniteDesign {
            x,
            y,
            chol,
            leverages,
            lev_index,
        })
    }

    /// Design with all-zero responses.
    pub fn from_matrix(x: Matrix) -> Result<Self> {
        let n = x.rows();
        Self::new(x, Vector::zeros(n))
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn is_full_rank(&self) -> bool {
        self.chol.is_some()
    }

    /// Cholesky factor of `XᵀX`.
    pub fn gram_cholesky(&self) -> Option<&CholeskyFactor> {
        self.chol.as_ref()
    }

    /// `n · x_iᵀ(XᵀX)⁻¹x_i` per row.
    pub fn leverages(&self) -> Option<&Vector> {
        self.leverages.as_ref()
    }

    /// Heavy-tailed rows (Gaussian directions with Cauchy-like radii) and a
    /// linear response with unit Gaussian noise; leverage is concentrated
    /// on a handful of rows.
    pub fn skewed<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Self> {
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let g: f64 = StandardNormal.sample(rng);
            let scale = 1.0 / math::abs(g).max(1e-3);
            let col_scale = |j: usize| 1.0 + j as f64 / d as f64;
            let row: Vec<f64> = (0..d)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * scale.min(1e3) * col_scale(j)
                })
                .collect();
            let noise: f64 = StandardNormal.sample(rng);
            y.push(row.iter().sum::<f64>() + noise);
            rows.push(row);
        }
        Self::new(Matrix::from_rows(&rows), y.into())
    }

    /// A Gaussian bulk that barely touches the last coordinate, plus
    /// `outliers` rows along it whose responses carry noise of standard
    /// deviation `outlier_noise`.
    pub fn two_cluster<R: Rng>(
        n: usize,
        d: usize,
        outliers: usize,
        outlier_noise: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if d < 2 || outliers == 0 || outliers >= n {
            return Err(Error::InvalidArgument(
                "two_cluster needs d >= 2 and 0 < outliers < n",
            ));
        }
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let mut row: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let noise: f64 = StandardNormal.sample(rng);
            if i < outliers {
                let jitter: f64 = StandardNormal.sample(rng);
                row.iter_mut().for_each(|v| *v *= 0.01);
                row[d - 1] = 1.0 + 0.1 * jitter;
                y.push(row.iter().sum::<f64>() + outlier_noise * noise);
            } else {
                row[d - 1] *= 0.01;
                y.push(row.iter().sum::<f64>() + noise);
            }
            rows.push(row);
        }
        Self::new(Matrix::from_rows(&rows), y.into())
    }
}

/// `X†y` for a full-rank finite design.
pub fn finite_optimum(fd: &FiniteDesign) -> Result<Vector> {
    let chol = fd.chol.as_ref().ok_or(Error::RankDeficient)?;
    Ok(chol.solve(&fd.x.t_mul_vec(&fd.y)))
}

impl DesignOracle for FiniteDesign {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point {
        let i = rng.random_range(0..self.n());
        Point::atom(self.x.row(i).into(), i)
    }

    fn response(&self, point: &Point, _rng: &mut dyn RngCore) -> f64 {
        match point.index {
            Some(i) => self.y[i],
            None => {
                // Look the row up by value; first match wins.
                (0..self.n())
                    .find(|&i| self.x.row(i) == &point.x[..])
                    .map_or(0.0, |i| self.y[i])
            }
        }
    }

    fn second_moment(&self) -> Option<Matrix> {
        Some(self.x.gram().scaled(1.0 / self.n() as f64))
    }

    fn cross_moment(&self) -> Option<Vector> {
        Some(self.x.t_mul_vec(&self.y).scaled(1.0 / self.n() as f64))
    }

    fn optimum(&self) -> Option<Vector> {
        finite_optimum(self).ok()
    }

    fn loss(&self, w: &[f64]) -> Option<f64> {
        if w.len() != self.dim() {
            return None;
        }
        let r = self.x.mul_vec(w).sub(&self.y);
        Some(r.norm_sq() / self.n() as f64)
    }

    fn leverage_bound(&self) -> Option<f64> {
        self.leverages
            .as_ref()
            .map(|l| l.iter().copied().fold(0.0, f64::max))
    }

    fn draw_leverage_point(&self, rng: &mut dyn RngCore) -> Option<Point> {
        let idx = self.lev_index.as_ref()?;
        let i = idx.sample(rng);
        Some(Point::atom(self.x.row(i).into(), i))
    }

    fn as_finite(&self) -> Option<&FiniteDesign> {
        Some(self)
    }
}

/// Linear response `y = xᵀw + noise_sd · ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearResponse {
    pub w: Vector,
    pub noise_sd: f64,
}

/// `x ~ N(0, Σ)` with a linear-plus-noise response.
#[derive(Clone, Debug)]
pub struct GaussianDesign {
    sigma: Matrix,
    chol: CholeskyFactor,
    response: LinearResponse,
}

impl GaussianDesign {
    /// Zero weights and unit noise.
    pub fn new(sigma: Matrix) -> Result<Self> {
        let d = sigma.rows();
        Self::with_response(
            sigma,
            LinearResponse {
                w: Vector::zeros(d),
                noise_sd: 1.0,
            },
        )
    }

    pub fn with_response(sigma: Matrix, response: LinearResponse) -> Result<Self> {
        let chol = cholesky(&sigma)?;
        if response.w.len() != sigma.rows() {
            return Err(Error::DimensionMismatch {
                expected: sigma.rows(),
                found: response.w.len(),
            });
        }
        if !(response.noise_sd >= 0.0) {
            return Err(Error::InvalidArgument("noise_sd must be nonnegative"));
        }
        Ok(GaussianDesign {
            sigma,
            chol,
            response,
        })
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn linear_response(&self) -> &LinearResponse {
        &self.response
    }
}

impl DesignOracle for GaussianDesign {
    fn dim(&self) -> usize {
        self.sigma.rows()
    }

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point {
        let z = normals(self.dim(), rng);
        Point::new(self.chol.lower().mul_vec(&z))
    }

    fn response(&self, point: &Point, rng: &mut dyn RngCore) -> f64 {
        point.x.dot(&self.response.w) + self.response.noise_sd * normal(rng)
    }

    fn second_moment(&self) -> Option<Matrix> {
        Some(self.sigma.clone())
    }

    fn cross_moment(&self) -> Option<Vector> {
        Some(self.sigma.mul_vec(&self.response.w))
    }

    fn optimum(&self) -> Option<Vector> {
        Some(self.response.w.clone())
    }

    fn loss(&self, w: &[f64]) -> Option<f64> {
        let e = Vector::from(w).sub(&self.response.w);
        Some(linalg::dot(&e, &self.sigma.mul_vec(&e)) + sq(self.response.noise_sd))
    }

    fn draw_leverage_point(&self, rng: &mut dyn RngCore) -> Option<Point> {
        let z = leverage_weighted_normal(self.dim(), rng);
        Some(Point::new(self.chol.lower().mul_vec(&z)))
    }

    fn gaussian_covariance(&self) -> Option<&Matrix> {
        Some(&self.sigma)
    }
}

/// Standard Gaussian `x` with `y = Σ (x_i + x_i³/3) + ε`.
#[derive(Clone, Debug)]
pub struct CubicGaussianDesign {
    d: usize,
    identity: Matrix,
}

impl CubicGaussianDesign {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        Ok(CubicGaussianDesign {
            d,
            identity: Matrix::identity(d),
        })
    }
}

/// The population optimum of [`CubicGaussianDesign`]: all twos, since
/// `E[x²] = 1` and `E[x⁴] = 3`.
pub fn cubic_gaussian_optimum(d: usize) -> Vector {
    Vector::filled(d, 2.0)
}

impl DesignOracle for CubicGaussianDesign {
    fn dim(&self) -> usize {
        self.d
    }

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::new(normals(self.d, rng))
    }

    fn response(&self, point: &Point, rng: &mut dyn RngCore) -> f64 {
        point.x.iter().map(|v| v + v * v * v / 3.0).sum::<f64>() + normal(rng)
    }

    fn second_moment(&self) -> Option<Matrix> {
        Some(Matrix::identity(self.d))
    }

    fn cross_moment(&self) -> Option<Vector> {
        Some(Vector::filled(self.d, 2.0))
    }

    fn optimum(&self) -> Option<Vector> {
        Some(cubic_gaussian_optimum(self.d))
    }

    fn loss(&self, w: &[f64]) -> Option<f64> {
        // Coordinates are independent: E[(x(1-w) + x³/3)²] = (2-w)² + 2/3.
        let gap: f64 = w.iter().map(|v| sq(v - 2.0)).sum();
        Some(gap + 2.0 * self.d as f64 / 3.0 + 1.0)
    }

    fn draw_leverage_point(&self, rng: &mut dyn RngCore) -> Option<Point> {
        Some(Point::new(leverage_weighted_normal(self.d, rng)))
    }

    fn gaussian_covariance(&self) -> Option<&Matrix> {
        Some(&self.identity)
    }
}

/// `(x, y) = (Z e_J, Z³)` with `Z ~ N(0,1)` and `J` uniform.
#[derive(Clone, Debug)]
pub struct OneHotCubicDesign {
    d: usize,
}

impl OneHotCubicDesign {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        Ok(OneHotCubicDesign { d })
    }

    fn point(&self, j: usize, z: f64) -> Point {
        let mut x = Vector::zeros(self.d);
        x[j] = z;
        Point::new(x)
    }
}

impl DesignOracle for OneHotCubicDesign {
    fn dim(&self) -> usize {
        self.d
    }

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point {
        let j = rng.random_range(0..self.d);
        self.point(j, normal(rng))
    }

    fn response(&self, point: &Point, _rng: &mut dyn RngCore) -> f64 {
        let z: f64 = point.x.iter().sum();
        z * z * z
    }

    fn second_moment(&self) -> Option<Matrix> {
        Some(Matrix::identity(self.d).scaled(1.0 / self.d as f64))
    }

    fn cross_moment(&self) -> Option<Vector> {
        Some(Vector::filled(self.d, 3.0 / self.d as f64))
    }

    fn optimum(&self) -> Option<Vector> {
        Some(Vector::filled(self.d, 3.0))
    }

    fn loss(&self, w: &[f64]) -> Option<f64> {
        let s: f64 = w.iter().map(|v| v * v - 6.0 * v + 15.0).sum();
        Some(s / self.d as f64)
    }

    fn draw_leverage_point(&self, rng: &mut dyn RngCore) -> Option<Point> {
        // Leverage is d·Z², so |Z| becomes χ₃.
        let r2: f64 = (0..3).map(|_| sq(normal(rng))).sum();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let j = rng.random_range(0..self.d);
        Some(self.point(j, sign * math::sqrt(r2)))
    }
}

/// `(e_i, 1)` with probability `δ/d` and `(γ e_i, 0)` with probability
/// `(1-δ)/d`, for each coordinate `i`. Atom `i < d` is `e_i`, atom `d + i`
/// is `γ e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledBasisDesign {
    d: usize,
    gamma: f64,
    delta: f64,
}

impl ScaledBasisDesign {
    pub fn new(d: usize, gamma: f64, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        if !(gamma > 0.0 && gamma < 1.0 && delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument("gamma and delta must lie in (0, 1)"));
        }
        Ok(ScaledBasisDesign { d, gamma, delta })
    }

    pub fn for_lower_bound(d: usize, k: usize) -> Result<Self> {
        let (gamma, delta) = lower_bound_params(d, k)?;
        Self::new(d, gamma, delta)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Per-coordinate second moment `c` in `Σ = c I`.
    pub fn scale(&self) -> f64 {
        (self.delta + self.gamma * self.gamma * (1.0 - self.delta)) / self.d as f64
    }

    /// `L(w*)` in closed form.
    pub fn optimal_loss(&self) -> f64 {
        let (g2, dl) = (self.gamma * self.gamma, self.delta);
        g2 * dl * (1.0 - dl) / (dl + g2 * (1.0 - dl))
    }

    /// `(x, y, probability)` for all `2d` atoms.
    pub fn atoms(&self) -> Vec<(Vector, f64, f64)> {
        let d = self.d;
        (0..2 * d)
            .map(|a| {
                let (x, y, p) = self.atom(a);
                (x, y, p)
            })
            .collect()
    }

    fn atom(&self, a: usize) -> (Vector, f64, f64) {
        let d = self.d;
        let mut x = Vector::zeros(d);
        if a < d {
            x[a] = 1.0;
            (x, 1.0, self.delta / d as f64)
        } else {
            x[a - d] = self.gamma;
            (x, 0.0, (1.0 - self.delta) / d as f64)
        }
    }
}

impl DesignOracle for ScaledBasisDesign {
    fn dim(&self) -> usize {
        self.d
    }

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point {
        let i = rng.random_range(0..self.d);
        let a = if rng.random::<f64>() < self.delta {
            i
        } else {
            self.d + i
        };
        Point::atom(self.atom(a).0, a)
    }

    fn response(&self, point: &Point, _rng: &mut dyn RngCore) -> f64 {
        match point.index {
            Some(a) => self.atom(a).1,
            None => {
                if point.x.contains(&1.0) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn second_moment(&self) -> Option<Matrix> {
        Some(Matrix::identity(self.d).scaled(self.scale()))
    }

    fn cross_moment(&self) -> Option<Vector> {
        Some(Vector::filled(self.d, self.delta / self.d as f64))
    }

    fn optimum(&self) -> Option<Vector> {
        Some(Vector::filled(
            self.d,
            self.delta / (self.d as f64 * self.scale()),
        ))
    }

    fn loss(&self, w: &[f64]) -> Option<f64> {
        let (g2, dl, d) = (self.gamma * self.gamma, self.delta, self.d as f64);
        Some(
            w.iter()
                .map(|v| dl / d * sq(1.0 - v) + (1.0 - dl) / d * g2 * v * v)
                .sum(),
        )
    }

    fn leverage_bound(&self) -> Option<f64> {
        Some(1.0 / self.scale())
    }

    fn draw_leverage_point(&self, rng: &mut dyn RngCore) -> Option<Point> {
        // Leverage 1/c on e_i and γ²/c on γ e_i.
        let g2 = self.gamma * self.gamma;
        let p_unit = self.delta / (self.delta + g2 * (1.0 - self.delta));
        let i = rng.random_range(0..self.d);
        let a = if rng.random::<f64>() < p_unit {
            i
        } else {
            self.d + i
        };
        Some(Point::atom(self.atom(a).0, a))
    }
}

/// `x` uniform on `[-1, 1]^d` with a linear-plus-noise response. Bounded
/// support, so the leverage bound `3d` is attained at the corners.
#[derive(Clone, Debug)]
pub struct UniformBoxDesign {
    response: LinearResponse,
}

impl UniformBoxDesign {
    pub fn new(response: LinearResponse) -> Result<Self> {
        if response.w.is_empty() {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        Ok(UniformBoxDesign { response })
    }

    pub fn linear_response(&self) -> &LinearResponse {
        &self.response
    }
}

impl DesignOracle for UniformBoxDesign {
    fn dim(&self) -> usize {
        self.response.w.len()
    }

    fn draw_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::new(
            (0..self.dim())
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect(),
        )
    }

    fn response(&self, point: &Point, rng: &mut dyn RngCore) -> f64 {
        point.x.dot(&self.response.w) + self.response.noise_sd * normal(rng)
    }

    fn second_moment(&self) -> Option<Matrix> {
        Some(Matrix::identity(self.dim()).scaled(1.0 / 3.0))
    }

    fn cross_moment(&self) -> Option<Vector> {
        Some(self.response.w.scaled(1.0 / 3.0))
    }

    fn optimum(&self) -> Option<Vector> {
        Some(self.response.w.clone())
    }

    fn loss(&self, w: &[f64]) -> Option<f64> {
        let e = Vector::from(w).sub(&self.response.w);
        Some(e.norm_sq() / 3.0 + sq(self.response.noise_sd))
    }

    fn leverage_bound(&self) -> Option<f64> {
        Some(3.0 * self.dim() as f64)
    }
}

/// Predicted behaviour of plain least squares on `k` i.i.d. draws from
/// [`OneHotCubicDesign`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasPrediction {
    pub delta: f64,
    /// Every coordinate of `E[X†y]`, i.e. `3(1-δ)`.
    pub mean_coordinate: f64,
    /// `L(E[X†y]) / L(w*) = 1 + 1.5 δ²`.
    pub loss_ratio: f64,
}

/// Shrinkage factor `δ` of the i.i.d. least-squares estimator on the
/// one-hot cubic design.
pub fn bias_delta(d: usize, k: usize) -> f64 {
    let (df, kf) = (d as f64, k as f64);
    let tail = if d == 1 {
        0.0
    } else {
        (df - 1.0) / (kf + 2.0) * math::powi(1.0 - 1.0 / df, k as i32 + 1)
    };
    2.0 * df / (kf + 1.0) * (1.0 - df / (kf + 2.0) + tail)
}

pub fn bias_prediction(d: usize, k: usize) -> BiasPrediction {
    let delta = bias_delta(d, k);
    BiasPrediction {
        delta,
        mean_coordinate: 3.0 * (1.0 - delta),
        loss_ratio: 1.0 + 1.5 * delta * delta,
    }
}

/// `(γ, δ)` with `δ = d/(4k)` and `γ² = δ/(2d(1-δ))`.
pub fn lower_bound_params(d: usize, k: usize) -> Result<(f64, f64)> {
    if d == 0 || k < d {
        return Err(Error::InvalidArgument("lower bound needs k >= d >= 1"));
    }
    let delta = d as f64 / (4.0 * k as f64);
    let gamma = math::sqrt(delta / (2.0 * d as f64 * (1.0 - delta)));
    Ok((gamma, delta))
}
