//! Streaming moments and a few classical test statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. parallel merge.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        math::sqrt(self.variance() / self.n as f64)
    }
}

/// Entrywise running statistics of fixed-length vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct VecStats {
    cells: Vec<RunningStats>,
}

impl VecStats {
    pub fn new(len: usize) -> Self {
        VecStats {
            cells: vec![RunningStats::new(); len],
        }
    }

    pub fn push(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.cells.len(), "VecStats length mismatch");
        for (c, x) in self.cells.iter_mut().zip(v) {
            c.push(*x);
        }
    }

    pub fn merge(&mut self, other: &VecStats) {
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.merge(b);
        }
    }

    pub fn cells(&self) -> &[RunningStats] {
        &self.cells
    }

    pub fn means(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.mean()).collect()
    }

    pub fn std_errs(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.std_err()).collect()
    }

    pub fn count(&self) -> u64 {
        self.cells.first().map_or(0, |c| c.count())
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / n - j as f64 / m));
    }
    d
}

/// Asymptotic two-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * math::sqrt((n + m) / (n * m))
}

/// Pearson statistic of observed counts against expected probabilities.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e) * (o as f64 - e) / e
        })
        .sum()
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|v| math::ln(*v)).collect();
    let ly: Vec<f64> = ys.iter().map(|v| math::ln(*v)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let frac = pos - lo as f64;
    v[lo] + frac * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass_and_merges() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
        let mut s = RunningStats::new();
        xs.iter().for_each(|x| s.push(*x));
        let mean = xs.iter().sum::<f64>() / 6.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 5.0;
        assert!((s.mean() - mean).abs() < 1e-12);
        assert!((s.variance() - var).abs() < 1e-12);

        let mut a = RunningStats::new();
        let mut b = RunningStats::new();
        xs[..2].iter().for_each(|x| a.push(*x));
        xs[2..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert!((a.mean() - mean).abs() < 1e-12);
        assert!((a.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn ks_basic() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_statistic(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn slope_and_quantile() {
        let xs = [10.0, 100.0, 1000.0];
        let ys = [1.0, 0.1, 0.01];
        assert!((log_log_slope(&xs, &ys) + 1.0).abs() < 1e-12);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.9), 9.0);
    }
}
