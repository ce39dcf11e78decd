//! Finite-support probability tables and total variation distance.

use alloc::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::math;

/// A normalized probability table over ordered keys.
#[derive(Clone, Debug, PartialEq)]
pub struct DistTable<K: Ord> {
    atoms: BTreeMap<K, f64>,
}

impl<K: Ord + Clone> DistTable<K> {
    /// Normalizes nonnegative weights; duplicate keys accumulate.
    pub fn from_weights<I: IntoIterator<Item = (K, f64)>>(weights: I) -> Result<Self> {
        let mut atoms = BTreeMap::new();
        let mut total = 0.0;
        for (k, w) in weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(
                    "weights must be finite and nonnegative",
                ));
            }
            *atoms.entry(k).or_insert(0.0) += w;
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::EmptyList);
        }
        for v in atoms.values_mut() {
            *v /= total;
        }
        Ok(DistTable { atoms })
    }

    /// Empirical law of observed keys.
    pub fn from_samples<I: IntoIterator<Item = K>>(samples: I) -> Result<Self> {
        Self::from_weights(samples.into_iter().map(|k| (k, 1.0)))
    }

    pub fn prob(&self, key: &K) -> f64 {
        self.atoms.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.atoms.iter().map(|(k, v)| (k, *v))
    }

    /// Pushes the law forward through `f`.
    pub fn map<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> DistTable<J> {
        let mut atoms = BTreeMap::new();
        for (k, p) in &self.atoms {
            *atoms.entry(f(k)).or_insert(0.0) += p;
        }
        DistTable { atoms }
    }

    /// `p·self + (1-p)·other`.
    pub fn mix(&self, p: f64, other: &Self) -> Self {
        let mut atoms = BTreeMap::new();
        for (k, v) in &self.atoms {
            *atoms.entry(k.clone()).or_insert(0.0) += p * v;
        }
        for (k, v) in &other.atoms {
            *atoms.entry(k.clone()).or_insert(0.0) += (1.0 - p) * v;
        }
        DistTable { atoms }
    }
}

/// `½ Σ |a - b|`, missing keys counting as zero.
pub fn tv_distance<K: Ord + Clone>(a: &DistTable<K>, b: &DistTable<K>) -> f64 {
    let mut sum = 0.0;
    for (k, pa) in a.iter() {
        sum += math::abs(pa - b.prob(k));
    }
    for (k, pb) in b.iter() {
        if !a.atoms.contains_key(k) {
            sum += pb;
        }
    }
    0.5 * sum
}
