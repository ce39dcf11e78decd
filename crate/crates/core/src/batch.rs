use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{Matrix, Vector};
use crate::rng::SeedTrace;

/// How a batch was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// `k` i.i.d. draws from the design.
    Iid,
    /// `k` i.i.d. draws from leverage-score sampling.
    Lev,
    /// Exactly `d` rows from `VS^d`.
    VsD,
    /// `VS^d` rows interleaved with `k - d` i.i.d. rows.
    VsKComposed,
    /// A size-`k` subset of a fixed matrix by discrete volume sampling.
    VsDiscrete,
    /// Closed-form Gaussian volume-rescaled sample.
    VsGaussian,
    /// `VS^d` rows interleaved with `k - d` leverage-sampled rows, all
    /// carrying leverages for the `1/sqrt(l)` rescaling.
    LeveragedVolume,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Iid => "iid",
            Scheme::Lev => "lev",
            Scheme::VsD => "vs_d",
            Scheme::VsKComposed => "vs_k_composed",
            Scheme::VsDiscrete => "vs_discrete",
            Scheme::VsGaussian => "vs_gaussian",
            Scheme::LeveragedVolume => "leveraged_volume",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A `k x d` sample with optional responses and bookkeeping.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub x: Matrix,
    pub y: Option<Vector>,
    /// Leverage value used for each row, when the scheme needs rescaling.
    pub leverages: Option<Vector>,
    /// Source atom / row index of each sampled row, for finite-support designs.
    pub indices: Option<Vec<Option<usize>>>,
    /// Positions (sorted) of the rows that came from the `VS^d` component.
    pub volume_rows: Option<Vec<usize>>,
    pub scheme: Scheme,
    pub seed_trace: Option<SeedTrace>,
}

impl SampleBatch {
    pub fn new(x: Matrix, scheme: Scheme) -> Self {
        SampleBatch {
            x,
            y: None,
            leverages: None,
            indices: None,
            volume_rows: None,
            scheme,
            seed_trace: None,
        }
    }

    pub fn k(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn with_y(mut self, y: Vector) -> Self {
        self.y = Some(y);
        self
    }

    pub fn with_trace(mut self, trace: SeedTrace) -> Self {
        self.seed_trace = Some(trace);
        self
    }

    /// Atom keys when every row has one.
    pub fn atom_keys(&self) -> Option<Vec<usize>> {
        self.indices.as_ref()?.iter().copied().collect()
    }

    /// Rows `idx` (in order) as a new batch; per-row metadata follows along.
    pub fn select(&self, idx: &[usize], scheme: Scheme) -> SampleBatch {
        SampleBatch {
            x: self.x.select_rows(idx),
            y: self.y.as_ref().map(|y| idx.iter().map(|&i| y[i]).collect()),
            leverages: self
                .leverages
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i]).collect()),
            indices: self
                .indices
                .as_ref()
                .map(|v| idx.iter().map(|&i| v[i]).collect()),
            volume_rows: None,
            scheme,
            seed_trace: self.seed_trace,
        }
    }
}
