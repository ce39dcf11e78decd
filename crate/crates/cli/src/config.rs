//! Experiment parameters from flags and/or a TOML file.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use volsamp_core::design::{CubicGaussianDesign, OneHotCubicDesign};
use volsamp_core::rng::derive_rng;
use volsamp_core::{DesignOracle, FiniteDesign};

use crate::data::{expand_degree2, load_design};
use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_REPETITIONS: usize = 100;
pub const DEFAULT_T_GRID: [usize; 5] = [1, 10, 100, 1000, 10_000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SchemeName {
    /// Plain least squares on `k` i.i.d. rows.
    Iid,
    /// Rescaled least squares on `k` i.i.d. leverage-score rows.
    Lev,
    /// Volume sampling: discrete size-`k` subsets for finite designs,
    /// `VS^k` otherwise.
    Volume,
    /// `VS^d` plus `k - d` leverage rows, rescaled.
    LeveragedVolume,
    /// `k` i.i.d. rows augmented with a `VS^d` batch.
    IidVsD,
}

impl SchemeName {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::Iid => "iid",
            SchemeName::Lev => "lev",
            SchemeName::Volume => "volume",
            SchemeName::LeveragedVolume => "leveraged_volume",
            SchemeName::IidVsD => "iid_vs_d",
        }
    }
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Synthetic {
    /// Finite design with heavy-tailed row norms.
    Skewed,
    /// Finite Gaussian bulk plus a few noisy outliers along one axis.
    TwoCluster,
    /// Standard Gaussian inputs with cubic responses.
    Cubic,
    /// Scaled one-hot inputs with cubic responses.
    OneHotCubic,
}

/// Flags shared by every subcommand that needs a design. Each one can also
/// come from the config file; flags win.
#[derive(Clone, Debug, Default, Args)]
pub struct DesignArgs {
    /// svmlight or CSV dataset (CSV when the extension is `.csv`).
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Expand features to all degree-2 monomials.
    #[arg(long)]
    pub expand: bool,
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,
    /// Rows of a synthetic finite design.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension of a synthetic design.
    #[arg(long)]
    pub d: Option<usize>,
    /// Outlier rows of the two-cluster design.
    #[arg(long)]
    pub outliers: Option<usize>,
    /// Response noise on the two-cluster outliers.
    #[arg(long)]
    pub outlier_noise: Option<f64>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeName>>,
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Numbers of averaged estimators (bias experiment only).
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<usize>>,
}

/// Keys of a config file; the same names as the long flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub expand: bool,
    pub synthetic: Option<Synthetic>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub outliers: Option<usize>,
    pub outlier_noise: Option<f64>,
    pub schemes: Option<Vec<SchemeName>>,
    pub k_grid: Option<Vec<usize>>,
    pub repetitions: Option<usize>,
    pub t_grid: Option<Vec<usize>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(toml::from_str(&text)?)
    }

    pub fn design(&self) -> DesignArgs {
        DesignArgs {
            data: self.data.clone(),
            expand: self.expand,
            synthetic: self.synthetic,
            n: self.n,
            d: self.d,
            outliers: self.outliers,
            outlier_noise: self.outlier_noise,
        }
    }

    pub fn experiment(&self) -> ExperimentArgs {
        ExperimentArgs {
            design: self.design(),
            schemes: self.schemes.clone(),
            k_grid: self.k_grid.clone(),
            repetitions: self.repetitions,
            t_grid: self.t_grid.clone(),
        }
    }
}

impl DesignArgs {
    /// Fields set on `self` win over `file`.
    pub fn merged(self, file: DesignArgs) -> DesignArgs {
        DesignArgs {
            data: self.data.or(file.data),
            expand: self.expand || file.expand,
            synthetic: self.synthetic.or(file.synthetic),
            n: self.n.or(file.n),
            d: self.d.or(file.d),
            outliers: self.outliers.or(file.outliers),
            outlier_noise: self.outlier_noise.or(file.outlier_noise),
        }
    }
}

impl ExperimentArgs {
    pub fn merged(self, file: ExperimentArgs) -> ExperimentArgs {
        ExperimentArgs {
            design: self.design.merged(file.design),
            schemes: self.schemes.or(file.schemes),
            k_grid: self.k_grid.or(file.k_grid),
            repetitions: self.repetitions.or(file.repetitions),
            t_grid: self.t_grid.or(file.t_grid),
        }
    }
}

/// A loaded dataset or distribution.
pub enum Design {
    Finite(FiniteDesign),
    Oracle(Box<dyn DesignOracle>),
}

impl Design {
    pub fn oracle(&self) -> &dyn DesignOracle {
        match self {
            Design::Finite(fd) => fd,
            Design::Oracle(o) => o.as_ref(),
        }
    }

    pub fn finite(&self) -> Option<&FiniteDesign> {
        match self {
            Design::Finite(fd) => Some(fd),
            Design::Oracle(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.oracle().dim()
    }
}

impl DesignArgs {
    /// Loads the file or generates the synthetic design; synthetic finite
    /// designs draw from their own stream of `seed`.
    pub fn build(&self, seed: u64) -> Result<(Design, String)> {
        let (design, mut desc) = match (&self.data, self.synthetic) {
            (Some(path), _) => (
                Design::Finite(load_design(path)?),
                format!("file:{}", path.display()),
            ),
            (None, Some(kind)) => {
                let (mut rng, _) = derive_rng(seed, "design", 0);
                match kind {
                    Synthetic::Skewed => {
                        let (n, d) = (self.n.unwrap_or(500), self.d.unwrap_or(10));
                        let fd = FiniteDesign::skewed(n, d, &mut rng)?;
                        (Design::Finite(fd), format!("skewed n={n} d={d}"))
                    }
                    Synthetic::TwoCluster => {
                        let (n, d) = (self.n.unwrap_or(1000), self.d.unwrap_or(2));
                        let (m, noise) = (
                            self.outliers.unwrap_or(4),
                            self.outlier_noise.unwrap_or(200.0),
                        );
                        let fd = FiniteDesign::two_cluster(n, d, m, noise, &mut rng)?;
                        let desc =
                            format!("two_cluster n={n} d={d} outliers={m} outlier_noise={noise}");
                        (Design::Finite(fd), desc)
                    }
                    Synthetic::Cubic => {
                        let d = self.d.unwrap_or(5);
                        (
                            Design::Oracle(Box::new(CubicGaussianDesign::new(d)?)),
                            format!("cubic d={d}"),
                        )
                    }
                    Synthetic::OneHotCubic => {
                        let d = self.d.unwrap_or(5);
                        (
                            Design::Oracle(Box::new(OneHotCubicDesign::new(d)?)),
                            format!("one_hot_cubic d={d}"),
                        )
                    }
                }
            }
            (None, None) => {
                return Err(CliError::Usage(
                    "pass --data <path> or --synthetic <name>".into(),
                ))
            }
        };
        let design = match design {
            Design::Finite(fd) if self.expand => {
                desc.push_str(" expand=degree2");
                Design::Finite(expand_degree2(&fd)?)
            }
            Design::Oracle(_) if self.expand => {
                return Err(CliError::Usage(
                    "--expand only applies to finite designs".into(),
                ));
            }
            other => other,
        };
        Ok((design, desc))
    }
}
