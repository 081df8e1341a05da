//! Free energies: the Gaussian (strong-coupling) approximation, the
//! weak-coupling endpoint estimate, a Monte Carlo estimate of `ln Z`, and the
//! two-dimensional one-plaquette reference.
//!
//! Free energies are `ln Z` totals unless a name says "density"; densities
//! are per plaquette and per `N²`.

pub mod bessel;
pub mod oracle;

use serde::Serialize;

use crate::action::wilson_exponent_scale;
use crate::concentration::{sample_t, sample_t_with, SampleBatch};
use crate::exec::Backend;
use crate::lattice::LatticeShape;
use crate::numeric::{choose2, pairwise_sum};
use crate::{Error, Result};

/// Coupling at and above which the D = 2 reference equals `1/λ²`.
pub const STRONG_BRANCH_START: f64 = 2.0;

/// Relative gap between the Gaussian density and the reference above which a
/// report flags disagreement.
pub const DISAGREEMENT_TOL: f64 = 0.01;

fn check_coupling(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::NonPositiveCoupling(lambda));
    }
    Ok(())
}

/// `K N² D(D−1) / (2λ²)`: the log of `∫ e^{(2N²K/λ)t}` against the limit
/// Gaussian of `t`.
pub fn gaussian_free_energy(
    lambda: f64,
    dim: usize,
    sites: usize,
    matrix_dim: usize,
) -> Result<f64> {
    check_coupling(lambda)?;
    let n2 = (matrix_dim * matrix_dim) as f64;
    Ok(sites as f64 * n2 * (dim * (dim - 1)) as f64 / (2.0 * lambda * lambda))
}

/// `N² K (2·C(D,2)/λ + ((D−1)/2) ln C(D,2))`.
pub fn weak_coupling_free_energy(
    lambda: f64,
    dim: usize,
    sites: usize,
    matrix_dim: usize,
) -> Result<f64> {
    check_coupling(lambda)?;
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 2, got {dim}"
        )));
    }
    let planes = choose2(dim) as f64;
    let n2 = (matrix_dim * matrix_dim) as f64;
    let volume = n2 * sites as f64;
    Ok(volume * 2.0 * planes / lambda + volume * (dim - 1) as f64 / 2.0 * planes.ln())
}

/// Exponent `(D−1)(N²−1)K/2` of the power law of the action density near
/// its maximum.
pub fn weak_scaling_exponent(dim: usize, sites: usize, matrix_dim: usize) -> f64 {
    let n = matrix_dim as f64;
    (dim - 1) as f64 * (n * n - 1.0) * sites as f64 / 2.0
}

/// Which branch produced a reference value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceBranch {
    /// `1/λ²`, valid for `λ ≥ 2`.
    Strong,
    /// Extrapolated from exact one-plaquette partition functions.
    WeakOracle,
}

impl ReferenceBranch {
    pub fn label(self) -> &'static str {
        match self {
            ReferenceBranch::Strong => "strong",
            ReferenceBranch::WeakOracle => "weak-oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceValue {
    /// Free energy per plaquette per `N²` in the large-`N` limit.
    pub density: f64,
    pub branch: ReferenceBranch,
}

/// Large-`N` free-energy density of two-dimensional lattice `U(N)` gauge
/// theory, which reduces to independent one-plaquette integrals.
pub fn reference_free_energy_d2(lambda: f64) -> Result<ReferenceValue> {
    check_coupling(lambda)?;
    if lambda >= STRONG_BRANCH_START {
        Ok(ReferenceValue {
            density: 1.0 / (lambda * lambda),
            branch: ReferenceBranch::Strong,
        })
    } else {
        Ok(ReferenceValue {
            density: oracle::one_plaquette_free_energy_limit(lambda)?,
            branch: ReferenceBranch::WeakOracle,
        })
    }
}

/// Monte Carlo estimate of `ln Z` with a delta-method standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogPartitionEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub warnings: Vec<String>,
}

/// `ln E[exp((2N²K/λ) t)]` over Haar configurations, estimated as the log of
/// the sample mean of the Wilson weight. Deterministic per seed.
pub fn mc_log_partition(
    shape: &LatticeShape,
    matrix_dim: usize,
    lambda: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LogPartitionEstimate> {
    mc_log_partition_with(
        shape,
        matrix_dim,
        lambda,
        n_samples,
        seed,
        Backend::default(),
    )
}

pub fn mc_log_partition_with(
    shape: &LatticeShape,
    matrix_dim: usize,
    lambda: f64,
    n_samples: usize,
    seed: u64,
    backend: Backend,
) -> Result<LogPartitionEstimate> {
    let batch = sample_t_with(shape, matrix_dim, n_samples, seed, backend)?;
    mc_log_partition_from_batch(&batch, lambda)
}

/// [`mc_log_partition`] on samples already drawn.
pub fn mc_log_partition_from_batch(
    batch: &SampleBatch,
    lambda: f64,
) -> Result<LogPartitionEstimate> {
    let shape = &batch.shape;
    let scale = wilson_exponent_scale(batch.matrix_dim, shape.sites(), lambda)?;
    if batch.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut warnings = Vec::new();
    let threshold = (shape.dim() * (shape.dim() - 1)) as f64;
    if lambda < threshold {
        warnings.push(format!(
            "lambda {lambda} < D(D-1) = {threshold}: the weight is dominated by rare large-t samples"
        ));
    }
    Ok(log_mean_exp(&batch.values, scale, warnings))
}

/// `ln mean(exp(scale·t))`, shifted by the largest exponent for stability.
fn log_mean_exp(values: &[f64], scale: f64, warnings: Vec<String>) -> LogPartitionEstimate {
    let shift = values
        .iter()
        .map(|t| scale * t)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = values.iter().map(|t| (scale * t - shift).exp()).collect();
    let n = weights.len() as f64;
    let mean = pairwise_sum(&weights) / n;
    let sq: Vec<f64> = weights.iter().map(|w| (w - mean).powi(2)).collect();
    let var = if weights.len() > 1 {
        pairwise_sum(&sq) / (n - 1.0)
    } else {
        f64::NAN
    };
    LogPartitionEstimate {
        estimate: shift + mean.ln(),
        stderr: (var / n).sqrt() / mean,
        warnings,
    }
}

/// One row of a free-energy sweep. Free energies are `ln Z` totals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeEnergyReport {
    pub lambda: f64,
    pub dim: usize,
    pub extent: usize,
    pub sites: usize,
    pub matrix_dim: usize,
    pub f_gaussian: f64,
    pub f_weak: f64,
    pub f_mc: f64,
    pub f_mc_stderr: f64,
    /// `K·C(D,2)·N²` times the reference density; `D = 2` only.
    pub f_reference: Option<f64>,
    pub reference_branch: Option<ReferenceBranch>,
    /// Whether the Gaussian result misses the reference by more than
    /// [`DISAGREEMENT_TOL`].
    pub disagrees: Option<bool>,
    pub warnings: Vec<String>,
}

impl FreeEnergyReport {
    /// Number of plaquettes times `N²`.
    pub fn density_norm(&self) -> f64 {
        (self.sites * choose2(self.dim) * self.matrix_dim * self.matrix_dim) as f64
    }

    pub fn gaussian_density(&self) -> f64 {
        self.f_gaussian / self.density_norm()
    }
}

/// Evaluates every free-energy estimate at one coupling.
pub fn free_energy_report(
    shape: &LatticeShape,
    matrix_dim: usize,
    lambda: f64,
    n_samples: usize,
    seed: u64,
) -> Result<FreeEnergyReport> {
    let batch = sample_t(shape, matrix_dim, n_samples, seed)?;
    free_energy_report_from_batch(&batch, lambda)
}

/// One report per coupling, all sharing a single batch of samples.
pub fn free_energy_sweep(
    shape: &LatticeShape,
    matrix_dim: usize,
    lambdas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<FreeEnergyReport>> {
    let batch = sample_t(shape, matrix_dim, n_samples, seed)?;
    lambdas
        .iter()
        .map(|&lambda| free_energy_report_from_batch(&batch, lambda))
        .collect()
}

pub fn free_energy_report_from_batch(batch: &SampleBatch, lambda: f64) -> Result<FreeEnergyReport> {
    let (shape, matrix_dim) = (&batch.shape, batch.matrix_dim);
    let (d, k) = (shape.dim(), shape.sites());
    let mc = mc_log_partition_from_batch(batch, lambda)?;
    let mut warnings = mc.warnings;
    let reference = if d == 2 {
        let r = reference_free_energy_d2(lambda)?;
        if r.branch == ReferenceBranch::WeakOracle {
            warnings.push("reference from one-plaquette oracle extrapolation".into());
        }
        Some(r)
    } else {
        None
    };
    let plaquette_norm = (k * choose2(d) * matrix_dim * matrix_dim) as f64;
    let f_gaussian = gaussian_free_energy(lambda, d, k, matrix_dim)?;
    let disagrees = reference.map(|r| {
        let gap = (f_gaussian / plaquette_norm - r.density).abs() / r.density.abs();
        gap > DISAGREEMENT_TOL
    });
    if disagrees == Some(true) {
        warnings.push("gaussian approximation disagrees with the reference".into());
    }
    Ok(FreeEnergyReport {
        lambda,
        dim: d,
        extent: shape.extent(),
        sites: k,
        matrix_dim,
        f_gaussian,
        f_weak: weak_coupling_free_energy(lambda, d, k, matrix_dim)?,
        f_mc: mc.estimate,
        f_mc_stderr: mc.stderr,
        f_reference: reference.map(|r| r.density * plaquette_norm),
        reference_branch: reference.map(|r| r.branch),
        disagrees,
        warnings,
    })
}
