//! Monte Carlo study of the distribution of `t` under product Haar measure.
//!
//! All statistics refer to the rescaled variable `x = N·t`, whose limit law
//! is the centered Gaussian with variance `D(D−1)/(4K)`.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::action::action_t;
use crate::exec::{map_indexed, Backend};
use crate::lattice::{GaugeConfig, LatticeShape};
use crate::moments::{leading_moment, MomentKind, MomentReport};
use crate::numeric::batch_mean_stderr;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Samples drawn from one RNG stream; stream `c` produces samples
/// `c·CHUNK .. (c+1)·CHUNK`.
pub const CHUNK: usize = 256;

/// Batches used for batch-mean standard errors.
pub const STDERR_BATCHES: usize = 100;

/// Largest moment order [`empirical_moments`] reports.
pub const MAX_EMPIRICAL_ORDER: u32 = 8;

/// Minimum sample size for [`ks_statistic`].
pub const KS_MIN_SAMPLES: usize = 1000;

pub const DEFAULT_BINS: usize = 61;

/// Half-width of the default histogram range, in limit standard deviations.
pub const DEFAULT_RANGE_SIGMAS: f64 = 5.0;

/// I.i.d. draws of `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBatch {
    pub shape: LatticeShape,
    pub matrix_dim: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `N·t` for every sample.
    pub fn rescaled(&self) -> Vec<f64> {
        let n = self.matrix_dim as f64;
        self.values.iter().map(|t| n * t).collect()
    }
}

/// Draws `n_samples` values of `t` on the default backend.
pub fn sample_t(
    shape: &LatticeShape,
    matrix_dim: usize,
    n_samples: usize,
    seed: u64,
) -> Result<SampleBatch> {
    sample_t_with(shape, matrix_dim, n_samples, seed, Backend::default())
}

/// Draws `n_samples` values of `t`. The result depends only on the
/// arguments other than `backend`.
pub fn sample_t_with(
    shape: &LatticeShape,
    matrix_dim: usize,
    n_samples: usize,
    seed: u64,
    backend: Backend,
) -> Result<SampleBatch> {
    if n_samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if matrix_dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let parts = map_indexed(backend, chunks, |c| -> Result<Vec<f64>> {
        let mut rng = RngStream::new(seed, c as u64);
        let len = CHUNK.min(n_samples - c * CHUNK);
        (0..len)
            .map(|_| GaugeConfig::random(*shape, matrix_dim, &mut rng).map(|cfg| action_t(&cfg)))
            .collect()
    });
    let mut values = Vec::with_capacity(n_samples);
    for part in parts {
        values.extend(part?);
    }
    Ok(SampleBatch {
        shape: *shape,
        matrix_dim,
        seed,
        values,
    })
}

/// Variance `D(D−1)/(4K)` of the limit Gaussian of `N·t`.
pub fn limit_variance(sites: usize, dim: usize) -> f64 {
    (dim * (dim - 1)) as f64 / (4.0 * sites as f64)
}

/// `√(2K/(π D(D−1))) · exp(−2K x²/(D(D−1)))`.
pub fn gaussian_limit_density(x: f64, sites: usize, dim: usize) -> f64 {
    let k = sites as f64;
    let dd = (dim * (dim - 1)) as f64;
    (2.0 * k / (std::f64::consts::PI * dd)).sqrt() * (-2.0 * k * x * x / dd).exp()
}

pub fn gaussian_limit_cdf(x: f64, sites: usize, dim: usize) -> f64 {
    let sigma = limit_variance(sites, dim).sqrt();
    0.5 * erfc(-x / (sigma * std::f64::consts::SQRT_2))
}

/// Moments `E[(N t)^l]` for `l = 1..=l_max` with batch-mean standard errors,
/// each paired with the Gaussian-limit moment `m_l`.
pub fn empirical_moments(batch: &SampleBatch, l_max: u32) -> Result<Vec<MomentReport>> {
    if l_max > MAX_EMPIRICAL_ORDER {
        return Err(Error::InvalidArgument(format!(
            "l_max must be at most {MAX_EMPIRICAL_ORDER}, got {l_max}"
        )));
    }
    let x = batch.rescaled();
    let shape = batch.shape;
    Ok((1..=l_max)
        .map(|l| {
            let powers: Vec<f64> = x.iter().map(|v| v.powi(l as i32)).collect();
            let (value, error) = batch_mean_stderr(&powers, STDERR_BATCHES);
            MomentReport {
                l,
                value,
                error,
                target: leading_moment(l, shape.sites(), shape.dim()),
                matrix_dim: batch.matrix_dim,
                dim: shape.dim(),
                extent: shape.extent(),
                sites: shape.sites(),
                kind: MomentKind::Empirical,
            }
        })
        .collect())
}

/// Largest deviation of an empirical moment from `m_l` that is not flagged:
/// five standard errors plus `0.3·m_l/N` for even `l` and `m₂^{l/2}/N` for
/// odd `l`.
pub fn moment_allowance(report: &MomentReport) -> f64 {
    let n = report.matrix_dim as f64;
    let finite_n = if report.l.is_multiple_of(2) {
        0.3 * report.target / n
    } else {
        limit_variance(report.sites, report.dim).powf(report.l as f64 / 2.0) / n
    };
    5.0 * report.error + finite_n
}

pub fn moment_passes(report: &MomentReport) -> bool {
    (report.value - report.target).abs() <= moment_allowance(report)
}

/// Uniform-bin histogram normalized as a density over the in-range samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Samples inside `[lo, hi]`; `counts` sums to this.
    pub total: u64,
    /// Samples that fell outside the range.
    pub outside: u64,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(Error::InvalidArgument(format!(
                "need bins ≥ 1 and hi > lo, got {bins} bins over [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        let mut outside = 0;
        for &v in values {
            if v < lo || v > hi || v.is_nan() {
                outside += 1;
                continue;
            }
            let bin = (((v - lo) / width) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        let total = counts.iter().sum();
        Ok(Self {
            lo,
            hi,
            counts,
            total,
            outside,
        })
    }

    /// Histogram of `N·t` with [`DEFAULT_BINS`] bins over ±5 limit standard
    /// deviations.
    pub fn of_batch(batch: &SampleBatch) -> Result<Self> {
        let sigma = limit_variance(batch.shape.sites(), batch.shape.dim()).sqrt();
        let half = DEFAULT_RANGE_SIGMAS * sigma;
        Self::new(&batch.rescaled(), -half, half, DEFAULT_BINS)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        let lo = self.lo + bin as f64 * w;
        let hi = if bin + 1 == self.bins() {
            self.hi
        } else {
            lo + w
        };
        (lo, hi)
    }

    pub fn densities(&self) -> Vec<f64> {
        let norm = self.total as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `values` and
/// the centered Gaussian CDF with the given variance.
pub fn ks_distance_to_gaussian(values: &[f64], variance: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let scale = (2.0 * variance).sqrt();
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 0.5 * erfc(-x / scale);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// KS distance between `N·t` and its Gaussian limit.
pub fn ks_statistic(batch: &SampleBatch) -> Result<f64> {
    if batch.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: KS_MIN_SAMPLES,
            got: batch.len(),
        });
    }
    Ok(ks_distance_to_gaussian(
        &batch.rescaled(),
        limit_variance(batch.shape.sites(), batch.shape.dim()),
    ))
}
