//! The acceptance checks, shared by the `acceptance` test target and the
//! `verify` subcommand. Each check runs at its stated tolerance and reports
//! what it measured.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::action::{action_t, gauge_transform};
use crate::concentration::{ks_statistic, limit_variance, sample_t, CHUNK, STDERR_BATCHES};
use crate::exec::{map_indexed, Backend};
use crate::haar::{sample_haar_unitary, ComplexSquareMatrix, UNITARITY_TOL};
use crate::lattice::{GaugeConfig, LatticeShape};
use crate::moments::{exact_moment_t_rational, leading_moment};
use crate::numeric::{batch_mean_stderr, mean_stderr};
use crate::pairings::{count_pairings_bruteforce, count_pairings_closed, moment_from_count};
use crate::rng::RngStream;
use crate::thermo::oracle::u1_torus_log_partition;
use crate::thermo::{
    free_energy_report, gaussian_free_energy, mc_log_partition, reference_free_energy_d2,
    weak_coupling_free_energy, weak_scaling_exponent, ReferenceBranch,
};
use crate::weingarten::{
    gram_matrix, haar_integral_exact, haar_integral_leading, weingarten_table, IndexPattern,
    Permutation,
};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type CheckFn = fn(u64) -> Result<(bool, String)>;

/// Every check as `(id, name, body)`, in order.
pub const CHECKS: [(u8, &str, CheckFn); 10] = [
    (1, "haar sampler", haar_sampler),
    (2, "action exactness", action_exactness),
    (3, "second-moment identity", second_moment),
    (4, "gaussian convergence trend", convergence_trend),
    (5, "odd-moment suppression", odd_moments),
    (6, "weingarten engine", weingarten_engine),
    (7, "pairing counts", pairing_counts),
    (8, "strong-coupling agreement", strong_coupling),
    (9, "partition-function estimator", partition_estimator),
    (10, "weak-coupling formulas", weak_formulas),
];

/// Runs check `id` (1-based). Errors count as failures.
pub fn run_check(id: u8, seed: u64) -> Option<CheckOutcome> {
    let &(id, name, body) = CHECKS.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = body(seed).unwrap_or_else(|e| (false, format!("error: {e}")));
    Some(CheckOutcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    CHECKS.iter().filter_map(|c| run_check(c.0, seed)).collect()
}

/// Draws `n` Haar matrices in chunked streams and maps each through `f`.
fn haar_map<T: Send>(
    dim: usize,
    n: usize,
    seed: u64,
    f: impl Fn(&ComplexSquareMatrix) -> T + Sync,
) -> Result<Vec<T>> {
    let parts = map_indexed(
        Backend::default(),
        n.div_ceil(CHUNK),
        |c| -> Result<Vec<T>> {
            let mut rng = RngStream::new(seed, c as u64);
            (0..CHUNK.min(n - c * CHUNK))
                .map(|_| sample_haar_unitary(dim, &mut rng).map(|u| f(&u)))
                .collect()
        },
    );
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn haar_sampler(seed: u64) -> Result<(bool, String)> {
    const SAMPLES: usize = 200_000;
    let mut ok = true;
    let mut detail = String::new();
    for n in [2, 4, 8] {
        let draws = haar_map(n, SAMPLES, seed, |u| (u.trace(), u.unitarity_residual()))?;
        let sq: Vec<f64> = draws.iter().map(|(z, _)| z.norm_sqr()).collect();
        let re: Vec<f64> = draws.iter().map(|(z, _)| z.re).collect();
        let im: Vec<f64> = draws.iter().map(|(z, _)| z.im).collect();
        let worst = draws.iter().map(|d| d.1).fold(0.0, f64::max);
        let (m2, se2) = mean_stderr(&sq);
        let (mr, ser) = mean_stderr(&re);
        let (mi, sei) = mean_stderr(&im);
        let mean = Complex64::new(mr, mi).norm();
        let mean_se = (ser * ser + sei * sei).sqrt();
        let pass = (m2 - 1.0).abs() <= 5.0 * se2 && mean <= 5.0 * mean_se && worst <= UNITARITY_TOL;
        ok &= pass;
        let _ = write!(
            detail,
            "N={n}: E|TrU|²={m2:.4}±{se2:.4} |ETrU|={mean:.4}±{mean_se:.4} resid={worst:.1e}; "
        );
    }
    Ok((ok, detail))
}

fn action_exactness(seed: u64) -> Result<(bool, String)> {
    let mut worst_identity: f64 = 0.0;
    for (d, l) in [(2, 2), (2, 4), (3, 2), (4, 2)] {
        let shape = LatticeShape::new(d, l)?;
        for n in [1, 3] {
            let t = action_t(&GaugeConfig::identity(shape, n)?);
            worst_identity = worst_identity.max((t - (d * (d - 1)) as f64 / 2.0).abs());
        }
    }
    let shapes = [(2, 2), (2, 3), (3, 2), (4, 2)];
    let mut rng = RngStream::new(seed, 0);
    let mut worst_gauge: f64 = 0.0;
    for trial in 0..100 {
        let (d, l) = shapes[trial % shapes.len()];
        let shape = LatticeShape::new(d, l)?;
        let n = 1 + trial % 4;
        let config = GaugeConfig::random(shape, n, &mut rng)?;
        let g = (0..shape.sites())
            .map(|_| sample_haar_unitary(n, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let moved = gauge_transform(&config, &g)?;
        worst_gauge = worst_gauge.max((action_t(&config) - action_t(&moved)).abs());
    }
    Ok((
        worst_identity <= 1e-14 && worst_gauge <= 1e-10,
        format!(
            "identity error {worst_identity:.1e}, gauge error {worst_gauge:.1e} over 100 pairs"
        ),
    ))
}

fn second_moment(seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = String::new();
    for (d, l, n) in [(2, 4, 6), (3, 2, 4)] {
        let shape = LatticeShape::new(d, l)?;
        let batch = sample_t(&shape, n, 100_000, seed)?;
        let x = batch.rescaled();
        let (mean, _) = mean_stderr(&x);
        let centered: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
        let (var, se) = batch_mean_stderr(&centered, STDERR_BATCHES);
        let target = limit_variance(shape.sites(), d);
        let pass = (var - target).abs() <= 5.0 * se;
        ok &= pass;
        let _ = write!(
            detail,
            "D={d} L={l} N={n}: Var={var:.5}±{se:.5} vs {target:.5}; "
        );
    }
    let shape = LatticeShape::new(2, 3)?;
    let exact = exact_moment_t_rational(2, &shape, 8)? * BigRational::from_integer(64.into());
    let m2 = BigRational::new(2.into(), (4 * shape.sites()).into());
    ok &= exact == m2;
    let _ = write!(detail, "exact E[t²]·N² = {exact} (m₂ = {m2})");
    Ok((ok, detail))
}

fn convergence_trend(seed: u64) -> Result<(bool, String)> {
    let shape = LatticeShape::new(2, 3)?;
    let m2 = limit_variance(shape.sites(), 2);
    let mut ks = Vec::new();
    let mut gaps = Vec::new();
    for n in [2, 4, 8, 16] {
        let batch = sample_t(&shape, n, 50_000, seed)?;
        ks.push(ks_statistic(&batch)?);
        let x4: Vec<f64> = batch.rescaled().iter().map(|v| v.powi(4)).collect();
        let (m4, _) = mean_stderr(&x4);
        gaps.push((m4 - 3.0 * m2 * m2).abs());
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.2e}"))
            .collect::<Vec<_>>()
            .join(" → ")
    };
    Ok((
        decreasing(&ks) && decreasing(&gaps),
        format!("KS {}; |E x⁴ − 3m₂²| {}", fmt(&ks), fmt(&gaps)),
    ))
}

fn odd_moments(seed: u64) -> Result<(bool, String)> {
    let shape = LatticeShape::new(2, 3)?;
    let m2 = limit_variance(shape.sites(), 2);
    let mut ok = true;
    let mut detail = String::new();
    for n in [4, 8, 16] {
        let batch = sample_t(&shape, n, 100_000, seed)?;
        let x3: Vec<f64> = batch.rescaled().iter().map(|v| v.powi(3)).collect();
        let (m3, se) = batch_mean_stderr(&x3, STDERR_BATCHES);
        let bound = 5.0 * se + m2.powf(1.5) / n as f64;
        ok &= m3.abs() <= bound;
        let _ = write!(detail, "N={n}: |E x³|={:.2e} ≤ {bound:.2e}; ", m3.abs());
    }
    Ok((ok, detail))
}

/// `max |G·W − I|` with `W(σ, τ) = Wg(στ⁻¹)`.
fn gram_residual(n: usize, dim: usize) -> Result<f64> {
    let gram = gram_matrix(n, dim)?;
    let table = weingarten_table(n, dim)?;
    let inv: Vec<Permutation> = gram.perms.iter().map(Permutation::inverse).collect();
    let w = nalgebra::DMatrix::from_fn(gram.perms.len(), gram.perms.len(), |r, c| {
        table.value(&gram.perms[r].compose(&inv[c]))
    });
    let product = &gram.entries * w;
    let size = product.nrows();
    Ok((product - nalgebra::DMatrix::<f64>::identity(size, size))
        .abs()
        .max())
}

fn weingarten_engine(seed: u64) -> Result<(bool, String)> {
    let mut detail = String::new();
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for dim in n..=16 {
            worst = worst.max(gram_residual(n, dim)?);
        }
    }
    let mut ok = worst <= 1e-10;
    let _ = write!(detail, "Gram residual {worst:.1e}; ");

    let id = Permutation::identity(2);
    let swap = Permutation::from_images(vec![1, 0])?;
    let mut closed_err: f64 = 0.0;
    for dim in 2..=16 {
        let t = weingarten_table(2, dim)?;
        let nf = dim as f64;
        closed_err = closed_err
            .max((t.value(&id) - 1.0 / (nf * nf - 1.0)).abs())
            .max((t.value(&swap) + 1.0 / (nf * (nf * nf - 1.0))).abs());
    }
    ok &= closed_err <= 1e-12;
    let _ = write!(detail, "n=2 closed forms {closed_err:.1e}; ");

    let fixed = [
        IndexPattern::new(&[(0, 0), (0, 0)], &[(0, 0), (0, 0)]),
        IndexPattern::new(&[(0, 0), (1, 1)], &[(0, 1), (1, 0)]),
        IndexPattern::new(&[(0, 0), (0, 1)], &[(0, 0), (0, 1)]),
    ];
    for (k, p) in fixed.iter().enumerate() {
        let scaled = [8usize, 16, 32]
            .iter()
            .map(|&dim| -> Result<f64> {
                let gap = haar_integral_exact(p, dim)? - haar_integral_leading(p, dim)?;
                Ok((dim as f64).powi(3) * gap.abs())
            })
            .collect::<Result<Vec<_>>>()?;
        let bounded = scaled.iter().all(|s| *s > 0.0)
            && scaled
                .windows(2)
                .all(|w| w[1] <= 2.0 * w[0] && w[0] <= 2.0 * w[1]);
        ok &= bounded;
        let _ = write!(
            detail,
            "pattern {k} N³|Δ| {:.3}/{:.3}/{:.3}; ",
            scaled[0], scaled[1], scaled[2]
        );
    }

    let mut rng = RngStream::new(seed, u64::MAX);
    let mut mc_fail = 0;
    for trial in 0..10u64 {
        let n = rng.random_range(1..=2usize);
        let dim = rng.random_range(n.max(1)..=4usize);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..dim)).collect();
        let cols: Vec<usize> = (0..n).map(|_| rng.random_range(0..dim)).collect();
        let (mut crows, mut ccols) = (rows.clone(), cols.clone());
        crows.shuffle(&mut rng);
        ccols.shuffle(&mut rng);
        let plain: Vec<_> = rows.iter().copied().zip(cols.iter().copied()).collect();
        let conj: Vec<_> = crows.iter().copied().zip(ccols.iter().copied()).collect();
        let pattern = IndexPattern::new(&plain, &conj);
        let exact = haar_integral_exact(&pattern, dim)?;
        let values = haar_map(dim, 1_000_000, seed.wrapping_add(trial + 1), |u| {
            let mut z = Complex64::new(1.0, 0.0);
            for &(r, c) in &plain {
                z *= u.get(r, c);
            }
            for &(r, c) in &conj {
                z *= u.get(r, c).conj();
            }
            z
        })?;
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        let (mr, ser) = mean_stderr(&re);
        let (mi, sei) = mean_stderr(&im);
        if (mr - exact).abs() > 5.0 * ser || mi.abs() > 5.0 * sei {
            mc_fail += 1;
            let _ = write!(
                detail,
                "MC mismatch N={dim} {plain:?}/{conj:?}: {mr:.5} vs {exact:.5}; "
            );
        }
    }
    ok &= mc_fail == 0;
    let _ = write!(
        detail,
        "{}/10 random patterns match Monte Carlo",
        10 - mc_fail
    );
    Ok((ok, detail))
}

fn pairing_counts(_seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = String::new();
    for (l, d, ext) in [(2, 2, 2), (2, 2, 3), (2, 3, 2), (4, 2, 2), (3, 2, 2)] {
        let shape = LatticeShape::new(d, ext)?;
        let closed = count_pairings_closed(l, shape.sites(), d);
        let brute = count_pairings_bruteforce(l, &shape)?;
        let pass = closed == Some(brute) && (l != 3 || brute == 0);
        ok &= pass;
        let _ = write!(detail, "(l={l},D={d},L={ext}) {brute}; ");
    }
    let mut worst: f64 = 0.0;
    for l in [2, 4] {
        for (k, d) in [(4, 2), (9, 2), (8, 3)] {
            let count = count_pairings_closed(l, k, d).unwrap_or(0);
            let target = leading_moment(l, k, d);
            worst = worst.max((moment_from_count(count, l, k) - target).abs() / target);
        }
    }
    ok &= worst <= 1e-14;
    let _ = write!(detail, "reconstruction error {worst:.1e}");
    Ok((ok, detail))
}

fn strong_coupling(seed: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for lambda in [2.0, 3.0, 4.0, 8.0] {
        for (k, n) in [(4, 2), (9, 3), (16, 8)] {
            let density = gaussian_free_energy(lambda, 2, k, n)? / (k * n * n) as f64;
            let reference = reference_free_energy_d2(lambda)?;
            if reference.branch != ReferenceBranch::Strong {
                return Ok((false, format!("λ={lambda} not on the strong branch")));
            }
            worst = worst.max((density - reference.density).abs());
        }
    }
    let mut ok = worst <= 1e-15;
    let mut detail = format!("strong-branch error {worst:.1e}; ");
    let shape = LatticeShape::new(2, 2)?;
    for (lambda, expect) in [(1.0, true), (1.5, true), (2.0, false), (4.0, false)] {
        let report = free_energy_report(&shape, 2, lambda, 1000, seed)?;
        let reference = report.f_reference.unwrap_or(f64::NAN) / report.density_norm();
        ok &= report.disagrees == Some(expect);
        let _ = write!(
            detail,
            "λ={lambda}: gaussian {:.5} reference {reference:.5} flagged={}; ",
            report.gaussian_density(),
            report.disagrees == Some(true)
        );
    }
    Ok((ok, detail))
}

fn partition_estimator(seed: u64) -> Result<(bool, String)> {
    let shape = LatticeShape::new(2, 2)?;
    let mc = mc_log_partition(&shape, 1, 8.0, 1_000_000, seed)?;
    let exact = u1_torus_log_partition(2, 8.0)?;
    let large = mc_log_partition(&shape, 1, 1e6, 100_000, seed)?;
    let ok = (mc.estimate - exact).abs() <= 3.0 * mc.stderr && large.estimate.abs() <= 1e-4;
    Ok((
        ok,
        format!(
            "λ=8: {:.6}±{:.6} vs oracle {exact:.6}; λ=1e6: {:.1e}",
            mc.estimate, mc.stderr, large.estimate
        ),
    ))
}

fn weak_formulas(_seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    ok &= weak_scaling_exponent(2, 5, 1) == 0.0;
    ok &= (weak_scaling_exponent(2, 4, 2) - 6.0).abs() <= 1e-12;
    ok &= (weak_scaling_exponent(3, 8, 3) - 64.0).abs() <= 1e-12;
    let f = weak_coupling_free_energy(1.0, 3, 1, 1)?;
    ok &= (f - (6.0 + 3f64.ln())).abs() <= 1e-12;
    let mut leading = true;
    for (lambda, k, n) in [(0.5, 4, 2), (1.0, 9, 3), (3.0, 16, 5)] {
        let expect = 2.0 * (n * n * k) as f64 / lambda;
        leading &= weak_coupling_free_energy(lambda, 2, k, n)? == expect;
    }
    ok &= leading;
    Ok((
        ok,
        format!("D=3 λ=1 K=N=1 → {f:.12}; D=2 equals 2N²K/λ exactly: {leading}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_residual_is_tiny() {
        assert!(gram_residual(3, 5).unwrap() < 1e-12);
    }

    #[test]
    fn unknown_id() {
        assert!(run_check(11, 1).is_none());
    }

    #[test]
    fn fast_checks_pass() {
        for id in [7, 10] {
            let outcome = run_check(id, 1).unwrap();
            assert!(outcome.passed, "{outcome}");
        }
    }
}
