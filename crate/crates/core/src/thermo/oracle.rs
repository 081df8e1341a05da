//! Reference partition functions that do not go through Monte Carlo.
//!
//! * The one-plaquette integral `z₁(N, λ) = ∫ dU exp((2N/λ) Re Tr U)` equals
//!   the Toeplitz determinant `det[I_{j−k}(2N/λ)]_{j,k<N}`. In the weak phase
//!   the determinant is many orders of magnitude smaller than its entries, so
//!   it is evaluated in fixed point with a precision sized to the
//!   cancellation, using exact fraction-free (Bareiss) elimination.
//! * The `U(1)` theory on a two-dimensional `L × L` torus has the character
//!   expansion `Z = Σ_n I_n(2/λ)^{L²}`: integrating each link forces all
//!   plaquettes to carry the same representation.

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, Sign};
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use super::bessel::bessel_i;
use crate::{Error, Result};

/// Matrix sizes used to extrapolate `ln z₁ / N²` to `N = ∞`.
pub const EXTRAPOLATION_SIZES: [usize; 7] = [8, 10, 12, 14, 16, 20, 24];

fn check_coupling(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::NonPositiveCoupling(lambda));
    }
    Ok(())
}

/// `round(num / λ · 2^bits)` using the exact binary value of `λ`.
fn fixed_ratio(num: usize, lambda: f64, bits: u64) -> BigInt {
    let (mantissa, exponent, _) = lambda.integer_decode();
    // λ = mantissa · 2^exponent
    let shift = bits as i64 - exponent as i64;
    let mut numerator = BigInt::from(num);
    let mut denominator = BigInt::from(mantissa);
    if shift >= 0 {
        numerator <<= shift as u64;
    } else {
        denominator <<= (-shift) as u64;
    }
    (numerator + (&denominator >> 1u32)) / denominator
}

/// `I_0 … I_{max_order}` at `x = 2·half`, each scaled by `2^bits`.
fn bessel_fixed(max_order: usize, half: &BigInt, bits: u64) -> Vec<BigInt> {
    let q = (half * half) >> bits;
    let mut lead = BigInt::one() << bits;
    let mut out = Vec::with_capacity(max_order + 1);
    for n in 0..=max_order {
        if n > 0 {
            lead = ((lead * half) >> bits) / n;
        }
        let mut term = lead.clone();
        let mut sum = lead.clone();
        let mut k = 1usize;
        while !term.is_zero() {
            term = ((term * &q) >> bits) / (k * (k + n));
            sum += &term;
            k += 1;
        }
        out.push(sum);
    }
    out
}

/// Determinant of an integer matrix by Bareiss elimination (exact).
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn ln_big(x: &BigInt) -> f64 {
    debug_assert!(x.sign() == Sign::Plus);
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln z₁(N, λ)` with `z₁ = ∫_{U(N)} dU exp((2N/λ) Re Tr U)`.
pub fn one_plaquette_log_partition(matrix_dim: usize, lambda: f64) -> Result<f64> {
    check_coupling(lambda)?;
    if matrix_dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let n = matrix_dim;
    let x = 2.0 * n as f64 / lambda;
    // entries are at most e^x; Hadamard's bound then limits the cancellation
    let per_row =
        (x / std::f64::consts::LN_2).ceil() as u64 + 64 - (n as u64).leading_zeros() as u64 + 2;
    let bits = 128 + n as u64 * per_row;
    let half = fixed_ratio(n, lambda, bits);
    let values = bessel_fixed(n, &half, bits);
    let matrix: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|k| values[j.abs_diff(k)].clone()).collect())
        .collect();
    let det = bareiss_det(matrix);
    if !det.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "lost precision evaluating z₁ at N={n}, λ={lambda}"
        )));
    }
    Ok(ln_big(&det) - (bits * n as u64) as f64 * std::f64::consts::LN_2)
}

/// `lim_{N→∞} ln z₁(N, λ) / N²`, from a least-squares fit of
/// `F + (a ln N + b)/N² + c/N⁴` over [`EXTRAPOLATION_SIZES`].
pub fn one_plaquette_free_energy_limit(lambda: f64) -> Result<f64> {
    check_coupling(lambda)?;
    let sizes = EXTRAPOLATION_SIZES;
    let mut design = DMatrix::zeros(sizes.len(), 4);
    let mut rhs = DVector::zeros(sizes.len());
    for (r, &n) in sizes.iter().enumerate() {
        let nf = n as f64;
        let inv2 = 1.0 / (nf * nf);
        design[(r, 0)] = 1.0;
        design[(r, 1)] = nf.ln() * inv2;
        design[(r, 2)] = inv2;
        design[(r, 3)] = inv2 * inv2;
        rhs[r] = one_plaquette_log_partition(n, lambda)? * inv2;
    }
    let fit = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(fit[0])
}

/// `ln Z` of `U(1)` on an `L × L` torus with weight `exp((2/λ) Σ_p cos θ_p)`.
pub fn u1_torus_log_partition(extent: usize, lambda: f64) -> Result<f64> {
    check_coupling(lambda)?;
    if extent < 2 {
        return Err(Error::InvalidLattice(format!(
            "extent must be at least 2, got {extent}"
        )));
    }
    let beta = 2.0 / lambda;
    let plaquettes = (extent * extent) as i32;
    // terms decay factorially in |n| once |n| exceeds β
    let i0 = bessel_i(0, beta);
    let mut sum = 1.0;
    let mut n = 1;
    loop {
        let ratio = bessel_i(n, beta) / i0;
        let term = 2.0 * ratio.powi(plaquettes);
        if term < f64::EPSILON * sum {
            break;
        }
        sum += term;
        n += 1;
    }
    Ok(plaquettes as f64 * i0.ln() + sum.ln())
}
