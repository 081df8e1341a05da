//! Exact Haar integration of monomials in the entries of `U` and `U*`.
//!
//! For `n` factors of each kind,
//!
//! ```text
//! ∫ dU U_{i1 j1}…U_{in jn} U*_{i'1 j'1}…U*_{i'n j'n}
//!     = Σ_{σ,τ ∈ S_n} Π_k δ(i_k, i'_{σ(k)}) δ(j_k, j'_{τ(k)}) · Wg(στ⁻¹, N)
//! ```
//!
//! where `Wg(·, N)` is the inverse of `σ ↦ N^{#cycles(σ)}` in the group
//! algebra of `S_n`. Keeping only `σ = τ` with `Wg ≈ N^{-n}` gives the
//! leading-order formula.
//!
//! `Wg` is a class function, so the defining system is solved on conjugacy
//! classes (partitions of `n`) in exact rational arithmetic; the full
//! `n! × n!` Gram matrix is only built for inspection and residual checks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Largest supported degree; the Gram matrix is `n! × n!`.
pub const MAX_DEGREE: usize = 6;

/// A bijection of `{0, …, n−1}`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!(
                    "{images:?} is not a permutation"
                )));
            }
        }
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Self { images: inv }
    }

    /// Cycle lengths, sorted descending (a partition of `n`).
    pub fn cycle_type(&self) -> Vec<usize> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_type().len()
    }
}

/// All of `S_n` in lexicographic order of image lists; identity first.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current = (0..n).collect::<Vec<_>>();
    loop {
        out.push(Permutation {
            images: current.clone(),
        });
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Partitions of `n`, each sorted descending; `[n]` first, `[1,…,1]` last.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::DegreeTooLarge { n, cap: MAX_DEGREE });
    }
    Ok(())
}

/// `G(σ, τ) = N^{#cycles(στ⁻¹)}` over `S_n`, rows and columns in the order
/// of [`all_permutations`].
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub perms: Vec<Permutation>,
    pub entries: DMatrix<f64>,
}

pub fn gram_matrix(n: usize, dim: usize) -> Result<GramMatrix> {
    check_degree(n)?;
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let perms = all_permutations(n);
    let inverses: Vec<_> = perms.iter().map(Permutation::inverse).collect();
    let entries = DMatrix::from_fn(perms.len(), perms.len(), |r, c| {
        (dim as f64).powi(perms[r].compose(&inverses[c]).cycle_count() as i32)
    });
    Ok(GramMatrix { perms, entries })
}

/// `Wg(·, N)` on `S_n`, one exact value per cycle type.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    n: usize,
    dim: usize,
    classes: Vec<Vec<usize>>,
    exact: Vec<BigRational>,
    approx: Vec<f64>,
}

impl WeingartenTable {
    fn build(n: usize, dim: usize) -> Result<Self> {
        check_degree(n)?;
        if dim < n {
            return Err(Error::MatrixTooSmall { dim, n });
        }
        let classes = partitions(n);
        let class_of: HashMap<Vec<usize>, usize> = classes
            .iter()
            .enumerate()
            .map(|(k, c)| (c.clone(), k))
            .collect();
        let perms = all_permutations(n);
        let perm_class: Vec<usize> = perms.iter().map(|p| class_of[&p.cycle_type()]).collect();
        let reps: Vec<&Permutation> = (0..classes.len())
            .map(|k| &perms[perm_class.iter().position(|&c| c == k).unwrap()])
            .collect();

        // A[μ][λ] = Σ_{τ ∈ C_λ} N^{#cycles(σ_μ τ⁻¹)}
        let m = classes.len();
        let big_n = BigInt::from(dim);
        let mut system = vec![vec![BigRational::zero(); m + 1]; m];
        for (mu, rep) in reps.iter().enumerate() {
            for (tau, &lam) in perms.iter().zip(&perm_class) {
                let cycles = rep.compose(&tau.inverse()).cycle_count();
                system[mu][lam] +=
                    BigRational::from_integer(num_traits::pow(big_n.clone(), cycles));
            }
        }
        let id_class = m - 1;
        system[id_class][m] = BigRational::one();
        let exact = solve_exact(system).ok_or(Error::MatrixTooSmall { dim, n })?;
        let approx = exact
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect();
        Ok(Self {
            n,
            dim,
            classes,
            exact,
            approx,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn matrix_dim(&self) -> usize {
        self.dim
    }

    /// Partitions of `n`, in the order used by [`Self::class_values`].
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_values(&self) -> &[BigRational] {
        &self.exact
    }

    pub fn class_index(&self, cycle_type: &[usize]) -> Option<usize> {
        self.classes.iter().position(|c| c == cycle_type)
    }

    pub fn value_exact(&self, sigma: &Permutation) -> &BigRational {
        &self.exact[self
            .class_index(&sigma.cycle_type())
            .expect("degree matches")]
    }

    pub fn value(&self, sigma: &Permutation) -> f64 {
        self.approx[self
            .class_index(&sigma.cycle_type())
            .expect("degree matches")]
    }
}

/// Gauss–Jordan on an augmented rational system; `None` if singular.
fn solve_exact(mut a: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *v -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[m].clone()).collect())
}

type TableCache = Mutex<HashMap<(usize, usize), Arc<WeingartenTable>>>;

/// The Weingarten table for `(n, N)`, built once and cached process-wide.
pub fn weingarten_table(n: usize, dim: usize) -> Result<Arc<WeingartenTable>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(n, dim)) {
        return Ok(t.clone());
    }
    let table = Arc::new(WeingartenTable::build(n, dim)?);
    cache
        .lock()
        .unwrap()
        .entry((n, dim))
        .or_insert(table.clone());
    Ok(table)
}

/// Row and column indices of the `U` factors (`i`, `j`) and of the `U*`
/// factors (`i'`, `j'`) in a monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPattern {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub conj_rows: Vec<usize>,
    pub conj_cols: Vec<usize>,
}

impl IndexPattern {
    /// `U_{r c}` pairs for `U`, then for `U*`.
    pub fn new(plain: &[(usize, usize)], conj: &[(usize, usize)]) -> Self {
        Self {
            rows: plain.iter().map(|p| p.0).collect(),
            cols: plain.iter().map(|p| p.1).collect(),
            conj_rows: conj.iter().map(|p| p.0).collect(),
            conj_cols: conj.iter().map(|p| p.1).collect(),
        }
    }

    pub fn plain_count(&self) -> usize {
        self.rows.len()
    }

    pub fn conj_count(&self) -> usize {
        self.conj_rows.len()
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.rows.len() != self.cols.len() || self.conj_rows.len() != self.conj_cols.len() {
            return Err(Error::MalformedPattern(
                "row and column index lists differ in length".into(),
            ));
        }
        let all = self
            .rows
            .iter()
            .chain(&self.cols)
            .chain(&self.conj_rows)
            .chain(&self.conj_cols);
        for &index in all {
            if index >= dim {
                return Err(Error::IndexOutOfRange { index, dim });
            }
        }
        Ok(())
    }

    /// Permutations `σ` with `a_k = b_{σ(k)}` for every `k`.
    fn matching_perms<'a>(
        a: &'a [usize],
        b: &'a [usize],
        perms: &'a [Permutation],
    ) -> impl Iterator<Item = &'a Permutation> + 'a {
        perms
            .iter()
            .filter(move |s| (0..a.len()).all(|k| a[k] == b[s.apply(k)]))
    }
}

/// Checks shared by the exact and leading evaluators. `Ok(None)` means the
/// integral vanishes because the factor counts differ.
fn prepare(pattern: &IndexPattern, dim: usize) -> Result<Option<usize>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    pattern.validate(dim)?;
    let n = pattern.plain_count();
    check_degree(n.max(pattern.conj_count()))?;
    if n != pattern.conj_count() {
        return Ok(None);
    }
    if dim < n {
        return Err(Error::MatrixTooSmall { dim, n });
    }
    Ok(Some(n))
}

/// The exact Haar integral as a rational number.
pub fn haar_integral_rational(pattern: &IndexPattern, dim: usize) -> Result<BigRational> {
    let Some(n) = prepare(pattern, dim)? else {
        return Ok(BigRational::zero());
    };
    if n == 0 {
        return Ok(BigRational::one());
    }
    let table = weingarten_table(n, dim)?;
    let perms = all_permutations(n);
    let sigmas: Vec<_> =
        IndexPattern::matching_perms(&pattern.rows, &pattern.conj_rows, &perms).collect();
    let taus: Vec<_> =
        IndexPattern::matching_perms(&pattern.cols, &pattern.conj_cols, &perms).collect();
    let mut total = BigRational::zero();
    for s in &sigmas {
        for t in &taus {
            total += table.value_exact(&s.compose(&t.inverse()));
        }
    }
    Ok(total)
}

/// The exact Haar integral of the monomial. The value is always real.
pub fn haar_integral_exact(pattern: &IndexPattern, dim: usize) -> Result<f64> {
    Ok(haar_integral_rational(pattern, dim)?
        .to_f64()
        .unwrap_or(f64::NAN))
}

/// The leading-order approximation: `N^{-n} Σ_σ` over `σ` matching both
/// the row and the column indices.
pub fn haar_integral_leading(pattern: &IndexPattern, dim: usize) -> Result<f64> {
    let Some(n) = prepare(pattern, dim)? else {
        return Ok(0.0);
    };
    let perms = all_permutations(n);
    let count = IndexPattern::matching_perms(&pattern.rows, &pattern.conj_rows, &perms)
        .filter(|s| (0..n).all(|k| pattern.cols[k] == pattern.conj_cols[s.apply(k)]))
        .count();
    Ok(count as f64 / (dim as f64).powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn permutation_basics() {
        assert_eq!(all_permutations(3).len(), 6);
        assert_eq!(all_permutations(4)[0], Permutation::identity(4));
        let s = Permutation::from_images(vec![1, 2, 0]).unwrap();
        assert_eq!(s.cycle_type(), vec![3]);
        assert_eq!(s.compose(&s.inverse()), Permutation::identity(3));
        assert!(Permutation::from_images(vec![0, 0]).is_err());
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(6).len(), 11);
    }

    #[test]
    fn composition_is_associative() {
        let ps = all_permutations(3);
        for a in &ps {
            for b in &ps {
                for c in &ps {
                    assert_eq!(a.compose(b).compose(c), a.compose(&b.compose(c)));
                }
            }
        }
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(1, 5).unwrap();
        assert_eq!(g.entries[(0, 0)], 5.0);
        let g = gram_matrix(2, 3).unwrap();
        assert_eq!(
            g.entries,
            DMatrix::from_row_slice(2, 2, &[9.0, 3.0, 3.0, 9.0])
        );
        let g = gram_matrix(3, 4).unwrap();
        for i in 0..6 {
            assert_eq!(g.entries[(i, i)], 64.0);
        }
        assert_eq!(g.entries, g.entries.transpose());
        assert!(gram_matrix(7, 8).is_err());
    }

    #[test]
    fn small_tables_match_closed_forms() {
        for n in 1..=10i64 {
            let t = weingarten_table(1, n as usize).unwrap();
            assert_eq!(t.value_exact(&Permutation::identity(1)), &q(1, n));
        }
        for n in 2..=10i64 {
            let t = weingarten_table(2, n as usize).unwrap();
            let swap = Permutation::from_images(vec![1, 0]).unwrap();
            assert_eq!(t.value_exact(&Permutation::identity(2)), &q(1, n * n - 1));
            assert_eq!(t.value_exact(&swap), &q(-1, n * (n * n - 1)));
        }
    }

    #[test]
    fn refuses_small_dim_and_large_degree() {
        assert_eq!(
            weingarten_table(3, 2).unwrap_err(),
            Error::MatrixTooSmall { dim: 2, n: 3 }
        );
        assert!(matches!(
            weingarten_table(7, 10),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn degree_six_residual() {
        let n = 6;
        let dim = 7;
        let g = gram_matrix(n, dim).unwrap();
        let t = weingarten_table(n, dim).unwrap();
        let w: Vec<f64> = g.perms.iter().map(|p| t.value(p)).collect();
        for r in 0..g.perms.len() {
            let lhs: f64 = (0..w.len()).map(|c| g.entries[(r, c)] * w[c]).sum();
            let target = if r == 0 { 1.0 } else { 0.0 };
            assert!((lhs - target).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_integrals() {
        let n = 5;
        // ∫ U_ij U*_kl = δ_ik δ_jl / N
        let p = IndexPattern::new(&[(1, 2)], &[(1, 2)]);
        assert_eq!(haar_integral_rational(&p, n).unwrap(), q(1, 5));
        let p = IndexPattern::new(&[(1, 2)], &[(1, 3)]);
        assert_eq!(haar_integral_rational(&p, n).unwrap(), q(0, 1));
        // ∫ |U_11|⁴ = 2/(N(N+1))
        let p = IndexPattern::new(&[(0, 0), (0, 0)], &[(0, 0), (0, 0)]);
        assert_eq!(haar_integral_rational(&p, n).unwrap(), q(2, 30));
        // ∫ |U_11|²|U_22|² = 1/(N²−1)
        let p = IndexPattern::new(&[(0, 0), (1, 1)], &[(0, 0), (1, 1)]);
        assert_eq!(haar_integral_rational(&p, n).unwrap(), q(1, 24));
        // n ≠ m vanishes
        let p = IndexPattern::new(&[(0, 0), (1, 1)], &[(0, 0)]);
        assert_eq!(haar_integral_exact(&p, n).unwrap(), 0.0);
        assert_eq!(haar_integral_leading(&p, n).unwrap(), 0.0);
    }

    #[test]
    fn leading_examples() {
        for n in [2usize, 3, 8] {
            let p = IndexPattern::new(&[(0, 1)], &[(0, 1)]);
            assert_eq!(
                haar_integral_leading(&p, n).unwrap(),
                haar_integral_exact(&p, n).unwrap()
            );
        }
        let p = IndexPattern::new(&[(0, 0), (0, 0)], &[(0, 0), (0, 0)]);
        let n = 10.0;
        assert!((haar_integral_leading(&p, 10).unwrap() - 2.0 / (n * n)).abs() < 1e-15);
    }

    #[test]
    fn pattern_errors() {
        let p = IndexPattern::new(&[(0, 4)], &[(0, 4)]);
        assert_eq!(
            haar_integral_exact(&p, 3).unwrap_err(),
            Error::IndexOutOfRange { index: 4, dim: 3 }
        );
        let p = IndexPattern::new(&[(0, 0); 3], &[(0, 0); 3]);
        assert!(matches!(
            haar_integral_exact(&p, 2),
            Err(Error::MatrixTooSmall { .. })
        ));
        let p = IndexPattern::new(&[(0, 0); 7], &[(0, 0); 7]);
        assert!(matches!(
            haar_integral_exact(&p, 8),
            Err(Error::DegreeTooLarge { .. })
        ));
    }
}
