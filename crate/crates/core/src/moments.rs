//! Exact and leading-order moments of the action under product Haar measure.
//!
//! With `Re Tr P = (Tr P + Tr P†)/2`,
//!
//! ```text
//! t = (1/(2KN)) Σ_o Tr P_o
//! ```
//!
//! over oriented plaquettes `o`, so `E[t^l]` is a sum over ordered
//! `l`-tuples of oriented plaquettes of `E[Π Tr P_o]`. A tuple contributes
//! only if every edge carries as many `U` as `U*` factors. Each surviving
//! tuple is integrated edge by edge with the exact Weingarten formula; the
//! Kronecker deltas then glue the trace indices into loops and every loop
//! contributes a factor `N`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::exec::{map_indexed, Backend};
use crate::lattice::LatticeShape;
use crate::numeric::double_factorial_odd_below;
use crate::pairings::{oriented_plaquettes, OrientedPlaquette};
use crate::weingarten::{all_permutations, partitions, weingarten_table, Permutation};
use crate::{Error, Result};

/// Highest order handled by [`exact_moment_t`].
pub const MAX_EXACT_ORDER: u32 = 4;

/// Cap on the number of partial tuples visited by the exact expansion.
pub const EXACT_WORK_CAP: u128 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    Exact,
    Leading,
    Empirical,
}

/// A moment of the rescaled variable `N·t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub l: u32,
    pub value: f64,
    /// Standard error; zero for exact and leading values.
    pub error: f64,
    /// The Gaussian-limit moment `m_l`.
    pub target: f64,
    pub matrix_dim: usize,
    pub dim: usize,
    pub extent: usize,
    pub sites: usize,
    pub kind: MomentKind,
}

/// `m_l`: the `l`-th moment of the centered Gaussian with variance
/// `D(D−1)/(4K)`, i.e. `(l−1)!! (D(D−1)/(4K))^{l/2}` for even `l`, 0 for odd.
pub fn leading_moment(l: u32, sites: usize, dim: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let variance = (dim * (dim - 1)) as f64 / (4.0 * sites as f64);
    double_factorial_odd_below(l).map_or(f64::INFINITY, |v| v as f64) * variance.powi(l as i32 / 2)
}

/// `N^l E[t^l]` from [`exact_moment_t`], packaged as a report.
pub fn exact_moment_report(
    l: u32,
    shape: &LatticeShape,
    matrix_dim: usize,
) -> Result<MomentReport> {
    let value = exact_moment_t(l, shape, matrix_dim)? * (matrix_dim as f64).powi(l as i32);
    Ok(MomentReport {
        l,
        value,
        error: 0.0,
        target: leading_moment(l, shape.sites(), shape.dim()),
        matrix_dim,
        dim: shape.dim(),
        extent: shape.extent(),
        sites: shape.sites(),
        kind: MomentKind::Exact,
    })
}

pub fn leading_moment_report(l: u32, shape: &LatticeShape, matrix_dim: usize) -> MomentReport {
    let target = leading_moment(l, shape.sites(), shape.dim());
    MomentReport {
        l,
        value: target,
        error: 0.0,
        target,
        matrix_dim,
        dim: shape.dim(),
        extent: shape.extent(),
        sites: shape.sites(),
        kind: MomentKind::Leading,
    }
}

/// `E[t^l]` under the product Haar measure, as an `f64`.
pub fn exact_moment_t(l: u32, shape: &LatticeShape, matrix_dim: usize) -> Result<f64> {
    Ok(exact_moment_t_rational(l, shape, matrix_dim)?
        .to_f64()
        .unwrap_or(f64::NAN))
}

pub fn exact_moment_t_rational(
    l: u32,
    shape: &LatticeShape,
    matrix_dim: usize,
) -> Result<BigRational> {
    exact_moment_t_with(l, shape, matrix_dim, Backend::default())
}

/// Exact `E[t^l]`. Requires `l ≤ 4`, `N ≥ 2l`, and a bounded enumeration.
pub fn exact_moment_t_with(
    l: u32,
    shape: &LatticeShape,
    matrix_dim: usize,
    backend: Backend,
) -> Result<BigRational> {
    check_exact_preconditions(l, shape, matrix_dim)?;
    let expectation_sum = plaquette_trace_sum(l as usize, shape, matrix_dim, backend)?;
    let norm = BigInt::from(2 * shape.sites() * matrix_dim).pow(l);
    Ok(expectation_sum / BigRational::from_integer(norm))
}

fn check_exact_preconditions(l: u32, shape: &LatticeShape, matrix_dim: usize) -> Result<()> {
    if l > MAX_EXACT_ORDER {
        return Err(Error::TooExpensive(format!(
            "exact moments are limited to l ≤ {MAX_EXACT_ORDER}, got {l}"
        )));
    }
    if matrix_dim < 2 * l as usize {
        return Err(Error::MatrixTooSmall {
            dim: matrix_dim,
            n: 2 * l as usize,
        });
    }
    let work = exact_work(l, shape);
    if work > EXACT_WORK_CAP {
        return Err(Error::TooExpensive(format!(
            "about {work} partial tuples for l={l} on D={}, L={}",
            shape.dim(),
            shape.extent()
        )));
    }
    Ok(())
}

/// Partial tuples visited: the first element ranges over one site, the last
/// one is looked up, everything in between is enumerated.
fn exact_work(l: u32, shape: &LatticeShape) -> u128 {
    if l < 2 {
        return 1;
    }
    let per_site = 2 * shape.planes() as u128;
    let all = per_site * shape.sites() as u128;
    per_site.saturating_mul(all.saturating_pow(l - 2))
}

/// One matrix-entry factor of a trace product: the link's edge index,
/// whether it is `U*`, and the trace-index variables for its row and column.
#[derive(Clone, Copy, Debug)]
struct EntryFactor {
    edge: usize,
    conj: bool,
    row: usize,
    col: usize,
}

/// Entry factors of `Tr(F_0 F_1 F_2 F_3)` with index variables
/// `base..base+4`: `F_k[v_k, v_{k+1}]`, and `U†[a,b] = U*[b,a]`.
fn trace_factors(shape: &LatticeShape, op: &OrientedPlaquette, base: usize) -> [EntryFactor; 4] {
    let mut factors = op.plaquette.factors(shape);
    if op.orientation < 0 {
        factors.reverse();
        for f in &mut factors {
            f.dagger = !f.dagger;
        }
    }
    std::array::from_fn(|k| {
        let f = factors[k];
        let (a, b) = (base + k, base + (k + 1) % 4);
        EntryFactor {
            edge: shape.edge_index(f.edge),
            conj: f.dagger,
            row: if f.dagger { b } else { a },
            col: if f.dagger { a } else { b },
        }
    })
}

/// `(loops, sorted (degree, class) per integrated edge)`.
type TermKey = (usize, Vec<(usize, usize)>);

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }

    fn components(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

struct EdgeBlock {
    plain: Vec<(usize, usize)>,
    conj: Vec<(usize, usize)>,
}

/// Adds the Weingarten expansion of `E[Π_o Tr P_o]` for one balanced tuple
/// to `acc`, weighted by `mult`.
fn accumulate_tuple(
    shape: &LatticeShape,
    tuple: &[OrientedPlaquette],
    perms_by_degree: &[Vec<Permutation>],
    class_of: &[HashMap<Vec<usize>, usize>],
    acc: &mut HashMap<TermKey, u64>,
    mult: u64,
) {
    let mut blocks: HashMap<usize, EdgeBlock> = HashMap::new();
    for (k, op) in tuple.iter().enumerate() {
        for f in trace_factors(shape, op, 4 * k) {
            let block = blocks.entry(f.edge).or_insert_with(|| EdgeBlock {
                plain: Vec::new(),
                conj: Vec::new(),
            });
            if f.conj {
                block.conj.push((f.row, f.col));
            } else {
                block.plain.push((f.row, f.col));
            }
        }
    }
    let mut blocks: Vec<EdgeBlock> = blocks.into_values().collect();
    blocks.sort_by_key(|b| b.plain.clone());
    debug_assert!(blocks.iter().all(|b| b.plain.len() == b.conj.len()));

    let vars = 4 * tuple.len();
    let degrees: Vec<usize> = blocks.iter().map(|b| b.plain.len()).collect();
    let sizes: Vec<usize> = degrees.iter().map(|&n| perms_by_degree[n].len()).collect();
    // odometer over (σ_e, τ_e) for every edge
    let mut counter = vec![(0usize, 0usize); blocks.len()];
    loop {
        let mut uf = UnionFind::new(vars);
        let mut classes = Vec::with_capacity(blocks.len());
        for (b, &(si, ti)) in blocks.iter().zip(&counter) {
            let n = b.plain.len();
            let sigma = &perms_by_degree[n][si];
            let tau = &perms_by_degree[n][ti];
            for k in 0..n {
                uf.union(b.plain[k].0, b.conj[sigma.apply(k)].0);
                uf.union(b.plain[k].1, b.conj[tau.apply(k)].1);
            }
            let class = class_of[n][&sigma.compose(&tau.inverse()).cycle_type()];
            classes.push((n, class));
        }
        classes.sort_unstable();
        *acc.entry((uf.components(), classes)).or_default() += mult;

        // advance
        let mut pos = 0;
        loop {
            if pos == counter.len() {
                return;
            }
            counter[pos].0 += 1;
            if counter[pos].0 < sizes[pos] {
                break;
            }
            counter[pos].0 = 0;
            counter[pos].1 += 1;
            if counter[pos].1 < sizes[pos] {
                break;
            }
            counter[pos].1 = 0;
            pos += 1;
        }
    }
}

/// Signed `U`/`U*` count per edge for one oriented plaquette.
fn edge_charges(shape: &LatticeShape, op: &OrientedPlaquette) -> [(usize, i32); 4] {
    trace_factors(shape, op, 0).map(|f| (f.edge, if f.conj { -1 } else { 1 }))
}

struct Enumerator<'a> {
    shape: &'a LatticeShape,
    all: &'a [OrientedPlaquette],
    charges: Vec<[(usize, i32); 4]>,
    /// Oriented plaquettes touching each edge.
    incident: Vec<Vec<usize>>,
    perms_by_degree: &'a [Vec<Permutation>],
    class_of: &'a [HashMap<Vec<usize>, usize>],
}

impl Enumerator<'_> {
    fn recurse(
        &self,
        tuple: &mut Vec<OrientedPlaquette>,
        imbalance: &mut [i32],
        total_abs: i32,
        remaining: usize,
        acc: &mut HashMap<TermKey, u64>,
        mult: u64,
    ) {
        if total_abs > 4 * remaining as i32 {
            return;
        }
        if remaining == 0 {
            if total_abs == 0 {
                accumulate_tuple(
                    self.shape,
                    tuple,
                    self.perms_by_degree,
                    self.class_of,
                    acc,
                    mult,
                );
            }
            return;
        }
        let candidates: Box<dyn Iterator<Item = usize>> = if remaining == 1 {
            // the last plaquette must cancel the imbalance exactly
            match imbalance.iter().position(|&c| c != 0) {
                Some(e) => Box::new(self.incident[e].iter().copied()),
                None => return,
            }
        } else {
            Box::new(0..self.all.len())
        };
        for idx in candidates {
            let mut new_abs = total_abs;
            for &(e, q) in &self.charges[idx] {
                new_abs += (imbalance[e] + q).abs() - imbalance[e].abs();
                imbalance[e] += q;
            }
            tuple.push(self.all[idx]);
            self.recurse(tuple, imbalance, new_abs, remaining - 1, acc, mult);
            tuple.pop();
            for &(e, q) in &self.charges[idx] {
                imbalance[e] -= q;
            }
        }
    }
}

/// `Σ_{tuples} E[Π_o Tr P_o]` as an exact rational.
fn plaquette_trace_sum(
    l: usize,
    shape: &LatticeShape,
    matrix_dim: usize,
    backend: Backend,
) -> Result<BigRational> {
    if l == 0 {
        return Ok(BigRational::from_integer(1.into()));
    }
    let mut total = BigRational::zero();
    for (_, part) in sums_by_first_plaquette(l, shape, matrix_dim, backend)? {
        total += part;
    }
    Ok(total)
}

/// Splits the tuple sum by the first oriented plaquette, restricted to
/// plaquettes at site 0 and weighted by `K`. Translations act freely on
/// tuples and preserve the Haar measure, so this restriction is exact.
fn sums_by_first_plaquette(
    l: usize,
    shape: &LatticeShape,
    matrix_dim: usize,
    backend: Backend,
) -> Result<Vec<(OrientedPlaquette, BigRational)>> {
    let all = oriented_plaquettes(shape);
    let charges: Vec<_> = all.iter().map(|op| edge_charges(shape, op)).collect();
    let mut incident = vec![Vec::new(); shape.num_edges()];
    for (idx, ch) in charges.iter().enumerate() {
        for &(e, _) in ch {
            incident[e].push(idx);
        }
    }
    let max_degree = l / 2;
    let perms_by_degree: Vec<Vec<Permutation>> = (0..=max_degree).map(all_permutations).collect();
    let class_of: Vec<HashMap<Vec<usize>, usize>> = (0..=max_degree)
        .map(|n| {
            partitions(n)
                .into_iter()
                .enumerate()
                .map(|(k, p)| (p, k))
                .collect()
        })
        .collect();
    let tables = (1..=max_degree)
        .map(|n| weingarten_table(n, matrix_dim))
        .collect::<Result<Vec<_>>>()?;
    let enumerator = Enumerator {
        shape,
        all: &all,
        charges,
        incident,
        perms_by_degree: &perms_by_degree,
        class_of: &class_of,
    };

    let firsts: Vec<usize> = (0..all.len())
        .filter(|&i| all[i].plaquette.site == 0)
        .collect();
    let sites = shape.sites() as u64;
    let big_n = BigInt::from(matrix_dim);
    Ok(map_indexed(backend, firsts.len(), |j| {
        let idx = firsts[j];
        let mut acc = HashMap::new();
        let mut imbalance = vec![0i32; shape.num_edges()];
        for &(e, q) in &enumerator.charges[idx] {
            imbalance[e] += q;
        }
        let mut tuple = vec![all[idx]];
        enumerator.recurse(&mut tuple, &mut imbalance, 4, l - 1, &mut acc, sites);
        let mut sum = BigRational::zero();
        for ((loops, classes), count) in acc {
            let mut term = BigRational::from_integer(
                BigInt::from(count) * num_traits::pow(big_n.clone(), loops),
            );
            for (n, class) in classes {
                term *= &tables[n - 1].class_values()[class];
            }
            sum += term;
        }
        (all[idx], sum)
    }))
}
