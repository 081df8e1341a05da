//! Counting the leading-order terms of `E[t^l]`: ordered tuples of oriented
//! plaquettes whose positions can be grouped into oppositely oriented pairs
//! of the same plaquette.

use std::collections::HashMap;

use crate::exec::{map_indexed, Backend};
use crate::lattice::{LatticeShape, Plaquette};
use crate::numeric::{choose2, double_factorial_odd_below};
use crate::{Error, Result};

/// Largest enumeration `(2·K·D(D−1)/2)^l` the brute-force counter accepts.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// A plaquette traversed as written (`+1`) or reversed (`−1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedPlaquette {
    pub plaquette: Plaquette,
    pub orientation: i8,
}

/// Both orientations of every plaquette, `+1` before `−1` for each.
pub fn oriented_plaquettes(shape: &LatticeShape) -> Vec<OrientedPlaquette> {
    shape
        .plaquettes()
        .into_iter()
        .flat_map(|plaquette| {
            [1, -1].map(|orientation| OrientedPlaquette {
                plaquette,
                orientation,
            })
        })
        .collect()
}

/// `(l−1)!! · 2^{l/2} · K^{l/2} · C(D,2)^{l/2}` for even `l`, 0 for odd `l`.
///
/// Returns `None` on `u128` overflow.
pub fn count_pairings_closed(l: u32, sites: usize, dim: usize) -> Option<u128> {
    if l % 2 == 1 {
        return Some(0);
    }
    let half = l / 2;
    let per_pair = 2u128
        .checked_mul(sites as u128)?
        .checked_mul(choose2(dim) as u128)?;
    double_factorial_odd_below(l)?.checked_mul(per_pair.checked_pow(half)?)
}

/// Enumerates every ordered `l`-tuple of oriented plaquettes and counts the
/// ways of splitting its positions into pairs `{i, j}` where both carry the
/// same plaquette with opposite orientations. Each tuple is counted once
/// per admissible pairing, which is how the closed form counts.
pub fn count_pairings_bruteforce(l: u32, shape: &LatticeShape) -> Result<u128> {
    count_pairings_bruteforce_with(l, shape, Backend::default())
}

pub fn count_pairings_bruteforce_with(
    l: u32,
    shape: &LatticeShape,
    backend: Backend,
) -> Result<u128> {
    let all = oriented_plaquettes(shape);
    let size = (all.len() as u128).checked_pow(l).unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_CAP {
        return Err(Error::TooExpensive(format!(
            "{} oriented plaquettes to the power {l} exceeds {BRUTE_FORCE_CAP}",
            all.len()
        )));
    }
    if l == 0 {
        return Ok(1);
    }
    let l = l as usize;
    let counts = map_indexed(backend, all.len(), |first| {
        let mut tuple = vec![all[first]; l];
        let mut total = 0u128;
        for_each_suffix(&all, &mut tuple, 1, &mut |t| total += count_matchings(t));
        total
    });
    Ok(counts.into_iter().sum())
}

fn for_each_suffix(
    all: &[OrientedPlaquette],
    tuple: &mut [OrientedPlaquette],
    pos: usize,
    visit: &mut impl FnMut(&[OrientedPlaquette]),
) {
    if pos == tuple.len() {
        visit(tuple);
        return;
    }
    for op in all {
        tuple[pos] = *op;
        for_each_suffix(all, tuple, pos + 1, visit);
    }
}

/// Number of perfect matchings of positions into opposite-orientation pairs
/// of the same plaquette, by explicit recursion over the lowest free position.
fn count_matchings(tuple: &[OrientedPlaquette]) -> u128 {
    fn rec(tuple: &[OrientedPlaquette], used: &mut [bool]) -> u128 {
        let Some(i) = used.iter().position(|&u| !u) else {
            return 1;
        };
        used[i] = true;
        let mut total = 0;
        for j in i + 1..tuple.len() {
            if !used[j]
                && tuple[j].plaquette == tuple[i].plaquette
                && tuple[j].orientation == -tuple[i].orientation
            {
                used[j] = true;
                total += rec(tuple, used);
                used[j] = false;
            }
        }
        used[i] = false;
        total
    }
    if tuple.len() % 2 == 1 {
        return 0;
    }
    rec(tuple, &mut vec![false; tuple.len()])
}

/// Distinct ordered tuples admitting at least one pairing (ignoring the
/// pairing multiplicity). Smaller than the pairing count once `l ≥ 4`.
pub fn count_pairable_tuples(l: u32, shape: &LatticeShape) -> Result<u128> {
    let all = oriented_plaquettes(shape);
    let size = (all.len() as u128).checked_pow(l).unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_CAP {
        return Err(Error::TooExpensive(format!("{size} tuples")));
    }
    if l == 0 {
        return Ok(1);
    }
    let mut tuple = vec![all[0]; l as usize];
    let mut total = 0u128;
    for first in &all {
        tuple[0] = *first;
        for_each_suffix(&all, &mut tuple, 1, &mut |t| {
            let mut balance: HashMap<Plaquette, i32> = HashMap::new();
            for op in t {
                *balance.entry(op.plaquette).or_default() += op.orientation as i32;
            }
            if balance.values().all(|&b| b == 0) {
                total += 1;
            }
        });
    }
    Ok(total)
}

/// `count / (2K)^l`, the leading moment rebuilt from the pairing count.
pub fn moment_from_count(count: u128, l: u32, sites: usize) -> f64 {
    count as f64 / (2.0 * sites as f64).powi(l as i32)
}
