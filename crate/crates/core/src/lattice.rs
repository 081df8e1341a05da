//! Periodic hypercubic lattice geometry and gauge-field configurations.
//!
//! Sites are indexed row-major with coordinate 0 varying fastest:
//! `site = x_0 + L·x_1 + L²·x_2 + …`. Edge `(site, mu)` has index
//! `site·D + mu`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::haar::{sample_haar_unitary, ComplexSquareMatrix};
use crate::numeric::choose2;
use crate::{Error, Result};

/// Uniform periodic lattice of extent `L` in each of `D` directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeShape {
    dim: usize,
    extent: usize,
    sites: usize,
}

impl LatticeShape {
    /// Requires `D ≥ 2` and `L ≥ 2`. With `L = 1` a plaquette would run
    /// over the same edge twice.
    pub fn new(dim: usize, extent: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidLattice(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if extent < 2 {
            return Err(Error::InvalidLattice(format!(
                "extent must be at least 2, got {extent}"
            )));
        }
        let sites = u32::try_from(dim)
            .ok()
            .and_then(|d| extent.checked_pow(d))
            .filter(|&k| k <= 1 << 32)
            .ok_or_else(|| Error::InvalidLattice(format!("{extent}^{dim} sites is too many")))?;
        Ok(Self { dim, extent, sites })
    }

    /// `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L`.
    pub fn extent(&self) -> usize {
        self.extent
    }

    /// `K = L^D`.
    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `K·D`.
    pub fn num_edges(&self) -> usize {
        self.sites * self.dim
    }

    /// Number of coordinate planes, `D(D−1)/2`.
    pub fn planes(&self) -> usize {
        choose2(self.dim)
    }

    /// `K·D(D−1)/2`.
    pub fn num_plaquettes(&self) -> usize {
        self.sites * self.planes()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        (0..self.dim)
            .map(|_| {
                let c = rest % self.extent;
                rest /= self.extent;
                c
            })
            .collect()
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.extent + c % self.extent)
    }

    /// The site one step from `site` in direction `mu`, with wrap-around.
    pub fn neighbor(&self, site: usize, mu: usize) -> usize {
        let stride = self.extent.pow(mu as u32);
        let coord = (site / stride) % self.extent;
        if coord + 1 == self.extent {
            site + stride - self.extent * stride
        } else {
            site + stride
        }
    }

    pub fn edge(&self, site: usize, mu: usize) -> EdgeId {
        EdgeId { site, mu }
    }

    pub fn edge_index(&self, edge: EdgeId) -> usize {
        edge.site * self.dim + edge.mu
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.sites).flat_map(move |site| (0..self.dim).map(move |mu| EdgeId { site, mu }))
    }

    /// All plaquettes, ordered by site, then `mu`, then `nu > mu`.
    pub fn plaquettes(&self) -> Vec<Plaquette> {
        let mut out = Vec::with_capacity(self.num_plaquettes());
        for site in 0..self.sites {
            for mu in 0..self.dim {
                for nu in mu + 1..self.dim {
                    out.push(Plaquette { site, mu, nu });
                }
            }
        }
        out
    }
}

/// Directed edge from `site` to `site + mu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub site: usize,
    pub mu: usize,
}

/// Elementary square at `site` spanned by directions `mu < nu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaquette {
    pub site: usize,
    pub mu: usize,
    pub nu: usize,
}

/// One factor of a plaquette product: the link and whether it is daggered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaquetteFactor {
    pub edge: EdgeId,
    pub dagger: bool,
}

impl Plaquette {
    /// The four boundary edges in traversal order:
    /// `(x,μ)`, `(x+μ,ν)`, `(x+ν,μ)`, `(x,ν)`.
    pub fn boundary(&self, shape: &LatticeShape) -> [EdgeId; 4] {
        let x = self.site;
        [
            EdgeId {
                site: x,
                mu: self.mu,
            },
            EdgeId {
                site: shape.neighbor(x, self.mu),
                mu: self.nu,
            },
            EdgeId {
                site: shape.neighbor(x, self.nu),
                mu: self.mu,
            },
            EdgeId {
                site: x,
                mu: self.nu,
            },
        ]
    }

    /// Factors of `U†_{x,ν} U†_{x+ν,μ} U_{x+μ,ν} U_{x,μ}`, left to right.
    pub fn factors(&self, shape: &LatticeShape) -> [PlaquetteFactor; 4] {
        let [a, b, c, d] = self.boundary(shape);
        [
            PlaquetteFactor {
                edge: d,
                dagger: true,
            },
            PlaquetteFactor {
                edge: c,
                dagger: true,
            },
            PlaquetteFactor {
                edge: b,
                dagger: false,
            },
            PlaquetteFactor {
                edge: a,
                dagger: false,
            },
        ]
    }
}

/// One unitary per directed edge.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeConfig {
    shape: LatticeShape,
    dim: usize,
    links: Vec<ComplexSquareMatrix>,
}

impl GaugeConfig {
    pub fn identity(shape: LatticeShape, dim: usize) -> Result<Self> {
        let one = ComplexSquareMatrix::identity(dim)?;
        Ok(Self {
            shape,
            dim,
            links: vec![one; shape.num_edges()],
        })
    }

    /// Independent Haar links, drawn in edge-index order.
    pub fn random<R: Rng + ?Sized>(shape: LatticeShape, dim: usize, rng: &mut R) -> Result<Self> {
        let links = (0..shape.num_edges())
            .map(|_| sample_haar_unitary(dim, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shape, dim, links })
    }

    /// Links must be in edge-index order, each `dim × dim`.
    pub fn from_links(
        shape: LatticeShape,
        dim: usize,
        links: Vec<ComplexSquareMatrix>,
    ) -> Result<Self> {
        if links.len() != shape.num_edges() {
            return Err(Error::DimensionMismatch {
                expected: shape.num_edges(),
                got: links.len(),
            });
        }
        if let Some(bad) = links.iter().find(|u| u.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self { shape, dim, links })
    }

    pub fn shape(&self) -> &LatticeShape {
        &self.shape
    }

    /// Matrix size `N`.
    pub fn matrix_dim(&self) -> usize {
        self.dim
    }

    pub fn link(&self, edge: EdgeId) -> &ComplexSquareMatrix {
        &self.links[self.shape.edge_index(edge)]
    }

    pub fn links(&self) -> &[ComplexSquareMatrix] {
        &self.links
    }

    pub fn map_links(
        &self,
        mut f: impl FnMut(EdgeId, &ComplexSquareMatrix) -> ComplexSquareMatrix,
    ) -> Self {
        let links = self
            .shape
            .edges()
            .zip(&self.links)
            .map(|(e, u)| f(e, u))
            .collect();
        Self {
            shape: self.shape,
            dim: self.dim,
            links,
        }
    }

    pub fn to_dump(&self, seed: Option<u64>) -> ConfigDump {
        ConfigDump {
            dim: self.shape.dim(),
            extent: self.shape.extent(),
            matrix_size: self.dim,
            seed,
            links: self.links.iter().map(|u| u.to_interleaved()).collect(),
        }
    }

    pub fn from_dump(dump: &ConfigDump) -> Result<Self> {
        let shape = LatticeShape::new(dump.dim, dump.extent)?;
        let links = dump
            .links
            .iter()
            .map(|v| ComplexSquareMatrix::from_interleaved(dump.matrix_size, v))
            .collect::<Result<Vec<_>>>()?;
        Self::from_links(shape, dump.matrix_size, links)
    }
}

/// On-disk JSON form of a [`GaugeConfig`].
///
/// `links[e]` holds edge `e = site·D + mu` as `2N²` doubles, row-major,
/// real and imaginary parts interleaved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigDump {
    pub dim: usize,
    pub extent: usize,
    pub matrix_size: usize,
    pub seed: Option<u64>,
    pub links: Vec<Vec<f64>>,
}

impl ConfigDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}
