//! The normalized action `t(U)`, the Wilson weight, and gauge transformations.

use num_complex::Complex64;

use crate::haar::ComplexSquareMatrix;
use crate::lattice::{GaugeConfig, Plaquette};
use crate::numeric::pairwise_sum;
use crate::{Error, Result};

/// The ordered product `U†_{x,ν} U†_{x+ν,μ} U_{x+μ,ν} U_{x,μ}`.
pub fn plaquette_holonomy(config: &GaugeConfig, p: &Plaquette) -> ComplexSquareMatrix {
    let shape = config.shape();
    let mut factors = p.factors(shape).into_iter().map(|f| {
        let u = config.link(f.edge);
        if f.dagger {
            u.adjoint()
        } else {
            u.clone()
        }
    });
    let first = factors.next().expect("four factors");
    factors.fold(first, |acc, u| &acc * &u)
}

/// `Tr` of the plaquette holonomy, using `Tr(C† B)` with
/// `C = U_{x+ν,μ} U_{x,ν}` and `B = U_{x+μ,ν} U_{x,μ}`.
pub fn plaquette_trace(config: &GaugeConfig, p: &Plaquette) -> Complex64 {
    let shape = config.shape();
    let [a, b, c, d] = p.boundary(shape);
    let left = config.link(c) * config.link(d);
    let right = config.link(b) * config.link(a);
    left.trace_adjoint_mul(&right)
}

/// `t = (1/K) Σ_p (1/N) Re Tr(holonomy_p)`, pairwise-summed over plaquettes.
pub fn action_t(config: &GaugeConfig) -> f64 {
    let shape = config.shape();
    let n = config.matrix_dim() as f64;
    let terms: Vec<f64> = shape
        .plaquettes()
        .iter()
        .map(|p| plaquette_trace(config, p).re / n)
        .collect();
    pairwise_sum(&terms) / shape.sites() as f64
}

/// `exp((2N²K/λ) · t)` for a given action value.
pub fn wilson_weight_from_t(t: f64, matrix_dim: usize, sites: usize, lambda: f64) -> Result<f64> {
    Ok((wilson_exponent_scale(matrix_dim, sites, lambda)? * t).exp())
}

/// The factor `2N²K/λ` multiplying `t` in the exponent.
pub fn wilson_exponent_scale(matrix_dim: usize, sites: usize, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::NonPositiveCoupling(lambda));
    }
    let n = matrix_dim as f64;
    Ok(2.0 * n * n * sites as f64 / lambda)
}

pub fn wilson_weight(config: &GaugeConfig, lambda: f64) -> Result<f64> {
    wilson_weight_from_t(
        action_t(config),
        config.matrix_dim(),
        config.shape().sites(),
        lambda,
    )
}

/// Applies `U_{x,μ} ↦ g_{x+μ} U_{x,μ} g_x†` with one unitary `g_x` per site.
pub fn gauge_transform(config: &GaugeConfig, gauge: &[ComplexSquareMatrix]) -> Result<GaugeConfig> {
    let shape = *config.shape();
    if gauge.len() != shape.sites() {
        return Err(Error::DimensionMismatch {
            expected: shape.sites(),
            got: gauge.len(),
        });
    }
    if let Some(g) = gauge.iter().find(|g| g.dim() != config.matrix_dim()) {
        return Err(Error::DimensionMismatch {
            expected: config.matrix_dim(),
            got: g.dim(),
        });
    }
    Ok(config.map_links(|e, u| {
        let head = &gauge[shape.neighbor(e.site, e.mu)];
        let tail = &gauge[e.site];
        &(head * u) * &tail.adjoint()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_haar_unitary;
    use crate::{LatticeShape, RngStream};

    fn random_gauge(
        shape: &LatticeShape,
        n: usize,
        rng: &mut RngStream,
    ) -> Vec<ComplexSquareMatrix> {
        (0..shape.sites())
            .map(|_| sample_haar_unitary(n, rng).unwrap())
            .collect()
    }

    #[test]
    fn identity_config_gives_max_action() {
        for (d, l) in [(2, 2), (2, 4), (3, 2), (4, 2)] {
            let s = LatticeShape::new(d, l).unwrap();
            for n in [1, 3] {
                let cfg = GaugeConfig::identity(s, n).unwrap();
                let t = action_t(&cfg);
                assert!((t - (d * (d - 1) / 2) as f64).abs() <= 1e-14);
                for p in s.plaquettes() {
                    let h = plaquette_holonomy(&cfg, &p);
                    assert_eq!(h, ComplexSquareMatrix::identity(n).unwrap());
                }
            }
        }
    }

    #[test]
    fn trace_shortcut_matches_literal_product() {
        let s = LatticeShape::new(3, 2).unwrap();
        let cfg = GaugeConfig::random(s, 3, &mut RngStream::new(2, 0)).unwrap();
        for p in s.plaquettes() {
            let h = plaquette_holonomy(&cfg, &p);
            assert!(h.unitarity_residual() <= 1e-10);
            assert!((h.trace() - plaquette_trace(&cfg, &p)).norm() < 1e-12);
        }
    }

    #[test]
    fn global_phase_leaves_holonomy() {
        let s = LatticeShape::new(2, 2).unwrap();
        let cfg = GaugeConfig::random(s, 2, &mut RngStream::new(3, 0)).unwrap();
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated = cfg.map_links(|_, u| u.scale(phase));
        for p in s.plaquettes() {
            let a = plaquette_holonomy(&cfg, &p);
            let b = plaquette_holonomy(&rotated, &p);
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn random_action_is_bounded() {
        let s = LatticeShape::new(2, 3).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..50 {
            let cfg = GaugeConfig::random(s, 3, &mut rng).unwrap();
            assert!(action_t(&cfg).abs() <= 1.0);
        }
    }

    #[test]
    fn wilson_weight_examples() {
        let s = LatticeShape::new(2, 2).unwrap();
        let cfg = GaugeConfig::identity(s, 2).unwrap();
        let w = wilson_weight(&cfg, 2.0).unwrap();
        assert!((w / 16f64.exp() - 1.0).abs() < 1e-14);
        assert_eq!(wilson_weight_from_t(0.0, 5, 9, 1.3).unwrap(), 1.0);
        assert!(wilson_weight(&cfg, 0.0).is_err());
        assert!(wilson_weight(&cfg, -1.0).is_err());
        let lo = wilson_weight_from_t(-0.2, 3, 9, 2.0).unwrap();
        let hi = wilson_weight_from_t(0.1, 3, 9, 2.0).unwrap();
        assert!(lo < hi);
    }

    #[test]
    fn gauge_invariance() {
        let mut rng = RngStream::new(5, 0);
        for (d, l, n) in [(2, 3, 3), (3, 2, 2), (2, 2, 3)] {
            let s = LatticeShape::new(d, l).unwrap();
            let cfg = GaugeConfig::random(s, n, &mut rng).unwrap();
            let g = random_gauge(&s, n, &mut rng);
            let moved = gauge_transform(&cfg, &g).unwrap();
            assert!((action_t(&cfg) - action_t(&moved)).abs() <= 1e-10);
        }
    }

    #[test]
    fn trivial_and_constant_gauges() {
        let s = LatticeShape::new(2, 3).unwrap();
        let mut rng = RngStream::new(6, 0);
        let cfg = GaugeConfig::random(s, 2, &mut rng).unwrap();
        let ones = vec![ComplexSquareMatrix::identity(2).unwrap(); s.sites()];
        let same = gauge_transform(&cfg, &ones).unwrap();
        for (a, b) in cfg.links().iter().zip(same.links()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
        let v = sample_haar_unitary(2, &mut rng).unwrap();
        let id = GaugeConfig::identity(s, 2).unwrap();
        let moved = gauge_transform(&id, &vec![v; s.sites()]).unwrap();
        assert!((action_t(&moved) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_dimension_mismatch() {
        let s = LatticeShape::new(2, 2).unwrap();
        let cfg = GaugeConfig::identity(s, 2).unwrap();
        let wrong = vec![ComplexSquareMatrix::identity(3).unwrap(); s.sites()];
        assert!(gauge_transform(&cfg, &wrong).is_err());
        assert!(gauge_transform(&cfg, &wrong[..1]).is_err());
    }

    #[test]
    fn adjoint_links_keep_action() {
        // Reversing every link maps each plaquette trace to a conjugate trace
        // of a (different) plaquette product; t is unchanged since it is real.
        let s = LatticeShape::new(2, 3).unwrap();
        let cfg = GaugeConfig::random(s, 3, &mut RngStream::new(8, 0)).unwrap();
        let mut total = 0.0;
        for p in s.plaquettes() {
            total += plaquette_holonomy(&cfg, &p).adjoint().trace().re;
        }
        let t_rev = total / (3.0 * s.sites() as f64);
        assert!((t_rev - action_t(&cfg)).abs() < 1e-12);
    }
}
