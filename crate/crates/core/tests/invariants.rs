use proptest::prelude::*;

use ymconc::action::{
    action_t, gauge_transform, plaquette_trace, wilson_weight, wilson_weight_from_t,
};
use ymconc::concentration::sample_t_with;
use ymconc::lattice::ConfigDump;
use ymconc::weingarten::{haar_integral_exact, haar_integral_rational, IndexPattern};
use ymconc::{sample_haar_unitary, Backend, GaugeConfig, LatticeShape, RngStream};

fn shape_strategy() -> impl Strategy<Value = LatticeShape> {
    prop_oneof![
        Just((2usize, 2usize)),
        Just((2, 3)),
        Just((2, 4)),
        Just((3, 2)),
        Just((3, 3)),
        Just((4, 2)),
    ]
    .prop_map(|(d, l)| LatticeShape::new(d, l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn haar_samples_are_unitary(dim in 1usize..12, seed in any::<u64>(), stream in 0u64..64) {
        let mut rng = RngStream::new(seed, stream);
        let u = sample_haar_unitary(dim, &mut rng).unwrap();
        prop_assert!(u.unitarity_residual() <= 1e-10);
        prop_assert!((u.trace().norm()) <= dim as f64 + 1e-9);
    }

    #[test]
    fn action_is_gauge_invariant(shape in shape_strategy(), dim in 1usize..4, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let config = GaugeConfig::random(shape, dim, &mut rng).unwrap();
        let g: Vec<_> = (0..shape.sites())
            .map(|_| sample_haar_unitary(dim, &mut rng).unwrap())
            .collect();
        let moved = gauge_transform(&config, &g).unwrap();
        prop_assert!((action_t(&config) - action_t(&moved)).abs() <= 1e-10);
        for p in shape.plaquettes() {
            let a = plaquette_trace(&config, &p);
            let b = plaquette_trace(&moved, &p);
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn action_is_bounded(shape in shape_strategy(), dim in 1usize..4, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1);
        let config = GaugeConfig::random(shape, dim, &mut rng).unwrap();
        let t = action_t(&config);
        prop_assert!(t.abs() <= shape.planes() as f64 + 1e-12);
    }

    #[test]
    fn dumps_round_trip(shape in shape_strategy(), dim in 1usize..4, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 2);
        let config = GaugeConfig::random(shape, dim, &mut rng).unwrap();
        let text = config.to_dump(Some(seed)).to_json();
        let back = GaugeConfig::from_dump(&ConfigDump::from_json(&text).unwrap()).unwrap();
        prop_assert_eq!(&back, &config);
        prop_assert_eq!(action_t(&back), action_t(&config));
    }

    #[test]
    fn weight_agrees_with_t(shape in shape_strategy(), seed in any::<u64>(), lambda in 0.5f64..20.0) {
        let mut rng = RngStream::new(seed, 3);
        let config = GaugeConfig::random(shape, 2, &mut rng).unwrap();
        let w = wilson_weight(&config, lambda).unwrap();
        let expect = wilson_weight_from_t(action_t(&config), 2, shape.sites(), lambda).unwrap();
        prop_assert!((w / expect - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn integrals_are_invariant_under_relabeling(
        rows in proptest::collection::vec(0usize..3, 2),
        cols in proptest::collection::vec(0usize..3, 2),
        swap_rows in any::<bool>(),
        swap_cols in any::<bool>(),
    ) {
        let conj_rows = if swap_rows { vec![rows[1], rows[0]] } else { rows.clone() };
        let conj_cols = if swap_cols { vec![cols[1], cols[0]] } else { cols.clone() };
        let zip = |a: &[usize], b: &[usize]| a.iter().copied().zip(b.iter().copied()).collect::<Vec<_>>();
        let p = IndexPattern::new(&zip(&rows, &cols), &zip(&conj_rows, &conj_cols));
        // reordering the factors of U and of U* does not change the monomial
        let q = IndexPattern::new(
            &zip(&[rows[1], rows[0]], &[cols[1], cols[0]]),
            &zip(&conj_rows, &conj_cols),
        );
        prop_assert_eq!(haar_integral_rational(&p, 3).unwrap(), haar_integral_rational(&q, 3).unwrap());
        // transposition is a symmetry of Haar measure
        let t = IndexPattern::new(&zip(&cols, &rows), &zip(&conj_cols, &conj_rows));
        prop_assert_eq!(haar_integral_exact(&p, 3).unwrap(), haar_integral_exact(&t, 3).unwrap());
    }
}

#[test]
fn sampling_is_backend_and_length_stable() {
    let shape = LatticeShape::new(2, 3).unwrap();
    let long = sample_t_with(&shape, 3, 1000, 9, Backend::Parallel).unwrap();
    let short = sample_t_with(&shape, 3, 700, 9, Backend::Sequential).unwrap();
    assert_eq!(&long.values[..700], &short.values[..]);
}
