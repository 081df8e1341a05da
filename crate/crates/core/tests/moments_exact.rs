use num_rational::BigRational;
use ymconc::moments::{exact_moment_t_rational, leading_moment};
use ymconc::LatticeShape;

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn fourth_moment_is_already_gaussian_on_small_torus() {
    // any eight plaquettes of the 3×3 torus are independent, so E[(Nt)⁴] = 3m₂²
    let shape = LatticeShape::new(2, 3).unwrap();
    let m4 =
        exact_moment_t_rational(4, &shape, 8).unwrap() * BigRational::from_integer(4096.into());
    assert_eq!(m4, ratio(3, 18 * 18));
    assert!((leading_moment(4, 9, 2) - 3.0 / 324.0).abs() < 1e-15);
}

#[test]
fn third_moment_vanishes_in_two_dimensions() {
    let shape = LatticeShape::new(2, 3).unwrap();
    assert_eq!(exact_moment_t_rational(3, &shape, 6).unwrap(), ratio(0, 1));
}

#[test]
fn third_moment_vanishes_on_the_cube_lattice() {
    // a nonzero term needs a closed surface, and none is made of three plaquettes
    let shape = LatticeShape::new(3, 2).unwrap();
    assert_eq!(exact_moment_t_rational(3, &shape, 6).unwrap(), ratio(0, 1));
}
