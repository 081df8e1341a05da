//! Modified Bessel functions of the first kind, integer order.

/// `I_n(x) = Σ_k (x/2)^{2k+|n|} / (k! (k+|n|)!)`, summed until the terms stop
/// changing the result. All terms are positive, so there is no cancellation.
pub fn bessel_i(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs();
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 1u64;
    loop {
        term *= q / (k as f64 * (k + n) as f64);
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.8
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i(1, 1.0) - 0.565_159_103_992_485).abs() < 1e-15);
        assert!((bessel_i(2, 2.0) - 0.688_948_447_698_738_2).abs() < 1e-14);
        assert_eq!(bessel_i(0, 0.0), 1.0);
        assert_eq!(bessel_i(3, 0.0), 0.0);
        assert_eq!(bessel_i(-2, 1.5), bessel_i(2, 1.5));
    }

    #[test]
    fn recurrence() {
        // I_{n-1}(x) − I_{n+1}(x) = (2n/x) I_n(x)
        let x = 7.5;
        for n in 1..10 {
            let lhs = bessel_i(n - 1, x) - bessel_i(n + 1, x);
            let rhs = 2.0 * n as f64 / x * bessel_i(n, x);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }
}
