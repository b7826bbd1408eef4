//! Special functions: the zeroth-order Bessel function and a few
//! dimension-dependent constants.
//!
//! `bessel_j0` switches between three independent evaluations so that each
//! can be checked against the others where their ranges overlap:
//!
//! * the power series for `|x| <= 8`,
//! * Miller's backward recurrence for `8 < |x| <= 25`,
//! * the Hankel asymptotic expansion for `|x| > 25`.
//!
//! All three are accurate to about `1e-14` absolute on their range.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Bessel function of the first kind of order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        bessel_j0_series(ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        bessel_j0_miller(ax)
    } else {
        bessel_j0_asymptotic(ax)
    }
}

/// Power series `sum (-x^2/4)^m / (m!)^2`.
pub fn bessel_j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= q / (mf * mf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J0 + 2 sum J_{2k} = 1`.
pub fn bessel_j0_miller(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    let mut start = (x + 40.0 + 10.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j_cur;
        }
        if k == 1 {
            j0 = j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j0;
    j0 / norm
}

/// Hankel asymptotic expansion, summed until the terms stop decreasing.
pub fn bessel_j0_asymptotic(x: f64) -> f64 {
    let x = x.abs();
    let inv8x = 1.0 / (8.0 * x);
    // a_k = prod_{j=1..k} (2j-1)^2 / (k! (8x)^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= odd * odd * inv8x / k as f64;
        if a.abs() >= last || a.abs() < 1e-18 {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    let chi = x - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() + q * chi.sin())
}

/// `Gamma(n / 2)` for a positive integer `n`.
pub fn gamma_half_integer(n: usize) -> f64 {
    assert!(n > 0, "gamma_half_integer requires n > 0");
    let mut value = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// Surface area of the unit sphere in `R^d`: `2 pi^{d/2} / Gamma(d/2)`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half_integer(dim)
}

/// Average of `exp(i k.v)` over directions of `k` on the unit sphere in
/// `R^d`, as a function of `z = |k||v|`. Supported for `d <= 3`.
pub fn plane_wave_sphere_average(dim: usize, z: f64) -> f64 {
    match dim {
        1 => z.cos(),
        2 => bessel_j0(z),
        3 => {
            if z.abs() < 1e-4 {
                let z2 = z * z;
                1.0 - z2 / 6.0 + z2 * z2 / 120.0
            } else {
                z.sin() / z
            }
        }
        _ => panic!("plane-wave sphere average implemented for d <= 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from Abramowitz & Stegun table 9.1 (15 digits).
    const J0_TABLE: [(f64, f64); 6] = [
        (0.0, 1.0),
        (1.0, 0.765_197_686_557_966_6),
        (2.5, -0.048_383_776_468_197_99),
        (5.0, -0.177_596_771_314_338_3),
        (10.0, -0.245_935_764_451_348_3),
        (30.0, -0.086_367_983_581_040_2),
    ];

    #[test]
    fn j0_matches_table() {
        for (x, want) in J0_TABLE {
            assert!((bessel_j0(x) - want).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn j0_routes_agree_on_overlaps() {
        for i in 0..=40 {
            let x = 4.0 + 0.1 * i as f64;
            assert!((bessel_j0_series(x) - bessel_j0_miller(x)).abs() < 1e-13, "x = {x}");
        }
        for i in 0..=60 {
            let x = 20.0 + 0.25 * i as f64;
            let gap = (bessel_j0_miller(x) - bessel_j0_asymptotic(x)).abs();
            assert!(gap < 1e-13, "x = {x}, gap = {gap}");
        }
    }

    #[test]
    fn j0_is_even() {
        assert_eq!(bessel_j0(-3.7), bessel_j0(3.7));
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half_integer(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half_integer(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer(8) - 6.0).abs() < 1e-13);
    }
}
