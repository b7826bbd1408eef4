//! Numerical integration: adaptive Gauss–Kronrod on finite intervals,
//! Gauss–Legendre and Gauss–Laguerre rules, periodic trapezoid sums, and
//! radial-times-angular integration over balls in `R^d` for `d <= 3`.

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated (real or complex).
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_intervals: 4000 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-11)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).magnitude();
    (value, err)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
pub fn integrate<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<QuadResult<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: 0.0, intervals: 0 });
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut intervals = 1;
    loop {
        if !total.magnitude().is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        let target = tol.abs.max(tol.rel * total.magnitude());
        // Roundoff floor: nothing below a few ulps of the accumulated value is resolvable.
        let floor = 64.0 * f64::EPSILON * total.magnitude();
        if total_err <= target || total_err <= floor {
            break;
        }
        if intervals >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence after {intervals} panels (error {total_err:.3e}, target {target:.3e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point.
            heap.push(Panel { error: 0.0, ..worst });
            total_err = heap.iter().map(|p| p.error).sum();
            if total_err == 0.0 {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        intervals += 1;
        if intervals % 64 == 0 {
            // Resum to stop drift from repeated subtraction.
            total = heap.iter().fold(T::zero(), |acc, p| acc + p.value);
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().fold(T::zero(), |acc, p| acc + p.value);
    Ok(QuadResult { value, error: total_err, intervals })
}

/// Integrates over `[0, b]` after the substitution `k = b t^m`, which turns an
/// integrable endpoint singularity `k^s` (`s > -1`) into `t^{m(s+1)-1}`.
pub fn integrate_from_zero_smoothed<T: QuadValue>(
    f: impl Fn(f64) -> T,
    b: f64,
    power: u32,
    tol: Tolerance,
) -> Result<QuadResult<T>> {
    let m = power.max(1) as f64;
    integrate(
        |t: f64| {
            if t <= 0.0 {
                return T::zero();
            }
            let k = b * t.powf(m);
            f(k) * (m * b * t.powf(m - 1.0))
        },
        0.0,
        1.0,
        tol,
    )
}

/// A quadrature rule on a fixed reference interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_cache() -> &'static Mutex<HashMap<usize, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    assert!(n > 0, "rule needs at least one node");
    if let Some(rule) = legendre_cache().lock().expect("cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let rule = Arc::new(Rule { nodes, weights });
    legendre_cache()
        .lock()
        .expect("cache poisoned")
        .insert(n, Arc::clone(&rule));
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n`-point Gauss–Laguerre rule for `int_0^inf e^{-x} g(x) dx`.
///
/// Nodes come from the Laguerre three-term recurrence refined by Newton
/// steps; weights use `w_i = x_i / ((n+1) L_{n+1}(x_i))^2`.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n > 0, "rule needs at least one node");
    // Golub–Welsch for starting values.
    let jacobi = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i + 1 == j || j + 1 == i {
            (i.max(j)) as f64
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut starts: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    starts.sort_by(f64::total_cmp);

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &starts {
        let mut x = x0;
        for _ in 0..50 {
            let (ln, dln, _) = laguerre_values(n, x);
            let dx = ln / dln;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, _, ln1) = laguerre_values(n, x);
        let denom = (n as f64 + 1.0) * ln1;
        nodes.push(x);
        weights.push(x / (denom * denom));
    }
    Rule { nodes, weights }
}

/// Returns `(L_n(x), L_n'(x), L_{n+1}(x))`.
fn laguerre_values(n: usize, x: f64) -> (f64, f64, f64) {
    let mut l0 = 1.0;
    let mut l1 = 1.0 - x;
    if n == 0 {
        return (1.0, 0.0, l1);
    }
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    // l1 = L_n, l0 = L_{n-1}
    let nf = n as f64;
    let ln1 = ((2.0 * nf + 1.0 - x) * l1 - nf * l0) / (nf + 1.0);
    let dln = nf * (l1 - l0) / x;
    (l1, dln, ln1)
}

/// Trapezoid sum of a `2 pi`-periodic function over `[0, 2 pi)` with `n`
/// equispaced nodes, divided by `2 pi` (i.e. the mean value).
pub fn periodic_mean<T: QuadValue>(n: usize, f: impl Fn(f64) -> T) -> T {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut acc = T::zero();
    for j in 0..n {
        acc = acc + f(j as f64 * h);
    }
    acc * (1.0 / n as f64)
}

/// Integral of `f` over the unit sphere `S^{d-1}` scaled to radius `k`,
/// i.e. `int_{S^{d-1}} f(k w) dw`, for `d <= 3`. `order` controls the angular
/// resolution (Gauss–Legendre in `cos(theta)` times `2 order` azimuthal nodes
/// in three dimensions, `2 order` nodes on the circle in two).
pub fn sphere_integral<T: QuadValue>(dim: usize, k: f64, order: usize, f: &impl Fn(&[f64]) -> T) -> T {
    match dim {
        1 => f(&[k]) + f(&[-k]),
        2 => {
            let m = 2 * order.max(4);
            periodic_mean(m, |phi| f(&[k * phi.cos(), k * phi.sin()])) * (2.0 * std::f64::consts::PI)
        }
        3 => {
            let rule = gauss_legendre(order.max(4));
            let m = 2 * order.max(4);
            let h = 2.0 * std::f64::consts::PI / m as f64;
            let mut acc = T::zero();
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = (1.0 - u * u).max(0.0).sqrt();
                let mut ring = T::zero();
                for j in 0..m {
                    let phi = j as f64 * h;
                    ring = ring + f(&[k * s * phi.cos(), k * s * phi.sin(), k * u]);
                }
                acc = acc + ring * (w * h);
            }
            acc
        }
        _ => panic!("angular quadrature implemented for d <= 3"),
    }
}

/// `int_{r_lo <= |k| <= r_hi} f(k) d^d k` by adaptive radial quadrature over
/// nested angular rules. `order(k)` selects the angular resolution at radius
/// `k`; `smoothing` applies the power substitution near `k = 0` when `r_lo = 0`.
pub fn integrate_ball<T: QuadValue>(
    dim: usize,
    r_lo: f64,
    r_hi: f64,
    f: impl Fn(&[f64]) -> T,
    order: impl Fn(f64) -> usize,
    smoothing: u32,
    tol: Tolerance,
) -> Result<QuadResult<T>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::domain(format!("non-radial integrals support d <= 3, got {dim}")));
    }
    let radial = |k: f64| {
        if k <= 0.0 && dim > 1 {
            return T::zero();
        }
        sphere_integral(dim, k, order(k), &f) * k.powi(dim as i32 - 1)
    };
    if r_lo == 0.0 && smoothing > 1 {
        integrate_from_zero_smoothed(radial, r_hi, smoothing, tol)
    } else {
        integrate(radial, r_lo, r_hi, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gk_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2
        let r = integrate_from_zero_smoothed(|x: f64| x.powf(-0.5), 1.0, 4, Tolerance::default())
            .unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gk_complex() {
        let r = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, Tolerance::default()).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn legendre_integrates_degree_2n_minus_1() {
        let rule = gauss_legendre(10);
        let s: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments() {
        let rule = gauss_laguerre(64);
        let moment = |p: i32| -> f64 {
            rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(p)).sum()
        };
        assert!((moment(0) - 1.0).abs() < 1e-13);
        assert!((moment(1) - 1.0).abs() < 1e-12);
        assert!((moment(5) - 120.0).abs() < 1e-9);
        // int e^{-x} cos x = 1/2
        let c: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.cos()).sum();
        assert!((c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ball_gaussian_volume() {
        for dim in 1..=3 {
            let r = integrate_ball(
                dim,
                0.0,
                12.0,
                |k: &[f64]| (-k.iter().map(|x| x * x).sum::<f64>()).exp(),
                |_| 8,
                1,
                Tolerance::default(),
            )
            .unwrap();
            let exact = PI.powf(dim as f64 / 2.0);
            assert!((r.value - exact).abs() < 1e-11, "dim {dim}: {}", r.value);
        }
    }

    #[test]
    fn periodic_mean_of_cosine_power() {
        let m = periodic_mean(32, |t: f64| t.cos().powi(4));
        assert!((m - 3.0 / 8.0).abs() < 1e-15);
    }
}
