//! Reference implementations that share no code with the crate.

#![allow(dead_code)]

use std::f64::consts::PI;

fn density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `Φ(z) - 1/2 = φ(z) Σ z^(2n+1) / (2n+1)!!`, all terms positive.
fn central_mass(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs() {
        n += 1.0;
        term *= z * z / (2.0 * n + 1.0);
        sum += term;
    }
    density(z) * sum
}

/// `Q(z) = φ(z) / (z + 1/(z + 2/(z + 3/(z + ...))))`, evaluated from the tail.
fn tail_fraction(z: f64) -> f64 {
    let mut denom = z;
    for k in (1..400).rev() {
        denom = z + k as f64 / denom;
    }
    density(z) / denom
}

/// `P(Z > z)` for a standard normal.
pub fn normal_upper_tail(z: f64) -> f64 {
    if z < 0.0 {
        1.0 - normal_upper_tail(-z)
    } else if z < 3.0 {
        0.5 - central_mass(z)
    } else {
        tail_fraction(z)
    }
}

/// Bisection for `Q(z) = p` with `Q` from [`normal_upper_tail`].
pub fn normal_upper_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    if p > 0.5 {
        return -normal_upper_quantile(1.0 - p);
    }
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if normal_upper_tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest `n` with `Σ_{j<=n} e^-λ λ^j / j! >= 1 - p`, each term computed
/// from scratch.
pub fn poisson_comp_quantile(lambda: f64, p: f64) -> u32 {
    let target = 1.0 - p;
    let mut cdf = 0.0;
    for n in 0..170u32 {
        let factorial: f64 = (1..=n).map(|j| j as f64).product();
        cdf += (-lambda).exp() * lambda.powi(n as i32) / factorial;
        if cdf >= target {
            return n;
        }
    }
    panic!("no quantile below 170 for lambda = {lambda}, p = {p}");
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

/// `E(X^m)` of a lognormal by integrating `e^{m y}` against the normal
/// density of `y = ln X` over ±(12 + m σ) standard deviations.
pub fn lognormal_moment(mu: f64, sigma: f64, m: f64) -> f64 {
    let centre = mu + m * sigma * sigma;
    let half_width = 14.0 * sigma;
    simpson(
        |y| {
            let s = (y - mu) / sigma;
            (m * y).exp() * (-0.5 * s * s).exp() / (sigma * (2.0 * PI).sqrt())
        },
        centre - half_width,
        centre + half_width,
        20_000,
    )
}

/// 10⁴ probabilities: log-spaced from 1e-300 to 1/2, then their mirror
/// images `1 - p` for `p` log-spaced from 1e-16 to 1/2.
pub fn probability_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(10_000);
    let lower = 5_000;
    for i in 0..lower {
        let t = i as f64 / (lower - 1) as f64;
        grid.push(10f64.powf(-300.0 + t * (300.0 - 2f64.log10())));
    }
    for i in 0..lower {
        let t = i as f64 / (lower - 1) as f64;
        grid.push(1.0 - 10f64.powf(-16.0 + t * (16.0 - 2f64.log10())));
    }
    grid
}
