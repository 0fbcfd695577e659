//! Quadrature rules shared by the calculus and the oracles.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
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
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One Grundmann–Möller rule of degree `2s + 1` on the standard `n`-simplex,
/// returned as barycentric points (length `n + 1`) and weights. Weights sum to
/// the simplex volume `1/n!`.
pub fn grundmann_moller(n: usize, s: usize) -> Vec<(Vec<f64>, f64)> {
    let d = 2 * s + 1;
    let mut out = Vec::new();
    for i in 0..=s {
        let denom = (d + n - 2 * i) as f64;
        let log_w = d as f64 * denom.ln() - ln_factorial(i) - ln_factorial(d + n - i) - (2 * s) as f64 * 2f64.ln();
        let w = if i % 2 == 0 { log_w.exp() } else { -log_w.exp() };
        for beta in compositions(s - i, n + 1) {
            let point = beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect();
            out.push((point, w));
        }
    }
    out
}

/// All `parts`-tuples of nonnegative integers summing to `total`.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; parts];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grundmann_moller_volume_and_monomials() {
        for n in 1..=4 {
            for s in 0..6 {
                let rule = grundmann_moller(n, s);
                let vol: f64 = rule.iter().map(|(_, w)| w).sum();
                assert!((vol - (-ln_factorial(n)).exp()).abs() < 1e-13, "n={n} s={s}");
            }
        }
        // ∫ λ₀² λ₁ over the 2-simplex = 2!·1!/(2+1+2)! = 2/120
        let rule = grundmann_moller(2, 2);
        let v: f64 = rule.iter().map(|(p, w)| w * p[0] * p[0] * p[1]).sum();
        assert!((v - 2.0 / 120.0).abs() < 1e-14);
    }
}
