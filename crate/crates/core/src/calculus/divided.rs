//! Divided differences of scalar functions over eigenvalue tuples.
//!
//! Two independent engines: [`RecursiveDd`] (difference quotients with a
//! Taylor expansion for tight clusters, exact for repeated nodes) and
//! [`SimplexDd`] (Hermite–Genocchi integral by Grundmann–Möller rules).

use std::collections::HashMap;

use num_complex::Complex64;

use super::quad::grundmann_moller;
use super::CalculusError;

/// Scalar function holomorphic near the positive half-line.
pub trait NodeFunction {
    /// Taylor coefficients `f^{(m)}(c)/m!` for `m < n`.
    fn taylor_series(&self, c: f64, n: usize) -> Vec<Complex64>;

    /// Largest node spread around `c` for which the Taylor cluster is used.
    fn cluster_tol(&self, c: f64) -> f64;

    fn value(&self, x: f64) -> Complex64 {
        self.taylor_series(x, 1)[0]
    }

    /// `f^{(k)}(x)`.
    fn derivative(&self, k: usize, x: f64) -> Complex64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.taylor_series(x, k + 1)[k] * fact
    }
}

/// `λ ↦ λ^a`, principal branch, for positive nodes.
#[derive(Clone, Copy, Debug)]
pub struct Power {
    pub exponent: Complex64,
}

impl NodeFunction for Power {
    fn taylor_series(&self, c: f64, n: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n);
        let mut coef = (self.exponent * c.ln()).exp();
        for m in 0..n {
            out.push(coef);
            coef = coef * (self.exponent - m as f64) / ((m + 1) as f64 * c);
        }
        out
    }

    fn cluster_tol(&self, c: f64) -> f64 {
        0.2 * c
    }
}

/// `λ ↦ e^{rate·λ}`; `rate = −it` for waves, `−t` for heat.
#[derive(Clone, Copy, Debug)]
pub struct Exponential {
    pub rate: Complex64,
}

impl NodeFunction for Exponential {
    fn taylor_series(&self, c: f64, n: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n);
        let mut coef = (self.rate * c).exp();
        for m in 0..n {
            out.push(coef);
            coef = coef * self.rate / (m + 1) as f64;
        }
        out
    }

    fn cluster_tol(&self, _c: f64) -> f64 {
        let r = self.rate.norm();
        if r < 1e-300 { f64::INFINITY } else { 1.5 / r }
    }
}

/// Evaluator of `f[x_{i_0}, …, x_{i_k}]` for index tuples into a node list.
pub trait DividedDifferences {
    fn dd(&mut self, idx: &[usize]) -> Result<Complex64, CalculusError>;
}

fn sorted_key(nodes: &[f64], idx: &[usize]) -> Vec<u16> {
    let mut key: Vec<u16> = idx.iter().map(|&i| i as u16).collect();
    key.sort_by(|&a, &b| nodes[a as usize].total_cmp(&nodes[b as usize]).then(a.cmp(&b)));
    key
}

/// Difference-quotient recursion with Taylor clusters.
pub struct RecursiveDd<F> {
    f: F,
    nodes: Vec<f64>,
    memo: HashMap<Vec<u16>, Complex64>,
}

impl<F: NodeFunction> RecursiveDd<F> {
    pub fn new(f: F, nodes: Vec<f64>) -> Self {
        RecursiveDd { f, nodes, memo: HashMap::new() }
    }

    fn sorted(&mut self, key: &[u16]) -> Complex64 {
        if let Some(v) = self.memo.get(key) {
            return *v;
        }
        let lo = self.nodes[key[0] as usize];
        let hi = self.nodes[*key.last().unwrap() as usize];
        let spread = hi - lo;
        let value = if key.len() == 1 {
            self.f.value(lo)
        } else if spread <= self.f.cluster_tol(0.5 * (lo + hi)) {
            self.cluster(key)
        } else {
            let right = self.sorted(&key[1..]);
            let left = self.sorted(&key[..key.len() - 1]);
            (right - left) / spread
        };
        self.memo.insert(key.to_vec(), value);
        value
    }

    /// `Σ_{m≥k} a_m(c)·h_{m−k}(x − c)` with complete homogeneous polynomials `h`.
    fn cluster(&self, key: &[u16]) -> Complex64 {
        let xs: Vec<f64> = key.iter().map(|&i| self.nodes[i as usize]).collect();
        let k = xs.len() - 1;
        let c = xs.iter().sum::<f64>() / xs.len() as f64;
        let ys: Vec<f64> = xs.iter().map(|x| x - c).collect();
        const MAX_TERMS: usize = 400;
        let coeffs = self.f.taylor_series(c, k + MAX_TERMS);
        let mut h = vec![0.0; MAX_TERMS];
        h[0] = 1.0;
        for &y in &ys {
            for n in 1..MAX_TERMS {
                h[n] += y * h[n - 1];
            }
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut small = 0;
        for n in 0..MAX_TERMS {
            let term = coeffs[k + n] * h[n];
            sum += term;
            if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        sum
    }
}

impl<F: NodeFunction> DividedDifferences for RecursiveDd<F> {
    fn dd(&mut self, idx: &[usize]) -> Result<Complex64, CalculusError> {
        let key = sorted_key(&self.nodes, idx);
        Ok(self.sorted(&key))
    }
}

/// Hermite–Genocchi: `f[x_0..x_k] = ∫_{σ_k} f^{(k)}(Σ s_i x_i) ds`, evaluated with
/// Grundmann–Möller rules of increasing degree until successive estimates
/// agree within `tol`.
pub struct SimplexDd<F> {
    f: F,
    nodes: Vec<f64>,
    tol: f64,
    max_order: usize,
    memo: HashMap<Vec<u16>, Complex64>,
    worst_estimate: f64,
}

impl<F: NodeFunction> SimplexDd<F> {
    pub fn new(f: F, nodes: Vec<f64>, tol: f64, max_order: usize) -> Self {
        SimplexDd { f, nodes, tol, max_order, memo: HashMap::new(), worst_estimate: 0.0 }
    }

    /// Largest accepted error estimate so far.
    pub fn worst_estimate(&self) -> f64 {
        self.worst_estimate
    }

    fn integrate(&self, xs: &[f64], s: usize) -> Complex64 {
        let k = xs.len() - 1;
        grundmann_moller(k, s)
            .into_iter()
            .map(|(p, w)| {
                let x: f64 = p.iter().zip(xs).map(|(a, b)| a * b).sum();
                self.f.derivative(k, x) * w
            })
            .sum()
    }
}

impl<F: NodeFunction> DividedDifferences for SimplexDd<F> {
    fn dd(&mut self, idx: &[usize]) -> Result<Complex64, CalculusError> {
        let key = sorted_key(&self.nodes, idx);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let xs: Vec<f64> = key.iter().map(|&i| self.nodes[i as usize]).collect();
        let value = if xs.len() == 1 {
            self.f.value(xs[0])
        } else {
            let mut prev = self.integrate(&xs, 0);
            let mut accepted = None;
            let mut estimate = f64::INFINITY;
            for s in 1..=self.max_order {
                let cur = self.integrate(&xs, s);
                estimate = (cur - prev).norm();
                if estimate < self.tol {
                    accepted = Some(cur);
                    break;
                }
                prev = cur;
            }
            match accepted {
                Some(v) => {
                    self.worst_estimate = self.worst_estimate.max(estimate);
                    v
                }
                None => return Err(CalculusError::QuadratureTolerance { estimate, tol: self.tol }),
            }
        };
        self.memo.insert(key, value);
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_nodes_give_derivatives() {
        let f = Power { exponent: Complex64::new(-0.5, 0.0) };
        let mut dd = RecursiveDd::new(f, vec![4.0, 4.0, 4.0]);
        // f''(4)/2 with f = λ^{-1/2}: (3/4)·4^{-5/2}/2
        let v = dd.dd(&[0, 1, 2]).unwrap();
        assert!((v.re - 0.375 * 4f64.powf(-2.5)).abs() < 1e-15);
        assert!((dd.dd(&[0, 0]).unwrap().re + 0.5 * 4f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn recursive_and_simplex_agree() {
        let nodes = vec![0.7, 1.0, 1.0 + 1e-9, 2.5, 6.0];
        let f = Exponential { rate: Complex64::new(0.0, -1.3) };
        let mut a = RecursiveDd::new(f, nodes.clone());
        let mut b = SimplexDd::new(f, nodes, 1e-12, 40);
        for idx in [vec![0, 3], vec![1, 2, 4], vec![0, 1, 2, 3], vec![4, 4, 0], vec![1, 2, 3, 4, 0]] {
            let x = a.dd(&idx).unwrap();
            let y = b.dd(&idx).unwrap();
            assert!((x - y).norm() < 1e-11, "{idx:?}: {x} vs {y}");
        }
    }

    #[test]
    fn near_cluster_matches_exact_formula() {
        // f = e^x: f[x0, x1] = (e^{x1} − e^{x0})/(x1 − x0) evaluated in high precision by expm1
        let f = Exponential { rate: Complex64::new(1.0, 0.0) };
        let (x0, x1) = (1.0, 1.0 + 1e-7);
        let mut dd = RecursiveDd::new(f, vec![x0, x1]);
        let exact = x0.exp() * (x1 - x0).exp_m1() / (x1 - x0);
        assert!((dd.dd(&[0, 1]).unwrap().re - exact).abs() < 1e-14 * exact);
    }
}
