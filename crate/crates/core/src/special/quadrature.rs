//! Gauss–Legendre rules, composite and adaptive variants.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Nodes and weights for an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Unit rule on [-1, 1], shared between callers.
#[derive(Debug)]
pub(crate) struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_unit_rule(order: usize) -> UnitRule {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x) by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        // recompute derivative at the converged node
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        if n >= 1 {
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    UnitRule { nodes, weights }
}

pub(crate) fn unit_rule(order: usize) -> Arc<UnitRule> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<UnitRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(compute_unit_rule(order));
    cache
        .write()
        .expect("rule cache poisoned")
        .entry(order)
        .or_insert(rule)
        .clone()
}

/// Gauss–Legendre rule of the given order mapped onto `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return domain("quadrature order must be at least 1");
    }
    if !(a.is_finite() && b.is_finite()) {
        return domain(format!("non-finite interval [{a}, {b}]"));
    }
    if a >= b {
        return domain(format!("empty interval [{a}, {b}]"));
    }
    let unit = unit_rule(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Ok(QuadratureRule {
        nodes: unit.nodes.iter().map(|x| mid + half * x).collect(),
        weights: unit.weights.iter().map(|w| half * w).collect(),
        interval: (a, b),
    })
}

/// `panels` equal sub-intervals of `[a, b]`, each with an order-`order` rule.
pub fn composite_gauss_legendre(
    order: usize,
    panels: usize,
    a: f64,
    b: f64,
) -> Result<QuadratureRule> {
    if panels == 0 {
        return domain("at least one panel is required");
    }
    gauss_legendre(order, a, b)?;
    let unit = unit_rule(order);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        for (x, w) in unit.nodes.iter().zip(&unit.weights) {
            nodes.push(mid + 0.5 * width * x);
            weights.push(0.5 * width * w);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (a, b),
    })
}

/// Result of [`adaptive_complex`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOutcome {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Recursive bisection comparing order-`order` and order-`2*order` rules on
/// each panel until the panel estimates agree within a share of `abs_tol`.
pub fn adaptive_complex(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    order: usize,
    abs_tol: f64,
    max_depth: usize,
) -> AdaptiveOutcome {
    let low = unit_rule(order);
    let high = unit_rule(2 * order);
    let mut out = AdaptiveOutcome {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        converged: true,
        evaluations: 0,
    };
    let mut stack = vec![(a, b, 0usize)];
    let total = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let est = |rule: &UnitRule| -> Complex64 {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| half * w * f(mid + half * x))
                .sum()
        };
        let coarse = est(&low);
        let fine = est(&high);
        out.evaluations += 3 * order;
        let err = (fine - coarse).norm();
        let share = abs_tol * (hi - lo) / total;
        if err <= share || depth >= max_depth {
            if err > share {
                out.converged = false;
            }
            out.value += fine;
            out.error += err;
        } else {
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length() {
        for order in [1, 2, 3, 7, 16, 64, 257, 512] {
            let rule = gauss_legendre(order, -0.5, 2.0).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.5).abs() < 1e-12, "order {order}: {s}");
            assert_eq!(rule.nodes.len(), rule.weights.len());
        }
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 0.0, f64::INFINITY).is_err());
        assert!(composite_gauss_legendre(4, 0, 0.0, 1.0).is_err());
    }

    #[test]
    fn adaptive_handles_a_narrow_peak() {
        let width = 1e-4;
        let f = |x: f64| Complex64::new(width / ((x - 0.3).powi(2) + width * width), 0.0);
        let exact = ((0.7f64) / width).atan() + (0.3f64 / width).atan();
        let out = adaptive_complex(&f, 0.0, 1.0, 16, 1e-10, 60);
        assert!(out.converged);
        assert!((out.value.re - exact).abs() < 1e-9);
    }
}
