//! Gauss-Legendre rules and a globally adaptive integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Value together with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("rule needs at least one node");
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite rule: `[a, b]` split into `panels` equal pieces with `n` nodes each.
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let base = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in &base {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Legendre integration of `f` over `[a, b]`.
///
/// Each panel is integrated with 10- and 20-point rules; the difference is
/// the panel error. The worst panel is bisected until the summed error is
/// below `max(abs_tol, rel_tol * |value|)` or `max_panels` is reached, in
/// which case the returned estimate simply carries the larger error.
pub fn adaptive<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_panels: usize) -> Estimate
where
    F: Fn(f64) -> f64,
{
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    let eval = |a: f64, b: f64| -> Panel {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let coarse: f64 = lo.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half;
        let fine: f64 = hi.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half;
        Panel {
            a,
            b,
            value: fine,
            error: (fine - coarse).abs(),
        }
    };

    let mut heap = BinaryHeap::new();
    heap.push(eval(a, b));
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= abs_tol.max(rel_tol * value.abs()) || heap.len() >= max_panels {
            return Estimate { value, error };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(eval(worst.a, mid));
        heap.push(eval(mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 7, 16, 64] {
            let s: f64 = gauss_legendre(n).iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-14, "n = {n}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let rule = gauss_legendre_on(5, 0.0, 2.0);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(9)).sum();
        assert!((s - 2f64.powi(10) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_gaussian_tail() {
        let est = adaptive(|x| (-x * x).exp(), 0.0, 40.0, 1e-14, 0.0, 500);
        let exact = std::f64::consts::PI.sqrt() / 2.0;
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn composite_matches_single_on_smooth() {
        let a: f64 = composite_gauss_legendre(8, 4, 0.0, 3.0)
            .iter()
            .map(|&(x, w)| w * x.sin())
            .sum();
        assert!((a - (1.0 - 3f64.cos())).abs() < 1e-14);
    }
}
