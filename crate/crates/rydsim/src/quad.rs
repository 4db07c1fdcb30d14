//! Gauss–Legendre quadrature on finite and semi-infinite intervals.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    /// (node, weight) pairs mapped onto [a, b].
    pub fn nodes_on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }

    /// ∫_a^b f split into `panels` equal panels.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    pub fn composite_complex<F: FnMut(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let lo = a + k as f64 * h;
            let half = 0.5 * h;
            let mid = lo + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += f(mid + half * x) * (w * half);
            }
        }
        acc
    }

    /// ∫_0^∞ f using the map x = s·t/(1−t) on t ∈ [0,1).
    pub fn semi_infinite<F: FnMut(f64) -> f64>(&self, scale: f64, panels: usize, mut f: F) -> f64 {
        self.composite(0.0, 1.0, panels, |t| {
            let x = scale * t / (1.0 - t);
            f(x) * scale / ((1.0 - t) * (1.0 - t))
        })
    }

    pub fn semi_infinite_complex<F: FnMut(f64) -> Complex64>(
        &self,
        scale: f64,
        panels: usize,
        mut f: F,
    ) -> Complex64 {
        self.composite_complex(0.0, 1.0, panels, |t| {
            let x = scale * t / (1.0 - t);
            f(x) * (scale / ((1.0 - t) * (1.0 - t)))
        })
    }
}

/// Legendre P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exactness() {
        let gl = GaussLegendre::new(8);
        let s: f64 = gl.weights.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
        // degree 15 is integrated exactly
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert_relative_eq!(v, 2f64.powi(16) / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn semi_infinite_lorentzian() {
        let gl = GaussLegendre::new(16);
        let v = gl.semi_infinite(1.0, 64, |x| 1.0 / (1.0 + x * x));
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        for n in [1, 2, 5, 16, 33] {
            let gl = GaussLegendre::new(n);
            for w in gl.nodes.windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..n {
                assert_relative_eq!(gl.nodes[i], -gl.nodes[n - 1 - i], epsilon = 1e-15);
            }
        }
    }
}
