//! Deterministic quadrature: Gauss-Legendre nodes and product rules for
//! averages over the unit ball in dimensions 2, 3 and 4.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::{CompensatedSum, Real};

/// Largest dimension with a deterministic ball rule.
pub const MAX_QUADRATURE_DIM: usize = 4;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_interval(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w.iter())
        .map(|(&x, &w)| (mid + half * x, half * w))
        .collect()
}

/// Nodes in the closed unit ball with weights summing to one, so that
/// `sum w f(y)` approximates the average of `f` over `B(0, 1)`.
#[derive(Debug)]
pub struct BallRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl BallRule {
    fn build(dim: usize) -> Self {
        // (radial, polar, azimuthal) orders
        let (mr, mt, mp) = match dim {
            2 => (16, 0, 32),
            3 => (16, 16, 32),
            4 => (12, 12, 24),
            _ => unreachable!("ball rules exist for n = 2, 3, 4"),
        };
        let n = dim as f64;
        // Radial density n r^(n-1) on [0, 1].
        let radial: Vec<(f64, f64)> = gauss_legendre_interval(mr, 0.0, 1.0)
            .into_iter()
            .map(|(r, w)| (r, w * n * r.powi(dim as i32 - 1)))
            .collect();
        let azimuth: Vec<(f64, f64)> = (0..mp)
            .map(|j| (2.0 * PI * j as f64 / mp as f64, 1.0 / mp as f64))
            .collect();

        // Unit-sphere directions with weights summing to one.
        let mut sphere: Vec<(Vec<f64>, f64)> = Vec::new();
        match dim {
            2 => {
                for &(phi, w) in &azimuth {
                    sphere.push((vec![phi.cos(), phi.sin()], w));
                }
            }
            3 => {
                let (t, tw) = gauss_legendre(mt);
                for (&c, &cw) in t.iter().zip(tw.iter()) {
                    let s = (1.0 - c * c).sqrt();
                    for &(phi, w) in &azimuth {
                        sphere.push((vec![c, s * phi.cos(), s * phi.sin()], 0.5 * cw * w));
                    }
                }
            }
            4 => {
                // First angle: density (2/pi) sin^2 psi, Gauss-Chebyshev of the second kind.
                let cheb: Vec<(f64, f64)> = (1..=mt)
                    .map(|k| {
                        let a = k as f64 * PI / (mt as f64 + 1.0);
                        (a.cos(), 2.0 / (mt as f64 + 1.0) * a.sin().powi(2))
                    })
                    .collect();
                let (t, tw) = gauss_legendre(mt);
                for &(c1, w1) in &cheb {
                    let s1 = (1.0 - c1 * c1).sqrt();
                    for (&c2, &w2) in t.iter().zip(tw.iter()) {
                        let s2 = (1.0 - c2 * c2).sqrt();
                        for &(phi, w3) in &azimuth {
                            sphere.push((
                                vec![c1, s1 * c2, s1 * s2 * phi.cos(), s1 * s2 * phi.sin()],
                                w1 * 0.5 * w2 * w3,
                            ));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }

        let mut nodes = Vec::with_capacity(radial.len() * sphere.len() * dim);
        let mut weights = Vec::with_capacity(radial.len() * sphere.len());
        for &(r, wr) in &radial {
            for (dir, wd) in &sphere {
                nodes.extend(dir.iter().map(|c| r * c));
                weights.push(wr * wd);
            }
        }
        BallRule { dim, nodes, weights }
    }

    /// Cached rule for dimension `n`.
    pub fn for_dim(n: usize) -> Result<&'static BallRule> {
        static RULES: [OnceLock<BallRule>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        if !(2..=MAX_QUADRATURE_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(RULES[n - 2].get_or_init(|| BallRule::build(n)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Average of `f` over `B(center, radius)`.
    pub fn average<T: Real, F: Fn(&Point<T>) -> T>(&self, center: &Point<T>, radius: T, f: F) -> T {
        debug_assert_eq!(center.dim(), self.dim);
        let mut acc = CompensatedSum::new();
        let mut y = center.clone();
        for (node, &w) in self.nodes.chunks_exact(self.dim).zip(self.weights.iter()) {
            for ((yi, &ci), &ni) in y.coords_mut().iter_mut().zip(center.coords()).zip(node) {
                *yi = ci + radius * T::lit(ni);
            }
            acc.add(T::lit(w) * f(&y));
        }
        acc.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact for degree <= 15
        for deg in 0..=15u32 {
            let q: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "deg {deg}: {q} vs {exact}");
        }
        let (x5, _) = gauss_legendre(5);
        assert_eq!(x5[2], 0.0);
        assert!((x5[4] - 0.906_179_845_938_664).abs() < 1e-14);
    }

    /// Ball averages of monomials: E|y|^{2k} = n/(n+2k) on the unit ball,
    /// and E[y1^2] = 1/(n+2), E[y1^2 y2^2] = 1/((n+2)(n+4)).
    #[test]
    fn ball_rules_reproduce_moments() {
        for n in 2..=4 {
            let rule = BallRule::for_dim(n).unwrap();
            let c = Point::<f64>::zeros(n);
            let nf = n as f64;
            let one = rule.average(&c, 1.0, |_| 1.0);
            assert!((one - 1.0).abs() < 1e-13);
            for k in 1..=3 {
                let m = rule.average(&c, 1.0, |y| y.norm_sq().powi(k));
                assert!((m - nf / (nf + 2.0 * k as f64)).abs() < 1e-12, "n={n} k={k}");
            }
            let m = rule.average(&c, 1.0, |y| y[0] * y[0]);
            assert!((m - 1.0 / (nf + 2.0)).abs() < 1e-13);
            let m = rule.average(&c, 1.0, |y| y[0] * y[0] * y[1] * y[1]);
            assert!((m - 1.0 / ((nf + 2.0) * (nf + 4.0))).abs() < 1e-13);
            let m = rule.average(&c, 1.0, |y| y[0].powi(3) * y[1] + y[1].powi(5));
            assert!(m.abs() < 1e-14);
        }
    }

    #[test]
    fn shifted_and_scaled_average() {
        let rule = BallRule::for_dim(3).unwrap();
        let c = Point::from([0.2, -0.1, 0.4]);
        // average of |y - c|^2 over B(c, r) is 3 r^2 / 5
        let r = 0.1f64;
        let m = rule.average(&c, r, |y| y.sub(&c).norm_sq());
        assert!((m - 0.6 * r * r).abs() < 1e-16);
    }

    #[test]
    fn unsupported_dimensions() {
        assert!(matches!(BallRule::for_dim(5), Err(Error::UnsupportedDimension(5))));
        assert!(BallRule::for_dim(1).is_err());
    }
}
