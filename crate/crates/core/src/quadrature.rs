//! Gauss-Legendre rules on [-1, 1].

use crate::scalar::Real;

/// Points and weights of an n-point Gauss-Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    /// Build the rule by Newton iteration on the Legendre polynomial (computed in f64).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut pts = vec![0.0f64; n];
        let mut wts = vec![0.0f64; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            pts[i] = -x;
            pts[n - 1 - i] = x;
            wts[i] = w;
            wts[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            pts[n / 2] = 0.0;
        }
        Self { points: pts.into_iter().map(T::lit).collect(), weights: wts.into_iter().map(T::lit).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_rule_matches_closed_form() {
        let g = GaussRule::<f64>::new(2);
        assert_relative_eq!(g.points[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.weights[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn five_point_rule_matches_tabulated_values() {
        let g = GaussRule::<f64>::new(5);
        assert_relative_eq!(g.points[4], 0.906_179_845_938_664, epsilon = 1e-14);
        assert_relative_eq!(g.weights[2], 128.0 / 225.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..=40 {
            let g = GaussRule::<f64>::new(n);
            for deg in 0..(2 * n).min(30) {
                let q: f64 = g.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }
}
