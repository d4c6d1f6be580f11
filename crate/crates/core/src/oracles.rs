//! Independent reference computations used to verify the solver:
//! finite-difference tangents, a brute-force closest-point search, the analytical
//! double-helix solution, the constant-gap patch solution and an L2 error norm.

use crate::geometry::ElementDofs;
use crate::linalg::{DMatrix, Vec3};
use crate::quadrature::GaussRule;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Outcome of a finite-difference tangent comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    /// `max |K_fd - K| / max |K|`.
    pub relative_error: f64,
    pub max_abs_error: f64,
    /// Entry with the largest deviation (row, column).
    pub worst_entry: (usize, usize),
}

impl FdReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.relative_error <= tol
    }
}

/// Compare an analytic tangent with central differences of the residual, using the
/// step `step * (1 + |x_i|)` for unknown `i`.
pub fn fd_tangent_check<T: Real, E>(
    x0: &[T],
    step: T,
    eval: impl Fn(&[T]) -> Result<(Vec<T>, DMatrix<T>), E>,
) -> Result<FdReport, E> {
    let (_, k) = eval(x0)?;
    let n = x0.len();
    let mut fd = DMatrix::zeros(k.rows(), n);
    for col in 0..n {
        let h = step * (T::one() + x0[col].abs());
        let mut xp = x0.to_vec();
        let mut xm = x0.to_vec();
        xp[col] += h;
        xm[col] -= h;
        let (rp, _) = eval(&xp)?;
        let (rm, _) = eval(&xm)?;
        for row in 0..k.rows() {
            fd[(row, col)] = (rp[row] - rm[row]) / (h + h);
        }
    }
    let mut worst = (0, 0);
    let mut max_err = T::zero();
    for row in 0..k.rows() {
        for col in 0..n {
            let e = (fd[(row, col)] - k[(row, col)]).abs();
            if e > max_err {
                max_err = e;
                worst = (row, col);
            }
        }
    }
    let scale = k.max_abs().max(fd.max_abs()).max(T::min_positive_value());
    Ok(FdReport {
        relative_error: (max_err / scale).to_f64_lossy(),
        max_abs_error: max_err.to_f64_lossy(),
        worst_entry: worst,
    })
}

/// Brute-force minimum distance between two elements over [-1, 1]^2: grid search
/// followed by shrinking-pattern refinement. Independent of the Newton projections.
pub fn grid_closest_points<T: Real>(e1: &ElementDofs<T>, e2: &ElementDofs<T>, resolution: usize) -> (T, T, T) {
    let dist = |a: T, b: T| (e1.position(a) - e2.position(b)).norm();
    let step = T::lit(2.0 / resolution as f64);
    let mut best = (T::zero(), T::zero(), T::infinity());
    for i in 0..=resolution {
        for j in 0..=resolution {
            let a = -T::one() + step * T::lit(i as f64);
            let b = -T::one() + step * T::lit(j as f64);
            let d = dist(a, b);
            if d < best.2 {
                best = (a, b, d);
            }
        }
    }
    // Polish with a pattern search on the norm of the distance gradient, which
    // resolves the minimizer to round-off rather than to the square root of it.
    let grad = |a: T, b: T| {
        let (p, q) = (e1.evaluate(a), e2.evaluate(b));
        let diff = p.r - q.r;
        let (g1, g2) = (p.r_xi.dot(&diff), q.r_xi.dot(&diff));
        g1 * g1 + g2 * g2
    };
    let mut cur = (best.0, best.1, grad(best.0, best.1));
    let mut h = step;
    while h > T::lit(1e-15) {
        let mut improved = false;
        for (da, db) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let a = cur.0 + h * T::lit(da);
            let b = cur.1 + h * T::lit(db);
            if a.abs() > T::one() || b.abs() > T::one() {
                continue;
            }
            let g = grad(a, b);
            if g < cur.2 {
                cur = (a, b, g);
                improved = true;
            }
        }
        if !improved {
            h *= T::lit(0.5);
        }
    }
    (cur.0, cur.1, dist(cur.0, cur.1))
}

/// Angle between the tangents of two interleaved helices `(r cos(phi + k pi), r sin(phi + k pi), pitch phi)`.
pub fn interleaved_helix_angle(helix_radius: f64, pitch: f64) -> f64 {
    let (r2, h2) = (helix_radius * helix_radius, pitch * pitch);
    ((h2 - r2).abs() / (h2 + r2)).min(1.0).acos()
}

/// Analytical twisted double helix of two beams in line contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixReference {
    /// Cross-section radius.
    pub radius: f64,
    pub length: f64,
    pub youngs_modulus: f64,
    /// Prescribed (negative) gap.
    pub gap: f64,
    /// Axial strain of the deformed helix.
    pub strain: f64,
}

impl HelixReference {
    pub fn axial_stiffness(&self) -> f64 {
        self.youngs_modulus * std::f64::consts::PI * self.radius.powi(2)
    }

    pub fn bending_stiffness(&self) -> f64 {
        self.youngs_modulus * std::f64::consts::PI * self.radius.powi(4) / 4.0
    }

    /// Helix radius of each centerline.
    pub fn helix_radius(&self) -> f64 {
        self.radius - self.gap.abs() / 2.0
    }

    /// Axial pitch parameter (`z = pitch * phi`).
    pub fn pitch(&self) -> f64 {
        let r = self.helix_radius();
        let c = (1.0 + self.strain) * self.length / (2.0 * std::f64::consts::PI);
        (c * c - r * r).sqrt()
    }

    /// End displacement that produces one full turn.
    pub fn end_displacement(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.pitch() - self.length
    }

    pub fn curvature(&self) -> f64 {
        let (r, h) = (self.helix_radius(), self.pitch());
        (1.0 + self.strain) * r / (r * r + h * h)
    }

    /// Penalty parameter of the linear law for which the helix is an exact equilibrium.
    pub fn penalty_parameter(&self) -> f64 {
        let (r, h) = (self.helix_radius(), self.pitch());
        let s = r * r + h * h;
        let ea = self.axial_stiffness();
        let ei = self.bending_stiffness();
        -(1.0 + self.strain) * r / (s * self.gap) * (ea * self.strain + ei * (1.0 + self.strain) * h * h / (s * s))
    }

    /// Normal equilibrium residual of the helix under the penalty force (zero for the exact parameter).
    pub fn equilibrium_residual(&self, penalty: f64) -> f64 {
        let (r, h) = (self.helix_radius(), self.pitch());
        let s = r * r + h * h;
        let ea = self.axial_stiffness();
        let ei = self.bending_stiffness();
        let e = self.strain;
        h * h * (1.0 + e).powi(2) / (s * s) * ei * r / s + r * (1.0 + e) * ea * e / s + penalty * self.gap
    }

    /// Reference centerline of beam `k` (0 or 1) at reference arc length `s`.
    pub fn position(&self, beam: usize, s: f64) -> Vec3<f64> {
        let phi = 2.0 * std::f64::consts::PI * s / self.length;
        let shift = beam as f64 * std::f64::consts::PI;
        let r = self.helix_radius();
        Vec3::new(r * (phi + shift).cos(), r * (phi + shift).sin(), self.pitch() * phi)
    }

    /// Arc-length tangent `dr/ds` of beam `k`.
    pub fn tangent(&self, beam: usize, s: f64) -> Vec3<f64> {
        let w = 2.0 * std::f64::consts::PI / self.length;
        let phi = w * s;
        let shift = beam as f64 * std::f64::consts::PI;
        let r = self.helix_radius();
        Vec3::new(-r * w * (phi + shift).sin(), r * w * (phi + shift).cos(), self.pitch() * w)
    }

    /// Contact angle of the two helices at equal arc length.
    pub fn contact_angle(&self) -> f64 {
        interleaved_helix_angle(self.helix_radius(), self.pitch())
    }

    /// Frenet curvature times cross-section radius.
    pub fn curvature_ratio(&self) -> f64 {
        self.curvature() * self.radius
    }
}

/// Constant-gap solution of a beam resting on a rigid beam under a uniform line load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchReference {
    pub line_load: f64,
    pub epsilon: f64,
}

impl PatchReference {
    pub fn gap(&self) -> f64 {
        -self.line_load / self.epsilon
    }

    /// Signed mean relative deviation `sum (g_i - g_ref) / (n g_ref)`.
    pub fn relative_error(&self, gaps: &[f64]) -> f64 {
        let g = self.gap();
        if gaps.is_empty() {
            return f64::NAN;
        }
        gaps.iter().map(|gi| (gi - g) / g).sum::<f64>() / gaps.len() as f64
    }
}

/// Relative L2 position error `sqrt(1/l int |r_h - r_ref|^2 ds) / u_max`,
/// integrated with `points` Gauss points on every segment between `breaks`.
pub fn l2_error(
    numerical: impl Fn(f64) -> Vec3<f64>,
    reference: impl Fn(f64) -> Vec3<f64>,
    breaks: &[f64],
    u_max: f64,
    points: usize,
) -> f64 {
    let rule = GaussRule::<f64>::new(points);
    let mut integral = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let j = 0.5 * (b - a);
        for (x, wt) in rule.iter() {
            let s = a + (x + 1.0) * j;
            integral += wt * j * (numerical(s) - reference(s)).norm_squared();
        }
    }
    let length = breaks.last().unwrap() - breaks.first().unwrap();
    (integral / length).sqrt() / u_max
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn observed_order(element_counts: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = element_counts.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Orders between successive refinements.
pub fn pairwise_orders(element_counts: &[usize], errors: &[f64]) -> Vec<f64> {
    element_counts
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn helix() -> HelixReference {
        HelixReference { radius: 0.01, length: 5.0, youngs_modulus: 1e9, gap: -0.001, strain: 0.01 }
    }

    #[test]
    fn helix_end_displacement_reference_value() {
        assert_relative_eq!(helix().end_displacement(), 4.9647e-2, max_relative = 1e-4);
    }

    #[test]
    fn helix_penalty_satisfies_equilibrium() {
        let h = helix();
        let eps = h.penalty_parameter();
        assert!(eps > 0.0);
        let scale = h.axial_stiffness() * h.strain * h.helix_radius();
        assert!(h.equilibrium_residual(eps).abs() < 1e-12 * scale);
    }

    #[test]
    fn helix_is_arc_length_consistent() {
        let h = helix();
        // |dr/ds| = 1 + strain
        assert_relative_eq!(h.tangent(0, 1.3).norm(), 1.01, max_relative = 1e-12);
        let d = (h.position(0, 2.0) - h.position(1, 2.0)).norm();
        assert_relative_eq!(d, 2.0 * h.helix_radius(), max_relative = 1e-12);
    }

    #[test]
    fn helix_contact_angle_from_tangents() {
        let h = helix();
        let (t1, t2) = (h.tangent(0, 0.7), h.tangent(1, 0.7));
        let direct = (t1.dot(&t2).abs() / (t1.norm() * t2.norm())).acos();
        assert_relative_eq!(h.contact_angle(), direct, max_relative = 1e-9);
    }

    #[test]
    fn steepest_admissible_helix_angle() {
        // r = R, h^2 = 99 R^2: cos(alpha) = 98 / 100.
        let a = interleaved_helix_angle(1.0, 99f64.sqrt());
        assert_relative_eq!(a, 0.98f64.acos(), epsilon = 1e-15);
    }

    #[test]
    fn patch_error_of_exact_gaps_is_zero() {
        let p = PatchReference { line_load: 1.0, epsilon: 500.0 };
        assert_eq!(p.gap(), -0.002);
        assert_eq!(p.relative_error(&[-0.002, -0.002]), 0.0);
    }

    #[test]
    fn observed_order_of_power_law() {
        let n = [4, 8, 16, 32];
        let e: Vec<f64> = n.iter().map(|&k| 3.0 * (k as f64).powi(-4)).collect();
        assert_relative_eq!(observed_order(&n, &e), 4.0, epsilon = 1e-12);
        for o in pairwise_orders(&n, &e) {
            assert_relative_eq!(o, 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fd_check_flags_wrong_tangent() {
        let eval = |x: &[f64]| -> Result<(Vec<f64>, DMatrix<f64>), ()> {
            let mut k = DMatrix::zeros(2, 2);
            k[(0, 0)] = 2.0 * x[0];
            k[(1, 1)] = 3.0; // wrong: true derivative is 3 x1^2
            Ok((vec![x[0] * x[0], x[1].powi(3)], k))
        };
        let rep = fd_tangent_check(&[1.0, 2.0], 1e-6, eval).unwrap();
        assert!(!rep.passes(1e-4));
        assert_eq!(rep.worst_entry, (1, 1));
    }

    #[test]
    fn grid_oracle_finds_crossing() {
        let e1 = ElementDofs::straight(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let e2 = ElementDofs::straight(Vec3::new(0.5, -1.0, 0.3), Vec3::new(0.5, 1.0, 0.3));
        let (a, b, d) = grid_closest_points(&e1, &e2, 40);
        assert_relative_eq!(a, 0.5, epsilon = 1e-9);
        assert_relative_eq!(b, 0.0, epsilon = 1e-9);
        assert_relative_eq!(d, 0.3, epsilon = 1e-12);
    }
}
