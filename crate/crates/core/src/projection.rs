//! Closest-point projections between two Hermite centerlines.
//!
//! Element 1 is parameterized by `xi`, element 2 by `eta`. Results outside
//! [-1, 1] are returned and flagged invalid rather than clamped.

use crate::error::ProjectionError;
use crate::geometry::ElementDofs;
use crate::linalg::{solve2, Vec3};
use crate::scalar::Real;

/// Newton settings shared by all projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSettings<T> {
    pub tolerance: T,
    pub max_iterations: usize,
    pub seeds: usize,
}

impl<T: Real> Default for ProjectionSettings<T> {
    fn default() -> Self {
        Self { tolerance: T::lit(1e-10), max_iterations: 50, seeds: 5 }
    }
}

/// Result of the two-parameter (bilateral) closest-point problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointProjection<T> {
    pub xi: T,
    pub eta: T,
    pub distance: T,
    pub valid: bool,
    pub iterations: usize,
}

/// Result of a one-parameter projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateProjection<T> {
    pub coordinate: T,
    pub distance: T,
    pub valid: bool,
    pub iterations: usize,
}

/// Coordinate within [-1, 1] up to round-off.
pub fn in_element<T: Real>(x: T) -> bool {
    x.abs() <= T::one() + T::lit(1e-12)
}

fn seeds<T: Real>(n: usize) -> Vec<T> {
    if n <= 1 {
        return vec![T::zero()];
    }
    (0..n).map(|i| T::lit(-1.0 + 2.0 * i as f64 / (n - 1) as f64)).collect()
}

/// Bilateral projection: both orthogonality conditions
/// `r1_xi . (r1 - r2) = 0` and `r2_eta . (r1 - r2) = 0`.
pub fn bilateral<T: Real>(
    e1: &ElementDofs<T>,
    e2: &ElementDofs<T>,
    settings: &ProjectionSettings<T>,
) -> Result<PointProjection<T>, ProjectionError> {
    let grid = seeds::<T>(settings.seeds);
    let mut start = (T::zero(), T::zero());
    let mut best = T::infinity();
    for &xi in &grid {
        for &eta in &grid {
            let d = (e1.position(xi) - e2.position(eta)).norm();
            if d < best {
                best = d;
                start = (xi, eta);
            }
        }
    }
    bilateral_from(e1, e2, start.0, start.1, settings)
}

/// Bilateral Newton iteration from a given start.
pub fn bilateral_from<T: Real>(
    e1: &ElementDofs<T>,
    e2: &ElementDofs<T>,
    xi0: T,
    eta0: T,
    settings: &ProjectionSettings<T>,
) -> Result<PointProjection<T>, ProjectionError> {
    let (mut xi, mut eta) = (xi0, eta0);
    let mut residual = T::infinity();
    for it in 0..settings.max_iterations {
        let p1 = e1.evaluate(xi);
        let p2 = e2.evaluate(eta);
        let diff = p1.r - p2.r;
        let res = [p1.r_xi.dot(&diff), p2.r_xi.dot(&diff)];
        let d = diff.norm();
        let (n1, n2) = (p1.r_xi.norm(), p2.r_xi.norm());
        residual = res[0].abs().max(res[1].abs());
        let scale = settings.tolerance * n1.max(n2) * (n1.max(n2) + d);
        let a = [
            [p1.r_xi.dot(&p1.r_xi) + diff.dot(&p1.r_xixi), -p1.r_xi.dot(&p2.r_xi)],
            [p1.r_xi.dot(&p2.r_xi), -p2.r_xi.dot(&p2.r_xi) + diff.dot(&p2.r_xixi)],
        ];
        let det_tol = T::lit(1e-12) * n1 * n1 * n2 * n2;
        let step = solve2(a, [-res[0], -res[1]], det_tol).ok_or_else(|| ProjectionError::SingularJacobian {
            det: (a[0][0] * a[1][1] - a[0][1] * a[1][0]).to_f64_lossy(),
        })?;
        xi += step[0];
        eta += step[1];
        if !(xi.is_finite() && eta.is_finite()) || xi.abs() > T::lit(1e3) || eta.abs() > T::lit(1e3) {
            break;
        }
        if residual <= scale && step[0].abs().max(step[1].abs()) <= T::lit(1e-10) {
            let distance = (e1.position(xi) - e2.position(eta)).norm();
            return Ok(PointProjection { xi, eta, distance, valid: in_element(xi) && in_element(eta), iterations: it + 1 });
        }
    }
    Err(ProjectionError::NoConvergence { iterations: settings.max_iterations, residual: residual.to_f64_lossy() })
}

/// Scalar Newton iteration over several seeds, keeping the converged root with
/// the smallest distance. `eval` returns (residual, derivative, residual scale).
fn newton_scalar<T: Real>(
    settings: &ProjectionSettings<T>,
    seed_values: &[T],
    eval: impl Fn(T) -> (T, T, T),
    distance: impl Fn(T) -> T,
) -> Result<CoordinateProjection<T>, ProjectionError> {
    let mut best: Option<CoordinateProjection<T>> = None;
    let mut last_residual = T::infinity();
    let mut singular = None;
    let mut ordered: Vec<T> = seed_values.to_vec();
    ordered.sort_by(|a, b| distance(*a).partial_cmp(&distance(*b)).unwrap_or(std::cmp::Ordering::Equal));
    for seed in ordered {
        let mut x = seed;
        for it in 0..settings.max_iterations {
            let (f, df, scale) = eval(x);
            last_residual = f.abs();
            if !(df.abs() > T::lit(1e-14) * scale.abs().max(T::min_positive_value())) {
                singular = Some(df);
                break;
            }
            let step = -f / df;
            x += step;
            if !x.is_finite() || x.abs() > T::lit(1e3) {
                break;
            }
            if f.abs() <= settings.tolerance * scale && step.abs() <= T::lit(1e-10) {
                let cand = CoordinateProjection { coordinate: x, distance: distance(x), valid: in_element(x), iterations: it + 1 };
                let better = match &best {
                    None => true,
                    Some(b) => (cand.valid && !b.valid) || (cand.valid == b.valid && cand.distance < b.distance),
                };
                if better {
                    best = Some(cand);
                }
                break;
            }
        }
        if best.is_some_and(|b| b.valid) {
            break;
        }
    }
    match (best, singular) {
        (Some(b), _) => Ok(b),
        (None, Some(det)) => Err(ProjectionError::SingularJacobian { det: det.to_f64_lossy() }),
        (None, None) => Err(ProjectionError::NoConvergence {
            iterations: settings.max_iterations,
            residual: last_residual.to_f64_lossy(),
        }),
    }
}

/// Unilateral projection of the point `r1(xi)` onto element 2: `r2_eta . (r1 - r2) = 0`.
pub fn unilateral<T: Real>(
    e1: &ElementDofs<T>,
    xi: T,
    e2: &ElementDofs<T>,
    settings: &ProjectionSettings<T>,
) -> Result<CoordinateProjection<T>, ProjectionError> {
    project_point(&e1.position(xi), e2, settings)
}

/// Orthogonal projection of a point onto element 2.
pub fn project_point<T: Real>(
    point: &Vec3<T>,
    e2: &ElementDofs<T>,
    settings: &ProjectionSettings<T>,
) -> Result<CoordinateProjection<T>, ProjectionError> {
    let eval = |eta: T| {
        let p = e2.evaluate(eta);
        let diff = *point - p.r;
        let n = p.r_xi.norm();
        (p.r_xi.dot(&diff), diff.dot(&p.r_xixi) - p.r_xi.dot(&p.r_xi), n * (n + diff.norm()))
    };
    newton_scalar(settings, &seeds(settings.seeds), eval, |eta| (*point - e2.position(eta)).norm())
}

/// Closest point on element 1 to the fixed point `r2(eta)`: `r1_xi . (r1 - r2) = 0`.
pub fn project_onto_first<T: Real>(
    e1: &ElementDofs<T>,
    e2: &ElementDofs<T>,
    eta: T,
    settings: &ProjectionSettings<T>,
) -> Result<CoordinateProjection<T>, ProjectionError> {
    project_point(&e2.position(eta), e1, settings)
}

/// Coordinate `xi` on element 1 where `r2_eta(eta) . (r1(xi) - r2(eta)) = 0`, i.e. where
/// element 1 crosses the normal plane of element 2 at `eta`. Used to place integration
/// segment boundaries at projections of beam endpoints.
pub fn normal_plane_crossing<T: Real>(
    e1: &ElementDofs<T>,
    e2: &ElementDofs<T>,
    eta: T,
    settings: &ProjectionSettings<T>,
) -> Result<CoordinateProjection<T>, ProjectionError> {
    let p2 = e2.evaluate(eta);
    let eval = |xi: T| {
        let p1 = e1.evaluate(xi);
        let diff = p1.r - p2.r;
        let n = p2.r_xi.norm();
        (p2.r_xi.dot(&diff), p2.r_xi.dot(&p1.r_xi), n * (p1.r_xi.norm() + diff.norm()))
    };
    newton_scalar(settings, &seeds(settings.seeds), eval, |xi| (e1.position(xi) - p2.r).norm())
}

/// Contact angle `arccos(|t1 . t2| / (|t1| |t2|))` in radians.
pub fn contact_angle<T: Real>(t1: &Vec3<T>, t2: &Vec3<T>) -> T {
    let c = (t1.dot(t2).abs() / (t1.norm() * t2.norm())).min(T::one());
    c.acos()
}

/// Lower bound (radians) on the contact angle above which a unique bilateral closest
/// point exists, `arccos(1 - 2 mu)` with `mu = R * kappa_max`.
pub fn alpha_min<T: Real>(mu_max: T) -> Result<T, ProjectionError> {
    alpha_min_k(mu_max, T::lit(2.0))
}

/// Variant of [`alpha_min`] with factor `k` in place of 2.
pub fn alpha_min_k<T: Real>(mu_max: T, k: T) -> Result<T, ProjectionError> {
    if !(mu_max >= T::zero() && mu_max < T::one()) {
        return Err(ProjectionError::CurvatureRatioOutOfRange(mu_max.to_f64_lossy()));
    }
    Ok((T::one() - k * mu_max).max(-T::one()).acos())
}
