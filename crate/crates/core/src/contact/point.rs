//! Point-type contacts: bilateral closest points, endpoint-to-line and
//! endpoint-to-endpoint (hemispherical end caps).

use super::kernel::{add_contact_point, coordinate_rows, LocalSystem, Sensitivity, Side};
use super::PenaltyLaw;
use crate::error::ProjectionError;
use crate::geometry::ElementDofs;
use crate::projection::{bilateral, contact_angle, in_element, project_point, ProjectionSettings};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Coordinates closer than this to a physical beam end are treated as that end.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Bilateral,
    EndpointToLine,
    EndpointToEndpoint,
}

/// One evaluated point contact.
#[derive(Debug, Clone)]
pub struct PointContact<T> {
    pub kind: PointKind,
    pub elements: [usize; 2],
    pub xi: T,
    pub eta: T,
    pub gap: T,
    pub force: T,
    pub angle: T,
    pub system: Option<LocalSystem<T>>,
}

#[allow(clippy::too_many_arguments)]
fn evaluate<T: Real>(
    kind: PointKind,
    ids: [usize; 2],
    e1: &ElementDofs<T>,
    xi: T,
    e2: &ElementDofs<T>,
    eta: T,
    radii: T,
    law: &PenaltyLaw<T>,
    sens: impl FnOnce(usize) -> Sensitivity<T>,
) -> PointContact<T> {
    let s1 = Side { dofs: e1, coordinate: xi, slot: 0 }.eval();
    let s2 = Side { dofs: e2, coordinate: eta, slot: 1 }.eval();
    let angle = contact_angle(&s1.r_c, &s2.r_c);
    let gap = (s1.r - s2.r).norm() - radii;
    let mut pc = PointContact { kind, elements: ids, xi, eta, gap, force: law.force(gap), angle, system: None };
    if law.is_active(gap) {
        let mut sys = LocalSystem::new(2);
        let (dxi, deta) = coordinate_rows(&s1, &s2, 24, sens(24));
        add_contact_point(&mut sys, &s1, &s2, radii, law, T::one(), None, &dxi, &deta);
        pc.system = Some(sys);
    }
    pc
}

/// Point contact at the bilateral closest point; `None` when it lies outside either element.
pub fn bilateral_contact<T: Real>(
    ids: [usize; 2],
    e1: &ElementDofs<T>,
    e2: &ElementDofs<T>,
    radii: T,
    law: &PenaltyLaw<T>,
    settings: &ProjectionSettings<T>,
) -> Result<Option<PointContact<T>>, ProjectionError> {
    let p = bilateral(e1, e2, settings)?;
    if !p.valid {
        return Ok(None);
    }
    Ok(Some(evaluate(PointKind::Bilateral, ids, e1, p.xi, e2, p.eta, radii, law, |_| Sensitivity::Bilateral)))
}

/// An element of the opposing beam considered for an endpoint projection.
#[derive(Debug, Clone, Copy)]
pub struct LineTarget<'a, T> {
    pub element: usize,
    pub dofs: &'a ElementDofs<T>,
    /// Coordinate of a physical beam end on this element, if any.
    pub physical_ends: [Option<T>; 2],
}

impl<'a, T: Real> LineTarget<'a, T> {
    /// Valid coordinate that does not coincide with a physical end.
    pub fn is_interior(&self, eta: T) -> bool {
        if !in_element(eta) {
            return false;
        }
        let tol = T::lit(ENDPOINT_TOLERANCE);
        self.physical_ends.iter().flatten().all(|&e| (eta - e).abs() > tol)
    }
}

/// Closest interior point of the opposing beam to a fixed endpoint.
pub fn closest_line_point<T: Real>(
    point: &crate::linalg::Vec3<T>,
    targets: &[LineTarget<'_, T>],
    settings: &ProjectionSettings<T>,
) -> Option<(usize, T, T)> {
    let mut best: Option<(usize, T, T)> = None;
    for (i, t) in targets.iter().enumerate() {
        if let Ok(p) = project_point(point, t.dofs, settings) {
            if t.is_interior(p.coordinate) && best.is_none_or(|b| p.distance < b.2) {
                best = Some((i, p.coordinate, p.distance));
            }
        }
    }
    best
}

/// Contact between the end cap at `xi_end` of `end_elem` and the closest interior
/// point of the opposing beam.
#[allow(clippy::too_many_arguments)]
pub fn endpoint_to_line<T: Real>(
    end_id: usize,
    end_elem: &ElementDofs<T>,
    xi_end: T,
    targets: &[LineTarget<'_, T>],
    radii: T,
    law: &PenaltyLaw<T>,
    settings: &ProjectionSettings<T>,
) -> Option<PointContact<T>> {
    let point = end_elem.position(xi_end);
    let (i, eta, _) = closest_line_point(&point, targets, settings)?;
    let t = &targets[i];
    Some(evaluate(PointKind::EndpointToLine, [end_id, t.element], end_elem, xi_end, t.dofs, eta, radii, law, |dim| {
        Sensitivity::Unilateral { dxi: vec![T::zero(); dim] }
    }))
}

/// Contact between two end caps.
#[allow(clippy::too_many_arguments)]
pub fn endpoint_to_endpoint<T: Real>(
    ids: [usize; 2],
    e1: &ElementDofs<T>,
    xi_end: T,
    e2: &ElementDofs<T>,
    eta_end: T,
    radii: T,
    law: &PenaltyLaw<T>,
) -> PointContact<T> {
    evaluate(PointKind::EndpointToEndpoint, ids, e1, xi_end, e2, eta_end, radii, law, |_| Sensitivity::Fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;
    use approx::assert_relative_eq;

    #[test]
    fn crossing_beams_point_force() {
        let e1 = ElementDofs::straight(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let e2 = ElementDofs::straight(Vec3::new(0.0, -1.0, 0.015), Vec3::new(0.0, 1.0, 0.015));
        let law = PenaltyLaw::Linear { epsilon: 100.0 };
        let pc = bilateral_contact([0, 1], &e1, &e2, 0.02, &law, &ProjectionSettings::default()).unwrap().unwrap();
        assert_relative_eq!(pc.gap, -0.005, epsilon = 1e-14);
        assert_relative_eq!(pc.force, 0.5, epsilon = 1e-12);
        let r = pc.system.unwrap().residual;
        // beam 2 sits above: beam 1 is pushed down, beam 2 up; equal and opposite.
        let f1: f64 = r[2] + r[8];
        let f2: f64 = r[14] + r[20];
        assert_relative_eq!(f1, 0.5, epsilon = 1e-12);
        assert_relative_eq!(f2, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn endpoint_near_physical_end_is_not_interior() {
        let e2 = ElementDofs::straight(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let t = LineTarget { element: 3, dofs: &e2, physical_ends: [Some(-1.0), None] };
        assert!(!t.is_interior(-1.0 + 1e-8));
        assert!(t.is_interior(-0.9));
        assert!(t.is_interior(1.0));
    }
}
