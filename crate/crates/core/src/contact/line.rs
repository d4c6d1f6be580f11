//! Line contact: Gauss-point-to-segment penalty integration along a slave element,
//! with optional integration-interval segmentation at projected master endpoints.

use super::kernel::{add_contact_point, coordinate_rows, orthogonality, LocalSystem, Sensitivity, Side};
use super::PenaltyLaw;
use crate::geometry::ElementDofs;
use crate::projection::{contact_angle, normal_plane_crossing, unilateral, ProjectionSettings};
use crate::quadrature::GaussRule;
use crate::scalar::Real;

/// Integration settings for line contact.
#[derive(Debug, Clone)]
pub struct LineSettings<T> {
    /// Equidistant integration intervals per slave element.
    pub intervals: usize,
    /// Gauss points per interval.
    pub gauss_points: usize,
    /// Split intervals at projections of master beam endpoints.
    pub segmentation: bool,
    pub projection: ProjectionSettings<T>,
    /// Master endpoints farther than this from the slave are not used for segmentation.
    pub search_radius: T,
}

impl<T: Real> Default for LineSettings<T> {
    fn default() -> Self {
        Self {
            intervals: 1,
            gauss_points: 5,
            segmentation: true,
            projection: ProjectionSettings::default(),
            search_radius: T::infinity(),
        }
    }
}

/// A master element considered for one slave element.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a, T> {
    pub element: usize,
    pub beam: usize,
    pub dofs: &'a ElementDofs<T>,
    /// Element holds the physical start (`eta = -1`) of its beam.
    pub beam_start: bool,
    /// Element holds the physical end (`eta = +1`) of its beam.
    pub beam_end: bool,
}

/// How an interval boundary depends on the configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind<T> {
    Fixed,
    /// Boundary at the slave coordinate where the master endpoint `eta` projects;
    /// `candidate` indexes the candidate list.
    EndpointProjection { candidate: usize, eta: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lower: T,
    pub upper: T,
    pub lower_kind: BoundaryKind<T>,
    pub upper_kind: BoundaryKind<T>,
}

/// State of one slave Gauss point with a valid master projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePoint<T> {
    pub xi: T,
    /// Gauss weight times segment Jacobian.
    pub weight: T,
    pub master_element: usize,
    pub master_beam: usize,
    pub eta: T,
    pub gap: T,
    pub force: T,
    /// Angle between the two tangents in radians.
    pub angle: T,
}

/// Output of line contact evaluation on one slave element.
#[derive(Debug, Clone)]
pub struct LineContactResult<T> {
    pub intervals: Vec<Interval<T>>,
    pub points: Vec<LinePoint<T>>,
    /// Element ids of the local blocks of `system` (slave first).
    pub elements: Vec<usize>,
    pub system: Option<LocalSystem<T>>,
    pub failed_projections: usize,
}

/// Equidistant intervals, split at the given interior boundaries.
pub fn build_intervals<T: Real>(count: usize, boundaries: &[(T, BoundaryKind<T>)]) -> Vec<Interval<T>> {
    let tol = T::lit(1e-9);
    let mut out = Vec::new();
    for i in 0..count {
        let lo = T::lit(-1.0 + 2.0 * i as f64 / count as f64);
        let hi = T::lit(-1.0 + 2.0 * (i + 1) as f64 / count as f64);
        let mut inner: Vec<(T, BoundaryKind<T>)> =
            boundaries.iter().copied().filter(|(x, _)| *x > lo + tol && *x < hi - tol).collect();
        inner.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut cur = (lo, BoundaryKind::Fixed);
        for b in inner {
            out.push(Interval { lower: cur.0, upper: b.0, lower_kind: cur.1, upper_kind: b.1 });
            cur = b;
        }
        out.push(Interval { lower: cur.0, upper: hi, lower_kind: cur.1, upper_kind: BoundaryKind::Fixed });
    }
    out
}

/// Slave coordinates of master endpoint projections used for segmentation.
pub fn endpoint_boundaries<T: Real>(
    slave: &ElementDofs<T>,
    candidates: &[Candidate<'_, T>],
    settings: &LineSettings<T>,
) -> Vec<(T, BoundaryKind<T>)> {
    let mut out = Vec::new();
    for (ci, c) in candidates.iter().enumerate() {
        for (flag, eta) in [(c.beam_start, -T::one()), (c.beam_end, T::one())] {
            if !flag {
                continue;
            }
            if let Ok(p) = normal_plane_crossing(slave, c.dofs, eta, &settings.projection) {
                if p.coordinate.abs() < T::one() && p.distance <= settings.search_radius {
                    out.push((p.coordinate, BoundaryKind::EndpointProjection { candidate: ci, eta }));
                }
            }
        }
    }
    out
}

/// Evaluate line contact of one slave element against its candidate master elements.
pub fn line_contact<T: Real>(
    slave_element: usize,
    slave: &ElementDofs<T>,
    candidates: &[Candidate<'_, T>],
    radii: T,
    law: &PenaltyLaw<T>,
    settings: &LineSettings<T>,
) -> LineContactResult<T> {
    let boundaries = if settings.segmentation { endpoint_boundaries(slave, candidates, settings) } else { Vec::new() };
    let intervals = build_intervals(settings.intervals, &boundaries);
    let rule = GaussRule::<T>::new(settings.gauss_points);
    let blocks = candidates.len() + 1;
    let dim = 12 * blocks;
    let mut system = LocalSystem::new(blocks);
    let mut used = vec![false; blocks];
    used[0] = true;
    let mut points = Vec::new();
    let mut failed = 0;
    let half = T::lit(0.5);
    let j_ele = slave.jacobian();

    let mut beams: Vec<usize> = candidates.iter().map(|c| c.beam).collect();
    beams.sort_unstable();
    beams.dedup();

    for iv in &intervals {
        let bound_row = |kind: &BoundaryKind<T>, xi_b: T| -> Option<Vec<T>> {
            match *kind {
                BoundaryKind::Fixed => None,
                BoundaryKind::EndpointProjection { candidate, eta } => {
                    let s1 = Side { dofs: slave, coordinate: xi_b, slot: 0 }.eval();
                    let s2 = Side { dofs: candidates[candidate].dofs, coordinate: eta, slot: candidate + 1 }.eval();
                    let o = orthogonality(&s1, &s2, dim);
                    let inv = -T::one() / o.jacobian[1][0];
                    Some(o.dp2.iter().map(|v| *v * inv).collect())
                }
            }
        };
        let row_lo = bound_row(&iv.lower_kind, iv.lower);
        let row_hi = bound_row(&iv.upper_kind, iv.upper);
        let j_seg = j_ele * (iv.upper - iv.lower) * half;
        for (xb, w) in rule.iter() {
            let (c_lo, c_hi) = ((T::one() - xb) * half, (T::one() + xb) * half);
            let xi = c_lo * iv.lower + c_hi * iv.upper;
            for &beam in &beams {
                let mut best: Option<(usize, T, T)> = None;
                let mut any_ok = false;
                for (ci, c) in candidates.iter().enumerate().filter(|(_, c)| c.beam == beam) {
                    if let Ok(p) = unilateral(slave, xi, c.dofs, &settings.projection) {
                        any_ok = true;
                        if p.valid && best.is_none_or(|b| p.distance < b.2) {
                            best = Some((ci, p.coordinate, p.distance));
                        }
                    }
                }
                if !any_ok {
                    failed += 1;
                }
                let Some((ci, eta, _)) = best else { continue };
                let s1 = Side { dofs: slave, coordinate: xi, slot: 0 }.eval();
                let s2 = Side { dofs: candidates[ci].dofs, coordinate: eta, slot: ci + 1 }.eval();
                let weight = w * j_seg;
                let state = if law.is_active((s1.r - s2.r).norm() - radii) {
                    used[ci + 1] = true;
                    let mut dxi = vec![T::zero(); dim];
                    let mut dw = vec![T::zero(); dim];
                    let mut moving = false;
                    for (row, c, sign, kind) in
                        [(&row_lo, c_lo, -T::one(), &iv.lower_kind), (&row_hi, c_hi, T::one(), &iv.upper_kind)]
                    {
                        if let Some(r) = row {
                            moving = true;
                            if let BoundaryKind::EndpointProjection { candidate, .. } = kind {
                                used[candidate + 1] = true;
                            }
                            for q in 0..dim {
                                dxi[q] += c * r[q];
                                dw[q] += sign * w * j_ele * half * r[q];
                            }
                        }
                    }
                    let (dxi, deta) = coordinate_rows(&s1, &s2, dim, Sensitivity::Unilateral { dxi });
                    add_contact_point(&mut system, &s1, &s2, radii, law, weight, moving.then_some(&dw[..]), &dxi, &deta)
                } else {
                    super::kernel::point_state(&s1.r, &s2.r, radii, law)
                };
                points.push(LinePoint {
                    xi,
                    weight,
                    master_element: candidates[ci].element,
                    master_beam: beam,
                    eta,
                    gap: state.gap,
                    force: state.force,
                    angle: contact_angle(&s1.r_c, &s2.r_c),
                });
            }
        }
    }

    let active = points.iter().any(|p| law.is_active(p.gap));
    let kept: Vec<usize> = (0..blocks).filter(|&b| used[b]).collect();
    let elements = kept.iter().map(|&b| if b == 0 { slave_element } else { candidates[b - 1].element }).collect();
    let system = active.then(|| compress(&system, &kept));
    LineContactResult { intervals, points, elements, system, failed_projections: failed }
}

/// Restrict a local system to the listed blocks.
pub fn compress<T: Real>(sys: &LocalSystem<T>, kept: &[usize]) -> LocalSystem<T> {
    let mut out = LocalSystem::new(kept.len());
    let idx: Vec<usize> = kept.iter().flat_map(|&b| 12 * b..12 * b + 12).collect();
    for (i, &gi) in idx.iter().enumerate() {
        out.residual[i] = sys.residual[gi];
        for (j, &gj) in idx.iter().enumerate() {
            out.stiffness[(i, j)] = sys.stiffness[(gi, gj)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;
    use approx::assert_relative_eq;

    #[test]
    fn intervals_split_at_two_boundaries() {
        let b = [
            (0.3f64, BoundaryKind::EndpointProjection { candidate: 0, eta: -1.0 }),
            (-0.4, BoundaryKind::EndpointProjection { candidate: 1, eta: 1.0 }),
        ];
        let iv = build_intervals(1, &b);
        assert_eq!(iv.len(), 3);
        assert_relative_eq!(iv[0].upper, -0.4);
        assert_relative_eq!(iv[1].upper, 0.3);
        let iv2 = build_intervals(2, &b);
        assert_eq!(iv2.len(), 4);
    }

    #[test]
    fn uniform_penetration_integrates_to_exact_force() {
        let slave = ElementDofs::straight(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let master = ElementDofs::straight(Vec3::new(-0.5, 0.0, 0.018), Vec3::new(1.5, 0.0, 0.018));
        let cands = [Candidate { element: 1, beam: 1, dofs: &master, beam_start: false, beam_end: false }];
        let law = PenaltyLaw::Linear { epsilon: 1000.0 };
        let r = line_contact(0, &slave, &cands, 0.02, &law, &LineSettings::default());
        let sys = r.system.unwrap();
        // total force on the slave: -eps * g * length along -z
        let fz: f64 = (0..4).filter(|k| k % 2 == 0).map(|k| sys.residual[3 * k + 2]).sum();
        assert_relative_eq!(fz, 1000.0 * 0.002 * 1.0, max_relative = 1e-12);
        assert_eq!(r.points.len(), 5);
    }

    #[test]
    fn segmentation_cuts_at_master_endpoint() {
        let slave = ElementDofs::straight(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        let master = ElementDofs::straight(Vec3::new(0.37, 0.0, 0.018), Vec3::new(1.5, 0.0, 0.018));
        let cands = [Candidate { element: 1, beam: 1, dofs: &master, beam_start: true, beam_end: true }];
        let law = PenaltyLaw::Linear { epsilon: 1000.0 };
        let seg = line_contact(0, &slave, &cands, 0.02, &law, &LineSettings::default());
        assert_eq!(seg.intervals.len(), 2);
        assert_relative_eq!(seg.intervals[0].upper, -1.0 + 2.0 * 0.37, epsilon = 1e-12);
        let sys = seg.system.unwrap();
        let fz: f64 = (0..4).filter(|k| k % 2 == 0).map(|k| sys.residual[3 * k + 2]).sum();
        assert_relative_eq!(fz, 2.0 * 0.63, max_relative = 1e-12);
    }
}
