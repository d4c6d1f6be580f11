//! Global residual and tangent assembly, including contact search and evaluation.
//!
//! Element and contact kernels run in parallel; results are collected in a fixed
//! order and summed sequentially, so assembly is deterministic for any thread count.

use crate::contact::broad_phase::{candidate_pairs, SearchElement};
use crate::contact::line::{line_contact, Candidate};
use crate::contact::point::{bilateral_contact, endpoint_to_endpoint, endpoint_to_line, LineTarget, PointContact, PointKind};
use crate::contact::LocalSystem;
use crate::error::SolverError;
use crate::geometry::ElementDofs;
use crate::linalg::DMatrix;
use crate::model::{Formulation, Model};
use crate::projection::project_point;
use crate::scalar::Real;
use crate::sparse::TripletMatrix;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// One slave Gauss point with a valid master projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSample<T> {
    pub slave_beam: usize,
    pub master_beam: usize,
    pub slave_element: usize,
    pub master_element: usize,
    /// Reference arc length on the slave beam.
    pub s: T,
    pub xi: T,
    pub eta: T,
    pub gap: T,
    pub force: T,
    pub angle: T,
    pub weight: T,
}

/// One point-type contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample<T> {
    pub kind: PointKind,
    pub beams: [usize; 2],
    pub elements: [usize; 2],
    /// Reference arc lengths on both beams.
    pub s: [T; 2],
    pub gap: T,
    pub force: T,
    pub angle: T,
}

/// Contact bookkeeping of one assembly pass.
#[derive(Debug, Clone, Default)]
pub struct ContactState<T> {
    pub line: Vec<LineSample<T>>,
    pub points: Vec<PointSample<T>>,
    pub candidate_pairs: usize,
    pub failed_projections: usize,
    /// Slave elements whose integration intervals were split.
    pub segmented_elements: usize,
}

impl<T: Real> ContactState<T> {
    pub fn active_line_points(&self) -> usize {
        self.line.iter().filter(|p| p.force > T::zero()).count()
    }

    pub fn active_point_contacts(&self) -> usize {
        self.points.iter().filter(|p| p.force > T::zero()).count()
    }
}

/// Assembled global system.
#[derive(Debug, Clone)]
pub struct Assembly<T> {
    pub residual: Vec<T>,
    pub stiffness: TripletMatrix<T>,
    pub contact: ContactState<T>,
}

struct Block<T> {
    elements: Vec<usize>,
    system: LocalSystem<T>,
}

fn scatter<T: Real>(model: &Model<T>, b: &Block<T>, residual: &mut [T], k: &mut TripletMatrix<T>) {
    let idx: Vec<usize> = b.elements.iter().flat_map(|&e| model.mesh.elements[e].dof_indices()).collect();
    for (i, &gi) in idx.iter().enumerate() {
        residual[gi] += b.system.residual[i];
        for (j, &gj) in idx.iter().enumerate() {
            let v = b.system.stiffness[(i, j)];
            if v != T::zero() {
                k.push(gi, gj, v);
            }
        }
    }
}

/// Assemble `R = R_int + R_con - F_ext` and its tangent at `state`; external loads are
/// scaled by `load_factor`.
pub fn assemble<T: Real>(model: &Model<T>, state: &[T], load_factor: T) -> Result<Assembly<T>, SolverError> {
    let mesh = &model.mesh;
    let n = mesh.n_dofs();
    let dofs: Vec<ElementDofs<T>> = (0..mesh.elements.len()).map(|e| mesh.element_dofs(e, state)).collect();
    let integ = &model.integrator;

    let internal: Vec<Result<Block<T>, SolverError>> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let mat = &mesh.beams[mesh.elements[e].beam].material;
            let v = integ.internal(&dofs[e], mat)?;
            Ok(Block { elements: vec![e], system: LocalSystem { residual: v.residual, stiffness: v.stiffness } })
        })
        .collect();

    let mut residual = vec![T::zero(); n];
    let mut k = TripletMatrix::new(n);
    for b in internal {
        scatter(model, &b?, &mut residual, &mut k);
    }

    for load in &model.loads.line {
        let f = load.force * load_factor;
        let m = load.moment * load_factor;
        for &e in &mesh.beams[load.beam].elements {
            let v = integ.distributed_load(&dofs[e], &f, &m)?;
            scatter(model, &Block { elements: vec![e], system: LocalSystem { residual: v.residual, stiffness: v.stiffness } }, &mut residual, &mut k);
        }
    }
    for load in &model.loads.nodal {
        for i in 0..3 {
            residual[6 * load.node + i] -= load.force[i] * load_factor;
        }
        if load.moment.norm_squared() > T::zero() {
            let (e, xi) = mesh
                .elements
                .iter()
                .enumerate()
                .find_map(|(e, el)| {
                    if el.nodes[0] == load.node {
                        Some((e, -T::one()))
                    } else if el.nodes[1] == load.node {
                        Some((e, T::one()))
                    } else {
                        None
                    }
                })
                .expect("loaded node belongs to an element");
            let v = integ.point_load(&dofs[e], xi, &crate::linalg::Vec3::zero(), &(load.moment * load_factor))?;
            scatter(model, &Block { elements: vec![e], system: LocalSystem { residual: v.residual, stiffness: v.stiffness } }, &mut residual, &mut k);
        }
    }

    let (blocks, contact) = evaluate_contact(model, &dofs);
    for b in &blocks {
        scatter(model, b, &mut residual, &mut k);
    }
    Ok(Assembly { residual, stiffness: k, contact })
}

/// Broad phase: candidate (slave, master) element pairs allowed by the configuration.
pub fn contact_candidates<T: Real>(model: &Model<T>, dofs: &[ElementDofs<T>]) -> Vec<(usize, usize)> {
    let mesh = &model.mesh;
    let search: Vec<SearchElement<T>> = mesh
        .elements
        .iter()
        .enumerate()
        .map(|(e, el)| SearchElement { beam: el.beam, index: el.index, dofs: &dofs[e] })
        .collect();
    candidate_pairs(&search, model.search_radius(), &model.contact.rules)
        .into_iter()
        .filter(|&(a, b)| model.contact.allows(mesh.elements[a].beam, mesh.elements[b].beam))
        .collect()
}

fn evaluate_contact<T: Real>(model: &Model<T>, dofs: &[ElementDofs<T>]) -> (Vec<Block<T>>, ContactState<T>) {
    let mut state = ContactState::default();
    let mut blocks = Vec::new();
    let cfg = &model.contact;
    if cfg.formulation == Formulation::None {
        return (blocks, state);
    }
    let mesh = &model.mesh;
    let pairs = contact_candidates(model, dofs);
    state.candidate_pairs = pairs.len();

    match cfg.formulation {
        Formulation::Line | Formulation::LineWithEndpoints => {
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &(s, m) in &pairs {
                groups.entry(s).or_default().push(m);
            }
            let groups: Vec<(usize, Vec<usize>)> = groups.into_iter().collect();
            let results: Vec<_> = groups
                .par_iter()
                .map(|(s, masters)| {
                    let slave_beam = mesh.elements[*s].beam;
                    let cands: Vec<Candidate<T>> = masters
                        .iter()
                        .map(|&m| Candidate {
                            element: m,
                            beam: mesh.elements[m].beam,
                            dofs: &dofs[m],
                            beam_start: mesh.is_first(m),
                            beam_end: mesh.is_last(m),
                        })
                        .collect();
                    // Radii may differ per master beam; use the first master's beam for the sum.
                    let radii = model.radii(slave_beam, cands[0].beam);
                    let mut settings = cfg.line.clone();
                    settings.search_radius = model.search_radius();
                    (*s, line_contact(*s, &dofs[*s], &cands, radii, &cfg.law, &settings))
                })
                .collect();
            for (s, res) in results {
                let el = &mesh.elements[s];
                state.failed_projections += res.failed_projections;
                if res.intervals.len() > cfg.line.intervals {
                    state.segmented_elements += 1;
                }
                for p in &res.points {
                    state.line.push(LineSample {
                        slave_beam: el.beam,
                        master_beam: p.master_beam,
                        slave_element: s,
                        master_element: p.master_element,
                        s: el.arc_length(p.xi),
                        xi: p.xi,
                        eta: p.eta,
                        gap: p.gap,
                        force: p.force,
                        angle: p.angle,
                        weight: p.weight,
                    });
                }
                if let Some(sys) = res.system {
                    blocks.push(Block { elements: res.elements, system: sys });
                }
            }
            if cfg.formulation == Formulation::LineWithEndpoints {
                endpoint_contacts(model, dofs, &pairs, &mut blocks, &mut state);
            }
        }
        Formulation::Point => {
            let results: Vec<_> = pairs
                .par_iter()
                .map(|&(a, b)| {
                    let radii = model.radii(mesh.elements[a].beam, mesh.elements[b].beam);
                    bilateral_contact([a, b], &dofs[a], &dofs[b], radii, &cfg.point_law, &cfg.line.projection)
                })
                .collect();
            let mut found = Vec::new();
            for r in results {
                match r {
                    Ok(Some(pc)) => found.push(pc),
                    Ok(None) => {}
                    Err(_) => state.failed_projections += 1,
                }
            }
            // Closest points on a shared node are found from both adjacent elements.
            let mut keyed: Vec<(PointSample<T>, PointContact<T>)> = found.into_iter().map(|pc| (sample(model, &pc), pc)).collect();
            keyed.sort_by(|x, y| {
                (x.0.beams, x.0.s[0], x.0.s[1]).partial_cmp(&(y.0.beams, y.0.s[0], y.0.s[1])).unwrap_or(std::cmp::Ordering::Equal)
            });
            let tol = T::lit(1e-8);
            let mut last: Option<PointSample<T>> = None;
            for (smp, pc) in keyed {
                if let Some(l) = last {
                    if l.beams == smp.beams && (l.s[0] - smp.s[0]).abs() < tol && (l.s[1] - smp.s[1]).abs() < tol {
                        continue;
                    }
                }
                last = Some(smp);
                push_point(&mut blocks, &mut state, smp, pc);
            }
        }
        Formulation::None => {}
    }
    (blocks, state)
}

fn sample<T: Real>(model: &Model<T>, pc: &PointContact<T>) -> PointSample<T> {
    let [a, b] = pc.elements;
    let (ea, eb) = (&model.mesh.elements[a], &model.mesh.elements[b]);
    PointSample {
        kind: pc.kind,
        beams: [ea.beam, eb.beam],
        elements: pc.elements,
        s: [ea.arc_length(pc.xi), eb.arc_length(pc.eta)],
        gap: pc.gap,
        force: pc.force,
        angle: pc.angle,
    }
}

fn push_point<T: Real>(blocks: &mut Vec<Block<T>>, state: &mut ContactState<T>, smp: PointSample<T>, pc: PointContact<T>) {
    state.points.push(smp);
    if let Some(sys) = pc.system {
        blocks.push(Block { elements: pc.elements.to_vec(), system: sys });
    }
}

/// End caps: endpoint-to-line for every beam end near the other beam, and
/// endpoint-to-endpoint where neither end projects into the interior of the other
/// beam's end element.
fn endpoint_contacts<T: Real>(
    model: &Model<T>,
    dofs: &[ElementDofs<T>],
    pairs: &[(usize, usize)],
    blocks: &mut Vec<Block<T>>,
    state: &mut ContactState<T>,
) {
    let mesh = &model.mesh;
    let cfg = &model.contact;
    let settings = &cfg.line.projection;
    let mut near: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in pairs {
        near.entry(a).or_default().push(b);
        near.entry(b).or_default().push(a);
    }
    let phys_ends = |e: usize| -> [Option<T>; 2] {
        [mesh.is_first(e).then(|| -T::one()), mesh.is_last(e).then(T::one)]
    };
    let beam_ends = |beam: usize| -> [(usize, T); 2] {
        let els = &mesh.beams[beam].elements;
        [(els[0], -T::one()), (*els.last().unwrap(), T::one())]
    };

    let mut beam_pairs: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(a, b)| (mesh.elements[a].beam, mesh.elements[b].beam))
        .filter(|(a, b)| a != b)
        .collect();
    beam_pairs.sort_unstable();
    beam_pairs.dedup();

    for &(ba, bb) in &beam_pairs {
        let radii = model.radii(ba, bb);
        // Endpoint of one beam against the line of the other.
        for (own, other) in [(ba, bb), (bb, ba)] {
            for (e_end, xi_end) in beam_ends(own) {
                let Some(list) = near.get(&e_end) else { continue };
                let targets: Vec<LineTarget<T>> = list
                    .iter()
                    .filter(|&&m| mesh.elements[m].beam == other)
                    .map(|&m| LineTarget { element: m, dofs: &dofs[m], physical_ends: phys_ends(m) })
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                if let Some(pc) = endpoint_to_line(e_end, &dofs[e_end], xi_end, &targets, radii, &cfg.point_law, settings) {
                    let smp = sample(model, &pc);
                    push_point(blocks, state, smp, pc);
                }
            }
        }
        // Endpoint to endpoint.
        for (ea, xa) in beam_ends(ba) {
            for (eb, xb) in beam_ends(bb) {
                if !near.get(&ea).is_some_and(|l| l.contains(&eb)) {
                    continue;
                }
                let pa = dofs[ea].position(xa);
                let pb = dofs[eb].position(xb);
                let interior = |p: &crate::linalg::Vec3<T>, e: usize| {
                    let t = LineTarget { element: e, dofs: &dofs[e], physical_ends: phys_ends(e) };
                    project_point(p, &dofs[e], settings).map(|r| t.is_interior(r.coordinate)).unwrap_or(false)
                };
                if interior(&pa, eb) || interior(&pb, ea) {
                    continue;
                }
                let pc = endpoint_to_endpoint([ea, eb], &dofs[ea], xa, &dofs[eb], xb, radii, &cfg.point_law);
                let smp = sample(model, &pc);
                push_point(blocks, state, smp, pc);
            }
        }
    }
}

/// Dense copy of an assembled tangent (testing helper).
pub fn dense_tangent<T: Real>(a: &Assembly<T>) -> DMatrix<T> {
    a.stiffness.to_csr().to_dense()
}
