//! Mesh, degree-of-freedom layout, loads and contact configuration.
//!
//! Each node carries six unknowns: position (0..3) and arc-length tangent (3..6).

use crate::beam_element::{ElementIntegrator, Material};
use crate::contact::broad_phase::PairRules;
use crate::contact::{LineSettings, PenaltyLaw};
use crate::error::ConfigError;
use crate::geometry::ElementDofs;
use crate::linalg::Vec3;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

pub const DOFS_PER_NODE: usize = 6;

#[derive(Debug, Clone)]
pub struct Beam<T> {
    pub material: Material<T>,
    pub nodes: Vec<usize>,
    pub elements: Vec<usize>,
    pub length: T,
}

#[derive(Debug, Clone)]
pub struct Element<T> {
    pub beam: usize,
    /// Position within the beam.
    pub index: usize,
    pub nodes: [usize; 2],
    pub length: T,
    /// Reference arc length of the first node.
    pub s_start: T,
}

impl<T: Real> Element<T> {
    pub fn dof_indices(&self) -> [usize; 12] {
        let [a, b] = self.nodes;
        std::array::from_fn(|i| if i < 6 { DOFS_PER_NODE * a + i } else { DOFS_PER_NODE * b + i - 6 })
    }

    /// Reference arc length at element coordinate `xi`.
    pub fn arc_length(&self, xi: T) -> T {
        self.s_start + (xi + T::one()) * T::lit(0.5) * self.length
    }
}

/// Reference to a node of a beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Start,
    End,
    Index(usize),
}

#[derive(Debug, Clone, Default)]
pub struct Mesh<T> {
    pub beams: Vec<Beam<T>>,
    pub elements: Vec<Element<T>>,
    /// Reference configuration, six values per node.
    pub reference: Vec<T>,
}

impl<T: Real> Mesh<T> {
    pub fn new() -> Self {
        Self { beams: Vec::new(), elements: Vec::new(), reference: Vec::new() }
    }

    pub fn n_nodes(&self) -> usize {
        self.reference.len() / DOFS_PER_NODE
    }

    pub fn n_dofs(&self) -> usize {
        self.reference.len()
    }

    /// Add a straight beam; `fractions` are relative element lengths (normalized internally).
    pub fn add_straight_beam(
        &mut self,
        start: Vec3<T>,
        end: Vec3<T>,
        fractions: &[T],
        material: Material<T>,
    ) -> Result<usize, ConfigError> {
        let beam_id = self.beams.len();
        if fractions.is_empty() {
            return Err(ConfigError::new(format!("beams[{beam_id}].elements"), "at least one element required"));
        }
        if fractions.iter().any(|f| !(*f > T::zero())) {
            return Err(ConfigError::new(format!("beams[{beam_id}].element_lengths"), "element lengths must be positive"));
        }
        let length = (end - start).norm();
        if !(length > T::zero()) {
            return Err(ConfigError::new(format!("beams[{beam_id}]"), "start and end coincide"));
        }
        let dir = (end - start) * (T::one() / length);
        let total: T = fractions.iter().copied().sum();
        let first_node = self.n_nodes();
        let mut s = T::zero();
        let mut nodes = vec![first_node];
        self.push_node(start, dir);
        let mut elements = Vec::new();
        for (i, f) in fractions.iter().enumerate() {
            let le = length * *f / total;
            let s_next = if i + 1 == fractions.len() { length } else { s + le };
            let node = self.n_nodes();
            self.push_node(start + dir * s_next, dir);
            elements.push(self.elements.len());
            self.elements.push(Element { beam: beam_id, index: i, nodes: [node - 1, node], length: s_next - s, s_start: s });
            nodes.push(node);
            s = s_next;
        }
        self.beams.push(Beam { material, nodes, elements, length });
        Ok(beam_id)
    }

    fn push_node(&mut self, x: Vec3<T>, t: Vec3<T>) {
        self.reference.extend_from_slice(&x.0);
        self.reference.extend_from_slice(&t.0);
    }

    pub fn node(&self, beam: usize, which: NodeRef) -> Result<usize, ConfigError> {
        let b = self.beams.get(beam).ok_or_else(|| ConfigError::new("beam", format!("beam {beam} does not exist")))?;
        match which {
            NodeRef::Start => Ok(b.nodes[0]),
            NodeRef::End => Ok(*b.nodes.last().unwrap()),
            NodeRef::Index(i) => b
                .nodes
                .get(i)
                .copied()
                .ok_or_else(|| ConfigError::new("node", format!("beam {beam} has no node {i}"))),
        }
    }

    pub fn element_dofs(&self, e: usize, state: &[T]) -> ElementDofs<T> {
        let el = &self.elements[e];
        let idx = el.dof_indices();
        let v: [T; 12] = std::array::from_fn(|i| state[idx[i]]);
        ElementDofs::from_slice(&v, el.length)
    }

    pub fn is_first(&self, e: usize) -> bool {
        self.elements[e].index == 0
    }

    pub fn is_last(&self, e: usize) -> bool {
        let el = &self.elements[e];
        el.index + 1 == self.beams[el.beam].elements.len()
    }

    /// Element of `beam` containing reference arc length `s` and the local coordinate.
    pub fn locate(&self, beam: usize, s: T) -> (usize, T) {
        let b = &self.beams[beam];
        let mut e = *b.elements.last().unwrap();
        for &k in &b.elements {
            let el = &self.elements[k];
            if s <= el.s_start + el.length {
                e = k;
                break;
            }
        }
        let el = &self.elements[e];
        let xi = T::lit(2.0) * (s - el.s_start) / el.length - T::one();
        (e, xi)
    }

    /// Centerline position of `beam` at reference arc length `s`.
    pub fn position(&self, beam: usize, s: T, state: &[T]) -> Vec3<T> {
        let (e, xi) = self.locate(beam, s);
        self.element_dofs(e, state).position(xi)
    }

    pub fn node_position(&self, node: usize, state: &[T]) -> Vec3<T> {
        Vec3::from_slice(&state[DOFS_PER_NODE * node..DOFS_PER_NODE * node + 3])
    }
}

/// Which contact contributions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    #[default]
    None,
    /// Bilateral closest-point contact.
    Point,
    /// Gauss-point-to-segment line contact.
    Line,
    /// Line contact plus end-cap contacts.
    LineWithEndpoints,
}

#[derive(Debug, Clone)]
pub struct ContactConfig<T> {
    pub formulation: Formulation,
    /// Law for line contact (force per length).
    pub law: PenaltyLaw<T>,
    /// Law for point and end-cap contacts (force).
    pub point_law: PenaltyLaw<T>,
    pub line: LineSettings<T>,
    /// Beam pairs allowed to interact; `None` means all.
    pub beam_pairs: Option<Vec<(usize, usize)>>,
    pub rules: PairRules,
    /// Broad-phase distance; default `2 (R1 + R2) + g_bar` with the largest radii.
    pub search_radius: Option<T>,
    /// Multiplier on the contact-angle bound used for warnings.
    pub angle_safety: T,
}

impl<T: Real> ContactConfig<T> {
    pub fn none() -> Self {
        Self {
            formulation: Formulation::None,
            law: PenaltyLaw::Linear { epsilon: T::one() },
            point_law: PenaltyLaw::Linear { epsilon: T::one() },
            line: LineSettings::default(),
            beam_pairs: None,
            rules: PairRules::default(),
            search_radius: None,
            angle_safety: T::lit(2.0),
        }
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        match &self.beam_pairs {
            None => true,
            Some(list) => list.iter().any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b)),
        }
    }
}

/// Constant distributed load on a beam (per unit reference length).
#[derive(Debug, Clone, Copy)]
pub struct LineLoad<T> {
    pub beam: usize,
    pub force: Vec3<T>,
    pub moment: Vec3<T>,
}

/// Point load at a node.
#[derive(Debug, Clone, Copy)]
pub struct NodalLoad<T> {
    pub node: usize,
    pub force: Vec3<T>,
    pub moment: Vec3<T>,
}

#[derive(Debug, Clone, Default)]
pub struct Loads<T> {
    pub line: Vec<LineLoad<T>>,
    pub nodal: Vec<NodalLoad<T>>,
}

/// Everything needed to assemble the global system.
#[derive(Debug, Clone)]
pub struct Model<T> {
    pub mesh: Mesh<T>,
    pub contact: ContactConfig<T>,
    pub loads: Loads<T>,
    pub integrator: ElementIntegrator<T>,
}

impl<T: Real> Model<T> {
    pub fn new(mesh: Mesh<T>) -> Self {
        Self { mesh, contact: ContactConfig::none(), loads: Loads::default(), integrator: ElementIntegrator::default() }
    }

    pub fn search_radius(&self) -> T {
        self.contact.search_radius.unwrap_or_else(|| {
            let r = self.mesh.beams.iter().fold(T::zero(), |m, b| m.max(b.material.radius));
            T::lit(4.0) * r + self.contact.law.cutoff().max(self.contact.point_law.cutoff())
        })
    }

    /// Sum of radii of two beams.
    pub fn radii(&self, a: usize, b: usize) -> T {
        self.mesh.beams[a].material.radius + self.mesh.beams[b].material.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_layout_and_lookup() {
        let mut m = Mesh::<f64>::new();
        let mat = Material::new(1.0, 0.1);
        m.add_straight_beam(Vec3::zero(), Vec3::new(2.0, 0.0, 0.0), &[1.0, 2.0, 1.0], mat).unwrap();
        m.add_straight_beam(Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 1.0), &[1.0], mat).unwrap();
        assert_eq!(m.n_nodes(), 6);
        assert_eq!(m.elements[1].length, 1.0);
        assert_eq!(m.elements[3].dof_indices()[0], 24);
        let (e, xi) = m.locate(0, 1.0);
        assert_eq!(e, 1);
        assert!((xi - 0.0).abs() < 1e-15);
        let p = m.position(0, 1.7, &m.reference);
        assert!((p[0] - 1.7).abs() < 1e-14);
        assert!(m.is_last(2) && m.is_first(3) && m.is_last(3));
        assert!(m.add_straight_beam(Vec3::zero(), Vec3::unit(0), &[], mat).is_err());
    }
}
