//! Prescribed degrees of freedom driven by a staged load-step schedule.
//!
//! Prescribed values are recomputed from the reference configuration for every
//! (possibly fractional) step parameter, so repeated evaluation is exact.

use crate::error::ConfigError;
use crate::linalg::{Mat3, Vec3};
use crate::model::{Mesh, DOFS_PER_NODE};
use crate::scalar::Real;

/// Motion applied linearly over the steps of a stage.
#[derive(Debug, Clone, PartialEq)]
pub enum Action<T> {
    Translate { nodes: Vec<usize>, delta: Vec3<T> },
    /// Rotation by `angle` about the axis through `center` with direction `axis`.
    Rotate { nodes: Vec<usize>, center: Vec3<T>, axis: Vec3<T>, angle: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage<T> {
    pub steps: usize,
    pub actions: Vec<Action<T>>,
}

/// Constrained degrees of freedom and their prescribed motion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DirichletSchedule<T> {
    /// Global dof indices, sorted and unique.
    pub constrained: Vec<usize>,
    pub stages: Vec<Stage<T>>,
}

/// Rotation matrix about a unit axis.
pub fn rotation<T: Real>(axis: &Vec3<T>, angle: T) -> Mat3<T> {
    let a = axis.normalized();
    let (s, c) = angle.sin_cos();
    let k = Mat3([[T::zero(), -a[2], a[1]], [a[2], T::zero(), -a[0]], [-a[1], a[0], T::zero()]]);
    let mut kk = Mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            kk.0[i][j] = (0..3).map(|m| k.0[i][m] * k.0[m][j]).sum();
        }
    }
    Mat3::identity() + k.scale(s) + kk.scale(T::one() - c)
}

impl<T: Real> DirichletSchedule<T> {
    pub fn new() -> Self {
        Self { constrained: Vec::new(), stages: Vec::new() }
    }

    /// Constrain components (0..6) of a node.
    pub fn constrain(&mut self, node: usize, components: &[usize]) {
        for &c in components {
            self.constrained.push(DOFS_PER_NODE * node + c);
        }
        self.constrained.sort_unstable();
        self.constrained.dedup();
    }

    pub fn total_steps(&self) -> usize {
        self.stages.iter().map(|s| s.steps).sum()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained.binary_search(&dof).is_ok()
    }

    /// Every action must move only fully constrained position components.
    pub fn validate(&self, mesh: &Mesh<T>) -> Result<(), ConfigError> {
        for (si, stage) in self.stages.iter().enumerate() {
            for (ai, a) in stage.actions.iter().enumerate() {
                let (nodes, comps): (&Vec<usize>, Vec<usize>) = match a {
                    Action::Translate { nodes, delta } => {
                        (nodes, (0..3).filter(|&i| delta[i] != T::zero()).collect())
                    }
                    Action::Rotate { nodes, .. } => (nodes, Vec::new()),
                };
                for &n in nodes {
                    if n >= mesh.n_nodes() {
                        return Err(ConfigError::new(format!("schedule.stages[{si}].actions[{ai}]"), format!("node {n} does not exist")));
                    }
                    for &c in &comps {
                        if !self.is_constrained(DOFS_PER_NODE * n + c) {
                            return Err(ConfigError::new(
                                format!("schedule.stages[{si}].actions[{ai}]"),
                                format!("moves unconstrained component {c} of node {n}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Nodal position and tangent of every node after applying the schedule up to step `t`.
    fn node_data(&self, mesh: &Mesh<T>, t: T) -> Vec<(Vec3<T>, Vec3<T>)> {
        let r = &mesh.reference;
        let mut data: Vec<(Vec3<T>, Vec3<T>)> = (0..mesh.n_nodes())
            .map(|n| (Vec3::from_slice(&r[6 * n..6 * n + 3]), Vec3::from_slice(&r[6 * n + 3..6 * n + 6])))
            .collect();
        let mut start = T::zero();
        for stage in &self.stages {
            let steps = T::lit(stage.steps as f64);
            let f = ((t - start) / steps).max(T::zero()).min(T::one());
            start += steps;
            if f == T::zero() {
                continue;
            }
            for a in &stage.actions {
                match a {
                    Action::Translate { nodes, delta } => {
                        for &n in nodes {
                            data[n].0 += *delta * f;
                        }
                    }
                    Action::Rotate { nodes, center, axis, angle } => {
                        let q = rotation(axis, *angle * f);
                        for &n in nodes {
                            let (x, tg) = data[n];
                            data[n] = (*center + q.mul_vec(&(x - *center)), q.mul_vec(&tg));
                        }
                    }
                }
            }
        }
        data
    }

    /// Prescribed values of the constrained dofs at step parameter `t`, in `constrained` order.
    pub fn values(&self, mesh: &Mesh<T>, t: T) -> Vec<T> {
        let data = self.node_data(mesh, t);
        self.constrained
            .iter()
            .map(|&dof| {
                let (n, c) = (dof / DOFS_PER_NODE, dof % DOFS_PER_NODE);
                if c < 3 {
                    data[n].0[c]
                } else {
                    data[n].1[c - 3]
                }
            })
            .collect()
    }

    /// Write prescribed values into a state vector.
    pub fn apply(&self, mesh: &Mesh<T>, t: T, state: &mut [T]) {
        for (dof, v) in self.constrained.iter().zip(self.values(mesh, t)) {
            state[*dof] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam_element::Material;
    use approx::assert_relative_eq;

    #[test]
    fn circular_path_matches_closed_form() {
        let mut mesh = Mesh::<f64>::new();
        let r = 0.0095;
        mesh.add_straight_beam(Vec3::new(r, 0.0, 0.0), Vec3::new(r, 0.0, 5.0), &[1.0], Material::new(1e9, 0.01)).unwrap();
        let mut s = DirichletSchedule::new();
        s.constrain(1, &[0, 1, 2]);
        s.stages.push(Stage {
            steps: 8,
            actions: vec![Action::Rotate { nodes: vec![1], center: Vec3::zero(), axis: Vec3::unit(2), angle: 2.0 * std::f64::consts::PI }],
        });
        for k in 0..=8 {
            let v = s.values(&mesh, k as f64);
            let th = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            assert_relative_eq!(v[0] - r, -r * (1.0 - th.cos()), epsilon = 1e-15);
            assert_relative_eq!(v[1], r * th.sin(), epsilon = 1e-15);
            assert_relative_eq!(v[2], 5.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn stages_compose_in_order() {
        let mut mesh = Mesh::<f64>::new();
        mesh.add_straight_beam(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), &[1.0], Material::new(1.0, 0.1)).unwrap();
        let mut s = DirichletSchedule::new();
        s.constrain(1, &[0, 1, 2]);
        s.stages.push(Stage { steps: 2, actions: vec![Action::Translate { nodes: vec![1], delta: Vec3::new(0.0, 0.0, 0.5) }] });
        s.stages.push(Stage { steps: 4, actions: vec![Action::Translate { nodes: vec![1], delta: Vec3::new(1.0, 0.0, 0.0) }] });
        assert_eq!(s.total_steps(), 6);
        assert_eq!(s.values(&mesh, 1.0), vec![0.0, 0.0, 1.25]);
        assert_eq!(s.values(&mesh, 4.0), vec![0.5, 0.0, 1.5]);
        assert!(s.validate(&mesh).is_ok());
        s.stages[0].actions.push(Action::Translate { nodes: vec![0], delta: Vec3::unit(0) });
        assert!(s.validate(&mesh).is_err());
    }
}
