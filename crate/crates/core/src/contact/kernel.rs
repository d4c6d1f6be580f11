//! Residual and consistent tangent of one penalty contact point between two
//! centerline points, with arbitrary dependence of the contact coordinates
//! on the local degrees of freedom.

use super::PenaltyLaw;
use crate::geometry::{ElementDofs, Shape};
use crate::linalg::{DMatrix, Vec3};
use crate::scalar::Real;

/// Local degree-of-freedom layout: `blocks` consecutive 12-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSystem<T> {
    pub residual: Vec<T>,
    pub stiffness: DMatrix<T>,
}

impl<T: Real> LocalSystem<T> {
    pub fn new(blocks: usize) -> Self {
        Self { residual: vec![T::zero(); 12 * blocks], stiffness: DMatrix::zeros(12 * blocks, 12 * blocks) }
    }

    pub fn dim(&self) -> usize {
        self.residual.len()
    }
}

/// One side of a contact point: element data, coordinate and local block slot.
#[derive(Debug, Clone, Copy)]
pub struct Side<'a, T> {
    pub dofs: &'a ElementDofs<T>,
    pub coordinate: T,
    pub slot: usize,
}

/// Evaluated point quantities on one side.
pub struct SideEval<T> {
    pub slot: usize,
    pub shape: Shape<T>,
    pub r: Vec3<T>,
    pub r_c: Vec3<T>,
    pub r_cc: Vec3<T>,
}

impl<'a, T: Real> Side<'a, T> {
    pub fn eval(&self) -> SideEval<T> {
        let shape = self.dofs.shape(self.coordinate);
        SideEval {
            slot: self.slot,
            r: self.dofs.combine(&shape.n),
            r_c: self.dofs.combine(&shape.n_xi),
            r_cc: self.dofs.combine(&shape.n_xixi),
            shape,
        }
    }
}

/// Add `s * N^T v` into `row` at the block of `slot`.
pub fn add_nt<T: Real>(row: &mut [T], c: &[T; 4], slot: usize, v: &Vec3<T>, s: T) {
    for k in 0..4 {
        for i in 0..3 {
            row[12 * slot + 3 * k + i] += s * c[k] * v[i];
        }
    }
}

/// Partial derivatives of the two orthogonality conditions
/// `p1 = r1_xi . (r1 - r2)` and `p2 = r2_eta . (r1 - r2)`.
pub struct Orthogonality<T> {
    pub p: [T; 2],
    /// `[[dp1/dxi, dp1/deta], [dp2/dxi, dp2/deta]]`.
    pub jacobian: [[T; 2]; 2],
    /// Derivatives with respect to local dofs at fixed coordinates.
    pub dp1: Vec<T>,
    pub dp2: Vec<T>,
}

pub fn orthogonality<T: Real>(s1: &SideEval<T>, s2: &SideEval<T>, dim: usize) -> Orthogonality<T> {
    let diff = s1.r - s2.r;
    let mut dp1 = vec![T::zero(); dim];
    let mut dp2 = vec![T::zero(); dim];
    add_nt(&mut dp1, &s1.shape.n_xi, s1.slot, &diff, T::one());
    add_nt(&mut dp1, &s1.shape.n, s1.slot, &s1.r_c, T::one());
    add_nt(&mut dp1, &s2.shape.n, s2.slot, &s1.r_c, -T::one());
    add_nt(&mut dp2, &s2.shape.n_xi, s2.slot, &diff, T::one());
    add_nt(&mut dp2, &s1.shape.n, s1.slot, &s2.r_c, T::one());
    add_nt(&mut dp2, &s2.shape.n, s2.slot, &s2.r_c, -T::one());
    Orthogonality {
        p: [s1.r_c.dot(&diff), s2.r_c.dot(&diff)],
        jacobian: [
            [s1.r_c.norm_squared() + diff.dot(&s1.r_cc), -s1.r_c.dot(&s2.r_c)],
            [s1.r_c.dot(&s2.r_c), -s2.r_c.norm_squared() + diff.dot(&s2.r_cc)],
        ],
        dp1,
        dp2,
    }
}

/// How the contact coordinates follow the degrees of freedom.
pub enum Sensitivity<T> {
    /// Both coordinates solve the two orthogonality conditions.
    Bilateral,
    /// `xi` is given (with its derivative row), `eta` solves `p2 = 0`.
    Unilateral { dxi: Vec<T> },
    /// Both coordinates fixed.
    Fixed,
}

/// Derivative rows of `(xi, eta)` for the given sensitivity model.
pub fn coordinate_rows<T: Real>(s1: &SideEval<T>, s2: &SideEval<T>, dim: usize, sens: Sensitivity<T>) -> (Vec<T>, Vec<T>) {
    match sens {
        Sensitivity::Fixed => (vec![T::zero(); dim], vec![T::zero(); dim]),
        Sensitivity::Unilateral { dxi } => {
            let o = orthogonality(s1, s2, dim);
            let inv = T::one() / o.jacobian[1][1];
            let deta = (0..dim).map(|q| -(o.jacobian[1][0] * dxi[q] + o.dp2[q]) * inv).collect();
            (dxi, deta)
        }
        Sensitivity::Bilateral => {
            let o = orthogonality(s1, s2, dim);
            let a = o.jacobian;
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let mut dxi = vec![T::zero(); dim];
            let mut deta = vec![T::zero(); dim];
            for q in 0..dim {
                let (b1, b2) = (-o.dp1[q], -o.dp2[q]);
                dxi[q] = (b1 * a[1][1] - a[0][1] * b2) / det;
                deta[q] = (a[0][0] * b2 - a[1][0] * b1) / det;
            }
            (dxi, deta)
        }
    }
}

/// Kinematic state of one contact point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState<T> {
    pub gap: T,
    pub force: T,
    pub normal: Vec3<T>,
    pub distance: T,
}

/// Gap, normal and force at a pair of centerline points.
pub fn point_state<T: Real>(r1: &Vec3<T>, r2: &Vec3<T>, radii: T, law: &PenaltyLaw<T>) -> PointState<T> {
    let diff = *r1 - *r2;
    let distance = diff.norm();
    let gap = distance - radii;
    PointState { gap, force: law.force(gap), normal: diff * (T::one() / distance), distance }
}

/// Add weighted contact residual `-W f N1^T n`, `+W f N2^T n` and its full linearization.
///
/// `weight` is the integration factor `W` (1 for point contacts) and `dweight` its
/// derivative row; `dxi`/`deta` are the coordinate derivative rows.
#[allow(clippy::too_many_arguments)]
pub fn add_contact_point<T: Real>(
    out: &mut LocalSystem<T>,
    s1: &SideEval<T>,
    s2: &SideEval<T>,
    radii: T,
    law: &PenaltyLaw<T>,
    weight: T,
    dweight: Option<&[T]>,
    dxi: &[T],
    deta: &[T],
) -> PointState<T> {
    let dim = out.dim();
    let state = point_state(&s1.r, &s2.r, radii, law);
    let (f, df) = law.evaluate(state.gap);
    if f == T::zero() && df == T::zero() {
        return state;
    }
    let n = state.normal;
    let d = state.distance;
    // dDelta = N1 - N2 + r1_xi dxi - r2_eta deta, stored as 3 rows.
    let mut ddelta = DMatrix::zeros(3, dim);
    for i in 0..3 {
        let row = ddelta.row_mut(i);
        for k in 0..4 {
            row[12 * s1.slot + 3 * k + i] += s1.shape.n[k];
            row[12 * s2.slot + 3 * k + i] -= s2.shape.n[k];
        }
        for q in 0..dim {
            row[q] += s1.r_c[i] * dxi[q] - s2.r_c[i] * deta[q];
        }
    }
    let dg: Vec<T> = (0..dim).map(|q| (0..3).map(|i| n[i] * ddelta[(i, q)]).sum()).collect();
    // dn = (I - n n^T) dDelta / d
    let mut dn = DMatrix::zeros(3, dim);
    for i in 0..3 {
        for q in 0..dim {
            dn[(i, q)] = (ddelta[(i, q)] - n[i] * dg[q]) / d;
        }
    }
    let mut n1 = vec![T::zero(); dim];
    let mut n2 = vec![T::zero(); dim];
    add_nt(&mut n1, &s1.shape.n, s1.slot, &n, T::one());
    add_nt(&mut n2, &s2.shape.n, s2.slot, &n, T::one());
    for q in 0..dim {
        out.residual[q] += weight * f * (n2[q] - n1[q]);
    }
    let mut n1_xi = vec![T::zero(); dim];
    let mut n2_eta = vec![T::zero(); dim];
    add_nt(&mut n1_xi, &s1.shape.n_xi, s1.slot, &n, T::one());
    add_nt(&mut n2_eta, &s2.shape.n_xi, s2.slot, &n, T::one());
    let k = &mut out.stiffness;
    let nn: Vec<T> = (0..dim).map(|q| n2[q] - n1[q]).collect();
    if let Some(dw) = dweight {
        k.add_outer(f, &nn, dw);
    }
    k.add_outer(weight * df, &nn, &dg);
    k.add_outer(-weight * f, &n1_xi, dxi);
    k.add_outer(weight * f, &n2_eta, deta);
    // N2^T dn - N1^T dn
    for (side, sign) in [(s1, -T::one()), (s2, T::one())] {
        for kk in 0..4 {
            let c = sign * weight * f * side.shape.n[kk];
            if c == T::zero() {
                continue;
            }
            for i in 0..3 {
                let row = 12 * side.slot + 3 * kk + i;
                for q in 0..dim {
                    k[(row, q)] += c * dn[(i, q)];
                }
            }
        }
    }
    state
}
