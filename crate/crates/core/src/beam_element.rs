//! Internal forces, tangent stiffness, mass and external loads of the
//! torsion-free Kirchhoff beam element.
//!
//! The axial part can be re-interpolated from the strains at xi = -1, 0, 1
//! with quadratic Lagrange polynomials, which removes membrane locking.

use crate::error::ElementError;
use crate::geometry::{add_nt_vec, ElementDofs, ShapeRow};
use crate::linalg::{DMatrix, Mat3, Vec3};
use crate::quadrature::GaussRule;
use crate::scalar::Real;

/// Linear elastic circular cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material<T> {
    pub youngs_modulus: T,
    pub radius: T,
    pub density: T,
}

impl<T: Real> Material<T> {
    pub fn new(youngs_modulus: T, radius: T) -> Self {
        Self { youngs_modulus, radius, density: T::one() }
    }

    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    pub fn inertia(&self) -> T {
        let r2 = self.radius * self.radius;
        T::PI() * r2 * r2 * T::lit(0.25)
    }

    pub fn axial_stiffness(&self) -> T {
        self.youngs_modulus * self.area()
    }

    pub fn bending_stiffness(&self) -> T {
        self.youngs_modulus * self.inertia()
    }
}

/// Element-level residual (12) and tangent (12x12).
#[derive(Debug, Clone, PartialEq)]
pub struct ElementVectors<T> {
    pub residual: Vec<T>,
    pub stiffness: DMatrix<T>,
}

impl<T: Real> ElementVectors<T> {
    pub fn zeros() -> Self {
        Self { residual: vec![T::zero(); 12], stiffness: DMatrix::zeros(12, 12) }
    }
}

/// Integration settings of the element kernels.
#[derive(Debug, Clone)]
pub struct ElementIntegrator<T> {
    rule: GaussRule<T>,
    /// Re-interpolate the axial strain (on by default).
    pub mcs: bool,
}

impl<T: Real> Default for ElementIntegrator<T> {
    fn default() -> Self {
        Self::new(4, true)
    }
}

/// Collocation points of the re-interpolated axial strain.
const MCS_POINTS: [f64; 3] = [-1.0, 0.0, 1.0];

/// `int L_i L_j dxi` over [-1, 1] for quadratic Lagrange polynomials on (-1, 0, 1).
const MCS_GRAM: [[f64; 3]; 3] = [
    [4.0 / 15.0, 2.0 / 15.0, -1.0 / 15.0],
    [2.0 / 15.0, 16.0 / 15.0, 2.0 / 15.0],
    [-1.0 / 15.0, 2.0 / 15.0, 4.0 / 15.0],
];

struct Deriv<T> {
    a: Vec3<T>,
    b: Vec3<T>,
    c1: ShapeRow<T>,
    c2: ShapeRow<T>,
}

fn arc_derivatives<T: Real>(e: &ElementDofs<T>, xi: T) -> Result<Deriv<T>, ElementError> {
    let s = e.shape(xi);
    let j = e.jacobian();
    let c1 = s.n_xi.map(|c| c / j);
    let c2 = s.n_xixi.map(|c| c / (j * j));
    let a = e.combine(&c1);
    let b = e.combine(&c2);
    if !(a.norm() > T::lit(2e-12)) {
        return Err(ElementError::DegenerateTangent { xi: xi.to_f64_lossy(), norm: a.norm().to_f64_lossy() });
    }
    Ok(Deriv { a, b, c1, c2 })
}

/// `K[3k+i, 3m+j] += s * ca_k * cb_m * H_ij`.
fn add_shape_block<T: Real>(k: &mut DMatrix<T>, ca: &ShapeRow<T>, cb: &ShapeRow<T>, h: &Mat3<T>, s: T) {
    for p in 0..4 {
        for q in 0..4 {
            let f = s * ca[p] * cb[q];
            if f != T::zero() {
                k.add_block3(p, q, h, f);
            }
        }
    }
}

/// Gradients of the bending energy density with respect to `r'` (t2) and `r''` (t3).
pub fn bending_gradients<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let aa = a.norm_squared();
    let ab = a.dot(b);
    let bb = b.norm_squared();
    let a4 = aa * aa;
    let a6 = a4 * aa;
    let t2 = *a * (T::lit(2.0) * ab * ab / a6) - (*a * bb + *b * ab) * (T::one() / a4);
    let t3 = *b * (T::one() / aa) - *a * (ab / a4);
    (t2, t3)
}

/// Hessian blocks of the bending energy density: (d t2/d r', d t2/d r'', d t3/d r'').
pub fn bending_hessians<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> (Mat3<T>, Mat3<T>, Mat3<T>) {
    let aa = a.norm_squared();
    let ab = a.dot(b);
    let bb = b.norm_squared();
    let a4 = aa * aa;
    let a6 = a4 * aa;
    let a8 = a4 * a4;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let h_aa = Mat3::diagonal(two * ab * ab / a6 - bb / a4)
        + a.outer(a).scale(-T::lit(12.0) * ab * ab / a8 + four * bb / a6)
        + (a.outer(b) + b.outer(a)).scale(four * ab / a6)
        - b.outer(b).scale(T::one() / a4);
    let h_ab = Mat3::diagonal(-ab / a4) + a.outer(a).scale(four * ab / a6)
        - a.outer(b).scale(two / a4)
        - b.outer(a).scale(T::one() / a4);
    let h_bb = Mat3::diagonal(T::one() / aa) - a.outer(a).scale(T::one() / a4);
    (h_aa, h_ab, h_bb)
}

impl<T: Real> ElementIntegrator<T> {
    pub fn new(gauss_points: usize, mcs: bool) -> Self {
        Self { rule: GaussRule::new(gauss_points), mcs }
    }

    pub fn gauss_points(&self) -> usize {
        self.rule.len()
    }

    /// Internal force vector and consistent tangent.
    pub fn internal(&self, e: &ElementDofs<T>, mat: &Material<T>) -> Result<ElementVectors<T>, ElementError> {
        e.validate()?;
        let ea = mat.axial_stiffness();
        let ei = mat.bending_stiffness();
        let j = e.jacobian();
        let mut out = ElementVectors::zeros();
        for (xi, w) in self.rule.iter() {
            let d = arc_derivatives(e, xi)?;
            let wj = w * j;
            let (t2, t3) = bending_gradients(&d.a, &d.b);
            add_nt_vec(&mut out.residual, &d.c1, &t2, wj * ei);
            add_nt_vec(&mut out.residual, &d.c2, &t3, wj * ei);
            let (h_aa, h_ab, h_bb) = bending_hessians(&d.a, &d.b);
            add_shape_block(&mut out.stiffness, &d.c1, &d.c1, &h_aa, wj * ei);
            add_shape_block(&mut out.stiffness, &d.c1, &d.c2, &h_ab, wj * ei);
            add_shape_block(&mut out.stiffness, &d.c2, &d.c1, &h_ab.transpose(), wj * ei);
            add_shape_block(&mut out.stiffness, &d.c2, &d.c2, &h_bb, wj * ei);
            if !self.mcs {
                let an = d.a.norm();
                let t1 = d.a * ((an - T::one()) / an);
                add_nt_vec(&mut out.residual, &d.c1, &t1, wj * ea);
                let dt1 = Mat3::diagonal((an - T::one()) / an) + d.a.outer(&d.a).scale(T::one() / (an * an * an));
                add_shape_block(&mut out.stiffness, &d.c1, &d.c1, &dt1, wj * ea);
            }
        }
        if self.mcs {
            self.add_reinterpolated_axial(e, ea, &mut out)?;
        }
        Ok(out)
    }

    fn add_reinterpolated_axial(&self, e: &ElementDofs<T>, ea: T, out: &mut ElementVectors<T>) -> Result<(), ElementError> {
        let j = e.jacobian();
        let mut strain = [T::zero(); 3];
        let mut grad = [[T::zero(); 12]; 3];
        let mut derivs = Vec::with_capacity(3);
        for (i, &xi) in MCS_POINTS.iter().enumerate() {
            let d = arc_derivatives(e, T::lit(xi))?;
            let an = d.a.norm();
            strain[i] = an - T::one();
            add_nt_vec(&mut grad[i], &d.c1, &(d.a * (T::one() / an)), T::one());
            derivs.push(d);
        }
        for i in 0..3 {
            let m_row: [T; 3] = std::array::from_fn(|k| T::lit(MCS_GRAM[i][k]) * j * ea);
            let weighted_strain: T = (0..3).map(|k| m_row[k] * strain[k]).sum();
            for p in 0..12 {
                out.residual[p] += weighted_strain * grad[i][p];
            }
            let d = &derivs[i];
            let an = d.a.norm();
            let proj = (Mat3::identity() - d.a.outer(&d.a).scale(T::one() / (an * an))).scale(T::one() / an);
            add_shape_block(&mut out.stiffness, &d.c1, &d.c1, &proj, weighted_strain);
            for k in 0..3 {
                out.stiffness.add_outer(m_row[k], &grad[i], &grad[k]);
            }
        }
        Ok(())
    }

    /// Stored elastic energy.
    pub fn energy(&self, e: &ElementDofs<T>, mat: &Material<T>) -> Result<T, ElementError> {
        e.validate()?;
        let ea = mat.axial_stiffness();
        let ei = mat.bending_stiffness();
        let j = e.jacobian();
        let half = T::lit(0.5);
        let mut energy = T::zero();
        for (xi, w) in self.rule.iter() {
            let d = arc_derivatives(e, xi)?;
            let aa = d.a.norm_squared();
            let kappa2 = d.a.cross(&d.b).norm_squared() / (aa * aa);
            energy += w * j * half * ei * kappa2;
            if !self.mcs {
                let eps = aa.sqrt() - T::one();
                energy += w * j * half * ea * eps * eps;
            }
        }
        if self.mcs {
            let mut strain = [T::zero(); 3];
            for (i, &xi) in MCS_POINTS.iter().enumerate() {
                strain[i] = arc_derivatives(e, T::lit(xi))?.a.norm() - T::one();
            }
            for i in 0..3 {
                for k in 0..3 {
                    energy += half * ea * j * T::lit(MCS_GRAM[i][k]) * strain[i] * strain[k];
                }
            }
        }
        Ok(energy)
    }

    /// Consistent mass matrix `rho A int N^T N`.
    pub fn mass(&self, e: &ElementDofs<T>, mat: &Material<T>) -> DMatrix<T> {
        let rule = GaussRule::<T>::new(self.rule.len().max(4));
        let j = e.jacobian();
        let rho_a = mat.density * mat.area();
        let mut m = DMatrix::zeros(12, 12);
        for (xi, w) in rule.iter() {
            let c = e.shape(xi).n;
            add_shape_block(&mut m, &c, &c, &Mat3::identity(), w * j * rho_a);
        }
        m
    }

    /// Contribution `-F_ext` of a constant distributed force and moment
    /// (per unit reference length) together with its configuration-dependent tangent.
    pub fn distributed_load(
        &self,
        e: &ElementDofs<T>,
        force: &Vec3<T>,
        moment: &Vec3<T>,
    ) -> Result<ElementVectors<T>, ElementError> {
        let j = e.jacobian();
        let mut out = ElementVectors::zeros();
        let has_moment = moment.norm_squared() > T::zero();
        for (xi, w) in self.rule.iter() {
            let c = e.shape(xi).n;
            add_nt_vec(&mut out.residual, &c, force, -w * j);
            if has_moment {
                let d = arc_derivatives(e, xi)?;
                add_moment(&mut out, &d.c1, &d.a, moment, -w * j)?;
            }
        }
        Ok(out)
    }

    /// Contribution `-F_ext` of a point force and moment at coordinate `xi`.
    pub fn point_load(&self, e: &ElementDofs<T>, xi: T, force: &Vec3<T>, moment: &Vec3<T>) -> Result<ElementVectors<T>, ElementError> {
        let mut out = ElementVectors::zeros();
        add_nt_vec(&mut out.residual, &e.shape(xi).n, force, -T::one());
        if moment.norm_squared() > T::zero() {
            let d = arc_derivatives(e, xi)?;
            add_moment(&mut out, &d.c1, &d.a, moment, -T::one())?;
        }
        Ok(out)
    }
}

/// Adds `s N'^T (m x r'/|r'|^2)` and its tangent.
fn add_moment<T: Real>(out: &mut ElementVectors<T>, c1: &ShapeRow<T>, a: &Vec3<T>, m: &Vec3<T>, s: T) -> Result<(), ElementError> {
    let aa = a.norm_squared();
    let ratio = a.dot(m).abs() / (aa.sqrt() * m.norm());
    if ratio > T::lit(1e-8) {
        return Err(ElementError::NonPerpendicularMoment { ratio: ratio.to_f64_lossy() });
    }
    let t4 = *a * (T::one() / aa);
    add_nt_vec(&mut out.residual, c1, &m.cross(&t4), s);
    let dt4 = Mat3::diagonal(T::one() / aa) - a.outer(a).scale(T::lit(2.0) / (aa * aa));
    let skew = Mat3([[T::zero(), -m[2], m[1]], [m[2], T::zero(), -m[0]], [-m[1], m[0], T::zero()]]);
    let mut prod = Mat3::zero();
    for i in 0..3 {
        for j in 0..3 {
            prod.0[i][j] = (0..3).map(|k| skew.0[i][k] * dt4.0[k][j]).sum();
        }
    }
    add_shape_block(&mut out.stiffness, c1, c1, &prod, s);
    Ok(())
}
