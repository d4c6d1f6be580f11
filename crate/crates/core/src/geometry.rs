//! Hermite centerline interpolation of a two-noded beam element.
//!
//! Element coordinates run over `xi in [-1, 1]`; nodal data are positions and
//! arc-length tangents, so the parameter map has Jacobian `length / 2`.

use crate::error::ElementError;
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Values and xi-derivatives of the four cubic Hermite polynomials,
/// ordered as (position 1, tangent 1, position 2, tangent 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBasis<T> {
    pub value: [T; 4],
    pub d1: [T; 4],
    pub d2: [T; 4],
}

/// Hermite polynomials on [-1, 1] (tangent polynomials not yet scaled by the Jacobian).
pub fn hermite_basis<T: Real>(xi: T) -> HermiteBasis<T> {
    let q = T::lit(0.25);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let half = T::lit(0.5);
    let (m, p) = (one - xi, one + xi);
    HermiteBasis {
        value: [q * (two + xi) * m * m, q * p * m * m, q * (two - xi) * p * p, -q * m * p * p],
        d1: [
            -T::lit(0.75) * m * p,
            q * m * (-one - three * xi),
            T::lit(0.75) * m * p,
            -q * p * (one - three * xi),
        ],
        d2: [T::lit(1.5) * xi, half * (three * xi - one), -T::lit(1.5) * xi, half * (one + three * xi)],
    }
}

/// Shape-function coefficients of the 3x12 operator `N = [c0 I, c1 I, c2 I, c3 I]`.
pub type ShapeRow<T> = [T; 4];

/// Shape rows for value, first and second xi-derivative at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape<T> {
    pub n: ShapeRow<T>,
    pub n_xi: ShapeRow<T>,
    pub n_xixi: ShapeRow<T>,
}

/// Nodal data of one element: `[d1, t1, d2, t2]` plus reference length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementDofs<T> {
    pub nodal: [Vec3<T>; 4],
    pub length: T,
}

/// Centerline position and xi-derivatives at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<T> {
    pub xi: T,
    pub r: Vec3<T>,
    pub r_xi: Vec3<T>,
    pub r_xixi: Vec3<T>,
}

/// Arc-length derivatives and derived strain measures at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcQuantities<T> {
    pub r_prime: Vec3<T>,
    pub r_dprime: Vec3<T>,
    /// Axial tension `|r'| - 1`.
    pub axial_strain: T,
    /// `r' x r'' / |r'|^2`.
    pub curvature: Vec3<T>,
    /// Frenet curvature `|r' x r''| / |r'|^3`.
    pub frenet_curvature: T,
}

impl<T: Real> ElementDofs<T> {
    pub fn new(d1: Vec3<T>, t1: Vec3<T>, d2: Vec3<T>, t2: Vec3<T>, length: T) -> Self {
        Self { nodal: [d1, t1, d2, t2], length }
    }

    /// Straight element from `a` to `b` with unit tangents.
    pub fn straight(a: Vec3<T>, b: Vec3<T>) -> Self {
        let t = (b - a).normalized();
        Self::new(a, t, b, t, (b - a).norm())
    }

    /// Build from a 12-vector `[d1, t1, d2, t2]`.
    pub fn from_slice(v: &[T], length: T) -> Self {
        Self {
            nodal: [
                Vec3::from_slice(&v[0..3]),
                Vec3::from_slice(&v[3..6]),
                Vec3::from_slice(&v[6..9]),
                Vec3::from_slice(&v[9..12]),
            ],
            length,
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.nodal.iter().flat_map(|v| v.0).collect()
    }

    pub fn jacobian(&self) -> T {
        self.length * T::lit(0.5)
    }

    pub fn validate(&self) -> Result<(), ElementError> {
        if !(self.length > T::zero()) {
            return Err(ElementError::NonPositiveLength(self.length.to_f64_lossy()));
        }
        if !self.nodal.iter().all(|v| v.is_finite()) {
            return Err(ElementError::NonFinite);
        }
        Ok(())
    }

    pub fn shape(&self, xi: T) -> Shape<T> {
        let h = hermite_basis(xi);
        let j = self.jacobian();
        let scale = |a: [T; 4]| [a[0], j * a[1], a[2], j * a[3]];
        Shape { n: scale(h.value), n_xi: scale(h.d1), n_xixi: scale(h.d2) }
    }

    /// `sum_k c_k * nodal_k`.
    pub fn combine(&self, c: &ShapeRow<T>) -> Vec3<T> {
        let mut r = Vec3::zero();
        for k in 0..4 {
            r += self.nodal[k] * c[k];
        }
        r
    }

    pub fn evaluate(&self, xi: T) -> CurvePoint<T> {
        let s = self.shape(xi);
        CurvePoint { xi, r: self.combine(&s.n), r_xi: self.combine(&s.n_xi), r_xixi: self.combine(&s.n_xixi) }
    }

    pub fn position(&self, xi: T) -> Vec3<T> {
        self.combine(&self.shape(xi).n)
    }

    /// Arc-length quantities; fails when the tangent degenerates.
    pub fn arc_quantities(&self, xi: T) -> Result<ArcQuantities<T>, ElementError> {
        let p = self.evaluate(xi);
        let j = self.jacobian();
        let tol = T::lit(1e-12) * self.length;
        let speed = p.r_xi.norm();
        if !(speed > tol) {
            return Err(ElementError::DegenerateTangent { xi: xi.to_f64_lossy(), norm: (speed / j).to_f64_lossy() });
        }
        let a = p.r_xi * (T::one() / j);
        let b = p.r_xixi * (T::one() / (j * j));
        let an = a.norm();
        let axb = a.cross(&b);
        Ok(ArcQuantities {
            r_prime: a,
            r_dprime: b,
            axial_strain: an - T::one(),
            curvature: axb * (T::one() / (an * an)),
            frenet_curvature: axb.norm() / (an * an * an),
        })
    }
}

/// Scatter `N^T v` into a 12-vector (added).
pub fn add_nt_vec<T: Real>(out: &mut [T], c: &ShapeRow<T>, v: &Vec3<T>, s: T) {
    for k in 0..4 {
        for i in 0..3 {
            out[3 * k + i] += s * c[k] * v[i];
        }
    }
}
