//! Small fixed-size vectors and matrices plus a dense LU factorization.

use crate::error::SolverError;
use crate::scalar::Real;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Three-component vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    pub fn zero() -> Self {
        Self([T::zero(); 3])
    }

    pub fn from_slice(s: &[T]) -> Self {
        Self([s[0], s[1], s[2]])
    }

    pub fn unit(axis: usize) -> Self {
        let mut v = Self::zero();
        v.0[axis] = T::one();
        v
    }

    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Self([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn normalized(&self) -> Self {
        self.scale(T::one() / self.norm())
    }

    pub fn outer(&self, o: &Self) -> Mat3<T> {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i] * o.0[j];
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn cast<U: Real>(&self) -> Vec3<U> {
        Vec3(self.0.map(|x| U::lit(x.to_f64_lossy())))
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal(T::one())
    }

    pub fn diagonal(s: T) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = s;
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        Vec3([
            self.0[0][0] * v[0] + self.0[0][1] * v[1] + self.0[0][2] * v[2],
            self.0[1][0] * v[0] + self.0[1][1] * v[1] + self.0[1][2] * v[2],
            self.0[2][0] * v[0] + self.0[2][1] * v[1] + self.0[2][2] * v[2],
        ])
    }

    /// `vᵀ M` as a vector.
    pub fn tr_mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        self.transpose().mul_vec(v)
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-T::one())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| *a * *b).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self += s * a bᵀ`.
    pub fn add_outer(&mut self, s: T, a: &[T], b: &[T]) {
        for (i, &ai) in a.iter().enumerate() {
            if ai == T::zero() {
                continue;
            }
            let f = s * ai;
            for (x, &bj) in self.row_mut(i).iter_mut().zip(b) {
                *x += f * bj;
            }
        }
    }

    /// Add a scaled 3x3 block at block position `(bi, bj)` (row offset `3 bi`).
    pub fn add_block3(&mut self, bi: usize, bj: usize, m: &Mat3<T>, s: T) {
        for i in 0..3 {
            for j in 0..3 {
                self[(3 * bi + i, 3 * bj + j)] += s * m.0[i][j];
            }
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Largest entry of `|A - Aᵀ|`.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> Index<(usize, usize)> for DMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting of a square dense matrix.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    lu: DMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    pub fn factor(mut a: DMatrix<T>) -> Result<Self, SolverError> {
        let n = a.rows;
        assert_eq!(n, a.cols, "LU needs a square matrix");
        let scale = a.max_abs();
        let tiny = scale * T::epsilon() * T::lit(n.max(1) as f64);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > tiny) {
                return Err(SolverError::SingularMatrix { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = a[(k, j)];
                        a[(i, j)] -= f * v;
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: T = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: T = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Solve a 2x2 system; `None` when the determinant is below `tol`.
pub fn solve2<T: Real>(a: [[T; 2]; 2], b: [T; 2], tol: T) -> Option<[T; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det.abs() > tol) {
        return None;
    }
    Some([(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

pub fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cross_product_is_right_handed() {
        let z = Vec3::<f64>::unit(0).cross(&Vec3::unit(1));
        assert_eq!(z, Vec3::unit(2));
    }

    #[test]
    fn dense_lu_solves_pivoting_system() {
        let mut a = DMatrix::<f64>::zeros(3, 3);
        let vals = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = vals[i][j];
            }
        }
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = DenseLu::factor(a).unwrap().solve(&b);
        for i in 0..3 {
            assert_relative_eq!(x[i], x_true[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(DenseLu::factor(a), Err(SolverError::SingularMatrix { .. })));
    }

    #[test]
    fn solve2_rejects_small_determinant() {
        assert!(solve2([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0], 1e-12).is_none());
        let x = solve2([[2.0, 0.0], [0.0, 4.0]], [1.0, 1.0], 1e-12).unwrap();
        assert_eq!(x, [0.5, 0.25]);
    }
}
