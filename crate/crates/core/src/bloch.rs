//! Bloch-vector representation of a qubit, `rho = (I + B . sigma) / 2`.
//!
//! Basis ordering is `(|e>, |g>)`: `sigma_z = |e><e| - |g><g|`, so
//! `B3 = rho_ee - rho_gg`.

use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex;

use crate::Real;

/// 2x2 complex matrix, row-major.
pub type Matrix2<T> = [[Complex<T>; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState<T>(pub [T; 3]);

impl<T: Real> BlochState<T> {
    pub fn new(b1: T, b2: T, b3: T) -> Self {
        Self([b1, b2, b3])
    }

    pub fn zero() -> Self {
        Self([T::zero(); 3])
    }

    /// Pure state `cos(eta/2)|e> + sin(eta/2)|g>`, i.e. `(sin eta, 0, cos eta)`.
    pub fn from_eta(eta: T) -> Self {
        Self([eta.sin(), T::zero(), eta.cos()])
    }

    #[inline]
    pub fn x(&self) -> T {
        self.0[0]
    }

    #[inline]
    pub fn y(&self) -> T {
        self.0[1]
    }

    #[inline]
    pub fn z(&self) -> T {
        self.0[2]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, other: &Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Self([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (0..3).map(|i| (self.0[i] - other.0[i]).abs()).fold(T::zero(), T::max)
    }

    /// Physical state check `|B| <= 1 + tol`.
    pub fn is_physical(&self, tol: T) -> bool {
        self.0.iter().all(|c| c.is_finite()) && self.norm() <= T::one() + tol
    }

    pub fn density_matrix(&self) -> Matrix2<T> {
        let half = T::lit(0.5);
        let [b1, b2, b3] = self.0;
        [
            [
                Complex::new(half * (T::one() + b3), T::zero()),
                Complex::new(half * b1, -half * b2),
            ],
            [
                Complex::new(half * b1, half * b2),
                Complex::new(half * (T::one() - b3), T::zero()),
            ],
        ]
    }

    /// Inverse of [`BlochState::density_matrix`]; uses only the Hermitian part.
    pub fn from_density_matrix(rho: &Matrix2<T>) -> Self {
        let two = T::lit(2.0);
        Self([two * rho[1][0].re, two * rho[1][0].im, rho[0][0].re - rho[1][1].re])
    }
}

impl<T: Real> Index<usize> for BlochState<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> Add for BlochState<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl<T: Real> Sub for BlochState<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl<T: Real> Mul<T> for BlochState<T> {
    type Output = Self;

    fn mul(self, k: T) -> Self {
        Self([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

pub(crate) mod mat2 {
    use super::Matrix2;
    use crate::Real;
    use num_complex::Complex;

    pub fn zero<T: Real>() -> Matrix2<T> {
        [[Complex::new(T::zero(), T::zero()); 2]; 2]
    }

    pub fn identity<T: Real>() -> Matrix2<T> {
        let mut m = zero();
        m[0][0] = Complex::new(T::one(), T::zero());
        m[1][1] = Complex::new(T::one(), T::zero());
        m
    }

    /// Pauli matrices `[sigma_x, sigma_y, sigma_z]` in the `(|e>, |g>)` basis.
    pub fn pauli<T: Real>() -> [Matrix2<T>; 3] {
        let o = T::one();
        let z = T::zero();
        let c = |re: T, im: T| Complex::new(re, im);
        [
            [[c(z, z), c(o, z)], [c(o, z), c(z, z)]],
            [[c(z, z), c(z, -o)], [c(z, o), c(z, z)]],
            [[c(o, z), c(z, z)], [c(z, z), c(-o, z)]],
        ]
    }

    pub fn mul<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
        let mut m = zero();
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        m
    }

    pub fn add<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
        let mut m = *a;
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += b[i][j];
            }
        }
        m
    }

    pub fn scale<T: Real>(a: &Matrix2<T>, k: Complex<T>) -> Matrix2<T> {
        let mut m = *a;
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        m
    }

    pub fn dagger<T: Real>(a: &Matrix2<T>) -> Matrix2<T> {
        [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
    }

    pub fn trace<T: Real>(a: &Matrix2<T>) -> Complex<T> {
        a[0][0] + a[1][1]
    }
}
