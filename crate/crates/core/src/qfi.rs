//! SLD quantum Fisher information of a qubit under the phase imprint
//! `rho -> e^{i theta n.J} rho e^{-i theta n.J}`, `J = sigma / 2`.
//!
//! For a Bloch vector `B` the information is `|n x B|^2`, maximal (`|B|^2`)
//! for any direction orthogonal to `B`.

use num_complex::Complex;

use crate::bloch::BlochState;
use crate::error::{Error, Result};
use crate::Real;

/// Tolerance on `|n| = 1` accepted by [`Direction::new`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Unit vector along which the phase is imprinted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<T>([T; 3]);

impl<T: Real> Direction<T> {
    pub fn new(n: [T; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (norm - T::one()).abs() <= T::lit(UNIT_TOLERANCE).max(T::epsilon() * T::lit(8.0)) {
            Ok(Self(n))
        } else {
            Err(Error::Domain(format!(
                "direction is not a unit vector (|n| = {})",
                norm.as_f64()
            )))
        }
    }

    /// Normalises `n`; fails for the zero vector.
    pub fn normalized(n: [T; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Domain("cannot normalise a zero or non-finite vector".into()));
        }
        Ok(Self([n[0] / norm, n[1] / norm, n[2] / norm]))
    }

    /// Spherical direction with polar angle `theta` and azimuth `phi`.
    pub fn spherical(theta: T, phi: T) -> Self {
        Self([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    pub fn components(&self) -> [T; 3] {
        self.0
    }

    pub fn as_bloch(&self) -> BlochState<T> {
        BlochState(self.0)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.as_bloch().dot(&other.as_bloch())
    }
}

/// Spectral data of `rho = (I + B . sigma) / 2`.
///
/// Angles follow `xi = atan2(B2, B1)` (zero on the `z` axis) and
/// `psi = atan2(sqrt(B1^2 + B2^2), B3)`; eigenvalues are `(1 +- |B|) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDecomposition<T> {
    pub b: BlochState<T>,
    pub xi: T,
    pub psi: T,
    pub p1: T,
    pub p2: T,
}

impl<T: Real> BlochDecomposition<T> {
    pub fn new(b: BlochState<T>) -> Self {
        let [b1, b2, b3] = b.0;
        let transverse = (b1 * b1 + b2 * b2).sqrt();
        let xi = if transverse == T::zero() {
            T::zero()
        } else {
            b2.atan2(b1)
        };
        let psi = transverse.atan2(b3);
        let r = b.norm();
        let half = T::lit(0.5);
        Self {
            b,
            xi,
            psi,
            p1: half * (T::one() + r),
            p2: half * (T::one() - r),
        }
    }

    /// Eigenvectors `|1>`, `|2>` as `(e, g)` amplitudes:
    /// `|1> = cos(psi/2) e^{-i xi/2} |e> + sin(psi/2) e^{i xi/2} |g>`,
    /// `|2> = -sin(psi/2) e^{-i xi/2} |e> + cos(psi/2) e^{i xi/2} |g>`.
    pub fn eigenvectors(&self) -> [[Complex<T>; 2]; 2] {
        let half = T::lit(0.5);
        let (s, c) = (half * self.psi).sin_cos();
        let minus = Complex::from_polar(T::one(), -half * self.xi);
        let plus = Complex::from_polar(T::one(), half * self.xi);
        [[minus * c, plus * s], [minus * (-s), plus * c]]
    }
}

/// `F = |n x B|^2`.
pub fn qfi_for_direction<T: Real>(b: &BlochState<T>, n: &Direction<T>) -> T {
    n.as_bloch().cross(b).norm_sq()
}

/// Maximum over directions, `|B|^2`.
pub fn max_qfi<T: Real>(b: &BlochState<T>) -> T {
    b.norm_sq()
}

/// Information for a phase imprinted about `z`, `B1^2 + B2^2`.
pub fn transverse_qfi<T: Real>(b: &BlochState<T>) -> T {
    b.x() * b.x() + b.y() * b.y()
}

/// Matrix `C` whose top eigenvectors give the optimal directions:
///
/// ```text
/// C = (p1 - p2)^2 / 4 *
///   [ 2(cos^2 xi cos^2 psi + sin^2 xi)   -sin 2xi sin^2 psi               -cos xi sin 2psi ]
///   [ -sin 2xi sin^2 psi                 2(cos^2 xi + sin^2 xi cos^2 psi) -sin 2psi sin xi ]
///   [ -cos xi sin 2psi                   -sin 2psi sin xi                 2 sin^2 psi      ]
/// ```
pub fn build_c_matrix<T: Real>(b: &BlochState<T>) -> Result<[[T; 3]; 3]> {
    let dec = BlochDecomposition::new(*b);
    let gap = dec.p1 - dec.p2;
    if gap <= T::zero() {
        return Err(Error::DegenerateState("maximally mixed state has C = 0"));
    }
    let two = T::lit(2.0);
    let (sx, cx) = dec.xi.sin_cos();
    let (sp, cp) = dec.psi.sin_cos();
    let s2x = (two * dec.xi).sin();
    let s2p = (two * dec.psi).sin();
    let k = gap * gap / T::lit(4.0);
    let c11 = two * (cx * cx * cp * cp + sx * sx);
    let c22 = two * (cx * cx + sx * sx * cp * cp);
    let c33 = two * sp * sp;
    let c12 = -s2x * sp * sp;
    let c13 = -cx * s2p;
    let c23 = -s2p * sx;
    Ok([
        [k * c11, k * c12, k * c13],
        [k * c12, k * c22, k * c23],
        [k * c13, k * c23, k * c33],
    ])
}

/// The two orthonormal directions spanning the plane orthogonal to `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalDirections<T> {
    pub first: Direction<T>,
    pub second: Direction<T>,
    /// `B = 0`: every direction is optimal and the pair is the canonical
    /// `(y, x)` choice.
    pub degenerate: bool,
}

/// `n1 = (-sin xi, cos xi, 0)`, `n2 = (cos psi cos xi, cos psi sin xi, -sin psi)`.
pub fn optimal_directions<T: Real>(b: &BlochState<T>) -> OptimalDirections<T> {
    let dec = BlochDecomposition::new(*b);
    let (sx, cx) = dec.xi.sin_cos();
    let (sp, cp) = dec.psi.sin_cos();
    OptimalDirections {
        first: Direction([-sx, cx, T::zero()]),
        second: Direction([cp * cx, cp * sx, -sp]),
        degenerate: b.norm_sq() == T::zero(),
    }
}

/// `dF/dt` by central differences (second-order one-sided at the ends).
pub fn qfi_flow_numeric<T: Real>(t: &[T], f: &[T]) -> Result<Vec<T>> {
    let n = t.len();
    if n != f.len() {
        return Err(Error::Domain(format!("{} times but {} samples", n, f.len())));
    }
    if n < 3 {
        return Err(Error::Domain("finite differences need at least 3 samples".into()));
    }
    let dt = (t[n - 1] - t[0]) / T::from_usize_lossy(n - 1);
    if !(dt > T::zero()) {
        return Err(Error::Domain("time grid must be increasing".into()));
    }
    let tol = (T::lit(1e-6) * dt).max(T::lit(64.0) * T::epsilon() * t[n - 1].abs());
    for (i, w) in t.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > tol {
            return Err(Error::Domain(format!("time grid is not uniform at index {}", i + 1)));
        }
    }
    let two_dt = T::lit(2.0) * dt;
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let mut out = Vec::with_capacity(n);
    out.push((-three * f[0] + four * f[1] - f[2]) / two_dt);
    for i in 1..n - 1 {
        out.push((f[i + 1] - f[i - 1]) / two_dt);
    }
    out.push((three * f[n - 1] - four * f[n - 2] + f[n - 3]) / two_dt);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cross_product_cases() {
        let b = BlochState::new(0.0_f64, 0.0, 0.6);
        let x = Direction::new([1.0, 0.0, 0.0]).unwrap();
        let z = Direction::new([0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(qfi_for_direction(&b, &x), 0.36, max_relative = 1e-15);
        assert_eq!(qfi_for_direction(&b, &z), 0.0);
        assert_relative_eq!(max_qfi(&b), 0.36, max_relative = 1e-15);
        assert_eq!(max_qfi(&BlochState::<f64>::zero()), 0.0);
        assert_relative_eq!(max_qfi(&BlochState::from_eta(0.7_f64)), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        assert!(Direction::new([1.0_f64, 1.0, 0.0]).is_err());
        assert!(Direction::normalized([0.0_f64; 3]).is_err());
        let n = Direction::normalized([1.0_f64, 1.0, 0.0]).unwrap();
        assert!(Direction::new(n.components()).is_ok());
    }

    #[test]
    fn c_matrix_on_z_axis() {
        let b = 0.8_f64;
        let c = build_c_matrix(&BlochState::new(0.0, 0.0, b)).unwrap();
        let k = b * b / 4.0;
        let expected = [[2.0 * k, 0.0, 0.0], [0.0, 2.0 * k, 0.0], [0.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((c[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        let dirs = optimal_directions(&BlochState::new(0.0, 0.0, b));
        assert_eq!(dirs.first.components(), [0.0, 1.0, 0.0]);
        assert_eq!(dirs.second.components(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn degenerate_cases() {
        assert!(matches!(
            build_c_matrix(&BlochState::<f64>::zero()),
            Err(Error::DegenerateState(_))
        ));
        let dirs = optimal_directions(&BlochState::<f64>::zero());
        assert!(dirs.degenerate);
        assert_relative_eq!(dirs.first.dot(&dirs.second), 0.0);
    }

    #[test]
    fn trace_of_c_is_squared_gap() {
        let b = BlochState::new(0.3_f64, -0.4, 0.2);
        let c = build_c_matrix(&b).unwrap();
        let dec = BlochDecomposition::new(b);
        let trace = c[0][0] + c[1][1] + c[2][2];
        assert_relative_eq!(trace, (dec.p1 - dec.p2).powi(2), max_relative = 1e-14);
    }

    #[test]
    fn eigenvectors_diagonalise_the_state() {
        let b = BlochState::new(-0.3_f64, 0.5, -0.6);
        let dec = BlochDecomposition::new(b);
        let rho = b.density_matrix();
        for (vec, p) in dec.eigenvectors().iter().zip([dec.p1, dec.p2]) {
            for row in 0..2 {
                let applied = rho[row][0] * vec[0] + rho[row][1] * vec[1];
                assert!((applied - vec[row] * p).norm() < 1e-14);
            }
        }
        assert_relative_eq!(dec.p1 + dec.p2, 1.0);
    }

    #[test]
    fn finite_difference_flow() {
        let t: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|x| x * x).collect();
        let flow = qfi_flow_numeric(&t, &f).unwrap();
        for (x, d) in t.iter().zip(&flow) {
            assert!((d - 2.0 * x).abs() < 1e-12);
        }
        let constant = qfi_flow_numeric(&t, &vec![0.4; 101]).unwrap();
        assert!(constant.iter().all(|d| d.abs() < 1e-12));
        let mut bent = t.clone();
        bent[50] += 0.003;
        assert!(qfi_flow_numeric(&bent, &f).is_err());
        assert!(qfi_flow_numeric(&t[..2], &f[..2]).is_err());
    }
}
