//! Special functions needed by the bath kernels.

use num_complex::Complex;

use crate::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler gamma function (Lanczos approximation, ~15 significant digits in f64).
pub fn gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(x + half) * (-t).exp() * acc
}

// B_2, B_4, ..., B_24
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Hurwitz zeta `sum_{k>=0} (q + k)^(-p)` for real `p > 1` and complex `q`
/// with `Re q > 0`, using the principal branch of the power.
///
/// Evaluated by Euler-Maclaurin summation after shifting the argument far
/// enough from the origin that the asymptotic tail converges quickly.
pub fn hurwitz_zeta<T: Real>(p: T, q: Complex<T>) -> Complex<T> {
    debug_assert!(p > T::one());
    debug_assert!(q.re > T::zero());
    let shift = 16 + p.ceil().to_usize().unwrap_or(0).min(64);
    let mut head = Complex::new(T::zero(), T::zero());
    for k in 0..shift {
        head += (q + T::from_usize_lossy(k)).powf(-p);
    }
    let z = q + T::from_usize_lossy(shift);
    let zp = z.powf(-p);
    let mut tail = z * zp / (p - T::one()) + zp * T::lit(0.5);

    // sum_j B_2j / (2j)! * p (p+1) ... (p+2j-2) * z^(-p-2j+1)
    let inv_z = z.inv();
    let inv_z2 = inv_z * inv_z;
    let mut power = zp * inv_z; // z^(-p-1)
    let mut poch = p; // rising factorial p (p+1) ... (p+2j-2)
    let mut fact = T::lit(2.0); // (2j)!
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = power * (T::lit(b) * poch / fact);
        tail += term;
        if term.norm() <= T::epsilon() * tail.norm() * T::lit(0.01) {
            break;
        }
        let m = T::from_usize_lossy(2 * j + 1);
        poch = poch * (p + m) * (p + m + T::one());
        fact = fact * (m + T::lit(2.0)) * (m + T::lit(3.0));
        power *= inv_z2;
    }
    head + tail
}

/// `sin(x t) / x`, continued to `t` at `x = 0`.
#[inline]
pub fn sin_ratio<T: Real>(x: T, t: T) -> T {
    let xt = x * t;
    if xt.abs() < T::lit(1e-4) {
        let xt2 = xt * xt;
        t * (T::one() - xt2 / T::lit(6.0) + xt2 * xt2 / T::lit(120.0))
    } else {
        xt.sin() / x
    }
}
