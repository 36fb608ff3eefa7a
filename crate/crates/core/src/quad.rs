//! Globally adaptive Gauss-Kronrod (G10/K21) quadrature over a set of panels.
//!
//! Callers seed the integration with breakpoints (oscillation-resolving
//! panels, graded panels near endpoint singularities); the integrator then
//! repeatedly bisects the panel with the largest error estimate until the
//! summed estimate meets the tolerance.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the number of live panels (seed panels included).
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_tol: T::lit(1e-14),
            max_intervals: 400_000,
        }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    abs: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut err = err.abs();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && floor > err {
        err = floor;
    }
    err
}

fn gauss_kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * T::lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let x = half_len * T::lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k += w * (f1 + f2);
        res_abs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half_len.abs();
    let err = (res_k - res_g) * half_len;
    let res_abs = res_abs * h;
    let res_asc = res_asc * h;
    Panel {
        a,
        b,
        value: res_k * half_len,
        error: rescale_error(err, res_abs, res_asc),
        abs: res_abs,
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, using every
/// consecutive pair of (strictly increasing) breakpoints as a seed panel.
pub fn integrate<T, F>(f: F, breakpoints: &[T], cfg: &QuadConfig<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::Domain("quadrature needs at least two breakpoints".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    let mut frozen: Vec<Panel<T>> = Vec::new();
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        heap.push(gauss_kronrod(&f, w[0], w[1]));
        evaluations += 21;
    }

    let totals = |heap: &BinaryHeap<Panel<T>>, frozen: &[Panel<T>]| {
        let mut value = T::zero();
        let mut error = T::zero();
        let mut abs = T::zero();
        for p in heap.iter().chain(frozen.iter()) {
            value += p.value;
            error += p.error;
            abs += p.abs;
        }
        (value, error, abs)
    };

    let (mut value, mut error, mut abs) = totals(&heap, &frozen);
    let mut since_resum = 0usize;
    loop {
        let roundoff_floor = T::lit(100.0) * T::epsilon() * abs;
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs()).max(roundoff_floor);
        if error <= target {
            break;
        }
        let Some(worst) = heap.pop() else {
            // every remaining panel is at machine resolution
            break;
        };
        if heap.len() + frozen.len() + 2 > cfg.max_intervals {
            heap.push(worst);
            let (value, error, _) = totals(&heap, &frozen);
            return Err(Error::QuadratureNonConvergence {
                value: value.as_f64(),
                error: error.as_f64(),
                intervals: heap.len() + frozen.len(),
            });
        }
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
        since_resum += 1;
        if since_resum == 1024 {
            (value, error, abs) = totals(&heap, &frozen);
            since_resum = 0;
        }
    }
    let (value, error, _) = totals(&heap, &frozen);
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Convenience wrapper for a single finite interval.
pub fn integrate_interval<T, F>(f: F, a: T, b: T, cfg: &QuadConfig<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    integrate(f, &[a, b], cfg)
}

/// Breakpoints `0 = x_0 < x_1 < ... < x_n = upper` with geometric grading
/// towards zero (to isolate algebraic endpoint singularities) followed by
/// uniform panels no wider than `max_width`. `extra` points inside the range
/// (resonances, kinks) are merged in.
pub fn graded_breakpoints<T: Real>(upper: T, max_width: T, extra: &[T]) -> Vec<T> {
    let first = max_width.min(upper);
    let mut points = vec![T::zero()];
    // 2^-40 of the first panel is far below any tolerance we use
    for k in (1..=40).rev() {
        points.push(first * T::lit(0.5).powi(k));
    }
    let n = (upper / max_width).ceil().to_usize().unwrap_or(1).max(1);
    let step = upper / T::from_usize_lossy(n);
    for i in 1..=n {
        points.push(step * T::from_usize_lossy(i));
    }
    points.extend(extra.iter().copied().filter(|&x| x > T::zero() && x < upper));
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let tiny = upper * T::epsilon() * T::lit(16.0);
    points.dedup_by(|b, a| (*b - *a).abs() <= tiny);
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let cfg = QuadConfig::<f64>::default();
        let est = integrate_interval(|x| 3.0 * x * x + 1.0, 0.0, 2.0, &cfg).unwrap();
        assert_relative_eq!(est.value, 10.0, max_relative = 1e-15);
    }

    #[test]
    fn endpoint_singularity_with_graded_panels() {
        // int_0^1 x^-0.2 dx = 1.25
        let cfg = QuadConfig::<f64>::default();
        let pts = graded_breakpoints(1.0, 0.25, &[]);
        let est = integrate(|x: f64| x.powf(-0.2), &pts, &cfg).unwrap();
        assert_relative_eq!(est.value, 1.25, max_relative = 1e-9);
        assert!(est.error < 1e-8);
    }

    #[test]
    fn oscillatory_integral() {
        // int_0^50 cos(40 x) e^{-x/10} dx, closed form
        let cfg = QuadConfig::<f64>::default();
        let pts = graded_breakpoints(50.0, std::f64::consts::PI / 160.0, &[]);
        let est = integrate(|x: f64| (40.0 * x).cos() * (-x / 10.0).exp(), &pts, &cfg).unwrap();
        let a = 0.1_f64;
        let w = 40.0_f64;
        let exact = {
            let e = (-a * 50.0).exp();
            (a + e * (w * (w * 50.0).sin() - a * (w * 50.0).cos())) / (a * a + w * w)
        };
        assert_relative_eq!(est.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn interval_limit_reports_estimate() {
        let cfg = QuadConfig {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_intervals: 4,
        };
        let err = integrate_interval(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &cfg).unwrap_err();
        match err {
            Error::QuadratureNonConvergence { error, .. } => assert!(error > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        let cfg = QuadConfig::<f64>::default();
        assert!(integrate(|x: f64| x, &[0.0, 2.0, 1.0], &cfg).is_err());
    }
}
