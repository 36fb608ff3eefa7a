//! Damped Jaynes-Cummings model: a qubit decaying into a zero-temperature
//! reservoir with a Lorentzian spectrum centred on the qubit frequency.
//!
//! Everything follows from the excited-state amplitude `G(t)`, which obeys
//! `G' = -int_0^t f(t - s) G(s) ds` with `f(t) = (gamma0 lambda / 2) e^{-lambda |t|}`
//! and `G(0) = 1`. The closed form is
//! `G(t) = e^{-lambda t / 2} [cosh(d t / 2) + (lambda / d) sinh(d t / 2)]`,
//! `d = sqrt(lambda^2 - 2 gamma0 lambda)`, continued analytically when `d`
//! becomes imaginary (strong coupling, `gamma0 > lambda / 2`).

use crate::bloch::BlochState;
use crate::error::{ensure_positive, Error, Result};
use crate::spectral::SpectralDensity;
use crate::Real;

/// Relative size of `G e^{lambda t/2}` below which the relaxation rate is
/// reported as singular.
pub const SINGULAR_G_THRESHOLD: f64 = 1e-12;

/// Volterra step guard in units of `1 / lambda`.
pub const VOLTERRA_STEP_GUARD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcParams<T> {
    pub omega0: T,
    pub gamma0: T,
    pub lambda: T,
}

impl<T: Real> JcParams<T> {
    pub fn new(omega0: T, gamma0: T, lambda: T) -> Result<Self> {
        ensure_positive("omega0", omega0)?;
        ensure_positive("gamma0", gamma0)?;
        ensure_positive("lambda", lambda)?;
        Ok(Self { omega0, gamma0, lambda })
    }

    /// Weak coupling, `gamma0 < lambda / 2`: the rate never turns negative.
    pub fn is_markovian(&self) -> bool {
        self.gamma0 < T::lit(0.5) * self.lambda
    }

    /// `d^2 = lambda^2 - 2 gamma0 lambda`; negative in the strong-coupling regime.
    pub fn d_squared(&self) -> T {
        self.lambda * self.lambda - T::lit(2.0) * self.gamma0 * self.lambda
    }

    pub fn spectral_density(&self) -> SpectralDensity<T> {
        SpectralDensity::Lorentzian {
            gamma0: self.gamma0,
            lambda: self.lambda,
            omega0: self.omega0,
        }
    }

    /// Reservoir correlation function `f(t) = (gamma0 lambda / 2) e^{-lambda |t|}`.
    pub fn memory_kernel(&self, t: T) -> T {
        T::lit(0.5) * self.gamma0 * self.lambda * (-self.lambda * t.abs()).exp()
    }

    /// `t -> inf` limit of the rate in the weak-coupling regime,
    /// `2 gamma0 lambda / (lambda + d)`.
    pub fn asymptotic_rate(&self) -> Option<T> {
        let d2 = self.d_squared();
        (d2 > T::zero()).then(|| T::lit(2.0) * self.gamma0 * self.lambda / (self.lambda + d2.sqrt()))
    }
}

/// Amplitude `G(t)` and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcState<T> {
    pub t: T,
    pub g: T,
    pub g_dot: T,
}

/// `(cosh(d t/2), sinh(d t/2) / d)` for `d^2` of either sign, so that the
/// weak and strong branches are one real-valued analytic function of `d^2`.
fn hyperbolic_pair<T: Real>(d2: T, t: T) -> (T, T) {
    let x2 = d2 * t * t / T::lit(4.0);
    let half_t = T::lit(0.5) * t;
    if x2.abs() < T::lit(1e-2) {
        // cosh(x) = sum x^2k/(2k)!, sinh(x)/x = sum x^2k/(2k+1)!
        let mut c = T::one();
        let mut s = T::one();
        let mut term_c = T::one();
        let mut term_s = T::one();
        for k in 1..10 {
            let k2 = T::from_usize_lossy(2 * k);
            term_c = term_c * x2 / (k2 * (k2 - T::one()));
            term_s = term_s * x2 / (k2 * (k2 + T::one()));
            c += term_c;
            s += term_s;
        }
        (c, half_t * s)
    } else if d2 > T::zero() {
        let d = d2.sqrt();
        ((d * half_t).cosh(), (d * half_t).sinh() / d)
    } else {
        let kappa = (-d2).sqrt();
        ((kappa * half_t).cos(), (kappa * half_t).sin() / kappa)
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t >= T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time must be finite and >= 0, got {}",
            t.as_f64()
        )))
    }
}

/// Closed-form amplitude and derivative,
/// `G' = -gamma0 lambda e^{-lambda t/2} sinh(d t/2) / d`.
pub fn g_closed_form<T: Real>(p: &JcParams<T>, t: T) -> Result<JcState<T>> {
    check_time(t)?;
    let (c, s) = hyperbolic_pair(p.d_squared(), t);
    let envelope = (-T::lit(0.5) * p.lambda * t).exp();
    Ok(JcState {
        t,
        g: envelope * (c + p.lambda * s),
        g_dot: -p.gamma0 * p.lambda * s * envelope,
    })
}

/// Relaxation rate `gamma(t) = -2 G'/G = 2 gamma0 lambda sinh / (d cosh + lambda sinh)`.
///
/// Diverges at zeros of `G` (strong coupling only); those are reported as
/// [`Error::SingularRate`].
pub fn jc_rate<T: Real>(p: &JcParams<T>, t: T) -> Result<T> {
    check_time(t)?;
    let (c, s) = hyperbolic_pair(p.d_squared(), t);
    let envelope = (-T::lit(0.5) * p.lambda * t).exp();
    let undamped = c + p.lambda * s;
    // the envelope cancels in the rate, so the test is on the undamped factor
    if undamped.abs() <= T::lit(SINGULAR_G_THRESHOLD) * (c.abs() + (p.lambda * s).abs()) {
        return Err(Error::SingularRate {
            t: t.as_f64(),
            g: (envelope * undamped).abs().as_f64(),
        });
    }
    Ok(T::lit(2.0) * p.gamma0 * p.lambda * s / (c + p.lambda * s))
}

/// Rate for tabulation: singular samples become `+inf` or `-inf` following
/// the sign of `-G'/G` on approach.
pub fn jc_rate_flagged<T: Real>(p: &JcParams<T>, t: T) -> T {
    match jc_rate(p, t) {
        Ok(rate) => rate,
        Err(_) => {
            let st = g_closed_form(p, t).expect("t validated by caller");
            let sign = -st.g_dot * st.g.signum();
            if sign >= T::zero() {
                T::infinity()
            } else {
                T::neg_infinity()
            }
        }
    }
}

/// Reduced state for the initial condition `(sin eta, 0, cos eta)`:
/// `B = (sin(eta) G, 0, (cos(eta) + 1) G^2 - 1)`.
pub fn jc_rho<T: Real>(p: &JcParams<T>, eta: T, t: T) -> Result<BlochState<T>> {
    let st = g_closed_form(p, t)?;
    Ok(BlochState::new(
        eta.sin() * st.g,
        T::zero(),
        (eta.cos() + T::one()) * st.g * st.g - T::one(),
    ))
}

/// QFI flow for the optimal input `sin(eta) = 1`: `I_Q = 2 G G'`.
///
/// This is the flow of the transverse Fisher information `G^2 = B1^2 + B2^2`
/// (phase imprinted about `z`).
pub fn jc_qfi_flow<T: Real>(p: &JcParams<T>, t: T) -> Result<T> {
    let st = g_closed_form(p, t)?;
    Ok(T::lit(2.0) * st.g * st.g_dot)
}

/// Time-resolved energy current `d<H_s>/dt = omega0 G G'` for `sin(eta) = 1`.
pub fn jc_energy_current<T: Real>(p: &JcParams<T>, t: T) -> Result<T> {
    let st = g_closed_form(p, t)?;
    Ok(p.omega0 * st.g * st.g_dot)
}

/// Flow of `|B|^2 = G^2 + (G^2 - 1)^2` for `sin(eta) = 1`,
/// i.e. `2 G G' (2 G^2 - 1)`. Differs from [`jc_qfi_flow`] away from `G = 1`.
pub fn jc_bloch_norm_flow<T: Real>(p: &JcParams<T>, t: T) -> Result<T> {
    let st = g_closed_form(p, t)?;
    let g2 = st.g * st.g;
    Ok(T::lit(2.0) * st.g * st.g_dot * (T::lit(2.0) * g2 - T::one()))
}

/// Zeros of `G` on `(0, t_max]`; empty unless `gamma0 > lambda / 2`.
///
/// `cos(kappa t/2) + (lambda/kappa) sin(kappa t/2) = 0` gives
/// `t_k = 2 (pi - atan(kappa / lambda) + k pi) / kappa`.
pub fn g_zeros<T: Real>(p: &JcParams<T>, t_max: T) -> Vec<T> {
    let d2 = p.d_squared();
    if d2 >= T::zero() {
        return Vec::new();
    }
    let kappa = (-d2).sqrt();
    let base = T::PI() - (kappa / p.lambda).atan();
    (0..)
        .map(|k| T::lit(2.0) * (base + T::from_usize_lossy(k) * T::PI()) / kappa)
        .take_while(|&t| t <= t_max)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccuracyWarning {
    /// Step exceeds the guard `VOLTERRA_STEP_GUARD / lambda`.
    CoarseStep { dt: f64, guard: f64 },
}

/// Sampled solution of the amplitude integro-differential equation.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution<T> {
    pub dt: T,
    pub g: Vec<T>,
    pub warning: Option<AccuracyWarning>,
}

impl<T: Real> VolterraSolution<T> {
    pub fn time(&self, i: usize) -> T {
        self.dt * T::from_usize_lossy(i)
    }

    /// Sign changes of `G`, located by linear interpolation between samples.
    pub fn zero_crossings(&self) -> Vec<T> {
        self.g
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != T::zero() && w[0].signum() != w[1].signum())
            .map(|(i, w)| self.time(i) + self.dt * w[0] / (w[0] - w[1]))
            .collect()
    }
}

/// Solves `G' = -int_0^t kernel(t - s) G(s) ds`, `G(0) = 1`, on a uniform grid.
///
/// Trapezoidal rule for the memory integral and for the time step; the
/// implicit dependence on the new sample is linear and solved exactly.
/// O(N^2) in the number of steps.
pub fn solve_amplitude_volterra<T, K>(kernel: K, t_max: T, dt: T) -> Result<VolterraSolution<T>>
where
    T: Real,
    K: Fn(T) -> T,
{
    ensure_positive("dt", dt)?;
    ensure_positive("t_max", t_max)?;
    let n = (t_max / dt).round().to_usize().unwrap_or(0);
    let f: Vec<T> = (0..=n).map(|k| kernel(dt * T::from_usize_lossy(k))).collect();
    let half = T::lit(0.5);
    let mut g = vec![T::zero(); n + 1];
    let mut memory = vec![T::zero(); n + 1];
    g[0] = T::one();
    for m in 1..=n {
        // memory_m = dt (f_m G_0 / 2 + sum_{j=1}^{m-1} f_{m-j} G_j + f_0 G_m / 2)
        let mut known = half * f[m] * g[0];
        for j in 1..m {
            known += f[m - j] * g[j];
        }
        let known = dt * known;
        let implicit = dt * half * f[0];
        let gm = (g[m - 1] - half * dt * (memory[m - 1] + known)) / (T::one() + half * dt * implicit);
        g[m] = gm;
        memory[m] = known + implicit * gm;
    }
    Ok(VolterraSolution { dt, g, warning: None })
}

/// Volterra solution for the Lorentzian reservoir of `p`, used as an
/// independent check of [`g_closed_form`].
pub fn g_volterra<T: Real>(p: &JcParams<T>, t_max: T, dt: T) -> Result<VolterraSolution<T>> {
    let mut sol = solve_amplitude_volterra(|t| p.memory_kernel(t), t_max, dt)?;
    let guard = T::lit(VOLTERRA_STEP_GUARD) / p.lambda;
    if dt > guard {
        sol.warning = Some(AccuracyWarning::CoarseStep {
            dt: dt.as_f64(),
            guard: guard.as_f64(),
        });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(ratio: f64) -> JcParams<f64> {
        JcParams::new(1.0, ratio, 1.0).unwrap()
    }

    #[test]
    fn initial_values() {
        for ratio in [0.2, 0.5, 5.0] {
            let p = params(ratio);
            let st = g_closed_form(&p, 0.0).unwrap();
            assert_eq!(st.g, 1.0);
            assert_eq!(st.g_dot, 0.0);
            assert_eq!(jc_rate(&p, 0.0).unwrap(), 0.0);
            assert_eq!(jc_qfi_flow(&p, 0.0).unwrap(), 0.0);
            assert_eq!(jc_energy_current(&p, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_time_is_rejected() {
        assert!(g_closed_form(&params(0.2), -1.0).is_err());
    }

    #[test]
    fn strong_coupling_matches_trigonometric_form() {
        // gamma0 = 5 lambda: |d| = 3 lambda
        let p = params(5.0);
        for t in [0.1, 0.7, 2.3, 6.0] {
            let g = g_closed_form(&p, t).unwrap().g;
            let expected = (-t / 2.0_f64).exp() * ((1.5 * t).cos() + (1.5 * t).sin() / 3.0);
            assert_relative_eq!(g, expected, epsilon = 1e-15, max_relative = 1e-13);
        }
    }

    #[test]
    fn first_zero_solves_tangent_condition() {
        let p = params(5.0);
        let zeros = g_zeros(&p, 10.0);
        assert!(!zeros.is_empty());
        let t0 = zeros[0];
        assert_relative_eq!((1.5 * t0).tan(), -3.0, max_relative = 1e-10);
        // smallest positive solution: bisection on the closed form
        let (mut a, mut b) = (1e-9, t0 + 0.5);
        let ga = g_closed_form(&p, a).unwrap().g;
        assert!(ga > 0.0 && g_closed_form(&p, b).unwrap().g < 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g_closed_form(&p, m).unwrap().g > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        assert_relative_eq!(a, t0, max_relative = 1e-12);
        assert!(matches!(jc_rate(&p, t0), Err(Error::SingularRate { .. })));
        assert!(jc_rate_flagged(&p, t0).is_infinite());
    }

    #[test]
    fn weak_coupling_stays_positive_and_rate_saturates() {
        let p = params(0.2);
        for i in 0..=5000 {
            let t = 50.0 * i as f64 / 5000.0;
            assert!(g_closed_form(&p, t).unwrap().g > 0.0);
            assert!(jc_rate(&p, t).unwrap() >= 0.0);
            assert!(jc_qfi_flow(&p, t).unwrap() <= 0.0);
        }
        let limit = p.asymptotic_rate().unwrap();
        assert_relative_eq!(jc_rate(&p, 50.0).unwrap(), limit, max_relative = 1e-12);
        assert!(g_zeros(&p, 100.0).is_empty());
    }

    #[test]
    fn branch_continuity_at_critical_coupling() {
        for t in [0.3, 1.0, 4.0, 12.0] {
            let below = g_closed_form(&params(0.5 - 1e-6), t).unwrap();
            let at = g_closed_form(&params(0.5), t).unwrap();
            let above = g_closed_form(&params(0.5 + 1e-6), t).unwrap();
            assert!((below.g - above.g).abs() < 1e-4);
            // d -> 0 limit: G = e^{-lambda t/2} (1 + lambda t/2)
            assert_relative_eq!(at.g, (-t / 2.0_f64).exp() * (1.0 + t / 2.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn reduced_state_limits() {
        let p = params(0.2);
        let eta = 0.8_f64;
        let b0 = jc_rho(&p, eta, 0.0).unwrap();
        assert!(b0.max_abs_diff(&BlochState::from_eta(eta)) < 1e-15);
        let late = jc_rho(&p, eta, 400.0).unwrap();
        assert!(late.max_abs_diff(&BlochState::new(0.0, 0.0, -1.0)) < 1e-12);
        let t = 1.7;
        let g = g_closed_form(&p, t).unwrap().g;
        let optimal = jc_rho(&p, std::f64::consts::FRAC_PI_2, t).unwrap();
        assert!(optimal.max_abs_diff(&BlochState::new(g, 0.0, g * g - 1.0)) < 1e-15);
    }

    #[test]
    fn bloch_vector_stays_in_ball() {
        for ratio in [0.2, 5.0] {
            let p = params(ratio);
            for eta in [0.0, 0.6, std::f64::consts::FRAC_PI_2, 2.5] {
                for i in 0..=2000 {
                    let t = 30.0 * i as f64 / 2000.0;
                    assert!(jc_rho(&p, eta, t).unwrap().is_physical(1e-12));
                }
            }
        }
    }

    #[test]
    fn energy_current_is_half_omega0_times_flow() {
        let p = JcParams::new(1.3, 5.0, 1.0).unwrap();
        for i in 0..=500 {
            let t = 20.0 * i as f64 / 500.0;
            let iq = jc_qfi_flow(&p, t).unwrap();
            let ie = jc_energy_current(&p, t).unwrap();
            assert!((ie - 0.5 * p.omega0 * iq).abs() <= 1e-15 * ie.abs().max(1e-300));
        }
    }

    #[test]
    fn bloch_norm_flow_is_derivative_of_norm() {
        let p = params(5.0);
        let h = 1e-5;
        for t in [0.4, 1.1, 3.0] {
            let up = jc_rho(&p, std::f64::consts::FRAC_PI_2, t + h).unwrap().norm_sq();
            let dn = jc_rho(&p, std::f64::consts::FRAC_PI_2, t - h).unwrap().norm_sq();
            assert_relative_eq!(
                jc_bloch_norm_flow(&p, t).unwrap(),
                (up - dn) / (2.0 * h),
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn volterra_matches_closed_form_in_both_regimes() {
        for ratio in [0.2, 5.0] {
            let p = params(ratio);
            let sol = g_volterra(&p, 20.0, 1e-3).unwrap();
            assert!(sol.warning.is_none());
            let max_dev = sol
                .g
                .iter()
                .enumerate()
                .map(|(i, g)| (g - g_closed_form(&p, sol.time(i)).unwrap().g).abs())
                .fold(0.0, f64::max);
            assert!(max_dev < 1e-6, "ratio {ratio}: {max_dev}");
        }
    }

    #[test]
    fn volterra_zeros_match_closed_form_zeros() {
        let p = params(5.0);
        let dt = 1e-3;
        let sol = g_volterra(&p, 20.0, dt).unwrap();
        let numeric = sol.zero_crossings();
        let exact = g_zeros(&p, 20.0);
        assert_eq!(numeric.len(), exact.len());
        for (a, b) in numeric.iter().zip(&exact) {
            assert!((a - b).abs() < dt, "{a} vs {b}");
        }
    }

    #[test]
    fn coarse_volterra_step_warns() {
        let sol = g_volterra(&params(0.2), 1.0, 0.05).unwrap();
        assert!(matches!(sol.warning, Some(AccuracyWarning::CoarseStep { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let p = JcParams::new(1.0_f32, 5.0, 1.0).unwrap();
        let g = g_closed_form(&p, 1.0).unwrap().g;
        let expected = (-0.5_f32).exp() * (1.5_f32.cos() + 1.5_f32.sin() / 3.0);
        assert!((g - expected).abs() < 1e-6);
    }
}
