//! Spin-boson model at second order in the coupling with the rotating-wave
//! approximation.
//!
//! The qubit `H_s = omega0 sigma_z / 2` is pumped at rate `gamma_+(t)` and
//! decays at rate `gamma_-(t)`. With `gamma_s = gamma_+ + gamma_-` and
//! `gamma_d = gamma_+ - gamma_-`, the Bloch vector obeys
//! `B3' = -gamma_s B3 + gamma_d`, `B_perp' = -gamma_s B_perp / 2 + rotation`,
//! solved by `Gamma = int gamma_s`, `delta = int e^Gamma gamma_d`.
//!
//! Rates at isolated times come from the frequency integral over
//! `sin((w -+ w0) t) / (w -+ w0)` factors ([`sbm_rates`]). Trajectories
//! integrate `gamma_s' = cos(w0 t) D1(t) / 2` and `gamma_d' = -sin(w0 t) D(t) / 2`
//! together with `Gamma` and `delta` on a fine uniform grid, using
//! closed-form kernels ([`solve_sbm`]).

use crate::bloch::BlochState;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::quad::{graded_breakpoints, integrate, QuadConfig};
use crate::special::sin_ratio;
use crate::spectral::{BathKernels, SpectralDensity};
use crate::Real;

/// Advisory threshold on `alpha omega_c / omega0`.
pub const WEAK_COUPLING_LIMIT: f64 = 0.5;

/// Default step of the integral assembly, in units of `1 / omega0`.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmParams<T> {
    pub omega0: T,
    pub spectral: SpectralDensity<T>,
    pub temperature: T,
    pub quad: QuadConfig<T>,
}

impl<T: Real> SbmParams<T> {
    pub fn new(omega0: T, spectral: SpectralDensity<T>, temperature: T) -> Result<Self> {
        let p = Self {
            omega0,
            spectral,
            temperature,
            quad: QuadConfig::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_quad(mut self, quad: QuadConfig<T>) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("omega0", self.omega0)?;
        ensure_non_negative("temperature", self.temperature)?;
        match self.spectral {
            SpectralDensity::OhmicFamily { .. } => Ok(()),
            SpectralDensity::Lorentzian { .. } => Err(Error::Unsupported(
                "the spin-boson model needs an Ohmic-family spectral density",
            )),
        }
    }

    pub fn kernels(&self) -> Result<BathKernels<T>> {
        Ok(BathKernels::new(self.spectral, self.temperature)?.with_quad(self.quad))
    }

    /// `alpha omega_c / omega0`.
    pub fn coupling_ratio(&self) -> T {
        match self.spectral {
            SpectralDensity::OhmicFamily { alpha, omega_c, .. } => alpha * omega_c / self.omega0,
            SpectralDensity::Lorentzian { .. } => T::nan(),
        }
    }

    /// Warning text when the coupling is outside the weak-coupling regime.
    pub fn advisory(&self) -> Option<String> {
        let ratio = self.coupling_ratio();
        (ratio > T::lit(WEAK_COUPLING_LIMIT)).then(|| {
            format!(
                "alpha*omega_c/omega0 = {} exceeds {}: second-order weak-coupling rates may be unreliable",
                ratio.as_f64(),
                WEAK_COUPLING_LIMIT
            )
        })
    }

    /// Long-time rates `gamma_s -> (pi/2) J(w0) coth(w0/2T)`, `gamma_d -> -(pi/2) J(w0)`.
    pub fn markov_rates(&self) -> Result<(T, T)> {
        self.validate()?;
        let j = self.spectral.eval_j(self.omega0)?;
        let half_pi = T::FRAC_PI_2();
        let coth = crate::spectral::thermal_factor(self.temperature, self.omega0);
        Ok((half_pi * j * coth, -half_pi * j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmRates<T> {
    pub t: T,
    pub gamma_plus: T,
    pub gamma_minus: T,
    pub gamma_s: T,
    pub gamma_d: T,
}

impl<T: Real> SbmRates<T> {
    pub fn from_plus_minus(t: T, gamma_plus: T, gamma_minus: T) -> Self {
        Self {
            t,
            gamma_plus,
            gamma_minus,
            gamma_s: gamma_plus + gamma_minus,
            gamma_d: gamma_plus - gamma_minus,
        }
    }

    pub fn from_sum_difference(t: T, gamma_s: T, gamma_d: T) -> Self {
        let half = T::lit(0.5);
        Self {
            t,
            gamma_plus: half * (gamma_s + gamma_d),
            gamma_minus: half * (gamma_s - gamma_d),
            gamma_s,
            gamma_d,
        }
    }
}

/// `Gamma = int_0^t gamma_s`, `Lambda = Gamma / 2`, `delta = int_0^t e^Gamma gamma_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmIntegrals<T> {
    pub t: T,
    pub gamma: T,
    pub lambda: T,
    pub delta: T,
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

/// Rates by quadrature over the bath frequencies:
///
/// `gamma_+- = 1/2 int J(w) [(1 + n) sin((w +- w0) t)/(w +- w0) + n sin((w -+ w0) t)/(w -+ w0)] dw`
/// on `w >= 0`, with the ratios continued to `t` at the resonance.
pub fn sbm_rates<T: Real>(p: &SbmParams<T>, t: T) -> Result<SbmRates<T>> {
    p.validate()?;
    check_time(t)?;
    if t == T::zero() {
        return Ok(SbmRates::from_plus_minus(t, T::zero(), T::zero()));
    }
    let bk = p.kernels()?;
    let w0 = p.omega0;
    let temp = p.temperature;
    let half = T::lit(0.5);
    let occupation = move |w: T| {
        if temp == T::zero() {
            T::zero()
        } else {
            T::one() / (w / temp).exp_m1()
        }
    };
    let spectral = p.spectral;
    let weight = move |w: T, same: T, opposite: T| {
        if w == T::zero() {
            return T::zero();
        }
        let n = occupation(w);
        half * spectral.j_unchecked(w) * ((T::one() + n) * same + n * opposite)
    };
    let plus = bk.band_integral(t, &[w0], |w| weight(w, sin_ratio(w + w0, t), sin_ratio(w - w0, t)))?;
    let minus = bk.band_integral(t, &[w0], |w| weight(w, sin_ratio(w - w0, t), sin_ratio(w + w0, t)))?;
    Ok(SbmRates::from_plus_minus(t, plus.value, minus.value))
}

/// Time derivatives of the rates from the bath kernels,
/// `(cos(w0 t) D1(t) / 2, -sin(w0 t) D(t) / 2)`.
pub fn rate_derivatives<T: Real>(bk: &BathKernels<T>, omega0: T, t: T) -> Result<(T, T)> {
    let (d1, d) = bk.kernels_closed_form(t)?;
    let half = T::lit(0.5);
    let (s, c) = (omega0 * t).sin_cos();
    Ok((half * c * d1, -half * s * d))
}

/// Rates from time integrals of the closed-form kernels,
/// `gamma_s = 1/2 int_0^t cos(w0 s) D1(s) ds`, `gamma_d = -1/2 int_0^t sin(w0 s) D(s) ds`.
pub fn sbm_rates_kernel_form<T: Real>(p: &SbmParams<T>, t: T) -> Result<SbmRates<T>> {
    p.validate()?;
    check_time(t)?;
    if t == T::zero() {
        return Ok(SbmRates::from_sum_difference(t, T::zero(), T::zero()));
    }
    let bk = p.kernels()?;
    let width = (T::FRAC_PI_2() / p.omega0).min(T::one());
    let pts = graded_breakpoints(t, width, &[]);
    let w0 = p.omega0;
    let deriv = |s: T| rate_derivatives(&bk, w0, s).expect("validated Ohmic bath");
    let gs = integrate(|s| deriv(s).0, &pts, &p.quad)?;
    let gd = integrate(|s| deriv(s).1, &pts, &p.quad)?;
    Ok(SbmRates::from_sum_difference(t, gs.value, gd.value))
}

/// One sample of the fine integration grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmNode<T> {
    pub t: T,
    pub gamma_s: T,
    pub gamma_d: T,
    /// `gamma_s'`
    pub k_s: T,
    /// `gamma_d'`
    pub k_d: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Real> SbmNode<T> {
    pub fn rates(&self) -> SbmRates<T> {
        SbmRates::from_sum_difference(self.t, self.gamma_s, self.gamma_d)
    }

    pub fn integrals(&self) -> SbmIntegrals<T> {
        SbmIntegrals {
            t: self.t,
            gamma: self.gamma,
            lambda: T::lit(0.5) * self.gamma,
            delta: self.delta,
        }
    }
}

fn horizon_limit<T: Real>() -> T {
    T::lit(0.9) * T::max_value().ln()
}

/// Classical RK4 on `(gamma_s, gamma_d, Gamma, delta)` with
/// `(gamma_s, gamma_d)' = deriv(t)`, `Gamma' = gamma_s`, `delta' = e^Gamma gamma_d`.
///
/// `initial` holds `(gamma_s, gamma_d)` at `t = 0`. Returns `n_steps + 1` nodes.
pub fn assemble_integrals<T, F>(deriv: F, initial: (T, T), h: T, n_steps: usize) -> Result<Vec<SbmNode<T>>>
where
    T: Real,
    F: Fn(T) -> Result<(T, T)>,
{
    ensure_positive("step", h)?;
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let limit = horizon_limit::<T>();
    let mut nodes = Vec::with_capacity(n_steps + 1);
    let (mut gs, mut gd) = initial;
    let (mut gamma, mut delta) = (T::zero(), T::zero());
    let mut k_now = deriv(T::zero())?;
    nodes.push(SbmNode {
        t: T::zero(),
        gamma_s: gs,
        gamma_d: gd,
        k_s: k_now.0,
        k_d: k_now.1,
        gamma,
        delta,
    });
    for n in 0..n_steps {
        let t = h * T::from_usize_lossy(n);
        let k_mid = deriv(t + half * h)?;
        let t_next = h * T::from_usize_lossy(n + 1);
        let k_next = deriv(t_next)?;

        // stage 1
        let s1 = (k_now.0, k_now.1, gs, gamma.exp() * gd);
        // stage 2
        let y2 = (gs + half * h * s1.0, gd + half * h * s1.1, gamma + half * h * s1.2);
        let s2 = (k_mid.0, k_mid.1, y2.0, y2.2.exp() * y2.1);
        // stage 3
        let y3 = (gs + half * h * s2.0, gd + half * h * s2.1, gamma + half * h * s2.2);
        let s3 = (k_mid.0, k_mid.1, y3.0, y3.2.exp() * y3.1);
        // stage 4
        let y4 = (gs + h * s3.0, gd + h * s3.1, gamma + h * s3.2);
        let s4 = (k_next.0, k_next.1, y4.0, y4.2.exp() * y4.1);

        let two = T::lit(2.0);
        gs += h * sixth * (s1.0 + two * s2.0 + two * s3.0 + s4.0);
        gd += h * sixth * (s1.1 + two * s2.1 + two * s3.1 + s4.1);
        gamma += h * sixth * (s1.2 + two * s2.2 + two * s3.2 + s4.2);
        delta += h * sixth * (s1.3 + two * s2.3 + two * s3.3 + s4.3);

        if !(gamma.abs() < limit) || !delta.is_finite() {
            return Err(Error::Horizon {
                t: t_next.as_f64(),
                gamma: gamma.as_f64(),
            });
        }
        k_now = k_next;
        nodes.push(SbmNode {
            t: t_next,
            gamma_s: gs,
            gamma_d: gd,
            k_s: k_now.0,
            k_d: k_now.1,
            gamma,
            delta,
        });
    }
    Ok(nodes)
}

/// Solution on a fine grid of step `h`; every `stride`-th node is an output sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSolution<T> {
    pub omega0: T,
    pub step: T,
    pub stride: usize,
    pub nodes: Vec<SbmNode<T>>,
}

/// Integrates rates and integrals on `[0, t_max]` so that the
/// `n_samples` uniform output times are grid nodes and the internal step
/// does not exceed `max_step`.
pub fn solve_sbm<T: Real>(p: &SbmParams<T>, t_max: T, n_samples: usize, max_step: T) -> Result<SbmSolution<T>> {
    p.validate()?;
    ensure_positive("t_max", t_max)?;
    ensure_positive("max_step", max_step)?;
    if n_samples < 2 {
        return Err(Error::Domain("need at least 2 output samples".into()));
    }
    let dt_out = t_max / T::from_usize_lossy(n_samples - 1);
    let stride = (dt_out / max_step).ceil().to_usize().unwrap_or(1).max(1);
    let h = dt_out / T::from_usize_lossy(stride);
    let bk = p.kernels()?;
    let nodes = assemble_integrals(
        |t| rate_derivatives(&bk, p.omega0, t),
        (T::zero(), T::zero()),
        h,
        stride * (n_samples - 1),
    )?;
    Ok(SbmSolution {
        omega0: p.omega0,
        step: h,
        stride,
        nodes,
    })
}

impl<T: Real> SbmSolution<T> {
    pub fn samples(&self) -> impl Iterator<Item = &SbmNode<T>> + '_ {
        self.nodes.iter().step_by(self.stride)
    }

    pub fn sample_count(&self) -> usize {
        (self.nodes.len() - 1) / self.stride + 1
    }

    pub fn sample_times(&self) -> Vec<T> {
        self.samples().map(|n| n.t).collect()
    }

    /// Rates at any `t` in range by cubic Hermite interpolation of the
    /// nodes (values and exact derivatives).
    pub fn rates_at(&self, t: T) -> SbmRates<T> {
        let last = self.nodes.len() - 1;
        let pos = (t / self.step).max(T::zero());
        let i = pos.floor().to_usize().unwrap_or(last).min(last.saturating_sub(1));
        if last == 0 {
            return self.nodes[0].rates();
        }
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = self.step;
        let s = (t - a.t) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let interp = |y0: T, d0: T, y1: T, d1: T| h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        SbmRates::from_sum_difference(
            t,
            interp(a.gamma_s, a.k_s, b.gamma_s, b.k_s),
            interp(a.gamma_d, a.k_d, b.gamma_d, b.k_d),
        )
    }

    pub fn integrals(&self) -> Vec<SbmIntegrals<T>> {
        self.samples().map(SbmNode::integrals).collect()
    }
}

/// `Gamma`, `Lambda`, `delta` at `n_samples` uniform times on `[0, t_max]`.
pub fn sbm_integrals<T: Real>(
    p: &SbmParams<T>,
    t_max: T,
    n_samples: usize,
    max_step: T,
) -> Result<Vec<SbmIntegrals<T>>> {
    Ok(solve_sbm(p, t_max, n_samples, max_step)?.integrals())
}

/// `B = (e^{-Lambda} sin(eta) cos(w0 t), e^{-Lambda} sin(eta) sin(w0 t), e^{-Gamma}(cos(eta) + delta))`.
pub fn sbm_bloch<T: Real>(omega0: T, eta: T, integrals: &SbmIntegrals<T>) -> BlochState<T> {
    let coherence = (-integrals.lambda).exp() * eta.sin();
    let (s, c) = (omega0 * integrals.t).sin_cos();
    BlochState::new(
        coherence * c,
        coherence * s,
        (-integrals.gamma).exp() * (eta.cos() + integrals.delta),
    )
}

/// `delta' - Gamma' (1 + delta)` with `delta' = e^Gamma gamma_d`, `Gamma' = gamma_s`.
pub fn population_drive<T: Real>(rates: &SbmRates<T>, integrals: &SbmIntegrals<T>) -> T {
    integrals.gamma.exp() * rates.gamma_d - rates.gamma_s * (T::one() + integrals.delta)
}

/// QFI flow for the excited initial state, `2 e^{-2 Gamma} (1 + delta) (delta' - Gamma' (1 + delta))`.
pub fn sbm_qfi_flow<T: Real>(rates: &SbmRates<T>, integrals: &SbmIntegrals<T>) -> T {
    T::lit(2.0)
        * (T::lit(-2.0) * integrals.gamma).exp()
        * (T::one() + integrals.delta)
        * population_drive(rates, integrals)
}

/// Energy current for the excited initial state, `(w0 / 2) e^{-Gamma} (delta' - Gamma' (1 + delta))`.
pub fn sbm_energy_current<T: Real>(omega0: T, rates: &SbmRates<T>, integrals: &SbmIntegrals<T>) -> T {
    T::lit(0.5) * omega0 * (-integrals.gamma).exp() * population_drive(rates, integrals)
}
