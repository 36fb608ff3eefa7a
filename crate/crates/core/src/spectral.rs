//! Bath spectral densities, thermal occupation and the noise/dissipation
//! kernels of a linearly coupled bosonic bath.
//!
//! Units: `hbar = k_B = 1`; temperatures are energies.

use num_complex::Complex;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::quad::{graded_breakpoints, integrate, Estimate, QuadConfig};
use crate::special::{gamma, hurwitz_zeta};
use crate::Real;

/// Spectral density `J(omega)` of the bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDensity<T> {
    /// `J(w) = gamma0 lambda^2 / (2 pi ((omega0 - w)^2 + lambda^2))`.
    Lorentzian { gamma0: T, lambda: T, omega0: T },
    /// `J(w) = pi alpha w^s omega_c^(1-s) exp(-w / omega_c)`.
    OhmicFamily { alpha: T, s: T, omega_c: T },
}

impl<T: Real> SpectralDensity<T> {
    pub fn lorentzian(gamma0: T, lambda: T, omega0: T) -> Result<Self> {
        ensure_positive("gamma0", gamma0)?;
        ensure_positive("lambda", lambda)?;
        ensure_positive("omega0", omega0)?;
        Ok(Self::Lorentzian { gamma0, lambda, omega0 })
    }

    pub fn ohmic_family(alpha: T, s: T, omega_c: T) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("s", s)?;
        ensure_positive("omega_c", omega_c)?;
        Ok(Self::OhmicFamily { alpha, s, omega_c })
    }

    /// Evaluates `J(omega)`. The Ohmic family is only defined for `omega >= 0`.
    pub fn eval_j(&self, omega: T) -> Result<T> {
        match *self {
            Self::Lorentzian { gamma0, lambda, omega0 } => {
                let detuning = omega0 - omega;
                Ok(gamma0 * lambda * lambda / (T::lit(2.0) * T::PI() * (detuning * detuning + lambda * lambda)))
            }
            Self::OhmicFamily { .. } => {
                if omega < T::zero() || !omega.is_finite() {
                    return Err(Error::Domain(format!(
                        "Ohmic-family spectral density evaluated at omega = {}",
                        omega.as_f64()
                    )));
                }
                Ok(self.j_unchecked(omega))
            }
        }
    }

    /// `J(omega)` without domain checks; callers guarantee `omega >= 0`
    /// for the Ohmic family.
    #[inline]
    pub(crate) fn j_unchecked(&self, omega: T) -> T {
        match *self {
            Self::Lorentzian { gamma0, lambda, omega0 } => {
                let detuning = omega0 - omega;
                gamma0 * lambda * lambda / (T::lit(2.0) * T::PI() * (detuning * detuning + lambda * lambda))
            }
            Self::OhmicFamily { alpha, s, omega_c } => {
                if omega == T::zero() {
                    return T::zero();
                }
                T::PI() * alpha * omega.powf(s) * omega_c.powf(T::one() - s) * (-omega / omega_c).exp()
            }
        }
    }

    /// Upper frequency at which the exponential cutoff makes the remaining
    /// tail negligible: `omega_c * max(50, 10 s)`.
    pub fn frequency_cutoff(&self) -> Option<T> {
        match *self {
            Self::OhmicFamily { s, omega_c, .. } => Some(omega_c * T::lit(50.0).max(T::lit(10.0) * s)),
            Self::Lorentzian { .. } => None,
        }
    }
}

/// Bose-Einstein occupation `1 / (exp(omega / T) - 1)`, exactly zero at `T = 0`.
pub fn bose_occupation<T: Real>(temperature: T, omega: T) -> Result<T> {
    ensure_non_negative("temperature", temperature)?;
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "Bose occupation needs omega > 0, got {}",
            omega.as_f64()
        )));
    }
    if temperature == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::one() / (omega / temperature).exp_m1())
}

/// `coth(omega / 2T) = 1 + 2 n_B(omega)`, equal to 1 at zero temperature.
///
/// Below `omega < 1e-6 T` the Laurent series `1/x + x/3` is used.
#[inline]
pub fn thermal_factor<T: Real>(temperature: T, omega: T) -> T {
    if temperature == T::zero() {
        return T::one();
    }
    let x = omega / (T::lit(2.0) * temperature);
    if omega < T::lit(1e-6) * temperature {
        T::one() / x + x / T::lit(3.0)
    } else {
        T::one() + T::lit(2.0) / (T::lit(2.0) * x).exp_m1()
    }
}

/// Noise kernel `D1` and dissipation kernel `D` of a bath at temperature `T`:
///
/// `D1(tau) = 2 int_0^inf J(w) coth(w / 2T) cos(w tau) dw`,
/// `D(tau)  = 2 int_0^inf J(w) sin(w tau) dw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathKernels<T> {
    pub spectral: SpectralDensity<T>,
    pub temperature: T,
    pub quad: QuadConfig<T>,
}

impl<T: Real> BathKernels<T> {
    pub fn new(spectral: SpectralDensity<T>, temperature: T) -> Result<Self> {
        ensure_non_negative("temperature", temperature)?;
        Ok(Self {
            spectral,
            temperature,
            quad: QuadConfig::default(),
        })
    }

    pub fn with_quad(mut self, quad: QuadConfig<T>) -> Self {
        self.quad = quad;
        self
    }

    /// `J(w) coth(w / 2T)` on `w >= 0`; finite at `w = 0` only for `s >= 1`.
    #[inline]
    pub fn noise_weight(&self, omega: T) -> T {
        if omega == T::zero() {
            return T::zero();
        }
        self.spectral.j_unchecked(omega) * thermal_factor(self.temperature, omega)
    }

    fn frequency_panels(&self, tau: T, extra: &[T]) -> Result<Vec<T>> {
        let upper = self.spectral.frequency_cutoff().ok_or(Error::Unsupported(
            "bath kernels require an Ohmic-family spectral density",
        ))?;
        let SpectralDensity::OhmicFamily { omega_c, .. } = self.spectral else {
            unreachable!()
        };
        // quarter-period panels of the fastest oscillation, never coarser
        // than half the cutoff scale
        let osc = T::PI() / (T::lit(4.0) * tau.abs().max(T::lit(1e-300)));
        let width = osc.min(omega_c * T::lit(0.5));
        Ok(graded_breakpoints(upper, width, extra))
    }

    /// Noise kernel `D1(tau)` by adaptive quadrature.
    pub fn kernel_d1(&self, tau: T) -> Result<Estimate<T>> {
        let pts = self.frequency_panels(tau, &[])?;
        let two = T::lit(2.0);
        integrate(|w| two * self.noise_weight(w) * (w * tau).cos(), &pts, &self.quad)
    }

    /// Dissipation kernel `D(tau)` by adaptive quadrature.
    pub fn kernel_d(&self, tau: T) -> Result<Estimate<T>> {
        let pts = self.frequency_panels(tau, &[])?;
        let two = T::lit(2.0);
        integrate(
            |w| two * self.spectral.j_unchecked(w) * (w * tau).sin(),
            &pts,
            &self.quad,
        )
    }

    /// `D1(tau)` at zero temperature (`coth -> 1`), by quadrature.
    pub fn kernel_d1_vacuum(&self, tau: T) -> Result<Estimate<T>> {
        let vacuum = Self {
            temperature: T::zero(),
            ..*self
        };
        vacuum.kernel_d1(tau)
    }

    /// Semi-infinite quadrature of `weight(w) * g(w)` over the bath band
    /// with panels resolving oscillations of frequency `t` and extra
    /// breakpoints at the given resonances.
    pub(crate) fn band_integral<F: Fn(T) -> T>(&self, t: T, resonances: &[T], integrand: F) -> Result<Estimate<T>> {
        let pts = self.frequency_panels(t, resonances)?;
        integrate(integrand, &pts, &self.quad)
    }

    /// Closed-form `D1(tau)` and `D(tau)` for the Ohmic family.
    ///
    /// With `z = 1/omega_c - i tau` and `p = s + 1`,
    /// `int_0^inf w^s e^{-w/omega_c} e^{i w tau} dw = Gamma(p) z^{-p}` and the
    /// thermal part expands `coth = 1 + 2 sum_k e^{-k w / T}`, which sums to a
    /// Hurwitz zeta function with complex shift.
    pub fn kernels_closed_form(&self, tau: T) -> Result<(T, T)> {
        let SpectralDensity::OhmicFamily { alpha, s, omega_c } = self.spectral else {
            return Err(Error::Unsupported(
                "closed-form kernels exist only for the Ohmic family",
            ));
        };
        let p = s + T::one();
        let prefactor = T::lit(2.0) * T::PI() * alpha * omega_c.powf(T::one() - s) * gamma(p);
        let z = Complex::new(omega_c.recip(), -tau);
        let vacuum = z.powf(-p);
        let mut noise = vacuum;
        if self.temperature > T::zero() {
            let t = self.temperature;
            let q = Complex::new(T::one(), T::zero()) + z * t;
            noise += hurwitz_zeta(p, q) * (T::lit(2.0) * t.powf(p));
        }
        Ok((prefactor * noise.re, prefactor * vacuum.im))
    }

    pub fn kernel_d1_closed(&self, tau: T) -> Result<T> {
        Ok(self.kernels_closed_form(tau)?.0)
    }

    pub fn kernel_d_closed(&self, tau: T) -> Result<T> {
        Ok(self.kernels_closed_form(tau)?.1)
    }
}
