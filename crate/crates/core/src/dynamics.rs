//! Time-local qubit master equations in Bloch form and an adaptive
//! Dormand-Prince 5(4) integrator used as an independent oracle.
//!
//! A generator `K(t) rho = -i [H(t), rho] + sum_i gamma_i(t) D[A_i] rho` with
//! `H = h(t) . sigma / 2` and `D[A] rho = A rho A^+ - {A^+ A, rho} / 2` acts
//! on the Bloch vector as `dB/dt = h x B + M(t) B + b(t)`.

use num_complex::Complex;

use crate::bloch::{mat2, BlochState, Matrix2};
use crate::error::{Error, Result};
use crate::jc::{self, JcParams};
use crate::Real;

/// Affine Bloch-form action `B -> M B + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochGenerator<T> {
    pub m: [[T; 3]; 3],
    pub b: [T; 3],
}

impl<T: Real> BlochGenerator<T> {
    pub fn zero() -> Self {
        Self {
            m: [[T::zero(); 3]; 3],
            b: [T::zero(); 3],
        }
    }

    pub fn apply(&self, v: &BlochState<T>) -> [T; 3] {
        let mut out = self.b;
        for (k, row) in self.m.iter().enumerate() {
            out[k] += row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    fn add_scaled(&mut self, other: &Self, k: T) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += k * other.m[i][j];
            }
            self.b[i] += k * other.b[i];
        }
    }
}

fn dissipate<T: Real>(a: &Matrix2<T>, x: &Matrix2<T>) -> Matrix2<T> {
    let ad = mat2::dagger(a);
    let ada = mat2::mul(&ad, a);
    let jump = mat2::mul(&mat2::mul(a, x), &ad);
    let anti = mat2::add(&mat2::mul(&ada, x), &mat2::mul(x, &ada));
    mat2::add(&jump, &mat2::scale(&anti, Complex::new(T::lit(-0.5), T::zero())))
}

/// Unit-rate Bloch form of `D[A]`:
/// `M_kl = Re Tr(sigma_k D[A] sigma_l) / 2`, `b_k = Re Tr(sigma_k D[A] I) / 2`.
pub fn dissipator_bloch_form<T: Real>(a: &Matrix2<T>) -> BlochGenerator<T> {
    let paulis = mat2::pauli::<T>();
    let half = T::lit(0.5);
    let mut gen = BlochGenerator::zero();
    let images: Vec<Matrix2<T>> = paulis.iter().map(|s| dissipate(a, s)).collect();
    let image_i = dissipate(a, &mat2::identity());
    for (k, sk) in paulis.iter().enumerate() {
        for (l, img) in images.iter().enumerate() {
            gen.m[k][l] = half * mat2::trace(&mat2::mul(sk, img)).re;
        }
        gen.b[k] = half * mat2::trace(&mat2::mul(sk, &image_i)).re;
    }
    gen
}

/// Raising operator `|e><g|`.
pub fn sigma_plus<T: Real>() -> Matrix2<T> {
    let mut m = mat2::zero();
    m[0][1] = Complex::new(T::one(), T::zero());
    m
}

/// Lowering operator `|g><e|`.
pub fn sigma_minus<T: Real>() -> Matrix2<T> {
    mat2::dagger(&sigma_plus())
}

pub fn sigma_z<T: Real>() -> Matrix2<T> {
    mat2::pauli()[2]
}

type RateFn<'a, T> = Box<dyn Fn(T) -> T + Send + Sync + 'a>;
type FieldFn<'a, T> = Box<dyn Fn(T) -> [T; 3] + Send + Sync + 'a>;

struct Channel<'a, T> {
    rate: RateFn<'a, T>,
    operator: Matrix2<T>,
    unit: BlochGenerator<T>,
}

/// Effective field `h(t)` plus Lindblad channels `(gamma_i(t), A_i)`.
pub struct TimeLocalGenerator<'a, T> {
    field: FieldFn<'a, T>,
    channels: Vec<Channel<'a, T>>,
}

impl<'a, T: Real> Default for TimeLocalGenerator<'a, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a, T: Real> TimeLocalGenerator<'a, T> {
    /// The zero generator.
    pub fn new() -> Self {
        Self {
            field: Box::new(|_| [T::zero(); 3]),
            channels: Vec::new(),
        }
    }

    pub fn with_field<F>(mut self, field: F) -> Self
    where
        F: Fn(T) -> [T; 3] + Send + Sync + 'a,
    {
        self.field = Box::new(field);
        self
    }

    pub fn with_constant_field(self, h: [T; 3]) -> Self {
        self.with_field(move |_| h)
    }

    pub fn with_channel<R>(mut self, rate: R, operator: Matrix2<T>) -> Self
    where
        R: Fn(T) -> T + Send + Sync + 'a,
    {
        self.channels.push(Channel {
            rate: Box::new(rate),
            unit: dissipator_bloch_form(&operator),
            operator,
        });
        self
    }

    /// Spin-boson generator in the Schrodinger picture: `H = omega0 sigma_z / 2`,
    /// pumping `gamma_plus` on `sigma_+` and decay `gamma_minus` on `sigma_-`.
    pub fn spin_boson<P, M>(omega0: T, gamma_plus: P, gamma_minus: M) -> Self
    where
        P: Fn(T) -> T + Send + Sync + 'a,
        M: Fn(T) -> T + Send + Sync + 'a,
    {
        Self::new()
            .with_constant_field([T::zero(), T::zero(), omega0])
            .with_channel(gamma_plus, sigma_plus())
            .with_channel(gamma_minus, sigma_minus())
    }

    /// Damped Jaynes-Cummings generator in the frame rotating at `omega0`:
    /// decay `gamma(t)` on `sigma_-`, no coherent part.
    ///
    /// The rate diverges at zeros of `G`; see [`jc_oracle`].
    pub fn jaynes_cummings(p: JcParams<T>) -> Self {
        Self::new().with_channel(move |t| jc::jc_rate_flagged(&p, t), sigma_minus())
    }

    /// Time-independent semigroup with decay, pumping and pure dephasing
    /// (`D[sigma_z]` at rate `dephasing`).
    pub fn semigroup(omega0: T, decay: T, pumping: T, dephasing: T) -> Self {
        Self::new()
            .with_constant_field([T::zero(), T::zero(), omega0])
            .with_channel(move |_| decay, sigma_minus())
            .with_channel(move |_| pumping, sigma_plus())
            .with_channel(move |_| dephasing, sigma_z())
    }

    pub fn field(&self, t: T) -> [T; 3] {
        (self.field)(t)
    }

    pub fn rates(&self, t: T) -> Vec<T> {
        self.channels.iter().map(|c| (c.rate)(t)).collect()
    }

    pub fn operators(&self) -> impl Iterator<Item = &Matrix2<T>> {
        self.channels.iter().map(|c| &c.operator)
    }

    /// Dissipative part `M(t)`, `b(t)`.
    pub fn bloch_form(&self, t: T) -> BlochGenerator<T> {
        let mut gen = BlochGenerator::zero();
        for c in &self.channels {
            gen.add_scaled(&c.unit, (c.rate)(t));
        }
        gen
    }
}

/// `dB/dt = h(t) x B + M(t) B + b(t)`.
pub fn bloch_rhs<T: Real>(gen: &TimeLocalGenerator<'_, T>, t: T, b: &BlochState<T>) -> [T; 3] {
    let h = BlochState(gen.field(t));
    let precession = h.cross(b);
    let mut out = gen.bloch_form(t).apply(b);
    for k in 0..3 {
        out[k] += precession[k];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    /// `None` picks the first step automatically.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_step: T::lit(0.1),
            initial_step: None,
            max_steps: 2_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: T) -> Self {
        self.max_step = max_step;
        self
    }

    fn validate(&self) -> Result<()> {
        crate::error::ensure_positive("rel_tol", self.rel_tol)?;
        crate::error::ensure_positive("abs_tol", self.abs_tol)?;
        crate::error::ensure_positive("max_step", self.max_step)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combine<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for &(c, k) in terms {
        let hc = h * T::lit(c);
        for i in 0..N {
            out[i] += hc * k[i];
        }
    }
    out
}

fn all_finite<T: Real, const N: usize>(v: &[T; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn scaled_norm<T: Real, const N: usize>(v: &[T; N], scale: &[T; N]) -> T {
    let sum: T = (0..N).map(|i| (v[i] / scale[i]).powi(2)).sum();
    (sum / T::from_usize_lossy(N)).sqrt()
}

/// Adaptive DOPRI5 integration of `y' = f(t, y)` sampled on `grid` by
/// dense output. `grid[0]` is the initial time.
pub fn dopri5<T, const N: usize, F>(
    f: F,
    y0: [T; N],
    grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<(Vec<[T; N]>, IntegratorStats)>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    cfg.validate()?;
    if grid.is_empty() {
        return Ok((Vec::new(), IntegratorStats::default()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("output grid must be strictly increasing".into()));
    }
    let mut stats = IntegratorStats::default();
    let t_end = grid[grid.len() - 1];
    let mut t = grid[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    if !all_finite(&k1) {
        return Err(Error::NonFiniteDerivative { t: t.as_f64() });
    }
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut next = 1;

    let scale_of = |a: &[T; N], b: &[T; N]| -> [T; N] {
        let mut s = [T::zero(); N];
        for i in 0..N {
            s[i] = cfg.abs_tol + cfg.rel_tol * a[i].abs().max(b[i].abs());
        }
        s
    };

    let mut h = match cfg.initial_step {
        Some(h0) => h0,
        None => {
            let sk = scale_of(&y, &y);
            let d0 = scaled_norm(&y, &sk);
            let d1 = scaled_norm(&k1, &sk);
            let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
                T::lit(1e-6)
            } else {
                T::lit(0.01) * d0 / d1
            }
            .min(cfg.max_step);
            let y1 = combine(&y, h0, &[(1.0, &k1)]);
            let f1 = f(t + h0, &y1);
            stats.evaluations += 1;
            let mut diff = [T::zero(); N];
            for i in 0..N {
                diff[i] = f1[i] - k1[i];
            }
            let d2 = scaled_norm(&diff, &sk) / h0;
            let dm = d1.max(d2);
            let h1 = if !(dm > T::lit(1e-15)) {
                T::lit(1e-6).max(h0 * T::lit(1e-3))
            } else {
                (T::lit(0.01) / dm).powf(T::lit(0.2))
            };
            (T::lit(100.0) * h0).min(h1)
        }
    };
    let mut last_rejected = false;

    while next < grid.len() {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::TooManySteps {
                t: t.as_f64(),
                steps: cfg.max_steps,
            });
        }
        let h_min = T::lit(16.0) * T::epsilon() * t.abs().max(T::one());
        let remaining = t_end - t;
        h = h.min(cfg.max_step);
        if h >= remaining || remaining - h < h_min {
            h = remaining;
        }
        if h < h_min && remaining >= h_min {
            return Err(Error::StepSizeUnderflow { t: t.as_f64() });
        }

        let k2 = f(t + h * T::lit(C2), &combine(&y, h, &[(A21, &k1)]));
        let k3 = f(t + h * T::lit(C3), &combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + h * T::lit(C4),
            &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + h * T::lit(C5),
            &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);
        stats.evaluations += 6;

        let stages_finite = [&k2, &k3, &k4, &k5, &k6, &k7].iter().all(|k| all_finite(k));
        if !stages_finite || !all_finite(&y_new) {
            stats.rejected += 1;
            last_rejected = true;
            h *= T::lit(0.25);
            continue;
        }

        let err_vec = combine(
            &[T::zero(); N],
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let err = scaled_norm(&err_vec, &scale_of(&y, &y_new));

        if err <= T::one() {
            stats.accepted += 1;
            let t_new = if h == remaining { t_end } else { t + h };
            // dense output coefficients
            let mut r2 = [T::zero(); N];
            let mut r3 = [T::zero(); N];
            let mut r4 = [T::zero(); N];
            for i in 0..N {
                r2[i] = y_new[i] - y[i];
                r3[i] = h * k1[i] - r2[i];
                r4[i] = r2[i] - h * k7[i] - r3[i];
            }
            let r5 = combine(
                &[T::zero(); N],
                h,
                &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
            );
            while next < grid.len() && grid[next] <= t_new {
                if grid[next] == t_new {
                    out.push(y_new);
                } else {
                    let th = (grid[next] - t) / h;
                    let th1 = T::one() - th;
                    let mut v = [T::zero(); N];
                    for i in 0..N {
                        v[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                    }
                    out.push(v);
                }
                next += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            let grow = if err == T::zero() {
                T::lit(10.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(10.0))
            };
            let grow = if last_rejected { grow.min(T::one()) } else { grow };
            h *= grow.max(T::lit(0.2));
            last_rejected = false;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2));
        }
    }
    Ok((out, stats))
}

/// Bloch trajectory of an integrated generator.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<T> {
    pub t: Vec<T>,
    pub states: Vec<BlochState<T>>,
    /// `dB/dt` evaluated from the generator at each sample.
    pub derivatives: Vec<[T; 3]>,
    pub stats: IntegratorStats,
}

/// Integrates the generator from `b0` at `grid[0]` and samples on `grid`.
pub fn integrate<T: Real>(
    gen: &TimeLocalGenerator<'_, T>,
    b0: BlochState<T>,
    grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<OdeSolution<T>> {
    if !b0.is_physical(T::lit(1e-12)) {
        return Err(Error::Domain(format!(
            "initial Bloch vector has |B| = {} > 1",
            b0.norm().as_f64()
        )));
    }
    let (ys, stats) = dopri5(|t, y| bloch_rhs(gen, t, &BlochState(*y)), b0.0, grid, cfg)?;
    let states: Vec<BlochState<T>> = ys.into_iter().map(BlochState).collect();
    let derivatives = grid.iter().zip(&states).map(|(&t, b)| bloch_rhs(gen, t, b)).collect();
    Ok(OdeSolution {
        t: grid.to_vec(),
        states,
        derivatives,
        stats,
    })
}

/// Numerical Jaynes-Cummings reference on `grid`.
///
/// Integrates the time-local equation segment by segment, stopping `guard`
/// before each zero of `G` and restarting `guard` after it from the
/// closed-form state; samples inside a guard band are `None`.
pub fn jc_oracle<T: Real>(
    p: &JcParams<T>,
    eta: T,
    grid: &[T],
    cfg: &IntegratorConfig<T>,
    guard: T,
) -> Result<Vec<Option<BlochState<T>>>> {
    crate::error::ensure_positive("guard", guard)?;
    let Some(&t_last) = grid.last() else {
        return Ok(Vec::new());
    };
    let gen = TimeLocalGenerator::jaynes_cummings(*p);
    let zeros = jc::g_zeros(p, t_last + guard);
    let mut segments = Vec::with_capacity(zeros.len() + 1);
    let mut start = grid[0];
    for &z in &zeros {
        segments.push((start, z - guard));
        start = z + guard;
    }
    segments.push((start, t_last + guard));

    let mut out = vec![None; grid.len()];
    for (a, b) in segments {
        let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= a && grid[i] < b).collect();
        if idx.is_empty() {
            continue;
        }
        let mut seg_grid = Vec::with_capacity(idx.len() + 1);
        let offset = usize::from(grid[idx[0]] > a);
        if offset == 1 {
            seg_grid.push(a);
        }
        seg_grid.extend(idx.iter().map(|&i| grid[i]));
        let b0 = jc::jc_rho(p, eta, a)?;
        let sol = integrate(&gen, b0, &seg_grid, cfg)?;
        for (k, &i) in idx.iter().enumerate() {
            out[i] = Some(sol.states[k + offset]);
        }
    }
    Ok(out)
}
