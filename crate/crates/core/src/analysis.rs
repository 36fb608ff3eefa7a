//! Trajectory post-processing: backflow intervals, relation residuals and
//! regime classification.

use std::fmt;

use crate::bloch::BlochState;
use crate::dynamics::OdeSolution;
use crate::error::{Error, Result};
use crate::jc::{self, JcParams};
use crate::qfi;
use crate::sbm::{self, SbmSolution};
use crate::Real;

/// Default positivity threshold for flows, relative to each series' peak
/// magnitude.
pub const DEFAULT_THRESHOLD: f64 = 1e-10;

/// `|B3|` below which the spin-boson relation is not evaluated.
pub const SIGMA_Z_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Jc,
    Sbm,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Jc => "jc",
            Model::Sbm => "sbm",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    JcClosed,
    SbmAnalytic,
    OdeOracle,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::JcClosed => "jc-closed",
            Provenance::SbmAnalytic => "sbm-analytic",
            Provenance::OdeOracle => "ode-oracle",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named per-sample column.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub name: &'static str,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub model: Model,
    pub provenance: Provenance,
    pub omega0: T,
    pub t: Vec<T>,
    pub bloch: Vec<BlochState<T>>,
    pub f_m: Vec<T>,
    pub i_q: Vec<T>,
    pub i_e: Vec<T>,
    pub rates: Vec<Series<T>>,
    /// Model-specific diagnostics.
    pub extras: Vec<Series<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn sigma_z(&self) -> Vec<T> {
        self.bloch.iter().map(|b| b.z()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        let lens = [self.bloch.len(), self.f_m.len(), self.i_q.len(), self.i_e.len()];
        let columns = self.rates.iter().chain(&self.extras).map(|s| s.values.len());
        if lens.iter().copied().chain(columns).any(|l| l != n) {
            return Err(Error::Domain("trajectory columns differ in length".into()));
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("trajectory times must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Damped Jaynes-Cummings trajectory from the closed form for the
    /// optimal input `sin(eta) = 1`.
    ///
    /// `F_M = G^2` (phase about `z`), `I_Q = 2 G G'`, `I_E = w0 G G'`. The
    /// full `|B|^2` and its flow are kept as extras. Rates at zeros of `G`
    /// are `+-inf`.
    pub fn from_jc(p: &JcParams<T>, grid: &[T]) -> Result<Self> {
        let n = grid.len();
        let mut out = Self::empty(Model::Jc, Provenance::JcClosed, p.omega0, n);
        let mut rate = Vec::with_capacity(n);
        let mut norm_sq = Vec::with_capacity(n);
        let mut norm_flow = Vec::with_capacity(n);
        for &t in grid {
            let st = jc::g_closed_form(p, t)?;
            let g2 = st.g * st.g;
            let flow = T::lit(2.0) * st.g * st.g_dot;
            let b = BlochState::new(st.g, T::zero(), g2 - T::one());
            out.t.push(t);
            out.bloch.push(b);
            out.f_m.push(g2);
            out.i_q.push(flow);
            out.i_e.push(p.omega0 * st.g * st.g_dot);
            rate.push(jc::jc_rate_flagged(p, t));
            norm_sq.push(qfi::max_qfi(&b));
            norm_flow.push(flow * (T::lit(2.0) * g2 - T::one()));
        }
        out.rates.push(Series {
            name: "gamma",
            values: rate,
        });
        out.extras.push(Series {
            name: "G",
            values: out.bloch.iter().map(|b| b.x()).collect(),
        });
        out.extras.push(Series {
            name: "B_norm_sq",
            values: norm_sq,
        });
        out.extras.push(Series {
            name: "I_B_norm_sq",
            values: norm_flow,
        });
        out.validate()?;
        Ok(out)
    }

    /// Spin-boson trajectory at the output samples of `sol` for the excited
    /// initial state (`cos(eta) = 1`), with analytic flows.
    pub fn from_sbm(sol: &SbmSolution<T>) -> Result<Self> {
        let n = sol.sample_count();
        let mut out = Self::empty(Model::Sbm, Provenance::SbmAnalytic, sol.omega0, n);
        let names = ["gamma_plus", "gamma_minus", "gamma_s", "gamma_d"];
        let mut rate_cols: [Vec<T>; 4] = Default::default();
        let mut big_gamma = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n);
        for node in sol.samples() {
            let (r, i) = (node.rates(), node.integrals());
            let b = sbm::sbm_bloch(sol.omega0, T::zero(), &i);
            out.t.push(node.t);
            out.bloch.push(b);
            out.f_m.push(qfi::max_qfi(&b));
            out.i_q.push(sbm::sbm_qfi_flow(&r, &i));
            out.i_e.push(sbm::sbm_energy_current(sol.omega0, &r, &i));
            for (col, v) in rate_cols
                .iter_mut()
                .zip([r.gamma_plus, r.gamma_minus, r.gamma_s, r.gamma_d])
            {
                col.push(v);
            }
            big_gamma.push(i.gamma);
            delta.push(i.delta);
        }
        for (name, values) in names.into_iter().zip(rate_cols) {
            out.rates.push(Series { name, values });
        }
        out.extras.push(Series {
            name: "Gamma",
            values: big_gamma,
        });
        out.extras.push(Series {
            name: "delta",
            values: delta,
        });
        out.validate()?;
        Ok(out)
    }

    /// Trajectory from an integrated master equation. `fisher` maps a state to
    /// `F_M`; `I_Q` is its finite-difference derivative and
    /// `I_E = (w0 / 2) dB3/dt` from the generator.
    pub fn from_ode<F>(model: Model, omega0: T, sol: &OdeSolution<T>, fisher: F) -> Result<Self>
    where
        F: Fn(&BlochState<T>) -> T,
    {
        let f_m: Vec<T> = sol.states.iter().map(&fisher).collect();
        let i_q = qfi::qfi_flow_numeric(&sol.t, &f_m)?;
        let half_w = T::lit(0.5) * omega0;
        let out = Self {
            model,
            provenance: Provenance::OdeOracle,
            omega0,
            t: sol.t.clone(),
            bloch: sol.states.clone(),
            f_m,
            i_q,
            i_e: sol.derivatives.iter().map(|d| half_w * d[2]).collect(),
            rates: Vec::new(),
            extras: Vec::new(),
        };
        out.validate()?;
        Ok(out)
    }

    fn empty(model: Model, provenance: Provenance, omega0: T, n: usize) -> Self {
        Self {
            model,
            provenance,
            omega0,
            t: Vec::with_capacity(n),
            bloch: Vec::with_capacity(n),
            f_m: Vec::with_capacity(n),
            i_q: Vec::with_capacity(n),
            i_e: Vec::with_capacity(n),
            rates: Vec::new(),
            extras: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Markovian,
    NmWithEnergyBackflow,
    NmWithoutEnergyBackflow,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Markovian => "markovian",
            Classification::NmWithEnergyBackflow => "nm_with_energy_backflow",
            Classification::NmWithoutEnergyBackflow => "nm_without_energy_backflow",
        }
    }

    pub fn is_non_markovian(&self) -> bool {
        !matches!(self, Classification::Markovian)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalReport<T> {
    /// Relative threshold: a sample counts as positive when it exceeds
    /// `threshold * max |series|`.
    pub threshold: T,
    pub qfi_backflow_intervals: Vec<(T, T)>,
    pub energy_backflow_intervals: Vec<(T, T)>,
    pub classification: Classification,
    /// Normalised relation residual of the trajectory's model.
    pub relation_residual_max: T,
    /// First time at which `<sigma_z>` turns from positive to negative.
    pub sigma_z_sign_change: Option<T>,
    pub span: (T, T),
    /// Per-sample positivity used for overlap measures.
    pub support: SampleSupport<T>,
}

/// Sample times and which flows exceed their threshold there.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSupport<T> {
    pub t: Vec<T>,
    pub qfi: Vec<bool>,
    pub energy: Vec<bool>,
}

impl<T: Real> SampleSupport<T> {
    fn weight(&self, i: usize) -> T {
        let n = self.t.len();
        let lo = self.t[i.saturating_sub(1)];
        let hi = self.t[(i + 1).min(n - 1)];
        T::lit(0.5) * (hi - lo)
    }
}

/// Maximal runs of samples with `v > threshold`. Ends are the linearly
/// interpolated zero crossings when the neighbouring sample is negative,
/// otherwise that neighbour's time.
pub fn positive_intervals<T: Real>(t: &[T], v: &[T], threshold: T) -> Vec<(T, T)> {
    let n = t.len().min(v.len());
    let positive = |i: usize| v[i] > threshold;
    let crossing = |i: usize, j: usize| {
        // i non-positive, j positive
        if v[i] < T::zero() {
            t[i] + (t[j] - t[i]) * v[i] / (v[i] - v[j])
        } else {
            t[i]
        }
    };
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..n {
        match (start, positive(i)) {
            (None, true) => start = Some(if i == 0 { t[0] } else { crossing(i - 1, i) }),
            (Some(s), false) => {
                out.push((s, crossing(i, i - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, t[n - 1]));
    }
    out
}

/// Joins intervals separated by less than `gap`.
pub fn merge_intervals<T: Real>(intervals: &[(T, T)], gap: T) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::with_capacity(intervals.len());
    for &(a, b) in intervals {
        match out.last_mut() {
            Some(last) if a - last.1 < gap => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

pub fn total_measure<T: Real>(intervals: &[(T, T)]) -> T {
    intervals.iter().fold(T::zero(), |acc, &(a, b)| acc + (b - a))
}

fn intersection_measure<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> T {
    let (mut i, mut j) = (0, 0);
    let mut total = T::zero();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

fn clip<T: Real>(intervals: &[(T, T)], window: (T, T)) -> Vec<(T, T)> {
    intervals
        .iter()
        .filter_map(|&(a, b)| {
            let (lo, hi) = (a.max(window.0), b.min(window.1));
            (hi > lo).then_some((lo, hi))
        })
        .collect()
}

/// First positive-to-negative crossing of `<sigma_z>`, linearly interpolated.
pub fn sigma_z_sign_change<T: Real>(traj: &Trajectory<T>) -> Option<T> {
    let z = traj.sigma_z();
    (1..z.len()).find_map(|i| {
        (z[i - 1] > T::zero() && z[i] <= T::zero())
            .then(|| traj.t[i - 1] + (traj.t[i] - traj.t[i - 1]) * z[i - 1] / (z[i - 1] - z[i]))
    })
}

/// Positive-flow intervals of `I_Q` and `I_E` and the resulting regime.
///
/// Samples count as positive above `threshold` times the peak magnitude of
/// their own series, so the result does not depend on the units of either flow.
pub fn detect_intervals<T: Real>(traj: &Trajectory<T>, threshold: T) -> Result<IntervalReport<T>> {
    if traj.len() < 3 {
        return Err(Error::Domain("interval detection needs at least 3 samples".into()));
    }
    if !(threshold >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            value: threshold.as_f64(),
            reason: "must be non-negative",
        });
    }
    traj.validate()?;
    let level = |v: &[T]| threshold * v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let (level_q, level_e) = (level(&traj.i_q), level(&traj.i_e));
    let qfi = positive_intervals(&traj.t, &traj.i_q, level_q);
    let energy = positive_intervals(&traj.t, &traj.i_e, level_e);
    let support = SampleSupport {
        t: traj.t.clone(),
        qfi: traj.i_q.iter().map(|&v| v > level_q).collect(),
        energy: traj.i_e.iter().map(|&v| v > level_e).collect(),
    };
    let classification = if qfi.is_empty() {
        Classification::Markovian
    } else if energy.is_empty() {
        Classification::NmWithoutEnergyBackflow
    } else {
        Classification::NmWithEnergyBackflow
    };
    Ok(IntervalReport {
        threshold,
        qfi_backflow_intervals: qfi,
        energy_backflow_intervals: energy,
        classification,
        relation_residual_max: verify_relation(traj, traj.model).residual,
        sigma_z_sign_change: sigma_z_sign_change(traj),
        span: (traj.t[0], traj.t[traj.len() - 1]),
        support,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationReport<T> {
    /// `max |I_E - predicted| / max |I_E|`.
    pub residual: T,
    /// Unnormalised maximum deviation.
    pub max_abs: T,
    pub checked: usize,
    /// Samples skipped because `|B3|` is below the cutoff.
    pub excluded: usize,
}

/// Checks `I_E = (w0/2) I_Q` (Jaynes-Cummings) or `I_E = w0 I_Q / (4 B3)`
/// (spin-boson, samples with `|B3| > 1e-9`).
pub fn verify_relation<T: Real>(traj: &Trajectory<T>, model: Model) -> RelationReport<T> {
    let w0 = traj.omega0;
    let mut max_abs = T::zero();
    let mut checked = 0;
    let mut excluded = 0;
    for i in 0..traj.len() {
        let predicted = match model {
            Model::Jc => T::lit(0.5) * w0 * traj.i_q[i],
            Model::Sbm => {
                let b3 = traj.bloch[i].z();
                if b3.abs() <= T::lit(SIGMA_Z_CUTOFF) {
                    excluded += 1;
                    continue;
                }
                w0 * traj.i_q[i] / (T::lit(4.0) * b3)
            }
        };
        checked += 1;
        max_abs = max_abs.max((traj.i_e[i] - predicted).abs());
    }
    let scale = traj.i_e.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    RelationReport {
        residual: if scale > T::zero() { max_abs / scale } else { max_abs },
        max_abs,
        checked,
        excluded,
    }
}

/// Samples violating `sign(I_E) = sign(I_Q)` (Jaynes-Cummings) or
/// `sign(I_E) = sign(I_Q) sign(B3)` (spin-boson, `B3 != 0`).
pub fn sign_lock_violations<T: Real>(traj: &Trajectory<T>, model: Model) -> usize {
    let sign = |x: T| {
        if x > T::zero() {
            1
        } else if x < T::zero() {
            -1
        } else {
            0
        }
    };
    (0..traj.len())
        .filter(|&i| {
            let expected = match model {
                Model::Jc => sign(traj.i_q[i]),
                Model::Sbm => {
                    let b3 = sign(traj.bloch[i].z());
                    if b3 == 0 {
                        return false;
                    }
                    sign(traj.i_q[i]) * b3
                }
            };
            sign(traj.i_e[i]) != expected
        })
        .count()
}

/// Fraction of the positive-`I_Q` measure that is also positive-`I_E`;
/// `None` without any QFI backflow.
///
/// Measured on the samples with trapezoid weights, so flows whose signs agree
/// at every sample give exactly `1`.
pub fn overlap_correlation<T: Real>(report: &IntervalReport<T>) -> Option<T> {
    overlap_correlation_within(report, report.span)
}

/// [`overlap_correlation`] restricted to samples with `t` in `window`.
pub fn overlap_correlation_within<T: Real>(report: &IntervalReport<T>, window: (T, T)) -> Option<T> {
    let sup = &report.support;
    let mut total = T::zero();
    let mut both = T::zero();
    for i in (0..sup.t.len()).filter(|&i| sup.t[i] >= window.0 && sup.t[i] <= window.1) {
        if sup.qfi[i] {
            let w = sup.weight(i);
            total += w;
            if sup.energy[i] {
                both += w;
            }
        }
    }
    (total > T::zero()).then(|| both / total)
}

/// Fraction of the interpolated positive-`I_Q` intervals covered by the
/// positive-`I_E` intervals inside `window`.
pub fn interval_overlap_within<T: Real>(report: &IntervalReport<T>, window: (T, T)) -> Option<T> {
    let qfi = clip(&report.qfi_backflow_intervals, window);
    let energy = clip(&report.energy_backflow_intervals, window);
    let total = total_measure(&qfi);
    (total > T::zero()).then(|| intersection_measure(&qfi, &energy) / total)
}

/// Window of the initial `<sigma_z> > 0` phase: up to the sign change or
/// the end of the trajectory.
pub fn positive_population_window<T: Real>(report: &IntervalReport<T>) -> (T, T) {
    (report.span.0, report.sigma_z_sign_change.unwrap_or(report.span.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn interval_endpoints_interpolate_crossings() {
        let t = grid(10.0, 1001);
        let v: Vec<f64> = t.iter().map(|x| x.sin()).collect();
        let iv = positive_intervals(&t, &v, 1e-10);
        let pi = std::f64::consts::PI;
        assert_eq!(iv.len(), 2);
        assert_eq!(iv[0].0, 0.0);
        assert!((iv[0].1 - pi).abs() < 1e-5);
        assert!((iv[1].0 - 2.0 * pi).abs() < 1e-5);
        assert!((iv[1].1 - 3.0 * pi).abs() < 1e-5);
        let shifted: Vec<f64> = v.iter().map(|x| x + 0.6).collect();
        let iv = positive_intervals(&t, &shifted, 0.0);
        assert_eq!(iv.last().unwrap().1, 10.0);
    }

    #[test]
    fn merge_is_idempotent() {
        let iv = vec![(0.0, 1.0), (1.05, 2.0), (3.0, 4.0)];
        let once = merge_intervals(&iv, 0.1);
        assert_eq!(once, vec![(0.0, 2.0), (3.0, 4.0)]);
        assert_eq!(merge_intervals(&once, 0.1), once);
    }

    #[test]
    fn overlap_measures() {
        let t: Vec<f64> = (0..=10).map(f64::from).collect();
        let qfi: Vec<bool> = t
            .iter()
            .map(|&x| (1.0..=2.0).contains(&x) || (5.0..=6.0).contains(&x))
            .collect();
        let energy: Vec<bool> = t.iter().map(|&x| (2.0..=5.0).contains(&x)).collect();
        let report = IntervalReport {
            threshold: 0.0,
            qfi_backflow_intervals: vec![(0.0, 2.0), (4.0, 6.0)],
            energy_backflow_intervals: vec![(1.0, 5.0)],
            classification: Classification::NmWithEnergyBackflow,
            relation_residual_max: 0.0,
            sigma_z_sign_change: Some(3.0),
            span: (0.0, 10.0),
            support: SampleSupport { t, qfi, energy },
        };
        assert_eq!(overlap_correlation(&report), Some(0.5));
        assert_eq!(
            overlap_correlation_within(&report, positive_population_window(&report)),
            Some(0.5)
        );
        assert_eq!(overlap_correlation_within(&report, (7.0, 10.0)), None);
        assert_eq!(interval_overlap_within(&report, report.span), Some(0.5));
        assert_eq!(
            interval_overlap_within(&report, positive_population_window(&report)),
            Some(0.5)
        );
    }

    #[test]
    fn jc_regimes_classify() {
        let t = grid(50.0, 5001);
        let weak = Trajectory::from_jc(&JcParams::new(1.0, 0.2, 1.0).unwrap(), &t).unwrap();
        let r = detect_intervals(&weak, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(r.classification, Classification::Markovian);
        assert_eq!(overlap_correlation(&r), None);

        let strong = Trajectory::from_jc(&JcParams::new(1.0, 5.0, 1.0).unwrap(), &t).unwrap();
        let r = detect_intervals(&strong, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(r.classification, Classification::NmWithEnergyBackflow);
        assert_eq!(overlap_correlation(&r), Some(1.0));
        assert!(r.relation_residual_max < 1e-12);
        assert_eq!(sign_lock_violations(&strong, Model::Jc), 0);
    }

    #[test]
    fn short_trajectory_is_rejected() {
        let t = grid(1.0, 2);
        let traj = Trajectory::from_jc(&JcParams::new(1.0, 0.2, 1.0).unwrap(), &t).unwrap();
        assert!(detect_intervals(&traj, 0.0).is_err());
        let t3 = grid(1.0, 3);
        let traj = Trajectory::from_jc(&JcParams::new(1.0, 0.2, 1.0).unwrap(), &t3).unwrap();
        assert!(detect_intervals(&traj, -1.0).is_err());
    }

    #[test]
    fn sbm_relation_excludes_unpolarised_samples() {
        let mut traj = Trajectory::from_jc(&JcParams::new(1.0, 0.2, 1.0).unwrap(), &grid(1.0, 5)).unwrap();
        traj.model = Model::Sbm;
        traj.bloch[2] = BlochState::new(0.0, 0.0, 0.0);
        let rep = verify_relation(&traj, Model::Sbm);
        // t = 0 also has B3 = 0
        assert_eq!(rep.excluded, 2);
        assert_eq!(rep.checked, 3);
    }
}
