//! Asymptotic dynamics extracted from a reference family, the interpolation
//! formula and asymptotic observables.
//!
//! `D_t(s) = U_ref(t)^{-1} U_ref(t + s)` is diagonal in momentum for every
//! reference family, so it is evaluated in closed form.

use num_complex::Complex64;

use crate::dynamics::{free_propagate, full_propagate, full_propagate_observed};
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::moller::{moller_approximant, MollerJob, Reference};
use crate::potential::PotentialSpec;
use crate::spectral::{distance, expect, Observable, State};

/// One evaluation of `D_t(s)ψ`.
#[derive(Debug, Clone)]
pub struct AsymptoticDynamicsProbe {
    pub reference: Reference,
    pub alpha: f64,
    /// Base time `t > 0`.
    pub base_time: f64,
    /// Increment, `|s| <= t/2`.
    pub increment: f64,
    pub probe: State,
}

impl AsymptoticDynamicsProbe {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_time.is_finite() && self.base_time > 0.0) {
            return Err(Error::precondition(format!(
                "base time t = {} must be positive",
                self.base_time
            )));
        }
        if self.increment.is_nan() || self.increment.abs() > 0.5 * self.base_time {
            return Err(Error::precondition(format!(
                "increment |s| = {} exceeds t/2 = {}",
                self.increment.abs(),
                0.5 * self.base_time
            )));
        }
        Ok(())
    }
}

/// `D_t(s)ψ` together with its distance to `U₀(s)ψ`.
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub state: State,
    pub distance_to_free: f64,
}

/// `D_t(s)ψ` for any reference family (no precondition checks).
pub fn extracted_increment(
    reference: &Reference,
    alpha: f64,
    t: f64,
    s: f64,
    psi: &State,
) -> State {
    let m = psi.grid().mass();
    psi.apply_momentum_diagonal(|k| {
        Complex64::cis(
            -0.5 * k * k * s / m + reference.correction(k, t + s, alpha, m)
                - reference.correction(k, t, alpha, m),
        )
    })
}

pub fn asymptotic_dynamics_probe(p: &AsymptoticDynamicsProbe) -> Result<ProbeOutcome> {
    p.validate()?;
    let state = extracted_increment(&p.reference, p.alpha, p.base_time, p.increment, &p.probe);
    let free = free_propagate(&p.probe, p.increment);
    let distance_to_free = distance(&state, &free)?;
    Ok(ProbeOutcome {
        state,
        distance_to_free,
    })
}

/// `‖D_t(s1 + s2)ψ - D_t(s1) D_t(s2)ψ‖`.
pub fn group_law_residual(
    reference: &Reference,
    alpha: f64,
    t: f64,
    s1: f64,
    s2: f64,
    psi: &State,
) -> Result<f64> {
    let joint = extracted_increment(reference, alpha, t, s1 + s2, psi);
    let inner = extracted_increment(reference, alpha, t, s2, psi);
    let composed = extracted_increment(reference, alpha, t, s1, &inner);
    distance(&joint, &composed)
}

/// Distance between the increments extracted from `reference` and from the same
/// family dressed on the right by the fixed diagonal unitary `e^{iχ(k)}`.
pub fn regularization_independence(
    reference: &Reference,
    alpha: f64,
    t: f64,
    s: f64,
    psi: &State,
    chi: impl Fn(f64) -> f64,
) -> Result<f64> {
    let m = psi.grid().mass();
    let dressed = psi.apply_momentum_diagonal(|k| {
        let total = |time: f64| reference.correction(k, time, alpha, m) + chi(k);
        Complex64::cis(-0.5 * k * k * s / m + total(t + s) - total(t))
    });
    distance(&extracted_increment(reference, alpha, t, s, psi), &dressed)
}

/// Largest deviation of the bin phases of `D_t(s)` from the kinetic profile
/// `-k² s / 2m`, over lattice momenta with `|k| >= k_floor`.
pub fn kinetic_phase_deviation(
    reference: &Reference,
    alpha: f64,
    t: f64,
    s: f64,
    grid: &crate::spectral::Grid,
    k_floor: f64,
) -> f64 {
    let m = grid.mass();
    grid.momenta()
        .iter()
        .filter(|k| k.abs() >= k_floor)
        .map(|&k| {
            let dev =
                reference.correction(k, t + s, alpha, m) - reference.correction(k, t, alpha, m);
            Complex64::cis(dev).arg().abs()
        })
        .fold(0.0, f64::max)
}

/// Interpolation residual at one horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub increment: f64,
    pub horizon: f64,
    /// `‖U(s)Ω(T)ψ - Ω(T)U₀(s)ψ‖`
    pub residual: f64,
    /// `‖Ω(2T)ψ - Ω(T)ψ‖`
    pub cauchy_tail: f64,
    /// `‖Ω(2T)U₀(s)ψ - Ω(T)U₀(s)ψ‖`: the translated packet sits `s p/m`
    /// further out and its approximant converges more slowly.
    pub shifted_tail: f64,
}

impl InterpolationReport {
    /// The residual bound `max(1e-3, 3 × (tail + shifted tail))`.
    pub fn tolerance(&self) -> f64 {
        (3.0 * (self.cauchy_tail + self.shifted_tail)).max(1e-3)
    }

    pub fn passes(&self) -> bool {
        self.residual < self.tolerance()
    }
}

/// `‖U(s)Ω(T)ψ - Ω(T)U₀(s)ψ‖` with `T = job.horizon`, reported with the Cauchy
/// distances between horizons `T` and `2T` of both approximants.
pub fn interpolation_residual(job: &MollerJob, s: f64) -> Result<InterpolationReport> {
    Ok(interpolation_residuals(job, &[s])?.remove(0))
}

/// [`interpolation_residual`] for several increments, sharing `Ω(T)ψ` and the
/// Cauchy tail.
pub fn interpolation_residuals(
    job: &MollerJob,
    increments: &[f64],
) -> Result<Vec<InterpolationReport>> {
    let omega = moller_approximant(job)?;
    let longer = moller_approximant(&job.with_horizon(2.0 * job.horizon))?;
    let cauchy_tail = distance(&longer, &omega)?;
    increments
        .iter()
        .map(|&s| {
            let lhs = full_propagate(&omega, 0.0, s, &job.pot, &job.sw, &job.cfg)?;
            let shifted = MollerJob {
                probe: free_propagate(&job.probe, s),
                ..job.clone()
            };
            let rhs = moller_approximant(&shifted)?;
            let rhs_longer = moller_approximant(&shifted.with_horizon(2.0 * job.horizon))?;
            Ok(InterpolationReport {
                increment: s,
                horizon: job.horizon,
                residual: distance(&lhs, &rhs)?,
                cauchy_tail,
                shifted_tail: distance(&rhs_longer, &rhs)?,
            })
        })
        .collect()
}

/// Position, momentum and energy expectations along one full trajectory.
#[derive(Debug, Clone, Default)]
pub struct ObservableTrace {
    pub times: Vec<f64>,
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub energy: Vec<f64>,
    /// `<p>(t) = p∞ + b/t`: intercept is the limit.
    pub momentum_fit: Option<LineFit>,
    /// `<x>(t) - p_out t/m = c ln t + d`: slope is `c`.
    pub drift_fit: Option<LineFit>,
    /// Set when the drift model does not describe the data.
    pub drift_flagged: bool,
}

/// RMS residual (length units) above which a drift fit is flagged.
pub const DRIFT_RESIDUAL_LIMIT: f64 = 0.05;

impl ObservableTrace {
    pub fn limit_momentum(&self) -> Option<f64> {
        self.momentum_fit.map(|f| f.intercept)
    }

    pub fn drift_coefficient(&self) -> Option<f64> {
        self.drift_fit.map(|f| f.slope)
    }

    /// Indices of the trailing `fraction` of the schedule (at least 3 points).
    fn tail(&self, fraction: f64) -> std::ops::Range<usize> {
        let n = self.times.len();
        let keep = ((n as f64 * fraction).ceil() as usize).clamp(3.min(n), n);
        n - keep..n
    }
}

/// Record `<x>`, `<p>`, `<H>` of `U(t)ψ` at each time of `schedule` (strictly
/// increasing, positive), starting from `ψ` at `t = 0`.
pub fn observable_trace(job: &MollerJob, psi: &State, schedule: &[f64]) -> Result<ObservableTrace> {
    if schedule.is_empty() {
        return Err(Error::config("observable schedule is empty"));
    }
    if schedule[0] <= 0.0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "observable schedule must be positive and strictly increasing",
        ));
    }
    let mut trace = ObservableTrace::default();
    let potential = Observable::Potential(job.pot);
    full_propagate_observed(
        psi,
        0.0,
        schedule,
        &job.pot,
        &job.sw,
        &job.cfg,
        |t, state| {
            trace.times.push(t);
            trace.position.push(expect(state, &Observable::Position)?);
            trace.momentum.push(expect(state, &Observable::Momentum)?);
            trace
                .energy
                .push(expect(state, &Observable::Kinetic)? + expect(state, &potential)?);
            Ok(())
        },
    )?;
    Ok(trace)
}

/// Momentum trace with the `p∞ + b/t` fit over the trailing half of the schedule.
pub fn asymptotic_momentum(
    job: &MollerJob,
    psi: &State,
    schedule: &[f64],
) -> Result<ObservableTrace> {
    let mut trace = observable_trace(job, psi, schedule)?;
    let range = trace.tail(0.5);
    let inv_t: Vec<f64> = trace.times[range.clone()].iter().map(|t| 1.0 / t).collect();
    trace.momentum_fit = Some(fit_line(&inv_t, &trace.momentum[range])?);
    Ok(trace)
}

/// Logarithmic drift of `<x>(t) - p_out t/m` over the trailing half of the
/// schedule, with `p_out` the fitted momentum limit of the same trajectory.
///
/// Requires transmission-dominated kinematics `<ψ,Hψ> > 3 V_max`.
pub fn asymptotic_position_drift(
    job: &MollerJob,
    psi: &State,
    schedule: &[f64],
) -> Result<ObservableTrace> {
    let m = psi.grid().mass();
    let energy = expect(psi, &Observable::Kinetic)? + expect(psi, &Observable::Potential(job.pot))?;
    if energy <= 3.0 * job.pot.max_value() {
        return Err(Error::precondition(format!(
            "drift fit needs <H> = {energy} > 3 V_max = {}",
            3.0 * job.pot.max_value()
        )));
    }
    let mut trace = asymptotic_momentum(job, psi, schedule)?;
    let p_out = trace.limit_momentum().unwrap_or_default();
    let range = trace.tail(0.5);
    let ln_t: Vec<f64> = trace.times[range.clone()].iter().map(|t| t.ln()).collect();
    let lag: Vec<f64> = range
        .map(|j| trace.position[j] - p_out * trace.times[j] / m)
        .collect();
    let fit = fit_line(&ln_t, &lag)?;
    trace.drift_flagged = fit.residual > DRIFT_RESIDUAL_LIMIT;
    trace.drift_fit = Some(fit);
    Ok(trace)
}

/// `|<Ω(T)φ, H Ω(T)φ> - <φ, H₀ φ>|` with `T = job.horizon`, `φ = job.probe`.
pub fn energy_identity_residual(job: &MollerJob) -> Result<f64> {
    energy_mismatch(&moller_approximant(job)?, &job.probe, &job.pot)
}

/// `|<ω, H ω> - <φ, H₀ φ>|` for an approximant `ω` of `Ωφ`.
pub fn energy_mismatch(omega: &State, phi: &State, pot: &PotentialSpec) -> Result<f64> {
    let interacting =
        expect(omega, &Observable::Kinetic)? + expect(omega, &Observable::Potential(*pot))?;
    let free = expect(phi, &Observable::Kinetic)?;
    Ok((interacting - free).abs())
}

/// The three momentum expectations that must agree by Heisenberg covariance:
/// `<U(t)Ωφ, p U(t)Ωφ>`, `<U₀(t)φ, p U₀(t)φ>` and `<φ, pφ>`.
pub fn heisenberg_momentum(job: &MollerJob, t: f64) -> Result<[f64; 3]> {
    let omega = moller_approximant(job)?;
    let moved = full_propagate(&omega, 0.0, t, &job.pot, &job.sw, &job.cfg)?;
    Ok([
        expect(&moved, &Observable::Momentum)?,
        expect(&free_propagate(&job.probe, t), &Observable::Momentum)?,
        expect(&job.probe, &Observable::Momentum)?,
    ])
}
