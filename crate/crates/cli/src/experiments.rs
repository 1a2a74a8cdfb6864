//! The experiment catalog. Each experiment runs one job per probe (or per
//! probe pair) and records data rows and pass/fail checks.

use std::f64::consts::LN_2;

use dollard_core::adiabatic::{
    horizon_for, ir_report, ir_slope_fit, predicted_ir_slope, switching_shift_check,
};
use dollard_core::asymptotics::{
    asymptotic_dynamics_probe, asymptotic_momentum, asymptotic_position_drift, energy_mismatch,
    group_law_residual, interpolation_residuals, AsymptoticDynamicsProbe, DRIFT_RESIDUAL_LIMIT,
};
use dollard_core::classical;
use dollard_core::dense::DenseOracle;
use dollard_core::moller::{
    approximants_over, elastic_unitarity_defect, moller_approximant, s_matrix_on_packet,
    time_reversal_pair, ConvergenceReport, Direction, MollerJob, Reference,
};
use dollard_core::{
    distance, expect, full_propagate, gaussian_packet, Grid, Observable, State, StepperConfig,
    SwitchingSpec,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, ReferenceKind};
use crate::error::{CliError, Result};
use crate::output::{Recorder, ReportKind};

/// Relative tolerance on fitted coefficients compared with a prediction.
pub const RELATIVE_TOLERANCE: f64 = 0.1;
/// Bound on the log-phase coefficient of a convergent family.
pub const LOG_COEFFICIENT_BOUND: f64 = 0.01;
/// Bound on the fitted power-law exponent of convergent Cauchy distances.
pub const DECAY_EXPONENT_BOUND: f64 = -0.7;
/// Cauchy distances below this are roundoff and carry no rate.
pub const ROUNDOFF_DISTANCE: f64 = 1e-9;
pub const GROUP_LAW_TOLERANCE: f64 = 1e-3;
pub const MOMENTUM_LIMIT_TOLERANCE: f64 = 1e-3;
pub const ENERGY_TOLERANCE: f64 = 1e-3;
pub const IR_DICHOTOMY_RATIO: f64 = 0.1;
pub const IR_NORM_DRIFT: f64 = 1e-8;
pub const IR_MATCH_FLOOR: f64 = 1e-2;
/// Required decrease of the switching-origin distance over the ε schedule.
pub const SHIFT_DECREASE: f64 = 2.0;
pub const TIME_REVERSAL_TOLERANCE: f64 = 1e-5;
pub const ELASTIC_TOLERANCE: f64 = 1e-4;
pub const ORACLE_PROPAGATOR_TOLERANCE: f64 = 1e-6;
pub const ORACLE_S_TOLERANCE: f64 = 1e-5;

/// Grid, stepper and probes resolved from a validated config.
pub struct Setup {
    pub config: ExperimentConfig,
    pub grid: Grid,
    pub stepper: StepperConfig,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let g = &config.grid;
        let grid = Grid::new(g.n, g.length, g.mass)?;
        let mut stepper =
            StepperConfig::new(config.stepper.dt).with_record_stride(config.stepper.record_stride);
        if let Some(w) = config.stepper.monitor {
            stepper = stepper.with_monitor(w);
        }
        stepper.validate(&grid)?;
        Ok(Self {
            config: config.clone(),
            grid,
            stepper,
        })
    }

    /// Job ids in aggregation order: pair ids for time reversal, probe ids
    /// otherwise.
    pub fn job_ids(&self) -> Vec<String> {
        if self.config.experiment == ExperimentKind::TimeReversal {
            self.config.pairs.keys().cloned().collect()
        } else {
            self.config.probes.keys().cloned().collect()
        }
    }

    pub fn packet(&self, id: &str) -> Result<State> {
        let spec = self
            .config
            .probes
            .get(id)
            .ok_or_else(|| CliError::config(format!("probe.{id}: no such probe")))?;
        Ok(gaussian_packet(&self.grid, spec)?)
    }

    pub fn reference(&self) -> Reference {
        match self.config.reference {
            ReferenceKind::Dollard => Reference::Dollard,
            ReferenceKind::Free => Reference::Free,
        }
    }

    fn job(&self, probe: State, reference: Reference, horizon: f64) -> MollerJob {
        MollerJob {
            probe,
            horizon,
            direction: Direction::Out,
            reference,
            pot: self.config.potential,
            sw: SwitchingSpec::off(),
            cfg: self.stepper,
        }
    }

    fn last_horizon(&self) -> f64 {
        *self.config.schedule.horizons.last().unwrap()
    }

    /// `αm⟨1/|p|⟩` on the probe.
    fn log_rate(&self, psi: &State) -> Result<f64> {
        Ok(self.config.potential.alpha
            * self.grid.mass()
            * expect(psi, &Observable::MomentumInverseAbs)?)
    }
}

/// Run the job `id` of the configured experiment.
pub fn run_job(setup: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    match setup.config.experiment {
        ExperimentKind::DollardVsFree | ExperimentKind::ShortRangeControl => {
            dichotomy(setup, id, rec)
        }
        ExperimentKind::Interpolation => interpolation(setup, id, rec),
        ExperimentKind::GroupLaw => group_law(setup, id, rec),
        ExperimentKind::AsymptoticObservables => observables(setup, id, rec),
        ExperimentKind::EnergyIdentity => energy_identity(setup, id, rec),
        ExperimentKind::AdiabaticIr => adiabatic_ir(setup, id, rec),
        ExperimentKind::SwitchingShift => switching_shift(setup, id, rec),
        ExperimentKind::TimeReversal => time_reversal(setup, id, rec),
        ExperimentKind::OracleCrosscheck => oracle(setup, id, rec),
    }
}

/// Free and Dollard Cauchy diagnostics. On a Coulomb tail the free family
/// carries a log phase `+αm⟨1/|p|⟩ ln T` and the Dollard family converges;
/// on a short-range potential the roles swap with the opposite sign.
fn dichotomy(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let psi = s.packet(id)?;
    let horizons = &s.config.schedule.horizons;
    let rate = s.log_rate(&psi)?;
    let families = [("free", Reference::Free), ("dollard", Reference::Dollard)];
    let mut reports = Vec::new();
    for (name, reference) in families {
        let states = approximants_over(&s.job(psi.clone(), reference, 1.0), horizons)?;
        states.iter().for_each(|st| rec.track_norm(st.norm()));
        let report = ConvergenceReport::from_approximants(horizons, &states)?;
        for (j, (d, theta)) in report.distances.iter().zip(&report.phases).enumerate() {
            let t = horizons[j];
            rec.data(
                ReportKind::Convergence,
                format!("{name}.distance@T={t}"),
                *d,
            );
            rec.data(
                ReportKind::Convergence,
                format!("{name}.phase@T={t}"),
                *theta,
            );
        }
        if let Some(e) = report.fitted_decay_exponent() {
            rec.data(ReportKind::Convergence, format!("{name}.decay_exponent"), e);
        }
        reports.push(report);
    }
    let coefficient = |r: &ConvergenceReport| {
        r.fitted_log_coefficient().ok_or_else(|| {
            CliError::config("schedule.horizons: the log-phase fit needs 4 horizons")
        })
    };
    let (diverging, converging, expected) = if s.config.potential.is_long_range() {
        (0, 1, rate)
    } else {
        (1, 0, -rate)
    };
    let c = coefficient(&reports[diverging])?;
    let name = families[diverging].0;
    rec.data(
        ReportKind::Convergence,
        format!("{name}.log_coefficient"),
        c,
    );
    rec.data(
        ReportKind::Convergence,
        format!("{name}.predicted_log_coefficient"),
        expected,
    );
    rec.check(
        format!("{name}.log_coefficient_error"),
        (c - expected).abs(),
        (RELATIVE_TOLERANCE * expected.abs()).max(LOG_COEFFICIENT_BOUND),
    );

    let report = &reports[converging];
    let name = families[converging].0;
    let c = coefficient(report)?;
    rec.data(
        ReportKind::Convergence,
        format!("{name}.log_coefficient"),
        c,
    );
    let largest = report.distances.iter().copied().fold(0.0, f64::max);
    match report.fitted_decay_exponent() {
        Some(e) if largest >= ROUNDOFF_DISTANCE => {
            rec.check(format!("{name}.decay_exponent"), e, DECAY_EXPONENT_BOUND)
        }
        _ => rec.check(format!("{name}.max_distance"), largest, ROUNDOFF_DISTANCE),
    }
    rec.check(
        format!("{name}.log_coefficient_abs"),
        c.abs(),
        LOG_COEFFICIENT_BOUND,
    );
    Ok(())
}

fn interpolation(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let t = s.last_horizon();
    let job = s.job(s.packet(id)?, s.reference(), t);
    let reports = interpolation_residuals(&job, &s.config.schedule.increments)?;
    rec.data(
        ReportKind::Convergence,
        format!("interpolation.cauchy_tail@T={t}"),
        reports[0].cauchy_tail,
    );
    for r in reports {
        rec.check(
            format!("interpolation.residual@s={}", r.increment),
            r.residual,
            r.tolerance(),
        );
    }
    Ok(())
}

/// `D_t(s)` against `U₀(s)`: the distance follows `αm⟨1/|p|⟩|s|/t` within a
/// factor of two, and `D_t(s/2)²` reproduces `D_t(s)`.
fn group_law(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let psi = s.packet(id)?;
    let alpha = s.config.potential.alpha;
    let reference = s.reference();
    let rate = match reference {
        Reference::Free => 0.0,
        _ => s.log_rate(&psi)?,
    };
    for &t in &s.config.schedule.times {
        for &inc in &s.config.schedule.increments {
            let out = asymptotic_dynamics_probe(&AsymptoticDynamicsProbe {
                reference,
                alpha,
                base_time: t,
                increment: inc,
                probe: psi.clone(),
            })?;
            rec.track_norm(out.state.norm());
            let d = out.distance_to_free;
            let label = format!("t={t},s={inc}");
            rec.data(ReportKind::Trace, format!("increment.distance@{label}"), d);
            let predicted = rate * inc.abs() / t;
            if predicted > 0.0 {
                rec.check(
                    format!("increment.log_ratio@{label}"),
                    (d / predicted).ln().abs(),
                    LN_2,
                );
            } else {
                rec.check(format!("increment.distance@{label}"), d, ROUNDOFF_DISTANCE);
            }
            let residual = group_law_residual(&reference, alpha, t, 0.5 * inc, 0.5 * inc, &psi)?;
            rec.check(
                format!("group_law.residual@{label}"),
                residual,
                GROUP_LAW_TOLERANCE,
            );
        }
    }
    Ok(())
}

/// `⟨p⟩(t)` along `U(t)Ω(T)φ` tends to `⟨φ,pφ⟩`; for states well above the
/// barrier the position drift matches the classical `c ln t`.
fn observables(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let phi = s.packet(id)?;
    let pot = s.config.potential;
    let m = s.grid.mass();
    let times = &s.config.schedule.times;
    let job = s.job(phi.clone(), s.reference(), s.last_horizon());
    let psi = moller_approximant(&job)?;
    rec.track_norm(psi.norm());

    let trace = match asymptotic_position_drift(&job, &psi, times) {
        Err(dollard_core::Error::Precondition(_)) => asymptotic_momentum(&job, &psi, times)?,
        other => other?,
    };
    for (t, p) in trace.times.iter().zip(&trace.momentum) {
        rec.data(ReportKind::Trace, format!("momentum@t={t}"), *p);
    }
    let p_phi = expect(&phi, &Observable::Momentum)?;
    let limit = trace.limit_momentum().unwrap_or(f64::NAN);
    rec.data(ReportKind::Trace, "momentum.limit", limit);
    rec.data(ReportKind::Trace, "momentum.predicted", p_phi);
    rec.check(
        "momentum.limit_error",
        (limit - p_phi).abs(),
        MOMENTUM_LIMIT_TOLERANCE,
    );

    let Some(fit) = trace.drift_fit else {
        return Ok(());
    };
    for (t, x) in trace.times.iter().zip(&trace.position) {
        rec.data(ReportKind::Trace, format!("position@t={t}"), *x);
    }
    let keep = times.len().div_ceil(2).max(3).min(times.len());
    let tail = &times[times.len() - keep..];
    let classical = classical::drift_fit(&pot, m, p_phi, tail)?.slope;
    rec.data(ReportKind::Trace, "position.drift_coefficient", fit.slope);
    rec.data(
        ReportKind::Trace,
        "position.classical_drift_coefficient",
        classical,
    );
    rec.check(
        "position.drift_error",
        (fit.slope - classical).abs(),
        RELATIVE_TOLERANCE * classical.abs(),
    );
    rec.check("position.fit_residual", fit.residual, DRIFT_RESIDUAL_LIMIT);
    Ok(())
}

fn energy_identity(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let phi = s.packet(id)?;
    let horizons = &s.config.schedule.horizons;
    let states = approximants_over(&s.job(phi.clone(), s.reference(), 1.0), horizons)?;
    let mut mismatches = Vec::with_capacity(states.len());
    for (t, st) in horizons.iter().zip(&states) {
        rec.track_norm(st.norm());
        let e = energy_mismatch(st, &phi, &s.config.potential)?;
        rec.data(ReportKind::Convergence, format!("energy.mismatch@T={t}"), e);
        mismatches.push(e);
    }
    let last = *mismatches.last().unwrap();
    rec.check(
        format!("energy.mismatch@T={}", s.last_horizon()),
        last,
        ENERGY_TOLERANCE,
    );
    let increases = mismatches.windows(2).filter(|w| w[1] >= w[0]).count();
    rec.check("energy.monotonicity_violations", increases as f64, 0.0);
    Ok(())
}

/// Phase of `⟨ψ,S₀^εψ⟩` against `ln(1/ε)`, ε-Cauchy distances of the
/// undressed and factorized S, and the factorized S against the direct
/// Dollard S at the smallest ε.
fn adiabatic_ir(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let psi = s.packet(id)?;
    let pot = s.config.potential;
    let eps = &s.config.schedule.epsilons;
    let report = ir_report(&psi, eps, s.config.origin_shift, &pot, &s.stepper)?;
    for (j, &e) in eps.iter().enumerate() {
        rec.data(
            ReportKind::Ir,
            format!("horizon@eps={e}"),
            report.horizons[j],
        );
        rec.data(ReportKind::Ir, format!("phase@eps={e}"), report.phases[j]);
        rec.data(ReportKind::Ir, format!("modulus@eps={e}"), report.moduli[j]);
        if let (Some(u), Some(f)) = (
            report.undressed_distances.get(j),
            report.factorized_distances.get(j),
        ) {
            rec.data(ReportKind::Ir, format!("undressed_distance@eps={e}"), *u);
            rec.data(ReportKind::Ir, format!("factorized_distance@eps={e}"), *f);
        }
    }
    let fit = ir_slope_fit(eps, &report.phases)?;
    let predicted = predicted_ir_slope(&psi, pot.alpha)?;
    rec.data(ReportKind::Ir, "ir.slope", fit.slope);
    rec.data(ReportKind::Ir, "ir.predicted_slope", predicted);
    rec.check(
        "ir.slope_error",
        (fit.slope - predicted).abs(),
        RELATIVE_TOLERANCE * predicted.abs(),
    );
    rec.check(
        "ir.dichotomy_ratio",
        report.dichotomy_ratio(),
        IR_DICHOTOMY_RATIO,
    );

    let sharp = Reference::AdiabaticDollard(SwitchingSpec::off());
    let off = SwitchingSpec::off();
    let horizon = *report.horizons.last().unwrap();
    let direct = s_matrix_on_packet(&psi, horizon, &sharp, &pot, &off, &s.stepper)?;
    let half = s_matrix_on_packet(&psi, 0.5 * horizon, &sharp, &pot, &off, &s.stepper)?;
    rec.track_norm(direct.norm());
    let horizon_tail = distance(&direct, &half)?;
    let mismatch = distance(report.factorized.last().unwrap(), &direct)?;
    rec.data(ReportKind::Ir, "ir.direct_horizon_tail", horizon_tail);
    rec.check(
        "ir.direct_match",
        mismatch,
        (3.0 * (report.tail() + horizon_tail)).max(IR_MATCH_FLOOR),
    );
    rec.track_norm(1.0 + report.norm_drift);
    rec.check("ir.norm_drift", report.norm_drift, IR_NORM_DRIFT);
    Ok(())
}

/// `‖S_fact(t₀) - S_fact(0)‖ψ` must fall by [`SHIFT_DECREASE`] from the first
/// to the last ε of the schedule.
fn switching_shift(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let psi = s.packet(id)?;
    let pot = s.config.potential;
    let t0 = s.config.origin_shift;
    let distances: Vec<f64> = s
        .config
        .schedule
        .epsilons
        .par_iter()
        .map(|&e| {
            let sw = SwitchingSpec::new(e, t0);
            switching_shift_check(&psi, horizon_for(&sw, &s.stepper), &sw, &pot, &s.stepper)
        })
        .collect::<dollard_core::Result<_>>()?;
    for (e, d) in s.config.schedule.epsilons.iter().zip(&distances) {
        rec.data(ReportKind::Ir, format!("shift.distance@eps={e}"), *d);
    }
    let ratio = distances.last().unwrap() / distances[0];
    rec.check("shift.distance_ratio", ratio, 1.0 / SHIFT_DECREASE);
    Ok(())
}

fn time_reversal(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let (a, b) = s
        .config
        .pairs
        .get(id)
        .ok_or_else(|| CliError::config(format!("pair.{id}: no such pair")))?;
    let phi = s.packet(a)?;
    let psi = s.packet(b)?;
    let t = s.last_horizon();
    let pot = s.config.potential;
    let reference = s.reference();
    let (direct, mirrored) = time_reversal_pair(&phi, &psi, t, &reference, &pot, &s.stepper)?;
    rec.data(ReportKind::Trace, "element.direct.re", direct.re);
    rec.data(ReportKind::Trace, "element.direct.im", direct.im);
    rec.data(ReportKind::Trace, "element.reversed.re", mirrored.re);
    rec.data(ReportKind::Trace, "element.reversed.im", mirrored.im);
    rec.check(
        "time_reversal.difference",
        (direct - mirrored).norm(),
        TIME_REVERSAL_TOLERANCE,
    );
    let scattered =
        s_matrix_on_packet(&psi, t, &reference, &pot, &SwitchingSpec::off(), &s.stepper)?;
    rec.track_norm(scattered.norm());
    rec.check(
        format!("elastic.defect@{b}"),
        elastic_unitarity_defect(&psi, &scattered)?,
        ELASTIC_TOLERANCE,
    );
    Ok(())
}

/// Split-step propagation and packet S-matrices against dense
/// diagonalization. The free reference is the Dollard S at zero coupling in
/// the reference phase.
fn oracle(s: &Setup, id: &str, rec: &mut Recorder) -> Result<()> {
    let psi = s.packet(id)?.to_position();
    let pot = s.config.potential;
    let dense = DenseOracle::new(&s.grid, &pot)?;
    let off = SwitchingSpec::off();
    for &t in &s.config.schedule.times {
        let split = full_propagate(&psi, 0.0, t, &pot, &off, &s.stepper)?;
        rec.track_norm(split.norm());
        rec.check(
            format!("oracle.propagator_distance@t={t}"),
            distance(&split, &dense.propagate(&psi, t))?,
            ORACLE_PROPAGATOR_TOLERANCE,
        );
    }
    let reference = s.reference();
    let phase_alpha = match reference {
        Reference::Free => 0.0,
        _ => pot.alpha,
    };
    for &t in &s.config.schedule.horizons {
        let split = s_matrix_on_packet(&psi, t, &reference, &pot, &off, &s.stepper)?;
        let exact = dense.apply(&dense.dollard_s_matrix(t, phase_alpha), &psi);
        rec.check(
            format!("oracle.s_distance@T={t}"),
            distance(&split, &exact)?,
            ORACLE_S_TOLERANCE,
        );
    }
    Ok(())
}
