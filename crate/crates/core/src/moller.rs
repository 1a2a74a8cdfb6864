//! Finite-horizon wave operators `Ω(T) = U(T)^{-1} U_ref(T)` and the
//! diagnostics that decide whether their `T → ∞` limit exists.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{
    dollard_phase_at, dollard_potential_symbol, full_propagate, StepperConfig, SwitchingSpec,
};
use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_power_law, LineFit};
use crate::potential::PotentialSpec;
use crate::special::switching_integral;
use crate::spectral::{distance, expect, overlap, Observable, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `t → +∞`
    Out,
    /// `t → -∞`
    In,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Out => 1.0,
            Direction::In => -1.0,
        }
    }
}

/// Comparison dynamics for the wave operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Free,
    /// Dollard dynamics with the smooth `ln((|k||t| + m)/m)` phase.
    Dollard,
    /// `U₀(t) e^{-i L(ε,t) V_D}`; with `ε = 0` this is the Dollard dynamics with
    /// the sharp `ln|t|` phase for `|t| > 1`.
    AdiabaticDollard(SwitchingSpec),
}

impl Reference {
    /// Total diagonal phase of `U_ref(t)` at lattice momentum `k`.
    pub fn phase(&self, k: f64, t: f64, alpha: f64, mass: f64) -> f64 {
        -0.5 * k * k * t / mass + self.correction(k, t, alpha, mass)
    }

    /// Phase of `U₀(t)^{-1} U_ref(t)`.
    pub fn correction(&self, k: f64, t: f64, alpha: f64, mass: f64) -> f64 {
        match self {
            Reference::Free => 0.0,
            Reference::Dollard => dollard_phase_at(k, t, alpha, mass),
            Reference::AdiabaticDollard(sw) => {
                -switching_integral(sw.epsilon, t) * dollard_potential_symbol(k, alpha, mass)
            }
        }
    }

    /// `U_ref(t) ψ`.
    pub fn propagate(&self, state: &State, t: f64, alpha: f64) -> State {
        let m = state.grid().mass();
        match self {
            Reference::AdiabaticDollard(sw) => {
                // switching integral is k-independent: evaluate once
                let l = switching_integral(sw.epsilon, t);
                state.apply_momentum_diagonal(|k| {
                    Complex64::cis(-0.5 * k * k * t / m - l * dollard_potential_symbol(k, alpha, m))
                })
            }
            _ => state.apply_momentum_diagonal(|k| Complex64::cis(self.phase(k, t, alpha, m))),
        }
    }

    /// `U_ref(t)^{-1} ψ`.
    pub fn propagate_inverse(&self, state: &State, t: f64, alpha: f64) -> State {
        let m = state.grid().mass();
        match self {
            Reference::AdiabaticDollard(sw) => {
                let l = switching_integral(sw.epsilon, t);
                state.apply_momentum_diagonal(|k| {
                    Complex64::cis(0.5 * k * k * t / m + l * dollard_potential_symbol(k, alpha, m))
                })
            }
            _ => state.apply_momentum_diagonal(|k| Complex64::cis(-self.phase(k, t, alpha, m))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Reference::Free => "free",
            Reference::Dollard => "dollard",
            Reference::AdiabaticDollard(_) => "adiabatic_dollard",
        }
    }
}

/// One wave-operator approximant to compute.
#[derive(Debug, Clone)]
pub struct MollerJob {
    pub probe: State,
    pub horizon: f64,
    pub direction: Direction,
    pub reference: Reference,
    pub pot: PotentialSpec,
    pub sw: SwitchingSpec,
    pub cfg: StepperConfig,
}

impl MollerJob {
    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    fn signed_horizon(&self) -> f64 {
        self.direction.sign() * self.horizon
    }
}

/// Classical transport estimate of where the packet sits after time `t`:
/// returns `(center, width)` from its first and second moments.
pub fn transport_estimate(state: &State, t: f64) -> Result<(f64, f64)> {
    let m = state.grid().mass();
    let x = expect(state, &Observable::Position)?;
    let x2 = expect(state, &Observable::PositionSquared)?;
    let p = expect(state, &Observable::Momentum)?;
    let p2 = expect(state, &Observable::MomentumSquared)?;
    let dx = (x2 - x * x).max(0.0).sqrt();
    let dp = (p2 - p * p).max(0.0).sqrt();
    let width = (dx * dx + (dp * t / m).powi(2)).sqrt();
    Ok((x + p * t / m, width))
}

/// Fails when the packet would leave the monitored window (or the box) before
/// reaching time `t` under free transport.
pub fn preflight(state: &State, t: f64, cfg: &StepperConfig) -> Result<()> {
    let window = cfg
        .monitor_window
        .unwrap_or(0.5 * state.grid().box_length());
    let (center, width) = transport_estimate(state, t)?;
    let reach = center.abs() + 6.0 * width;
    if reach >= window {
        return Err(Error::Preflight(format!(
            "packet reaches |x| = {reach:.1} at t = {t} (center {center:.1}, width {width:.1}) \
             but the monitored window ends at {window}"
        )));
    }
    Ok(())
}

/// `Ω(T)ψ = U(±T)^{-1} U_ref(±T) ψ`: reference dynamics out to `±T`, then the
/// full dynamics back to `0`.
pub fn moller_approximant(job: &MollerJob) -> Result<State> {
    let t = job.signed_horizon();
    preflight(&job.probe, t, &job.cfg)?;
    let launched = job.reference.propagate(&job.probe, t, job.pot.alpha);
    full_propagate(&launched, t, 0.0, &job.pot, &job.sw, &job.cfg)
}

/// Phase drift fitted against `ln T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFit {
    pub coefficient: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Cauchy pair data over a horizon schedule.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub horizons: Vec<f64>,
    /// `‖Ω(T_{j+1})ψ - Ω(T_j)ψ‖`
    pub distances: Vec<f64>,
    /// `arg <Ω(T_j)ψ, Ω(T_{j+1})ψ>`, principal branch.
    pub phases: Vec<f64>,
    /// `‖Ω(T_j)ψ‖ - 1` per horizon.
    pub norm_drift: Vec<f64>,
    /// Log-log fit of `distances` against `T_j` (absent if any distance is 0).
    pub decay_fit: Option<LineFit>,
    /// Fit of the cumulative phase against `ln T` (needs at least 4 horizons).
    pub log_fit: Option<PhaseFit>,
}

impl ConvergenceReport {
    pub fn fitted_decay_exponent(&self) -> Option<f64> {
        self.decay_fit.map(|f| f.slope)
    }

    pub fn fitted_log_coefficient(&self) -> Option<f64> {
        self.log_fit.map(|f| f.coefficient)
    }

    /// Last Cauchy distance.
    pub fn tail(&self) -> f64 {
        self.distances.last().copied().unwrap_or(0.0)
    }

    /// Build a report from approximants already computed on `horizons`.
    pub fn from_approximants(horizons: &[f64], approximants: &[State]) -> Result<Self> {
        if horizons.len() != approximants.len() || horizons.len() < 2 {
            return Err(Error::config(
                "a convergence report needs at least two horizons with matching approximants",
            ));
        }
        if horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "horizon schedule must be strictly increasing",
            ));
        }
        let mut distances = Vec::with_capacity(horizons.len() - 1);
        let mut phases = Vec::with_capacity(horizons.len() - 1);
        for pair in approximants.windows(2) {
            distances.push(distance(&pair[1], &pair[0])?);
            phases.push(overlap(&pair[0], &pair[1])?.arg());
        }
        let norm_drift = approximants.iter().map(|s| s.norm() - 1.0).collect();
        let decay_fit = if distances.iter().all(|&d| d > 0.0) {
            Some(fit_power_law(&horizons[..horizons.len() - 1], &distances)?)
        } else {
            None
        };
        let log_fit = if horizons.len() >= 4 {
            Some(log_phase_fit(horizons, &phases)?)
        } else {
            None
        };
        Ok(Self {
            horizons: horizons.to_vec(),
            distances,
            phases,
            norm_drift,
            decay_fit,
            log_fit,
        })
    }
}

/// Wave-operator approximants for every horizon of `schedule`.
pub fn approximants_over(job: &MollerJob, schedule: &[f64]) -> Result<Vec<State>> {
    schedule
        .par_iter()
        .map(|&t| moller_approximant(&job.with_horizon(t)))
        .collect()
}

/// Cauchy diagnostic of `job` over an increasing horizon schedule.
pub fn cauchy_diagnostic(job: &MollerJob, schedule: &[f64]) -> Result<ConvergenceReport> {
    let approximants = approximants_over(job, schedule)?;
    ConvergenceReport::from_approximants(schedule, &approximants)
}

/// Least-squares fit of the cumulative pair phase `Θ_j = Σ_{i<j} θ_i` against
/// `ln T_j`.
///
/// `phases[j]` is the increment between `horizons[j]` and `horizons[j+1]`.
pub fn log_phase_fit(horizons: &[f64], phases: &[f64]) -> Result<PhaseFit> {
    if horizons.len() < 4 || phases.len() + 1 != horizons.len() {
        return Err(Error::Fit(format!(
            "log-phase fit needs at least 4 horizons and one phase per pair, got {} and {}",
            horizons.len(),
            phases.len()
        )));
    }
    for (j, pair) in phases.windows(2).enumerate() {
        if (pair[1] - pair[0]).abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::UnwrapAmbiguity(format!(
                "increments {} and {} (pairs {j}, {}) differ by more than pi/2",
                pair[0],
                pair[1],
                j + 1
            )));
        }
    }
    let mut cumulative = Vec::with_capacity(horizons.len());
    let mut acc = 0.0;
    cumulative.push(acc);
    for &theta in phases {
        acc += theta;
        cumulative.push(acc);
    }
    let ln_t: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let fit = fit_line(&ln_t, &cumulative)?;
    Ok(PhaseFit {
        coefficient: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
    })
}

/// `Ω₊(T)† Ω₋(T) ψ = U_ref(T)^{-1} U(T, -T) U_ref(-T) ψ`.
pub fn s_matrix_on_packet(
    psi_in: &State,
    horizon: f64,
    reference: &Reference,
    pot: &PotentialSpec,
    sw: &SwitchingSpec,
    cfg: &StepperConfig,
) -> Result<State> {
    preflight(psi_in, -horizon, cfg)?;
    preflight(psi_in, horizon, cfg)?;
    let prepared = reference.propagate(psi_in, -horizon, pot.alpha);
    let evolved = full_propagate(&prepared, -horizon, horizon, pot, sw, cfg)?;
    Ok(reference.propagate_inverse(&evolved, horizon, pot.alpha))
}

/// `S† ψ = U_ref(-T)^{-1} U(-T, T) U_ref(T) ψ`.
pub fn s_matrix_adjoint_on_packet(
    psi: &State,
    horizon: f64,
    reference: &Reference,
    pot: &PotentialSpec,
    sw: &SwitchingSpec,
    cfg: &StepperConfig,
) -> Result<State> {
    preflight(psi, -horizon, cfg)?;
    preflight(psi, horizon, cfg)?;
    let prepared = reference.propagate(psi, horizon, pot.alpha);
    let evolved = full_propagate(&prepared, horizon, -horizon, pot, sw, cfg)?;
    Ok(reference.propagate_inverse(&evolved, -horizon, pot.alpha))
}

/// Both sides of the time-reversal relation `K S K = S†` on one probe pair:
/// `⟨φ, Sψ⟩` and `conj⟨Kφ, S† Kψ⟩`, with `K` complex conjugation in position
/// space.
pub fn time_reversal_pair(
    phi: &State,
    psi: &State,
    horizon: f64,
    reference: &Reference,
    pot: &PotentialSpec,
    cfg: &StepperConfig,
) -> Result<(Complex64, Complex64)> {
    let sw = SwitchingSpec::off();
    let direct = overlap(
        phi,
        &s_matrix_on_packet(psi, horizon, reference, pot, &sw, cfg)?,
    )?;
    let reversed = s_matrix_adjoint_on_packet(&psi.conjugate(), horizon, reference, pot, &sw, cfg)?;
    let mirrored = overlap(&phi.conjugate(), &reversed)?.conj();
    Ok((direct, mirrored))
}

/// Largest per-|k| change of momentum probability between `before` and `after`.
pub fn elastic_unitarity_defect(before: &State, after: &State) -> Result<f64> {
    if before.grid() != after.grid() {
        return Err(Error::GridMismatch);
    }
    let a = before.abs_momentum_histogram();
    let b = after.abs_momentum_histogram();
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gaussian_packet, make_grid, PacketSpec};

    #[test]
    fn synthetic_log_phase() {
        let horizons: [f64; 5] = [64.0, 128.0, 256.0, 512.0, 1024.0];
        let c = -0.25;
        let phases: Vec<f64> = horizons
            .windows(2)
            .map(|w| c * (w[1] / w[0]).ln())
            .collect();
        let fit = log_phase_fit(&horizons, &phases).unwrap();
        assert!((fit.coefficient - c).abs() < 1e-14);
        assert!(fit.residual < 1e-14);

        let fit = log_phase_fit(&horizons, &[0.0; 4]).unwrap();
        assert_eq!(fit.coefficient, 0.0);
    }

    #[test]
    fn noisy_log_phase_within_three_percent() {
        // fixed ±1% perturbations of the exact increments
        let horizons: Vec<f64> = (0..8).map(|j| 32.0 * 2f64.powi(j)).collect();
        let c = -0.25;
        let noise = [0.01, -0.01, 0.007, -0.004, 0.01, -0.008, 0.002];
        let phases: Vec<f64> = horizons
            .windows(2)
            .zip(noise)
            .map(|(w, e)| c * (w[1] / w[0]).ln() * (1.0 + e))
            .collect();
        let fit = log_phase_fit(&horizons, &phases).unwrap();
        assert!((fit.coefficient - c).abs() < 0.03 * c.abs());
    }

    #[test]
    fn unwrap_ambiguity_is_flagged() {
        let horizons = [1.0, 2.0, 4.0, 8.0];
        let err = log_phase_fit(&horizons, &[0.1, 2.0, 0.1]).unwrap_err();
        assert!(matches!(err, Error::UnwrapAmbiguity(_)));
        assert!(log_phase_fit(&horizons[..3], &[0.1, 0.1]).is_err());
    }

    #[test]
    fn references_are_inverted_exactly() {
        let g = make_grid(1024, 512.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(0.0, 2.0, 8.0)).unwrap();
        for r in [
            Reference::Free,
            Reference::Dollard,
            Reference::AdiabaticDollard(SwitchingSpec::new(0.02, 0.0)),
        ] {
            let out = r.propagate_inverse(&r.propagate(&psi, 37.0, 0.5), 37.0, 0.5);
            assert!(distance(&out, &psi).unwrap() < 1e-13, "{}", r.name());
        }
    }

    #[test]
    fn zero_coupling_approximant_is_identity() {
        let g = make_grid(1024, 1024.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(0.0, 2.0, 8.0)).unwrap();
        let job = MollerJob {
            probe: psi.clone(),
            horizon: 64.0,
            direction: Direction::Out,
            reference: Reference::Free,
            pot: PotentialSpec::coulomb(0.0, 1.0),
            sw: SwitchingSpec::off(),
            cfg: StepperConfig::new(0.05).with_monitor(500.0),
        };
        let out = moller_approximant(&job).unwrap();
        assert!(distance(&out, &psi).unwrap() < 1e-10);

        let report = cauchy_diagnostic(&job, &[16.0, 32.0, 64.0, 128.0]).unwrap();
        assert!(report.distances.iter().all(|&d| d < 1e-10));
        assert!(report.phases.iter().all(|&p| p.abs() < 1e-10));
    }

    #[test]
    fn preflight_rejects_unreachable_horizon() {
        let g = make_grid(1024, 512.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(0.0, 2.0, 8.0)).unwrap();
        let cfg = StepperConfig::new(0.05).with_monitor(240.0);
        assert!(preflight(&psi, 50.0, &cfg).is_ok());
        assert!(matches!(
            preflight(&psi, 200.0, &cfg),
            Err(Error::Preflight(_))
        ));
        assert!(matches!(
            preflight(&psi, -200.0, &cfg),
            Err(Error::Preflight(_))
        ));
    }

    #[test]
    fn time_reversal_relation_holds() {
        let g = make_grid(1024, 1024.0, 1.0).unwrap();
        let pot = PotentialSpec::coulomb(0.5, 1.0);
        let cfg = StepperConfig::new(0.05).with_monitor(500.0);
        let phi = gaussian_packet(&g, &PacketSpec::new(3.0, 1.8, 8.0)).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(-2.0, 2.0, 9.0)).unwrap();
        for reference in [Reference::Free, Reference::Dollard] {
            let (a, b) = time_reversal_pair(&phi, &psi, 40.0, &reference, &pot, &cfg).unwrap();
            assert!(a.norm() > 0.1);
            assert!((a - b).norm() < 1e-10, "{a} {b}");
        }
    }
}
