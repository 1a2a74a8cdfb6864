//! Adiabatically switched scattering: the ε-regularized standard S-matrix, its
//! `ln ε` phase divergence on Coulomb tails, and the Dollard factorization
//! `S = lim e^{i L(ε,∞) V_D} S₀^ε e^{-i L(ε,-∞) V_D}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{dollard_potential_symbol, StepperConfig, SwitchingSpec};
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::moller::{s_matrix_on_packet, Reference};
use crate::potential::PotentialSpec;
use crate::spectral::{distance, expect, overlap, Observable, State};

pub use crate::special::{exp_integral_e1, switching_integral, EULER_GAMMA};

/// Largest coupling `e^{-ε(T - |t₀|)}` tolerated at the horizon.
pub const SWITCHED_OFF: f64 = 1e-8;

/// Smallest `|⟨ψ, S₀^ε ψ⟩|` for which an overall phase is extracted.
pub const MIN_FORWARD_OVERLAP: f64 = 0.5;

/// `L(ε, t)` evaluated once, with its limit `E₁(ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingIntegral {
    pub epsilon: f64,
    pub t: f64,
    pub value: f64,
}

impl SwitchingIntegral {
    pub fn new(epsilon: f64, t: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon = {epsilon} must be finite and non-negative"
            )));
        }
        Ok(Self {
            epsilon,
            t,
            value: switching_integral(epsilon, t),
        })
    }

    /// `L(ε, ∞) = E₁(ε)`.
    pub fn limit(&self) -> f64 {
        exp_integral_e1(self.epsilon)
    }
}

/// Shortest horizon at which the switched coupling is below [`SWITCHED_OFF`].
pub fn min_horizon(sw: &SwitchingSpec) -> f64 {
    -SWITCHED_OFF.ln() / sw.epsilon + sw.origin_shift.abs()
}

fn check_switching(horizon: f64, sw: &SwitchingSpec) -> Result<()> {
    sw.validate()?;
    if sw.epsilon == 0.0 {
        return Err(Error::config(
            "adiabatic S-matrix needs epsilon > 0 (use the Dollard S for epsilon = 0)",
        ));
    }
    let decay = sw.epsilon * (horizon - sw.origin_shift.abs());
    if decay < -SWITCHED_OFF.ln() {
        return Err(Error::config(format!(
            "epsilon * (T - |t0|) = {decay:.3} is below ln(1e8) = {:.3}; \
             need T >= {:.1} for epsilon = {}",
            -SWITCHED_OFF.ln(),
            min_horizon(sw),
            sw.epsilon
        )));
    }
    Ok(())
}

/// `S₀^ε ψ = U₀(T)^{-1} U^ε(T ← -T) U₀(-T) ψ`.
pub fn adiabatic_standard_s(
    psi: &State,
    horizon: f64,
    sw: &SwitchingSpec,
    pot: &PotentialSpec,
    cfg: &StepperConfig,
) -> Result<State> {
    check_switching(horizon, sw)?;
    s_matrix_on_packet(psi, horizon, &Reference::Free, pot, sw, cfg)
}

/// Multiply by `e^{i λ V_D}` with `V_D = αm/|p|`.
pub fn dollard_dressing(state: &State, lambda: f64, alpha: f64) -> State {
    let m = state.grid().mass();
    state
        .apply_momentum_diagonal(|k| Complex64::cis(lambda * dollard_potential_symbol(k, alpha, m)))
}

/// `e^{i L(ε,∞) V_D} S₀^ε e^{-i L(ε,-∞) V_D} ψ`; both dressings equal
/// `e^{i E₁(ε) V_D}`.
pub fn factorized_s(
    psi: &State,
    horizon: f64,
    sw: &SwitchingSpec,
    pot: &PotentialSpec,
    cfg: &StepperConfig,
) -> Result<State> {
    let e1 = exp_integral_e1(sw.epsilon);
    let dressed = dollard_dressing(psi, e1, pot.alpha);
    let scattered = adiabatic_standard_s(&dressed, horizon, sw, pot, cfg)?;
    Ok(dollard_dressing(&scattered, e1, pot.alpha))
}

/// `‖S(T₂)ψ - S(T₁)ψ‖` for the undressed S₀^ε at `T` and `2T`.
pub fn horizon_convergence(
    psi: &State,
    horizon: f64,
    sw: &SwitchingSpec,
    pot: &PotentialSpec,
    cfg: &StepperConfig,
) -> Result<f64> {
    let a = adiabatic_standard_s(psi, horizon, sw, pot, cfg)?;
    let b = adiabatic_standard_s(psi, 2.0 * horizon, sw, pot, cfg)?;
    distance(&a, &b)
}

/// `arg⟨ψ, Sψ⟩`, refused when the forward overlap is too small to define it.
pub fn overall_phase(psi: &State, scattered: &State) -> Result<f64> {
    let z = overlap(psi, scattered)?;
    if z.norm() <= MIN_FORWARD_OVERLAP {
        return Err(Error::precondition(format!(
            "forward overlap |<psi, S psi>| = {:.3} is below {MIN_FORWARD_OVERLAP}; \
             the probe is not transmission dominated",
            z.norm()
        )));
    }
    Ok(z.arg())
}

/// Sweep of the switching rate.
#[derive(Debug, Clone)]
pub struct IRReport {
    pub epsilons: Vec<f64>,
    pub horizons: Vec<f64>,
    /// Unwrapped `arg⟨ψ, S₀^ε ψ⟩`.
    pub phases: Vec<f64>,
    /// `|⟨ψ, S₀^ε ψ⟩|`
    pub moduli: Vec<f64>,
    /// `‖S₀^{ε_{j+1}}ψ - S₀^{ε_j}ψ‖`
    pub undressed_distances: Vec<f64>,
    /// `‖S_fact^{ε_{j+1}}ψ - S_fact^{ε_j}ψ‖`
    pub factorized_distances: Vec<f64>,
    pub norm_drift: f64,
    pub undressed: Vec<State>,
    pub factorized: Vec<State>,
}

impl IRReport {
    /// `max factorized / min undressed` Cauchy distance.
    pub fn dichotomy_ratio(&self) -> f64 {
        let fact = self
            .factorized_distances
            .iter()
            .copied()
            .fold(0.0, f64::max);
        let bare = self
            .undressed_distances
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        fact / bare
    }

    /// Last factorized Cauchy distance.
    pub fn tail(&self) -> f64 {
        self.factorized_distances.last().copied().unwrap_or(0.0)
    }
}

/// Horizon used for a given switching: `T = min_horizon(sw)`, rounded up to a
/// whole number of steps.
pub fn horizon_for(sw: &SwitchingSpec, cfg: &StepperConfig) -> f64 {
    (min_horizon(sw) / cfg.dt).ceil() * cfg.dt
}

/// Undressed and factorized S on `psi` for each ε of `epsilons` (decreasing),
/// with the switching origin at `origin_shift`.
pub fn ir_report(
    psi: &State,
    epsilons: &[f64],
    origin_shift: f64,
    pot: &PotentialSpec,
    cfg: &StepperConfig,
) -> Result<IRReport> {
    if epsilons.len() < 2 {
        return Err(Error::config("epsilon schedule needs at least two values"));
    }
    if epsilons.iter().any(|&e| e.is_nan() || e <= 0.0) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::config(
            "epsilon schedule must be positive and strictly decreasing",
        ));
    }
    let runs: Vec<(f64, State)> = epsilons
        .par_iter()
        .map(|&eps| {
            let sw = SwitchingSpec::new(eps, origin_shift);
            let horizon = horizon_for(&sw, cfg);
            adiabatic_standard_s(psi, horizon, &sw, pot, cfg).map(|s| (horizon, s))
        })
        .collect::<Result<_>>()?;
    let (horizons, undressed): (Vec<f64>, Vec<State>) = runs.into_iter().unzip();
    let factorized: Vec<State> = epsilons
        .par_iter()
        .zip(&horizons)
        .map(|(&eps, &horizon)| {
            factorized_s(
                psi,
                horizon,
                &SwitchingSpec::new(eps, origin_shift),
                pot,
                cfg,
            )
        })
        .collect::<Result<_>>()?;

    let mut phases = Vec::with_capacity(epsilons.len());
    let mut moduli = Vec::with_capacity(epsilons.len());
    let mut unwrapped = 0.0;
    for (j, s) in undressed.iter().enumerate() {
        let z = overlap(psi, s)?;
        let raw = overall_phase(psi, s)?;
        if j == 0 {
            unwrapped = raw;
        } else {
            let step = Complex64::cis(raw - unwrapped).arg();
            if step.abs() > std::f64::consts::FRAC_PI_2 {
                return Err(Error::UnwrapAmbiguity(format!(
                    "phase step {step:.3} between epsilon = {} and {}; use a denser epsilon schedule",
                    epsilons[j - 1],
                    epsilons[j]
                )));
            }
            unwrapped += step;
        }
        phases.push(unwrapped);
        moduli.push(z.norm());
    }
    let pairs = |states: &[State]| -> Result<Vec<f64>> {
        states.windows(2).map(|w| distance(&w[1], &w[0])).collect()
    };
    let norm_drift = undressed
        .iter()
        .chain(&factorized)
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(IRReport {
        epsilons: epsilons.to_vec(),
        horizons,
        phases,
        moduli,
        undressed_distances: pairs(&undressed)?,
        factorized_distances: pairs(&factorized)?,
        norm_drift,
        undressed,
        factorized,
    })
}

/// Least-squares slope of the unwrapped phase against `ln(1/ε)`.
pub fn ir_slope_fit(epsilons: &[f64], phases: &[f64]) -> Result<LineFit> {
    if epsilons.len() < 4 || epsilons.len() != phases.len() {
        return Err(Error::Fit(format!(
            "IR slope fit needs at least 4 epsilon points, got {} and {} phases",
            epsilons.len(),
            phases.len()
        )));
    }
    let x: Vec<f64> = epsilons.iter().map(|e| -e.ln()).collect();
    fit_line(&x, phases)
}

/// Slope of `arg⟨ψ, S₀^ε ψ⟩` against `ln(1/ε)` implied by the two dressings:
/// `-2αm/p̄` with `1/p̄ = ⟨1/|p|⟩`.
pub fn predicted_ir_slope(psi: &State, alpha: f64) -> Result<f64> {
    let m = psi.grid().mass();
    let p_bar = 1.0 / expect(psi, &Observable::MomentumInverseAbs)?;
    Ok(-2.0 * alpha * m / p_bar)
}

/// `‖S_fact(t₀)ψ - S_fact(0)ψ‖` at one switching rate and a common horizon.
///
/// With `ε = 0` the coupling is never switched and the undressed free-reference
/// S is compared instead.
pub fn switching_shift_check(
    psi: &State,
    horizon: f64,
    sw: &SwitchingSpec,
    pot: &PotentialSpec,
    cfg: &StepperConfig,
) -> Result<f64> {
    if sw.origin_shift.abs() > 10.0 {
        return Err(Error::precondition(format!(
            "origin shift |t0| = {} exceeds 10",
            sw.origin_shift.abs()
        )));
    }
    if sw.origin_shift == 0.0 {
        return Ok(0.0);
    }
    let unshifted = SwitchingSpec::new(sw.epsilon, 0.0);
    if sw.is_off() {
        let a = s_matrix_on_packet(psi, horizon, &Reference::Free, pot, sw, cfg)?;
        let b = s_matrix_on_packet(psi, horizon, &Reference::Free, pot, &unshifted, cfg)?;
        return distance(&a, &b);
    }
    let a = factorized_s(psi, horizon, sw, pot, cfg)?;
    let b = factorized_s(psi, horizon, &unshifted, pot, cfg)?;
    distance(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gaussian_packet, make_grid, PacketSpec};

    fn setup(alpha: f64) -> (State, PotentialSpec, StepperConfig) {
        let g = make_grid(1024, 1024.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(0.0, 2.0, 8.0)).unwrap();
        (
            psi,
            PotentialSpec::coulomb(alpha, 1.0),
            StepperConfig::new(0.05).with_monitor(500.0),
        )
    }

    #[test]
    fn switching_integral_type() {
        let l = SwitchingIntegral::new(0.01, f64::INFINITY).unwrap();
        assert!((l.value - l.limit()).abs() < 1e-14);
        assert!(SwitchingIntegral::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn horizon_must_switch_off_coupling() {
        let (psi, pot, cfg) = setup(0.5);
        let sw = SwitchingSpec::new(0.2, 0.0);
        let err = adiabatic_standard_s(&psi, 50.0, &sw, &pot, &cfg).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("ln(1e8)")),
            "{err}"
        );
        assert!(adiabatic_standard_s(&psi, 100.0, &SwitchingSpec::off(), &pot, &cfg).is_err());
    }

    #[test]
    fn zero_coupling_is_identity() {
        let (psi, pot, cfg) = setup(0.0);
        let sw = SwitchingSpec::new(0.5, 0.0);
        let t = horizon_for(&sw, &cfg);
        let s0 = adiabatic_standard_s(&psi, t, &sw, &pot, &cfg).unwrap();
        let sf = factorized_s(&psi, t, &sw, &pot, &cfg).unwrap();
        assert!(distance(&s0, &psi).unwrap() < 1e-10);
        assert!(distance(&sf, &psi).unwrap() < 1e-10);
    }

    #[test]
    fn dressing_is_unitary_and_invertible() {
        let (psi, _, _) = setup(0.5);
        let d = dollard_dressing(&psi, 3.7, 0.5);
        assert!((d.norm() - 1.0).abs() < 1e-13);
        assert!(distance(&dollard_dressing(&d, -3.7, 0.5), &psi).unwrap() < 1e-13);
    }

    #[test]
    fn slope_fit_on_synthetic_phases() {
        let eps = [0.08, 0.04, 0.02, 0.01];
        let phases: Vec<f64> = eps.iter().map(|e: &f64| 0.5 * (1.0 / e).ln()).collect();
        let fit = ir_slope_fit(&eps, &phases).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!(ir_slope_fit(&eps[..3], &phases[..3]).is_err());
        let flat = ir_slope_fit(&eps, &[1.0; 4]).unwrap();
        assert!(flat.slope.abs() < 1e-12);
    }

    #[test]
    fn predicted_slope_scalar_value() {
        let g = make_grid(4096, 4096.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, &PacketSpec::new(0.0, 2.0, 10.0)).unwrap();
        let slope = predicted_ir_slope(&psi, 0.5).unwrap();
        assert!((slope + 0.5).abs() < 0.005, "{slope}");
    }

    #[test]
    fn shift_trivial_cases() {
        let (psi, pot, cfg) = setup(0.5);
        let sw = SwitchingSpec::new(0.2, 0.0);
        assert_eq!(
            switching_shift_check(&psi, 100.0, &sw, &pot, &cfg).unwrap(),
            0.0
        );
        let short = PotentialSpec::short_range(0.5, 1.0, 0.5);
        let unswitched = SwitchingSpec::new(0.0, 5.0);
        let d = switching_shift_check(&psi, 60.0, &unswitched, &short, &cfg).unwrap();
        assert!(d < 1e-6, "{d}");
        assert!(
            switching_shift_check(&psi, 100.0, &SwitchingSpec::new(0.2, 11.0), &pot, &cfg).is_err()
        );
    }

    #[test]
    fn report_rejects_bad_schedules() {
        let (psi, pot, cfg) = setup(0.5);
        assert!(ir_report(&psi, &[0.1], 0.0, &pot, &cfg).is_err());
        assert!(ir_report(&psi, &[0.1, 0.2], 0.0, &pot, &cfg).is_err());
    }
}
