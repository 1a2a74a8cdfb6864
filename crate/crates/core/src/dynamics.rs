//! Propagators.
//!
//! The free, Dollard and adiabatic Dollard dynamics are diagonal in momentum
//! and applied in closed form. The interacting dynamics uses Strang splitting
//! `e^{-iV h/2} e^{-iK h} e^{-iV h/2}` with the switched coupling
//! `α e^{-ε|t+t₀|}` sampled at each step's midpoint.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::special::switching_integral;
use crate::spectral::{Grid, Representation, State};

/// Adiabatic switching `g → g e^{-ε|t + t₀|}`; `ε = 0` leaves the coupling on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingSpec {
    pub epsilon: f64,
    pub origin_shift: f64,
}

impl Default for SwitchingSpec {
    fn default() -> Self {
        Self::off()
    }
}

impl SwitchingSpec {
    pub fn off() -> Self {
        Self {
            epsilon: 0.0,
            origin_shift: 0.0,
        }
    }

    pub fn new(epsilon: f64, origin_shift: f64) -> Self {
        Self {
            epsilon,
            origin_shift,
        }
    }

    pub fn is_off(&self) -> bool {
        self.epsilon == 0.0
    }

    pub fn coupling(&self, t: f64) -> f64 {
        if self.epsilon == 0.0 {
            1.0
        } else {
            (-self.epsilon * (t + self.origin_shift).abs()).exp()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config(format!(
                "switching.epsilon = {} must be finite and non-negative",
                self.epsilon
            )));
        }
        if !self.origin_shift.is_finite() {
            return Err(Error::config("switching.origin_shift must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Strang,
}

/// Split-step parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Steps between support-margin checks.
    pub record_stride: usize,
    /// Half-width of the monitored window; `None` disables monitoring.
    pub monitor_window: Option<f64>,
}

/// Largest admissible `dt · E_max`.
pub const STABILITY_LIMIT: f64 = 0.5;
/// Norm allowed outside the monitored window.
pub const SUPPORT_TOLERANCE: f64 = 1e-8;

impl StepperConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            scheme: Scheme::Strang,
            record_stride: 64,
            monitor_window: None,
        }
    }

    pub fn with_monitor(mut self, half_width: f64) -> Self {
        self.monitor_window = Some(half_width);
        self
    }

    pub fn without_monitor(mut self) -> Self {
        self.monitor_window = None;
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!(
                "stepper.dt = {} must be positive",
                self.dt
            )));
        }
        let product = self.dt * grid.max_kinetic();
        if product >= STABILITY_LIMIT {
            return Err(Error::config(format!(
                "stability guard dt * E_max < {STABILITY_LIMIT} violated: {} * {} = {product}",
                self.dt,
                grid.max_kinetic()
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::config("stepper.record_stride must be at least 1"));
        }
        if let Some(w) = self.monitor_window {
            if !(w > 0.0 && w <= 0.5 * grid.box_length()) {
                return Err(Error::config(format!(
                    "monitor window {w} must lie in (0, L/2 = {}]",
                    0.5 * grid.box_length()
                )));
            }
        }
        Ok(())
    }
}

static STEPS_TAKEN: AtomicU64 = AtomicU64::new(0);

/// Split steps taken by this process so far.
pub fn steps_taken() -> u64 {
    STEPS_TAKEN.load(Ordering::Relaxed)
}

/// `U₀(t) = e^{-i H₀ t}`.
pub fn free_propagate(state: &State, t: f64) -> State {
    let m = state.grid().mass();
    state.apply_momentum_diagonal(|k| Complex64::cis(-0.5 * k * k * t / m))
}

/// Dollard phase `Φ(k, t) = -sign(t) (αm/|k|) ln((|k||t| + m)/m)` on the
/// momentum lattice (FFT order), zero in the `k = 0` bin.
pub fn dollard_phase(grid: &Grid, t: f64, alpha: f64) -> Vec<f64> {
    let m = grid.mass();
    grid.momenta()
        .iter()
        .map(|&k| dollard_phase_at(k, t, alpha, m))
        .collect()
}

pub fn dollard_phase_at(k: f64, t: f64, alpha: f64, mass: f64) -> f64 {
    if k == 0.0 || t == 0.0 || alpha == 0.0 {
        return 0.0;
    }
    let ak = k.abs();
    // ln_1p keeps small |k||t|/m accurate
    -t.signum() * (alpha * mass / ak) * (ak * t.abs() / mass).ln_1p()
}

/// Symbol `αm/(|k||t| + m)` of the regularized Dollard correction to `H₀`.
pub fn dollard_generator_symbol(k: f64, t: f64, alpha: f64, mass: f64) -> f64 {
    alpha * mass / (k.abs() * t.abs() + mass)
}

/// `U_D(t) = U₀(t) e^{iΦ(p, t)}`.
pub fn dollard_propagate(state: &State, t: f64, alpha: f64) -> State {
    let m = state.grid().mass();
    state.apply_momentum_diagonal(|k| {
        Complex64::cis(-0.5 * k * k * t / m + dollard_phase_at(k, t, alpha, m))
    })
}

/// Diagonal symbol of the one-body `V_D = αm/|p|` (zero at `k = 0`).
pub fn dollard_potential_symbol(k: f64, alpha: f64, mass: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        alpha * mass / k.abs()
    }
}

/// `U_D^ε(t) = U₀(t) e^{-i L(ε,t) V_D}`.
pub fn adiabatic_dollard_propagate(state: &State, t: f64, alpha: f64, sw: &SwitchingSpec) -> State {
    let m = state.grid().mass();
    let l = switching_integral(sw.epsilon, t);
    state.apply_momentum_diagonal(|k| {
        Complex64::cis(-0.5 * k * k * t / m - l * dollard_potential_symbol(k, alpha, m))
    })
}

/// Full dynamics from `t_from` to `t_to` (either orientation).
pub fn full_propagate(
    state: &State,
    t_from: f64,
    t_to: f64,
    pot: &PotentialSpec,
    sw: &SwitchingSpec,
    cfg: &StepperConfig,
) -> Result<State> {
    let mut stepper = SplitStepper::new(state.grid(), pot, sw, cfg)?;
    stepper.run(state, t_from, t_to)
}

/// Full dynamics visiting `checkpoints` (ordered along the direction of
/// propagation); `observer` sees the state at each of them.
pub fn full_propagate_observed(
    state: &State,
    t_from: f64,
    checkpoints: &[f64],
    pot: &PotentialSpec,
    sw: &SwitchingSpec,
    cfg: &StepperConfig,
    mut observer: impl FnMut(f64, &State) -> Result<()>,
) -> Result<State> {
    let mut stepper = SplitStepper::new(state.grid(), pot, sw, cfg)?;
    let mut current = state.clone();
    let mut t = t_from;
    for &next in checkpoints {
        current = stepper.run(&current, t, next)?;
        t = next;
        observer(t, &current)?;
    }
    Ok(current)
}

/// Reusable Strang integrator for one grid, potential and switching.
pub struct SplitStepper {
    grid: Grid,
    potential: Vec<f64>,
    sw: SwitchingSpec,
    cfg: StepperConfig,
    scratch: Vec<Complex64>,
}

impl SplitStepper {
    pub fn new(
        grid: &Grid,
        pot: &PotentialSpec,
        sw: &SwitchingSpec,
        cfg: &StepperConfig,
    ) -> Result<Self> {
        pot.validate()?;
        sw.validate()?;
        cfg.validate(grid)?;
        let potential = grid.positions().iter().map(|&x| pot.value(x)).collect();
        Ok(Self {
            grid: grid.clone(),
            potential,
            sw: *sw,
            cfg: *cfg,
            scratch: Vec::new(),
        })
    }

    fn phase_factors(&self, weight: f64, out: &mut [Complex64]) {
        for (f, &v) in out.iter_mut().zip(&self.potential) {
            *f = Complex64::cis(-weight * v);
        }
    }

    fn apply(buf: &mut [Complex64], factors: &[Complex64]) {
        for (a, f) in buf.iter_mut().zip(factors) {
            *a *= f;
        }
    }

    fn check_support(&self, buf: &[Complex64], t: f64) -> Result<()> {
        let Some(window) = self.cfg.monitor_window else {
            return Ok(());
        };
        let outside: f64 = buf
            .iter()
            .zip(self.grid.positions())
            .filter(|(_, x)| x.abs() > window)
            .map(|(a, _)| a.norm_sqr())
            .sum::<f64>()
            * self.grid.dx();
        if outside > SUPPORT_TOLERANCE {
            return Err(Error::SupportMargin {
                time: t,
                mass_outside: outside,
                window,
            });
        }
        Ok(())
    }

    pub fn run(&mut self, state: &State, t_from: f64, t_to: f64) -> Result<State> {
        if state.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let span = t_to - t_from;
        let mut buf = state.to_position().into_amplitudes();
        if span == 0.0 {
            return State::new(&self.grid, Representation::Position, buf);
        }
        let steps = ((span.abs() / self.cfg.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let n = self.grid.n();
        let m = self.grid.mass();
        let inv_n = 1.0 / n as f64;
        let kinetic: Vec<Complex64> = self
            .grid
            .momenta()
            .iter()
            .map(|&k| Complex64::cis(-0.5 * k * k * h / m) * inv_n)
            .collect();
        let midpoint = |s: usize| t_from + (s as f64 + 0.5) * h;

        let constant = self.sw.is_off();
        let mut factors = vec![Complex64::default(); n];
        let mut merged = vec![Complex64::default(); n];
        if constant {
            self.phase_factors(0.5 * h, &mut factors);
            self.phase_factors(h, &mut merged);
        } else {
            self.phase_factors(0.5 * h * self.sw.coupling(midpoint(0)), &mut factors);
        }
        Self::apply(&mut buf, &factors);

        let mut scratch = std::mem::take(&mut self.scratch);
        for s in 0..steps {
            self.grid.fft_forward(&mut buf, &mut scratch);
            Self::apply(&mut buf, &kinetic);
            self.grid.fft_inverse(&mut buf, &mut scratch);
            if s + 1 < steps {
                if constant {
                    Self::apply(&mut buf, &merged);
                } else {
                    let weight = 0.5
                        * h
                        * (self.sw.coupling(midpoint(s)) + self.sw.coupling(midpoint(s + 1)));
                    self.phase_factors(weight, &mut factors);
                    Self::apply(&mut buf, &factors);
                }
                // diagonal potential phases leave |ψ_j| untouched, so the
                // half-merged state is fine for the margin check
                if (s + 1) % self.cfg.record_stride == 0 {
                    if let Err(e) = self.check_support(&buf, t_from + (s + 1) as f64 * h) {
                        STEPS_TAKEN.fetch_add(s as u64 + 1, Ordering::Relaxed);
                        return Err(e);
                    }
                }
            } else {
                if !constant {
                    self.phase_factors(0.5 * h * self.sw.coupling(midpoint(s)), &mut factors);
                }
                Self::apply(&mut buf, &factors);
            }
        }
        self.scratch = scratch;
        STEPS_TAKEN.fetch_add(steps as u64, Ordering::Relaxed);
        self.check_support(&buf, t_to)?;
        State::new(&self.grid, Representation::Position, buf)
    }
}
