//! Classical trajectories `m ẍ = -V'(x)` by fixed-step RK4.

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
}

fn rk4_step(pot: &PotentialSpec, mass: f64, x: f64, p: f64, h: f64) -> (f64, f64) {
    let f = |x: f64, p: f64| (p / mass, -pot.derivative(x));
    let (k1x, k1p) = f(x, p);
    let (k2x, k2p) = f(x + 0.5 * h * k1x, p + 0.5 * h * k1p);
    let (k3x, k3p) = f(x + 0.5 * h * k2x, p + 0.5 * h * k2p);
    let (k4x, k4p) = f(x + h * k3x, p + h * k3p);
    (
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )
}

/// Integrate from `(x0, p0)` at `t = 0`, recording the state at each time of
/// `checkpoints` (positive, increasing).
pub fn integrate(
    pot: &PotentialSpec,
    mass: f64,
    x0: f64,
    p0: f64,
    checkpoints: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::config(format!(
            "classical dt = {dt} must be positive"
        )));
    }
    if checkpoints.iter().any(|&t| t < 0.0) || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "classical checkpoints must be non-negative and strictly increasing",
        ));
    }
    let mut out = Trajectory::default();
    let (mut x, mut p, mut t) = (x0, p0, 0.0);
    for &target in checkpoints {
        let steps = ((target - t) / dt).ceil() as usize;
        if steps > 0 {
            let h = (target - t) / steps as f64;
            for _ in 0..steps {
                (x, p) = rk4_step(pot, mass, x, p, h);
            }
        }
        t = target;
        out.times.push(t);
        out.positions.push(x);
        out.momenta.push(p);
    }
    Ok(out)
}

/// Launch momentum at `x0` that reaches asymptotic momentum `p_inf` (moving
/// away from the origin on the side of `p_inf`).
pub fn launch_momentum(pot: &PotentialSpec, mass: f64, x0: f64, p_inf: f64) -> Result<f64> {
    let p2 = p_inf * p_inf - 2.0 * mass * pot.value(x0);
    if p2 <= 0.0 {
        return Err(Error::precondition(format!(
            "energy p^2/2m = {} does not exceed V({x0}) = {}",
            0.5 * p_inf * p_inf / mass,
            pot.value(x0)
        )));
    }
    Ok(p_inf.signum() * p2.sqrt())
}

/// Fit `x(t) - p_inf t/m = c ln t + d` over `checkpoints` for the trajectory
/// launched from the barrier top with asymptotic momentum `p_inf`.
pub fn drift_fit(
    pot: &PotentialSpec,
    mass: f64,
    p_inf: f64,
    checkpoints: &[f64],
) -> Result<LineFit> {
    let p0 = launch_momentum(pot, mass, 0.0, p_inf)?;
    let dt = 0.01 * mass / p0.abs().max(1e-3);
    let traj = integrate(pot, mass, 0.0, p0, checkpoints, dt.min(0.05))?;
    let ln_t: Vec<f64> = traj.times.iter().map(|t| t.ln()).collect();
    let lag: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.positions)
        .map(|(t, x)| x - p_inf * t / mass)
        .collect();
    fit_line(&ln_t, &lag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_motion_is_linear() {
        let pot = PotentialSpec::coulomb(0.0, 1.0);
        let tr = integrate(&pot, 2.0, 1.0, 3.0, &[1.0, 10.0], 0.1).unwrap();
        assert!((tr.positions[1] - 16.0).abs() < 1e-12);
        assert_eq!(tr.momenta[1], 3.0);
    }

    #[test]
    fn energy_is_conserved() {
        let pot = PotentialSpec::coulomb(0.5, 1.0);
        let m = 1.0;
        let tr = integrate(&pot, m, -20.0, 2.0, &[5.0, 50.0, 200.0], 0.01).unwrap();
        let e0 = 2.0 + pot.value(-20.0);
        for (x, p) in tr.positions.iter().zip(&tr.momenta) {
            assert!((0.5 * p * p / m + pot.value(*x) - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn low_energy_reflects() {
        let pot = PotentialSpec::coulomb(0.5, 1.0);
        let tr = integrate(&pot, 10.0, -50.0, 2.0, &[2000.0], 0.05).unwrap();
        assert!(tr.momenta[0] < -1.9 && tr.positions[0] < -50.0);
    }

    #[test]
    fn coulomb_drift_coefficient() {
        // x(t) ≈ p t/m - (αm/p²) ln t for a repulsive 1/x tail
        let pot = PotentialSpec::coulomb(0.5, 1.0);
        let schedule: Vec<f64> = (0..8).map(|j| 64.0 * 2f64.powi(j)).collect();
        let fit = drift_fit(&pot, 1.0, 3.0, &schedule).unwrap();
        assert!((fit.slope + 0.5 / 9.0).abs() < 0.003, "{}", fit.slope);
        let short = PotentialSpec::short_range(0.5, 1.0, 0.5);
        assert!(drift_fit(&short, 1.0, 3.0, &schedule).unwrap().slope.abs() < 1e-6);
    }

    #[test]
    fn launch_below_barrier_fails() {
        let pot = PotentialSpec::coulomb(0.5, 1.0);
        assert!(launch_momentum(&pot, 1.0, 0.0, 0.5).is_err());
    }
}
