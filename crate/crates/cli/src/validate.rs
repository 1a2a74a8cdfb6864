//! Preflight checks run before any propagation.

use dollard_core::adiabatic::{horizon_for, min_horizon};
use dollard_core::dense::MAX_DENSE_POINTS;
use dollard_core::moller::preflight;
use dollard_core::{gaussian_packet, Grid, PotentialKind, StepperConfig, SwitchingSpec};

use crate::config::{ExperimentConfig, ExperimentKind};

/// Largest switching-origin shift accepted by the factorized S comparison.
pub const MAX_ORIGIN_SHIFT: f64 = 10.0;

/// Every problem that would stop `config` from running; empty means runnable.
pub fn validate(config: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    check_schedules(config, &mut out);
    check_experiment(config, &mut out);
    if let Err(e) = config.potential.validate() {
        out.push(e.to_string());
    }
    if !(config.p_min.is_finite() && config.p_min >= 0.0) {
        out.push(format!(
            "probes.p_min = {} must be non-negative",
            config.p_min
        ));
    }

    let g = &config.grid;
    let grid = match Grid::new(g.n, g.length, g.mass) {
        Ok(grid) => grid,
        Err(e) => {
            out.push(format!("grid: {e}"));
            return out;
        }
    };
    if config.experiment == ExperimentKind::OracleCrosscheck && g.n > MAX_DENSE_POINTS {
        out.push(format!(
            "grid.n = {} exceeds the dense oracle limit of {MAX_DENSE_POINTS} points",
            g.n
        ));
    }
    let mut stepper =
        StepperConfig::new(config.stepper.dt).with_record_stride(config.stepper.record_stride);
    if let Some(w) = config.stepper.monitor {
        stepper = stepper.with_monitor(w);
    }
    let stepper_ok = match stepper.validate(&grid) {
        Ok(()) => true,
        Err(e) => {
            out.push(e.to_string());
            false
        }
    };

    let reach = transport_horizon(config);
    for (id, spec) in &config.probes {
        if let Err(e) = spec.check_scattering(config.p_min) {
            out.push(format!("probe.{id}: {e}"));
        }
        let psi = match gaussian_packet(&grid, spec) {
            Ok(psi) => psi,
            Err(e) => {
                out.push(format!("probe.{id}: {e}"));
                continue;
            }
        };
        if let (true, Some((t, what))) = (stepper_ok, &reach) {
            if let Err(e) = preflight(&psi, *t, &stepper) {
                out.push(format!("probe.{id}: support margin over {what}: {e}"));
            }
        }
    }
    out
}

fn check_schedules(config: &ExperimentConfig, out: &mut Vec<String>) {
    let s = &config.schedule;
    let name = config.experiment.name();
    let mut need = |field: &str, list: &[f64], min: usize| {
        if list.len() < min {
            out.push(format!(
                "{field}: experiment {name} needs at least {min} value(s), got {}",
                list.len()
            ));
        }
    };
    match config.experiment {
        ExperimentKind::DollardVsFree | ExperimentKind::ShortRangeControl => {
            need("schedule.horizons", &s.horizons, 4)
        }
        ExperimentKind::Interpolation => {
            need("schedule.horizons", &s.horizons, 1);
            need("schedule.increments", &s.increments, 1);
        }
        ExperimentKind::GroupLaw => {
            need("schedule.times", &s.times, 1);
            need("schedule.increments", &s.increments, 1);
        }
        ExperimentKind::AsymptoticObservables => {
            need("schedule.horizons", &s.horizons, 1);
            need("schedule.times", &s.times, 3);
        }
        ExperimentKind::EnergyIdentity => need("schedule.horizons", &s.horizons, 2),
        ExperimentKind::AdiabaticIr => need("schedule.epsilons", &s.epsilons, 4),
        ExperimentKind::SwitchingShift => need("schedule.epsilons", &s.epsilons, 2),
        ExperimentKind::TimeReversal => need("schedule.horizons", &s.horizons, 1),
        ExperimentKind::OracleCrosscheck => {
            need("schedule.times", &s.times, 1);
            need("schedule.horizons", &s.horizons, 1);
        }
    }
    let increasing = |v: &[f64]| v.iter().all(|&x| x > 0.0) && v.windows(2).all(|w| w[1] > w[0]);
    if !increasing(&s.horizons) {
        out.push("schedule.horizons: must be positive and strictly increasing".into());
    }
    if !increasing(&s.times) {
        out.push("schedule.times: must be positive and strictly increasing".into());
    }
    if !(s.epsilons.iter().all(|&e| e > 0.0) && s.epsilons.windows(2).all(|w| w[1] < w[0])) {
        out.push("schedule.epsilons: must be positive and strictly decreasing".into());
    }
    if s.increments.iter().any(|x| !x.is_finite()) {
        out.push("schedule.increments: must be finite".into());
    }
}

fn check_experiment(config: &ExperimentConfig, out: &mut Vec<String>) {
    let short = matches!(
        config.potential.kind,
        PotentialKind::ShortRangeControl { .. }
    );
    match config.experiment {
        ExperimentKind::DollardVsFree if short => {
            out.push("potential.kind: dollard-vs-free runs on coulomb".into())
        }
        ExperimentKind::ShortRangeControl if !short => {
            out.push("potential.kind: short-range-control runs on short-range".into())
        }
        ExperimentKind::GroupLaw => {
            let t_min = config.schedule.times.first().copied().unwrap_or(0.0);
            for &s in &config.schedule.increments {
                if s.abs() > 0.5 * t_min {
                    out.push(format!(
                        "schedule.increments: |s| = {} exceeds t/2 = {} at the earliest time",
                        s.abs(),
                        0.5 * t_min
                    ));
                }
            }
        }
        ExperimentKind::SwitchingShift if config.origin_shift == 0.0 => {
            out.push("switching.origin_shift: switching-shift needs a nonzero shift".into())
        }
        _ => {}
    }
    if config.origin_shift.abs() > MAX_ORIGIN_SHIFT {
        out.push(format!(
            "switching.origin_shift: |t0| = {} exceeds {MAX_ORIGIN_SHIFT}",
            config.origin_shift.abs()
        ));
    }
    if config.experiment == ExperimentKind::TimeReversal {
        if config.pairs.is_empty() {
            out.push("pair.*: time-reversal needs at least one probe pair".into());
        }
        for (id, (a, b)) in &config.pairs {
            for p in [a, b] {
                if !config.probes.contains_key(p) {
                    out.push(format!("pair.{id}: unknown probe `{p}`"));
                }
            }
        }
    } else if config.probes.is_empty() {
        out.push("probe.*: at least one probe is required".into());
    }
}

/// Longest free-transport time a probe must survive inside the monitored
/// window, with a label for diagnostics.
fn transport_horizon(config: &ExperimentConfig) -> Option<(f64, String)> {
    let s = &config.schedule;
    let max = |v: &[f64]| {
        v.iter()
            .copied()
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
    };
    match config.experiment {
        ExperimentKind::DollardVsFree
        | ExperimentKind::ShortRangeControl
        | ExperimentKind::EnergyIdentity
        | ExperimentKind::TimeReversal => max(&s.horizons).map(|t| (t, format!("T = {t}"))),
        ExperimentKind::Interpolation => {
            let s_max = s.increments.iter().map(|x| x.abs()).fold(0.0, f64::max);
            max(&s.horizons).map(|t| (2.0 * t + s_max, format!("the 2T = {} Cauchy tail", 2.0 * t)))
        }
        ExperimentKind::AsymptoticObservables => {
            let t = max(&s.horizons)?.max(max(&s.times).unwrap_or(0.0));
            Some((t, format!("T = {t}")))
        }
        ExperimentKind::OracleCrosscheck => {
            let t = max(&s.horizons)
                .unwrap_or(0.0)
                .max(max(&s.times).unwrap_or(0.0));
            Some((t, format!("t = {t}")))
        }
        ExperimentKind::AdiabaticIr | ExperimentKind::SwitchingShift => {
            let eps = s.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
            if !(eps > 0.0 && eps.is_finite()) {
                return None;
            }
            let sw = SwitchingSpec::new(eps, config.origin_shift);
            let t = horizon_for(&sw, &StepperConfig::new(config.stepper.dt));
            Some((
                t,
                format!(
                    "the eps*T coupling T >= ln(1e8)/eps + |t0| = {:.1} at eps = {eps}",
                    min_horizon(&sw)
                ),
            ))
        }
        ExperimentKind::GroupLaw => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> String {
        "\
experiment = dollard-vs-free
grid.n = 4096
grid.length = 4096
potential.kind = coulomb
potential.alpha = 0.5
probe.a = 0, 2, 10
schedule.horizons = 64, 128, 256, 512
stepper.dt = 0.05
stepper.monitor = 2000
"
        .to_string()
    }

    fn diagnostics(text: &str) -> Vec<String> {
        validate(&ExperimentConfig::from_text(text).unwrap())
    }

    #[test]
    fn runnable_config_is_clean() {
        assert!(
            diagnostics(&base()).is_empty(),
            "{:?}",
            diagnostics(&base())
        );
    }

    #[test]
    fn empty_schedule_names_the_field() {
        let d = diagnostics(&base().replace("64, 128, 256, 512", ""));
        assert!(
            d.iter().any(|m| m.starts_with("schedule.horizons")),
            "{d:?}"
        );
    }

    #[test]
    fn stability_guard_is_cited() {
        let d = diagnostics(&base().replace("stepper.dt = 0.05", "stepper.dt = 0.2"));
        assert!(d.iter().any(|m| m.contains("stability guard")), "{d:?}");
    }

    #[test]
    fn slow_probe_violates_clearance() {
        let d = diagnostics(&base().replace("0, 2, 10", "0, 0.2, 10"));
        assert!(d.iter().any(|m| m.contains("momentum clearance")), "{d:?}");
    }

    #[test]
    fn long_horizon_breaks_support_margin() {
        let d = diagnostics(&base().replace("256, 512", "256, 2048"));
        assert!(d.iter().any(|m| m.contains("support margin")), "{d:?}");
    }

    #[test]
    fn small_epsilon_needs_a_long_horizon() {
        let text = base()
            .replace("dollard-vs-free", "adiabatic-ir")
            .replace("schedule.horizons", "schedule.epsilons")
            .replace("64, 128, 256, 512", "0.08, 0.04, 0.02, 0.01");
        let d = diagnostics(&text);
        assert!(d.iter().any(|m| m.contains("eps*T coupling")), "{d:?}");
    }

    #[test]
    fn oracle_refuses_large_grids() {
        let text = base()
            .replace("dollard-vs-free", "oracle-crosscheck")
            .replace("64, 128, 256, 512", "0.1")
            + "schedule.times = 0.2\n";
        let d = diagnostics(&text);
        assert!(d.iter().any(|m| m.contains("dense oracle")), "{d:?}");
    }
}
