//! Experiment configuration: flat `key = value` text with dotted sections.
//!
//! ```text
//! # comment
//! experiment = dollard-vs-free
//! grid.n = 16384
//! grid.length = 16384
//! potential.kind = coulomb
//! potential.alpha = 0.5
//! probe.p2 = 0, 2, 10
//! schedule.horizons = 64, 128, 256
//! stepper.dt = 0.05
//! ```
//!
//! The canonical text lists every key in sorted order with floats in shortest
//! round-trip form; the config digest is the SHA-256 of that text.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dollard_core::{PacketSpec, PotentialKind, PotentialSpec};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    DollardVsFree,
    ShortRangeControl,
    Interpolation,
    GroupLaw,
    AsymptoticObservables,
    EnergyIdentity,
    AdiabaticIr,
    SwitchingShift,
    TimeReversal,
    OracleCrosscheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::DollardVsFree,
        ExperimentKind::ShortRangeControl,
        ExperimentKind::Interpolation,
        ExperimentKind::GroupLaw,
        ExperimentKind::AsymptoticObservables,
        ExperimentKind::EnergyIdentity,
        ExperimentKind::AdiabaticIr,
        ExperimentKind::SwitchingShift,
        ExperimentKind::TimeReversal,
        ExperimentKind::OracleCrosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DollardVsFree => "dollard-vs-free",
            ExperimentKind::ShortRangeControl => "short-range-control",
            ExperimentKind::Interpolation => "interpolation",
            ExperimentKind::GroupLaw => "group-law",
            ExperimentKind::AsymptoticObservables => "asymptotic-observables",
            ExperimentKind::EnergyIdentity => "energy-identity",
            ExperimentKind::AdiabaticIr => "adiabatic-ir",
            ExperimentKind::SwitchingShift => "switching-shift",
            ExperimentKind::TimeReversal => "time-reversal",
            ExperimentKind::OracleCrosscheck => "oracle-crosscheck",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::DollardVsFree => {
                "Cauchy diagnostics of free- and Dollard-reference wave operators on a Coulomb tail"
            }
            ExperimentKind::ShortRangeControl => {
                "the same diagnostics on a short-range potential, where the roles swap"
            }
            ExperimentKind::Interpolation => "residual of U(s) Omega = Omega U0(s)",
            ExperimentKind::GroupLaw => {
                "asymptotic dynamics D_t(s) against U0(s), 1/t rate and group law"
            }
            ExperimentKind::AsymptoticObservables => {
                "momentum limit and logarithmic position drift along full trajectories"
            }
            ExperimentKind::EnergyIdentity => "<Omega phi, H Omega phi> against <phi, H0 phi>",
            ExperimentKind::AdiabaticIr => {
                "phase of the switched S-matrix against ln(1/eps) and its Dollard factorization"
            }
            ExperimentKind::SwitchingShift => {
                "dependence of the factorized S on the switching origin"
            }
            ExperimentKind::TimeReversal => {
                "<phi, S psi> against conj<K phi, S* K psi>, elastic unitarity"
            }
            ExperimentKind::OracleCrosscheck => {
                "split-step propagator and S-matrix against dense diagonalization"
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                CliError::config(format!(
                    "experiment: unknown experiment `{s}` (see list-experiments)"
                ))
            })
    }
}

/// Reference dynamics for the wave operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Dollard,
    Free,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Dollard => "dollard",
            ReferenceKind::Free => "free",
        }
    }
}

impl FromStr for ReferenceKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dollard" => Ok(ReferenceKind::Dollard),
            "free" => Ok(ReferenceKind::Free),
            other => Err(CliError::config(format!(
                "reference: expected `dollard` or `free`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub n: usize,
    pub length: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperParams {
    pub dt: f64,
    pub monitor: Option<f64>,
    pub record_stride: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schedules {
    pub horizons: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub increments: Vec<f64>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub grid: GridParams,
    pub potential: PotentialSpec,
    /// Probes by id, iterated in id order.
    pub probes: BTreeMap<String, PacketSpec>,
    /// Smallest admissible `|p0|` of a probe.
    pub p_min: f64,
    /// Named probe pairs `(phi, psi)` for matrix elements.
    pub pairs: BTreeMap<String, (String, String)>,
    pub reference: ReferenceKind,
    pub schedule: Schedules,
    pub origin_shift: f64,
    pub stepper: StepperParams,
    pub output_dir: String,
}

/// Parse `key = value` lines into a map. Blank lines and lines starting
/// with `#` are skipped; repeated keys are an error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::config(format!("line {}: empty key", lineno + 1)));
        }
        if map
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(CliError::config(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Apply a `key=value` override on top of parsed pairs.
pub fn apply_override(map: &mut BTreeMap<String, String>, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override `{assignment}`: expected key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::config(format!(
            "override `{assignment}`: empty key"
        )));
    }
    map.insert(key.to_string(), value.trim().to_string());
    Ok(())
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("{key}: cannot parse `{v}`"))),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| CliError::config(format!("{key}: missing required key")))
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>> {
        match self.0.remove(key) {
            None => Ok(Vec::new()),
            Some(v) => parse_floats(key, &v),
        }
    }

    fn with_prefix(&mut self, prefix: &str) -> Vec<(String, String)> {
        let keys: Vec<String> = self
            .0
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        keys.into_iter()
            .map(|k| {
                let v = self.0.remove(&k).unwrap();
                (k[prefix.len()..].to_string(), v)
            })
            .collect()
    }
}

fn parse_floats(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("{key}: cannot parse `{}`", item.trim())))
        })
        .collect()
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_pairs(parse_pairs(text)?)
    }

    /// Read a config file and apply `overrides` (each `key=value`).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut pairs = parse_pairs(&text)?;
        for o in overrides {
            apply_override(&mut pairs, o)?;
        }
        Self::from_pairs(pairs)
    }

    pub fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self> {
        let mut f = Fields(pairs);
        let experiment: ExperimentKind = f.require("experiment")?;
        let grid = GridParams {
            n: f.require("grid.n")?,
            length: f.require("grid.length")?,
            mass: f.take("grid.mass")?.unwrap_or(1.0),
        };
        let kind: String = f.require("potential.kind")?;
        let alpha = f.require("potential.alpha")?;
        let core_width = f.take("potential.core_width")?.unwrap_or(1.0);
        let mu: Option<f64> = f.take("potential.mu")?;
        let potential = match (kind.as_str(), mu) {
            ("coulomb", None) => PotentialSpec::coulomb(alpha, core_width),
            ("coulomb", Some(_)) => {
                return Err(CliError::config(
                    "potential.mu: only meaningful for potential.kind = short-range",
                ))
            }
            ("short-range", Some(mu)) => PotentialSpec::short_range(alpha, core_width, mu),
            ("short-range", None) => {
                return Err(CliError::config(
                    "potential.mu: missing required key for potential.kind = short-range",
                ))
            }
            (other, _) => {
                return Err(CliError::config(format!(
                    "potential.kind: expected `coulomb` or `short-range`, got `{other}`"
                )))
            }
        };
        let p_min = f.take("probes.p_min")?.unwrap_or(0.5);
        let mut probes = BTreeMap::new();
        for (id, value) in f.with_prefix("probe.") {
            let key = format!("probe.{id}");
            let v = parse_floats(&key, &value)?;
            if v.len() != 3 {
                return Err(CliError::config(format!(
                    "{key}: expected `x0, p0, sigma`, got {} values",
                    v.len()
                )));
            }
            probes.insert(id, PacketSpec::new(v[0], v[1], v[2]));
        }
        let mut pairs = BTreeMap::new();
        for (id, value) in f.with_prefix("pair.") {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
                return Err(CliError::config(format!(
                    "pair.{id}: expected `probe_a, probe_b`"
                )));
            }
            pairs.insert(id, (parts[0].to_string(), parts[1].to_string()));
        }
        let reference = f.take("reference")?.unwrap_or(ReferenceKind::Dollard);
        let schedule = Schedules {
            horizons: f.list("schedule.horizons")?,
            epsilons: f.list("schedule.epsilons")?,
            increments: f.list("schedule.increments")?,
            times: f.list("schedule.times")?,
        };
        let origin_shift = f.take("switching.origin_shift")?.unwrap_or(0.0);
        let stepper = StepperParams {
            dt: f.require("stepper.dt")?,
            monitor: f.take("stepper.monitor")?,
            record_stride: f.take("stepper.record_stride")?.unwrap_or(64),
        };
        let output_dir = f
            .take("output.dir")?
            .unwrap_or_else(|| format!("runs/{experiment}"));
        if let Some(key) = f.0.keys().next() {
            return Err(CliError::config(format!("{key}: unknown key")));
        }
        Ok(Self {
            experiment,
            grid,
            potential,
            probes,
            p_min,
            pairs,
            reference,
            schedule,
            origin_shift,
            stepper,
            output_dir,
        })
    }

    /// Every key with its canonical value; empty schedules are omitted.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.name().to_string());
        put("grid.n", self.grid.n.to_string());
        put("grid.length", self.grid.length.to_string());
        put("grid.mass", self.grid.mass.to_string());
        let kind = match self.potential.kind {
            PotentialKind::CoulombReg => "coulomb",
            PotentialKind::ShortRangeControl { mu } => {
                put("potential.mu", mu.to_string());
                "short-range"
            }
        };
        put("potential.kind", kind.to_string());
        put("potential.alpha", self.potential.alpha.to_string());
        put(
            "potential.core_width",
            self.potential.core_width.to_string(),
        );
        put("probes.p_min", self.p_min.to_string());
        for (id, p) in &self.probes {
            put(&format!("probe.{id}"), join_floats(&[p.x0, p.p0, p.sigma]));
        }
        for (id, (a, b)) in &self.pairs {
            put(&format!("pair.{id}"), format!("{a}, {b}"));
        }
        put("reference", self.reference.name().to_string());
        for (key, list) in [
            ("schedule.horizons", &self.schedule.horizons),
            ("schedule.epsilons", &self.schedule.epsilons),
            ("schedule.increments", &self.schedule.increments),
            ("schedule.times", &self.schedule.times),
        ] {
            if !list.is_empty() {
                put(key, join_floats(list));
            }
        }
        put("switching.origin_shift", self.origin_shift.to_string());
        put("stepper.dt", self.stepper.dt.to_string());
        if let Some(w) = self.stepper.monitor {
            put("stepper.monitor", w.to_string());
        }
        put(
            "stepper.record_stride",
            self.stepper.record_stride.to_string(),
        );
        put("output.dir", self.output_dir.clone());
        m
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
experiment = dollard-vs-free
# production grid
grid.n = 1024
grid.length = 1024
potential.kind = coulomb
potential.alpha = 0.5
probe.a = 0, 2, 10
probe.b = -3.5, 1.2, 7
schedule.horizons = 64, 128, 256, 512
stepper.dt = 0.05
";

    #[test]
    fn round_trips_through_canonical_text() {
        let cfg = ExperimentConfig::from_text(SAMPLE).unwrap();
        let again = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_text(), again.to_text());
    }

    #[test]
    fn floats_survive_round_trip_exactly() {
        let text = SAMPLE.replace("stepper.dt = 0.05", "stepper.dt = 0.1234567890123456789");
        let cfg = ExperimentConfig::from_text(&text).unwrap();
        let again = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(cfg.stepper.dt.to_bits(), again.stepper.dt.to_bits());
    }

    #[test]
    fn digest_ignores_key_order_and_comments() {
        let mut lines: Vec<&str> = SAMPLE.lines().filter(|l| !l.starts_with('#')).collect();
        lines.reverse();
        let shuffled = lines.join("\n");
        let a = ExperimentConfig::from_text(SAMPLE).unwrap();
        let b = ExperimentConfig::from_text(&shuffled).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = ExperimentConfig::from_text(&SAMPLE.replace("0.5", "0.25")).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = ExperimentConfig::from_text(SAMPLE).unwrap();
        assert_eq!(cfg.grid.mass, 1.0);
        assert_eq!(cfg.reference, ReferenceKind::Dollard);
        assert_eq!(cfg.output_dir, "runs/dollard-vs-free");
        assert_eq!(cfg.probes["b"], PacketSpec::new(-3.5, 1.2, 7.0));
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::from_text(&SAMPLE.replace("grid.n = 1024\n", ""))
            .unwrap_err()
            .to_string();
        assert!(err.contains("grid.n"), "{err}");
        let err = ExperimentConfig::from_text(&format!("{SAMPLE}grid.typo = 3\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("grid.typo"), "{err}");
        let err = ExperimentConfig::from_text(&SAMPLE.replace("64, 128", "64, x"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("schedule.horizons"), "{err}");
        let err = ExperimentConfig::from_text(&format!("{SAMPLE}grid.n = 4\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn overrides_replace_values() {
        let mut pairs = parse_pairs(SAMPLE).unwrap();
        apply_override(&mut pairs, "potential.alpha=0").unwrap();
        apply_override(&mut pairs, "probe.c = 1, 3, 10").unwrap();
        let cfg = ExperimentConfig::from_pairs(pairs).unwrap();
        assert_eq!(cfg.potential.alpha, 0.0);
        assert_eq!(cfg.probes.len(), 3);
        assert!(apply_override(&mut BTreeMap::new(), "novalue").is_err());
    }

    #[test]
    fn experiment_names_parse() {
        for kind in ExperimentKind::ALL {
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }
}
