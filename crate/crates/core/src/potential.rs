use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// `α / sqrt(x² + a²)`: keeps the exact Coulomb tail.
    CoulombReg,
    /// `α e^{-μ|x|} / sqrt(x² + a²)`: same core, integrable tail.
    ShortRangeControl { mu: f64 },
}

/// One-body interaction on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub alpha: f64,
    pub core_width: f64,
}

impl PotentialSpec {
    pub fn coulomb(alpha: f64, core_width: f64) -> Self {
        Self {
            kind: PotentialKind::CoulombReg,
            alpha,
            core_width,
        }
    }

    pub fn short_range(alpha: f64, core_width: f64, mu: f64) -> Self {
        Self {
            kind: PotentialKind::ShortRangeControl { mu },
            alpha,
            core_width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::config(format!(
                "potential.alpha = {} must be finite and non-negative (repulsive)",
                self.alpha
            )));
        }
        if !(self.core_width.is_finite() && self.core_width > 0.0) {
            return Err(Error::config(format!(
                "potential.core_width = {} must be positive",
                self.core_width
            )));
        }
        if let PotentialKind::ShortRangeControl { mu } = self.kind {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::config(format!(
                    "potential.mu = {mu} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        let core = self.alpha / (x * x + self.core_width * self.core_width).sqrt();
        match self.kind {
            PotentialKind::CoulombReg => core,
            PotentialKind::ShortRangeControl { mu } => core * (-mu * x.abs()).exp(),
        }
    }

    /// `dV/dx`.
    pub fn derivative(&self, x: f64) -> f64 {
        let r2 = x * x + self.core_width * self.core_width;
        let core = self.alpha / r2.sqrt();
        let dcore = -self.alpha * x / (r2 * r2.sqrt());
        match self.kind {
            PotentialKind::CoulombReg => dcore,
            PotentialKind::ShortRangeControl { mu } => {
                let damp = (-mu * x.abs()).exp();
                damp * (dcore - mu * x.signum() * core)
            }
        }
    }

    /// Barrier height `V(0)`.
    pub fn max_value(&self) -> f64 {
        self.alpha / self.core_width
    }

    pub fn is_long_range(&self) -> bool {
        matches!(self.kind, PotentialKind::CoulombReg)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_tail() {
        let pot = PotentialSpec::coulomb(0.5, 1.0);
        let x = 100.0 * pot.core_width;
        let ratio = pot.value(x) * x / pot.alpha;
        assert!((ratio - 1.0).abs() < 1e-4, "{ratio}");
        assert_eq!(pot.value(-x), pot.value(x));
        assert_eq!(pot.max_value(), 0.5);
    }

    #[test]
    fn short_range_moment_is_finite() {
        // ∫|V|(1+|x|) dx by trapezoid on growing intervals must settle
        let pot = PotentialSpec::short_range(0.5, 1.0, 0.5);
        let moment = |l: f64| {
            let n = 200_000;
            let h = 2.0 * l / n as f64;
            (0..=n)
                .map(|i| {
                    let x = -l + i as f64 * h;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * h * pot.value(x).abs() * (1.0 + x.abs())
                })
                .sum::<f64>()
        };
        let a = moment(100.0);
        let b = moment(200.0);
        assert!(a.is_finite() && (b - a).abs() < 1e-6 * a);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for pot in [
            PotentialSpec::coulomb(0.5, 1.0),
            PotentialSpec::short_range(0.7, 0.8, 0.3),
        ] {
            for &x in &[-7.0, -1.3, 0.4, 2.0, 15.0] {
                let h = 1e-5;
                let fd = (pot.value(x + h) - pot.value(x - h)) / (2.0 * h);
                assert!((fd - pot.derivative(x)).abs() < 1e-8, "{x}");
            }
        }
    }

    #[test]
    fn validation() {
        assert!(PotentialSpec::coulomb(-1.0, 1.0).validate().is_err());
        assert!(PotentialSpec::coulomb(0.5, 0.0).validate().is_err());
        assert!(PotentialSpec::short_range(0.5, 1.0, 0.0)
            .validate()
            .is_err());
        assert!(PotentialSpec::coulomb(0.0, 1.0).validate().is_ok());
    }
}
