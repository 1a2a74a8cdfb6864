//! Small least-squares helpers used by the diagnostics.

use crate::error::{Error, Result};

/// Result of fitting `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Standard error of the slope (zero when the fit is exact or n = 2).
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least two paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if x.len() > 2 {
        (ss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        slope_stderr,
    })
}

/// Power law `d = C T^p` fitted on log-log axes; `slope` is the exponent.
pub fn fit_power_law(t: &[f64], d: &[f64]) -> Result<LineFit> {
    if d.iter().chain(t).any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::Fit("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Richardson-style bound on `‖Ω(T_j) - Ω‖` from the last Cauchy distance of a
/// doubling schedule whose distances decay like `T^p` (`p < 0`):
/// `Σ_{i>=j} d_i = d_j / (1 - 2^p)`.
pub fn geometric_tail(last_distance: f64, exponent: f64) -> f64 {
    if exponent >= 0.0 {
        return f64::INFINITY;
    }
    last_distance / (1.0 - 2f64.powf(exponent))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
    }

    #[test]
    fn power_law_exponent() {
        let t = [64.0, 128.0, 256.0, 512.0];
        let d: Vec<f64> = t.iter().map(|v: &f64| 3.0 * v.powf(-1.2)).collect();
        let f = fit_power_law(&t, &d).unwrap();
        assert!((f.slope + 1.2).abs() < 1e-12);
        assert!(fit_power_law(&t, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn tail_of_halving_sequence() {
        assert!((geometric_tail(1.0, -1.0) - 2.0).abs() < 1e-14);
        assert!(geometric_tail(1.0, 0.1).is_infinite());
    }
}
