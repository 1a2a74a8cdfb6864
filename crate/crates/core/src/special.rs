//! Exponential integral and the adiabatic switching integral
//! `L(ε, t) = sign(t) ∫_1^{|t|} e^{-εs}/s ds`.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(x) = ∫_x^∞ e^{-s}/s ds` for `x > 0`.
///
/// Power series below `x = 1`, modified Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        // -γ - ln x + Σ (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0; // x^k / k!
        for k in 1..200 {
            term *= x / k as f64;
            let contrib = term / k as f64;
            sum += if k % 2 == 1 { contrib } else { -contrib };
            if contrib < 1e-18 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `L(ε, t)` with `L = 0` for `|t| <= 1`; `t = ±∞` gives `±E₁(ε)`.
///
/// Finite horizons are integrated by adaptive Gauss–Kronrod quadrature in
/// `u = ln s`, where the integrand `exp(-ε e^u)` is smooth and bounded.
pub fn switching_integral(epsilon: f64, t: f64) -> f64 {
    let sign = t.signum();
    let at = t.abs();
    if at <= 1.0 {
        return 0.0;
    }
    if at.is_infinite() {
        return sign * exp_integral_e1(epsilon);
    }
    if epsilon == 0.0 {
        return sign * at.ln();
    }
    sign * adaptive_gk15(|u| (-epsilon * u.exp()).exp(), 0.0, at.ln(), 1e-14)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

pub(crate) fn adaptive_gk15(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (whole, err) = gk15(&f, a, b);
    let mut total = whole;
    let mut stack = vec![(a, b, whole, err)];
    let mut accepted = 0.0;
    while let Some((lo, hi, value, err)) = stack.pop() {
        let budget = rel_tol * total.abs().max(f64::MIN_POSITIVE) * (hi - lo) / (b - a);
        if err <= budget || hi - lo < 1e-12 * (b - a) {
            accepted += value;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        total += left.0 + right.0 - value;
        stack.push((lo, mid, left.0, left.1));
        stack.push((mid, hi, right.0, right.1));
    }
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_reference_values() {
        // independent values: E1(1) = 0.21938393439552..., E1(0.01) = 4.03792957653811...
        assert!((exp_integral_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((exp_integral_e1(0.01) - 4.037_929_576_538_114).abs() < 1e-13);
        assert!((exp_integral_e1(2.0) - 0.048_900_510_708_061_12).abs() < 1e-15);
        assert!((exp_integral_e1(10.0) - 4.156_968_929_685_324e-6).abs() < 1e-19);
    }

    #[test]
    fn e1_series_and_fraction_agree_at_switchover() {
        let below = exp_integral_e1(1.0);
        let above = exp_integral_e1(1.0 + 1e-12);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn e1_small_argument_asymptotics() {
        for &eps in &[0.09, 0.05, 0.01, 1e-3, 1e-6] {
            let r = exp_integral_e1(eps) + EULER_GAMMA + f64::ln(eps);
            assert!(r.abs() < eps, "{eps}: {r}");
        }
    }

    #[test]
    fn switching_integral_examples() {
        assert_eq!(switching_integral(0.3, 1.0), 0.0);
        assert_eq!(switching_integral(0.3, -0.5), 0.0);
        assert!((switching_integral(0.0, std::f64::consts::E.powi(2)) - 2.0).abs() < 1e-14);
        assert!((switching_integral(0.01, f64::INFINITY) - 4.037_929_576_538_114).abs() < 1e-12);
        assert!(
            (switching_integral(0.01, f64::NEG_INFINITY) + 4.037_929_576_538_114).abs() < 1e-12
        );
    }

    #[test]
    fn quadrature_matches_closed_form() {
        // ∫_1^t e^{-εs}/s ds = E1(ε) - E1(εt)
        for &(eps, t) in &[
            (0.01, 50.0),
            (0.01, 5000.0),
            (0.3, 7.0),
            (2.0, 3.0),
            (0.08, 230.0),
        ] {
            let quad = switching_integral(eps, t);
            let closed = exp_integral_e1(eps) - exp_integral_e1(eps * t);
            assert!((quad - closed).abs() < 1e-10 * closed.abs(), "{eps} {t}");
        }
    }
}
