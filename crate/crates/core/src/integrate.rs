//! Globally adaptive Gauss–Kronrod (7/15) integration over finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut values = [(0.0, 0.0); 7];
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        *slot = (lo, hi);
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    // QUADPACK's error heuristic: scale |K - G| against the integrand's
    // variation and never claim less than the roundoff floor.
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, (lo, hi)) in values.iter().enumerate() {
        asc += WGK[j] * ((lo - mean).abs() + (hi - mean).abs());
    }
    let asc = asc * half.abs();
    let abs_integral = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_integral > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_integral);
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error,
    }
}

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
    /// Relative error still accepted once the segment budget is spent, for
    /// integrands whose roundoff floor sits above `rel`.
    pub fallback_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-14,
            rel: 1e-12,
            max_segments: 4000,
            fallback_rel: 1e-12,
        }
    }
}

/// Integrate `f` over the consecutive pieces delimited by `breakpoints`
/// (which must be increasing), bisecting the segment with the largest error
/// estimate until the total error meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: Tolerance) -> Result<f64> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(
            "integration breakpoints must be strictly increasing".into(),
        ));
    }
    let mut segments: Vec<Segment> = breakpoints
        .windows(2)
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !error.is_finite() {
            return Err(Error::NumericalInstability(format!(
                "non-finite quadrature estimate ({total}, error {error})"
            )));
        }
        if error <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= tol.max_segments {
            if error <= tol.abs.max(tol.fallback_rel * total.abs()) {
                return Ok(total);
            }
            return Err(Error::NumericalInstability(format!(
                "quadrature did not converge: estimate {total}, error {error}"
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // interval no longer divisible in floating point
            return Ok(total);
        }
        segments.push(kronrod15(&f, seg.a, mid));
        segments.push(kronrod15(&f, mid, seg.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn log_kink_near_origin() {
        // ∫_0^1 ln(1 + 1e4 x) dx = ((1+c) ln(1+c) - c) / c with c = 1e4
        let c = 1e4f64;
        let exact = ((1.0 + c) * (1.0 + c).ln() - c) / c;
        let v = integrate(|x| (c * x).ln_1p(), &[0.0, 1.0], Tolerance::default()).unwrap();
        assert!((v - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn fallback_accepts_noisy_integrand() {
        // deterministic noise at the 1e-9 level defeats a 1e-13 target
        let noisy = |x: f64| 1.0 + 1e-9 * (1e6 * x).sin().signum();
        let strict = Tolerance {
            abs: 0.0,
            rel: 1e-13,
            max_segments: 200,
            fallback_rel: 1e-13,
        };
        assert!(integrate(noisy, &[0.0, 1.0], strict).is_err());
        let lenient = Tolerance {
            fallback_rel: 1e-6,
            ..strict
        };
        assert!((integrate(noisy, &[0.0, 1.0], lenient).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(integrate(|x| x, &[1.0], Tolerance::default()).is_err());
        assert!(integrate(|x| x, &[1.0, 0.0], Tolerance::default()).is_err());
    }
}
