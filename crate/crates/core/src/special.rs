//! Gamma-family special functions and the χ² distribution.

use crate::error::{invalid, Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

// Lanczos g = 7, n = 9 coefficients.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn check_domain(a: f64, x: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid(format!("gamma shape must be finite and > 0, got {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(invalid(format!("gamma argument must be ≥ 0, got {x}")));
    }
    Ok(())
}

fn prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

// P(a, x) by its power series; used for x < a + 1.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * prefactor(a, x));
        }
    }
    Err(Error::Numerical(format!("gamma series did not converge (a={a}, x={x})")))
}

// Q(a, x) by modified Lentz continued fraction; used for x ≥ a + 1.
fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < EPS {
            return Ok(h * prefactor(a, x));
        }
    }
    Err(Error::Numerical(format!("gamma continued fraction did not converge (a={a}, x={x})")))
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_lower(a: f64, x: f64) -> Result<f64> {
    check_domain(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        Ok(1.0 - upper_fraction(a, x)?)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x)/Γ(a)`.
pub fn regularized_gamma_upper(a: f64, x: f64) -> Result<f64> {
    check_domain(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_series(a, x)?)
    } else {
        upper_fraction(a, x)
    }
}

fn check_dof(dof: u32) -> Result<f64> {
    if dof == 0 {
        return Err(invalid("χ² degrees of freedom must be ≥ 1"));
    }
    Ok(f64::from(dof))
}

pub fn chi2_cdf(x: f64, dof: u32) -> Result<f64> {
    let k = check_dof(dof)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    regularized_gamma_lower(k / 2.0, x / 2.0)
}

/// Upper tail `P(χ²_dof > x)`, accurate where the CDF is close to 1.
pub fn chi2_sf(x: f64, dof: u32) -> Result<f64> {
    let k = check_dof(dof)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    regularized_gamma_upper(k / 2.0, x / 2.0)
}

fn chi2_pdf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let h = k / 2.0;
    ((h - 1.0) * x.ln() - x / 2.0 - h * 2f64.ln() - ln_gamma(h)).exp()
}

/// Inverse χ² CDF: the `x` with `P(χ²_dof ≤ x) = p`.
///
/// Brackets the root, then takes Newton steps that are replaced by bisection
/// whenever they leave the bracket.
pub fn chi2_quantile(p: f64, dof: u32) -> Result<f64> {
    let k = check_dof(dof)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("quantile probability must lie in (0, 1), got {p}")));
    }
    // Residual on whichever tail is smaller keeps precision near p → 1.
    let upper = p > 0.5;
    let f = |x: f64| -> Result<f64> {
        if upper {
            Ok((1.0 - p) - chi2_sf(x, dof)?)
        } else {
            Ok(chi2_cdf(x, dof)? - p)
        }
    };

    let mut lo = 0.0;
    let mut hi = k.max(1.0);
    while f(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("χ² quantile bracket overflow".into()));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let pdf = chi2_pdf(x, k);
        let newton = if pdf > 0.0 { x - fx / pdf } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numerical(format!("χ² quantile did not converge (p={p}, dof={dof})")))
}
