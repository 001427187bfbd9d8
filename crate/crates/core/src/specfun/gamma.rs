#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument, Γ(x + 1)
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

fn check(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "gamma requires lambda > 0, got {lambda}"
        )))
    }
}

/// `ln Γ(lambda)` for `lambda > 0`.
pub fn ln_gamma(lambda: f64) -> Result<f64> {
    check(lambda)?;
    if lambda < 0.5 {
        // Γ(λ) = Γ(λ + 1) / λ keeps the Lanczos sum in its accurate range.
        return Ok(ln_gamma(lambda + 1.0)? - lambda.ln());
    }
    let x = lambda - 1.0;
    let t = x + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln())
}

/// `Γ(lambda)` for `lambda > 0`. Overflows to `+inf` past `lambda ≈ 171.6`.
pub fn gamma(lambda: f64) -> Result<f64> {
    check(lambda)?;
    if lambda < 0.5 {
        return Ok(gamma(lambda + 1.0)? / lambda);
    }
    if lambda == lambda.floor() && lambda <= 21.0 {
        // exact for small integers
        let mut f = 1.0;
        let mut i = 2.0;
        while i < lambda {
            f *= i;
            i += 1.0;
        }
        return Ok(f);
    }
    if lambda > 140.0 {
        return Ok(ln_gamma(lambda)?.exp());
    }
    let x = lambda - 1.0;
    let t = x + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x))
}
