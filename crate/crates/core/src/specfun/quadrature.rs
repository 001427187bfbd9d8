#![allow(clippy::excessive_precision)]

//! Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Panel {
        a,
        b,
        value: k * h,
        err: ((k - g) * h).abs(),
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// panel boundaries and bisecting the worst panel until the summed
/// Gauss/Kronrod discrepancy is below `rel_tol * |total|`.
///
/// On convergence every final panel is integrated once more as two halves
/// (twice the node count); the two totals must agree to `check_tol`
/// relative, otherwise an accuracy error is returned.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    check_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if breaks.len() < 2 {
        return Err(Error::Domain(
            "quadrature needs at least two breakpoints".into(),
        ));
    }
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if !total.is_finite() {
            return Err(Error::Accuracy("non-finite integrand".into()));
        }
        if err <= rel_tol * total.abs() || err < f64::MIN_POSITIVE {
            break;
        }
        if panels.len() >= max_panels {
            return Err(Error::Accuracy(format!(
                "quadrature did not converge in {max_panels} panels (err {err:e}, total {total:e})"
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("nonempty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Accuracy(
                "panel collapsed below machine resolution".into(),
            ));
        }
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }

    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let coarse: f64 = panels.iter().map(|p| p.value).sum();
    let fine: f64 = panels
        .iter()
        .map(|p| {
            let mid = 0.5 * (p.a + p.b);
            kronrod(&f, p.a, mid).value + kronrod(&f, mid, p.b).value
        })
        .sum();
    let diff = (fine - coarse).abs();
    if diff > check_tol * fine.abs() {
        return Err(Error::Accuracy(format!(
            "refinement check failed: {coarse:e} vs {fine:e}"
        )));
    }
    Ok(Quadrature {
        value: fine,
        error: diff,
        panels: panels.len(),
    })
}
