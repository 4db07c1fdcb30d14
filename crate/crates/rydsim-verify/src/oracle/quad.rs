//! Adaptive Gauss–Kronrod (7/15) quadrature.

use num_complex::Complex64;

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
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

fn adapt<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol.max(1e-15 * k.norm()) || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// ∫_a^b f to absolute tolerance `tol`.
pub fn integrate_c<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    adapt(&mut f, a, b, tol, 48)
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_c(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// ∫_a^∞ f via x = a + t/(1 − t).
pub fn integrate_to_inf_c<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, tol: f64) -> Complex64 {
    integrate_c(
        |t| {
            if t >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        tol,
    )
}

pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> f64 {
    integrate_to_inf_c(|x| Complex64::new(f(x), 0.0), a, tol).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn known_integrals() {
        assert!((integrate(|x| x.sin(), 0.0, PI, 1e-13) - 2.0).abs() < 1e-12);
        assert!((integrate_to_inf(|x| (-x).exp(), 0.0, 1e-13) - 1.0).abs() < 1e-12);
        assert!((integrate_to_inf(|x| 1.0 / (1.0 + x * x), 0.0, 1e-13) - PI / 2.0).abs() < 1e-11);
    }
}
