//! Reference calculations for the two-photon relative-coordinate problem.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// EE(L̃, r̃) of the resonant problem with EE(0, ·) = 1 and EE = 1 at ±r̃max,
/// from the exact exponential of the semi-discrete generator on `n` points.
pub fn dissipative_expm(od_b: f64, omega_over_gamma: f64, r_max: f64, n: usize, l_tilde: f64) -> Vec<Complex64> {
    let dr = 2.0 * r_max / (n - 1) as f64;
    let m = n - 2;
    let one = Complex64::new(1.0, 0.0);
    // augmented generator [[A, b], [0, 0]] acting on (u, 1)
    let mut a = DMatrix::<Complex64>::zeros(m + 1, m + 1);
    for k in 0..m {
        let r = -r_max + (k + 1) as f64 * dr;
        let v = one / Complex64::new(1.0, -2.0 * r.powi(6));
        let d = (2.0 / od_b) * (one + v * omega_over_gamma * omega_over_gamma) / (dr * dr);
        a[(k, k)] = -2.0 * od_b * v - 2.0 * d;
        if k > 0 {
            a[(k, k - 1)] = d;
        } else {
            a[(k, m)] += d;
        }
        if k + 1 < m {
            a[(k, k + 1)] = d;
        } else {
            a[(k, m)] += d;
        }
    }
    let e = (a * Complex64::new(l_tilde, 0.0)).exp();
    let mut out = vec![one; n];
    for k in 0..m {
        out[k + 1] = (0..=m).map(|j| e[(k, j)]).sum();
    }
    out
}

/// Lowest even eigenvalue of −a(r̃)ψ'' − W(r̃)ψ = Eψ on [−r̃max, r̃max] with
/// ψ(±r̃max) = 0, by RK4 shooting from ψ(0) = 1, ψ'(0) = 0 and bisection.
pub fn ground_state_shooting<A: Fn(f64) -> f64, W: Fn(f64) -> f64>(
    a: A,
    w: W,
    r_max: f64,
    steps: usize,
    lo: f64,
    hi: f64,
) -> f64 {
    let end = |e: f64| -> f64 {
        let h = r_max / steps as f64;
        let rhs = |r: f64, y: [f64; 2]| [y[1], -(w(r) + e) * y[0] / a(r)];
        let mut y = [1.0, 0.0];
        for k in 0..steps {
            let r = k as f64 * h;
            let k1 = rhs(r, y);
            let k2 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        y[0]
    };
    // below the ground state ψ(r̃max) > 0, above it the first node appears
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if end(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dominant angular frequency of `x − mean(x)` sampled at spacing `h`,
/// from a zero-padded FFT with parabolic peak interpolation.
pub fn beat_frequency(x: &[Complex64], h: f64) -> f64 {
    let n = x.len();
    let mean: Complex64 = x.iter().sum::<Complex64>() / n as f64;
    let padded = (16 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); padded];
    for (b, v) in buf.iter_mut().zip(x) {
        *b = v - mean;
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
    let k = (1..padded).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap();
    let (y0, y1, y2) = (mag[(k + padded - 1) % padded], mag[k], mag[(k + 1) % padded]);
    let den = y0 - 2.0 * y1 + y2;
    let shift = if den != 0.0 { 0.5 * (y0 - y2) / den } else { 0.0 };
    let mut bin = k as f64 + shift;
    if bin > padded as f64 / 2.0 {
        bin -= padded as f64;
    }
    (2.0 * std::f64::consts::PI * bin / (padded as f64 * h)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beat_of_pure_tone() {
        let h = 0.02;
        let x: Vec<Complex64> = (0..4000)
            .map(|k| Complex64::from_polar(1.0, -0.7 * k as f64 * h) + 0.3)
            .collect();
        assert!((beat_frequency(&x, h) - 0.7).abs() < 1e-3);
    }

    #[test]
    fn harmonic_oscillator_ground_state() {
        // −ψ'' + r²ψ = Eψ: E₀ = 1, i.e. W = −r², a = 1
        let e = ground_state_shooting(|_| 1.0, |r| -r * r, 8.0, 8000, -1.0, 2.0);
        assert!((e - 1.0).abs() < 1e-6);
    }

    #[test]
    fn expm_is_symmetric_and_bounded() {
        let u = dissipative_expm(1.0, 1.0, 6.0, 32, 1.0);
        assert!(u.iter().all(|z| z.norm() <= 1.0 + 1e-12));
        for k in 0..16 {
            assert!((u[k] - u[31 - k]).norm() < 1e-10);
        }
    }
}
