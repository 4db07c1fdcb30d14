//! Single-photon switch and two-photon phase gate built on a stored Rydberg
//! spin wave.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeviceMode {
    #[default]
    ClosedForm,
    Integrate,
}

/// ∫dz̃/(1 + z̃¹²) = (π/6)/sin(π/12).
pub fn switch_constant() -> f64 {
    (PI / 6.0) / (PI / 12.0).sin()
}

/// Static susceptibility (in units of 1/z_b) seen by a resonant target photon
/// at distance z̃ from a stored excitation.
pub fn switch_susceptibility(od_b: f64, z: f64) -> Complex64 {
    let z6 = z.powi(6);
    od_b * Complex64::new(-z6, 1.0) / (1.0 + z6 * z6)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchOptions {
    /// Medium length in units of z_b (integrate mode).
    pub length_over_zb: f64,
    /// Displacement of the stored excitation from the medium centre [z_b].
    pub offset: f64,
    /// Accept media shorter than 8 z_b.
    pub allow_short: bool,
    /// Phenomenological cap on transmitted target photons without the
    /// gate excitation, standing in for target self-blockade. A model, not a
    /// derived result.
    pub saturation: Option<f64>,
    /// RK4 steps per z_b.
    pub steps_per_zb: usize,
}

impl Default for SwitchOptions {
    fn default() -> Self {
        Self {
            length_over_zb: 16.0,
            offset: 0.0,
            allow_short: false,
            saturation: None,
            steps_per_zb: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchResult {
    pub eta: f64,
    pub n_out: f64,
    /// N_out without the stored excitation minus N_out with it.
    pub gain: f64,
}

/// Transmission of `n_in` resonant target photons past one stored excitation.
pub fn switch_transmission(n_in: f64, od_b: f64, mode: DeviceMode, opts: SwitchOptions) -> Result<SwitchResult> {
    if !(n_in >= 0.0 && n_in.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "n_in",
            value: n_in,
            requirement: "must be finite and ≥ 0",
        });
    }
    if !(od_b >= 0.0 && od_b.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "od_b",
            value: od_b,
            requirement: "must be finite and ≥ 0",
        });
    }
    let eta = match mode {
        DeviceMode::ClosedForm => od_b * switch_constant(),
        DeviceMode::Integrate => {
            let l = opts.length_over_zb;
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "length_over_zb",
                    value: l,
                    requirement: "must be finite and > 0",
                });
            }
            if l < 8.0 && !opts.allow_short {
                return Err(Error::InvalidParameter {
                    name: "length_over_zb",
                    value: l,
                    requirement: "≥ 8 (set allow_short for shorter media)",
                });
            }
            let steps = ((l * opts.steps_per_zb.max(1) as f64).ceil() as usize).max(1);
            let a = -0.5 * l - opts.offset;
            let e = rk4(|z| Complex64::i() * switch_susceptibility(od_b, z), a, a + l, steps);
            -e.norm().ln()
        }
    };
    let baseline = match opts.saturation {
        Some(cap) => n_in.min(cap.max(0.0)),
        None => n_in,
    };
    let n_out = baseline * (-2.0 * eta).exp();
    Ok(SwitchResult {
        eta,
        n_out,
        gain: baseline - n_out,
    })
}

/// RK4 for ∂z𝓔 = a(z)𝓔 from 𝓔(z0) = 1.
fn rk4<F: Fn(f64) -> Complex64>(a: F, z0: f64, z1: f64, steps: usize) -> Complex64 {
    let h = (z1 - z0) / steps as f64;
    let mut e = Complex64::new(1.0, 0.0);
    for k in 0..steps {
        let z = z0 + k as f64 * h;
        let am = a(z + 0.5 * h);
        let k1 = a(z) * e;
        let k2 = am * (e + 0.5 * h * k1);
        let k3 = am * (e + 0.5 * h * k2);
        let k4 = a(z + h) * (e + h * k3);
        e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateResult {
    /// Conditional phase [rad].
    pub phi: f64,
    /// Amplitude attenuation exponent.
    pub eta: f64,
    /// Change of the effective medium length, in units of z_b.
    pub r_delay: f64,
    /// e^{−2η}.
    pub fidelity: f64,
    /// False when the closed form is used outside |γ/Δ| < 0.5.
    pub valid: bool,
}

/// Static susceptibility (units 1/z_b, γ = 1) of a far-detuned photon at
/// distance z̃ from a stored excitation, with the interaction sign equal to
/// sign(Δ) so that no two-photon resonance occurs.
pub fn gate_susceptibility(od_b: f64, gamma_over_delta: f64, z: f64) -> Complex64 {
    if gamma_over_delta == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = gamma_over_delta.signum();
    let d = Complex64::new(1.0 / gamma_over_delta, 1.0);
    -od_b * s / (d.norm() * z.powi(6) + s * d)
}

fn gate_delay_integrand(gamma_over_delta: f64, omega_over_delta: f64, z: f64) -> f64 {
    let s = gamma_over_delta.signum();
    let d = Complex64::new(1.0 / gamma_over_delta, 1.0);
    let om2 = (omega_over_delta / gamma_over_delta).powi(2);
    if z == 0.0 {
        // fully blockaded: ratio → Ω²/D²
        return 1.0 - (om2 / (d * d)).re;
    }
    let v = s * om2 / (d.norm() * z.powi(6));
    let num = om2 + v * v;
    let den = om2 + d * v;
    1.0 - om2 * (num / (den * den)).re
}

fn symmetric_integral<F: Fn(f64) -> Complex64>(f: F) -> Complex64 {
    let gl = GaussLegendre::new(12);
    2.0 * gl.semi_infinite_complex(1.0, 400, f)
}

/// Conditional phase, attenuation and delay change of the photon-photon gate.
pub fn gate_metrics(od_b: f64, gamma_over_delta: f64, omega_over_delta: f64, mode: DeviceMode) -> Result<GateResult> {
    if !(od_b >= 0.0 && od_b.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "od_b",
            value: od_b,
            requirement: "must be finite and ≥ 0",
        });
    }
    if !gamma_over_delta.is_finite() || !omega_over_delta.is_finite() {
        return Err(Error::NonFinite("gate ratios".into()));
    }
    let x = gamma_over_delta;
    let w2 = omega_over_delta * omega_over_delta;
    let (phi, eta, r_delay, valid) = match mode {
        DeviceMode::ClosedForm => (
            -od_b * x * 2.0 * PI / 3.0,
            od_b * x * x * 5.0 * PI / 9.0,
            7.0 * PI / 9.0 - w2 * 5.0 * PI / 9.0,
            x.abs() < 0.5,
        ),
        DeviceMode::Integrate => {
            if x == 0.0 {
                // Δ → ∞ at fixed Ω/Δ: only the delay survives
                (0.0, 0.0, 7.0 * PI / 9.0 - w2 * 5.0 * PI / 9.0, true)
            } else {
                let chi = symmetric_integral(|z| gate_susceptibility(od_b, x, z));
                let delay = symmetric_integral(|z| Complex64::new(gate_delay_integrand(x, omega_over_delta, z), 0.0));
                (chi.re, chi.im, delay.re, true)
            }
        }
    };
    let eta = eta.max(0.0);
    Ok(GateResult {
        phi,
        eta,
        r_delay,
        fidelity: (-2.0 * eta).exp(),
        valid,
    })
}

/// Upper bound on |γ/Δ| used when searching for a π phase shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBound {
    pub max_gamma_over_delta: f64,
}

impl PhaseBound {
    /// |Δ| ≥ γ.
    pub fn unit_detuning() -> Self {
        Self {
            max_gamma_over_delta: 1.0,
        }
    }

    /// Largest |γ/Δ| for which the integrated phase stays within `tol`
    /// (relative) of the weak-dissipation closed form.
    pub fn closed_form_agreement(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Domain(format!("agreement tolerance {tol} not in (0, 1)")));
        }
        let err = |x: f64| -> f64 {
            let a = gate_metrics(1.0, x, 0.0, DeviceMode::Integrate).unwrap().phi;
            let b = gate_metrics(1.0, x, 0.0, DeviceMode::ClosedForm).unwrap().phi;
            ((a - b) / b).abs()
        };
        let (mut lo, mut hi) = (1e-4, 1.0);
        if err(hi) <= tol {
            return Ok(Self {
                max_gamma_over_delta: hi,
            });
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if err(mid) <= tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            max_gamma_over_delta: lo,
        })
    }
}

impl Default for PhaseBound {
    /// Agreement with the closed form to 5%.
    fn default() -> Self {
        Self::closed_form_agreement(0.05).expect("fixed tolerance")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityPoint {
    pub od_b: f64,
    /// max |φ| over the allowed γ/Δ.
    pub max_phase: f64,
    pub gamma_over_delta_at_max: f64,
    /// Smallest |γ/Δ| giving |φ| = π, if reachable.
    pub gamma_over_delta_at_pi: Option<f64>,
    pub fidelity_at_pi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityCurve {
    pub bound: PhaseBound,
    pub points: Vec<FeasibilityPoint>,
    /// Smallest OD_b for which |φ| = π is reachable within the bound.
    pub threshold: f64,
}

/// |φ| per unit OD_b maximized over 0 < γ/Δ ≤ bound.
fn max_phase_per_od(bound: f64) -> (f64, f64) {
    let phase = |x: f64| gate_metrics(1.0, x, 0.0, DeviceMode::Integrate).unwrap().phi.abs();
    let n = 200;
    let mut best = (0.0, 0.0);
    for i in 1..=n {
        let x = bound * i as f64 / n as f64;
        let p = phase(x);
        if p > best.1 {
            best = (x, p);
        }
    }
    // golden-section refinement around the best grid point
    let h = bound / n as f64;
    let (mut a, mut b) = ((best.0 - h).max(1e-9), (best.0 + h).min(bound));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if phase(c) > phase(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    let p = phase(x);
    if p > best.1 {
        (x, p)
    } else {
        best
    }
}

/// Optical depths per blockade radius at which a π conditional phase is
/// reachable, with the gate fidelity there.
pub fn pi_phase_feasibility(od_b_values: &[f64], bound: PhaseBound) -> Result<FeasibilityCurve> {
    if od_b_values.is_empty() || od_b_values.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("OD_b values must be positive and finite".into()));
    }
    let xb = bound.max_gamma_over_delta;
    if !(xb > 0.0 && xb.is_finite()) {
        return Err(Error::Domain(format!("phase bound {xb} must be positive")));
    }
    let (x_max, per_od) = max_phase_per_od(xb);
    let threshold = PI / per_od;
    let mut points = Vec::with_capacity(od_b_values.len());
    for &od in od_b_values {
        let max_phase = od * per_od;
        let (x_pi, fid) = if max_phase >= PI {
            // |φ| increases monotonically on (0, x_max]
            let (mut lo, mut hi) = (0.0, x_max);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let p = gate_metrics(od, mid, 0.0, DeviceMode::Integrate)?.phi.abs();
                if p < PI {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = 0.5 * (lo + hi);
            (Some(x), Some(gate_metrics(od, x, 0.0, DeviceMode::Integrate)?.fidelity))
        } else {
            (None, None)
        };
        points.push(FeasibilityPoint {
            od_b: od,
            max_phase,
            gamma_over_delta_at_max: x_max,
            gamma_over_delta_at_pi: x_pi,
            fidelity_at_pi: fid,
        });
    }
    Ok(FeasibilityCurve {
        bound,
        points,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn switch_closed_form() {
        assert_relative_eq!(switch_constant(), 2.023030, epsilon = 1e-6);
        let r = switch_transmission(5.0, 0.0, DeviceMode::ClosedForm, SwitchOptions::default()).unwrap();
        assert_eq!((r.eta, r.n_out, r.gain), (0.0, 5.0, 0.0));
        let r = switch_transmission(100.0, 1.0, DeviceMode::ClosedForm, SwitchOptions::default()).unwrap();
        assert_relative_eq!(r.n_out, 100.0 * (-2.0 * switch_constant()).exp(), max_relative = 1e-14);
    }

    #[test]
    fn switch_integration_converges_with_length() {
        let q = switch_constant();
        let mut last = f64::INFINITY;
        for l in [4.0, 8.0, 16.0] {
            let opts = SwitchOptions { length_over_zb: l, allow_short: true, ..Default::default() };
            let r = switch_transmission(1.0, 1.0, DeviceMode::Integrate, opts).unwrap();
            let err = (r.eta - q).abs() / q;
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn short_medium_rejected() {
        let opts = SwitchOptions { length_over_zb: 4.0, ..Default::default() };
        assert!(switch_transmission(1.0, 1.0, DeviceMode::Integrate, opts).is_err());
    }

    #[test]
    fn saturation_caps_gain() {
        let opts = SwitchOptions { saturation: Some(2.0), ..Default::default() };
        let r = switch_transmission(10.0, 1.0, DeviceMode::ClosedForm, opts).unwrap();
        assert!(r.gain <= 2.0 && r.gain > 1.9);
    }

    #[test]
    fn gate_closed_form_examples() {
        let od = 12.0;
        let r = gate_metrics(od, 3.0 / (2.0 * od), 0.0, DeviceMode::ClosedForm).unwrap();
        assert_relative_eq!(r.phi, -PI, max_relative = 1e-14);
        assert_relative_eq!(2.0 * r.eta, 5.0 * PI / (2.0 * od), max_relative = 1e-14);
        let r = gate_metrics(od, 0.1, 1.0, DeviceMode::ClosedForm).unwrap();
        assert_relative_eq!(r.r_delay, 2.0 * PI / 9.0, max_relative = 1e-14);
        assert!(!gate_metrics(od, 0.6, 0.0, DeviceMode::ClosedForm).unwrap().valid);
    }

    #[test]
    fn delay_sign_flip() {
        let below = gate_metrics(1.0, 0.1, (1.39f64).sqrt(), DeviceMode::ClosedForm).unwrap();
        let above = gate_metrics(1.0, 0.1, (1.41f64).sqrt(), DeviceMode::ClosedForm).unwrap();
        assert!(below.r_delay > 0.0 && above.r_delay < 0.0);
    }

    #[test]
    fn integrated_gate_matches_weak_dissipation() {
        for x in [0.01, 0.05, 0.1, -0.1] {
            let a = gate_metrics(3.0, x, 0.3, DeviceMode::Integrate).unwrap();
            let b = gate_metrics(3.0, x, 0.3, DeviceMode::ClosedForm).unwrap();
            assert!((a.phi / b.phi - 1.0).abs() < 0.02, "{x}");
            assert!((a.eta / b.eta - 1.0).abs() < 0.02, "{x}");
            assert!((a.r_delay / b.r_delay - 1.0).abs() < 0.02, "{x}: {} {}", a.r_delay, b.r_delay);
        }
    }

    #[test]
    fn phase_sign_opposes_detuning() {
        let a = gate_metrics(2.0, 0.1, 0.0, DeviceMode::Integrate).unwrap();
        let b = gate_metrics(2.0, -0.1, 0.0, DeviceMode::Integrate).unwrap();
        assert!(a.phi < 0.0 && b.phi > 0.0);
        assert_relative_eq!(a.phi, -b.phi, max_relative = 1e-12);
        assert!(a.fidelity <= 1.0 && a.eta >= 0.0);
    }

    #[test]
    fn feasibility_threshold() {
        let c = pi_phase_feasibility(&[2.0, 10.0, 50.0], PhaseBound::default()).unwrap();
        assert!((c.threshold - 6.0).abs() <= 1.0, "{}", c.threshold);
        assert!(c.points[0].fidelity_at_pi.is_none());
        let f10 = c.points[1].fidelity_at_pi.unwrap();
        let f50 = c.points[2].fidelity_at_pi.unwrap();
        assert!(f50 > f10);
        let loose = pi_phase_feasibility(&[2.0], PhaseBound::unit_detuning()).unwrap();
        assert!(loose.threshold < c.threshold);
    }
}
