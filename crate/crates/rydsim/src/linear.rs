//! Linear EIT response of the three-level ladder.
//!
//! The probe amplitude obeys ∂z𝓔 = iχ𝓔, so the intensity transmission of a
//! medium of length L is exp(−2 Im χ L).

use crate::error::{Error, Result};
use crate::params::MediumParams;
use num_complex::Complex64;

/// Ladder susceptibility evaluator.
///
/// χ(ω, V) = (g²ρ/c)·(ω−V)/(Ω² − (ω+Δ+iγ)(ω−V))
///
/// where ω is the two-photon detuning and V a level shift of the Rydberg
/// state. With the control off this reduces to the two-level response
/// −(g²ρ/c)/(ω+Δ+iγ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderResponse {
    /// g²ρ/c [μm⁻¹·rad·μs⁻¹].
    pub coupling: f64,
    pub omega: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl LadderResponse {
    pub fn new(p: &MediumParams) -> Self {
        Self {
            coupling: p.g2rho() / p.c,
            omega: p.omega,
            delta: p.delta,
            gamma: p.gamma,
        }
    }

    pub fn control_off(self) -> Self {
        Self { omega: 0.0, ..self }
    }

    pub fn chi(&self, omega: f64, shift: f64) -> Complex64 {
        let d = Complex64::new(omega + self.delta, self.gamma);
        let u = omega - shift;
        if self.omega == 0.0 {
            return -self.coupling / d;
        }
        if u == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if !u.is_finite() {
            return -self.coupling / d;
        }
        // (g²ρ/c) / (Ω²/u − d) avoids overflow for large shifts.
        self.coupling / (self.omega * self.omega / u - d)
    }

    /// Two-level reference response.
    pub fn chi_two_level(&self, omega: f64) -> Complex64 {
        -self.coupling / Complex64::new(omega + self.delta, self.gamma)
    }
}

/// χ at two-photon detuning `omega` with Rydberg level shift `shift`.
pub fn chi_eit(omega: f64, p: &MediumParams, shift: f64) -> Complex64 {
    LadderResponse::new(p).chi(omega, shift)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilitySpectrum {
    pub detunings: Vec<f64>,
    pub chi: Vec<Complex64>,
    pub transmission: Vec<f64>,
}

pub fn transmission_spectrum(p: &MediumParams, omegas: &[f64]) -> Result<SusceptibilitySpectrum> {
    p.validate()?;
    spectrum_of(&LadderResponse::new(p), p.length, omegas)
}

/// Spectrum of an arbitrary response over a medium of length `length`.
pub fn spectrum_of(
    response: &LadderResponse,
    length: f64,
    omegas: &[f64],
) -> Result<SusceptibilitySpectrum> {
    if omegas.is_empty() {
        return Err(Error::Domain("detuning list is empty".into()));
    }
    if let Some(w) = omegas.iter().find(|w| !w.is_finite()) {
        return Err(Error::NonFinite(format!("detuning {w}")));
    }
    let chi: Vec<Complex64> = omegas.iter().map(|&w| response.chi(w, 0.0)).collect();
    let transmission = chi
        .iter()
        .map(|c| (-2.0 * c.im * length).exp().min(1.0))
        .collect();
    Ok(SusceptibilitySpectrum {
        detunings: omegas.to_vec(),
        chi,
        transmission,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> MediumParams {
        MediumParams {
            c: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn dark_resonance() {
        let p = unit();
        assert_eq!(chi_eit(0.0, &p, 0.0), Complex64::new(0.0, 0.0));
        let s = transmission_spectrum(&p, &[0.0]).unwrap();
        assert_eq!(s.transmission[0], 1.0);
    }

    #[test]
    fn large_shift_is_two_level() {
        let p = MediumParams { rho: 2.0, gamma: 0.5, ..unit() };
        let chi = chi_eit(0.0, &p, 1e12);
        assert_relative_eq!(chi.im, p.kappa(), max_relative = 1e-9);
        assert!(chi.re.abs() < 1e-9);
        let chi = chi_eit(0.0, &p, f64::INFINITY);
        assert_relative_eq!(chi.im, p.kappa(), max_relative = 1e-14);
    }

    #[test]
    fn half_window_response() {
        // Δ=0, ω = Γ_EIT = Ω²/γ: χ = (g²ρ/c)·ω/(Ω² − (ω+iγ)ω)
        let p = MediumParams { omega: 0.7, gamma: 1.3, ..unit() };
        let w = p.omega * p.omega / p.gamma;
        let den = Complex64::new(p.omega * p.omega - w * w, -p.gamma * w);
        let expected = Complex64::new(w, 0.0) / den;
        let chi = chi_eit(w, &p, 0.0);
        assert_relative_eq!(chi.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(chi.im, expected.im, max_relative = 1e-14);
    }

    #[test]
    fn control_off_attenuation() {
        let p = MediumParams { length: 1.0, ..unit() };
        let r = LadderResponse::new(&p).control_off();
        let s = spectrum_of(&r, p.length, &[0.0]).unwrap();
        let od = p.kappa() * p.length;
        assert_relative_eq!(od, 1.0);
        assert_relative_eq!(s.transmission[0], (-2.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(s.transmission[0].sqrt(), (-od).exp(), max_relative = 1e-14);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(transmission_spectrum(&unit(), &[]).is_err());
    }

    #[test]
    fn kramers_kronig_parity() {
        let p = MediumParams { omega: 0.4, gamma: 1.0, ..unit() };
        for k in 1..200 {
            let w = 0.037 * k as f64;
            let a = chi_eit(w, &p, 0.0);
            let b = chi_eit(-w, &p, 0.0);
            assert!((a.re + b.re).abs() <= 1e-12 * a.norm().max(1.0));
            assert!((a.im - b.im).abs() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn far_wings_transparent() {
        let p = unit();
        let near = chi_eit(10.0, &p, 0.0).norm();
        let far = chi_eit(1e4, &p, 0.0).norm();
        assert!(far < near && far < 1e-3);
    }

    fn window_width(omega: f64) -> f64 {
        // full width at half transmission of the dip centered at ω = 0
        let p = MediumParams { omega, length: 20.0, ..unit() };
        let r = LadderResponse::new(&p);
        let t = |w: f64| (-2.0 * r.chi(w, 0.0).im * p.length).exp();
        let (mut lo, mut hi) = (0.0, omega);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if t(mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * lo
    }

    #[test]
    fn window_scales_with_eit_width() {
        let (a, b) = (0.1, 0.2);
        let ratio = window_width(b) / window_width(a);
        assert!((ratio / 4.0 - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn passive(w in -50.0f64..50.0, v in -1e3f64..1e3, delta in -10.0f64..10.0,
                   gamma in 0.01f64..10.0, omega in 0.01f64..10.0) {
            let p = MediumParams { omega, delta, gamma, ..unit() };
            let chi = chi_eit(w, &p, v);
            prop_assert!(chi.im >= 0.0);
            let s = transmission_spectrum(&p, &[w]).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.transmission[0]));
        }
    }
}
