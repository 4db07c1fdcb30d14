//! Medium parameters and the scales derived from them.

use crate::error::{require, Error, Result};

/// Speed of light in μm·μs⁻¹.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Physical inputs describing a Rydberg-EIT medium.
///
/// `omega` is the control half-Rabi frequency, so the control Rabi frequency
/// is `2·omega`. The collective probe coupling is `g·√rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Atomic density [μm⁻³].
    pub rho: f64,
    /// Single-atom coupling [rad·μs⁻¹].
    pub g: f64,
    /// Control half-Rabi frequency Ω [rad·μs⁻¹].
    pub omega: f64,
    /// One-photon detuning Δ [rad·μs⁻¹].
    pub delta: f64,
    /// Polarization decay γ [rad·μs⁻¹].
    pub gamma: f64,
    /// Signed van der Waals coefficient C₆ [rad·μs⁻¹·μm⁶].
    pub c6: f64,
    /// Medium length L [μm].
    pub length: f64,
    /// Probe wavenumber k [μm⁻¹].
    pub wavenumber: f64,
    /// Speed of light [μm·μs⁻¹].
    pub c: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            g: 1.0,
            omega: 1.0,
            delta: 0.0,
            gamma: 1.0,
            c6: 1.0,
            length: 1.0,
            wavenumber: 1.0,
            c: SPEED_OF_LIGHT,
        }
    }
}

impl MediumParams {
    /// Checks every type invariant. `c6` may be zero here; blockade
    /// quantities reject it separately.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho", self.rho),
            ("g", self.g),
            ("omega", self.omega),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("c6", self.c6),
            ("length", self.length),
            ("wavenumber", self.wavenumber),
            ("c", self.c),
        ] {
            require(v.is_finite(), name, v, "must be finite")?;
        }
        require(self.rho > 0.0, "rho", self.rho, "must be > 0")?;
        require(self.gamma > 0.0, "gamma", self.gamma, "must be > 0")?;
        require(self.omega > 0.0, "omega", self.omega, "must be > 0")?;
        require(self.c > 0.0, "c", self.c, "must be > 0")?;
        require(self.length > 0.0, "length", self.length, "must be > 0")?;
        require(self.wavenumber > 0.0, "wavenumber", self.wavenumber, "must be > 0")?;
        Ok(())
    }

    /// Collective coupling squared g²ρ.
    pub fn g2rho(&self) -> f64 {
        self.g * self.g * self.rho
    }

    /// Resonant two-level amplitude absorption coefficient g²ρ/(cγ) [μm⁻¹].
    pub fn kappa(&self) -> f64 {
        self.g2rho() / (self.c * self.gamma)
    }

    /// |Δ + iγ|.
    pub fn detuning_modulus(&self) -> f64 {
        self.delta.hypot(self.gamma)
    }

    /// Van der Waals shift C₆/r⁶ at separation `r`.
    pub fn vdw(&self, r: f64) -> f64 {
        self.c6 / r.powi(6)
    }
}

/// Scales derived from [`MediumParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub gamma_eit: f64,
    pub z_b: f64,
    pub od: f64,
    pub od_b: f64,
    /// (γ/|Δ|)·OD_b; `None` on one-photon resonance.
    pub od_b_bar: Option<f64>,
    pub v_g: f64,
    pub l_abs: f64,
}

impl DerivedScales {
    /// The off-resonant blockaded depth, rejecting Δ = 0.
    pub fn require_od_b_bar(&self) -> Result<f64> {
        self.od_b_bar.ok_or(Error::InvalidParameter {
            name: "delta",
            value: 0.0,
            requirement: "must be nonzero for the off-resonant blockaded depth",
        })
    }
}

/// EIT linewidth Γ_EIT = Ω²/√(Δ²+γ²).
pub fn eit_linewidth(p: &MediumParams) -> f64 {
    p.omega * p.omega / p.detuning_modulus()
}

/// Blockade radius (|C₆|/Γ_EIT)^{1/6}.
pub fn blockade_radius(p: &MediumParams) -> Result<f64> {
    require(p.c6 != 0.0, "c6", p.c6, "must be nonzero for blockade quantities")?;
    Ok((p.c6.abs() / eit_linewidth(p)).powf(1.0 / 6.0))
}

pub fn derive_scales(p: &MediumParams) -> Result<DerivedScales> {
    p.validate()?;
    let gamma_eit = eit_linewidth(p);
    let z_b = blockade_radius(p)?;
    let kappa = p.kappa();
    let od_b = kappa * z_b;
    let od_b_bar = if p.delta != 0.0 {
        Some(p.gamma / p.delta.abs() * od_b)
    } else {
        None
    };
    let (photon, _) = polariton_mixing(p);
    Ok(DerivedScales {
        gamma_eit,
        z_b,
        od: kappa * p.length,
        od_b,
        od_b_bar,
        v_g: p.c * photon,
        l_abs: 1.0 / kappa,
    })
}

/// Photon and spin-wave content of the dark-state polariton.
pub fn polariton_mixing(p: &MediumParams) -> (f64, f64) {
    let w2 = p.omega * p.omega;
    let g2 = p.g2rho();
    let total = w2 + g2;
    (w2 / total, g2 / total)
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
    fn unit_blockade_radius() {
        let p = unit();
        assert_relative_eq!(eit_linewidth(&p), 1.0);
        assert_relative_eq!(derive_scales(&p).unwrap().z_b, 1.0);
        let p = MediumParams { c6: 64.0, ..unit() };
        assert_relative_eq!(derive_scales(&p).unwrap().z_b, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn optical_depths() {
        // g²ρ/(cγ) = 0.5 and z_b = 4 (C₆ = 4⁶ with Γ_EIT = 1).
        let p = MediumParams {
            rho: 0.5,
            c6: 4096.0,
            length: 40.0,
            ..unit()
        };
        let s = derive_scales(&p).unwrap();
        assert_relative_eq!(s.z_b, 4.0, epsilon = 1e-13);
        assert_relative_eq!(s.od_b, 2.0, epsilon = 1e-13);
        assert_relative_eq!(s.od, 20.0, epsilon = 1e-13);
        assert_relative_eq!(s.l_abs * s.od_b, s.z_b, epsilon = 1e-13);
        assert_relative_eq!(s.od * s.l_abs, p.length, epsilon = 1e-12);
    }

    #[test]
    fn rejects_zero_c6_and_resonant_bar() {
        let p = MediumParams { c6: 0.0, ..unit() };
        assert!(matches!(derive_scales(&p), Err(Error::InvalidParameter { name: "c6", .. })));
        let s = derive_scales(&unit()).unwrap();
        assert!(s.od_b_bar.is_none());
        assert!(s.require_od_b_bar().is_err());
        let s = derive_scales(&MediumParams { delta: 4.0, ..unit() }).unwrap();
        assert_relative_eq!(s.require_od_b_bar().unwrap(), 0.25 * s.od_b);
    }

    #[test]
    fn rejects_invalid() {
        let p = MediumParams { omega: -1.0, ..unit() };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "omega", .. })));
        let p = MediumParams { rho: f64::NAN, ..unit() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn mixing_examples() {
        let p = MediumParams { rho: 3.0, ..unit() };
        let (a, b) = polariton_mixing(&p);
        assert_relative_eq!(a, 0.25);
        assert_relative_eq!(b, 0.75);
        let (a, b) = polariton_mixing(&MediumParams { rho: 1.0, ..unit() });
        assert_relative_eq!(a, 0.5);
        assert_relative_eq!(b, 0.5);
        let (a, b) = polariton_mixing(&MediumParams { rho: 1e-300, ..unit() });
        assert_eq!((a, b), (1.0, 1e-300));
    }

    proptest! {
        #[test]
        fn scale_invariants(
            rho in 1e-3f64..1e3, g in 0.1f64..10.0, omega in 0.1f64..10.0,
            delta in -10.0f64..10.0, gamma in 0.1f64..10.0, c6 in 1e-3f64..1e6,
            neg in any::<bool>(), length in 1.0f64..1e3,
        ) {
            let p = MediumParams { rho, g, omega, delta, gamma, c6: if neg { -c6 } else { c6 },
                length, wavenumber: 1.0, c: 1.0 };
            let s = derive_scales(&p).unwrap();
            prop_assert!(s.gamma_eit > 0.0 && s.z_b > 0.0 && s.od > 0.0 && s.od_b > 0.0);
            prop_assert!(s.v_g > 0.0 && s.l_abs > 0.0);
            prop_assert!((s.l_abs * s.od_b / s.z_b - 1.0).abs() < 1e-12);
            prop_assert!((s.od * s.l_abs / length - 1.0).abs() < 1e-12);
            prop_assert!((s.z_b.powi(6) * s.gamma_eit / c6 - 1.0).abs() < 1e-10);
            let (ph, sw) = polariton_mixing(&p);
            prop_assert!((ph + sw - 1.0).abs() < 1e-14);
            prop_assert!((s.v_g - p.c * ph).abs() <= 1e-14 * p.c);
            let s64 = derive_scales(&MediumParams { c6: 64.0 * p.c6, ..p }).unwrap();
            prop_assert!((s64.z_b / s.z_b - 2.0).abs() < 1e-12);
            // linear in rho and length
            let s2 = derive_scales(&MediumParams { rho: 2.0 * rho, length: 3.0 * length, ..p }).unwrap();
            prop_assert!((s2.od / s.od - 6.0).abs() < 1e-12);
            prop_assert_eq!(derive_scales(&p).unwrap(), s);
        }
    }
}
