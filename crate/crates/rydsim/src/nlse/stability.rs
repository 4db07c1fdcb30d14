use super::kernel::NonlocalKernel;
use crate::error::{Error, Result};

/// Modulational growth rates of a plane wave of intensity I.
///
/// Linearizing i∂z𝓔 = −∇²𝓔/(2k) − (𝒱 ⊛ |𝓔|²)𝓔 around a plane wave gives
/// ω(q)² = ε(ε − 2𝒱̃(q)I) with ε = q²/(2k); modes with ω² < 0 grow at
/// λ = √(−ω²). A focusing spectrum (𝒱̃ > 0) is unstable at small q; a
/// repulsive soft core (𝒱 < 0) is unstable only where its transform changes
/// sign (roton minimum).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCurve {
    /// Wavenumbers along the x axis of the kernel grid [μm⁻¹].
    pub q: Vec<f64>,
    pub kernel_spectrum: Vec<f64>,
    pub lambda: Vec<f64>,
    pub q_star: f64,
    pub lambda_max: f64,
}

pub fn bogoliubov_rate(q: f64, spectrum: f64, intensity: f64, k: f64) -> f64 {
    let eps = q * q / (2.0 * k);
    let w2 = eps * (eps - 2.0 * spectrum * intensity);
    if w2 < 0.0 {
        (-w2).sqrt()
    } else {
        0.0
    }
}

pub fn plane_wave_stability(kernel: &NonlocalKernel, intensity: f64, k: f64) -> Result<StabilityCurve> {
    if !kernel.is_real() {
        return Err(Error::ComplexKernel);
    }
    if !(intensity >= 0.0) || !(k > 0.0) {
        return Err(Error::Domain("stability needs intensity ≥ 0 and k > 0".into()));
    }
    let g = kernel.grid;
    let n = g.nx / 2;
    let mut curve = StabilityCurve {
        q: Vec::with_capacity(n),
        kernel_spectrum: Vec::with_capacity(n),
        lambda: Vec::with_capacity(n),
        q_star: 0.0,
        lambda_max: 0.0,
    };
    for i in 0..n {
        let q = g.kx(i);
        let v = kernel.spectrum[i].re;
        let l = bogoliubov_rate(q, v, intensity, k);
        if l > curve.lambda_max {
            curve.lambda_max = l;
            curve.q_star = q;
        }
        curve.q.push(q);
        curve.kernel_spectrum.push(v);
        curve.lambda.push(l);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlse::field::TransverseGrid;
    use crate::nlse::kernel::KernelOptions;
    use crate::MediumParams;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn defocusing_gaussian_is_stable() {
        let g = TransverseGrid::square(64, 0.125).unwrap();
        let k = NonlocalKernel::from_fn(Arc::new(|r: f64| Complex64::new(-(-r * r).exp(), 0.0)), 1.0, g).unwrap();
        // non-positive up to interpolation noise at the highest wavenumbers
        let dc = k.spectrum[0].re;
        assert!(k.spectrum.iter().all(|z| z.re <= 1e-6 * dc.abs()));
        let c = plane_wave_stability(&k, 10.0, 5.0).unwrap();
        assert!(c.lambda.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn vanishing_intensity_is_stable() {
        let g = TransverseGrid::square(128, 0.125).unwrap();
        let p = MediumParams { c: 1.0, delta: 10.0, c6: -1.0, ..Default::default() };
        let k = NonlocalKernel::from_medium(&p, g, KernelOptions::default()).unwrap().real_part();
        let c = plane_wave_stability(&k, 0.0, 5.0).unwrap();
        assert!(c.lambda.iter().all(|&l| l == 0.0));
        assert_eq!(c.lambda_max, 0.0);
    }

    #[test]
    fn roton_of_repulsive_soft_core() {
        let g = TransverseGrid::square(128, 0.125).unwrap();
        let p = MediumParams { c: 1.0, delta: 10.0, c6: -1.0, ..Default::default() };
        let k = NonlocalKernel::from_medium(&p, g, KernelOptions::default()).unwrap().real_part();
        assert!(k.value(0.0).re < 0.0);
        let c = plane_wave_stability(&k, 50.0, 5.0).unwrap();
        assert!(c.lambda_max > 0.0 && c.q_star > 0.0);
        // instability sits where the transform of the repulsive core turns positive
        let i = c.q.iter().position(|&q| q == c.q_star).unwrap();
        assert!(c.kernel_spectrum[i] > 0.0);
        assert!(c.kernel_spectrum[0] < 0.0);
    }

    #[test]
    fn complex_kernel_rejected() {
        let g = TransverseGrid::square(64, 0.125).unwrap();
        let p = MediumParams { c: 1.0, ..Default::default() };
        let k = NonlocalKernel::from_medium(&p, g, KernelOptions::default()).unwrap();
        assert_eq!(plane_wave_stability(&k, 1.0, 1.0), Err(Error::ComplexKernel));
    }
}
