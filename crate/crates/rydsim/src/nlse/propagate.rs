use super::field::{ComplexField2D, Fft2, TransverseGrid};
use super::kernel::NonlocalKernel;
use crate::error::{Error, Result};
use crate::params::MediumParams;
use num_complex::Complex64;

/// Absorbing frame along the transverse boundary. Inside the frame of width
/// `width` the field is damped per step by exp(−strength·dz·s²), where s goes
/// from 0 at the inner edge to 1 at the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingRim {
    pub width: f64,
    /// Damping rate at the boundary [μm⁻¹].
    pub strength: f64,
}

/// Strang split-step integrator for
///
/// i∂z𝓔 = −∇⊥²𝓔/(2k) − (𝒱 ⊛ |𝓔|²)𝓔.
///
/// The kinetic half steps are exact in Fourier space. The nonlinear step
/// multiplies by exp(iN dz) with N = K₂ ⊛ |𝓔|²; for absorptive kernels N is
/// evaluated at the midpoint intensity to keep second order.
pub struct Propagator<'a> {
    kernel: &'a NonlocalKernel,
    k: f64,
    dz: f64,
    half_kinetic: Vec<Complex64>,
    fft: Fft2,
    rim: Option<Vec<f64>>,
    absorptive: bool,
    work: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(kernel: &'a NonlocalKernel, k: f64, dz: f64, rim: Option<AbsorbingRim>) -> Result<Self> {
        let g = kernel.grid;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "wavenumber",
                value: k,
                requirement: "must be finite and > 0",
            });
        }
        if !(dz > 0.0 && dz.is_finite()) {
            return Err(Error::StepSize(format!("dz must be positive, got {dz}")));
        }
        let dmin = g.dx.min(g.dy);
        if dz > k * dmin * dmin {
            return Err(Error::StepSize(format!(
                "dz = {dz} μm exceeds k·dx² = {} μm",
                k * dmin * dmin
            )));
        }
        let mut half_kinetic = vec![Complex64::new(0.0, 0.0); g.len()];
        for iy in 0..g.ny {
            let ky = g.ky(iy);
            for ix in 0..g.nx {
                let kx = g.kx(ix);
                let phase = -(kx * kx + ky * ky) * dz / (4.0 * k);
                half_kinetic[iy * g.nx + ix] = Complex64::from_polar(1.0, phase);
            }
        }
        let rim = match rim {
            Some(r) => Some(rim_mask(&g, r, dz)?),
            None => None,
        };
        let absorptive = kernel.spectrum.iter().any(|z| z.im != 0.0) && !kernel.is_real();
        Ok(Self {
            kernel,
            k,
            dz,
            half_kinetic,
            fft: Fft2::new(&g),
            rim,
            absorptive,
            work: vec![Complex64::new(0.0, 0.0); g.len()],
        })
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Nonlinear step bound dz·Σ|K₂|dA·max|𝓔|² ≤ 0.1.
    pub fn check_step(&self, field: &ComplexField2D) -> Result<()> {
        let rate = self.kernel.abs_sum * field.peak_intensity();
        if self.dz * rate > 0.1 {
            return Err(Error::StepSize(format!(
                "nonlinear phase per step {:.3e} exceeds 0.1 (dz = {}, max rate {:.3e} μm⁻¹)",
                self.dz * rate,
                self.dz,
                rate
            )));
        }
        Ok(())
    }

    fn kinetic(&mut self, field: &mut ComplexField2D) {
        self.fft.forward(&mut field.data);
        for (z, f) in field.data.iter_mut().zip(&self.half_kinetic) {
            *z *= f;
        }
        self.fft.inverse(&mut field.data);
    }

    /// N = K₂ ⊛ I, written to `self.work`.
    fn potential(&mut self, intensity: impl Iterator<Item = f64>) {
        for (w, i) in self.work.iter_mut().zip(intensity) {
            *w = Complex64::new(i, 0.0);
        }
        self.fft.forward(&mut self.work);
        for (w, s) in self.work.iter_mut().zip(&self.kernel.spectrum) {
            *w *= s;
        }
        self.fft.inverse(&mut self.work);
        if !self.absorptive {
            for w in self.work.iter_mut() {
                w.im = 0.0;
            }
        }
    }

    fn nonlinear(&mut self, field: &mut ComplexField2D) {
        if self.kernel.is_zero() {
            return;
        }
        let dz = self.dz;
        self.potential(field.data.iter().map(|z| z.norm_sqr()));
        if self.absorptive {
            let mid: Vec<f64> = field
                .data
                .iter()
                .zip(&self.work)
                .map(|(z, n)| z.norm_sqr() * (-n.im * dz).exp())
                .collect();
            self.potential(mid.into_iter());
        }
        for (z, n) in field.data.iter_mut().zip(&self.work) {
            *z *= (Complex64::i() * n * dz).exp();
        }
    }

    pub fn step(&mut self, field: &mut ComplexField2D) -> Result<()> {
        if field.grid != self.kernel.grid {
            return Err(Error::Grid("field and kernel grids differ".into()));
        }
        self.check_step(field)?;
        self.kinetic(field);
        self.nonlinear(field);
        self.kinetic(field);
        if let Some(mask) = &self.rim {
            for (z, m) in field.data.iter_mut().zip(mask) {
                *z *= *m;
            }
        }
        field.z += self.dz;
        if !field.is_finite() {
            return Err(Error::NonFinite(format!("field diverged at z = {} μm", field.z)));
        }
        Ok(())
    }
}

fn rim_mask(g: &TransverseGrid, rim: AbsorbingRim, dz: f64) -> Result<Vec<f64>> {
    if !(rim.width > 0.0 && rim.strength >= 0.0) {
        return Err(Error::Domain("absorbing rim needs width > 0 and strength ≥ 0".into()));
    }
    let (hx, hy) = (0.5 * g.extent_x(), 0.5 * g.extent_y());
    if rim.width >= hx.min(hy) {
        return Err(Error::Grid("absorbing rim is wider than half the grid".into()));
    }
    let mut mask = vec![1.0; g.len()];
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let d = (hx - g.x(ix).abs()).min(hy - g.y(iy).abs());
            if d < rim.width {
                let s = (rim.width - d) / rim.width;
                mask[iy * g.nx + ix] = (-rim.strength * dz * s * s).exp();
            }
        }
    }
    Ok(mask)
}

/// Propagates `field` over `nsteps` steps of size `dz`.
pub fn propagate(
    field: &ComplexField2D,
    kernel: &NonlocalKernel,
    p: &MediumParams,
    dz: f64,
    nsteps: usize,
) -> Result<ComplexField2D> {
    let mut prop = Propagator::new(kernel, p.wavenumber, dz, None)?;
    let mut out = field.clone();
    for _ in 0..nsteps {
        prop.step(&mut out)?;
    }
    Ok(out)
}

/// Closed-form local absorption law 1/I(z) = 1/I(0) + 2 Im(χ⁽³⁾) z.
pub fn absorption_law(intensity_in: f64, z: f64, chi3_im: f64) -> Result<f64> {
    if !(intensity_in >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "intensity_in",
            value: intensity_in,
            requirement: "must be ≥ 0",
        });
    }
    if intensity_in == 0.0 {
        return Ok(0.0);
    }
    Ok(intensity_in / (1.0 + 2.0 * chi3_im * z * intensity_in))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlse::kernel::KernelOptions;
    use approx::assert_relative_eq;

    #[test]
    fn absorption_law_examples() {
        assert_eq!(absorption_law(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert_eq!(absorption_law(2.0, 3.0, 0.0).unwrap(), 2.0);
        assert_relative_eq!(absorption_law(1.0, 1.0, 0.5).unwrap(), 0.5);
        assert!(absorption_law(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn step_size_limits() {
        let g = TransverseGrid::square(32, 0.1).unwrap();
        let k = NonlocalKernel::zero(g);
        assert!(matches!(Propagator::new(&k, 1.0, 0.02, None), Err(Error::StepSize(_))));
        assert!(Propagator::new(&k, 1.0, 0.01, None).is_ok());
    }

    #[test]
    fn nonlinear_step_limit() {
        let p = MediumParams { c: 1.0, delta: -6.0, c6: 1.0, wavenumber: 100.0, ..Default::default() };
        let g = TransverseGrid::square(128, 0.125).unwrap();
        let k = NonlocalKernel::from_medium(&p, g, KernelOptions::default()).unwrap();
        let f = ComplexField2D::gaussian(g, 2.0, 1e4).unwrap();
        let err = propagate(&f, &k, &p, 1.0, 1);
        assert!(matches!(err, Err(Error::StepSize(_))));
    }

    #[test]
    fn zero_kernel_conserves_power() {
        let g = TransverseGrid::square(64, 0.1).unwrap();
        let k = NonlocalKernel::zero(g);
        let p = MediumParams { wavenumber: 10.0, ..Default::default() };
        let f = ComplexField2D::gaussian(g, 0.8, 1.0).unwrap();
        let out = propagate(&f, &k, &p, 0.05, 20).unwrap();
        assert_relative_eq!(out.power(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(out.z, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn rim_absorbs_at_boundary() {
        let g = TransverseGrid::square(64, 0.1).unwrap();
        let k = NonlocalKernel::zero(g);
        let mut prop = Propagator::new(&k, 10.0, 0.05, Some(AbsorbingRim { width: 0.8, strength: 5.0 })).unwrap();
        let mut f = ComplexField2D::from_fn(g, |_, _| Complex64::new(1.0, 0.0));
        prop.step(&mut f).unwrap();
        assert!(f.data[0].norm() < 0.9);
        assert!((f.data[32 * 64 + 32].norm() - 1.0).abs() < 1e-12);
    }
}
