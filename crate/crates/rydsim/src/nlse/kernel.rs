use super::field::{Fft2, TransverseGrid};
use crate::error::{Error, Result};
use crate::params::{blockade_radius, MediumParams};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Blockade-saturated interaction between photons,
///
/// 𝒱(r) = K·2V(r)/(2Ω²/Γ − iV(r)),  K = g⁴ρ²/(cΓΩ²),  Γ = γ − iΔ,
///
/// with V(r) = C₆/r⁶. It saturates to 𝒱(0) = 2iK inside the blockade radius
/// and approaches (g⁴ρ²/(cΩ⁴))·V(r) outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockadeInteraction {
    pub prefactor: Complex64,
    /// 2Ω²/Γ.
    pub saturation: Complex64,
    pub c6: f64,
    pub z_b: f64,
}

impl BlockadeInteraction {
    pub fn new(p: &MediumParams) -> Result<Self> {
        p.validate()?;
        let z_b = blockade_radius(p)?;
        let gam = Complex64::new(p.gamma, -p.delta);
        let w2 = p.omega * p.omega;
        let g2 = p.g2rho();
        Ok(Self {
            prefactor: g2 * g2 / (p.c * w2) / gam,
            saturation: 2.0 * w2 / gam,
            c6: p.c6,
            z_b,
        })
    }

    pub fn value(&self, r: f64) -> Complex64 {
        if r == 0.0 {
            return 2.0 * Complex64::i() * self.prefactor;
        }
        // 2V/(s − iV) = 2/(s/V − i)
        let v = self.c6 / r.powi(6);
        if v.is_infinite() {
            return 2.0 * Complex64::i() * self.prefactor;
        }
        self.prefactor * 2.0 / (self.saturation / v - Complex64::i())
    }

    /// Level shift at which |2Ω²/Γ − iV| is smallest, 2Ω²Δ/(γ²+Δ²), and the
    /// radius where the potential reaches it. `None` when the potential never
    /// reaches that value (opposite signs or Δ = 0).
    pub fn resonance_radius(&self) -> Option<f64> {
        // Im(2Ω²/Γ) = 2Ω²Δ/(γ²+Δ²)
        let v_res = self.saturation.im;
        if v_res == 0.0 || v_res.signum() != self.c6.signum() {
            return None;
        }
        Some((self.c6 / v_res).powf(1.0 / 6.0))
    }
}

/// Blockade factor of the three-body spin-wave correlator,
/// (2Ω²/Γ)/(2Ω²/Γ − iV(r)), and its full coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinwaveCorrelator {
    pub factor: Complex64,
    /// −(g³ρ^{3/2}/Ω³)·factor, the coefficient of 𝓔†𝓔𝓔.
    pub coefficient: Complex64,
    /// |factor| > 1: the pair is detuned into the enhancement region around
    /// the interaction resonance.
    pub resonant: bool,
}

pub fn spinwave_correlator(r: f64, p: &MediumParams) -> Result<SpinwaveCorrelator> {
    p.validate()?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            requirement: "separation must be > 0",
        });
    }
    let gam = Complex64::new(p.gamma, -p.delta);
    let s = 2.0 * p.omega * p.omega / gam;
    let v = p.vdw(r);
    let factor = if v.is_infinite() {
        Complex64::new(0.0, 0.0)
    } else {
        s / (s - Complex64::i() * v)
    };
    let scale = p.g.powi(3) * p.rho.powf(1.5) / p.omega.powi(3);
    Ok(SpinwaveCorrelator {
        factor,
        coefficient: -scale * factor,
        resonant: factor.norm() > 1.0 + 1e-12,
    })
}

/// Radial profile of a three-dimensional kernel.
#[derive(Clone)]
pub enum KernelProfile {
    Blockade(BlockadeInteraction),
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    Zero,
}

impl std::fmt::Debug for KernelProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Blockade(b) => f.debug_tuple("Blockade").field(b).finish(),
            Self::Custom(_) => f.write_str("Custom"),
            Self::Zero => f.write_str("Zero"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// Build even when the interaction resonance falls inside the grid.
    pub allow_resonance: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { allow_resonance: false }
    }
}

/// Nonlocal kernel tabulated for a transverse grid.
///
/// The transverse convolution uses the thin-slab kernel
/// K₂(ρ) = ∫𝒱(√(ρ²+z²)) dz, which assumes the field varies slowly along z on
/// the scale of the kernel range. Its grid spectrum coincides with the 3D
/// transform at k_z = 0.
#[derive(Debug, Clone)]
pub struct NonlocalKernel {
    pub profile: KernelProfile,
    /// Keep only the real (dispersive) part.
    pub real_only: bool,
    /// Kernel range (the blockade radius for blockade kernels) [μm].
    pub range: f64,
    pub grid: TransverseGrid,
    /// Radial step of the thin-slab table [μm].
    pub radial_step: f64,
    /// K₂ at ρ = j·radial_step.
    pub slab: Vec<Complex64>,
    /// Grid transform Σ K₂(x) e^{−iq·x} dA in FFT bin order.
    pub spectrum: Vec<Complex64>,
    /// Σ|K₂| dA, bounds the nonlinear rate per unit intensity.
    pub abs_sum: f64,
    /// ∫𝒱 d³r.
    pub volume_integral: Complex64,
    pub resonance_radius: Option<f64>,
}

fn profile_value(profile: &KernelProfile, r: f64) -> Complex64 {
    match profile {
        KernelProfile::Blockade(b) => b.value(r),
        KernelProfile::Custom(f) => f(r),
        KernelProfile::Zero => Complex64::new(0.0, 0.0),
    }
}

/// ∫𝒱 d³r by radial quadrature.
pub fn volume_integral(f: &dyn Fn(f64) -> Complex64, range: f64) -> Complex64 {
    let gl = GaussLegendre::new(16);
    gl.semi_infinite_complex(range, 96, |r| f(r) * (4.0 * PI * r * r))
}

/// Thin-slab kernel K₂(ρ) = 2∫₀^∞ 𝒱(√(ρ²+z²)) dz.
pub fn thin_slab(f: &dyn Fn(f64) -> Complex64, range: f64, rho: f64) -> Complex64 {
    let gl = GaussLegendre::new(16);
    2.0 * gl.semi_infinite_complex(range, 48, |z| f((rho * rho + z * z).sqrt()))
}

fn catmull_rom(table: &[Complex64], h: f64, r: f64) -> Complex64 {
    let t = r / h;
    let j = t.floor() as isize;
    let u = t - j as f64;
    let n = table.len() as isize;
    let at = |k: isize| -> Complex64 {
        let k = k.abs();
        if k >= n {
            table[(n - 1) as usize]
        } else {
            table[k as usize]
        }
    };
    let (p0, p1, p2, p3) = (at(j - 1), at(j), at(j + 1), at(j + 2));
    let u2 = u * u;
    let u3 = u2 * u;
    0.5 * ((2.0 * p1)
        + (p2 - p0) * u
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2
        + (3.0 * p1 - p0 - 3.0 * p2 + p3) * u3)
}

impl NonlocalKernel {
    fn build(
        profile: KernelProfile,
        range: f64,
        grid: TransverseGrid,
        resonance_radius: Option<f64>,
    ) -> Result<Self> {
        let h = grid.dx.min(grid.dy) / 4.0;
        let rho_max = (grid.extent_x().powi(2) + grid.extent_y().powi(2)).sqrt() / 2.0 + 4.0 * h;
        let n_tab = (rho_max / h).ceil() as usize + 2;
        let f = |r: f64| profile_value(&profile, r);
        let (slab, volume) = match profile {
            KernelProfile::Zero => (vec![Complex64::new(0.0, 0.0); n_tab], Complex64::new(0.0, 0.0)),
            _ => (
                (0..n_tab).map(|j| thin_slab(&f, range, j as f64 * h)).collect(),
                volume_integral(&f, range),
            ),
        };
        let mut k = Self {
            profile,
            real_only: false,
            range,
            grid,
            radial_step: h,
            slab,
            spectrum: Vec::new(),
            abs_sum: 0.0,
            volume_integral: volume,
            resonance_radius,
        };
        k.sample_spectrum();
        Ok(k)
    }

    fn sample_spectrum(&mut self) {
        let g = self.grid;
        let mut data = vec![Complex64::new(0.0, 0.0); g.len()];
        let mut abs_sum = 0.0;
        for iy in 0..g.ny {
            let y = TransverseGrid::wrapped(iy, g.ny, g.dy);
            for ix in 0..g.nx {
                let x = TransverseGrid::wrapped(ix, g.nx, g.dx);
                let v = self.slab_at((x * x + y * y).sqrt()) * g.cell_area();
                abs_sum += v.norm();
                data[iy * g.nx + ix] = v;
            }
        }
        Fft2::new(&g).forward(&mut data);
        self.spectrum = data;
        self.abs_sum = abs_sum;
    }

    /// Kernel of a medium, tabulated for `grid`.
    pub fn from_medium(p: &MediumParams, grid: TransverseGrid, opts: KernelOptions) -> Result<Self> {
        let b = BlockadeInteraction::new(p)?;
        check_resolution(&grid, b.z_b)?;
        let rho_max = (grid.extent_x().powi(2) + grid.extent_y().powi(2)).sqrt() / 2.0;
        let res = b.resonance_radius();
        if let Some(r) = res {
            if r <= rho_max && !opts.allow_resonance {
                return Err(Error::Resonance(format!(
                    "V(r) crosses 2Ω²Δ/(γ²+Δ²) at r = {r:.4} μm inside the grid (half-diagonal {rho_max:.4} μm); \
                     choose the opposite sign of C₆Δ or allow the resonance explicitly"
                )));
            }
        }
        Self::build(KernelProfile::Blockade(b), b.z_b, grid, res)
    }

    /// Kernel from an arbitrary radial profile with characteristic `range`.
    pub fn from_fn(
        f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
        range: f64,
        grid: TransverseGrid,
    ) -> Result<Self> {
        check_resolution(&grid, range)?;
        Self::build(KernelProfile::Custom(f), range, grid, None)
    }

    /// Vanishing kernel (free diffraction).
    pub fn zero(grid: TransverseGrid) -> Self {
        Self::build(KernelProfile::Zero, 1.0, grid, None).expect("zero kernel")
    }

    /// Dispersive part of the kernel.
    pub fn real_part(&self) -> Self {
        let mut k = self.clone();
        k.real_only = true;
        for z in k.slab.iter_mut() {
            z.im = 0.0;
        }
        k.volume_integral.im = 0.0;
        k.sample_spectrum();
        k
    }

    /// 𝒱(r) of the underlying three-dimensional kernel.
    pub fn value(&self, r: f64) -> Complex64 {
        let v = profile_value(&self.profile, r);
        if self.real_only {
            Complex64::new(v.re, 0.0)
        } else {
            v
        }
    }

    /// Thin-slab kernel at transverse distance `rho` (cubic interpolation).
    pub fn slab_at(&self, rho: f64) -> Complex64 {
        catmull_rom(&self.slab, self.radial_step, rho)
    }

    pub fn is_real(&self) -> bool {
        let scale = self.spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.spectrum.iter().all(|z| z.im.abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE))
    }

    pub fn is_zero(&self) -> bool {
        self.abs_sum == 0.0
    }

    /// Relative change of ∫𝒱 d³r when the intensity varies along z as
    /// exp(−z²/ℓ²) instead of being uniform; estimates the thin-slab error.
    pub fn thin_slab_error(&self, ell: f64) -> f64 {
        let gl = GaussLegendre::new(16);
        let weighted = gl.semi_infinite_complex(self.range, 96, |r| {
            // angular average of exp(−r²μ²/ℓ²) over μ ∈ [0, 1]
            let a = gl.composite(0.0, 1.0, 4, |mu| (-(r * mu / ell).powi(2)).exp());
            self.value(r) * (4.0 * PI * r * r * a)
        });
        let full = self.volume_integral;
        if full.norm() == 0.0 {
            return 0.0;
        }
        ((weighted - full) / full).norm()
    }
}

fn check_resolution(grid: &TransverseGrid, range: f64) -> Result<()> {
    let d = grid.dx.max(grid.dy);
    if d > range / 8.0 * (1.0 + 1e-12) {
        return Err(Error::Grid(format!(
            "spacing {d} μm does not resolve the kernel range {range} μm with 8 points"
        )));
    }
    let span = grid.extent_x().min(grid.extent_y());
    if span < 8.0 * range * (1.0 - 1e-12) {
        return Err(Error::Grid(format!(
            "grid span {span} μm is shorter than 8 kernel ranges ({} μm)",
            8.0 * range
        )));
    }
    Ok(())
}
