use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform periodic transverse grid centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl TransverseGrid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if !nx.is_power_of_two() || !ny.is_power_of_two() || nx < 2 || ny < 2 {
            return Err(Error::Grid(format!("grid sizes must be powers of two ≥ 2, got {nx}×{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::Grid(format!("grid spacings must be positive, got dx={dx}, dy={dy}")));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    pub fn square(n: usize, d: f64) -> Result<Self> {
        Self::new(n, n, d, d)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny / 2) as f64) * self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn extent_x(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn extent_y(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    /// Angular wavenumber of FFT bin `i` of an axis with `n` points.
    pub fn wavenumber(i: usize, n: usize, d: f64) -> f64 {
        let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
        2.0 * PI * k / (n as f64 * d)
    }

    pub fn kx(&self, i: usize) -> f64 {
        Self::wavenumber(i, self.nx, self.dx)
    }

    pub fn ky(&self, i: usize) -> f64 {
        Self::wavenumber(i, self.ny, self.dy)
    }

    /// Periodic minimum-image displacement of bin offset `i` along an axis.
    pub(crate) fn wrapped(i: usize, n: usize, d: f64) -> f64 {
        if i <= n / 2 {
            i as f64 * d
        } else {
            (i as f64 - n as f64) * d
        }
    }
}

/// Row-major 2D FFT with cached plans.
#[derive(Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
    col: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(grid: &TransverseGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fx = planner.plan_fft_forward(grid.nx);
        let ix = planner.plan_fft_inverse(grid.nx);
        let fy = planner.plan_fft_forward(grid.ny);
        let iy = planner.plan_fft_inverse(grid.ny);
        let scratch_len = [&fx, &ix, &fy, &iy]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            nx: grid.nx,
            ny: grid.ny,
            fx,
            ix,
            fy,
            iy,
            col: vec![Complex64::new(0.0, 0.0); grid.ny],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn run(&mut self, data: &mut [Complex64], inverse: bool) {
        let (fx, fy) = if inverse {
            (self.ix.clone(), self.iy.clone())
        } else {
            (self.fx.clone(), self.fy.clone())
        };
        for row in data.chunks_exact_mut(self.nx) {
            fx.process_with_scratch(row, &mut self.scratch);
        }
        for i in 0..self.nx {
            for j in 0..self.ny {
                self.col[j] = data[j * self.nx + i];
            }
            fy.process_with_scratch(&mut self.col, &mut self.scratch);
            for j in 0..self.ny {
                data[j * self.nx + i] = self.col[j];
            }
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Normalized inverse transform.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, true);
        let s = 1.0 / (self.nx * self.ny) as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

/// Transverse probe envelope 𝓔(x, y) at propagation distance `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub grid: TransverseGrid,
    /// Row-major amplitudes, index `iy·nx + ix`.
    pub data: Vec<Complex64>,
    pub z: f64,
}

impl ComplexField2D {
    pub fn zeros(grid: TransverseGrid) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
            z: 0.0,
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: TransverseGrid, f: F) -> Self {
        let mut out = Self::zeros(grid);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                out.data[iy * grid.nx + ix] = f(grid.x(ix), grid.y(iy));
            }
        }
        out
    }

    /// Super-Gaussian beam 𝓔 ∝ exp(−(r/w)^{2m}) scaled to `power`; m = 1 is a
    /// Gaussian with intensity waist `waist`.
    pub fn super_gaussian(grid: TransverseGrid, waist: f64, order: u32, power: f64) -> Result<Self> {
        if !(waist > 0.0) || order == 0 || !(power >= 0.0) {
            return Err(Error::Domain(format!(
                "beam needs waist > 0, order ≥ 1 and power ≥ 0 (got {waist}, {order}, {power})"
            )));
        }
        let mut f = Self::from_fn(grid, |x, y| {
            let r2 = (x * x + y * y) / (waist * waist);
            Complex64::new((-r2.powi(order as i32)).exp(), 0.0)
        });
        f.set_power(power);
        Ok(f)
    }

    pub fn gaussian(grid: TransverseGrid, waist: f64, power: f64) -> Result<Self> {
        Self::super_gaussian(grid, waist, 1, power)
    }

    pub fn set_power(&mut self, power: f64) {
        let p = self.power();
        if p > 0.0 {
            let s = (power / p).sqrt();
            for z in self.data.iter_mut() {
                *z *= s;
            }
        }
    }

    /// ∫|𝓔|² dA.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn peak_intensity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn moments(&self) -> (f64, f64, f64, f64) {
        let g = &self.grid;
        let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let w = self.data[iy * g.nx + ix].norm_sqr();
                s += w;
                sx += w * g.x(ix);
                sy += w * g.y(iy);
            }
        }
        if s == 0.0 {
            return (0.0, 0.0, 0.0, 0.0);
        }
        let (cx, cy) = (sx / s, sy / s);
        let (mut vx, mut vy) = (0.0, 0.0);
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let w = self.data[iy * g.nx + ix].norm_sqr();
                vx += w * (g.x(ix) - cx).powi(2);
                vy += w * (g.y(iy) - cy).powi(2);
            }
        }
        (cx, cy, vx / s, vy / s)
    }

    /// Second-moment waist along x, 2√⟨(x−x̄)²⟩.
    pub fn waist_x(&self) -> f64 {
        2.0 * self.moments().2.sqrt()
    }

    pub fn waist_y(&self) -> f64 {
        2.0 * self.moments().3.sqrt()
    }

    /// √⟨|r − r̄|²⟩ of the intensity.
    pub fn rms_width(&self) -> f64 {
        let (_, _, vx, vy) = self.moments();
        (vx + vy).sqrt()
    }
}
