use crate::error::{Error, Result};
use num_complex::Complex64;

/// Relative-coordinate grid r̃ ∈ [−r̃max, r̃max] and centre-of-mass steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonGrid {
    pub r_max: f64,
    /// Number of grid points including both boundaries.
    pub n: usize,
    /// Propagation length L̃ = L/z_b.
    pub l_tilde: f64,
    pub steps: usize,
}

impl TwoPhotonGrid {
    /// Grid with `points_per_unit` points per unit r̃ (odd total, r̃ = 0 on
    /// the grid). Requires r̃max ≥ 6 and ≥ 32 points per unit.
    pub fn new(r_max: f64, points_per_unit: usize, l_tilde: f64, steps: usize) -> Result<Self> {
        if !(r_max >= 6.0) {
            return Err(Error::Grid(format!("r̃max = {r_max} must be ≥ 6")));
        }
        if points_per_unit < 32 {
            return Err(Error::Grid(format!(
                "{points_per_unit} points per unit r̃ does not resolve r̃ = 1 (need ≥ 32)"
            )));
        }
        let half = (r_max * points_per_unit as f64).round() as usize;
        Self::unchecked(r_max, 2 * half + 1, l_tilde, steps)
    }

    /// Grid without the resolution preconditions, for coarse reference
    /// calculations.
    pub fn unchecked(r_max: f64, n: usize, l_tilde: f64, steps: usize) -> Result<Self> {
        if n < 4 || !(r_max > 0.0) {
            return Err(Error::Grid("grid needs ≥ 4 points and r̃max > 0".into()));
        }
        if steps == 0 || !(l_tilde >= 0.0) || !l_tilde.is_finite() {
            return Err(Error::Grid("need ≥ 1 step and a finite L̃ ≥ 0".into()));
        }
        Ok(Self {
            r_max,
            n,
            l_tilde,
            steps,
        })
    }

    pub fn dr(&self) -> f64 {
        2.0 * self.r_max / (self.n - 1) as f64
    }

    pub fn d_big_r(&self) -> f64 {
        self.l_tilde / self.steps as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        -self.r_max + j as f64 * self.dr()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.r(j)).collect()
    }
}

/// Generator ∂_R u = A u with a three-point stencil,
/// (A u)_j = diag_j u_j + off_j (u_{j−1} + u_{j+1}).
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub diag: Vec<Complex64>,
    pub off: Vec<Complex64>,
}

impl Stencil {
    pub fn apply(&self, u: &[Complex64], j: usize) -> Complex64 {
        self.diag[j] * u[j] + self.off[j] * (u[j - 1] + u[j + 1])
    }
}

/// EE(R̃, r̃) with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonAmplitude {
    pub grid: TwoPhotonGrid,
    pub r: Vec<f64>,
    /// Amplitude at R̃ = L̃.
    pub ee: Vec<Complex64>,
    /// g2(r̃) = |EE(L̃, r̃)|²/|EE_∞|².
    pub g2: Vec<f64>,
    /// Mean |EE|² over |r̃| ∈ [0.8 r̃max, r̃max].
    pub plateau: f64,
    /// (R̃, EE(R̃, ·)) every `snapshot_every` steps, including R̃ = 0 and L̃.
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
    /// EE(R̃, 0) after every step, starting at R̃ = 0.
    pub centre: Vec<Complex64>,
}

impl TwoPhotonAmplitude {
    /// g2 at r̃ = 0, interpolated between the central points for even grids.
    pub fn g2_zero(&self) -> f64 {
        central(&self.g2)
    }

    /// Smallest r̃ ≥ 0 where g2 has recovered halfway from g2(0) to 1,
    /// linearly interpolated. `None` when g2 never gets there on the grid.
    pub fn correlation_width(&self) -> Option<f64> {
        let g0 = self.g2_zero();
        let half = 0.5 * (g0 + 1.0);
        if (g0 - 1.0).abs() < 1e-9 {
            return None;
        }
        let side = |x: f64| (x - half) * (g0 - half) > 0.0;
        let start = self.r.iter().position(|&r| r >= 0.0)?;
        let (mut r0, mut x0) = (0.0, g0);
        for j in start..self.r.len() {
            let (r1, x1) = (self.r[j], self.g2[j]);
            if !side(x1) {
                let t = if x1 == x0 { 0.0 } else { (half - x0) / (x1 - x0) };
                return Some(r0 + t * (r1 - r0));
            }
            (r0, x0) = (r1, x1);
        }
        None
    }

    /// max |EE(r̃) − EE(−r̃)|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.ee.len();
        (0..n / 2).map(|j| (self.ee[j] - self.ee[n - 1 - j]).norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn central<T: Copy + Into<f64>>(v: &[T]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2].into()
    } else {
        0.5 * (v[n / 2 - 1].into() + v[n / 2].into())
    }
}

fn central_c(v: &[Complex64]) -> Complex64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn plateau(grid: &TwoPhotonGrid, u: &[Complex64]) -> f64 {
    let lo = 0.8 * grid.r_max;
    let (mut s, mut c) = (0.0, 0usize);
    for (j, z) in u.iter().enumerate() {
        if grid.r(j).abs() >= lo - 1e-12 {
            s += z.norm_sqr();
            c += 1;
        }
    }
    s / c as f64
}

/// Solves (I − h/2 A) x = rhs on the interior with fixed boundary values.
fn thomas(stencil: &Stencil, h: f64, rhs: &[Complex64], out: &mut [Complex64], cp: &mut [Complex64]) {
    let n = rhs.len();
    // interior indices 1..n-1 of the full grid map to 0..n-2 here
    let m = n - 2;
    let half = 0.5 * h;
    let one = Complex64::new(1.0, 0.0);
    let a = |k: usize| -half * stencil.off[k + 1];
    let b = |k: usize| one - half * stencil.diag[k + 1];
    let mut dp = vec![Complex64::new(0.0, 0.0); m];
    cp[0] = a(0) / b(0);
    dp[0] = rhs[1] / b(0);
    for k in 1..m {
        let den = b(k) - a(k) * cp[k - 1];
        cp[k] = a(k) / den;
        dp[k] = (rhs[k + 1] - a(k) * dp[k - 1]) / den;
    }
    out[m] = dp[m - 1];
    for k in (0..m - 1).rev() {
        out[k + 1] = dp[k] - cp[k] * out[k + 2];
    }
}

/// Implicit trapezoidal integration of ∂_R u = A u with Dirichlet values
/// `boundary` at both ends.
pub(crate) fn integrate(
    grid: &TwoPhotonGrid,
    stencil: &Stencil,
    initial: Vec<Complex64>,
    boundary: Complex64,
    snapshot_every: Option<usize>,
) -> Result<TwoPhotonAmplitude> {
    let n = grid.n;
    if initial.len() != n {
        return Err(Error::Grid("initial amplitude length differs from the grid".into()));
    }
    let h = grid.d_big_r();
    let mut u = initial;
    u[0] = boundary;
    u[n - 1] = boundary;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut next = u.clone();
    let mut cp = vec![Complex64::new(0.0, 0.0); n];
    let mut snapshots = vec![(0.0, u.clone())];
    let mut centre = Vec::with_capacity(grid.steps + 1);
    centre.push(central_c(&u));
    for step in 1..=grid.steps {
        for j in 1..n - 1 {
            rhs[j] = u[j] + 0.5 * h * stencil.apply(&u, j);
        }
        // implicit-side boundary coupling; the explicit side is in apply()
        rhs[1] += 0.5 * h * stencil.off[1] * boundary;
        rhs[n - 2] += 0.5 * h * stencil.off[n - 2] * boundary;
        thomas(stencil, h, &rhs, &mut next, &mut cp);
        next[0] = boundary;
        next[n - 1] = boundary;
        std::mem::swap(&mut u, &mut next);
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(format!("two-photon amplitude at R̃ = {}", step as f64 * h)));
        }
        centre.push(central_c(&u));
        if let Some(k) = snapshot_every {
            if k > 0 && (step % k == 0 || step == grid.steps) {
                snapshots.push((step as f64 * h, u.clone()));
            }
        }
    }
    if snapshot_every.is_none() {
        snapshots.push((grid.l_tilde, u.clone()));
    }
    let pl = plateau(grid, &u);
    let g2 = u.iter().map(|z| z.norm_sqr() / pl).collect();
    Ok(TwoPhotonAmplitude {
        grid: *grid,
        r: grid.points(),
        ee: u,
        g2,
        plateau: pl,
        snapshots,
        centre,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    /// Record the full amplitude every this many steps.
    pub snapshot_every: Option<usize>,
    /// Drop the relative-coordinate kinetic term (dissipative model only).
    pub no_diffusion: bool,
}

/// Blockade profile 1/(1 − 2ir̃⁶) of the resonant two-photon problem.
pub fn dissipative_potential(r: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(1.0, -2.0 * r.powi(6))
}

/// Blockade profile 1/(1 + 2r̃⁶) of the far-detuned problem.
pub fn dispersive_potential(r: f64) -> f64 {
    1.0 / (1.0 + 2.0 * r.powi(6))
}

/// Stencil of ∂_R EE = −2OD_b𝒱EE + (2/OD_b)(1 + 𝒱Ω²/γ²)∂²EE.
pub(crate) fn dissipative_stencil(grid: &TwoPhotonGrid, od_b: f64, omega_over_gamma: f64, diffusion: bool) -> Stencil {
    let dr2 = grid.dr() * grid.dr();
    let w2 = omega_over_gamma * omega_over_gamma;
    let mut diag = Vec::with_capacity(grid.n);
    let mut off = Vec::with_capacity(grid.n);
    for j in 0..grid.n {
        let v = dissipative_potential(grid.r(j));
        let d = if diffusion {
            (2.0 / od_b) * (1.0 + v * w2)
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag.push(-2.0 * od_b * v - 2.0 * d / dr2);
        off.push(d / dr2);
    }
    Stencil { diag, off }
}

/// Coherent input EE(0, r̃) = 1 evolved through a resonant medium of length
/// L̃, with the amplitude clamped to the interaction-free plateau 1 at ±r̃max.
pub fn evolve_dissipative(
    od_b: f64,
    omega_over_gamma: f64,
    grid: &TwoPhotonGrid,
    opts: EvolveOptions,
) -> Result<TwoPhotonAmplitude> {
    if !(od_b > 0.0 && od_b.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "od_b",
            value: od_b,
            requirement: "must be finite and > 0",
        });
    }
    if !(omega_over_gamma >= 0.0 && omega_over_gamma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "omega_over_gamma",
            value: omega_over_gamma,
            requirement: "must be finite and ≥ 0",
        });
    }
    let st = dissipative_stencil(grid, od_b, omega_over_gamma, !opts.no_diffusion);
    let one = Complex64::new(1.0, 0.0);
    integrate(grid, &st, vec![one; grid.n], one, opts.snapshot_every)
}

/// Stencil of ∂_R EE = −i[a(r̃)∂² + W(r̃)]EE with a = (2/ŌD_b)(1 − 𝒱Ω²/Δ²)
/// and W = 2ŌD_b𝒱.
pub(crate) fn dispersive_stencil(grid: &TwoPhotonGrid, od_b_bar: f64, omega_over_delta: f64) -> Stencil {
    let dr2 = grid.dr() * grid.dr();
    let w2 = omega_over_delta * omega_over_delta;
    let mi = -Complex64::i();
    let mut diag = Vec::with_capacity(grid.n);
    let mut off = Vec::with_capacity(grid.n);
    for j in 0..grid.n {
        let v = dispersive_potential(grid.r(j));
        let a = (2.0 / od_b_bar) * (1.0 - v * w2);
        let w = 2.0 * od_b_bar * v;
        diag.push(mi * (w - 2.0 * a / dr2));
        off.push(mi * (a / dr2));
    }
    Stencil { diag, off }
}

fn check_dispersive(od_b_bar: f64, omega_over_delta: f64) -> Result<()> {
    if !(od_b_bar >= 0.0 && od_b_bar.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "od_b_bar",
            value: od_b_bar,
            requirement: "must be finite and ≥ 0",
        });
    }
    if !(omega_over_delta.abs() <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "omega_over_delta",
            value: omega_over_delta,
            requirement: "|Ω/Δ| ≤ 1 (the effective equation does not hold for Ω > |Δ|)",
        });
    }
    Ok(())
}

/// Dispersive evolution from an arbitrary initial amplitude with Dirichlet
/// value `boundary`.
pub fn evolve_dispersive_from(
    od_b_bar: f64,
    omega_over_delta: f64,
    grid: &TwoPhotonGrid,
    initial: Vec<Complex64>,
    boundary: Complex64,
    opts: EvolveOptions,
) -> Result<TwoPhotonAmplitude> {
    check_dispersive(od_b_bar, omega_over_delta)?;
    if od_b_bar == 0.0 {
        // no interaction and infinite relative mass: the amplitude is frozen
        let st = Stencil {
            diag: vec![Complex64::new(0.0, 0.0); grid.n],
            off: vec![Complex64::new(0.0, 0.0); grid.n],
        };
        return integrate(grid, &st, initial, boundary, opts.snapshot_every);
    }
    let st = dispersive_stencil(grid, od_b_bar, omega_over_delta);
    integrate(grid, &st, initial, boundary, opts.snapshot_every)
}

/// Coherent input through a far-detuned medium.
pub fn evolve_dispersive(
    od_b_bar: f64,
    omega_over_delta: f64,
    grid: &TwoPhotonGrid,
    opts: EvolveOptions,
) -> Result<TwoPhotonAmplitude> {
    let one = Complex64::new(1.0, 0.0);
    evolve_dispersive_from(od_b_bar, omega_over_delta, grid, vec![one; grid.n], one, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_preconditions() {
        assert!(TwoPhotonGrid::new(5.0, 32, 1.0, 10).is_err());
        assert!(TwoPhotonGrid::new(6.0, 16, 1.0, 10).is_err());
        let g = TwoPhotonGrid::new(6.0, 32, 1.0, 10).unwrap();
        assert_eq!(g.n, 385);
        assert_relative_eq!(g.r(192), 0.0, epsilon = 1e-14);
        assert_relative_eq!(g.dr(), 1.0 / 32.0, max_relative = 1e-14);
    }

    #[test]
    fn beer_lambert_without_diffusion() {
        let g = TwoPhotonGrid::new(6.0, 32, 1.0, 1000).unwrap();
        let od_b = 1.0;
        let a = evolve_dissipative(od_b, 0.5, &g, EvolveOptions { no_diffusion: true, ..Default::default() }).unwrap();
        for (j, z) in a.ee.iter().enumerate().take(g.n - 1).skip(1) {
            let exact = (-2.0 * od_b * dissipative_potential(g.r(j)) * g.l_tilde).exp();
            assert!((z - exact).norm() < 1e-6, "{j}");
        }
    }

    #[test]
    fn dissipative_bounds_and_symmetry() {
        let g = TwoPhotonGrid::new(6.0, 32, 2.0, 200).unwrap();
        let a = evolve_dissipative(3.0, 1.0, &g, EvolveOptions::default()).unwrap();
        assert!(a.ee.iter().all(|z| z.norm() <= 1.0 + 1e-12));
        assert!(a.asymmetry() <= 1e-10);
        assert!(a.g2.iter().all(|&x| x >= 0.0));
        assert!(a.g2_zero() < 0.05);
    }

    #[test]
    fn correlation_width_grows_with_length() {
        let w = |l: f64| {
            let g = TwoPhotonGrid::new(8.0, 32, l, 200).unwrap();
            let a = evolve_dissipative(3.0, 1.0, &g, EvolveOptions::default()).unwrap();
            let w = a.correlation_width().unwrap();
            // g2 really is halfway back at the reported width
            let j = g.points().iter().position(|&r| r >= w).unwrap();
            assert!(a.g2[j] >= 0.5 * (a.g2_zero() + 1.0) - 1e-12);
            w
        };
        let (a, b) = (w(1.0), w(4.0));
        assert!(a > 0.0 && b > a, "{a} {b}");
    }

    #[test]
    fn flat_dispersive_is_unitary() {
        // localized packet with zero boundary and constant relative mass
        let g = TwoPhotonGrid::new(12.0, 32, 1.0, 100).unwrap();
        let init: Vec<Complex64> = g.points().iter().map(|r| Complex64::new((-r * r).exp(), 0.0)).collect();
        let zero = Complex64::new(0.0, 0.0);
        let a = evolve_dispersive_from(1.0, 0.0, &g, init.clone(), zero, EvolveOptions::default()).unwrap();
        let n0: f64 = init.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = a.ee.iter().map(|z| z.norm_sqr()).sum();
        assert!((n1 / n0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn no_interaction_is_frozen() {
        let g = TwoPhotonGrid::new(6.0, 32, 3.0, 30).unwrap();
        let a = evolve_dispersive(0.0, 0.3, &g, EvolveOptions::default()).unwrap();
        assert!(a.ee.iter().all(|z| (z - 1.0).norm() < 1e-15));
        assert!(a.g2.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert_eq!(a.correlation_width(), None);
    }

    #[test]
    fn strong_driving_refused() {
        let g = TwoPhotonGrid::new(6.0, 32, 1.0, 10).unwrap();
        assert!(evolve_dispersive(1.0, 1.2, &g, EvolveOptions::default()).is_err());
    }

    #[test]
    fn dispersive_bunching() {
        let g = TwoPhotonGrid::new(12.0, 32, 3.0, 300).unwrap();
        let a = evolve_dispersive(1.0, 0.3, &g, EvolveOptions::default()).unwrap();
        assert!(a.g2_zero() > 1.0);
        assert!(a.asymmetry() <= 1e-10);
    }

    #[test]
    fn snapshots_recorded() {
        let g = TwoPhotonGrid::new(6.0, 32, 1.0, 10).unwrap();
        let a = evolve_dissipative(1.0, 1.0, &g, EvolveOptions { snapshot_every: Some(5), ..Default::default() }).unwrap();
        let rs: Vec<f64> = a.snapshots.iter().map(|s| s.0).collect();
        assert_eq!(rs.len(), 3);
        assert_relative_eq!(rs[2], 1.0, max_relative = 1e-12);
        assert_eq!(a.centre.len(), 11);
    }
}
