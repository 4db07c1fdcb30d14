//! Classical Monte Carlo sampling of interacting three-level atoms.
//!
//! Each atom is a ladder g–e–r driven by a probe of half-Rabi frequency Ω_p
//! and the control Ω. Interactions enter only as a van der Waals shift of the
//! Rydberg level produced by the other atoms currently labelled `r`.
//!
//! The sampler is a sequential heat-bath: every visited atom redraws its label
//! from the steady-state populations of the single-atom problem conditioned on
//! its current shift. After thermalization the conditioned coherence ρ_eg and
//! Rydberg population are recorded at every update. The first `thermalization`
//! sweeps (20% by default) are discarded.

use crate::error::{Error, Result};
use crate::params::{blockade_radius, MediumParams};
use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type M9 = SMatrix<Complex64, 9, 9>;
type V9 = SVector<Complex64, 9>;

const G: usize = 0;
const E: usize = 1;
const R: usize = 2;

/// Steady state of a single ladder atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAtomState {
    pub pg: f64,
    pub pe: f64,
    pub pr: f64,
    /// ⟨e|ρ|g⟩; its imaginary part is positive for absorption.
    pub rho_eg: Complex64,
}

/// Precomputed Liouvillian of the ladder for repeated solves at varying
/// Rydberg shift.
///
/// H = −Δ|e⟩⟨e| + δ|r⟩⟨r| − Ω_p(|e⟩⟨g| + h.c.) + Ω(|r⟩⟨e| + h.c.), with
/// spontaneous decay e → g at rate 2γ so that the e–g coherence decays at γ.
#[derive(Debug, Clone)]
pub struct LadderSolver {
    base: M9,
}

fn idx(a: usize, b: usize) -> usize {
    3 * a + b
}

impl LadderSolver {
    pub fn new(omega_p: f64, p: &MediumParams) -> Result<Self> {
        p.validate()?;
        if !(omega_p >= 0.0 && omega_p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega_p",
                value: omega_p,
                requirement: "must be finite and >= 0",
            });
        }
        let mut h = [[0.0f64; 3]; 3];
        h[E][E] = -p.delta;
        h[E][G] = -omega_p;
        h[G][E] = -omega_p;
        h[R][E] = p.omega;
        h[E][R] = p.omega;
        let mut l = [[0.0f64; 3]; 3];
        l[G][E] = (2.0 * p.gamma).sqrt();
        let mut ldl = [[0.0f64; 3]; 3];
        ldl[E][E] = 2.0 * p.gamma;

        let i = Complex64::i();
        let mut m = M9::zeros();
        for a in 0..3 {
            for b in 0..3 {
                let row = idx(a, b);
                for c in 0..3 {
                    for d in 0..3 {
                        let col = idx(c, d);
                        let mut v = Complex64::new(0.0, 0.0);
                        if b == d {
                            v += -i * h[a][c] - 0.5 * ldl[a][c];
                        }
                        if a == c {
                            v += i * h[d][b] - 0.5 * ldl[d][b];
                        }
                        v += l[a][c] * l[b][d];
                        m[(row, col)] += v;
                    }
                }
            }
        }
        for a in 0..3 {
            m[(0, idx(a, a))] = Complex64::new(1.0, 0.0);
        }
        for c in 0..9 {
            if c != idx(0, 0) && c != idx(1, 1) && c != idx(2, 2) {
                m[(0, c)] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { base: m })
    }

    /// Steady state with the Rydberg level shifted by a finite `delta2`.
    pub fn solve(&self, delta2: f64) -> Result<SingleAtomState> {
        if delta2.is_nan() {
            return Err(Error::NonFinite("two-photon shift is NaN".into()));
        }
        if delta2.is_infinite() {
            return Err(Error::Domain("use two_level_steady_state for infinite shifts".into()));
        }
        let mut m = self.base;
        let i = Complex64::i();
        for a in 0..3 {
            for b in 0..3 {
                let row = idx(a, b);
                if row == 0 {
                    continue;
                }
                let mut v = Complex64::new(0.0, 0.0);
                if a == R {
                    v -= i * delta2;
                }
                if b == R {
                    v += i * delta2;
                }
                m[(row, row)] += v;
            }
        }
        let mut rhs = V9::zeros();
        rhs[0] = Complex64::new(1.0, 0.0);
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("ladder steady state".into()))?;
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular("ladder steady state produced non-finite values".into()));
        }
        Ok(SingleAtomState {
            pg: x[idx(G, G)].re,
            pe: x[idx(E, E)].re,
            pr: x[idx(R, R)].re,
            rho_eg: x[idx(E, G)],
        })
    }
}

/// Steady state of the driven ladder with Rydberg shift `delta2`.
pub fn single_atom_steady_state(omega_p: f64, p: &MediumParams, delta2: f64) -> Result<SingleAtomState> {
    if delta2.is_infinite() {
        return two_level_steady_state(omega_p, p);
    }
    LadderSolver::new(omega_p, p)?.solve(delta2)
}

/// Steady state of the probe transition alone (control decoupled), solved
/// directly in the two-level space.
pub fn two_level_steady_state(omega_p: f64, p: &MediumParams) -> Result<SingleAtomState> {
    p.validate()?;
    let i = Complex64::i();
    let h = [[0.0, -omega_p], [-omega_p, -p.delta]];
    let l = (2.0 * p.gamma).sqrt();
    let mut m = SMatrix::<Complex64, 4, 4>::zeros();
    let ix = |a: usize, b: usize| 2 * a + b;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut v = Complex64::new(0.0, 0.0);
                    if b == d {
                        v += -i * h[a][c] - if a == 1 && c == 1 { p.gamma } else { 0.0 };
                    }
                    if a == c {
                        v += i * h[d][b] - if d == 1 && b == 1 { p.gamma } else { 0.0 };
                    }
                    if a == 0 && c == 1 && b == 0 && d == 1 {
                        v += l * l;
                    }
                    m[(ix(a, b), ix(c, d))] += v;
                }
            }
        }
    }
    for c in 0..4 {
        m[(0, c)] = Complex64::new(0.0, 0.0);
    }
    m[(0, ix(0, 0))] = Complex64::new(1.0, 0.0);
    m[(0, ix(1, 1))] = Complex64::new(1.0, 0.0);
    let mut rhs = SVector::<Complex64, 4>::zeros();
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("two-level steady state".into()))?;
    Ok(SingleAtomState {
        pg: x[ix(0, 0)].re,
        pe: x[ix(1, 1)].re,
        pr: 0.0,
        rho_eg: x[ix(1, 0)],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    G,
    E,
    R,
}

/// Atom positions, labels and accumulated Rydberg shifts in a periodic cube.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    pub positions: Vec<[f64; 3]>,
    pub labels: Vec<Label>,
    /// δᵢ = Σ_{j∈r} C₆/|rᵢ−rⱼ|⁶ with minimum image and cutoff.
    pub shifts: Vec<f64>,
    pub box_len: f64,
}

impl EnsembleState {
    /// Uniformly random positions, all atoms in g.
    pub fn random(n: usize, box_len: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ensemble needs at least one atom".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = (0..n)
            .map(|_| {
                [
                    rng.random::<f64>() * box_len,
                    rng.random::<f64>() * box_len,
                    rng.random::<f64>() * box_len,
                ]
            })
            .collect();
        Self::from_positions(positions, box_len)
    }

    pub fn from_positions(positions: Vec<[f64; 3]>, box_len: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Domain("ensemble needs at least one atom".into()));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "box_len",
                value: box_len,
                requirement: "must be finite and > 0",
            });
        }
        for p in &positions {
            if p.iter().any(|&x| !(0.0..box_len).contains(&x)) {
                return Err(Error::Domain(format!("atom at {p:?} lies outside the box")));
            }
        }
        let n = positions.len();
        Ok(Self {
            positions,
            labels: vec![Label::G; n],
            shifts: vec![0.0; n],
            box_len,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let l = self.box_len;
        let mut s = 0.0;
        for k in 0..3 {
            let mut d = self.positions[i][k] - self.positions[j][k];
            d -= l * (d / l).round();
            s += d * d;
        }
        s.sqrt()
    }

    /// Shifts recomputed from scratch for the current labels.
    pub fn compute_shifts(&self, c6: f64, cutoff: f64) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        if c6 == 0.0 {
            return out;
        }
        for j in 0..n {
            if self.labels[j] != Label::R {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                if i == j {
                    continue;
                }
                let r = self.distance(i, j);
                if r < cutoff {
                    *o += c6 / r.powi(6);
                }
            }
        }
        out
    }

    /// Largest relative deviation between stored and recomputed shifts. The
    /// scale of each comparison is floored at the weakest pair shift inside
    /// the cutoff so that vanishing shifts compare against round-off.
    pub fn shift_error(&self, c6: f64, cutoff: f64) -> f64 {
        let exact = self.compute_shifts(c6, cutoff);
        let floor = (c6 / cutoff.powi(6)).abs().max(f64::MIN_POSITIVE);
        exact
            .iter()
            .zip(&self.shifts)
            .map(|(a, b)| (a - b).abs() / a.abs().max(floor))
            .fold(0.0, f64::max)
    }

    pub fn rydberg_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Label::R).count()
    }
}

/// Sweep schedule of a single chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSchedule {
    pub sweeps: usize,
    pub thermalization: usize,
    /// Number of batches for batch-mean error bars (even, ≥ 4).
    pub batches: usize,
}

impl SweepSchedule {
    /// `sweeps` total with the first 20% discarded and 20 batches.
    pub fn new(sweeps: usize) -> Self {
        Self {
            sweeps,
            thermalization: sweeps / 5,
            batches: 20,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps == 0 || self.thermalization >= self.sweeps {
            return Err(Error::Domain(format!(
                "schedule needs sweeps ≥ 1 beyond thermalization (sweeps {}, thermalization {})",
                self.sweeps, self.thermalization
            )));
        }
        if self.batches < 4 || self.batches % 2 != 0 {
            return Err(Error::Domain("batches must be even and ≥ 4".into()));
        }
        if self.sweeps - self.thermalization < self.batches {
            return Err(Error::Domain("fewer measurement sweeps than batches".into()));
        }
        Ok(())
    }
}

/// Raw per-chain statistics; merged by [`merge_chains`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    pub n_atoms: usize,
    pub volume: f64,
    pub box_len: f64,
    pub box_flagged: bool,
    pub p0: f64,
    pub im_two_level: f64,
    pub batch_pr: Vec<f64>,
    pub batch_im: Vec<f64>,
    pub batch_free_fraction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub n_atoms: usize,
    /// Atomic density actually sampled [μm⁻³].
    pub density: f64,
    pub chi_ratio: f64,
    pub chi_ratio_stderr: f64,
    pub f_bl: f64,
    pub f_bl_stderr: f64,
    pub rydberg_density: f64,
    pub rydberg_density_stderr: f64,
    /// Rydberg label fraction of the paired interaction-free run.
    pub free_fraction: f64,
    pub free_fraction_stderr: f64,
    /// Interaction-free single-atom Rydberg population Ω_p²/(Ω_p²+Ω²).
    pub p0: f64,
    /// False when the two halves of the measurement disagree by more than 3σ.
    pub converged: bool,
    /// True when any chain used a box shorter than 8 blockade radii.
    pub box_flagged: bool,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Splitmix64 stream derivation: the seed for stream `k` of base seed `s`
/// is the splitmix64 output of `s + (k+1)·0x9E3779B97F4A7C15`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn interaction_cutoff(p: &MediumParams, box_len: f64) -> Result<(f64, bool)> {
    if p.c6 == 0.0 {
        return Ok((0.0, false));
    }
    let z_b = blockade_radius(p)?;
    Ok(((4.0 * z_b).min(0.5 * box_len), box_len < 8.0 * z_b))
}

fn draw(rng: &mut ChaCha8Rng, s: &SingleAtomState) -> Label {
    let u: f64 = rng.random();
    if u < s.pg {
        Label::G
    } else if u < s.pg + s.pe {
        Label::E
    } else {
        Label::R
    }
}

fn batch(xs: &[f64], batches: usize) -> Vec<f64> {
    let per = xs.len() / batches;
    (0..batches)
        .map(|b| xs[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
        .collect()
}

/// Runs one chain on `state` (modified in place) and returns raw statistics.
pub fn run_chain(
    state: &mut EnsembleState,
    omega_p: f64,
    p: &MediumParams,
    schedule: SweepSchedule,
    seed: u64,
) -> Result<ChainStats> {
    schedule.validate()?;
    let solver = LadderSolver::new(omega_p, p)?;
    let free = solver.solve(0.0)?;
    let two_level = two_level_steady_state(omega_p, p)?;
    let n = state.len();
    let (cutoff, box_flagged) = interaction_cutoff(p, state.box_len)?;

    // neighbour lists with pair shifts
    let mut nbrs: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    if p.c6 != 0.0 {
        for i in 0..n {
            for j in (i + 1)..n {
                let r = state.distance(i, j);
                if r < cutoff {
                    let v = p.c6 / r.powi(6);
                    nbrs[i].push((j as u32, v));
                    nbrs[j].push((i as u32, v));
                }
            }
        }
    }
    state.shifts = state.compute_shifts(p.c6, cutoff);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measured = schedule.sweeps - schedule.thermalization;
    let mut sweep_pr = Vec::with_capacity(measured);
    let mut sweep_im = Vec::with_capacity(measured);
    for sweep in 0..schedule.sweeps {
        let measuring = sweep >= schedule.thermalization;
        let (mut acc_pr, mut acc_im) = (0.0, 0.0);
        for i in 0..n {
            let s = if p.c6 == 0.0 { free } else { solver.solve(state.shifts[i])? };
            if measuring {
                acc_pr += s.pr;
                acc_im += s.rho_eg.im;
            }
            let new = draw(&mut rng, &s);
            let was_r = state.labels[i] == Label::R;
            let is_r = new == Label::R;
            state.labels[i] = new;
            if was_r != is_r {
                let sign = if is_r { 1.0 } else { -1.0 };
                for &(j, v) in &nbrs[i] {
                    state.shifts[j as usize] += sign * v;
                }
            }
        }
        if measuring {
            sweep_pr.push(acc_pr / n as f64);
            sweep_im.push(acc_im / n as f64);
        }
    }

    // paired interaction-free run, same seed and positions
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![Label::G; n];
    let mut sweep_free = Vec::with_capacity(measured);
    for sweep in 0..schedule.sweeps {
        for l in labels.iter_mut() {
            *l = draw(&mut rng, &free);
        }
        if sweep >= schedule.thermalization {
            let count = labels.iter().filter(|&&l| l == Label::R).count();
            sweep_free.push(count as f64 / n as f64);
        }
    }

    let volume = state.box_len.powi(3);
    Ok(ChainStats {
        n_atoms: n,
        volume,
        box_len: state.box_len,
        box_flagged,
        p0: free.pr,
        im_two_level: two_level.rho_eg.im,
        batch_pr: batch(&sweep_pr, schedule.batches),
        batch_im: batch(&sweep_im, schedule.batches),
        batch_free_fraction: batch(&sweep_free, schedule.batches),
    })
}

/// Pure, order-preserving reduction of chain statistics into a result.
pub fn merge_chains(chains: &[ChainStats]) -> Result<McResult> {
    let first = chains
        .first()
        .ok_or_else(|| Error::Domain("no chains to merge".into()))?;
    let p0 = first.p0;
    let im2 = first.im_two_level;
    let pr: Vec<f64> = chains.iter().flat_map(|c| c.batch_pr.iter().copied()).collect();
    let im: Vec<f64> = chains.iter().flat_map(|c| c.batch_im.iter().copied()).collect();
    let fr: Vec<f64> = chains
        .iter()
        .flat_map(|c| c.batch_free_fraction.iter().copied())
        .collect();
    let (pr_m, pr_se) = mean_stderr(&pr);
    let (im_m, im_se) = mean_stderr(&im);
    let (fr_m, fr_se) = mean_stderr(&fr);

    // split-chain diagnostic: first vs second half of every chain
    let halves = |xs: &dyn Fn(&ChainStats) -> &Vec<f64>, second: bool| -> Vec<f64> {
        chains
            .iter()
            .flat_map(|c| {
                let v = xs(c);
                let h = v.len() / 2;
                if second { v[h..].to_vec() } else { v[..h].to_vec() }
            })
            .collect()
    };
    let (a_m, a_se) = mean_stderr(&halves(&|c| &c.batch_im, false));
    let (b_m, b_se) = mean_stderr(&halves(&|c| &c.batch_im, true));
    let (c_m, c_se) = mean_stderr(&halves(&|c| &c.batch_pr, false));
    let (d_m, d_se) = mean_stderr(&halves(&|c| &c.batch_pr, true));
    let split_ok = |x: f64, y: f64, sx: f64, sy: f64| (x - y).abs() <= 3.0 * (sx * sx + sy * sy).sqrt();
    let converged = split_ok(a_m, b_m, a_se, b_se) && split_ok(c_m, d_m, c_se, d_se);

    let n_atoms: usize = chains.iter().map(|c| c.n_atoms).sum();
    let volume: f64 = chains.iter().map(|c| c.volume).sum();
    let density = n_atoms as f64 / volume;
    let (chi_ratio, chi_se) = if im2 > 0.0 { (im_m / im2, im_se / im2) } else { (0.0, 0.0) };
    let (f_bl, f_se) = if pr_m > 0.0 {
        (p0 / pr_m - 1.0, p0 * pr_se / (pr_m * pr_m))
    } else {
        (0.0, 0.0)
    };
    Ok(McResult {
        n_atoms: first.n_atoms,
        density,
        chi_ratio,
        chi_ratio_stderr: chi_se,
        f_bl,
        f_bl_stderr: f_se,
        rydberg_density: density * pr_m,
        rydberg_density_stderr: density * pr_se,
        free_fraction: fr_m,
        free_fraction_stderr: fr_se,
        p0,
        converged,
        box_flagged: chains.iter().any(|c| c.box_flagged),
    })
}

/// Single-chain sampling of a given ensemble.
pub fn sample_steady_state(
    state: &mut EnsembleState,
    omega_p: f64,
    p: &MediumParams,
    schedule: SweepSchedule,
    seed: u64,
) -> Result<McResult> {
    let stats = run_chain(state, omega_p, p, schedule, seed)?;
    merge_chains(&[stats])
}

/// Ensemble size and schedule for density sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_atoms: usize,
    pub chains: usize,
    pub schedule: SweepSchedule,
}

/// Runs `cfg.chains` independent chains at atomic density `density` with box
/// side (N/ρ)^{1/3}. Chains run in parallel and are merged in chain order.
pub fn sample_density(
    density: f64,
    omega_p: f64,
    p: &MediumParams,
    cfg: &McConfig,
    seed: u64,
) -> Result<McResult> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "density",
            value: density,
            requirement: "must be finite and > 0",
        });
    }
    if cfg.chains == 0 {
        return Err(Error::Domain("at least one chain is required".into()));
    }
    let params = MediumParams { rho: density, ..*p };
    let box_len = (cfg.n_atoms as f64 / density).cbrt();
    let stats: Vec<ChainStats> = (0..cfg.chains)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k as u64);
            let mut state = EnsembleState::random(cfg.n_atoms, box_len, s)?;
            run_chain(&mut state, omega_p, &params, cfg.schedule, derive_seed(s, 0))
        })
        .collect::<Result<_>>()?;
    merge_chains(&stats)
}

/// Blockade scaling curve over a list of densities.
pub fn scaling_curve(
    densities: &[f64],
    omega_p: f64,
    p: &MediumParams,
    cfg: &McConfig,
    seed: u64,
) -> Result<Vec<McResult>> {
    if densities.is_empty() {
        return Err(Error::Domain("density list is empty".into()));
    }
    densities
        .par_iter()
        .enumerate()
        .map(|(k, &d)| sample_density(d, omega_p, p, cfg, derive_seed(seed, 1_000_003 + k as u64)))
        .collect()
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
    fn dark_state_at_equal_drives() {
        let p = unit();
        let s = single_atom_steady_state(1.0, &p, 0.0).unwrap();
        assert_relative_eq!(s.pg, 0.5, epsilon = 1e-12);
        assert!(s.pe.abs() < 1e-12);
        assert_relative_eq!(s.pr, 0.5, epsilon = 1e-12);
        assert!(s.rho_eg.norm() < 1e-12);
    }

    #[test]
    fn undriven_atom() {
        let s = single_atom_steady_state(0.0, &unit(), 0.3).unwrap();
        assert_relative_eq!(s.pg, 1.0, epsilon = 1e-14);
        assert!(s.pe.abs() < 1e-14 && s.pr.abs() < 1e-14 && s.rho_eg.norm() < 1e-14);
    }

    #[test]
    fn large_shift_approaches_two_level() {
        let p = MediumParams { delta: 0.4, ..unit() };
        let tl = two_level_steady_state(0.3, &p).unwrap();
        let s = single_atom_steady_state(0.3, &p, 1e7).unwrap();
        assert!(s.pr < 1e-10);
        assert_relative_eq!(s.rho_eg.re, tl.rho_eg.re, max_relative = 1e-5);
        assert_relative_eq!(s.rho_eg.im, tl.rho_eg.im, max_relative = 1e-5);
        let inf = single_atom_steady_state(0.3, &p, f64::INFINITY).unwrap();
        assert_eq!(inf, tl);
        // weak-drive two-level coherence iΩ_p/(γ − iΔ)
        let w = two_level_steady_state(1e-4, &p).unwrap();
        let lin = Complex64::i() * 1e-4 / Complex64::new(p.gamma, -p.delta);
        assert_relative_eq!(w.rho_eg.re, lin.re, max_relative = 1e-6);
        assert_relative_eq!(w.rho_eg.im, lin.im, max_relative = 1e-6);
    }

    #[test]
    fn weak_probe_coherence_matches_susceptibility() {
        // ρ_eg/Ω_p is proportional to χ(0, δ) for a weak probe
        let p = MediumParams { delta: 0.7, omega: 1.3, gamma: 0.9, ..unit() };
        let op = 1e-5;
        for d in [-3.0, -0.5, 0.2, 1.0, 4.0] {
            let s = single_atom_steady_state(op, &p, d).unwrap();
            let chi = crate::linear::chi_eit(0.0, &p, d) / (p.g2rho() / p.c);
            let ratio = s.rho_eg / op / chi;
            assert_relative_eq!(ratio.re, 1.0, max_relative = 1e-6);
            assert!(ratio.im.abs() < 1e-6);
        }
    }

    #[test]
    fn resonant_identity() {
        // on one-photon resonance Im ρ_eg(δ)/Im ρ_eg^{2l} = 1 − Pr(δ)/Pr(0)
        let p = unit();
        let op = 0.6;
        let solver = LadderSolver::new(op, &p).unwrap();
        let p0 = solver.solve(0.0).unwrap().pr;
        let tl = two_level_steady_state(op, &p).unwrap().rho_eg.im;
        for d in [0.1, 0.5, 2.0, 10.0, -3.0] {
            let s = solver.solve(d).unwrap();
            assert_relative_eq!(s.rho_eg.im / tl, 1.0 - s.pr / p0, epsilon = 1e-12);
        }
    }

    #[test]
    fn seeds_differ() {
        let a: Vec<u64> = (0..100).map(|k| derive_seed(7, k)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn no_interactions_gives_zero() {
        let p = MediumParams { c6: 0.0, ..unit() };
        let cfg = McConfig { n_atoms: 50, chains: 2, schedule: SweepSchedule::new(100) };
        let r = scaling_curve(&[0.5], 0.5, &p, &cfg, 3).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].chi_ratio.abs() < 1e-12);
        assert!(r[0].f_bl.abs() < 1e-12);
        assert!(r[0].converged);
    }

    #[test]
    fn shifts_stay_consistent() {
        let p = unit();
        let mut st = EnsembleState::random(200, 6.0, 1).unwrap();
        run_chain(&mut st, 0.8, &p, SweepSchedule::new(40), 9).unwrap();
        assert!(st.rydberg_count() > 0);
        assert!(st.shift_error(p.c6, 3.0) < 1e-10);
    }

    #[test]
    fn deterministic() {
        let p = unit();
        let cfg = McConfig { n_atoms: 100, chains: 3, schedule: SweepSchedule::new(60) };
        let a = sample_density(0.5, 0.5, &p, &cfg, 11).unwrap();
        let b = sample_density(0.5, 0.5, &p, &cfg, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_density(0.5, 0.5, &p, &cfg, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dense_limit_saturates() {
        let p = unit();
        let cfg = McConfig { n_atoms: 300, chains: 1, schedule: SweepSchedule::new(100) };
        let r = sample_density(200.0, 0.5, &p, &cfg, 5).unwrap();
        assert!(r.chi_ratio > 0.9, "{r:?}");
        assert!(r.box_flagged);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(EnsembleState::random(0, 1.0, 0).is_err());
        assert!(EnsembleState::from_positions(vec![[2.0, 0.0, 0.0]], 1.0).is_err());
        let bad = SweepSchedule { sweeps: 10, thermalization: 10, batches: 4 };
        let mut st = EnsembleState::random(3, 1.0, 0).unwrap();
        assert!(run_chain(&mut st, 0.5, &unit(), bad, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn steady_state_is_physical(op in 0.0f64..3.0, d2 in -20.0f64..20.0,
                                    delta in -5.0f64..5.0, omega in 0.1f64..3.0) {
            let p = MediumParams { delta, omega, ..unit() };
            let s = single_atom_steady_state(op, &p, d2).unwrap();
            prop_assert!((s.pg + s.pe + s.pr - 1.0).abs() < 1e-10);
            prop_assert!(s.pg >= -1e-12 && s.pe >= -1e-12 && s.pr >= -1e-12);
            prop_assert!(s.rho_eg.im >= -1e-12);
            prop_assert!(s.rho_eg.norm_sqr() <= s.pg * s.pe + 1e-10);
        }
    }
}
