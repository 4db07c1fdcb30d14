//! Exact statistics of the sequential heat-bath sampler for three atoms by
//! enumerating all 27 label configurations.

use super::lindblad;
use nalgebra::DMatrix;

/// Expected Rao–Blackwellized estimators of the sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSampler {
    /// Mean conditional Rydberg population per update.
    pub pr: f64,
    /// Mean conditional Im ρ_eg per update.
    pub im: f64,
    pub p0: f64,
    pub im_two_level: f64,
    pub chi_ratio: f64,
    pub f_bl: f64,
}

/// Medium for the enumeration: probe Ω_p, control Ω, detuning Δ, γ and the
/// pair shifts `v[i][j]` felt by atom i when atom j is in r.
pub fn three_atom_sampler(omega_p: f64, omega: f64, delta: f64, gamma: f64, v: [[f64; 3]; 3]) -> ExactSampler {
    const N: usize = 27;
    let label = |s: usize, i: usize| (s / 3usize.pow(i as u32)) % 3;
    let with = |s: usize, i: usize, l: usize| s - label(s, i) * 3usize.pow(i as u32) + l * 3usize.pow(i as u32);
    // conditional single-atom states per (atom, configuration)
    let mut cond = vec![[(0.0, 0.0, 0.0, 0.0); N]; 3];
    for (i, row) in cond.iter_mut().enumerate() {
        for (s, c) in row.iter_mut().enumerate() {
            let shift: f64 = (0..3).filter(|&j| j != i && label(s, j) == 2).map(|j| v[i][j]).sum();
            let (pg, pe, pr, eg) = lindblad::ladder(omega_p, omega, delta, gamma, shift);
            *c = (pg, pe, pr, eg.im);
        }
    }
    // single-site update matrices, rows = from
    let mut p = Vec::with_capacity(3);
    for (i, row) in cond.iter().enumerate() {
        let mut m = DMatrix::<f64>::zeros(N, N);
        for s in 0..N {
            let (pg, pe, pr, _) = row[s];
            m[(s, with(s, i, 0))] += pg;
            m[(s, with(s, i, 1))] += pe;
            m[(s, with(s, i, 2))] += pr;
        }
        p.push(m);
    }
    let sweep = &p[0] * &p[1] * &p[2];
    // stationary row vector: null vector of (Tᵀ − I)
    let a = sweep.transpose() - DMatrix::<f64>::identity(N, N);
    let svd = a.svd(false, true);
    let vt = svd.v_t.unwrap();
    let k = (0..N)
        .min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
        .unwrap();
    let mut pi = DMatrix::<f64>::from_fn(1, N, |_, s| vt[(k, s)]);
    let total: f64 = pi.iter().sum();
    pi /= total;

    let mut mu = pi.clone();
    let (mut pr, mut im) = (0.0, 0.0);
    for (i, row) in cond.iter().enumerate() {
        for s in 0..N {
            pr += mu[(0, s)] * row[s].2;
            im += mu[(0, s)] * row[s].3;
        }
        mu = &mu * &p[i];
    }
    pr /= 3.0;
    im /= 3.0;
    let (_, _, p0, _) = lindblad::ladder(omega_p, omega, delta, gamma, 0.0);
    let (_, _, eg2) = lindblad::two_level(omega_p, delta, gamma);
    ExactSampler {
        pr,
        im,
        p0,
        im_two_level: eg2.im,
        chi_ratio: im / eg2.im,
        f_bl: p0 / pr - 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_atoms() {
        let e = three_atom_sampler(0.5, 1.0, 0.0, 1.0, [[0.0; 3]; 3]);
        assert!((e.pr - 0.2).abs() < 1e-12);
        assert!(e.f_bl.abs() < 1e-10);
        assert!(e.chi_ratio.abs() < 1e-10);
    }
}
