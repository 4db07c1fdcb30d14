//! Steady states of small Lindblad problems from the null space of the full
//! Liouvillian, found by SVD.

use nalgebra::DMatrix;
use num_complex::Complex64;

type CM = DMatrix<Complex64>;

fn kron(a: &CM, b: &CM) -> CM {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CM::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Density matrix ρ with 𝓛ρ = 0 and Tr ρ = 1, for Hamiltonian `h` and jump
/// operators `jumps` (row-major vectorization, vec(AρB) = (A ⊗ Bᵀ)vec ρ).
pub fn steady_state(h: &CM, jumps: &[CM]) -> CM {
    let n = h.nrows();
    let id = CM::identity(n, n);
    let i = Complex64::i();
    let half = Complex64::new(0.5, 0.0);
    let mut l = (kron(h, &id) - kron(&id, &h.transpose())) * (-i);
    for c in jumps {
        let cdc = c.adjoint() * c;
        l += kron(c, &c.conjugate()) - kron(&cdc, &id) * half - kron(&id, &cdc.transpose()) * half;
    }
    let svd = l.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let k = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    // null vector is the conjugate of the matching row of V^H
    let mut rho = CM::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            rho[(a, b)] = v_t[(k, a * n + b)].conj();
        }
    }
    let tr: Complex64 = (0..n).map(|a| rho[(a, a)]).sum();
    rho / tr
}

fn real(m: &[[f64; 3]; 3]) -> CM {
    CM::from_fn(3, 3, |a, b| Complex64::new(m[a][b], 0.0))
}

/// (ρ_gg, ρ_ee, ρ_rr, ρ_eg) for the driven ladder g–e–r with probe Ω_p,
/// control Ω, detuning Δ, Rydberg shift δ and e → g decay at rate 2γ.
pub fn ladder(omega_p: f64, omega: f64, delta: f64, gamma: f64, shift: f64) -> (f64, f64, f64, Complex64) {
    let h = real(&[[0.0, -omega_p, 0.0], [-omega_p, -delta, omega], [0.0, omega, shift]]);
    let mut c = [[0.0; 3]; 3];
    c[0][1] = (2.0 * gamma).sqrt();
    let rho = steady_state(&h, &[real(&c)]);
    (rho[(0, 0)].re, rho[(1, 1)].re, rho[(2, 2)].re, rho[(1, 0)])
}

/// Probe transition alone: (ρ_gg, ρ_ee, ρ_eg).
pub fn two_level(omega_p: f64, delta: f64, gamma: f64) -> (f64, f64, Complex64) {
    let h = CM::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(-omega_p, 0.0),
            Complex64::new(-omega_p, 0.0),
            Complex64::new(-delta, 0.0),
        ],
    );
    let mut c = CM::zeros(2, 2);
    c[(0, 1)] = Complex64::new((2.0 * gamma).sqrt(), 0.0);
    let rho = steady_state(&h, &[c]);
    (rho[(0, 0)].re, rho[(1, 1)].re, rho[(1, 0)])
}
