use super::evolve::{dispersive_potential, TwoPhotonGrid};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenstates of H = −a(r̃)∂² − W(r̃) localized inside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSet {
    /// Interior grid points.
    pub r: Vec<f64>,
    /// Bound energies, ascending.
    pub energies: Vec<f64>,
    /// Eigenfunctions normalized to ∫|ψ|² dr̃ = 1.
    pub states: Vec<Vec<f64>>,
    /// Participation ratio (∫|ψ|²)²/∫|ψ|⁴ in units of r̃.
    pub participation: Vec<f64>,
    /// |ψ| at the outermost interior points relative to its maximum.
    pub edge_ratio: Vec<f64>,
    /// Continuum threshold −W(r̃max).
    pub continuum_edge: f64,
    /// Lowest eigenvalues of the full discrete spectrum, ascending.
    pub spectrum: Vec<f64>,
}

/// Classifies eigenstates of the dispersive relative-coordinate operator.
///
/// The generalized symmetric problem is reduced with D_a^{1/2} so the
/// discretized operator stays exactly symmetric. A state counts as bound if
/// its energy lies below the continuum edge and its participation ratio is
/// below `pr_fraction` of the box length 2r̃max.
pub fn find_bound_states(
    od_b_bar: f64,
    omega_over_delta: f64,
    grid: &TwoPhotonGrid,
    pr_fraction: f64,
) -> Result<BoundStateSet> {
    if !(od_b_bar > 0.0 && od_b_bar.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "od_b_bar",
            value: od_b_bar,
            requirement: "must be finite and > 0",
        });
    }
    if !(omega_over_delta.abs() < 1.0) {
        return Err(Error::InvalidParameter {
            name: "omega_over_delta",
            value: omega_over_delta,
            requirement: "|Ω/Δ| < 1 keeps the relative mass positive",
        });
    }
    if !(pr_fraction > 0.0 && pr_fraction <= 1.0) {
        return Err(Error::Domain(format!("participation fraction {pr_fraction} not in (0, 1]")));
    }
    let m = grid.n - 2;
    let dr = grid.dr();
    let dr2 = dr * dr;
    let w2 = omega_over_delta * omega_over_delta;
    let r: Vec<f64> = (1..=m).map(|j| grid.r(j)).collect();
    let a: Vec<f64> = r
        .iter()
        .map(|&x| (2.0 / od_b_bar) * (1.0 - dispersive_potential(x) * w2))
        .collect();
    let w: Vec<f64> = r.iter().map(|&x| 2.0 * od_b_bar * dispersive_potential(x)).collect();
    let sa: Vec<f64> = a.iter().map(|x| x.sqrt()).collect();
    // S = D^{1/2}(−L)D^{1/2} − W with L the Dirichlet second difference
    let mut s = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        s[(i, i)] = 2.0 * a[i] / dr2 - w[i];
        if i + 1 < m {
            let v = -sa[i] * sa[i + 1] / dr2;
            s[(i, i + 1)] = v;
            s[(i + 1, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let edge = -2.0 * od_b_bar * dispersive_potential(grid.r_max);
    let span = 2.0 * grid.r_max;
    let mut out = BoundStateSet {
        r,
        energies: Vec::new(),
        states: Vec::new(),
        participation: Vec::new(),
        edge_ratio: Vec::new(),
        continuum_edge: edge,
        spectrum: order.iter().take(16).map(|&i| eig.eigenvalues[i]).collect(),
    };
    for &k in &order {
        let e = eig.eigenvalues[k];
        if e >= edge {
            break;
        }
        let mut psi: Vec<f64> = (0..m).map(|i| sa[i] * eig.eigenvectors[(i, k)]).collect();
        let norm = (psi.iter().map(|x| x * x).sum::<f64>() * dr).sqrt();
        let sign = if psi[m / 2] < 0.0 { -1.0 } else { 1.0 };
        psi.iter_mut().for_each(|x| *x *= sign / norm);
        let p4 = psi.iter().map(|x| x.powi(4)).sum::<f64>() * dr;
        let pr = 1.0 / p4;
        if pr < pr_fraction * span {
            let peak = psi.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            out.edge_ratio.push(psi[0].abs().max(psi[m - 1].abs()) / peak);
            out.energies.push(e);
            out.states.push(psi);
            out.participation.push(pr);
        }
    }
    Ok(out)
}
