use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use std::f64::consts::PI;

/// Retrieved mode h(z) of the stored excitation, normalized to ∫h² dz = 1.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// h² is a normal density with standard deviation `width`.
    Gaussian { width: f64 },
    /// h = sech(t/width)/√(2·width).
    Sech { width: f64 },
    /// Piecewise-linear amplitude through (times, values); zero outside.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        match self {
            PulseShape::Gaussian { width } | PulseShape::Sech { width } => {
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "width",
                        value: *width,
                        requirement: "must be finite and > 0",
                    });
                }
            }
            PulseShape::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::Domain("tabulated pulse needs ≥ 2 (time, value) pairs".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Domain("tabulated pulse times must increase strictly".into()));
                }
                if values.iter().chain(times).any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("tabulated pulse".into()));
                }
            }
        }
        Ok(())
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        match self {
            PulseShape::Gaussian { width } => {
                (2.0 * PI * width * width).powf(-0.25) * (-t * t / (4.0 * width * width)).exp()
            }
            PulseShape::Sech { width } => 1.0 / ((t / width).cosh() * (2.0 * width).sqrt()),
            PulseShape::Tabulated { times, values } => {
                let n = times.len();
                if t < times[0] || t > times[n - 1] {
                    return 0.0;
                }
                let k = times.partition_point(|&x| x <= t).clamp(1, n - 1);
                let s = (t - times[k - 1]) / (times[k] - times[k - 1]);
                values[k - 1] + s * (values[k] - values[k - 1])
            }
        }
    }

    /// Integration breakpoints covering the support.
    fn breakpoints(&self, panels: usize) -> Vec<f64> {
        let uniform = |lo: f64, hi: f64| -> Vec<f64> {
            (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect()
        };
        match self {
            PulseShape::Gaussian { width } => uniform(-12.0 * width, 12.0 * width),
            PulseShape::Sech { width } => uniform(-25.0 * width, 25.0 * width),
            PulseShape::Tabulated { times, .. } => {
                let per = (panels / (times.len() - 1)).max(1);
                let mut out = vec![times[0]];
                for w in times.windows(2) {
                    for i in 1..=per {
                        out.push(w[0] + (w[1] - w[0]) * i as f64 / per as f64);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceOptions {
    /// Size of the output grid for ρ₁.
    pub points: usize,
    /// Quadrature panels across the pulse support.
    pub panels: usize,
}

impl Default for SourceOptions {
    fn default() -> Self {
        Self {
            points: 201,
            panels: 4000,
        }
    }
}

/// Single-photon state retrieved after storing n photons in one blockade
/// volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceResult {
    pub photons: u64,
    /// Output grid along the pulse.
    pub z: Vec<f64>,
    /// ρ₁(z, z') on the output grid, row-major.
    pub rho1: Vec<f64>,
    /// ρ₁(z, z) on the output grid.
    pub intensity: Vec<f64>,
    /// ∫ρ₁(z, z) dz.
    pub trace: f64,
    /// ∫∫ρ₁² dz dz'.
    pub purity: f64,
    pub peak_position: f64,
    pub mean_position: f64,
}

struct Tables {
    x: Vec<f64>,
    w: Vec<f64>,
    h: Vec<f64>,
    /// ∫_{−∞}^{x} h²
    cum: Vec<f64>,
    /// ∫_{x}^{∞} h²
    tail: Vec<f64>,
    breaks: Vec<f64>,
    panel_cum: Vec<f64>,
}

fn tables(pulse: &PulseShape, panels: usize, gl: &GaussLegendre) -> Tables {
    let breaks = pulse.breakpoints(panels);
    let h2 = |t: f64| pulse.amplitude(t).powi(2);
    let np = breaks.len() - 1;
    let mut panel_int = Vec::with_capacity(np);
    for k in 0..np {
        panel_int.push(gl.integrate(breaks[k], breaks[k + 1], h2));
    }
    let mut panel_cum = vec![0.0; np + 1];
    for k in 0..np {
        panel_cum[k + 1] = panel_cum[k] + panel_int[k];
    }
    let mut panel_tail = vec![0.0; np + 1];
    for k in (0..np).rev() {
        panel_tail[k] = panel_tail[k + 1] + panel_int[k];
    }
    let mut t = Tables {
        x: Vec::new(),
        w: Vec::new(),
        h: Vec::new(),
        cum: Vec::new(),
        tail: Vec::new(),
        breaks: breaks.clone(),
        panel_cum,
    };
    for k in 0..np {
        let (a, b) = (breaks[k], breaks[k + 1]);
        for (node, weight) in gl.nodes_on(a, b) {
            t.x.push(node);
            t.w.push(weight);
            t.h.push(pulse.amplitude(node));
            t.cum.push(t.panel_cum[k] + gl.integrate(a, node, h2));
            t.tail.push(panel_tail[k + 1] + gl.integrate(node, b, h2));
        }
    }
    t
}

impl Tables {
    fn cumulative(&self, pulse: &PulseShape, gl: &GaussLegendre, z: f64) -> f64 {
        let n = self.breaks.len();
        if z <= self.breaks[0] {
            return 0.0;
        }
        if z >= self.breaks[n - 1] {
            return self.panel_cum[n - 1];
        }
        let k = self.breaks.partition_point(|&b| b <= z) - 1;
        self.panel_cum[k] + gl.integrate(self.breaks[k], z, |t| pulse.amplitude(t).powi(2))
    }
}

/// ρ₁(z, z') = n h(z)h(z') C(min(z, z'))^{n−1} with C(z) = ∫_{−∞}^{z} h².
///
/// `z` is the position along the outgoing pulse, with the leading edge at
/// large z. Only the leading photon escapes the blockade, so the state
/// narrows and advances as n grows. Purity is n/(2n − 1).
pub fn source_density_matrix(pulse: &PulseShape, photons: u64, opts: SourceOptions) -> Result<SourceResult> {
    pulse.validate()?;
    if photons == 0 {
        return Err(Error::InvalidParameter {
            name: "photons",
            value: 0.0,
            requirement: "must be ≥ 1",
        });
    }
    if opts.points < 2 || opts.panels == 0 {
        return Err(Error::Grid("source grid needs ≥ 2 output points and ≥ 1 panel".into()));
    }
    let gl = GaussLegendre::new(10);
    let tb = tables(pulse, opts.panels, &gl);
    let norm = *tb.panel_cum.last().unwrap();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Unnormalized(norm));
    }
    let n = photons as f64;
    let mut trace = 0.0;
    let mut purity = 0.0;
    let mut mean = 0.0;
    for i in 0..tb.x.len() {
        let h2 = tb.h[i] * tb.h[i];
        let cn1 = tb.cum[i].powf(n - 1.0);
        let diag = n * h2 * cn1;
        trace += tb.w[i] * diag;
        mean += tb.w[i] * diag * tb.x[i];
        // pairs with z' > z contribute ∫_z^∞ h² = tail
        purity += tb.w[i] * 2.0 * n * n * h2 * cn1 * cn1 * tb.tail[i];
    }
    mean /= trace;

    let (lo, hi) = (tb.breaks[0], *tb.breaks.last().unwrap());
    let z: Vec<f64> = (0..opts.points)
        .map(|i| lo + (hi - lo) * i as f64 / (opts.points - 1) as f64)
        .collect();
    let h: Vec<f64> = z.iter().map(|&x| pulse.amplitude(x)).collect();
    let c: Vec<f64> = z.iter().map(|&x| tb.cumulative(pulse, &gl, x)).collect();
    let m = opts.points;
    let mut rho1 = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            rho1[i * m + j] = n * h[i] * h[j] * c[i.min(j)].powf(n - 1.0);
        }
    }
    let intensity: Vec<f64> = (0..m).map(|i| rho1[i * m + i]).collect();

    // peak from a dense scan refined by a parabola through the maximum
    let scan = 8001;
    let mut best = (0usize, f64::MIN);
    let mut vals = Vec::with_capacity(scan);
    let step = (hi - lo) / (scan - 1) as f64;
    let mut cum = 0.0;
    let mut prev = lo;
    for i in 0..scan {
        let x = lo + step * i as f64;
        cum += gl.integrate(prev, x, |s| pulse.amplitude(s).powi(2));
        prev = x;
        let v = n * pulse.amplitude(x).powi(2) * cum.powf(n - 1.0);
        if v > best.1 {
            best = (i, v);
        }
        vals.push(v);
    }
    let k = best.0.clamp(1, scan - 2);
    let (y0, y1, y2) = (vals[k - 1], vals[k], vals[k + 1]);
    let den = y0 - 2.0 * y1 + y2;
    let shift = if den != 0.0 { 0.5 * (y0 - y2) / den } else { 0.0 };
    let peak_position = lo + step * (k as f64 + shift.clamp(-1.0, 1.0));

    Ok(SourceResult {
        photons,
        z,
        rho1,
        intensity,
        trace,
        purity,
        peak_position,
        mean_position: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn purity_closed_form() {
        for pulse in [PulseShape::Gaussian { width: 1.3 }, PulseShape::Sech { width: 0.7 }] {
            for n in [1u64, 2, 5, 100, 10_000] {
                let r = source_density_matrix(&pulse, n, SourceOptions { points: 11, ..Default::default() }).unwrap();
                let exact = n as f64 / (2.0 * n as f64 - 1.0);
                assert!((r.purity - exact).abs() < 1e-6, "{pulse:?} n={n}: {}", r.purity);
                assert_relative_eq!(r.trace, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_photon_is_pure_mode() {
        let p = PulseShape::Gaussian { width: 1.0 };
        let r = source_density_matrix(&p, 1, SourceOptions { points: 21, panels: 400 }).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                let e = p.amplitude(r.z[i]) * p.amplitude(r.z[j]);
                assert!((r.rho1[i * 21 + j] - e).abs() < 1e-14);
            }
        }
        assert!(r.peak_position.abs() < 1e-6);
    }

    #[test]
    fn pulse_advances_with_n() {
        let p = PulseShape::Sech { width: 1.0 };
        let mut last = f64::NEG_INFINITY;
        let mut last_mean = f64::NEG_INFINITY;
        for n in [1u64, 2, 4, 16, 256] {
            let r = source_density_matrix(&p, n, SourceOptions { points: 5, panels: 1000 }).unwrap();
            assert!(r.peak_position > last);
            assert!(r.mean_position > last_mean);
            last = r.peak_position;
            last_mean = r.mean_position;
        }
    }

    #[test]
    fn tabulated_matches_and_rejects_unnormalized() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let values = vec![1.0; 101];
        let p = PulseShape::Tabulated { times: times.clone(), values };
        let r = source_density_matrix(&p, 3, SourceOptions { points: 5, panels: 1000 }).unwrap();
        assert!((r.purity - 0.6).abs() < 1e-9);
        let bad = PulseShape::Tabulated { times, values: vec![2.0; 101] };
        assert!(matches!(source_density_matrix(&bad, 3, SourceOptions::default()), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn rejects_zero_photons() {
        assert!(source_density_matrix(&PulseShape::Gaussian { width: 1.0 }, 0, SourceOptions::default()).is_err());
    }
}
