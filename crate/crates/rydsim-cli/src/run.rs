//! Dispatch of validated configs to the solvers.

use crate::config::{sha256_hex, Beam, ConfigError, GateJob, Job, PropagateJob, Regime, RunConfig, TwoPhotonJob};
use crate::output::{now, write_atomic, Csv, IoFailure, OutputSet, RunManifest};
use crate::snapshot;
use rydsim::devices::{gate_metrics, pi_phase_feasibility, switch_transmission};
use rydsim::ensemble::scaling_curve;
use rydsim::linear::transmission_spectrum;
use rydsim::nlse::{ComplexField2D, KernelOptions, NonlocalKernel, Propagator};
use rydsim::two_photon::{evolve_dispersive, evolve_dissipative, find_bound_states, source_density_matrix, EvolveOptions};
use rydsim_verify::criteria::run_all;
use rydsim_verify::report::CriterionReport;
use std::path::Path;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Solver {
        context: &'static str,
        #[source]
        source: rydsim::Error,
    },
    #[error("{0}")]
    Io(#[from] IoFailure),
    #[error("{0}")]
    Verify(String),
}

impl CliError {
    /// 2 for problems with the request, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use rydsim::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver { source, .. } => match source {
                E::NonFinite(_) | E::Singular(_) | E::Unnormalized(_) => 3,
                _ => 2,
            },
            CliError::Verify(_) => 3,
        }
    }
}

fn ctx<T>(context: &'static str, r: rydsim::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Solver { context, source })
}

/// Runs one configured job, writing its outputs and `manifest.json` into
/// `cfg.output`. On error nothing written by this run is left behind.
pub fn run(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let started = now();
    let mut out = OutputSet::create(&cfg.output)?;
    out.write("config.toml", cfg.source.as_bytes())?;
    match &cfg.job {
        Job::Spectrum { detunings } => {
            let s = ctx("spectrum", transmission_spectrum(&cfg.medium, detunings))?;
            let mut csv = Csv::new(&["omega", "re_chi", "im_chi", "transmission"]);
            for ((w, c), t) in s.detunings.iter().zip(&s.chi).zip(&s.transmission) {
                csv.row(&[*w, c.re, c.im, *t]);
            }
            out.write("spectrum.csv", &csv.into_bytes())?;
        }
        Job::Mc { densities, probe, cfg: mc } => {
            let res = ctx("monte carlo", scaling_curve(densities, *probe, &cfg.medium, mc, cfg.seed))?;
            let mut csv = Csv::new(&[
                "density",
                "chi_ratio",
                "chi_ratio_stderr",
                "f_bl",
                "f_bl_stderr",
                "rydberg_density",
                "rydberg_density_stderr",
                "free_fraction",
                "p0",
                "converged",
                "box_flagged",
            ]);
            for m in &res {
                csv.row(&[
                    m.density,
                    m.chi_ratio,
                    m.chi_ratio_stderr,
                    m.f_bl,
                    m.f_bl_stderr,
                    m.rydberg_density,
                    m.rydberg_density_stderr,
                    m.free_fraction,
                    m.p0,
                    m.converged as u8 as f64,
                    m.box_flagged as u8 as f64,
                ]);
            }
            out.write("mc.csv", &csv.into_bytes())?;
        }
        Job::Propagate(job) => propagate(cfg, job, &mut out)?,
        Job::TwoPhoton(job) => two_photon(job, &mut out)?,
        Job::Source(job) => {
            let s = ctx("source", source_density_matrix(&job.pulse, job.photons, job.opts))?;
            let mut csv = Csv::new(&["z", "intensity", "purity"]);
            for (z, i) in s.z.iter().zip(&s.intensity) {
                csv.row(&[*z, *i, s.purity]);
            }
            out.write("source.csv", &csv.into_bytes())?;
            let summary = serde_json::json!({
                "photons": s.photons,
                "trace": s.trace,
                "purity": s.purity,
                "peak_position": s.peak_position,
                "mean_position": s.mean_position,
            });
            out.write("summary.json", serde_json::to_string_pretty(&summary).unwrap().as_bytes())?;
        }
        Job::Switch(job) => {
            let mut csv = Csv::new(&["od_b", "eta", "n_out", "gain"]);
            for &od in &job.od_b {
                let r = ctx("switch", switch_transmission(job.n_in, od, job.mode, job.opts))?;
                csv.row(&[od, r.eta, r.n_out, r.gain]);
            }
            out.write("switch.csv", &csv.into_bytes())?;
        }
        Job::Gate(job) => gate(job, &mut out)?,
    }
    let manifest = RunManifest {
        command: cfg.command.name().to_string(),
        code_version: CODE_VERSION.to_string(),
        config_hash: cfg.hash.clone(),
        seed: cfg.seed,
        started,
        finished: now(),
        files: Vec::new(),
    };
    Ok(out.finish(manifest)?)
}

fn propagate(cfg: &RunConfig, job: &PropagateJob, out: &mut OutputSet) -> Result<(), CliError> {
    let opts = KernelOptions {
        allow_resonance: job.allow_resonance,
    };
    let mut kernel = ctx("kernel", NonlocalKernel::from_medium(&cfg.medium, job.grid, opts))?;
    if job.real_kernel {
        kernel = kernel.real_part();
    }
    let mut field = ctx(
        "input beam",
        match job.beam {
            Beam::Gaussian { waist, power } => ComplexField2D::gaussian(job.grid, waist, power),
            Beam::SuperGaussian { waist, order, power } => {
                ComplexField2D::super_gaussian(job.grid, waist, order, power)
            }
        },
    )?;
    let mut prop = ctx("propagator", Propagator::new(&kernel, cfg.medium.wavenumber, job.dz, job.rim))?;
    let mut csv = Csv::new(&["z", "power", "peak_intensity"]);
    let save = |field: &ComplexField2D, step: usize, out: &mut OutputSet| -> Result<(), CliError> {
        let name = format!("field_{step:06}");
        let (bin, json) = snapshot::snapshot(field, &name, field.z, step);
        out.write(&format!("snapshots/{name}.bin"), &bin)?;
        out.write(&format!("snapshots/{name}.json"), json.as_bytes())?;
        Ok(())
    };
    csv.row(&[field.z, field.power(), field.peak_intensity()]);
    save(&field, 0, out)?;
    for step in 1..=job.steps {
        ctx("propagation", prop.step(&mut field))?;
        csv.row(&[field.z, field.power(), field.peak_intensity()]);
        if step % job.snapshot_every == 0 || step == job.steps {
            save(&field, step, out)?;
        }
    }
    out.write("power.csv", &csv.into_bytes())?;
    Ok(())
}

fn two_photon(job: &TwoPhotonJob, out: &mut OutputSet) -> Result<(), CliError> {
    let opts = EvolveOptions::default();
    let evolve = |od: f64| match job.regime {
        Regime::Dissipative => evolve_dissipative(od, job.ratio, &job.grid, opts),
        Regime::Dispersive => evolve_dispersive(od, job.ratio, &job.grid, opts),
    };
    let a = ctx("two-photon evolution", evolve(job.od_b))?;
    let mut csv = Csv::new(&["r", "re_ee", "im_ee", "g2"]);
    for ((r, e), g) in a.r.iter().zip(&a.ee).zip(&a.g2) {
        csv.row(&[*r, e.re, e.im, *g]);
    }
    out.write("two_photon.csv", &csv.into_bytes())?;
    if !job.sweep.is_empty() {
        // width is the r̃ where g2 is halfway back to 1, empty if never
        let mut csv = Csv::new(&["od_b", "g2_0", "width"]);
        for &od in &job.sweep {
            let s = ctx("two-photon sweep", evolve(od))?;
            csv.row_opt(&[Some(od), Some(s.g2_zero()), s.correlation_width()]);
        }
        out.write("g2_sweep.csv", &csv.into_bytes())?;
    }
    if job.regime == Regime::Dispersive {
        let b = ctx(
            "bound states",
            find_bound_states(job.od_b, job.ratio, &job.grid, job.bound_fraction),
        )?;
        let mut csv = Csv::new(&["index", "energy", "participation", "edge_ratio", "continuum_edge"]);
        for k in 0..b.energies.len() {
            csv.row(&[k as f64, b.energies[k], b.participation[k], b.edge_ratio[k], b.continuum_edge]);
        }
        out.write("bound_states.csv", &csv.into_bytes())?;
    }
    Ok(())
}

fn gate(job: &GateJob, out: &mut OutputSet) -> Result<(), CliError> {
    let curve = ctx("feasibility", pi_phase_feasibility(&job.od_b, job.bound))?;
    let mut csv = Csv::new(&["od_b", "phi", "eta", "fidelity", "max_phase"]);
    for (od, pt) in job.od_b.iter().zip(&curve.points) {
        let g = ctx(
            "gate",
            gate_metrics(*od, job.gamma_over_delta, job.omega_over_delta, job.mode),
        )?;
        csv.row(&[*od, g.phi, g.eta, g.fidelity, pt.max_phase]);
    }
    out.write("gate.csv", &csv.into_bytes())?;
    let mut csv = Csv::new(&[
        "od_b",
        "max_phase",
        "gamma_over_delta_at_max",
        "gamma_over_delta_at_pi",
        "fidelity_at_pi",
    ]);
    for pt in &curve.points {
        csv.row_opt(&[
            Some(pt.od_b),
            Some(pt.max_phase),
            Some(pt.gamma_over_delta_at_max),
            pt.gamma_over_delta_at_pi,
            pt.fidelity_at_pi,
        ]);
    }
    out.write("feasibility.csv", &csv.into_bytes())?;
    let summary = serde_json::json!({
        "max_gamma_over_delta": curve.bound.max_gamma_over_delta,
        "threshold_od_b": curve.threshold,
    });
    out.write("summary.json", serde_json::to_string_pretty(&summary).unwrap().as_bytes())?;
    Ok(())
}

/// Outcome of `rydsim verify`.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    /// Reports of the first pass.
    pub reports: Vec<CriterionReport>,
    pub manifests: [RunManifest; 2],
    /// Both passes produced the same files byte for byte.
    pub identical: bool,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.identical && self.reports.iter().all(CriterionReport::passed)
    }
}

fn verify_pass(seed: u64, dir: &Path) -> Result<(Vec<CriterionReport>, RunManifest), CliError> {
    let started = now();
    let reports = run_all(seed);
    let mut out = OutputSet::create(dir)?;
    let record: Vec<String> = reports.iter().map(CriterionReport::record).collect();
    out.write("report.txt", (record.join("\n") + "\n").as_bytes())?;
    let manifest = RunManifest {
        command: "verify".into(),
        code_version: CODE_VERSION.into(),
        config_hash: sha256_hex(format!("verify seed={seed}").as_bytes()),
        seed,
        started,
        finished: now(),
        files: Vec::new(),
    };
    Ok((reports, out.finish(manifest)?))
}

/// Runs the acceptance suite twice under `seed`, into `dir/run1` and
/// `dir/run2`, and compares the two manifests.
pub fn verify(seed: u64, dir: &Path, mut progress: impl FnMut(&CriterionReport)) -> Result<VerifyOutcome, CliError> {
    let (reports, first) = verify_pass(seed, &dir.join("run1"))?;
    for r in &reports {
        progress(r);
    }
    let (_, second) = verify_pass(seed, &dir.join("run2"))?;
    let identical = first.same_outputs(&second);
    // timings differ between passes, so the summary stays outside the manifests
    let detail: Vec<String> = reports.iter().map(CriterionReport::detail).collect();
    let path = dir.join("summary.txt");
    write_atomic(&path, (detail.join("\n") + "\n").as_bytes()).map_err(|source| IoFailure { path, source })?;
    Ok(VerifyOutcome {
        reports,
        manifests: [first, second],
        identical,
    })
}
