//! Run configuration files.
//!
//! A config is a TOML file with a few top-level keys and one `[medium]`
//! block plus one block named after the subcommand:
//!
//! ```toml
//! seed = 7
//! output = "runs/spectrum"
//!
//! [medium]
//! rho = 1.0
//! g = 1.0
//! omega = 1.0
//! delta = 0.0
//! gamma = 1.0
//! c6 = 1.0
//!
//! [spectrum]
//! omega_min = -3.0
//! omega_max = 3.0
//! points = 601
//! ```
//!
//! Every key is checked before anything runs. Unknown keys are errors and
//! every problem is reported with its line.

use rydsim::devices::{DeviceMode, PhaseBound, SwitchOptions};
use rydsim::ensemble::{McConfig, SweepSchedule};
use rydsim::nlse::{AbsorbingRim, TransverseGrid};
use rydsim::two_photon::{PulseShape, SourceOptions, TwoPhotonGrid};
use rydsim::{derive_scales, MediumParams};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use toml_edit::{ImDocument, Item, Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Spectrum,
    Mc,
    Propagate,
    TwoPhoton,
    Source,
    Switch,
    Gate,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Spectrum,
        Command::Mc,
        Command::Propagate,
        Command::TwoPhoton,
        Command::Source,
        Command::Switch,
        Command::Gate,
    ];

    /// Subcommand name, as typed on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Mc => "mc",
            Command::Propagate => "propagate",
            Command::TwoPhoton => "two-photon",
            Command::Source => "source",
            Command::Switch => "switch",
            Command::Gate => "gate",
        }
    }

    /// Name of the solver block in the config file.
    pub fn section(self) -> &'static str {
        match self {
            Command::TwoPhoton => "two_photon",
            c => c.name(),
        }
    }

    fn uses_medium(self) -> bool {
        matches!(
            self,
            Command::Spectrum | Command::Mc | Command::Propagate | Command::TwoPhoton
        )
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One problem in a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: usize,
    pub message: String,
}

/// Every problem found in one config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub file: PathBuf,
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            if i.line == 0 {
                write!(f, "{}: {}", self.file.display(), i.message)?;
            } else {
                write!(f, "{}:{}: {}", self.file.display(), i.line, i.message)?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Beam {
    Gaussian { waist: f64, power: f64 },
    SuperGaussian { waist: f64, order: u32, power: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateJob {
    pub grid: TransverseGrid,
    pub beam: Beam,
    pub dz: f64,
    pub steps: usize,
    /// Write a field snapshot every this many steps (and at the end).
    pub snapshot_every: usize,
    pub real_kernel: bool,
    pub allow_resonance: bool,
    pub rim: Option<AbsorbingRim>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Dissipative,
    Dispersive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonJob {
    pub regime: Regime,
    /// OD_b (dissipative) or ŌD_b (dispersive).
    pub od_b: f64,
    /// Ω/γ (dissipative) or Ω/Δ (dispersive).
    pub ratio: f64,
    pub grid: TwoPhotonGrid,
    /// Extra depths for a g2(0) sweep.
    pub sweep: Vec<f64>,
    pub bound_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceJob {
    pub photons: u64,
    pub pulse: PulseShape,
    pub opts: SourceOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchJob {
    pub od_b: Vec<f64>,
    pub n_in: f64,
    pub mode: DeviceMode,
    pub opts: SwitchOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateJob {
    pub od_b: Vec<f64>,
    pub gamma_over_delta: f64,
    pub omega_over_delta: f64,
    pub mode: DeviceMode,
    pub bound: PhaseBound,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Spectrum { detunings: Vec<f64> },
    Mc { densities: Vec<f64>, probe: f64, cfg: McConfig },
    Propagate(PropagateJob),
    TwoPhoton(TwoPhotonJob),
    Source(SourceJob),
    Switch(SwitchJob),
    Gate(GateJob),
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub output: PathBuf,
    pub medium: MediumParams,
    pub job: Job,
    /// Config text as read, copied next to the outputs.
    pub source: String,
    /// SHA-256 of `source`.
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn suggest<'a>(key: &str, known: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    known
        .into_iter()
        .map(|k| (strsim::damerau_levenshtein(key, k), k))
        .filter(|&(d, k)| d <= 2.max(k.len() / 3))
        .min()
        .map(|(_, k)| k)
}

struct Issues<'s> {
    src: &'s str,
    list: Vec<ConfigIssue>,
}

impl Issues<'_> {
    fn at(&mut self, span: Option<std::ops::Range<usize>>, msg: String) {
        let line = span.map(|s| line_of(self.src, s.start)).unwrap_or(0);
        self.list.push(ConfigIssue { line, message: msg });
    }
}

/// Typed access to one table that remembers which keys were asked for.
struct Section<'d> {
    name: String,
    table: &'d Table,
    header: Option<std::ops::Range<usize>>,
    known: BTreeSet<&'static str>,
}

impl<'d> Section<'d> {
    fn new(name: &str, table: &'d Table) -> Self {
        Self {
            name: name.to_string(),
            table,
            header: table.span(),
            known: BTreeSet::new(),
        }
    }

    fn label(&self, key: &str) -> String {
        if self.name.is_empty() {
            format!("`{key}`")
        } else {
            format!("`{}.{key}`", self.name)
        }
    }

    fn span(&self, key: &str) -> Option<std::ops::Range<usize>> {
        self.table
            .get_key_value(key)
            .and_then(|(k, v)| k.span().or_else(|| v.span()))
            .or_else(|| self.header.clone())
    }

    fn value(&mut self, key: &'static str) -> Option<&'d Value> {
        self.known.insert(key);
        match self.table.get(key) {
            Some(Item::Value(v)) => Some(v),
            _ => None,
        }
    }

    fn present(&mut self, key: &'static str) -> bool {
        self.known.insert(key);
        self.table.contains_key(key)
    }

    fn wrong_type(&self, is: &mut Issues, key: &str, want: &str) {
        is.at(self.span(key), format!("{} must be {want}", self.label(key)));
    }

    fn missing(&self, is: &mut Issues, key: &str) {
        is.at(self.header.clone(), format!("missing required key {}", self.label(key)));
    }

    fn f64_opt(&mut self, is: &mut Issues, key: &'static str) -> Option<f64> {
        if self.table.get(key).is_some_and(|i| !i.is_value()) {
            self.known.insert(key);
            self.wrong_type(is, key, "a number");
            return None;
        }
        let v = self.value(key)?;
        match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                self.wrong_type(is, key, "finite");
                None
            }
            None => {
                self.wrong_type(is, key, "a number");
                None
            }
        }
    }

    fn f64_req(&mut self, is: &mut Issues, key: &'static str) -> f64 {
        if !self.present(key) {
            self.missing(is, key);
            return f64::NAN;
        }
        self.f64_opt(is, key).unwrap_or(f64::NAN)
    }

    fn f64_or(&mut self, is: &mut Issues, key: &'static str, default: f64) -> f64 {
        if !self.present(key) {
            return default;
        }
        self.f64_opt(is, key).unwrap_or(f64::NAN)
    }

    fn int_opt(&mut self, is: &mut Issues, key: &'static str) -> Option<i64> {
        let v = self.value(key)?;
        match v.as_integer() {
            Some(i) => Some(i),
            None => {
                self.wrong_type(is, key, "an integer");
                None
            }
        }
    }

    fn count(&mut self, is: &mut Issues, key: &'static str, default: Option<usize>, min: usize) -> usize {
        if !self.present(key) {
            return match default {
                Some(d) => d,
                None => {
                    self.missing(is, key);
                    min
                }
            };
        }
        match self.int_opt(is, key) {
            Some(i) if i >= min as i64 => i as usize,
            Some(i) => {
                is.at(self.span(key), format!("{} = {i} must be ≥ {min}", self.label(key)));
                min
            }
            None => min,
        }
    }

    fn bool_or(&mut self, is: &mut Issues, key: &'static str, default: bool) -> bool {
        if !self.present(key) {
            return default;
        }
        match self.value(key).and_then(Value::as_bool) {
            Some(b) => b,
            None => {
                self.wrong_type(is, key, "true or false");
                default
            }
        }
    }

    fn choice(&mut self, is: &mut Issues, key: &'static str, options: &[&'static str], default: &'static str) -> &'static str {
        if !self.present(key) {
            return default;
        }
        let Some(s) = self.value(key).and_then(Value::as_str) else {
            self.wrong_type(is, key, "a string");
            return default;
        };
        match options.iter().find(|&&o| o == s) {
            Some(o) => o,
            None => {
                let hint = suggest(s, options.iter().copied())
                    .map(|o| format!("; did you mean `{o}`?"))
                    .unwrap_or_default();
                is.at(
                    self.span(key),
                    format!("{} = \"{s}\" is not one of {}{hint}", self.label(key), options.join(", ")),
                );
                default
            }
        }
    }

    fn list_opt(&mut self, is: &mut Issues, key: &'static str) -> Option<Vec<f64>> {
        if !self.present(key) {
            return None;
        }
        let Some(arr) = self.value(key).and_then(Value::as_array) else {
            self.wrong_type(is, key, "an array of numbers");
            return Some(Vec::new());
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr.iter() {
            match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
                Some(x) if x.is_finite() => out.push(x),
                _ => {
                    self.wrong_type(is, key, "an array of finite numbers");
                    return Some(Vec::new());
                }
            }
        }
        if out.is_empty() {
            is.at(self.span(key), format!("{} must not be empty", self.label(key)));
        }
        Some(out)
    }

    fn require(&self, is: &mut Issues, key: &str, ok: bool, rule: &str) {
        if !ok {
            is.at(self.span(key), format!("{} {rule}", self.label(key)));
        }
    }

    /// Reports every key that was never asked for.
    fn finish(self, is: &mut Issues) {
        for (k, item) in self.table.iter() {
            if self.known.contains(k) {
                continue;
            }
            let span = self.table.key(k).and_then(|key| key.span()).or_else(|| item.span());
            let hint = suggest(k, self.known.iter().copied())
                .map(|s| format!("; did you mean `{s}`?"))
                .unwrap_or_default();
            is.at(span, format!("unknown key {}{hint}", self.label(k)));
        }
    }
}

fn mode_of(s: &str) -> DeviceMode {
    if s == "integrate" {
        DeviceMode::Integrate
    } else {
        DeviceMode::ClosedForm
    }
}

fn parse_medium(sec: &mut Section, is: &mut Issues) -> MediumParams {
    let d = MediumParams::default();
    let mut p = MediumParams {
        rho: sec.f64_req(is, "rho"),
        g: sec.f64_req(is, "g"),
        omega: sec.f64_req(is, "omega"),
        delta: sec.f64_req(is, "delta"),
        gamma: sec.f64_req(is, "gamma"),
        c6: sec.f64_req(is, "c6"),
        length: sec.f64_or(is, "length", d.length),
        wavenumber: sec.f64_or(is, "wavenumber", d.wavenumber),
        c: sec.f64_or(is, "c", d.c),
    };
    // check each field on its own so every violation is named
    let fields: [(&str, fn(&mut MediumParams) -> &mut f64); 9] = [
        ("rho", |p| &mut p.rho),
        ("g", |p| &mut p.g),
        ("omega", |p| &mut p.omega),
        ("delta", |p| &mut p.delta),
        ("gamma", |p| &mut p.gamma),
        ("c6", |p| &mut p.c6),
        ("length", |p| &mut p.length),
        ("wavenumber", |p| &mut p.wavenumber),
        ("c", |p| &mut p.c),
    ];
    for (key, field) in fields {
        let v = *field(&mut p);
        if v.is_nan() {
            continue;
        }
        let mut probe = d;
        *field(&mut probe) = v;
        if let Err(e) = probe.validate() {
            is.at(sec.span(key), format!("{}: {e}", sec.label(key)));
            *field(&mut p) = *field(&mut d.clone());
        }
    }
    p
}

fn parse_job(cmd: Command, sec: &mut Section, medium: &MediumParams, medium_ok: bool, is: &mut Issues) -> Option<Job> {
    let job = match cmd {
        Command::Spectrum => {
            let lo = sec.f64_req(is, "omega_min");
            let hi = sec.f64_req(is, "omega_max");
            let n = sec.count(is, "points", Some(401), 2);
            sec.require(is, "omega_max", !(hi <= lo), "must exceed `omega_min`");
            let detunings = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
            Job::Spectrum { detunings }
        }
        Command::Mc => {
            let densities = match sec.list_opt(is, "densities") {
                Some(d) => d,
                None => vec![medium.rho],
            };
            sec.require(is, "densities", densities.iter().all(|&d| d > 0.0), "must all be > 0");
            let probe = sec.f64_req(is, "probe");
            sec.require(is, "probe", probe >= 0.0, "must be ≥ 0");
            let atoms = sec.count(is, "atoms", Some(2000), 1);
            let chains = sec.count(is, "chains", Some(1), 1);
            let sweeps = sec.count(is, "sweeps", None, 1);
            let d = SweepSchedule::new(sweeps);
            let schedule = SweepSchedule {
                sweeps,
                thermalization: sec.count(is, "thermalization", Some(d.thermalization), 0),
                batches: sec.count(is, "batches", Some(d.batches), 4),
            };
            let ok = schedule.thermalization < schedule.sweeps
                && schedule.batches % 2 == 0
                && schedule.sweeps - schedule.thermalization.min(schedule.sweeps) >= schedule.batches;
            sec.require(
                is,
                "sweeps",
                ok,
                "must exceed `thermalization` by at least `batches` (an even number ≥ 4)",
            );
            Job::Mc {
                densities,
                probe,
                cfg: McConfig {
                    n_atoms: atoms,
                    chains,
                    schedule,
                },
            }
        }
        Command::Propagate => {
            let nx = sec.count(is, "nx", None, 4);
            let ny = sec.count(is, "ny", Some(nx), 4);
            let dx = sec.f64_req(is, "dx");
            let dy = sec.f64_or(is, "dy", dx);
            let grid = match TransverseGrid::new(nx, ny, dx, dy) {
                Ok(g) => Some(g),
                Err(e) => {
                    is.at(sec.span("dx"), format!("transverse grid: {e}"));
                    None
                }
            };
            let shape = sec.choice(is, "beam", &["gaussian", "super-gaussian"], "gaussian");
            let waist = sec.f64_req(is, "waist");
            let power = sec.f64_req(is, "power");
            sec.require(is, "waist", waist > 0.0, "must be > 0");
            sec.require(is, "power", power >= 0.0, "must be ≥ 0");
            let beam = if shape == "super-gaussian" {
                let order = sec.count(is, "order", None, 1) as u32;
                Beam::SuperGaussian { waist, order, power }
            } else {
                Beam::Gaussian { waist, power }
            };
            let dz = sec.f64_req(is, "dz");
            sec.require(is, "dz", dz > 0.0, "must be > 0");
            if grid.is_some() && dz > 0.0 {
                let limit = medium.wavenumber * dx.min(dy).powi(2);
                sec.require(
                    is,
                    "dz",
                    !(medium_ok && dz > limit),
                    &format!("exceeds the diffraction limit k·dx² = {limit:.6}"),
                );
            }
            let steps = sec.count(is, "steps", None, 1);
            let snapshot_every = sec.count(is, "snapshot_every", Some(steps), 1);
            let real_kernel = sec.bool_or(is, "real_kernel", false);
            let allow_resonance = sec.bool_or(is, "allow_resonance", false);
            let rim = if sec.present("rim_width") || sec.present("rim_strength") {
                let width = sec.f64_req(is, "rim_width");
                let strength = sec.f64_req(is, "rim_strength");
                sec.require(is, "rim_width", width > 0.0, "must be > 0");
                sec.require(is, "rim_strength", strength > 0.0, "must be > 0");
                Some(AbsorbingRim { width, strength })
            } else {
                None
            };
            Job::Propagate(PropagateJob {
                grid: grid?,
                beam,
                dz,
                steps,
                snapshot_every,
                real_kernel,
                allow_resonance,
                rim,
            })
        }
        Command::TwoPhoton => {
            let regime = match sec.choice(is, "regime", &["dissipative", "dispersive"], "dissipative") {
                "dispersive" => Regime::Dispersive,
                _ => Regime::Dissipative,
            };
            let scales = if medium_ok { derive_scales(medium).ok() } else { None };
            let derived = match regime {
                Regime::Dissipative => scales.map(|s| (s.od_b, medium.omega / medium.gamma)),
                Regime::Dispersive => scales.and_then(|s| s.od_b_bar.map(|o| (o, medium.omega / medium.delta))),
            };
            let od_b = match sec.f64_or(is, "od_b", f64::NAN) {
                x if x.is_nan() && !sec.table.contains_key("od_b") => match derived {
                    Some((o, _)) => o,
                    None => {
                        sec.require(
                            is,
                            "od_b",
                            !medium_ok,
                            "cannot be derived from [medium] (dispersive needs delta ≠ 0); set it explicitly",
                        );
                        f64::NAN
                    }
                },
                x => x,
            };
            sec.require(is, "od_b", !(od_b <= 0.0), "must be > 0");
            let ratio = derived.map(|d| d.1).unwrap_or(f64::NAN);
            if regime == Regime::Dispersive {
                sec.require(
                    is,
                    "regime",
                    !(ratio.abs() > 1.0),
                    &format!("dispersive needs |Ω/Δ| ≤ 1 (medium gives {ratio:.4})"),
                );
            }
            let r_max = sec.f64_or(is, "r_max", 12.0);
            let ppu = sec.count(is, "points_per_unit", Some(32), 1);
            let l_tilde = sec.f64_req(is, "l_tilde");
            let steps = sec.count(is, "steps", None, 1);
            let grid = match TwoPhotonGrid::new(r_max, ppu, l_tilde, steps) {
                Ok(g) => Some(g),
                Err(e) => {
                    is.at(sec.span("r_max"), format!("relative-coordinate grid: {e}"));
                    None
                }
            };
            let sweep = sec.list_opt(is, "sweep").unwrap_or_default();
            sec.require(is, "sweep", sweep.iter().all(|&o| o > 0.0), "must all be > 0");
            let bound_fraction = sec.f64_or(is, "bound_fraction", 0.2);
            sec.require(
                is,
                "bound_fraction",
                bound_fraction > 0.0 && bound_fraction <= 1.0,
                "must lie in (0, 1]",
            );
            Job::TwoPhoton(TwoPhotonJob {
                regime,
                od_b,
                ratio,
                grid: grid?,
                sweep,
                bound_fraction,
            })
        }
        Command::Source => {
            let photons = sec.count(is, "photons", None, 1) as u64;
            let kind = sec.choice(is, "pulse", &["gaussian", "sech", "table"], "gaussian");
            let pulse = if kind == "table" {
                let times = sec.list_opt(is, "times").unwrap_or_default();
                let values = sec.list_opt(is, "values").unwrap_or_default();
                PulseShape::Tabulated { times, values }
            } else {
                let width = sec.f64_req(is, "width");
                if kind == "sech" {
                    PulseShape::Sech { width }
                } else {
                    PulseShape::Gaussian { width }
                }
            };
            if let Err(e) = pulse.validate() {
                is.at(sec.span("pulse"), format!("pulse: {e}"));
            }
            let d = SourceOptions::default();
            let opts = SourceOptions {
                points: sec.count(is, "points", Some(d.points), 2),
                panels: sec.count(is, "panels", Some(d.panels), 1),
            };
            Job::Source(SourceJob { photons, pulse, opts })
        }
        Command::Switch => {
            let od_b = sec.list_opt(is, "od_b").unwrap_or_else(|| {
                sec.missing(is, "od_b");
                Vec::new()
            });
            sec.require(is, "od_b", od_b.iter().all(|&o| o >= 0.0), "must all be ≥ 0");
            let n_in = sec.f64_req(is, "n_in");
            sec.require(is, "n_in", n_in >= 0.0, "must be ≥ 0");
            let mode = mode_of(sec.choice(is, "mode", &["closed-form", "integrate"], "closed-form"));
            let d = SwitchOptions::default();
            let length = sec.f64_or(is, "length_over_zb", d.length_over_zb);
            let allow_short = sec.bool_or(is, "allow_short", d.allow_short);
            sec.require(is, "length_over_zb", length > 0.0, "must be > 0");
            if mode == DeviceMode::Integrate {
                sec.require(
                    is,
                    "length_over_zb",
                    allow_short || length >= 8.0,
                    "must be ≥ 8 in integrate mode (set allow_short = true to override)",
                );
            }
            let saturation = if sec.present("saturation") {
                let s = sec.f64_req(is, "saturation");
                sec.require(is, "saturation", s > 0.0, "must be > 0");
                Some(s)
            } else {
                None
            };
            let opts = SwitchOptions {
                length_over_zb: length,
                offset: sec.f64_or(is, "offset", d.offset),
                allow_short,
                saturation,
                steps_per_zb: sec.count(is, "steps_per_zb", Some(d.steps_per_zb), 4),
            };
            Job::Switch(SwitchJob { od_b, n_in, mode, opts })
        }
        Command::Gate => {
            let od_b = sec.list_opt(is, "od_b").unwrap_or_else(|| {
                sec.missing(is, "od_b");
                Vec::new()
            });
            sec.require(is, "od_b", od_b.iter().all(|&o| o > 0.0), "must all be > 0");
            let gamma_over_delta = sec.f64_req(is, "gamma_over_delta");
            let omega_over_delta = sec.f64_or(is, "omega_over_delta", 0.0);
            let mode = mode_of(sec.choice(is, "mode", &["closed-form", "integrate"], "integrate"));
            let bound = match sec.choice(is, "bound", &["agreement", "unit-detuning", "custom"], "agreement") {
                "unit-detuning" => Some(PhaseBound::unit_detuning()),
                "custom" => {
                    let x = sec.f64_req(is, "max_gamma_over_delta");
                    sec.require(is, "max_gamma_over_delta", x > 0.0, "must be > 0");
                    Some(PhaseBound {
                        max_gamma_over_delta: x,
                    })
                }
                _ => {
                    let tol = sec.f64_or(is, "agreement", 0.05);
                    match PhaseBound::closed_form_agreement(tol) {
                        Ok(b) => Some(b),
                        Err(e) => {
                            is.at(sec.span("agreement"), format!("{}: {e}", sec.label("agreement")));
                            None
                        }
                    }
                }
            };
            Job::Gate(GateJob {
                od_b,
                gamma_over_delta,
                omega_over_delta,
                mode,
                bound: bound?,
            })
        }
    };
    Some(job)
}

/// Parses and validates config text. `file` is only used in messages.
pub fn parse_str(src: &str, file: &Path, cmd: Command) -> Result<RunConfig, ConfigError> {
    let err = |issues| ConfigError {
        file: file.to_path_buf(),
        issues,
    };
    let doc = match ImDocument::parse(src) {
        Ok(d) => d,
        Err(e) => {
            let line = e.span().map(|s| line_of(src, s.start)).unwrap_or(0);
            let msg = e.message().to_string();
            return Err(err(vec![ConfigIssue { line, message: msg }]));
        }
    };
    let mut is = Issues { src, list: Vec::new() };
    let root = doc.as_table();
    let mut top = Section::new("", root);

    if top.present("command") {
        match top.value("command").and_then(Value::as_str) {
            Some(c) if c == cmd.name() => {}
            Some(c) => is.at(
                top.span("command"),
                format!("config is for `{c}` but was given to `{}`", cmd.name()),
            ),
            None => top.wrong_type(&mut is, "command", "a string"),
        }
    }
    let seed = if top.present("seed") {
        match top.int_opt(&mut is, "seed") {
            Some(s) if s >= 0 => s as u64,
            Some(_) => {
                top.require(&mut is, "seed", false, "must be ≥ 0");
                0
            }
            None => 0,
        }
    } else {
        0
    };
    let output = if top.present("output") {
        match top.value("output").and_then(Value::as_str) {
            Some(s) => PathBuf::from(s),
            None => {
                top.wrong_type(&mut is, "output", "a string");
                PathBuf::new()
            }
        }
    } else {
        Path::new("rydsim-out").join(cmd.name())
    };

    let mut sections: Vec<&'static str> = vec![cmd.section()];
    if cmd.uses_medium() {
        sections.push("medium");
    }
    let mut medium = MediumParams::default();
    let mut medium_ok = true;
    if cmd.uses_medium() {
        match root.get("medium").and_then(Item::as_table) {
            Some(t) => {
                let mut sec = Section::new("medium", t);
                let before = is.list.len();
                medium = parse_medium(&mut sec, &mut is);
                sec.finish(&mut is);
                medium_ok = is.list.len() == before;
            }
            None => {
                is.at(None, "missing [medium] block".into());
                medium_ok = false;
            }
        }
    }
    let job = match root.get(cmd.section()).and_then(Item::as_table) {
        Some(t) => {
            let mut sec = Section::new(cmd.section(), t);
            let job = parse_job(cmd, &mut sec, &medium, medium_ok, &mut is);
            sec.finish(&mut is);
            job
        }
        None => {
            is.at(None, format!("missing [{}] block", cmd.section()));
            None
        }
    };

    for (k, item) in root.iter() {
        let span = root.key(k).and_then(|x| x.span()).or_else(|| item.span());
        if item.is_table() {
            if !sections.contains(&k) {
                let hint = suggest(k, sections.iter().copied())
                    .map(|s| format!("; did you mean [{s}]?"))
                    .unwrap_or_default();
                is.at(span, format!("block [{k}] is not used by `{}`{hint}", cmd.name()));
            }
        } else if !top.known.contains(k) {
            let hint = suggest(k, ["command", "seed", "output"])
                .map(|s| format!("; did you mean `{s}`?"))
                .unwrap_or_default();
            is.at(span, format!("unknown key `{k}`{hint}"));
        }
    }

    match (is.list.is_empty(), job) {
        (true, Some(job)) => Ok(RunConfig {
            command: cmd,
            seed,
            output,
            medium,
            job,
            source: src.to_string(),
            hash: sha256_hex(src.as_bytes()),
        }),
        _ => {
            is.list.sort_by_key(|i| i.line);
            Err(err(is.list))
        }
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path, cmd: Command) -> Result<RunConfig, ConfigError> {
    let src = std::fs::read(path).map_err(|e| ConfigError {
        file: path.to_path_buf(),
        issues: vec![ConfigIssue {
            line: 0,
            message: format!("cannot read: {e}"),
        }],
    })?;
    let src = String::from_utf8(src).map_err(|_| ConfigError {
        file: path.to_path_buf(),
        issues: vec![ConfigIssue {
            line: 0,
            message: "not valid UTF-8".into(),
        }],
    })?;
    parse_str(&src, path, cmd)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MEDIUM: &str = "[medium]\nrho = 1.0\ng = 1.0\nomega = 1.0\ndelta = 0.0\ngamma = 1.0\nc6 = 1.0\n";

    fn parse(cmd: Command, body: &str) -> Result<RunConfig, ConfigError> {
        parse_str(body, Path::new("run.toml"), cmd)
    }

    #[test]
    fn minimal_spectrum() {
        let c = parse(Command::Spectrum, &format!("seed = 3\n{MEDIUM}[spectrum]\nomega_min = -2\nomega_max = 2\npoints = 5\n")).unwrap();
        assert_eq!(c.seed, 3);
        match c.job {
            Job::Spectrum { detunings } => assert_eq!(detunings, vec![-2.0, -1.0, 0.0, 1.0, 2.0]),
            j => panic!("{j:?}"),
        }
        assert_eq!(c.output, Path::new("rydsim-out/spectrum"));
    }

    #[test]
    fn negative_omega_names_the_invariant() {
        let src = MEDIUM.replace("omega = 1.0", "omega = -1") + "[spectrum]\nomega_min = -2\nomega_max = 2\n";
        let e = parse(Command::Spectrum, &src).unwrap_err();
        assert_eq!(e.issues.len(), 1);
        assert_eq!(e.issues[0].line, 4);
        assert!(e.issues[0].message.contains("omega"), "{e}");
        assert!(e.to_string().starts_with("run.toml:4:"));
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let src = MEDIUM.replace("omega = 1.0", "omga = 1.0") + "[spectrum]\nomega_min = -2\nomega_max = 2\n";
        let e = parse(Command::Spectrum, &src).unwrap_err();
        let text = e.to_string();
        assert!(text.contains("unknown key `medium.omga`; did you mean `omega`?"), "{text}");
        assert!(text.contains("missing required key `medium.omega`"), "{text}");
    }

    #[test]
    fn every_violation_is_reported() {
        let src = "seed = -1\nbogus = 2\n".to_string()
            + &MEDIUM.replace("gamma = 1.0", "gamma = 0").replace("rho = 1.0", "rho = -3")
            + "[spectrum]\nomega_min = 2\nomega_max = 1\n[mc]\n";
        let e = parse(Command::Spectrum, &src).unwrap_err();
        let text = e.to_string();
        for needle in ["`seed`", "`bogus`", "`medium.rho`", "`medium.gamma`", "`spectrum.omega_max`", "[mc]"] {
            assert!(text.contains(needle), "{needle} missing from\n{text}");
        }
        let lines: Vec<usize> = e.issues.iter().map(|i| i.line).collect();
        assert!(lines.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn syntax_error_has_a_line() {
        let e = parse(Command::Spectrum, "[medium]\nrho = = 1\n").unwrap_err();
        assert_eq!(e.issues[0].line, 2);
    }

    #[test]
    fn wrong_command() {
        let src = format!("command = \"mc\"\n{MEDIUM}[spectrum]\nomega_min = -2\nomega_max = 2\n");
        let e = parse(Command::Spectrum, &src).unwrap_err();
        assert!(e.to_string().contains("config is for `mc`"));
    }

    #[test]
    fn device_blocks_need_no_medium() {
        let c = parse(Command::Switch, "[switch]\nod_b = [1, 2]\nn_in = 3\nmode = \"integrate\"\n").unwrap();
        match c.job {
            Job::Switch(s) => {
                assert_eq!(s.od_b, vec![1.0, 2.0]);
                assert_eq!(s.mode, DeviceMode::Integrate);
            }
            j => panic!("{j:?}"),
        }
        let e = parse(Command::Switch, "[switch]\nod_b = [1]\nn_in = 3\nmode = \"integrat\"\n").unwrap_err();
        assert!(e.to_string().contains("did you mean `integrate`?"));
        let e = parse(
            Command::Switch,
            "[switch]\nod_b = [1]\nn_in = 3\nmode = \"integrate\"\nlength_over_zb = 4\n",
        )
        .unwrap_err();
        assert!(e.to_string().contains("allow_short"));
    }

    #[test]
    fn two_photon_depth_from_medium() {
        let src = format!("{MEDIUM}[two_photon]\nl_tilde = 1\nsteps = 100\nr_max = 6\n");
        let c = parse(Command::TwoPhoton, &src).unwrap();
        let Job::TwoPhoton(t) = c.job else { panic!() };
        assert_eq!(t.regime, Regime::Dissipative);
        let s = derive_scales(&c.medium).unwrap();
        assert_eq!(t.od_b, s.od_b);
        // on resonance there is no off-resonant depth
        let src = format!("{MEDIUM}[two_photon]\nregime = \"dispersive\"\nl_tilde = 1\nsteps = 100\n");
        assert!(parse(Command::TwoPhoton, &src).is_err());
    }

    #[test]
    fn propagate_checks_step_against_grid() {
        let body = "[propagate]\nnx = 64\ndx = 0.25\nwaist = 2\npower = 1\ndz = 5\nsteps = 10\n";
        let src = MEDIUM.to_string() + "wavenumber = 10\n" + body;
        let e = parse(Command::Propagate, &src).unwrap_err();
        assert!(e.to_string().contains("diffraction limit"), "{e}");
        let ok = src.replace("dz = 5", "dz = 0.5");
        let c = parse(Command::Propagate, &ok).unwrap();
        let Job::Propagate(p) = c.job else { panic!() };
        assert_eq!(p.snapshot_every, 10);
    }
}
