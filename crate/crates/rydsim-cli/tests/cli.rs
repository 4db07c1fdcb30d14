use rydsim_cli::output::RunManifest;
use rydsim_cli::snapshot;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MEDIUM: &str = "[medium]\nrho = 1.0\ng = 1.0\nomega = 1.0\ndelta = 0.0\ngamma = 1.0\nc6 = 1.0\n";

fn rydsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydsim"))
        .args(args)
        .env_remove("RYDSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_ok(cmd: &str, cfg: &Path, out: &Path) -> RunManifest {
    let o = rydsim(&[cmd, cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        o.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    RunManifest::read(&out.join("manifest.json")).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn negative_omega_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &(MEDIUM.replace("omega = 1.0", "omega = -1") + "[spectrum]\nomega_min = -1\nomega_max = 1\n"),
    );
    let o = rydsim(&["spectrum", cfg.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:4:"), "{err}");
    assert!(err.contains("parameter `omega` = -1: must be > 0"), "{err}");
    assert!(!dir.path().join("out/manifest.json").exists());
}

#[test]
fn misspelled_key_is_rejected_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "typo.toml",
        &(MEDIUM.replace("omega = 1.0", "omga = 1.0") + "[spectrum]\nomega_min = -1\nomega_max = 1\n"),
    );
    let o = rydsim(&["spectrum", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("typo.toml:4: unknown key `medium.omga`; did you mean `omega`?"), "{err}");
}

#[test]
fn spectrum_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        &(MEDIUM.to_string() + "[spectrum]\nomega_min = -2\nomega_max = 2\npoints = 41\n"),
    );
    let out = dir.path().join("out");
    let m = run_ok("spectrum", &cfg, &out);
    assert_eq!(header(&out.join("spectrum.csv")), "omega,re_chi,im_chi,transmission");
    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert_eq!(text.lines().count(), 42);
    // transparency at two-photon resonance
    let centre: Vec<f64> = text.lines().nth(21).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(centre[0], 0.0);
    assert_eq!(centre[3], 1.0);
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["config.toml", "spectrum.csv"]);
    assert_eq!(m.config_hash, m.files[0].sha256);
}

#[test]
fn mc_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "mc.toml",
        &("seed = 11\n".to_string()
            + MEDIUM
            + "[mc]\ndensities = [0.5, 2.0]\nprobe = 0.5\natoms = 150\nchains = 2\nsweeps = 60\n"),
    );
    let a = run_ok("mc", &cfg, &dir.path().join("a"));
    let b = run_ok("mc", &cfg, &dir.path().join("b"));
    assert!(a.same_outputs(&b));
    assert_eq!(a.seed, 11);
    let c = rydsim(&[
        "mc",
        cfg.to_str().unwrap(),
        "--seed",
        "12",
        "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert!(c.status.success());
    let c = RunManifest::read(&dir.path().join("c/manifest.json")).unwrap();
    assert_ne!(a.files[1].sha256, c.files[1].sha256);
    assert!(header(&dir.path().join("a/mc.csv")).starts_with("density,chi_ratio,chi_ratio_stderr,f_bl,f_bl_stderr"));
}

#[test]
fn propagate_snapshots_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[propagate]\nnx = 128\ndx = 0.125\nwaist = 2\npower = 1\ndz = 0.05\nsteps = 20\nsnapshot_every = 10\n";
    let medium = MEDIUM.replace("delta = 0.0", "delta = 10.0").replace("c6 = 1.0", "c6 = -1.0")
        + "c = 1.0\nwavenumber = 5\n";
    let cfg = write_config(dir.path(), "p.toml", &(medium + body));
    let out = dir.path().join("out");
    let m = run_ok("propagate", &cfg, &out);
    let sidecars: Vec<&str> = m
        .files
        .iter()
        .map(|f| f.path.as_str())
        .filter(|p| p.ends_with(".json"))
        .collect();
    assert_eq!(sidecars, ["snapshots/field_000000.json", "snapshots/field_000010.json", "snapshots/field_000020.json"]);
    let power: Vec<Vec<f64>> = fs::read_to_string(out.join("power.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    for (k, s) in [0usize, 10, 20].iter().zip(&sidecars) {
        let (meta, field) = snapshot::read(&out.join(s)).unwrap();
        assert_eq!(meta.step, *k);
        assert_eq!((meta.nx, meta.ny), (128, 128));
        assert!((meta.z - power[*k][0]).abs() < 1e-12);
        assert!((field.power() - power[*k][1]).abs() < 1e-12 * power[*k][1]);
    }
    // every checksum in the manifest matches the file on disk
    for f in &m.files {
        let bytes = fs::read(out.join(&f.path)).unwrap();
        assert_eq!(rydsim_cli::config::sha256_hex(&bytes), f.sha256, "{}", f.path);
    }
}

#[test]
fn failed_propagation_cleans_up() {
    let dir = tempfile::tempdir().unwrap();
    // far too much power for the step: the nonlinear phase check trips
    let body = "[propagate]\nnx = 128\ndx = 0.125\nwaist = 2\npower = 1e6\ndz = 0.05\nsteps = 5\n";
    let medium = MEDIUM.replace("delta = 0.0", "delta = 10.0").replace("c6 = 1.0", "c6 = -1.0") + "c = 1.0\nwavenumber = 5\n";
    let cfg = write_config(dir.path(), "p.toml", &(medium + body));
    let out = dir.path().join("out");
    let o = rydsim(&["propagate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step size"));
    let left: Vec<_> = walk(&out);
    assert!(left.is_empty(), "{left:?}");
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(rd) = fs::read_dir(dir) {
        for e in rd.flatten() {
            let p = e.path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn unnormalized_pulse_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        "[source]\nphotons = 3\npulse = \"table\"\ntimes = [-1, 0, 1]\nvalues = [0, 5, 0]\n",
    );
    let o = rydsim(&["source", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn device_and_quantum_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sw = write_config(dir.path(), "sw.toml", "[switch]\nod_b = [0.5, 1, 2]\nn_in = 5\n");
    run_ok("switch", &sw, &dir.path().join("sw"));
    assert_eq!(header(&dir.path().join("sw/switch.csv")), "od_b,eta,n_out,gain");

    let gate = write_config(dir.path(), "g.toml", "[gate]\nod_b = [10, 20]\ngamma_over_delta = 0.05\n");
    run_ok("gate", &gate, &dir.path().join("g"));
    assert_eq!(header(&dir.path().join("g/gate.csv")), "od_b,phi,eta,fidelity,max_phase");

    let src = write_config(dir.path(), "src.toml", "[source]\nphotons = 4\npulse = \"sech\"\nwidth = 1\n");
    run_ok("source", &src, &dir.path().join("src"));
    assert_eq!(header(&dir.path().join("src/source.csv")), "z,intensity,purity");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("src/summary.json")).unwrap()).unwrap();
    assert!((summary["purity"].as_f64().unwrap() - 4.0 / 7.0).abs() < 1e-6);

    let tp = write_config(
        dir.path(),
        "tp.toml",
        &(MEDIUM.to_string() + "[two_photon]\nod_b = 3\nr_max = 6\nl_tilde = 1\nsteps = 200\nsweep = [0.1, 1]\n"),
    );
    run_ok("two-photon", &tp, &dir.path().join("tp"));
    assert_eq!(header(&dir.path().join("tp/two_photon.csv")), "r,re_ee,im_ee,g2");
    assert_eq!(header(&dir.path().join("tp/g2_sweep.csv")), "od_b,g2_0,width");
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_rydsim"))
        .args(["switch", "missing.toml"])
        .env("RYDSIM_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("RYDSIM_THREADS"));
}
