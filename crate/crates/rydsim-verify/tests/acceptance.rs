//! Acceptance suite: one PASS/FAIL line per criterion, with the individual
//! checks and notes underneath. Criteria 1–9 come from the first of the two
//! passes made by `rydsim verify`; criterion 10 compares the two passes.

use rydsim_cli::RunManifest;
use rydsim_verify::report::{Check, CriterionReport};
use std::process::ExitCode;

const SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let outcome = match rydsim_cli::verify(SEED, dir.path(), |r| println!("{}", r.detail())) {
        Ok(o) => o,
        Err(e) => {
            println!("acceptance suite did not run: {e}");
            return ExitCode::FAILURE;
        }
    };

    let mut det = CriterionReport::new(10, "determinism of rydsim verify");
    let [a, b] = &outcome.manifests;
    det.push(Check::flag("manifests agree apart from timestamps", a.same_outputs(b)));
    let on_disk: Vec<RunManifest> = ["run1", "run2"]
        .iter()
        .map(|r| RunManifest::read(&dir.path().join(r).join("manifest.json")).expect("manifest on disk"))
        .collect();
    det.push(Check::flag("manifests on disk match the returned ones", &on_disk[0] == a && &on_disk[1] == b));
    let reports: Vec<Vec<u8>> = ["run1", "run2"]
        .iter()
        .map(|r| std::fs::read(dir.path().join(r).join("report.txt")).expect("report on disk"))
        .collect();
    det.push(Check::flag("report files are byte-identical", reports[0] == reports[1]));
    det.note(format!("seed {SEED}; report sha256 {}", a.files[0].sha256));
    println!("{}", det.detail());

    let mut all = outcome.reports.clone();
    all.push(det);
    println!("\nsummary");
    for r in &all {
        println!("{}", r.line());
    }
    let failed = all.iter().filter(|r| !r.passed()).count();
    println!("{} of {} criteria passed", all.len() - failed, all.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
