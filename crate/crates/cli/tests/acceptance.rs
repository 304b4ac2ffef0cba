//! Acceptance criteria 1 to 11. Prints one line per criterion and exits
//! nonzero if any of them fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use genfam::{run, CheckRecord, Suite, SuiteConfig, VerificationReport};

/// Checks whose id equals `id`, or starts with it when it ends in `.`.
struct Need {
    id: &'static str,
    min_samples: usize,
    tolerance: f64,
}

const fn need(id: &'static str, min_samples: usize, tolerance: f64) -> Need {
    Need { id, min_samples, tolerance }
}

fn matching<'a>(report: &'a VerificationReport, id: &str) -> Vec<&'a CheckRecord> {
    report
        .checks
        .iter()
        .filter(|c| if id.ends_with('.') { c.id.starts_with(id) } else { c.id == id })
        .collect()
}

/// `Ok(summary)` or `Err(reason)` for a set of requirements.
fn evaluate(report: &VerificationReport, needs: &[Need]) -> Result<String, String> {
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for n in needs {
        let found = matching(report, n.id);
        if found.is_empty() {
            return Err(format!("no check `{}`", n.id));
        }
        for c in found {
            if c.samples < n.min_samples {
                return Err(format!("{} ran {} samples, need {}", c.id, c.samples, n.min_samples));
            }
            if c.tolerance != n.tolerance {
                return Err(format!("{} uses tolerance {:e}, need {:e}", c.id, c.tolerance, n.tolerance));
            }
            if !c.passed {
                return Err(format!("{} residual {:e} > {:e}, witness {:?}", c.id, c.max_residual, c.tolerance, c.witness));
            }
            if n.tolerance > 0.0 {
                worst = worst.max(c.max_residual / n.tolerance);
            }
            count += 1;
        }
    }
    Ok(format!("{count} checks, worst residual/tolerance {worst:.1e}"))
}

fn suite(s: Suite) -> VerificationReport {
    run(&SuiteConfig { suite: s, ..SuiteConfig::default() }).expect("default configuration is valid")
}

fn run_cli(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_genfam")).args(args).output().expect("binary runs");
    (out.status.code(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn cli_contract(dir: &Path) -> Result<String, String> {
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let c = dir.join("c.json");
    for path in [&a, &b] {
        let (code, err) = run_cli(&["verify", "--samples", "20", "--seed", "42", "--out", path.to_str().unwrap()]);
        if code != Some(0) {
            return Err(format!("default run exited with {code:?}: {err}"));
        }
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    if ra != rb {
        return Err("reports under a fixed seed differ".into());
    }
    let (code, _) = run_cli(&["verify", "--suite", "particle", "--tol", "1e-30", "--out", c.to_str().unwrap()]);
    if code != Some(1) {
        return Err(format!("failing-tolerance run exited with {code:?}, expected 1"));
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&c).unwrap()).map_err(|e| e.to_string())?;
    let failed = report["checks"]
        .as_array()
        .ok_or("report has no checks")?
        .iter()
        .filter(|c| c["passed"] == false)
        .collect::<Vec<_>>();
    if failed.is_empty() || failed.iter().any(|c| c["witness"].is_null()) {
        return Err("failing-tolerance report lacks failed checks with witnesses".into());
    }
    if report["summary"]["failed"].as_u64() != Some(failed.len() as u64) {
        return Err("summary disagrees with the records".into());
    }
    let (code, _) = run_cli(&["verify", "--dim", "1"]);
    if code != Some(2) {
        return Err(format!("invalid configuration exited with {code:?}, expected 2"));
    }
    Ok(format!("{} identical bytes, {} failures at tolerance 1e-30", ra.len(), failed.len()))
}

fn main() -> ExitCode {
    let bundles = suite(Suite::Bundles);
    let families = suite(Suite::Families);
    let legendre = suite(Suite::Legendre);
    let homogeneity = suite(Suite::Homogeneity);
    let particle = suite(Suite::Particle);
    let optics = suite(Suite::Optics);
    let dir = tempfile::tempdir().expect("temporary directory");

    let results: Vec<(&str, Result<String, String>)> = vec![
        (
            "pairing identities",
            evaluate(&bundles, &[need("bundles.alpha_pairing", 1000, 1e-12), need("bundles.beta_pairing", 1000, 1e-12)]),
        ),
        (
            "kappa involution and conjugation",
            evaluate(
                &bundles,
                &[
                    need("bundles.kappa_involution", 1000, 1e-12),
                    need("bundles.hat_kappa_scaling", 1000, 1e-12),
                    need("bundles.alpha_beta_inverse", 1000, 1e-12),
                ],
            ),
        ),
        ("gradient checks", evaluate(&families, &[need("families.gradient.", 100, 1e-6)])),
        ("particle membership equivalence", evaluate(&particle, &[need("particle.dynamics.lagrangian", 500, 0.0)])),
        (
            "Legendre transform preserves dynamics",
            evaluate(
                &particle,
                &[need("particle.dynamics.hamiltonian_full", 500, 0.0), need("particle.dynamics.hamiltonian_reduced", 500, 0.0)],
            ),
        ),
        (
            "particle reduction chain",
            evaluate(
                &particle,
                &[
                    need("particle.reduced_values", 500, 1e-10),
                    need("particle.minus_branch.stationarity", 500, 0.0),
                    need("particle.minus_branch.members", 500, 0.0),
                    need("particle.dirac.values", 500, 1e-10),
                    need("particle.dirac.contains_dynamics", 500, 0.0),
                    need("particle.dirac.strict_witness", 1, 0.0),
                ],
            ),
        ),
        (
            "particle round trip",
            evaluate(&particle, &[need("particle.round_trip", 200, 1e-9), need("particle.round_trip.spacelike", 1, 0.0)]),
        ),
        (
            "geometric optics",
            evaluate(
                &optics,
                &[
                    need("optics.dynamics.", 500, 0.0),
                    need("optics.reduced_values", 500, 1e-10),
                    need("optics.round_trip", 200, 1e-10),
                ],
            ),
        ),
        (
            "Legendre relations",
            evaluate(
                &legendre,
                &[
                    need("legendre.lambda2.particle", 400, 0.0),
                    need("legendre.lambda1.optics", 400, 0.0),
                    need("legendre.lambda2.optics", 400, 0.0),
                    need("legendre.omega1.optics", 400, 0.0),
                    need("legendre.omega2_transpose.", 400, 0.0),
                ],
            ),
        ),
        (
            "homogeneity",
            evaluate(
                &homogeneity,
                &[
                    need("homogeneity.family.optics.", 100, 1e-10),
                    need("homogeneity.family.particle.", 100, 1e-10),
                    need("homogeneity.critical_set.", 100, 1e-10),
                    need("homogeneity.dynamics.", 100, 0.0),
                    need("homogeneity.graph.", 100, 0.0),
                    need("homogeneity.control.degree_two", 100, 0.0),
                    need("homogeneity.control.critical_set", 100, 0.0),
                ],
            ),
        ),
        ("CLI determinism and exit status", cli_contract(dir.path())),
    ];

    let mut all = true;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                all = false;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
