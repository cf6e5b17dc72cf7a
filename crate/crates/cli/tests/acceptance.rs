//! Acceptance run. Prints one PASS/FAIL line per criterion, with the
//! worst residual seen, and fails if any criterion fails.
//!
//! Two criteria are known to fail as stated: the literal C_Z factorization
//! and b_{2,3,−} phase (criterion 6), and the n−1 message count for the
//! Max chain (criterion 9). The corrected forms are reported alongside
//! but do not change the verdict.

use std::path::PathBuf;
use std::process::Command;

// Exit codes, tolerance handling and output of the binary. Kept in this
// test crate so they still run when the acceptance check fails.
mod cli;

use pappa::clifford::{is_clifford, verify_braid_clifford, verify_braid_clifford_corrected, verify_fsclifford1,
    verify_fsclifford1_corrected, verify_sft2};
use pappa::evaluator::parafermion_relations_check;
use pappa::linalg::c;
use pappa::protocols::{bvk_merge_script, build_max_script, teleportation_script};
use pappa::sim::state::QOperator;
use pappa::sim::{sft_gate, QState, SftMethod};
use pappa::verify::{branch_check, run_suite, Suite, SuiteReport, VerifyConfig};
use pappa::make_phase_ring;

/// Identities evaluated in floating point.
const EXACT_TOL: f64 = 1e-9;
/// Entropies go through an eigen solver.
const ENTROPY_TOL: f64 = 1e-8;

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn suite(s: Suite, keys: &[&str]) -> SuiteReport {
    let mut rep = run_suite(s, &VerifyConfig::default()).unwrap();
    rep.checks.retain(|c| keys.iter().any(|k| c.key.contains(k)));
    assert!(!rep.checks.is_empty(), "no checks matched {keys:?}");
    rep
}

fn from_suite(id: u8, name: &'static str, rep: SuiteReport) -> Line {
    let failed: Vec<String> = rep.checks.iter().filter(|c| !c.pass).map(|c| format!("{}={:.3e}", c.key, c.value)).collect();
    let detail = if failed.is_empty() {
        format!("{} checks, max residual {:.3e}", rep.checks.len(), rep.max_residual())
    } else {
        format!("failing {}", failed.join(" "))
    };
    Line { id, name, pass: failed.is_empty(), detail }
}

fn relations() -> Line {
    let keys = [
        "add_charge", "quantum_dimension", "neutrality", "sf1", "zigzag", "para_isotopy", "twisted_product",
        "pauli_pictures", "xy_qyx", "resolution_of_identity", "temperley_lieb", "reidemeister1", "reidemeister2",
        "reidemeister3", "particle_braid", "braid_fourier",
    ];
    let rep = suite(Suite::Relations, &keys);
    let degrees: Vec<bool> = [2, 3, 4, 5].iter().map(|d| rep.checks.iter().any(|c| c.key.starts_with(&format!("d{d}.")))).collect();
    assert!(degrees.iter().all(|&b| b));
    from_suite(1, "planar relations, Reidemeister I-III, particle braid, braid-Fourier", rep)
}

fn parafermions() -> Line {
    let mut worst: f64 = 0.0;
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        for n in 1..=3 {
            worst = worst.max(parafermion_relations_check(&r, n).unwrap());
        }
    }
    Line { id: 2, name: "parafermion algebra", pass: worst < EXACT_TOL, detail: format!("max residual {worst:.3e}") }
}

fn clifford() -> Line {
    let mut bad = vec![];
    let mut worst: f64 = 0.0;
    let mut corrected: f64 = 0.0;
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let s2 = verify_sft2(&r).unwrap();
        for (k, v) in [
            ("fsclifford1", verify_fsclifford1(&r).unwrap()),
            ("sft2_first", s2.first),
            ("sft2_second", s2.second),
            ("sft2_bell", s2.bell),
            ("b23", verify_braid_clifford(&r).unwrap()),
        ] {
            worst = worst.max(v);
            if !(v < EXACT_TOL) {
                bad.push(format!("d{d}.{k}={v:.3e}"));
            }
        }
        corrected = corrected.max(verify_fsclifford1_corrected(&r).unwrap()).max(verify_braid_clifford_corrected(&r).unwrap());
        for n in 1..=3 {
            if !is_clifford(&r, &sft_gate(&r, n, SftMethod::MatrixFormula).unwrap()).unwrap() {
                bad.push(format!("d{d}.n{n}.sft_not_clifford"));
            }
        }
    }
    let r2 = make_phase_ring(2).unwrap();
    let t = pappa::Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (1, 1) => c(0.5f64.sqrt(), 0.5f64.sqrt()),
        _ => c(0.0, 0.0),
    });
    if is_clifford(&r2, &QOperator::square(2, 1, t).unwrap()).unwrap() {
        bad.push("d2.pi8_is_clifford".into());
    }
    let detail = if bad.is_empty() {
        format!("max residual {worst:.3e}")
    } else {
        format!("failing {} (corrected forms max residual {corrected:.3e})", bad.join(" "))
    };
    Line { id: 6, name: "Clifford identities and membership", pass: bad.is_empty(), detail }
}

fn teleportation() -> Line {
    let mut bad = vec![];
    let mut worst: f64 = 0.0;
    for d in [2, 3, 5] {
        let r = make_phase_ring(d).unwrap();
        let s = teleportation_script(&r);
        for seed in 0..4 {
            let input = s.default_input(seed).unwrap();
            let (w, nb) = branch_check(&r, &s, &input).unwrap();
            worst = worst.max(w);
            if nb != d * d {
                bad.push(format!("d{d}.branches={nb}"));
            }
        }
        if (s.edits(), s.cdits()) != (1, 2) {
            bad.push(format!("d{d}.edits={}.cdits={}", s.edits(), s.cdits()));
        }
    }
    if !(worst < EXACT_TOL) {
        bad.push(format!("residual={worst:.3e}"));
    }
    let pass = bad.is_empty();
    let detail = if pass { format!("1 - fidelity max {worst:.3e}, 1 edit, 2 cdits") } else { format!("failing {}", bad.join(" ")) };
    Line { id: 8, name: "teleportation", pass, detail }
}

fn max_construction() -> Line {
    let mut bad = vec![];
    let mut worst: f64 = 0.0;
    for (n, d) in [(3, 2), (3, 3), (4, 2)] {
        let r = make_phase_ring(d).unwrap();
        let s = build_max_script(&r, n).unwrap();
        let empty = QState::from_amps(d, 0, vec![c(1.0, 0.0)]).unwrap();
        worst = worst.max(branch_check(&r, &s, &empty).unwrap().0);
        if s.edits() != n - 1 {
            bad.push(format!("n{n}.d{d}.edits={} want {}", s.edits(), n - 1));
        }
        if s.cdits() != n - 1 {
            bad.push(format!("n{n}.d{d}.cdits={} want {}", s.cdits(), n - 1));
        }
    }
    let sizes: [&[usize]; 11] =
        [&[1, 1], &[1, 2], &[2, 1], &[2, 2], &[1, 3], &[3, 1], &[1, 1, 1], &[1, 1, 2], &[1, 2, 1], &[2, 1, 1], &[1, 1, 1, 1]];
    for d in [2, 3] {
        let r = make_phase_ring(d).unwrap();
        for sz in sizes {
            if d == 3 && sz.iter().sum::<usize>() > 3 {
                continue;
            }
            let s = bvk_merge_script(&r, sz).unwrap();
            let empty = QState::from_amps(d, 0, vec![c(1.0, 0.0)]).unwrap();
            worst = worst.max(branch_check(&r, &s, &empty).unwrap().0);
            if s.cdits() != sz.len() {
                bad.push(format!("bvk{sz:?}.d{d}.cdits={}", s.cdits()));
            }
        }
    }
    if !(worst < EXACT_TOL) {
        bad.push(format!("residual={worst:.3e}"));
    }
    let pass = bad.is_empty();
    let detail = if pass { format!("1 - fidelity max {worst:.3e}") } else { format!("failing {} (1 - fidelity max {worst:.3e})", bad.join(" ")) };
    Line { id: 9, name: "Max construction and merge", pass, detail }
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run_cli(args: &[String]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_pappa")).args(args).env_remove("PAPPA_TOL").output().unwrap();
    let mut bytes = out.stdout;
    bytes.extend(out.stderr);
    (out.status.code(), bytes)
}

fn determinism() -> Line {
    let invocations: Vec<Vec<String>> = vec![
        vec!["protocol".into(), "run".into(), data("teleport.pp"), "--seed".into(), "17".into()],
        vec!["protocol".into(), "branches".into(), data("build_max3.pp")],
        vec!["circuit".into(), "run".into(), data("measure.pc"), "--seed".into(), "5".into(), "--random-input".into()],
        vec!["diagram".into(), "normalize".into(), data("particle_braid.pd")],
        vec!["verify".into(), "all".into(), "--seed".into(), "3".into(), "--jobs".into(), "3".into()],
        vec!["group".into(), "--d".into(), "3".into(), "--n".into(), "1".into()],
    ];
    let mut bad = vec![];
    for args in &invocations {
        let a = run_cli(args);
        let b = run_cli(args);
        if a != b || a.1.is_empty() {
            bad.push(args[..2].join(" "));
        }
    }
    let pass = bad.is_empty();
    let detail = if pass { format!("{} invocations byte-identical", invocations.len()) } else { format!("differs: {}", bad.join(", ")) };
    Line { id: 10, name: "determinism", pass, detail }
}

#[test]
fn acceptance() {
    let lines = vec![
        relations(),
        parafermions(),
        from_suite(3, "SFT braid product vs closed form, 2n rotations", suite(Suite::Sft, &["braid_vs_formula", "rotation_2n"])),
        from_suite(4, "Max and GHZ states", suite(Suite::Entropy, &["sft_zero_is_max", "ghz_from_max", "closed_forms"])),
        {
            let rep = suite(Suite::Entropy, &["singleton_entropy"]);
            assert!(rep.checks.iter().all(|c| c.value < ENTROPY_TOL) == rep.passed());
            from_suite(5, "singleton entropy ln d", rep)
        },
        clifford(),
        from_suite(7, "circuit tricks 1-4", suite(Suite::Tricks, &["trick"])),
        teleportation(),
        max_construction(),
        determinism(),
    ];
    println!();
    for l in &lines {
        println!("{} {:>2} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "criteria failing: {failed:?}");
}
