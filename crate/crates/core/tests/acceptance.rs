//! One line per acceptance criterion; all thirteen must pass.

use std::process::Command;

use fraxion::cli::verify::{run_suite, Suite, VerifyOptions};

fn binary_output(threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_fraxion"))
        .args(["simulate", "--kind", "waiting", "--alpha", "0.5", "--n", "100000", "--seed", "11"])
        .env("FRAXION_THREADS", threads)
        .output()
        .unwrap();
    assert!(out.status.success());
    out.stdout
}

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for suite in Suite::EACH {
        let report = run_suite(suite, &opts);
        let mut line = report.summary_line();
        let mut pass = report.pass;
        if suite == Suite::Determinism {
            let same = binary_output("1") == binary_output("8") && binary_output("1") == binary_output("1");
            line.push_str(if same { "; binary 1 vs 8 threads identical" } else { "; binary output differs by thread count" });
            pass &= same;
        }
        println!("{line}");
        if !pass {
            failed.push(report.criterion);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
