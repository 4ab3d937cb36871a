use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fraxion_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fraxion_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let (mut v, mut e) = (0.0, 0.0);
    unsafe {
        assert_eq!(fraxion_ml(0.5, 1.0, 1.0, -1.0, &mut v, &mut e), FraxionStatus::Ok);
        // E_{1/2}(−1) = e·erfc(1)
        assert!((v - 0.427_583_576_155_807).abs() < 1e-14 && e < 1e-10);
        assert_eq!(fraxion_ml(1.0, 1.0, 1.0, -2.0, &mut v, ptr::null_mut()), FraxionStatus::Ok);
        assert!((v - (-2.0f64).exp()).abs() < 1e-14);

        assert_eq!(fraxion_ml_density(0.5, 1.0, &mut v), FraxionStatus::Ok);
        assert!((v - 0.136_606_007_391_947_56).abs() < 1e-14);
        let mut p0 = 0.0;
        assert_eq!(fraxion_counting_probability(0.5, 1, 0, 1.0, &mut p0), FraxionStatus::Ok);
        assert!((p0 - v).abs() < 1e-15);
        assert_eq!(fraxion_renewal_function(0.5, 1, 2.0, &mut v), FraxionStatus::Ok);
        assert!((v - 1.0).abs() < 1e-14);
        assert_eq!(fraxion_waiting_survival(0.5, 1.0, &mut v), FraxionStatus::Ok);
        assert!((v - 0.427_583_576_155_807).abs() < 1e-14);
    }
}

#[test]
fn error_codes() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fraxion_ml_density(1.5, 1.0, &mut v), FraxionStatus::Domain);
        assert!(last_error().contains("domain"));
        assert_eq!(fraxion_counting_probability(0.5, 0, 1, 1.0, &mut v), FraxionStatus::Domain);
        assert_eq!(fraxion_ml_density(0.5, 1.0, ptr::null_mut()), FraxionStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(fraxion_ml(0.5, 1.0, 1.0, -1e6, &mut v, ptr::null_mut()), FraxionStatus::NonConvergence);
        assert_eq!(fraxion_sampler_draw(ptr::null_mut(), &mut v, 1), FraxionStatus::NullPointer);
        assert_eq!(fraxion_solution_len(ptr::null()), 0);
        fraxion_sampler_free(ptr::null_mut());
        fraxion_solution_free(ptr::null_mut());
    }
}

fn draws(kind: FraxionSamplerKind, seed: u64, n: usize) -> Vec<f64> {
    let mut s = ptr::null_mut();
    let mut buf = vec![0.0; n];
    unsafe {
        assert_eq!(fraxion_sampler_new(0.5, kind, seed, 0, &mut s), FraxionStatus::Ok);
        assert_eq!(fraxion_sampler_draw(s, buf.as_mut_ptr(), n / 2), FraxionStatus::Ok);
        assert_eq!(fraxion_sampler_draw(s, buf[n / 2..].as_mut_ptr(), n - n / 2), FraxionStatus::Ok);
        fraxion_sampler_free(s);
    }
    buf
}

#[test]
fn sampler_handles() {
    let a = draws(FraxionSamplerKind::WaitingProduct, 3, 20_000);
    assert_eq!(a, draws(FraxionSamplerKind::WaitingProduct, 3, 20_000));
    assert_ne!(a, draws(FraxionSamplerKind::WaitingProduct, 4, 20_000));
    assert!(a.iter().all(|&x| x > 0.0));
    // P(T > 1) = E_{1/2}(−1)
    for kind in [FraxionSamplerKind::WaitingProduct, FraxionSamplerKind::WaitingDirect] {
        let d = draws(kind, 5, 20_000);
        let p = d.iter().filter(|&&x| x > 1.0).count() as f64 / d.len() as f64;
        assert!((p - 0.427_583_576_155_807).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt(), "{kind:?} {p}");
    }
    // one-sided ½-stable: P(Y ≤ y) = erfc(1/(2√y)); at y = 1, erfc(½)
    let s = draws(FraxionSamplerKind::Stable, 6, 20_000);
    let p = s.iter().filter(|&&x| x <= 1.0).count() as f64 / s.len() as f64;
    assert!((p - 0.479_500_122_186_953_5).abs() < 0.015, "{p}");

    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(fraxion_sampler_new(0.0, FraxionSamplerKind::Stable, 1, 0, &mut h), FraxionStatus::Domain);
    }
    assert!(h.is_null());
}

#[test]
fn solution_handles() {
    let dt = 1e-3;
    let g = vec![1.0; 1001];
    let mut sol = ptr::null_mut();
    for method in [FraxionSolveMethod::Resolvent, FraxionSolveMethod::Stepping] {
        unsafe {
            assert_eq!(
                fraxion_solve_abel(0.5, 1.0, g.as_ptr(), g.len(), dt, 0.0, 1.0, method, &mut sol),
                FraxionStatus::Ok
            );
            let n = fraxion_solution_len(sol);
            assert_eq!(n, 1001);
            let mut f = vec![0.0; n];
            assert_eq!(fraxion_solution_values(sol, f.as_mut_ptr(), n), FraxionStatus::Ok);
            fraxion_solution_free(sol);
            for (j, fj) in f.iter().enumerate() {
                let t = j as f64 * dt;
                let mut exact = 0.0;
                fraxion_ml(0.5, 1.0, 1.0, -t.sqrt(), &mut exact, ptr::null_mut());
                assert!((fj - exact).abs() < 1e-3, "{method:?} t={t}");
            }
        }
    }
    unsafe {
        assert_eq!(
            fraxion_solve_abel(0.5, 1.0, g.as_ptr(), g.len(), -1.0, f64::NAN, f64::NAN, FraxionSolveMethod::Stepping, &mut sol),
            FraxionStatus::Domain
        );
        assert_eq!(
            fraxion_solve_abel(0.5, 1.0, ptr::null(), 3, dt, f64::NAN, f64::NAN, FraxionSolveMethod::Stepping, &mut sol),
            FraxionStatus::NullPointer
        );
    }
}

#[test]
fn header_is_generated() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/fraxion.h")).unwrap();
    for name in [
        "fraxion_ml(",
        "fraxion_sampler_new(",
        "fraxion_sampler_draw(",
        "fraxion_solve_abel(",
        "fraxion_last_error(",
        "typedef struct FraxionSampler FraxionSampler;",
        "FRAXION_STATUS_NULL_POINTER = 7",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // test binaries link the rlib; build the static library explicitly
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let status = Command::new(cargo)
        .args(["build", "--offline", "--release", "-p", "fraxion-ffi", "--lib", "--target-dir"])
        .arg(&target)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let lib = target.join("release/libfraxion_ffi.a");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "fraxion.h"
int main(void) {
    double v, e;
    if (fraxion_ml(0.5, 1.0, 1.0, -1.0, &v, &e) != FRAXION_STATUS_OK) return 1;
    if (fraxion_ml_density(2.0, 1.0, &v) != FRAXION_STATUS_DOMAIN) return 2;
    FraxionSampler *s = NULL;
    if (fraxion_sampler_new(0.5, FRAXION_SAMPLER_KIND_WAITING_DIRECT, 1, 0, &s) != FRAXION_STATUS_OK) return 3;
    double buf[4];
    if (fraxion_sampler_draw(s, buf, 4) != FRAXION_STATUS_OK) return 4;
    fraxion_sampler_free(s);
    printf("%.15f\n", v);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{:?}", out.status);
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - 0.427_583_576_155_807).abs() < 1e-14, "{v}");
}
