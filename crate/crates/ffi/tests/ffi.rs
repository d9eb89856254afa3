use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;
use weingarten_ffi::*;

const CONFIG: &str = r#"
[profile]
kind = "cosh"
domain = [0.0, 4.0]

[grid]
n = 1
N = 64

[curvature]
r = 1

[prescription]
form = "radial"
c0 = 1.1752011936438014
eps = 0.1
decay = 0.1
t_minus = 0.5
t_plus = 1.5
"#;

fn problem(text: &str) -> (WwStatus, *mut WwProblem) {
    let text = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    let status = unsafe { ww_problem_from_config(text.as_ptr(), 0, &mut p) };
    (status, p)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ww_last_error_message()) }.to_str().unwrap().to_owned()
}

#[test]
fn solve_round_trip() {
    let (status, p) = problem(CONFIG);
    assert_eq!(status, WwStatus::Ok, "{}", last_error());
    unsafe {
        assert_eq!(ww_problem_nodes(p), 64);
        let mut s = ptr::null_mut();
        assert_eq!(ww_solve(p, &mut s), WwStatus::Ok);
        let n = ww_solution_len(s);
        assert_eq!(n, 64);
        assert!(ww_solution_residual(s) <= 1e-10);
        assert!(ww_solution_steps(s) >= 2);
        assert!(ww_solution_newton_total(s) > 0);
        let mut small = vec![0.0; n - 1];
        assert_eq!(ww_solution_copy(s, small.as_mut_ptr(), small.len()), WwStatus::BufferTooSmall);
        let mut z = vec![0.0; n];
        assert_eq!(ww_solution_copy(s, z.as_mut_ptr(), n), WwStatus::Ok);
        assert!(z.iter().all(|&v| v > 0.5 && v < 1.5));
        let mut passed = 0;
        assert_eq!(ww_verify(p, &mut passed), WwStatus::Ok);
        assert_eq!(passed, 1, "{}", last_error());
        ww_solution_free(s);
        ww_problem_free(p);
    }
}

#[test]
fn errors_map_to_status_and_message() {
    let (status, p) = problem(&CONFIG.replace("t_minus = 0.5", "t_minus = 1.2").replace("t_plus = 1.5", "t_plus = 1.8"));
    assert_eq!(status, WwStatus::Validation);
    assert!(p.is_null());
    assert!(last_error().contains("(a)"), "{}", last_error());

    let (status, _) = problem("not toml [");
    assert_eq!(status, WwStatus::Config);

    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(ww_solve(ptr::null(), &mut out), WwStatus::NullPointer);
        assert_eq!(ww_solution_len(ptr::null()), 0);
        assert!(ww_solution_residual(ptr::null()).is_nan());
        ww_problem_free(ptr::null_mut());
        ww_solution_free(ptr::null_mut());
    }
}

#[test]
fn curvature_function() {
    let mut f = 0.0;
    unsafe {
        assert_eq!(ww_curvature_f(2, 2, [1.0, 4.0].as_ptr(), &mut f), WwStatus::Ok);
        assert!((f - 2.0).abs() <= 1e-15);
        assert_eq!(ww_curvature_f(2, 2, [-1.0, 0.5].as_ptr(), &mut f), WwStatus::Cone);
        assert_eq!(ww_curvature_f(1, 2, [1.0].as_ptr(), &mut f), WwStatus::Config);
    }
    let v = unsafe { CStr::from_ptr(ww_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/weingarten.h")).unwrap();
    for name in [
        "ww_problem_from_config",
        "ww_problem_free",
        "ww_problem_nodes",
        "ww_solve",
        "ww_verify",
        "ww_solution_len",
        "ww_solution_copy",
        "ww_solution_residual",
        "ww_solution_steps",
        "ww_solution_newton_total",
        "ww_solution_free",
        "ww_last_error_message",
        "ww_curvature_f",
        "ww_version",
        "typedef struct WwProblem WwProblem",
        "WW_STATUS_BARRIER_VIOLATION = 12",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libweingarten_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let bin = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("nodes 64"));
}
