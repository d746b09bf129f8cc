use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;
use std::sync::OnceLock;

use playerank_ffi::*;

struct Handle(*mut PrEngine);
unsafe impl Send for Handle {}
unsafe impl Sync for Handle {}

fn engine() -> *const PrEngine {
    static ENGINE: OnceLock<Handle> = OnceLock::new();
    ENGINE
        .get_or_init(|| {
            let mut e = ptr::null_mut();
            assert_eq!(unsafe { pr_engine_demo(60, 3, &mut e) }, PrStatus::Ok, "{}", last_error());
            Handle(e)
        })
        .0
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pr_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(pr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_arguments_are_reported() {
    assert_eq!(unsafe { pr_engine_demo(10, 1, ptr::null_mut()) }, PrStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut r = 0.0;
    let mut m = 0;
    assert_eq!(unsafe { pr_engine_player_rating(ptr::null(), 1, &mut r, &mut m) }, PrStatus::NullPointer);
    unsafe { pr_engine_free(ptr::null_mut()) };
}

#[test]
fn missing_files_are_io_errors() {
    let s = CString::new("/nonexistent/store.json").unwrap();
    let m = CString::new("/nonexistent/model.txt").unwrap();
    let mut e = ptr::null_mut();
    let status = unsafe { pr_engine_open(s.as_ptr(), m.as_ptr(), ptr::null(), &mut e) };
    assert_eq!(status, PrStatus::IoError);
    assert!(e.is_null());
    assert!(last_error().starts_with("io_error"));
}

#[test]
fn search_returns_ordered_hits() {
    let e = engine();
    let (mut k, mut rows, mut cols) = (0, 0, 0);
    assert_eq!(unsafe { pr_engine_info(e, &mut k, &mut rows, &mut cols) }, PrStatus::Ok);
    assert!(k >= 2);
    let zones: Vec<u32> = (0..rows * cols).collect();
    let mut hits = vec![PrSearchHit { player_id: 0, z: 0.0, s: 0.0, r_bar: 0.0 }; 16];
    let mut written = 0;
    let status =
        unsafe { pr_engine_search(e, zones.as_ptr(), zones.len(), hits.as_mut_ptr(), hits.len(), &mut written) };
    assert_eq!(status, PrStatus::Ok, "{}", last_error());
    assert!(written > 0 && written <= 16);
    for h in &hits[..written] {
        assert!((h.s - 1.0).abs() < 1e-12);
        assert!((h.z - h.r_bar).abs() < 1e-12);
    }
    assert!(hits[..written].windows(2).all(|w| w[0].z >= w[1].z));

    let (mut r, mut m) = (0.0, 0);
    let top = hits[0].player_id;
    assert_eq!(unsafe { pr_engine_player_rating(e, top, &mut r, &mut m) }, PrStatus::Ok);
    assert_eq!(r, hits[0].r_bar);
    assert_eq!(unsafe { pr_engine_player_rating(e, 1, &mut r, &mut m) }, PrStatus::NotFound);
}

#[test]
fn empty_and_out_of_range_queries_fail() {
    let e = engine();
    let mut hits = [PrSearchHit { player_id: 0, z: 0.0, s: 0.0, r_bar: 0.0 }; 1];
    let mut written = 0;
    let zones = [100_000u32];
    let status = unsafe { pr_engine_search(e, zones.as_ptr(), 1, hits.as_mut_ptr(), 1, &mut written) };
    assert_eq!(status, PrStatus::InvalidArgument);
    let status = unsafe { pr_engine_search(e, zones.as_ptr(), 0, hits.as_mut_ptr(), 1, &mut written) };
    assert_eq!(status, PrStatus::InvalidArgument);
}

#[test]
fn rating_and_versatility_helpers() {
    let w = [0.5, -0.25, 1.0, -0.75];
    let mut r = 0.0;
    assert_eq!(unsafe { pr_rate_values([1.0, 0.0, 1.0, 0.0].as_ptr(), w.as_ptr(), 4, &mut r) }, PrStatus::Ok);
    assert!((r - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { pr_rate_values([2.0, 0.0, 0.0, 0.0].as_ptr(), w.as_ptr(), 4, &mut r) }, PrStatus::InvalidArgument);

    let uniform: Vec<u32> = (0..8).collect();
    let mut v = 0.0;
    assert_eq!(unsafe { pr_versatility(uniform.as_ptr(), 8, 8, &mut v) }, PrStatus::Ok);
    assert!((v - 1.0).abs() < 1e-9);
    assert_eq!(unsafe { pr_versatility([3u32; 5].as_ptr(), 5, 8, &mut v) }, PrStatus::Ok);
    assert_eq!(v, 0.0);
    assert_eq!(unsafe { pr_versatility([9u32].as_ptr(), 1, 8, &mut v) }, PrStatus::InvalidArgument);
}

fn c_compiler() -> Option<String> {
    ["cc", "gcc", "clang"].into_iter().map(String::from).find(|c| Command::new(c).arg("--version").output().is_ok())
}

fn header_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = c_compiler() else {
        eprintln!("no C compiler found; skipping header check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_against_the_static_library() {
    let Some(cc) = c_compiler() else { return };
    // target/<profile>/deps/abi-<hash> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(|p| p.parent()).map(|p| p.join("libplayerank_ffi.a"));
    let Some(lib) = lib.filter(|l| l.exists()) else {
        eprintln!("static library not found next to the test binary; skipping link check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    let bin = dir.path().join("check");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "playerank.h"

int main(void) {
    double w[3] = {1.0, -1.0, 0.5};
    double v[3] = {1.0, 0.0, 1.0};
    double r = 0.0;
    if (pr_rate_values(v, w, 3, &r) != PR_STATUS_OK || fabs(r - 1.0) > 1e-12) {
        printf("rate failed\n");
        return 1;
    }
    uint32_t roles[2] = {0, 1};
    double ver = 0.0;
    if (pr_versatility(roles, 2, 2, &ver) != PR_STATUS_OK || fabs(ver - 1.0) > 1e-9) {
        printf("versatility failed\n");
        return 1;
    }
    PrEngine *e = NULL;
    if (pr_engine_open(NULL, NULL, NULL, &e) != PR_STATUS_NULL_POINTER || pr_last_error()[0] == '\0') {
        printf("null check failed\n");
        return 1;
    }
    pr_engine_free(e);
    printf("ok\n");
    return 0;
}
"#;
