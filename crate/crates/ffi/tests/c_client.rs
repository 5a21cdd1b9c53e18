//! Compiles a C program against the generated header and the static library,
//! then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "ksearch.h"

#define CHECK(call) do { KsStatus s_ = (call); if (s_ != KS_STATUS_OK) { \
    fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, ks_last_error()); return 1; } } while (0)

int main(void) {
    KsInstance *inst = NULL;
    CHECK(ks_generate_fs(10, 100, 3, 42, &inst));
    uint32_t n = 0, m = 0, k = 0;
    CHECK(ks_instance_shape(inst, &n, &m, &k));
    uint64_t interpretations = 0;
    CHECK(ks_count_interpretations(inst, &interpretations));
    KsSolveResult r;
    CHECK(ks_solve(inst, 7, 0, &r));
    uint32_t sat = 0;
    CHECK(ks_count_satisfied(inst, r.assignment, &sat));
    char *text = NULL;
    CHECK(ks_instance_to_dimacs(inst, &text));
    int header_ok = strncmp(text, "c k 3", 5) == 0 || strstr(text, "p cnf 10 100") != NULL;
    ks_string_free(text);
    ks_instance_free(inst);

    uint32_t p = 0;
    double prob = 0.0;
    CHECK(ks_first_local_max(12, 1, 3.141592653589793, &p, &prob));

    KsInstance *bad = NULL;
    KsStatus s = ks_instance_from_dimacs("p cnf 2 1\n1 7 0\n", &bad);
    printf("n=%u m=%u k=%u sat=%u/%u satisfied=%d header=%d p1=%u bad=%d msg=%d\n",
           n, m, k, sat, m, (int)r.satisfied, header_ok, p, (int)s, ks_last_error() != NULL);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // The test binary lives in <target>/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs_against_the_header() {
    let lib = target_dir().join("libksearch_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "compilation failed");

    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "client failed: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout.trim(), format!("n=10 m=100 k=3 sat=100/100 satisfied=1 header=1 p1=8 bad={} msg=1", 4));
}
