use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "gl2modp.h"

int main(void) {
    Gl2Field *f = NULL;
    Gl2HModule *m = NULL;
    char *report = NULL;
    if (gl2_field_new(3, 1, &f) != GL2_STATUS_OK) return 1;
    if (gl2_hmodule_make_m_gamma(f, 1, 1, 1, &m) != GL2_STATUS_OK) return 2;
    if (gl2_hmodule_dim(m) != 2) return 3;
    if (gl2_hmodule_check_relations(m) != GL2_STATUS_OK) return 4;
    if (gl2_run_command("supermod", 3, 1, 0, false, &report) != GL2_STATUS_OK) return 5;
    if (strstr(report, "\"schema\":\"v1\"") == NULL) return 6;
    if (gl2_field_new(4, 1, &f) != GL2_STATUS_INVALID_ARGUMENT) return 7;
    if (strlen(gl2_last_error_message()) == 0) return 8;
    gl2_string_free(report);
    gl2_hmodule_free(m);
    gl2_field_free(f);
    puts("ok");
    return 0;
}
"#;

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn c_program_links_against_static_library() {
    if !have("cc") {
        eprintln!("cc not found; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("gl2modp.h").exists());
    let target = manifest.join("../../target");
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let lib = target.join(profile).join("libgl2modp_ffi.a");
    let status = Command::new("cargo")
        .args(["build", "-q", "-p", "gl2modp-ffi"])
        .args(if profile == "release" { &["--release"][..] } else { &[][..] })
        .status()
        .expect("cargo runs");
    assert!(status.success());
    let dir = std::env::temp_dir().join(format!("gl2modp-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
    std::fs::remove_dir_all(dir).ok();
}
