use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use riscb_ffi::*;

fn last_error() -> String {
    let p = riscb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_config() -> *mut RiscbConfig {
    let toml = CString::new(
        "[run]\ntrials = 5\nschemes = [\"proposed\", \"rps\", \"no_ris\"]\nsweep_values = [1.0, 8.0]\n",
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { riscb_config_from_toml(toml.as_ptr(), &mut cfg) },
        RiscbStatus::Ok
    );
    cfg
}

#[test]
fn run_and_read_rows() {
    let cfg = small_config();
    let mut res = ptr::null_mut();
    unsafe {
        assert_eq!(riscb_run(cfg, &mut res), RiscbStatus::Ok);
        let mut rows = 0usize;
        assert_eq!(riscb_results_row_count(res, &mut rows), RiscbStatus::Ok);
        assert_eq!(rows, 6);

        let mut row = RiscbRateRow::default();
        assert_eq!(riscb_results_rate_row(res, 1, &mut row), RiscbStatus::Ok);
        assert_eq!((row.sweep_value, row.trials), (8.0, 5));
        assert!(row.mean_realized_rate > 0.0);

        let mut buf = [0 as libc::c_char; 16];
        let mut needed = 0usize;
        assert_eq!(
            riscb_results_scheme(res, 2, buf.as_mut_ptr(), buf.len(), &mut needed),
            RiscbStatus::Ok
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "rps");
        assert_eq!(needed, 4);
        assert_eq!(
            riscb_results_scheme(res, 2, buf.as_mut_ptr(), 2, &mut needed),
            RiscbStatus::InvalidArgument
        );

        assert_eq!(
            riscb_results_rate_row(res, 99, &mut row),
            RiscbStatus::InvalidArgument
        );
        assert!(last_error().contains("row 99"));

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("r.csv").to_str().unwrap()).unwrap();
        assert_eq!(riscb_results_write_csv(res, path.as_ptr()), RiscbStatus::Ok);
        let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert!(csv.starts_with("scheme,sweep_var,sweep_value"));
        assert_eq!(csv.lines().count(), 7);

        riscb_results_free(res);
        riscb_config_free(cfg);
    }
}

#[test]
fn config_errors_map_to_status_codes() {
    let mut cfg = ptr::null_mut();
    unsafe {
        let bad = CString::new("[run]\ntrials = 0").unwrap();
        assert_eq!(
            riscb_config_from_toml(bad.as_ptr(), &mut cfg),
            RiscbStatus::Config
        );
        assert!(cfg.is_null());
        assert!(last_error().contains("trials"));

        let name = CString::new("fig9").unwrap();
        assert_eq!(
            riscb_config_from_preset(name.as_ptr(), &mut cfg),
            RiscbStatus::Config
        );
        assert_eq!(
            riscb_config_from_toml(ptr::null(), &mut cfg),
            RiscbStatus::NullPointer
        );
        assert_eq!(
            riscb_config_set_seed(ptr::null_mut(), 1),
            RiscbStatus::NullPointer
        );

        let name = CString::new("fig3a").unwrap();
        assert_eq!(
            riscb_config_from_preset(name.as_ptr(), &mut cfg),
            RiscbStatus::Ok
        );
        // a successful call clears the previous message
        assert!(riscb_last_error_message().is_null());
        assert_eq!(
            riscb_config_set_trials(cfg, 0),
            RiscbStatus::InvalidArgument
        );
        assert_eq!(riscb_config_set_trials(cfg, 3), RiscbStatus::Ok);
        riscb_config_free(cfg);
        riscb_config_free(ptr::null_mut());
    }
}

#[test]
fn results_of_other_kinds_reject_rate_rows() {
    unsafe {
        let toml = CString::new(
            "kind = \"complexity\"\n[run]\nsweep_var = \"n\"\nsweep_values = [20.0, 40.0]\n",
        )
        .unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(
            riscb_config_from_toml(toml.as_ptr(), &mut cfg),
            RiscbStatus::Ok
        );
        let mut res = ptr::null_mut();
        assert_eq!(riscb_run(cfg, &mut res), RiscbStatus::Ok);
        let mut rows = 0usize;
        assert_eq!(riscb_results_row_count(res, &mut rows), RiscbStatus::Ok);
        assert_eq!(rows, 2);
        let mut row = RiscbRateRow::default();
        assert_eq!(
            riscb_results_rate_row(res, 0, &mut row),
            RiscbStatus::InvalidArgument
        );
        riscb_results_free(res);
        riscb_config_free(cfg);
    }
}

#[test]
fn codebook_handle_round_trip() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(riscb_config_default(&mut cfg), RiscbStatus::Ok);
        let mut cb = ptr::null_mut();
        assert_eq!(
            riscb_codebook_env_aware(cfg, 8, 42, &mut cb),
            RiscbStatus::Ok
        );
        let (mut words, mut elements) = (0usize, 0usize);
        assert_eq!(
            riscb_codebook_shape(cb, &mut words, &mut elements),
            RiscbStatus::Ok
        );
        assert_eq!((words, elements), (8, 100));
        let mut all = Vec::new();
        for k in 0..words {
            let mut w = vec![0u16; elements];
            assert_eq!(
                riscb_codebook_word(cb, k, w.as_mut_ptr(), w.len()),
                RiscbStatus::Ok
            );
            assert!(w.iter().all(|&i| i < 2));
            all.push(w);
        }
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 8);
        let mut short = vec![0u16; 3];
        assert_eq!(
            riscb_codebook_word(cb, 0, short.as_mut_ptr(), 3),
            RiscbStatus::InvalidArgument
        );
        assert_eq!(
            riscb_codebook_word(cb, 8, short.as_mut_ptr(), 100),
            RiscbStatus::InvalidArgument
        );
        riscb_codebook_free(cb);

        // N = 1 at b = 1 has only two distinct words
        let toml = CString::new("[system]\nm_antennas = 1\nn_elements = 1\n[geometry]\nn_x = 1\n[run]\nallow_shortfall = false\n").unwrap();
        let mut tiny = ptr::null_mut();
        assert_eq!(
            riscb_config_from_toml(toml.as_ptr(), &mut tiny),
            RiscbStatus::Ok
        );
        assert_eq!(
            riscb_codebook_env_aware(tiny, 3, 1, &mut cb),
            RiscbStatus::InvalidArgument
        );
        assert!(last_error().contains("capacity"));
        riscb_config_free(tiny);
        riscb_config_free(cfg);
    }
}

#[test]
fn bound_and_complexity() {
    unsafe {
        let mut c = RiscbComplexity::default();
        assert_eq!(riscb_complexity(8, 100, 50, 1, 4, &mut c), RiscbStatus::Ok);
        assert_eq!(
            [
                c.ao_estimation,
                c.ao_optimization,
                c.proposed_estimation,
                c.proposed_optimization
            ],
            [1616, 13728, 1600, 2800]
        );
        assert_eq!(
            riscb_complexity(0, 100, 50, 1, 4, &mut c),
            RiscbStatus::InvalidArgument
        );

        let p = RiscbTheoryParams {
            p_d: 1.0,
            beta_r: 1.0,
            beta_g: 1.0,
            n_elements: 100,
            t_words: 7,
            k_r: f64::INFINITY,
        };
        let mut b = 0.0;
        assert_eq!(riscb_prop1_bound(&p, &mut b), RiscbStatus::Ok);
        assert_eq!(b, 10_000.0);
        let bad = RiscbTheoryParams { t_words: 0, ..p };
        assert_eq!(
            riscb_prop1_bound(&bad, &mut b),
            RiscbStatus::InvalidArgument
        );
        assert_eq!(
            riscb_prop1_bound(ptr::null(), &mut b),
            RiscbStatus::NullPointer
        );
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/riscb.h")).unwrap();
    for name in [
        "riscb_last_error_message",
        "riscb_config_default",
        "riscb_config_from_toml",
        "riscb_config_from_preset",
        "riscb_config_free",
        "riscb_run",
        "riscb_results_rate_row",
        "riscb_results_write_csv",
        "riscb_results_free",
        "riscb_codebook_env_aware",
        "riscb_codebook_word",
        "riscb_codebook_free",
        "riscb_prop1_bound",
        "riscb_complexity",
        "typedef struct RiscbConfig RiscbConfig;",
        "RISCB_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Directory holding the static library cargo built next to this test.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = artifact_dir().join("libriscb_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
