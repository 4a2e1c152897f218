use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use cutrank_ffi::*;

fn last_error() -> String {
    let p = cr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn knapsack(seed: u64) -> *mut CrInstance {
    let mut inst = ptr::null_mut();
    let rc = unsafe { cr_instance_generate_knapsack(12, 1, 20, 20, seed, &mut inst) };
    assert_eq!(rc, CR_OK);
    inst
}

#[test]
fn generate_write_read_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("k.mip").to_str().unwrap()).unwrap();
    let inst = knapsack(3);
    let (mut rows, mut cols) = (0usize, 0usize);
    assert_eq!(unsafe { cr_instance_size(inst, &mut rows, &mut cols) }, CR_OK);
    assert_eq!(cols, 12);
    assert!(rows >= 1);
    assert_eq!(unsafe { cr_instance_write(inst, path.as_ptr()) }, CR_OK);

    let mut back = ptr::null_mut();
    assert_eq!(unsafe { cr_instance_read(path.as_ptr(), &mut back) }, CR_OK);

    let opts = cr_solve_options_default();
    let mut none = opts;
    none.policy = CR_POLICY_NONE;
    let mut a = std::mem::MaybeUninit::<CrSolveReport>::zeroed();
    let mut b = std::mem::MaybeUninit::<CrSolveReport>::zeroed();
    let mut x = vec![f64::NAN; 12];
    unsafe {
        assert_eq!(cr_solve(inst, ptr::null(), &opts, a.as_mut_ptr(), x.as_mut_ptr(), x.len()), CR_OK);
        assert_eq!(cr_solve(back, ptr::null(), &none, b.as_mut_ptr(), ptr::null_mut(), 0), CR_OK);
    }
    let (a, b) = unsafe { (a.assume_init(), b.assume_init()) };
    assert_eq!(a.status, CR_STATUS_OPTIMAL);
    assert_eq!(a.objective, b.objective);
    assert_eq!(b.cuts_added, 0);
    assert!(a.wall_time.is_nan());
    assert!(x.iter().all(|v| *v == 0.0 || *v == 1.0));
    unsafe {
        cr_instance_free(inst);
        cr_instance_free(back);
    }
}

#[test]
fn model_round_trip_and_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.crnk");
    let params = cutrank::scorer::MlpParams::glorot(5);
    cutrank::scorer::save_model(&params, &file).unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { cr_model_load(path.as_ptr(), &mut model) }, CR_OK);

    let feats: Vec<f64> = (0..CR_NUM_FEATURES).map(|i| i as f64 * 0.1 - 0.5).collect();
    let mut s = -1.0;
    assert_eq!(unsafe { cr_model_score(model, feats.as_ptr(), feats.len(), &mut s) }, CR_OK);
    let want = params.forward(&feats).unwrap().0;
    assert!((s - want).abs() < 1e-15);
    assert_eq!(unsafe { cr_model_score(model, feats.as_ptr(), 3, &mut s) }, CR_ERR_INVALID);
    assert!(last_error().contains("14"));

    let inst = knapsack(8);
    let mut opts = cr_solve_options_default();
    opts.policy = CR_POLICY_CUT_RANKING;
    let mut r = std::mem::MaybeUninit::<CrSolveReport>::zeroed();
    unsafe {
        assert_eq!(cr_solve(inst, ptr::null(), &opts, r.as_mut_ptr(), ptr::null_mut(), 0), CR_ERR_NULL);
        assert_eq!(cr_solve(inst, model, &opts, r.as_mut_ptr(), ptr::null_mut(), 0), CR_OK);
        cr_model_free(model);
        cr_instance_free(inst);
    }
}

#[test]
fn errors_map_to_codes() {
    let mut inst = ptr::null_mut();
    let missing = CString::new("/nonexistent/x.mip").unwrap();
    assert_eq!(unsafe { cr_instance_read(missing.as_ptr(), &mut inst) }, CR_ERR_IO);
    assert!(inst.is_null());
    assert!(last_error().contains("/nonexistent/x.mip"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mip");
    std::fs::write(&bad, "not an instance\n").unwrap();
    let bad = CString::new(bad.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cr_instance_read(bad.as_ptr(), &mut inst) }, CR_ERR_PARSE);

    assert_eq!(unsafe { cr_instance_read(ptr::null(), &mut inst) }, CR_ERR_NULL);
    assert_eq!(unsafe { cr_instance_generate_knapsack(0, 1, 1, 1, 0, &mut inst) }, CR_ERR_INVALID);
    assert_eq!(unsafe { cr_instance_size(ptr::null(), ptr::null_mut(), ptr::null_mut()) }, CR_ERR_NULL);

    let ok = knapsack(1);
    let mut opts = cr_solve_options_default();
    opts.policy = 42;
    let mut r = std::mem::MaybeUninit::<CrSolveReport>::zeroed();
    assert_eq!(unsafe { cr_solve(ok, ptr::null(), &opts, r.as_mut_ptr(), ptr::null_mut(), 0) }, CR_ERR_INVALID);
    assert_eq!(unsafe { cr_instance_size(ok, ptr::null_mut(), ptr::null_mut()) }, CR_OK);
    assert!(cr_last_error_message().is_null());
    unsafe {
        cr_instance_free(ok);
        cr_instance_free(ptr::null_mut());
        cr_model_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cutrank.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in [
        "typedef struct CrInstance CrInstance",
        "typedef struct CrModel CrModel",
        "cr_instance_read",
        "cr_instance_write",
        "cr_instance_free",
        "cr_model_load",
        "cr_model_score",
        "cr_solve(",
        "cr_solve_options_default",
        "cr_last_error_message",
        "#define CR_ERR_PANIC -99",
        "#define CR_NUM_FEATURES 14",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ CrSolveOptions o = cr_solve_options_default(); \
             CrInstance *i = 0; return cr_instance_generate_knapsack(5, 1, 9, 9, o.seed, &i); }}\n"
        ),
    )
    .unwrap();
    let out = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
