use cmcl_ffi::*;
use std::ffi::CStr;
use std::ptr;

fn gaussianish(n: usize, cx: f64, cy: f64) -> Vec<f64> {
    (0..n)
        .flat_map(|i| {
            let a = i as f64 * 0.61803;
            [cx + 0.3 * a.sin(), cy + 0.3 * (1.7 * a).cos(), 0.1 * a.sin()]
        })
        .collect()
}

fn belief(poses: &[f64], weights: Option<&[f64]>) -> *mut CmclBelief {
    let mut out = ptr::null_mut();
    let w = weights.map_or(ptr::null(), |w| w.as_ptr());
    let s = unsafe { cmcl_belief_new(poses.as_ptr(), w, poses.len() / 3, &mut out) };
    assert_eq!(s, CmclStatus::Ok);
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cmcl_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn belief_round_trip_normalizes_weights() {
    let poses = [0.0, 0.0, 0.0, 1.0, 2.0, 0.5];
    let b = belief(&poses, Some(&[3.0, 1.0]));
    let mut n = 0;
    assert_eq!(unsafe { cmcl_belief_len(b, &mut n) }, CmclStatus::Ok);
    assert_eq!(n, 2);
    let mut buf = [0.0; 8];
    assert_eq!(unsafe { cmcl_belief_particles(b, buf.as_mut_ptr(), 2) }, CmclStatus::Ok);
    assert_eq!(buf, [0.0, 0.0, 0.0, 0.75, 1.0, 2.0, 0.5, 0.25]);
    assert_eq!(
        unsafe { cmcl_belief_particles(b, buf.as_mut_ptr(), 1) },
        CmclStatus::BufferTooSmall
    );
    let mut est = [0.0; 3];
    assert_eq!(unsafe { cmcl_belief_estimate(b, est.as_mut_ptr()) }, CmclStatus::Ok);
    assert!((est[0] - 0.25).abs() < 1e-12 && (est[1] - 0.5).abs() < 1e-12);
    unsafe { cmcl_belief_free(b) };
}

#[test]
fn rejects_bad_input() {
    let mut out = ptr::null_mut();
    let s = unsafe { cmcl_belief_new(ptr::null(), ptr::null(), 1, &mut out) };
    assert_eq!(s, CmclStatus::NullPointer);
    assert!(!last_error().is_empty());
    let poses = [0.0; 3];
    let s = unsafe { cmcl_belief_new(poses.as_ptr(), [0.0].as_ptr(), 1, &mut out) };
    assert_eq!(s, CmclStatus::InvalidArgument);
    let b = belief(&poses, None);
    let mut msg = ptr::null_mut();
    assert_eq!(
        unsafe { cmcl_summarize(b, 1.0, 0.0, 9, 0, &mut msg) },
        CmclStatus::InvalidArgument
    );
    let garbage = [1u8, 2, 3];
    let s = unsafe { cmcl_message_from_bytes(garbage.as_ptr(), garbage.len(), &mut msg) };
    assert_eq!(s, CmclStatus::Decode);
    unsafe {
        cmcl_belief_free(b);
        cmcl_belief_free(ptr::null_mut());
        cmcl_message_free(ptr::null_mut());
    }
}

#[test]
fn every_method_summarizes_and_fuses() {
    let sender = belief(&gaussianish(500, 2.0, 3.0), None);
    for tag in 0..6u8 {
        let mut msg = ptr::null_mut();
        assert_eq!(
            unsafe { cmcl_summarize(sender, 2.0, 0.3, tag, 11, &mut msg) },
            CmclStatus::Ok,
            "{}",
            last_error()
        );
        let mut len = 0;
        assert_eq!(unsafe { cmcl_message_len(msg, &mut len) }, CmclStatus::Ok);
        let mut bytes = vec![0u8; len];
        assert_eq!(
            unsafe { cmcl_message_bytes(msg, bytes.as_mut_ptr(), len) },
            CmclStatus::Ok
        );
        assert_eq!(bytes[..].len(), len);
        let mut copy = ptr::null_mut();
        assert_eq!(
            unsafe { cmcl_message_from_bytes(bytes.as_ptr(), len, &mut copy) },
            CmclStatus::Ok
        );

        let receiver = belief(&gaussianish(400, 3.9, 3.6), None);
        let mut resampled = -1;
        let alpha = if tag == 2 { 0.0 } else { 0.06 };
        let s = unsafe { cmcl_fuse(receiver, copy, alpha, 5, &mut resampled) };
        assert_eq!(s, CmclStatus::Ok, "tag {tag}: {}", last_error());
        assert!(resampled == 0 || resampled == 1);
        let mut buf = vec![0.0; 4 * 400];
        assert_eq!(
            unsafe { cmcl_belief_particles(receiver, buf.as_mut_ptr(), 400) },
            CmclStatus::Ok
        );
        let total: f64 = buf.chunks(4).map(|c| c[3]).sum();
        assert!((total - 1.0).abs() < 1e-9, "tag {tag}: {total}");
        unsafe {
            cmcl_belief_free(receiver);
            cmcl_message_free(copy);
            cmcl_message_free(msg);
        }
    }
    unsafe { cmcl_belief_free(sender) };
}

#[test]
fn summaries_are_deterministic_per_seed() {
    let sender = belief(&gaussianish(300, 0.0, 0.0), None);
    let bytes = |seed| {
        let mut msg = ptr::null_mut();
        unsafe { cmcl_summarize(sender, 1.0, 0.0, 5, seed, &mut msg) };
        let mut len = 0;
        unsafe { cmcl_message_len(msg, &mut len) };
        let mut v = vec![0u8; len];
        unsafe {
            cmcl_message_bytes(msg, v.as_mut_ptr(), len);
            cmcl_message_free(msg);
        }
        v
    };
    assert_eq!(bytes(1), bytes(1));
    unsafe { cmcl_belief_free(sender) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cmcl.h")).unwrap();
    for name in [
        "cmcl_belief_new",
        "cmcl_summarize",
        "cmcl_fuse",
        "cmcl_message_bytes",
        "CMCL_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles a small C program against the generated header and the shared
/// library next to this test binary. Skipped when no C compiler is present.
#[test]
fn c_program_links_and_runs() {
    use std::process::Command;
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let root = env!("CARGO_MANIFEST_DIR");
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libcmcl_ffi.so").exists() {
        eprintln!("shared library not built; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(format!("{root}/tests/c/smoke.c"))
        .arg(format!("-I{root}/include"))
        .arg(format!("-L{}", lib_dir.display()))
        .arg("-lcmcl_ffi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    // Compress++ keeps 8 of 64 points: 18-byte header plus 8 points of 8 bytes.
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "82");
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            std::process::Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
