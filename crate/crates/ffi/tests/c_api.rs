use std::ffi::{CStr, CString};
use std::ptr;

use posterfuse::net::{save_checkpoint, Mlp};
use posterfuse::vocab::Vocabulary;
use posterfuse_ffi::*;

fn cpath(p: &std::path::Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = pf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(pf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn feature_round_trip_and_small_buffer() {
    let dir = tempfile::tempdir().unwrap();
    let path = cpath(&dir.path().join("a.avec"));
    let values = [1.5f32, -2.0, 0.25];
    unsafe {
        assert_eq!(pf_feature_write(path.as_ptr(), values.as_ptr(), 3), PfStatus::Ok);
        assert!(pf_last_error_message().is_null());

        let mut out = [0f32; 3];
        let mut dim = 0usize;
        assert_eq!(pf_feature_read(path.as_ptr(), out.as_mut_ptr(), 3, &mut dim), PfStatus::Ok);
        assert_eq!((dim, out), (3, values));

        let mut small = [0f32; 2];
        let mut dim = 0usize;
        let s = pf_feature_read(path.as_ptr(), small.as_mut_ptr(), 2, &mut dim);
        assert_eq!(s, PfStatus::BufferTooSmall);
        assert_eq!(dim, 3);
    }
}

#[test]
fn missing_and_corrupt_files_report_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cpath(&dir.path().join("missing.avec"));
    let bad = dir.path().join("bad.avec");
    std::fs::write(&bad, b"NOTMAGIC\x01\x00\x00\x00abcd").unwrap();
    let bad = cpath(&bad);
    let mut out = [0f32; 4];
    let mut dim = 0usize;
    unsafe {
        assert_eq!(pf_feature_read(missing.as_ptr(), out.as_mut_ptr(), 4, &mut dim), PfStatus::Io);
        assert!(last_error().contains("missing.avec"));
        assert_eq!(pf_feature_read(bad.as_ptr(), out.as_mut_ptr(), 4, &mut dim), PfStatus::Format);
        assert!(last_error().contains("magic"));
        assert_eq!(pf_feature_read(ptr::null(), out.as_mut_ptr(), 4, &mut dim), PfStatus::NullPointer);
    }
}

#[test]
fn invalid_utf8_path() {
    let bytes = CString::new(vec![0xffu8, 0xfe]).unwrap();
    let v = [0f32];
    assert_eq!(unsafe { pf_feature_write(bytes.as_ptr(), v.as_ptr(), 1) }, PfStatus::InvalidUtf8);
}

#[test]
fn vocab_encode_and_fuse() {
    let dir = tempfile::tempdir().unwrap();
    let vpath = dir.path().join("v.tsv");
    Vocabulary::from_entries([("vote".to_string(), 9), ("now".to_string(), 4)])
        .unwrap()
        .save(&vpath)
        .unwrap();
    let vpath = cpath(&vpath);
    let words: Vec<CString> = ["VOTE!", "now", "vote", "other"].iter().map(|w| CString::new(*w).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = words.iter().map(|w| w.as_ptr()).collect();

    unsafe {
        let mut vocab = ptr::null_mut();
        assert_eq!(pf_vocab_load(vpath.as_ptr(), &mut vocab), PfStatus::Ok);
        assert_eq!(pf_vocab_len(vocab), 2);
        let mut counts = [0u32; 2];
        assert_eq!(pf_vocab_encode(vocab, ptrs.as_ptr(), ptrs.len(), counts.as_mut_ptr(), 2), PfStatus::Ok);
        assert_eq!(counts, [2, 1]);
        assert_eq!(
            pf_vocab_encode(vocab, ptrs.as_ptr(), ptrs.len(), counts.as_mut_ptr(), 1),
            PfStatus::BufferTooSmall
        );
        pf_vocab_free(vocab);
        pf_vocab_free(ptr::null_mut());

        let a = [0.5f32, -1.0];
        let mut fused = [0f64; 4];
        assert_eq!(pf_fuse(a.as_ptr(), 2, counts.as_ptr(), 2, 0.5, fused.as_mut_ptr(), 4), PfStatus::Ok);
        assert_eq!(fused, [0.5, -1.0, 1.0, 0.5]);
        assert_eq!(
            pf_fuse(a.as_ptr(), 2, counts.as_ptr(), 2, -1.0, fused.as_mut_ptr(), 4),
            PfStatus::InvalidArgument
        );
    }
}

#[test]
fn model_matches_core_forward() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let model = Mlp::init(&[5, 4, 3, 1], 11).unwrap();
    save_checkpoint(&model, &path).unwrap();
    let path = cpath(&path);
    let x = [0.1, -0.4, 2.0, 0.0, 1.3];
    let expected = model.forward(&x).unwrap();

    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(pf_model_load(path.as_ptr(), &mut m), PfStatus::Ok);
        assert_eq!(pf_model_input_dim(m), 5);
        assert_eq!(pf_model_depth(m), 3);
        let (mut z, mut p, mut label) = (0.0, 0.0, 9u8);
        assert_eq!(pf_model_forward(m, x.as_ptr(), 5, &mut z, &mut p, &mut label), PfStatus::Ok);
        assert_eq!(z, expected);
        assert_eq!(p, pf_sigmoid(z));
        assert_eq!(label, u8::from(z >= 0.0));
        assert_eq!(
            pf_model_forward(m, x.as_ptr(), 4, &mut z, ptr::null_mut(), ptr::null_mut()),
            PfStatus::DimensionMismatch
        );
        assert!(last_error().contains("expected 5"));
        pf_model_free(m);
    }
}
