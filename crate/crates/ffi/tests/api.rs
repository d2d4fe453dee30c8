use std::ffi::{CStr, CString};
use std::ptr;

use fksmap_ffi::*;

fn u64_map(keys: &[u64], values: &[u64]) -> *mut FksU64Map {
    let mut m = ptr::null_mut();
    let st = unsafe { fks_u64_map_build(keys.as_ptr(), values.as_ptr(), keys.len(), 7, &mut m) };
    assert_eq!(st, FksStatus::Ok);
    assert!(!m.is_null());
    m
}

fn str_map(keys: &[&str], values: &[u64]) -> *mut FksStrMap {
    let ptrs: Vec<*const u8> = keys.iter().map(|k| k.as_ptr()).collect();
    let lens: Vec<usize> = keys.iter().map(|k| k.len()).collect();
    let mut m = ptr::null_mut();
    let st = unsafe { fks_str_map_build(ptrs.as_ptr(), lens.as_ptr(), values.as_ptr(), keys.len(), 7, &mut m) };
    assert_eq!(st, FksStatus::Ok);
    m
}

#[test]
fn u64_lookup_member_len() {
    let keys: Vec<u64> = (0..1000).map(|i| i * 7919 + 3).collect();
    let values: Vec<u64> = (0..1000).collect();
    let m = u64_map(&keys, &values);
    unsafe {
        assert_eq!(fks_u64_map_len(m), 1000);
        for (&k, &v) in keys.iter().zip(&values) {
            let mut out = u64::MAX;
            assert_eq!(fks_u64_map_lookup(m, k, &mut out), FksStatus::Ok);
            assert_eq!(out, v);
            assert!(fks_u64_map_member(m, k));
        }
        let mut out = 42;
        assert_eq!(fks_u64_map_lookup(m, 4, &mut out), FksStatus::NotFound);
        assert_eq!(out, 42);
        assert!(!fks_u64_map_member(m, 4));
        assert_eq!(fks_u64_map_lookup(m, keys[5], ptr::null_mut()), FksStatus::Ok);
        fks_u64_map_free(m);
    }
}

#[test]
fn u64_lookup_many() {
    let m = u64_map(&[10, 20, 30], &[1, 2, 3]);
    let needles = [30u64, 11, 10];
    let mut values = [9u64; 3];
    let mut found = [false; 3];
    unsafe {
        let st = fks_u64_map_lookup_many(m, needles.as_ptr(), 3, values.as_mut_ptr(), found.as_mut_ptr());
        assert_eq!(st, FksStatus::Ok);
        fks_u64_map_free(m);
    }
    assert_eq!(values, [3, 0, 1]);
    assert_eq!(found, [true, false, true]);
}

#[test]
fn repeated_keys_keep_first_value() {
    let m = u64_map(&[5, 6, 5], &[1, 2, 3]);
    let mut out = 0;
    unsafe {
        assert_eq!(fks_u64_map_len(m), 2);
        assert_eq!(fks_u64_map_lookup(m, 5, &mut out), FksStatus::Ok);
        fks_u64_map_free(m);
    }
    assert_eq!(out, 1);
}

#[test]
fn string_keys() {
    let keys = ["alpha", "beta", "", "gamma", "alpha"];
    let m = str_map(&keys, &[1, 2, 3, 4, 5]);
    unsafe {
        assert_eq!(fks_str_map_len(m), 4);
        for (k, v) in [("alpha", 1), ("beta", 2), ("", 3), ("gamma", 4)] {
            let mut out = 0;
            assert_eq!(
                fks_str_map_lookup(m, k.as_ptr(), k.len(), &mut out),
                FksStatus::Ok,
                "{k}"
            );
            assert_eq!(out, v);
            assert!(fks_str_map_member(m, k.as_ptr(), k.len()));
        }
        for k in ["alph", "alphaa", "delta", "Beta"] {
            assert_eq!(
                fks_str_map_lookup(m, k.as_ptr(), k.len(), ptr::null_mut()),
                FksStatus::NotFound
            );
            assert!(!fks_str_map_member(m, k.as_ptr(), k.len()));
        }
        fks_str_map_free(m);
    }
}

#[test]
fn error_codes() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            fks_u64_map_build(ptr::null(), ptr::null(), 0, 1, &mut m),
            FksStatus::EmptyKeys
        );
        assert!(m.is_null());
        assert_eq!(
            fks_u64_map_build(ptr::null(), ptr::null(), 3, 1, &mut m),
            FksStatus::NullPointer
        );
        let k = [1u64];
        assert_eq!(
            fks_u64_map_build(k.as_ptr(), k.as_ptr(), 1, 1, ptr::null_mut()),
            FksStatus::NullPointer
        );
        assert_eq!(
            fks_u64_map_lookup(ptr::null(), 1, ptr::null_mut()),
            FksStatus::NullPointer
        );
        assert!(!fks_u64_map_member(ptr::null(), 1));
        assert_eq!(fks_u64_map_len(ptr::null()), 0);
        fks_u64_map_free(ptr::null_mut());
        fks_str_map_free(ptr::null_mut());

        let mut s = ptr::null_mut();
        let missing = CString::new("/nonexistent/dir/map.fks").unwrap();
        assert_eq!(fks_str_map_load(missing.as_ptr(), &mut s), FksStatus::Io);
        assert_eq!(fks_str_map_load(ptr::null(), &mut s), FksStatus::NullPointer);
    }
    let msg = unsafe { CStr::from_ptr(fks_status_message(FksStatus::NotFound)) };
    assert_eq!(msg.to_str().unwrap(), "key not found");
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let upath = CString::new(dir.path().join("u.fks").to_str().unwrap()).unwrap();
    let spath = CString::new(dir.path().join("s.fks").to_str().unwrap()).unwrap();
    unsafe {
        let m = u64_map(&[1, 2, 3], &[10, 20, 30]);
        assert_eq!(fks_u64_map_save(m, upath.as_ptr()), FksStatus::Ok);
        fks_u64_map_free(m);
        let mut back = ptr::null_mut();
        assert_eq!(fks_u64_map_load(upath.as_ptr(), &mut back), FksStatus::Ok);
        let mut out = 0;
        assert_eq!(fks_u64_map_lookup(back, 2, &mut out), FksStatus::Ok);
        assert_eq!(out, 20);
        fks_u64_map_free(back);

        let s = str_map(&["x", "yy"], &[1, 2]);
        assert_eq!(fks_str_map_save(s, spath.as_ptr()), FksStatus::Ok);
        fks_str_map_free(s);
        let mut back = ptr::null_mut();
        assert_eq!(fks_str_map_load(spath.as_ptr(), &mut back), FksStatus::Ok);
        assert!(fks_str_map_member(back, "yy".as_ptr(), 2));
        fks_str_map_free(back);

        // a u64 map file is not a string map
        let mut wrong = ptr::null_mut();
        assert_eq!(fks_str_map_load(upath.as_ptr(), &mut wrong), FksStatus::BadFormat);
        assert!(wrong.is_null());
    }
}
