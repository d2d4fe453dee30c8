//! C interface to `fksmap`.
//!
//! Two opaque handle types are exported: [`FksU64Map`] for `uint64_t` keys
//! and [`FksStrMap`] for byte-string keys. Both map to `uint64_t` values.
//! Every fallible function returns an [`FksStatus`]; results are written
//! through out-pointers only on `FksStatus::Ok`. Handles are immutable once
//! built and may be shared between threads for reading.

use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::slice;

use fksmap::{BuildError, CodecError, HashMap, Seed, Slice, StrKeys, U64Keys};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FksStatus {
    Ok = 0,
    /// The key is not in the map.
    NotFound = 1,
    /// A required pointer argument was null.
    NullPointer = 2,
    /// An argument was out of range, or a path was not valid UTF-8.
    InvalidArgument = 3,
    /// A map needs at least one key.
    EmptyKeys = 4,
    /// Construction gave up; the keys are probably not distinct.
    ProbableDuplicates = 5,
    /// Reading or writing a file failed.
    Io = 6,
    /// A map file is corrupt, truncated, or holds other key or value types.
    BadFormat = 7,
    /// A bug in the library; the operation was abandoned.
    Internal = 8,
}

/// Map from `uint64_t` keys to `uint64_t` values.
pub struct FksU64Map(HashMap<U64Keys, u64>);

/// Map from byte-string keys to `uint64_t` values.
pub struct FksStrMap(HashMap<StrKeys, u64>);

impl From<BuildError> for FksStatus {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::EmptyKeys => FksStatus::EmptyKeys,
            BuildError::ProbableDuplicates { .. } => FksStatus::ProbableDuplicates,
            BuildError::Key(_) | BuildError::Malformed(_) => FksStatus::InvalidArgument,
        }
    }
}

impl From<CodecError> for FksStatus {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Io(_) => FksStatus::Io,
            _ => FksStatus::BadFormat,
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), FksStatus>) -> FksStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FksStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => FksStatus::Internal,
    }
}

unsafe fn items<'a, T>(p: *const T, n: usize) -> Result<&'a [T], FksStatus> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(FksStatus::NullPointer)
    } else {
        Ok(slice::from_raw_parts(p, n))
    }
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, FksStatus> {
    if p.is_null() {
        return Err(FksStatus::NullPointer);
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| FksStatus::InvalidArgument)?;
    Ok(PathBuf::from(s))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), FksStatus> {
    if out.is_null() {
        return Err(FksStatus::NullPointer);
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

fn write_found(out: *mut u64, v: Option<&u64>) -> Result<(), FksStatus> {
    let v = v.ok_or(FksStatus::NotFound)?;
    if !out.is_null() {
        unsafe { *out = *v };
    }
    Ok(())
}

/// Static description of a status code. Never null; do not free.
#[no_mangle]
pub extern "C" fn fks_status_message(status: FksStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FksStatus::Ok => c"ok",
        FksStatus::NotFound => c"key not found",
        FksStatus::NullPointer => c"null pointer argument",
        FksStatus::InvalidArgument => c"invalid argument",
        FksStatus::EmptyKeys => c"no keys given",
        FksStatus::ProbableDuplicates => c"construction failed; keys are probably not distinct",
        FksStatus::Io => c"i/o error",
        FksStatus::BadFormat => c"malformed map file",
        FksStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Builds a map from `n` parallel keys and values. When a key repeats, its
/// first value is kept. On success `*out` receives a handle to release with
/// `fks_u64_map_free`.
///
/// # Safety
/// `keys` and `values` must each point to `n` readable elements, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_build(
    keys: *const u64,
    values: *const u64,
    n: usize,
    seed: u64,
    out: *mut *mut FksU64Map,
) -> FksStatus {
    guard(|| {
        let keys = items(keys, n)?;
        let values = items(values, n)?;
        let kvs = keys.iter().copied().zip(values.iter().copied()).collect();
        let m = HashMap::from_array_seeded(Seed(seed), (), kvs)?;
        put(out, FksU64Map(m))
    })
}

/// Writes the value for `key` to `*value` (which may be null) or returns
/// `FksStatus::NotFound`.
///
/// # Safety
/// `map` must be a live handle and `value` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_lookup(map: *const FksU64Map, key: u64, value: *mut u64) -> FksStatus {
    guard(|| {
        let m = map.as_ref().ok_or(FksStatus::NullPointer)?;
        write_found(value, m.0.lookup(&(), &key))
    })
}

/// Whether `key` is in the map. False for a null handle.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_member(map: *const FksU64Map, key: u64) -> bool {
    map.as_ref().is_some_and(|m| m.0.member(&(), &key))
}

/// Looks up `n` keys at once. `found[i]` is set for each key and `values[i]`
/// receives its value when found (0 otherwise). Either output may be null.
///
/// # Safety
/// `keys` must point to `n` readable elements; non-null outputs to `n`
/// writable ones.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_lookup_many(
    map: *const FksU64Map,
    keys: *const u64,
    n: usize,
    values: *mut u64,
    found: *mut bool,
) -> FksStatus {
    guard(|| {
        let m = map.as_ref().ok_or(FksStatus::NullPointer)?;
        let keys = items(keys, n)?;
        for (i, r) in m.0.lookup_many(&(), keys).into_iter().enumerate() {
            if !values.is_null() {
                *values.add(i) = r.copied().unwrap_or(0);
            }
            if !found.is_null() {
                *found.add(i) = r.is_some();
            }
        }
        Ok(())
    })
}

/// Number of distinct keys. Zero for a null handle.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_len(map: *const FksU64Map) -> usize {
    map.as_ref().map_or(0, |m| m.0.len())
}

/// Writes the map to the file at `path`.
///
/// # Safety
/// `map` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_save(map: *const FksU64Map, path: *const c_char) -> FksStatus {
    guard(|| {
        let m = map.as_ref().ok_or(FksStatus::NullPointer)?;
        let f = File::create(self::path(path)?).map_err(|_| FksStatus::Io)?;
        Ok(m.0.save(BufWriter::new(f))?)
    })
}

/// Reads a map written by `fks_u64_map_save`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_load(path: *const c_char, out: *mut *mut FksU64Map) -> FksStatus {
    guard(|| {
        let f = File::open(self::path(path)?).map_err(|_| FksStatus::Io)?;
        let m = HashMap::load(BufReader::new(f))?;
        put(out, FksU64Map(m))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fks_u64_map_free(map: *mut FksU64Map) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Builds a string-keyed map. Key `i` is the `key_lens[i]` bytes at
/// `keys[i]`; bytes are copied, so the inputs may be freed afterwards. When a
/// key repeats, its first value is kept.
///
/// # Safety
/// `keys`, `key_lens` and `values` must each point to `n` readable elements,
/// each `keys[i]` to `key_lens[i]` readable bytes, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_build(
    keys: *const *const u8,
    key_lens: *const usize,
    values: *const u64,
    n: usize,
    seed: u64,
    out: *mut *mut FksStrMap,
) -> FksStatus {
    guard(|| {
        let keys = items(keys, n)?;
        let lens = items(key_lens, n)?;
        let values = items(values, n)?;
        let mut ctx = Vec::with_capacity(lens.iter().sum());
        let mut kvs = Vec::with_capacity(n);
        for ((&k, &len), &v) in keys.iter().zip(lens).zip(values) {
            kvs.push((Slice::new(ctx.len(), len), v));
            ctx.extend_from_slice(items(k, len)?);
        }
        let m = HashMap::from_array_seeded(Seed(seed), ctx, kvs)?;
        put(out, FksStrMap(m))
    })
}

/// Writes the value for the `len` bytes at `key` to `*value` (which may be
/// null) or returns `FksStatus::NotFound`.
///
/// # Safety
/// `map` must be a live handle, `key` must point to `len` readable bytes and
/// `value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_lookup(
    map: *const FksStrMap,
    key: *const u8,
    len: usize,
    value: *mut u64,
) -> FksStatus {
    guard(|| {
        let m = map.as_ref().ok_or(FksStatus::NullPointer)?;
        let key = items(key, len)?;
        write_found(value, m.0.lookup(key, &Slice::new(0, len)))
    })
}

/// Whether the `len` bytes at `key` are a key of the map. False for a null
/// handle or key.
///
/// # Safety
/// `map` must be null or a live handle, and `key` null or pointing to `len`
/// readable bytes.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_member(map: *const FksStrMap, key: *const u8, len: usize) -> bool {
    match (map.as_ref(), items(key, len)) {
        (Some(m), Ok(key)) => m.0.member(key, &Slice::new(0, len)),
        _ => false,
    }
}

/// Number of distinct keys. Zero for a null handle.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_len(map: *const FksStrMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.len())
}

/// Writes the map to the file at `path`.
///
/// # Safety
/// `map` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_save(map: *const FksStrMap, path: *const c_char) -> FksStatus {
    guard(|| {
        let m = map.as_ref().ok_or(FksStatus::NullPointer)?;
        let f = File::create(self::path(path)?).map_err(|_| FksStatus::Io)?;
        Ok(m.0.save(BufWriter::new(f))?)
    })
}

/// Reads a map written by `fks_str_map_save`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_load(path: *const c_char, out: *mut *mut FksStrMap) -> FksStatus {
    guard(|| {
        let f = File::open(self::path(path)?).map_err(|_| FksStatus::Io)?;
        let m = HashMap::load(BufReader::new(f))?;
        put(out, FksStrMap(m))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fks_str_map_free(map: *mut FksStrMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}
