#ifndef FKSMAP_H
#define FKSMAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum FksStatus {
  FKS_STATUS_OK = 0,
  // The key is not in the map.
  FKS_STATUS_NOT_FOUND = 1,
  // A required pointer argument was null.
  FKS_STATUS_NULL_POINTER = 2,
  // An argument was out of range, or a path was not valid UTF-8.
  FKS_STATUS_INVALID_ARGUMENT = 3,
  // A map needs at least one key.
  FKS_STATUS_EMPTY_KEYS = 4,
  // Construction gave up; the keys are probably not distinct.
  FKS_STATUS_PROBABLE_DUPLICATES = 5,
  // Reading or writing a file failed.
  FKS_STATUS_IO = 6,
  // A map file is corrupt, truncated, or holds other key or value types.
  FKS_STATUS_BAD_FORMAT = 7,
  // A bug in the library; the operation was abandoned.
  FKS_STATUS_INTERNAL = 8,
} FksStatus;

// Map from byte-string keys to `uint64_t` values.
typedef struct FksStrMap FksStrMap;

// Map from `uint64_t` keys to `uint64_t` values.
typedef struct FksU64Map FksU64Map;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code. Never null; do not free.
const char *fks_status_message(enum FksStatus status);

// Builds a map from `n` parallel keys and values. When a key repeats, its
// first value is kept. On success `*out` receives a handle to release with
// `fks_u64_map_free`.
//
// # Safety
// `keys` and `values` must each point to `n` readable elements, and `out`
// must be writable.
enum FksStatus fks_u64_map_build(const uint64_t *keys,
                                 const uint64_t *values,
                                 size_t n,
                                 uint64_t seed,
                                 struct FksU64Map **out);

// Writes the value for `key` to `*value` (which may be null) or returns
// `FksStatus::NotFound`.
//
// # Safety
// `map` must be a live handle and `value` null or writable.
enum FksStatus fks_u64_map_lookup(const struct FksU64Map *map, uint64_t key, uint64_t *value);

// Whether `key` is in the map. False for a null handle.
//
// # Safety
// `map` must be null or a live handle.
bool fks_u64_map_member(const struct FksU64Map *map, uint64_t key);

// Looks up `n` keys at once. `found[i]` is set for each key and `values[i]`
// receives its value when found (0 otherwise). Either output may be null.
//
// # Safety
// `keys` must point to `n` readable elements; non-null outputs to `n`
// writable ones.
enum FksStatus fks_u64_map_lookup_many(const struct FksU64Map *map,
                                       const uint64_t *keys,
                                       size_t n,
                                       uint64_t *values,
                                       bool *found);

// Number of distinct keys. Zero for a null handle.
//
// # Safety
// `map` must be null or a live handle.
size_t fks_u64_map_len(const struct FksU64Map *map);

// Writes the map to the file at `path`.
//
// # Safety
// `map` must be a live handle and `path` a NUL-terminated string.
enum FksStatus fks_u64_map_save(const struct FksU64Map *map, const char *path);

// Reads a map written by `fks_u64_map_save`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum FksStatus fks_u64_map_load(const char *path, struct FksU64Map **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `map` must be null or a handle not yet freed.
void fks_u64_map_free(struct FksU64Map *map);

// Builds a string-keyed map. Key `i` is the `key_lens[i]` bytes at
// `keys[i]`; bytes are copied, so the inputs may be freed afterwards. When a
// key repeats, its first value is kept.
//
// # Safety
// `keys`, `key_lens` and `values` must each point to `n` readable elements,
// each `keys[i]` to `key_lens[i]` readable bytes, and `out` must be writable.
enum FksStatus fks_str_map_build(const uint8_t *const *keys,
                                 const size_t *key_lens,
                                 const uint64_t *values,
                                 size_t n,
                                 uint64_t seed,
                                 struct FksStrMap **out);

// Writes the value for the `len` bytes at `key` to `*value` (which may be
// null) or returns `FksStatus::NotFound`.
//
// # Safety
// `map` must be a live handle, `key` must point to `len` readable bytes and
// `value` must be null or writable.
enum FksStatus fks_str_map_lookup(const struct FksStrMap *map,
                                  const uint8_t *key,
                                  size_t len,
                                  uint64_t *value);

// Whether the `len` bytes at `key` are a key of the map. False for a null
// handle or key.
//
// # Safety
// `map` must be null or a live handle, and `key` null or pointing to `len`
// readable bytes.
bool fks_str_map_member(const struct FksStrMap *map, const uint8_t *key, size_t len);

// Number of distinct keys. Zero for a null handle.
//
// # Safety
// `map` must be null or a live handle.
size_t fks_str_map_len(const struct FksStrMap *map);

// Writes the map to the file at `path`.
//
// # Safety
// `map` must be a live handle and `path` a NUL-terminated string.
enum FksStatus fks_str_map_save(const struct FksStrMap *map, const char *path);

// Reads a map written by `fks_str_map_save`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum FksStatus fks_str_map_load(const char *path, struct FksStrMap **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `map` must be null or a handle not yet freed.
void fks_str_map_free(struct FksStrMap *map);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FKSMAP_H */
