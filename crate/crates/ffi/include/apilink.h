#ifndef APILINK_H
#define APILINK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApilinkFormat {
  APILINK_FORMAT_RECORDS = 0,
  APILINK_FORMAT_HTML = 1,
} ApilinkFormat;

typedef enum ApilinkStatus {
  APILINK_STATUS_OK = 0,
  APILINK_STATUS_NULL_ARG = 1,
  APILINK_STATUS_INVALID_UTF8 = 2,
  APILINK_STATUS_IO = 3,
  APILINK_STATUS_PARSE = 4,
  APILINK_STATUS_VALIDATION = 5,
  APILINK_STATUS_INTERNAL = 6,
  APILINK_STATUS_PANIC = 7,
} ApilinkStatus;

// A loaded API database.
typedef struct ApilinkDb ApilinkDb;

// A loaded classifier model.
typedef struct ApilinkModel ApilinkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a JSON-lines API database from `path`.
//
// # Safety
// `path` must be null or a valid C string; `out` must be null or writable.
enum ApilinkStatus apilink_db_load(const char *path, struct ApilinkDb **out);

// Parses a JSON-lines API database held in memory.
//
// # Safety
// `text` must be null or a valid C string; `out` must be null or writable.
enum ApilinkStatus apilink_db_from_jsonl(const char *text, struct ApilinkDb **out);

// Number of entries in the database, 0 for null.
//
// # Safety
// `db` must be null or a handle from [`apilink_db_load`].
size_t apilink_db_len(const struct ApilinkDb *db);

// # Safety
// `db` must be null or a handle not yet freed.
void apilink_db_free(struct ApilinkDb *db);

// Loads a classifier model saved by `apilink train`.
//
// # Safety
// `path` must be null or a valid C string; `out` must be null or writable.
enum ApilinkStatus apilink_model_load(const char *path, struct ApilinkModel **out);

// # Safety
// `model` must be null or a handle not yet freed.
void apilink_model_free(struct ApilinkModel *model);

// Resolves one thread document given as JSON and writes either decision
// records (JSON lines) or an HTML page to `out`.
//
// # Safety
// `db` and `model` must be live handles; `thread_json` a valid C string;
// `out` writable. The string stored in `out` belongs to the caller.
enum ApilinkStatus apilink_resolve_thread_json(const struct ApilinkDb *db,
                                               const struct ApilinkModel *model,
                                               const char *thread_json,
                                               enum ApilinkFormat format,
                                               char **out);

// Name similarity between a mention and an API name.
//
// # Safety
// `mention` and `name` must be valid C strings; `out` writable.
enum ApilinkStatus apilink_name_similarity(const char *mention, const char *name, double *out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void apilink_string_free(char *s);

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on the same thread.
const char *apilink_last_error_message(void);

// Library version as a static C string.
const char *apilink_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APILINK_H */
