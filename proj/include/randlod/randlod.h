#ifndef RANDLOD_H
#define RANDLOD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RANDLOD_API __declspec(dllexport)
#else
#define RANDLOD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct randlod_config randlod_config;
typedef struct randlod_database randlod_database;
typedef struct randlod_table randlod_table;

/* Codes 1..11 match the library's error categories. */
typedef enum randlod_status {
  RANDLOD_OK = 0,
  RANDLOD_ERR_CONFIG = 1,
  RANDLOD_ERR_DATA = 2,
  RANDLOD_ERR_SOLVER = 3,
  RANDLOD_ERR_NUMERIC = 4,
  RANDLOD_ERR_CAPABILITY = 5,
  RANDLOD_ERR_UNSUPPORTED = 6,
  RANDLOD_ERR_IO = 7,
  RANDLOD_ERR_FORMAT = 8,
  RANDLOD_ERR_VERSION = 9,
  RANDLOD_ERR_CHECKSUM = 10,
  RANDLOD_ERR_TRUNCATED = 11,
  RANDLOD_ERR_ARGUMENT = 12,
  RANDLOD_ERR_INTERNAL = 13
} randlod_status;

typedef enum randlod_run_kind {
  RANDLOD_RUN_MC = 0,
  RANDLOD_RUN_BASELINE = 1,
  RANDLOD_RUN_INDICATOR = 2,
  RANDLOD_RUN_ONED = 3,
  RANDLOD_RUN_TIMING = 4
} randlod_run_kind;

typedef void (*randlod_log_fn)(const char* message, void* user);

RANDLOD_API const char* randlod_version(void);
RANDLOD_API uint32_t randlod_database_format_version(void);
RANDLOD_API const char* randlod_status_name(randlod_status status);
/* Message of the last failed call on this thread; never NULL. */
RANDLOD_API const char* randlod_last_error(void);

RANDLOD_API randlod_status randlod_config_parse(const char* json, randlod_config** out);
RANDLOD_API randlod_status randlod_config_load(const char* path, randlod_config** out);
RANDLOD_API void randlod_config_free(randlod_config* config);
RANDLOD_API randlod_status randlod_config_set_seed(randlod_config* config, uint64_t seed);
RANDLOD_API randlod_status randlod_config_hash(const randlod_config* config, uint64_t* out);
/* Canonical JSON; the pointer stays valid until the config is modified or freed. */
RANDLOD_API const char* randlod_config_json(const randlod_config* config);

RANDLOD_API randlod_status randlod_offline_build(const randlod_config* config, int threads, randlod_log_fn log,
                                                 void* user, randlod_database** out);
RANDLOD_API randlod_status randlod_database_save(const randlod_database* db, const char* path);
RANDLOD_API randlod_status randlod_database_load(const char* path, randlod_database** out);
RANDLOD_API void randlod_database_free(randlod_database* db);
/* Number of defect cells N of the reference patch; the database holds N+1 matrices. */
RANDLOD_API randlod_status randlod_database_count(const randlod_database* db, int* out);

/* Offline-online solution for one sample (p, sample index, config seed).
   Columns: node, x, y, coarse, reference. */
RANDLOD_API randlod_status randlod_solve(const randlod_database* db, const randlod_config* config, double p,
                                         uint64_t sample, int threads, randlod_table** out);

/* db may be NULL: the campaign then builds its own offline database. It is
   ignored by RANDLOD_RUN_ONED and RANDLOD_RUN_TIMING. */
RANDLOD_API randlod_status randlod_run(const randlod_config* config, randlod_run_kind kind, const randlod_database* db,
                                       int threads, randlod_log_fn log, void* user, randlod_table** out);

RANDLOD_API size_t randlod_table_rows(const randlod_table* table);
RANDLOD_API size_t randlod_table_columns(const randlod_table* table);
RANDLOD_API const char* randlod_table_column_name(const randlod_table* table, size_t column);
RANDLOD_API const char* randlod_table_cell(const randlod_table* table, size_t row, size_t column);
RANDLOD_API randlod_status randlod_table_write_csv(const randlod_table* table, const char* path);
RANDLOD_API void randlod_table_free(randlod_table* table);

#ifdef __cplusplus
}
#endif

#endif
