#ifndef RETREET_H
#define RETREET_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(RETREET_BUILDING)
#define RETREET_API __attribute__((visibility("default")))
#else
#define RETREET_API
#endif

typedef struct retreet_config retreet_config;
typedef struct retreet_report retreet_report;

typedef enum {
    RETREET_OK = 0,
    RETREET_ERR_NULL = 1,     /* null handle or argument */
    RETREET_ERR_KEY = 2,      /* unknown configuration key */
    RETREET_ERR_VALUE = 3,    /* malformed configuration value */
    RETREET_ERR_COMMAND = 4,  /* unknown command */
    RETREET_ERR_INTERNAL = 5
} retreet_status;

/* Command exit codes, as reported by retreet_report_exit_code. */
#define RETREET_EXIT_OK 0
#define RETREET_EXIT_REFUTED 1
#define RETREET_EXIT_USAGE 2
#define RETREET_EXIT_UNKNOWN 3

RETREET_API const char* retreet_version(void);
RETREET_API const char* retreet_status_string(retreet_status s);
/* Message of the last failing call on this thread. */
RETREET_API const char* retreet_last_error(void);

RETREET_API retreet_status retreet_config_create(retreet_config** out);
RETREET_API void retreet_config_destroy(retreet_config* c);
/*
 * Keys: solver_bin, smt_bin, work_dir, backend (solver|bounded), height,
 * domain ("0,1"), interleaving_cap, bisim_cap, solver_timeout, node_level,
 * stmt_atomic, allow_same_node, allow_deep_loc, slow, format (text|json).
 * Booleans take "0"/"1"/"true"/"false".
 */
RETREET_API retreet_status retreet_config_set(retreet_config* c, const char* key, const char* value);
RETREET_API retreet_status retreet_config_get(const retreet_config* c, const char* key, const char** value);

/* Commands: check, blocks, pathcond, encode-race, encode-equiv, race, equiv,
 * bisim, oracle-race, oracle-equiv, replay, corpus. */
RETREET_API retreet_status retreet_run(const retreet_config* c, const char* command, int argc,
                                       const char* const* argv, retreet_report** out);

RETREET_API void retreet_report_destroy(retreet_report* r);
RETREET_API int retreet_report_exit_code(const retreet_report* r);
RETREET_API const char* retreet_report_verdict(const retreet_report* r);
/* Text or JSON, following the config's format key. */
RETREET_API const char* retreet_report_output(const retreet_report* r);
RETREET_API const char* retreet_report_json(const retreet_report* r);
/* Empty string when the command wrote no witness. */
RETREET_API const char* retreet_report_witness_file(const retreet_report* r);
RETREET_API double retreet_report_seconds(const retreet_report* r);

#ifdef __cplusplus
}
#endif

#endif
