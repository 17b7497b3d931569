/* SPDX-License-Identifier: Apache-2.0 */
#ifndef HLSDBG_HLSDBG_H
#define HLSDBG_HLSDBG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define HLSDBG_API __attribute__((visibility("default")))
#else
#define HLSDBG_API
#endif

/* Status codes. Values 1..34 follow the error names of the wire protocol;
 * hlsdbg_status_name() returns that name. */
typedef enum hlsdbg_status {
  HLSDBG_OK = 0,
  HLSDBG_E_SYNTAX_ERROR,
  HLSDBG_E_EMPTY_PROGRAM,
  HLSDBG_E_NO_MAIN_FUNCTION,
  HLSDBG_E_RECURSION_UNSUPPORTED,
  HLSDBG_E_UNDEFINED_VARIABLE,
  HLSDBG_E_TYPE_MISMATCH,
  HLSDBG_E_ARRAY_BOUNDS_STATIC,
  HLSDBG_E_UNSCHEDULABLE_DESIGN,
  HLSDBG_E_IO_ERROR,
  HLSDBG_E_FORMAT_VERSION_MISMATCH,
  HLSDBG_E_CORRUPT_DATABASE,
  HLSDBG_E_UNKNOWN_STATE,
  HLSDBG_E_UNKNOWN_LINE,
  HLSDBG_E_LINE_HAS_NO_CODE,
  HLSDBG_E_READ_WHILE_RUNNING,
  HLSDBG_E_UNKNOWN_REGISTER,
  HLSDBG_E_UNKNOWN_MEMORY,
  HLSDBG_E_OFFSET_OUT_OF_RANGE,
  HLSDBG_E_CORRUPT_TRACE,
  HLSDBG_E_CYCLE_OUTSIDE_WINDOW,
  HLSDBG_E_OUT_OF_BREAKPOINT_UNITS,
  HLSDBG_E_INVALID_STATE,
  HLSDBG_E_WINDOW_OVERFLOW,
  HLSDBG_E_WINDOW_UNDERFLOW,
  HLSDBG_E_EMPTY_TRACE,
  HLSDBG_E_NONDETERMINISTIC_BACKEND,
  HLSDBG_E_TARGET_BEFORE_RESET,
  HLSDBG_E_UNKNOWN_VARIABLE,
  HLSDBG_E_RANGE_OUTSIDE_WINDOW,
  HLSDBG_E_PORT_IN_USE,
  HLSDBG_E_MALFORMED_REQUEST,
  HLSDBG_E_METHOD_NOT_FOUND,
  HLSDBG_E_INVALID_PARAMS,
  HLSDBG_E_INTERNAL,
  /* Headless runs that did not halt. */
  HLSDBG_E_DEVICE_FAULT,
  HLSDBG_E_TIMEOUT
} hlsdbg_status;

typedef enum hlsdbg_opt_level { HLSDBG_O0 = 0, HLSDBG_O2 = 2 } hlsdbg_opt_level;

typedef struct hlsdbg_config {
  uint32_t trace_control; /* control-flow trace records */
  uint32_t trace_data;    /* data trace entries */
  int32_t breakpoint_units;
  int32_t opt_level; /* hlsdbg_opt_level */
  uint64_t max_cycles; /* per run command */
} hlsdbg_config;

typedef struct hlsdbg_bundle hlsdbg_bundle;
typedef struct hlsdbg_session hlsdbg_session;
typedef struct hlsdbg_server hlsdbg_server;

/* Called synchronously with one event document {"event", "payload"}. The
 * string is only valid during the call. */
typedef void (*hlsdbg_event_fn)(const char* event_json, void* user);

HLSDBG_API const char* hlsdbg_version(void);
HLSDBG_API const char* hlsdbg_status_name(int status);
/* Message of the last failure on this thread; never NULL. */
HLSDBG_API const char* hlsdbg_last_error(void);
/* Source line of the last compile failure on this thread, or 0. */
HLSDBG_API int hlsdbg_last_error_line(void);
/* Frees strings returned through char** out-parameters. */
HLSDBG_API void hlsdbg_string_free(char* s);

HLSDBG_API void hlsdbg_config_default(hlsdbg_config* config);

/* Bundles: a compiled design plus its session settings. */
HLSDBG_API int hlsdbg_bundle_build(const char* path, const char* source_text, const hlsdbg_config* config,
                                   hlsdbg_bundle** out);
HLSDBG_API int hlsdbg_bundle_load(const char* dir, hlsdbg_bundle** out);
HLSDBG_API int hlsdbg_bundle_save(const hlsdbg_bundle* bundle, const char* dir);
HLSDBG_API int hlsdbg_bundle_config(const hlsdbg_bundle* bundle, hlsdbg_config* out);
HLSDBG_API void hlsdbg_bundle_free(hlsdbg_bundle* bundle);

/* Headless run from reset to halt; stores main's result. */
HLSDBG_API int hlsdbg_run(const hlsdbg_bundle* bundle, int32_t* return_value);
/* Headless run, then the trace dump JSON of what the buffers hold. */
HLSDBG_API int hlsdbg_trace_dump(const hlsdbg_bundle* bundle, char** json_out);

/* Sessions. A session is driven from one thread at a time, except for
 * hlsdbg_session_request_pause which is safe from any thread. */
HLSDBG_API int hlsdbg_session_open(const hlsdbg_bundle* bundle, hlsdbg_session** out);
/* Replay-only session over a trace dump taken from the same bundle. */
HLSDBG_API int hlsdbg_session_open_trace(const hlsdbg_bundle* bundle, const char* trace_json, hlsdbg_session** out);
HLSDBG_API void hlsdbg_session_close(hlsdbg_session* session);
/* One protocol request line in, one response document out. Protocol errors
 * are reported inside the response; the return value covers API misuse. */
HLSDBG_API int hlsdbg_session_request(hlsdbg_session* session, const char* request_json, char** response_json);
HLSDBG_API int hlsdbg_session_set_event_callback(hlsdbg_session* session, hlsdbg_event_fn fn, void* user);
HLSDBG_API int hlsdbg_session_request_pause(hlsdbg_session* session);
/* One REPL command; *done becomes nonzero after quit. */
HLSDBG_API int hlsdbg_session_repl(hlsdbg_session* session, const char* line, char** output, int* done);

/* NDJSON-over-TCP server on a session; port 0 picks a free port. */
HLSDBG_API int hlsdbg_server_create(hlsdbg_session* session, uint16_t port, hlsdbg_server** out);
HLSDBG_API uint16_t hlsdbg_server_port(const hlsdbg_server* server);
/* Blocks until a client sends shutdown or hlsdbg_server_stop is called. */
HLSDBG_API int hlsdbg_server_serve(hlsdbg_server* server);
HLSDBG_API void hlsdbg_server_stop(hlsdbg_server* server);
HLSDBG_API void hlsdbg_server_free(hlsdbg_server* server);

#ifdef __cplusplus
}
#endif

#endif /* HLSDBG_HLSDBG_H */
