#ifndef PUSHPLACE_H
#define PUSHPLACE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PpStatus {
  PP_STATUS_OK = 0,
  PP_STATUS_NULL_POINTER = 1,
  PP_STATUS_INVALID_UTF8 = 2,
  PP_STATUS_PARSE_ERROR = 3,
  PP_STATUS_INVALID_INPUT = 4,
  PP_STATUS_PLANNING_FAILED = 5,
  PP_STATUS_PANIC = 6,
} PpStatus;

/**
 * A plan for the scene it was computed from.
 */
typedef struct PpPlan PpPlan;

/**
 * Outcome of a closed-loop execution.
 */
typedef struct PpReport PpReport;

/**
 * A validated scene.
 */
typedef struct PpScene PpScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *pp_version(void);

/**
 * Copy of the calling thread's last error message, or NULL if the last
 * call succeeded. Free with `pp_string_free`.
 */
char *pp_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pp_string_free(char *s);

/**
 * Parses and validates a scene from JSON.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum PpStatus pp_scene_from_json(const char *json, struct PpScene **out);

/**
 * # Safety
 * `scene` must come from this library and not have been freed. NULL is ignored.
 */
void pp_scene_free(struct PpScene *scene);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_scene_len(const struct PpScene *scene, size_t *out);

/**
 * Number of objects within tolerance of their goal.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_scene_satisfied(const struct PpScene *scene, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_scene_to_json(const struct PpScene *scene, char **out);

/**
 * SVG drawing of the scene with goals and the default scale.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_scene_svg(const struct PpScene *scene, char **out);

/**
 * Plans `scene`. `config_json` is a planner config or NULL for defaults.
 * Returns `PP_STATUS_PLANNING_FAILED` when the budget runs out first.
 *
 * # Safety
 * Pointers must be valid; `config_json` may be NULL.
 */
enum PpStatus pp_plan(const struct PpScene *scene, const char *config_json, struct PpPlan **out);

/**
 * # Safety
 * `plan` must come from this library and not have been freed. NULL is ignored.
 */
void pp_plan_free(struct PpPlan *plan);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_plan_len(const struct PpPlan *plan, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_plan_total_cost(const struct PpPlan *plan, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_plan_to_json(const struct PpPlan *plan, char **out);

/**
 * Replays `plan` from `scene` in the planner model and returns the final scene.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_scene_apply_plan(const struct PpScene *scene,
                                  const struct PpPlan *plan,
                                  struct PpScene **out);

/**
 * Closed-loop execution through the simulator. `config_json` is an
 * executor config or NULL for defaults. A trial that ends short of the
 * goal still returns `PP_STATUS_OK`; inspect the report.
 *
 * # Safety
 * Pointers must be valid; `config_json` may be NULL.
 */
enum PpStatus pp_execute(const struct PpScene *scene,
                         const char *config_json,
                         uint64_t seed,
                         struct PpReport **out);

/**
 * # Safety
 * `report` must come from this library and not have been freed. NULL is ignored.
 */
void pp_report_free(struct PpReport *report);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_report_success_rate(const struct PpReport *report, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_report_total_actions(const struct PpReport *report, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PpStatus pp_report_to_json(const struct PpReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUSHPLACE_H */
