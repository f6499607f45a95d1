//! C ABI over the planner, simulator-backed executor and renderer.
//!
//! Objects cross the boundary as opaque handles; structured data crosses as
//! UTF-8 JSON in the same formats the command-line tool reads and writes.
//! Every function returns a [`PpStatus`]; on failure a message is kept per
//! thread and can be fetched with [`pp_last_error`]. Strings returned by the
//! library are owned by the caller and released with [`pp_string_free`].
//! Panics never unwind into C; they are reported as `PP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pushplace::executor::{execute_with, ExecutionReport, ExecutorConfig};
use pushplace::planner::{plan_with_stats, Plan, PlannerConfig};
use pushplace::render::{scene_svg, RenderStyle};
use pushplace::Scene;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInput = 4,
    PlanningFailed = 5,
    Panic = 6,
}

/// A validated scene.
pub struct PpScene(Scene);

/// A plan for the scene it was computed from.
pub struct PpPlan(Plan);

/// Outcome of a closed-loop execution.
pub struct PpReport(ExecutionReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (PpStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PpStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((PpStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (PpStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn read_opt_json<T: serde::de::DeserializeOwned + Default>(p: *const c_char, what: &str) -> Result<T, Failure> {
    if p.is_null() {
        return Ok(T::default());
    }
    let text = read_str(p, what)?;
    pushplace::cli::parse_json(text).map_err(|m| (PpStatus::ParseError, format!("{what}: {m}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (PpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| (PpStatus::NullPointer, format!("{what} is null")))
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| (PpStatus::InvalidInput, e.to_string()))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<*mut c_char, Failure> {
    let s = serde_json::to_string(v).map_err(|e| (PpStatus::InvalidInput, e.to_string()))?;
    to_c_string(s)
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn pp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the calling thread's last error message, or NULL if the last
/// call succeeded. Free with `pp_string_free`.
#[no_mangle]
pub extern "C" fn pp_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map_or(ptr::null_mut(), CString::into_raw))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a scene from JSON.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_from_json(json: *const c_char, out: *mut *mut PpScene) -> PpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(json, "scene json")?;
        let scene: Scene = pushplace::cli::parse_json(text).map_err(|m| (PpStatus::ParseError, m))?;
        *out = Box::into_raw(Box::new(PpScene(scene)));
        Ok(())
    })
}

/// # Safety
/// `scene` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_free(scene: *mut PpScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_len(scene: *const PpScene, out: *mut usize) -> PpStatus {
    guard(|| {
        let s = handle(scene, "scene")?;
        *out_ptr(out, "out")? = s.0.len();
        Ok(())
    })
}

/// Number of objects within tolerance of their goal.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_satisfied(scene: *const PpScene, out: *mut usize) -> PpStatus {
    guard(|| {
        let s = handle(scene, "scene")?;
        *out_ptr(out, "out")? = s.0.satisfied_count();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_to_json(scene: *const PpScene, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        let s = handle(scene, "scene")?;
        let out = out_ptr(out, "out")?;
        *out = to_json(&s.0)?;
        Ok(())
    })
}

/// SVG drawing of the scene with goals and the default scale.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_svg(scene: *const PpScene, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        let s = handle(scene, "scene")?;
        let out = out_ptr(out, "out")?;
        *out = to_c_string(scene_svg(&s.0, &RenderStyle::default()))?;
        Ok(())
    })
}

/// Plans `scene`. `config_json` is a planner config or NULL for defaults.
/// Returns `PP_STATUS_PLANNING_FAILED` when the budget runs out first.
///
/// # Safety
/// Pointers must be valid; `config_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pp_plan(scene: *const PpScene, config_json: *const c_char, out: *mut *mut PpPlan) -> PpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let s = handle(scene, "scene")?;
        let cfg: PlannerConfig = read_opt_json(config_json, "planner config")?;
        cfg.validate().map_err(|e| (PpStatus::InvalidInput, e.to_string()))?;
        let outcome = plan_with_stats(&s.0, &cfg);
        let plan = outcome.plan.ok_or_else(|| {
            (
                PpStatus::PlanningFailed,
                format!("no plan found after {} expansions", outcome.expansions),
            )
        })?;
        *out = Box::into_raw(Box::new(PpPlan(plan)));
        Ok(())
    })
}

/// # Safety
/// `plan` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pp_plan_free(plan: *mut PpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_plan_len(plan: *const PpPlan, out: *mut usize) -> PpStatus {
    guard(|| {
        let p = handle(plan, "plan")?;
        *out_ptr(out, "out")? = p.0.len();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_plan_total_cost(plan: *const PpPlan, out: *mut f64) -> PpStatus {
    guard(|| {
        let p = handle(plan, "plan")?;
        *out_ptr(out, "out")? = p.0.total;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_plan_to_json(plan: *const PpPlan, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        let p = handle(plan, "plan")?;
        let out = out_ptr(out, "out")?;
        *out = to_json(&p.0)?;
        Ok(())
    })
}

/// Replays `plan` from `scene` in the planner model and returns the final scene.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_scene_apply_plan(scene: *const PpScene, plan: *const PpPlan, out: *mut *mut PpScene) -> PpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let s = handle(scene, "scene")?;
        let p = handle(plan, "plan")?;
        let mut cur = s.0.clone();
        for (i, a) in p.0.actions.iter().enumerate() {
            cur = cur
                .apply_action(a)
                .map_err(|e| (PpStatus::InvalidInput, format!("action {i}: {e}")))?;
        }
        *out = Box::into_raw(Box::new(PpScene(cur)));
        Ok(())
    })
}

/// Closed-loop execution through the simulator. `config_json` is an
/// executor config or NULL for defaults. A trial that ends short of the
/// goal still returns `PP_STATUS_OK`; inspect the report.
///
/// # Safety
/// Pointers must be valid; `config_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pp_execute(
    scene: *const PpScene,
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut PpReport,
) -> PpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let s = handle(scene, "scene")?;
        let cfg: ExecutorConfig = read_opt_json(config_json, "executor config")?;
        cfg.planner
            .validate()
            .map_err(|e| (PpStatus::InvalidInput, e.to_string()))?;
        if cfg.step_budget == 0 {
            return Err((PpStatus::InvalidInput, "step_budget must be >= 1".into()));
        }
        *out = Box::into_raw(Box::new(PpReport(execute_with(&s.0, &cfg, seed))));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pp_report_free(report: *mut PpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_report_success_rate(report: *const PpReport, out: *mut f64) -> PpStatus {
    guard(|| {
        let r = handle(report, "report")?;
        *out_ptr(out, "out")? = r.0.success_rate;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_report_total_actions(report: *const PpReport, out: *mut usize) -> PpStatus {
    guard(|| {
        let r = handle(report, "report")?;
        *out_ptr(out, "out")? = r.0.total_actions;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pp_report_to_json(report: *const PpReport, out: *mut *mut c_char) -> PpStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let out = out_ptr(out, "out")?;
        *out = to_json(&r.0)?;
        Ok(())
    })
}
