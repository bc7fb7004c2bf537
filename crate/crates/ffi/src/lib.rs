//! C ABI over the `pfmap` library.
//!
//! Instances and solutions are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`PfmapStatus`]; on failure, [`pfmap_last_error_message`] describes the
//! most recent error on the calling thread. Strings returned through `out`
//! parameters are freed with [`pfmap_string_free`].
//!
//! Power-level arrays use zero-based level indices, one per
//! (transmitter, frequency) locus in transmitter-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::time::Duration;

use pfmap::ga::{evolve, Arrest, GaConfig};
use pfmap::instance_io::{self, GeneratorConfig};
use pfmap::milp::export_lp;
use pfmap::model::{
    evaluate, verify, CoverageReport, Dimensions, Instance, Objective, PowerVector,
};
use pfmap::oracle::brute_force_optimum;
use pfmap::plan::PlanFile;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfmapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    IoError = 5,
    VerificationFailed = 6,
    TooLarge = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfmapObjective {
    Coverage = 0,
    Revenue = 1,
}

/// Opaque network instance.
pub struct PfmapInstance {
    inner: Instance,
}

/// Opaque solver result: a power vector and its verified coverage plan.
pub struct PfmapSolution {
    genome: PowerVector,
    report: CoverageReport,
    dims: Dimensions,
    generations: u64,
    log_csv: String,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PfmapDims {
    pub transmitters: usize,
    pub receivers: usize,
    pub frequencies: usize,
    pub burst_profiles: usize,
}

/// Genetic algorithm parameters. Arrest fields set to 0 are disabled; at
/// least one must be non-zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfmapGaConfig {
    pub k: usize,
    pub alpha: f64,
    pub m: usize,
    pub gamma: f64,
    pub max_generations: u64,
    pub time_limit_ms: u64,
    pub stagnation: u64,
    pub seed: u64,
    pub objective: PfmapObjective,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PfmapLpSummary {
    pub continuous: usize,
    pub binary: usize,
    pub sir_rows: usize,
    pub assignment_rows: usize,
    pub capacity_rows: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (PfmapStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PfmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PfmapStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PfmapStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (PfmapStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes either null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller provides a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        (
            PfmapStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: checked non-null; caller provides writable storage.
    unsafe { out.write(value) };
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

fn to_c_dims(d: Dimensions) -> PfmapDims {
    PfmapDims {
        transmitters: d.transmitters,
        receivers: d.receivers,
        frequencies: d.frequencies,
        burst_profiles: d.burst_profiles,
    }
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn pfmap_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses WND1 text into a new instance handle.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_instance_parse(
    text_ptr: *const c_char,
    out: *mut *mut PfmapInstance,
) -> PfmapStatus {
    guard(|| {
        let s = unsafe { text(text_ptr, "text")? };
        let inner = instance_io::parse(s).map_err(|e| (PfmapStatus::ParseError, e.to_string()))?;
        let handle = Box::into_raw(Box::new(PfmapInstance { inner }));
        unsafe { put(out, handle, "out") }.inspect_err(|_| drop(unsafe { Box::from_raw(handle) }))
    })
}

/// Generates a synthetic instance with the dimensions of a reference preset
/// (`"S1"` ... `"Q4"`) and default propagation parameters.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_instance_generate(
    preset: *const c_char,
    seed: u64,
    out: *mut *mut PfmapInstance,
) -> PfmapStatus {
    guard(|| {
        let name = unsafe { text(preset, "preset")? };
        let dims = instance_io::preset(name).ok_or_else(|| {
            (
                PfmapStatus::InvalidArgument,
                format!("unknown preset '{name}'"),
            )
        })?;
        let inner = instance_io::generate(&GeneratorConfig::with_dims(dims, seed))
            .map_err(|e| (PfmapStatus::InvalidArgument, e.to_string()))?;
        let handle = Box::into_raw(Box::new(PfmapInstance { inner }));
        unsafe { put(out, handle, "out") }.inspect_err(|_| drop(unsafe { Box::from_raw(handle) }))
    })
}

/// Canonical WND1 text of an instance. Free with [`pfmap_string_free`].
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_instance_serialize(
    instance: *const PfmapInstance,
    out: *mut *mut c_char,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        let s = to_c_string(instance_io::serialize(&inst.inner));
        unsafe { put(out, s, "out") }
    })
}

/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_instance_dims(
    instance: *const PfmapInstance,
    out: *mut PfmapDims,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        unsafe { put(out, to_c_dims(inst.inner.dims()), "out") }
    })
}

/// Number of discrete power levels, including switched off.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmap_instance_num_power_levels(instance: *const PfmapInstance) -> usize {
    unsafe { instance.as_ref() }.map_or(0, |i| i.inner.num_power_levels())
}

/// # Safety
/// `instance` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pfmap_instance_free(instance: *mut PfmapInstance) {
    if !instance.is_null() {
        // SAFETY: handle created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pfmap_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by CString::into_raw in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn genome(
    instance: &Instance,
    levels: *const u32,
    len: usize,
) -> Result<PowerVector, Failure> {
    if levels.is_null() && len > 0 {
        return Err(null("levels"));
    }
    let slice = if len == 0 {
        &[][..]
    } else {
        // SAFETY: caller provides `len` readable elements.
        unsafe { std::slice::from_raw_parts(levels, len) }
    };
    PowerVector::from_levels(instance, slice.to_vec())
        .map_err(|e| (PfmapStatus::InvalidArgument, e.to_string()))
}

/// Coverage of a power vector under the deterministic assignment rules.
///
/// # Safety
/// `levels` must point to `len` readable values; out pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_evaluate(
    instance: *const PfmapInstance,
    levels: *const u32,
    len: usize,
    covered_out: *mut usize,
    revenue_out: *mut f64,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        let p = unsafe { genome(&inst.inner, levels, len)? };
        let report = evaluate(&inst.inner, &p);
        unsafe { put(covered_out, report.covered_count, "covered_out")? };
        if !revenue_out.is_null() {
            unsafe { put(revenue_out, report.covered_revenue, "revenue_out")? };
        }
        Ok(())
    })
}

/// Fills `out` with the default parameters (k=20, alpha=0.05, m=8,
/// gamma=0.1, one hour time limit, seed 0).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_ga_config_default(out: *mut PfmapGaConfig) -> PfmapStatus {
    guard(|| {
        let d = GaConfig::default();
        let config = PfmapGaConfig {
            k: d.k,
            alpha: d.alpha,
            m: d.m,
            gamma: d.gamma,
            max_generations: 0,
            time_limit_ms: d.arrest.wall_clock.map_or(0, |w| w.as_millis() as u64),
            stagnation: 0,
            seed: d.seed,
            objective: PfmapObjective::Coverage,
        };
        unsafe { put(out, config, "out") }
    })
}

fn to_config(c: &PfmapGaConfig) -> GaConfig {
    let nonzero = |v: u64| (v != 0).then_some(v);
    GaConfig {
        k: c.k,
        alpha: c.alpha,
        m: c.m,
        gamma: c.gamma,
        arrest: Arrest {
            max_generations: nonzero(c.max_generations),
            wall_clock: nonzero(c.time_limit_ms).map(Duration::from_millis),
            stagnation: nonzero(c.stagnation),
        },
        seed: c.seed,
        objective: match c.objective {
            PfmapObjective::Coverage => Objective::Coverage,
            PfmapObjective::Revenue => Objective::Revenue,
        },
    }
}

/// Runs the genetic algorithm. The returned plan is verified before it is
/// handed out.
///
/// # Safety
/// `instance` and `config` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solve(
    instance: *const PfmapInstance,
    config: *const PfmapGaConfig,
    out: *mut *mut PfmapSolution,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        let config = to_config(unsafe { borrow(config, "config")? });
        if out.is_null() {
            return Err(null("out"));
        }
        let run = evolve(&inst.inner, &config)
            .map_err(|e| (PfmapStatus::InvalidArgument, e.to_string()))?;
        let violations = verify(&inst.inner, &run.best.genome, &run.report.assignment);
        if let Some(v) = violations.first() {
            return Err((PfmapStatus::VerificationFailed, v.to_string()));
        }
        let solution = PfmapSolution {
            genome: run.best.genome,
            report: run.report,
            dims: inst.inner.dims(),
            generations: run.generations,
            log_csv: run.log.to_csv(false),
        };
        unsafe { put(out, Box::into_raw(Box::new(solution)), "out") }
    })
}

/// Exhaustive optimum; fails with `TOO_LARGE` when the search space exceeds
/// `max_enumeration` power vectors.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_oracle(
    instance: *const PfmapInstance,
    max_enumeration: u64,
    out: *mut *mut PfmapSolution,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        if out.is_null() {
            return Err(null("out"));
        }
        let opt = brute_force_optimum(&inst.inner, max_enumeration)
            .map_err(|e| (PfmapStatus::TooLarge, e.to_string()))?;
        let solution = PfmapSolution {
            genome: opt.genome,
            report: opt.report,
            dims: inst.inner.dims(),
            generations: 0,
            log_csv: String::new(),
        };
        unsafe { put(out, Box::into_raw(Box::new(solution)), "out") }
    })
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_covered(solution: *const PfmapSolution) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.report.covered_count)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_revenue(solution: *const PfmapSolution) -> f64 {
    unsafe { solution.as_ref() }.map_or(0.0, |s| s.report.covered_revenue)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_generations(solution: *const PfmapSolution) -> u64 {
    unsafe { solution.as_ref() }.map_or(0, |s| s.generations)
}

/// Copies the level indices into `buffer`. `required` always receives the
/// genome length; a null `buffer` only queries it. Fails with
/// `INVALID_ARGUMENT` when `capacity` is too small.
///
/// # Safety
/// `buffer` must be null or hold `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_levels(
    solution: *const PfmapSolution,
    buffer: *mut u32,
    capacity: usize,
    required: *mut usize,
) -> PfmapStatus {
    guard(|| {
        let sol = unsafe { borrow(solution, "solution")? };
        let levels = sol.genome.levels();
        if !required.is_null() {
            unsafe { put(required, levels.len(), "required")? };
        }
        if buffer.is_null() {
            return Ok(());
        }
        if capacity < levels.len() {
            return Err((
                PfmapStatus::InvalidArgument,
                format!("buffer holds {capacity} values, need {}", levels.len()),
            ));
        }
        // SAFETY: capacity checked above.
        unsafe { ptr::copy_nonoverlapping(levels.as_ptr(), buffer, levels.len()) };
        Ok(())
    })
}

/// Coverage plan in the text format read by `pfmap verify`.
///
/// # Safety
/// `solution` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_plan(
    solution: *const PfmapSolution,
    out: *mut *mut c_char,
) -> PfmapStatus {
    guard(|| {
        let sol = unsafe { borrow(solution, "solution")? };
        let plan = PlanFile {
            dims: sol.dims,
            levels: sol.genome.levels().to_vec(),
            services: sol.report.assignment.served().collect(),
            covered: sol.report.covered_count,
        };
        unsafe { put(out, to_c_string(plan.to_text()), "out") }
    })
}

/// Per-generation log (`generation,best_fitness,mean_fitness`) of a solve.
///
/// # Safety
/// `solution` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_log(
    solution: *const PfmapSolution,
    out: *mut *mut c_char,
) -> PfmapStatus {
    guard(|| {
        let sol = unsafe { borrow(solution, "solution")? };
        unsafe { put(out, to_c_string(sol.log_csv.clone()), "out") }
    })
}

/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pfmap_solution_free(solution: *mut PfmapSolution) {
    if !solution.is_null() {
        // SAFETY: handle created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Verifies plan text against an instance. Returns `OK` and writes the
/// violation count (zero for a valid plan) unless the plan cannot be read.
///
/// # Safety
/// `plan` must be NUL-terminated; `violations_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_verify_plan(
    instance: *const PfmapInstance,
    plan: *const c_char,
    violations_out: *mut usize,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        let s = unsafe { text(plan, "plan")? };
        let plan = PlanFile::parse(s).map_err(|e| (PfmapStatus::ParseError, e.to_string()))?;
        let violations = plan
            .verify(&inst.inner)
            .map_err(|e| (PfmapStatus::InvalidArgument, e.to_string()))?;
        unsafe { put(violations_out, violations.len(), "violations_out") }
    })
}

/// Writes the LP file of the big-M formulation.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pfmap_export_lp(
    instance: *const PfmapInstance,
    path: *const c_char,
    out: *mut PfmapLpSummary,
) -> PfmapStatus {
    guard(|| {
        let inst = unsafe { borrow(instance, "instance")? };
        let path = unsafe { text(path, "path")? };
        let s = export_lp(&inst.inner, Path::new(path))
            .map_err(|e| (PfmapStatus::IoError, e.to_string()))?;
        if !out.is_null() {
            let summary = PfmapLpSummary {
                continuous: s.continuous,
                binary: s.binary,
                sir_rows: s.sir_rows,
                assignment_rows: s.assignment_rows,
                capacity_rows: s.capacity_rows,
            };
            unsafe { put(out, summary, "out")? };
        }
        Ok(())
    })
}
