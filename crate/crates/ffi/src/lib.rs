//! C ABI over `mpideals`.
//!
//! Objects cross the boundary as opaque handles (`MpAlgebra`, `MpElement`)
//! created and destroyed by the library. Every entry point returns an
//! [`MpStatus`]; on failure a message is available from [`mp_last_error`]
//! until the next call on the same thread. Strings returned through `out`
//! parameters are owned by the caller and released with [`mp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mpideals::algebra::{Algebra, BlockElement, DimensionTable};
use mpideals::instance::{run_query, QueryError};
use mpideals::moore_penrose;
use mpideals::suites::{run_suite, SuiteConfig, SuiteError};

/// Result code of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    /// Well-formed input whose mathematical hypotheses fail.
    MathFailure = 1,
    /// Malformed JSON, unknown names, or shapes that do not fit the algebra.
    InvalidInput = 2,
    NullPointer = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

/// Block algebra with its tolerances.
pub struct MpAlgebra {
    inner: Algebra,
}

/// Element of a block algebra.
pub struct MpElement {
    inner: BlockElement,
}

/// Moore-Penrose verdicts, one per equivalent characterisation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MpVerdicts {
    pub generalized_inverse: bool,
    pub penrose: bool,
    pub isolated_zero: bool,
    pub functional_projection: bool,
    pub mp_projection: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(MpStatus, String);

fn invalid(msg: impl ToString) -> Fail {
    Fail(MpStatus::InvalidInput, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(MpStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("`{name}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(MpStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(MpStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| invalid("output contains a NUL byte"))?;
    write_out(out, c.into_raw())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn mp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Algebra over the default block profile with default tolerances.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mp_algebra_new_default(out: *mut *mut MpAlgebra) -> MpStatus {
    guard(|| {
        let alg = MpAlgebra { inner: Algebra::with_dims(DimensionTable::default_profile()) };
        write_out(out, Box::into_raw(Box::new(alg)))
    })
}

/// Algebra with blocks `0..len` of sizes `sizes[0..len]`.
///
/// # Safety
/// `sizes` must point to `len` readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_algebra_from_sizes(sizes: *const usize, len: usize, out: *mut *mut MpAlgebra) -> MpStatus {
    guard(|| {
        if sizes.is_null() {
            return Err(Fail(MpStatus::NullPointer, "`sizes` is null".into()));
        }
        let sizes = std::slice::from_raw_parts(sizes, len);
        let dims = DimensionTable::from_sizes(sizes).ok_or_else(|| invalid("sizes must be nonempty and at least 1"))?;
        write_out(out, Box::into_raw(Box::new(MpAlgebra { inner: Algebra::with_dims(dims) })))
    })
}

/// Override a tolerance by name (for example `"rank_tol"`).
///
/// # Safety
/// `alg` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mp_algebra_set_tolerance(alg: *mut MpAlgebra, name: *const c_char, value: f64) -> MpStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let alg = alg.as_mut().ok_or_else(|| Fail(MpStatus::NullPointer, "`alg` is null".into()))?;
        let mut tol = *alg.inner.tol();
        tol.set(name, value).map_err(invalid)?;
        alg.inner = Algebra::new(alg.inner.dims().clone(), tol);
        Ok(())
    })
}

/// # Safety
/// `alg` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mp_algebra_free(alg: *mut MpAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Parse `{"gamma": [re, im], "blocks": {"t": {"rows", "cols", "data"}}}`
/// and check it against the algebra's block sizes.
///
/// # Safety
/// `alg` must be live, `json` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mp_element_from_json(
    alg: *const MpAlgebra,
    json: *const c_char,
    out: *mut *mut MpElement,
) -> MpStatus {
    guard(|| {
        let alg = ref_arg(alg, "alg")?;
        let text = str_arg(json, "json")?;
        let el: BlockElement = serde_json::from_str(text).map_err(invalid)?;
        alg.inner.check(&el).map_err(invalid)?;
        write_out(out, Box::into_raw(Box::new(MpElement { inner: el })))
    })
}

/// # Safety
/// `el` must be live and `out` valid; free the result with [`mp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_element_to_json(el: *const MpElement, out: *mut *mut c_char) -> MpStatus {
    guard(|| {
        let el = ref_arg(el, "el")?;
        write_string(out, serde_json::to_string(&el.inner).map_err(invalid)?)
    })
}

/// # Safety
/// `el` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mp_element_free(el: *mut MpElement) {
    if !el.is_null() {
        drop(Box::from_raw(el));
    }
}

/// C*-norm `max(|gamma|, sup_t ||W_t(a)||)`.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mp_element_norm(alg: *const MpAlgebra, el: *const MpElement, out: *mut f64) -> MpStatus {
    guard(|| {
        let (alg, el) = (ref_arg(alg, "alg")?, ref_arg(el, "el")?);
        write_out(out, alg.inner.norm(&el.inner))
    })
}

/// Moore-Penrose inverse with its verdicts and the smallest nonzero point of
/// the spectrum of `a*a` (`+inf` for `a = 0`). `verdicts` and `gap` may be
/// NULL.
///
/// # Safety
/// Handles must be live; `out` valid; optional outputs NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn mp_pseudoinverse(
    alg: *const MpAlgebra,
    el: *const MpElement,
    out: *mut *mut MpElement,
    verdicts: *mut MpVerdicts,
    gap: *mut f64,
) -> MpStatus {
    guard(|| {
        let (alg, el) = (ref_arg(alg, "alg")?, ref_arg(el, "el")?);
        let r =
            moore_penrose::mp_inverse(&alg.inner, &el.inner).map_err(|e| Fail(MpStatus::MathFailure, e.to_string()))?;
        if !verdicts.is_null() {
            let v = r.verdicts;
            verdicts.write(MpVerdicts {
                generalized_inverse: v.a,
                penrose: v.b,
                isolated_zero: v.c,
                functional_projection: v.d,
                mp_projection: v.e,
            });
        }
        if !gap.is_null() {
            gap.write(r.spectral_gap.unwrap_or(f64::INFINITY));
        }
        write_out(out, Box::into_raw(Box::new(MpElement { inner: r.pseudoinverse })))
    })
}

/// Run one query operation (as `mpideals query`) on an instance document
/// over the default block profile. The JSON report is written to `out`
/// whenever the operation ran, including when a certificate failed
/// (status `MathFailure`).
///
/// # Safety
/// `op` and `instance_json` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mp_query(op: *const c_char, instance_json: *const c_char, out: *mut *mut c_char) -> MpStatus {
    guard(|| {
        let op = str_arg(op, "op")?;
        let text = str_arg(instance_json, "instance_json")?;
        let dims = DimensionTable::default_profile();
        match run_query(op, text, &Default::default(), &dims) {
            Ok(o) => {
                let doc = serde_json::json!({ "op": o.op, "success": o.success, "report": o.report });
                write_string(out, doc.to_string())?;
                if o.success {
                    Ok(())
                } else {
                    Err(Fail(MpStatus::MathFailure, format!("{op}: certificate failed")))
                }
            }
            Err(e @ QueryError::Math(_)) => Err(Fail(MpStatus::MathFailure, e.to_string())),
            Err(e) => Err(invalid(e)),
        }
    })
}

/// Run a verification suite; `trials = 0` keeps each check's default count.
/// The report (without timestamp) is written to `out`; the status is
/// `MathFailure` when some check failed.
///
/// # Safety
/// `name` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mp_run_suite(
    name: *const c_char,
    seed: u64,
    trials: usize,
    out: *mut *mut c_char,
) -> MpStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let config = SuiteConfig { seed, trials: (trials > 0).then_some(trials), ..SuiteConfig::default() };
        let report = run_suite(name, &config).map_err(|e: SuiteError| invalid(e))?;
        let mut doc = report.to_json(&config, 0);
        doc.as_object_mut().expect("report is an object").remove("timestamp");
        write_string(out, doc.to_string())?;
        if report.passed {
            Ok(())
        } else {
            Err(Fail(MpStatus::MathFailure, format!("suite {name} had failing checks")))
        }
    })
}
