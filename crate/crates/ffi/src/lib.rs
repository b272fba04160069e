//! C ABI over `divlab`.
//!
//! Objects cross the boundary as opaque handles created by a `*_parse`
//! or `divlab_diversity_counting` call and released by the matching
//! `*_free`. Every fallible function returns a [`DivlabStatus`]; on
//! failure the message is available from [`divlab_last_error`] on the same
//! thread. Rationals are exchanged as `p/q` strings. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`divlab_string_free`].
//!
//! Panics never unwind into C: they are caught and reported as
//! [`DivlabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use divlab::cli::format::{parse_diversity, parse_map, write_table};
use divlab::constructions::{counting_diversity, hypcon_check};
use divlab::diversity::{induced_metric, verify_diversity_axioms, verify_diversity_axioms_reduced, EXHAUSTIVE_AXIOM_CAP};
use divlab::fixedpoint::{
    is_nonexpansive_diversity, is_nonexpansive_metric, minimal_invariant_descent, DescentOptions,
    DescentOutcome, SelfMap,
};
use divlab::rat::parse_rat;
use divlab::tightspan::{hyperconvexity_certificate, metric_hyperconvexity_certificate, HyperconvexityVerdict};
use divlab::{Error, FiniteDiversity, Rat, SubsetMask};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivlabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// Text input did not parse; the message carries line and column.
    Parse = 3,
    /// Input parsed but violates a precondition.
    InvalidInput = 4,
    /// The ground set is larger than the operation supports.
    CapExceeded = 5,
    /// Internal error; the library state is still usable.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivlabVerdict {
    Hyperconvex = 0,
    HyperconvexWithinTolerance = 1,
    NotHyperconvex = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivlabDescentKind {
    FixedPoint = 0,
    ApproxFixedPoint = 1,
    StuckMinimalSet = 2,
}

/// `point` is meaningful for the two fixed-point kinds, `set` (a bitmask
/// in ground order) for the stuck kind.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivlabDescentResult {
    pub kind: DivlabDescentKind,
    pub point: usize,
    pub set: u64,
    pub steps: usize,
}

/// A validated finite diversity.
pub struct DivlabDiversity {
    inner: FiniteDiversity,
}

/// A self-map of a diversity's ground set.
pub struct DivlabMap {
    inner: SelfMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(DivlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } => DivlabStatus::Parse,
            Error::CapExceeded { .. } => DivlabStatus::CapExceeded,
            _ => DivlabStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DivlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DivlabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DivlabStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(DivlabStatus::NullArgument, "null argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(DivlabStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn rational_arg(p: *const c_char) -> Result<Rat, Fail> {
    if p.is_null() {
        return Ok(Rat::from_integer(0.into()));
    }
    Ok(parse_rat(unsafe { text(p)? })?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn divlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The message of the last failed call on this thread, or null. Valid
/// until the next failing call on this thread; do not free.
#[no_mangle]
pub extern "C" fn divlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn divlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a diversity file and validates the result.
///
/// # Safety
/// `text_in` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_parse(
    text_in: *const c_char,
    out: *mut *mut DivlabDiversity,
) -> DivlabStatus {
    guard(|| {
        let inner = parse_diversity(text(text_in)?)?.build()?;
        write(out, Box::into_raw(Box::new(DivlabDiversity { inner })))
    })
}

/// `δ(A) = |A| − 1` with the default labels `x, y, z`, or `p1 … pn` above three points.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_counting(n: usize, out: *mut *mut DivlabDiversity) -> DivlabStatus {
    guard(|| {
        let inner = counting_diversity(n)?;
        write(out, Box::into_raw(Box::new(DivlabDiversity { inner })))
    })
}

/// Releases a diversity. Null is ignored.
///
/// # Safety
/// `div` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_free(div: *mut DivlabDiversity) {
    if !div.is_null() {
        drop(Box::from_raw(div));
    }
}

/// Number of points.
///
/// # Safety
/// `div` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_len(div: *const DivlabDiversity, out: *mut usize) -> DivlabStatus {
    guard(|| write(out, handle(div)?.inner.len()))
}

/// Label of point `index`, as an owned string.
///
/// # Safety
/// `div` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_label(
    div: *const DivlabDiversity,
    index: usize,
    out: *mut *mut c_char,
) -> DivlabStatus {
    guard(|| {
        let g = handle(div)?.inner.ground();
        g.check_index(index)?;
        write(out, owned_string(g.name(index).to_string()))
    })
}

/// `δ(A)` for the bitmask `mask` (bit `i` is point `i`), as `p/q`.
///
/// # Safety
/// `div` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_value(
    div: *const DivlabDiversity,
    mask: u64,
    out: *mut *mut c_char,
) -> DivlabStatus {
    guard(|| {
        let d = &handle(div)?.inner;
        let set = SubsetMask(mask);
        if !set.is_subset_of(d.ground().full()) {
            return Err(Fail(DivlabStatus::InvalidInput, format!("mask {mask:#x} outside the ground set")));
        }
        write(out, owned_string(d.get(set).to_string()))
    })
}

/// The diversity as an explicit-table file.
///
/// # Safety
/// `div` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_to_text(div: *const DivlabDiversity, out: *mut *mut c_char) -> DivlabStatus {
    guard(|| write(out, owned_string(write_table(&handle(div)?.inner)?)))
}

/// Checks both axioms on a diversity file without rejecting it. Sets
/// `out` to whether the table is a diversity.
///
/// # Safety
/// `text_in` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_verify_text(text_in: *const c_char, out: *mut bool) -> DivlabStatus {
    guard(|| {
        let table = parse_diversity(text(text_in)?)?.table()?;
        let report = if table.ground().len() <= EXHAUSTIVE_AXIOM_CAP {
            verify_diversity_axioms(&table)
        } else {
            verify_diversity_axioms_reduced(&table)
        };
        write(out, report.is_empty())
    })
}

/// Whether `(|A| − 1)·δ(A)` is at most the sum of pairwise distances for
/// every `A`.
///
/// # Safety
/// `div` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_hypcon(div: *const DivlabDiversity, out: *mut bool) -> DivlabStatus {
    guard(|| write(out, hypcon_check(&handle(div)?.inner).holds()))
}

/// Hyperconvexity of the diversity itself.
///
/// # Safety
/// `div` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_diversity_hyperconvex(
    div: *const DivlabDiversity,
    out: *mut DivlabVerdict,
) -> DivlabStatus {
    guard(|| {
        let v = hyperconvexity_certificate(&handle(div)?.inner)?;
        write(out, verdict(&v))
    })
}

/// Hyperconvexity of the induced metric up to `tolerance` (`p/q`; null
/// means zero).
///
/// # Safety
/// `div` must be a live handle; `tolerance` null or NUL-terminated; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_metric_hyperconvex(
    div: *const DivlabDiversity,
    tolerance: *const c_char,
    out: *mut DivlabVerdict,
) -> DivlabStatus {
    guard(|| {
        let tol = rational_arg(tolerance)?;
        let metric = induced_metric(&handle(div)?.inner);
        let v = metric_hyperconvexity_certificate(&metric, &tol)?;
        write(out, verdict(&v))
    })
}

fn verdict<C>(v: &HyperconvexityVerdict<C>) -> DivlabVerdict {
    match v {
        HyperconvexityVerdict::Hyperconvex => DivlabVerdict::Hyperconvex,
        HyperconvexityVerdict::HyperconvexWithinTolerance(_) => DivlabVerdict::HyperconvexWithinTolerance,
        HyperconvexityVerdict::NotHyperconvex(_) => DivlabVerdict::NotHyperconvex,
    }
}

/// Parses a map file over the ground set of `div`.
///
/// # Safety
/// `div` must be a live handle; `text_in` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_map_parse(
    div: *const DivlabDiversity,
    text_in: *const c_char,
    out: *mut *mut DivlabMap,
) -> DivlabStatus {
    guard(|| {
        let inner = parse_map(text(text_in)?, handle(div)?.inner.ground())?;
        write(out, Box::into_raw(Box::new(DivlabMap { inner })))
    })
}

/// Releases a map. Null is ignored.
///
/// # Safety
/// `map` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn divlab_map_free(map: *mut DivlabMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Nonexpansiveness of `map` for the induced metric and for `δ`.
///
/// # Safety
/// Handles must be live; both out-parameters writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_map_nonexpansive(
    div: *const DivlabDiversity,
    map: *const DivlabMap,
    out_metric: *mut bool,
    out_diversity: *mut bool,
) -> DivlabStatus {
    guard(|| {
        let d = &handle(div)?.inner;
        let m = &handle(map)?.inner;
        if !m.ground().same_as(d.ground()) {
            return Err(Error::GroundMismatch.into());
        }
        write(out_metric, is_nonexpansive_metric(m, &induced_metric(d)))?;
        write(out_diversity, is_nonexpansive_diversity(m, d))
    })
}

/// Runs the minimal-invariant-set descent from the bitmask `start`
/// (zero means the whole ground set) with terminal tolerance `epsilon`
/// (`p/q`; null means zero).
///
/// # Safety
/// Handles must be live; `epsilon` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn divlab_descent(
    div: *const DivlabDiversity,
    map: *const DivlabMap,
    start: u64,
    epsilon: *const c_char,
    out: *mut DivlabDescentResult,
) -> DivlabStatus {
    guard(|| {
        let d = &handle(div)?.inner;
        let m = &handle(map)?.inner;
        let start = if start == 0 { d.ground().full() } else { SubsetMask(start) };
        let opts = DescentOptions {
            epsilon: rational_arg(epsilon)?,
            terminal_scan: true,
        };
        let outcome = minimal_invariant_descent(d, m, start, &opts)?;
        let steps = outcome.trace().len();
        let result = match outcome {
            DescentOutcome::FixedPoint { point, .. } => DivlabDescentResult {
                kind: DivlabDescentKind::FixedPoint,
                point,
                set: SubsetMask::singleton(point).0,
                steps,
            },
            DescentOutcome::ApproxFixedPoint { point, set, .. } => DivlabDescentResult {
                kind: DivlabDescentKind::ApproxFixedPoint,
                point,
                set: set.0,
                steps,
            },
            DescentOutcome::StuckMinimalSet { set, .. } => DivlabDescentResult {
                kind: DivlabDescentKind::StuckMinimalSet,
                point: usize::MAX,
                set: set.0,
                steps,
            },
        };
        write(out, result)
    })
}
