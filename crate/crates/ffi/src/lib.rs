//! C ABI over `szwalk`.
//!
//! Walks are opaque `SzwWalk` handles created by one of the `szw_walk_from_*`
//! constructors and released with `szw_walk_free`. Every fallible call
//! returns an `SzwStatus`; on failure a message is kept per thread and can be
//! copied out with `szw_last_error`. Matrices cross the boundary as separate
//! row-major real and imaginary buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use szwalk::analysis::Analysis;
use szwalk::fixtures::fixture;
use szwalk::graph::{grover_weight, parse_graph_json, validate_structures, OneForm};
use szwalk::linop::Operator;
use szwalk::sim::{evolve_and_measure, limit_distribution, InitialState};
use szwalk::spectral_map::Provenance;
use szwalk::szegedy::{random_instance, WalkInstance, WalkJson};
use szwalk::Error;

/// Result of every fallible call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Domain = 4,
    Structural = 5,
    Consistency = 6,
    Json = 7,
    BufferTooSmall = 8,
    ValidationFailed = 9,
    Panic = 10,
}

/// Operators that can be copied out of a walk.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzwOperator {
    /// Evolution `U = S C`.
    Evolution = 0,
    Coin = 1,
    Shift = 2,
    /// `d_A`, of shape `dim_k x dim_h`.
    Boundary = 3,
    /// Discriminant `T`, of shape `dim_k x dim_k`.
    Discriminant = 4,
    /// Generator `H` with `exp(iH) = U`.
    Generator = 5,
}

/// Origin of a spectral line of `U`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzwProvenance {
    MappedFromLambda = 0,
    PlusCorrection = 1,
    MinusCorrection = 2,
}

/// A walk together with its spectral analysis.
pub struct SzwWalk {
    analysis: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: SzwStatus, msg: impl Into<String>) -> SzwStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> SzwStatus {
    let status = match &e {
        Error::Dimension(_) => SzwStatus::Dimension,
        Error::Domain(_) => SzwStatus::Domain,
        Error::Structural(_) => SzwStatus::Structural,
        Error::Consistency(_) => SzwStatus::Consistency,
        Error::Json(_) => SzwStatus::Json,
        Error::Io(_) => SzwStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `body`, turning panics into `SzwStatus::Panic`.
fn guard(body: impl FnOnce() -> SzwStatus) -> SzwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SzwStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SzwStatus> {
    if s.is_null() {
        return Err(fail(SzwStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(SzwStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// # Safety
/// `w` must be null or a live handle.
unsafe fn walk<'a>(w: *const SzwWalk) -> Result<&'a SzwWalk, SzwStatus> {
    w.as_ref().ok_or_else(|| fail(SzwStatus::NullPointer, "walk handle is null"))
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn emit(inst: szwalk::Result<WalkInstance>, out: *mut *mut SzwWalk) -> SzwStatus {
    if out.is_null() {
        return fail(SzwStatus::NullPointer, "output handle pointer is null");
    }
    *out = ptr::null_mut();
    match inst.and_then(Analysis::new) {
        Ok(analysis) => {
            *out = Box::into_raw(Box::new(SzwWalk { analysis }));
            SzwStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Copies `src` into a caller buffer of `cap` slots after checking for null.
///
/// # Safety
/// `dst` must be null or valid for `cap` writes.
unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, cap: usize) -> SzwStatus {
    if src.is_empty() {
        return SzwStatus::Ok;
    }
    // capacity first, so a null buffer with `cap = 0` works as a size query
    if cap < src.len() {
        return fail(SzwStatus::BufferTooSmall, format!("buffer holds {cap} values, {} needed", src.len()));
    }
    if dst.is_null() {
        return fail(SzwStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    SzwStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn szw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `cap > 0`) and returns the full message
/// length in bytes excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn szw_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Grover walk on a built-in graph (`single-edge`, `cycle:N`, `complete:N`,
/// `path-loops:N`, `star:N`) or a seeded abstract walk (`random:H,K,SEED`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_from_fixture(name: *const c_char, out: *mut *mut SzwWalk) -> SzwStatus {
    guard(|| {
        let name = tri!(read_str(name));
        emit(fixture(name), out)
    })
}

/// Seeded abstract walk with `1 <= dim_k <= dim_h`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_from_random(
    dim_h: usize,
    dim_k: usize,
    seed: u64,
    out: *mut *mut SzwWalk,
) -> SzwStatus {
    guard(|| emit(random_instance(dim_h, dim_k, seed), out))
}

/// Walk from serialized `d_A` and `S` (the `validate` output's `walk` field).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_from_json(json: *const c_char, out: *mut *mut SzwWalk) -> SzwStatus {
    guard(|| {
        let text = tri!(read_str(json));
        let inst = serde_json::from_str::<WalkJson>(text)
            .map_err(Error::from)
            .and_then(|j| WalkInstance::from_json(&j));
        emit(inst, out)
    })
}

/// Twisted Szegedy walk from graph JSON. With `explicit_weights` false the
/// Grover weight is used; otherwise the file must carry weights. A missing
/// 1-form means zero.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_from_graph_json(
    json: *const c_char,
    explicit_weights: bool,
    out: *mut *mut SzwWalk,
) -> SzwStatus {
    guard(|| {
        let text = tri!(read_str(json));
        let inst = parse_graph_json(text).and_then(|data| {
            let g = &data.graph;
            let w = match (explicit_weights, data.weight) {
                (false, _) => grover_weight(g),
                (true, Some(w)) => w,
                (true, None) => return Err(Error::Structural("graph JSON carries no weights".into())),
            };
            let theta = data.one_form.unwrap_or_else(|| OneForm::zero(g));
            let report = validate_structures(g, Some(&w), Some(&theta));
            if !report.passed {
                return Err(Error::Domain(format!("invalid walk data: {report}")));
            }
            WalkInstance::twisted_szegedy(g, &w, &theta)
        });
        emit(inst, out)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `w` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_free(w: *mut SzwWalk) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// `dim H` (arcs) and `dim K` (vertices).
///
/// # Safety
/// `w` must be a live handle; the outputs must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_dims(w: *const SzwWalk, dim_h: *mut usize, dim_k: *mut usize) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        if dim_h.is_null() || dim_k.is_null() {
            return fail(SzwStatus::NullPointer, "dimension output is null");
        }
        *dim_h = w.analysis.inst.dim_h();
        *dim_k = w.analysis.inst.dim_k();
        SzwStatus::Ok
    })
}

fn operator_of(w: &SzwWalk, which: SzwOperator) -> &Operator {
    let inst = &w.analysis.inst;
    match which {
        SzwOperator::Evolution => inst.u(),
        SzwOperator::Coin => inst.c(),
        SzwOperator::Shift => inst.s(),
        SzwOperator::Boundary => inst.d_a(),
        SzwOperator::Discriminant => inst.t(),
        SzwOperator::Generator => &w.analysis.gen.h,
    }
}

/// Copies an operator as row-major `re` and `im` buffers of `cap` entries
/// each; `rows` and `cols` receive its shape even when the buffers are
/// too small.
///
/// # Safety
/// `w` must be a live handle; `rows`/`cols` valid for one write; `re`/`im`
/// null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn szw_walk_operator(
    w: *const SzwWalk,
    which: SzwOperator,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        if rows.is_null() || cols.is_null() {
            return fail(SzwStatus::NullPointer, "shape output is null");
        }
        let a = operator_of(w, which);
        let (r, c) = a.shape();
        *rows = r;
        *cols = c;
        let mut re_buf = Vec::with_capacity(r * c);
        let mut im_buf = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                re_buf.push(a[(i, j)].re);
                im_buf.push(a[(i, j)].im);
            }
        }
        match copy_out(&re_buf, re, cap) {
            SzwStatus::Ok => copy_out(&im_buf, im, cap),
            status => status,
        }
    })
}

/// Number of lines in the predicted spectrum of `U`.
///
/// # Safety
/// `w` must be a live handle and `len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_spectrum_len(w: *const SzwWalk, len: *mut usize) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        if len.is_null() {
            return fail(SzwStatus::NullPointer, "length output is null");
        }
        *len = w.analysis.prediction.lines.len();
        SzwStatus::Ok
    })
}

/// Copies the predicted spectrum: angle in `[0, 2pi)`, multiplicity and
/// provenance per line, each buffer holding `cap` entries.
///
/// # Safety
/// `w` must be a live handle; the buffers must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn szw_spectrum(
    w: *const SzwWalk,
    angles: *mut f64,
    multiplicities: *mut usize,
    provenance: *mut SzwProvenance,
    cap: usize,
) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        let lines = &w.analysis.prediction.lines;
        let a: Vec<f64> = lines.iter().map(|l| l.angle).collect();
        let m: Vec<usize> = lines.iter().map(|l| l.multiplicity).collect();
        let p: Vec<SzwProvenance> = lines
            .iter()
            .map(|l| match l.provenance {
                Provenance::MappedFromLambda => SzwProvenance::MappedFromLambda,
                Provenance::PlusCorrection => SzwProvenance::PlusCorrection,
                Provenance::MinusCorrection => SzwProvenance::MinusCorrection,
            })
            .collect();
        for status in [copy_out(&a, angles, cap), copy_out(&m, multiplicities, cap), copy_out(&p, provenance, cap)] {
            if status != SzwStatus::Ok {
                return status;
            }
        }
        SzwStatus::Ok
    })
}

/// Runs every invariant check. Returns `ValidationFailed` (with the report
/// as the last error) when any check fails; the counts are written either way.
///
/// # Safety
/// `w` must be a live handle; `checks`/`violations` null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_validate(w: *const SzwWalk, checks: *mut usize, violations: *mut usize) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        let report = w.analysis.full_report();
        if !checks.is_null() {
            *checks = report.checks;
        }
        if !violations.is_null() {
            *violations = report.violations.len();
        }
        if report.passed {
            SzwStatus::Ok
        } else {
            fail(SzwStatus::ValidationFailed, report.to_string())
        }
    })
}

/// Number of blocks in the walk's partition (vertices, or coordinates for
/// abstract walks).
///
/// # Safety
/// `w` must be a live handle and `len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn szw_num_blocks(w: *const SzwWalk, len: *mut usize) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        if len.is_null() {
            return fail(SzwStatus::NullPointer, "length output is null");
        }
        *len = w.analysis.partition().len();
        SzwStatus::Ok
    })
}

/// Finding probabilities for `n = 0..=steps`, row-major `(steps + 1) x blocks`.
/// `init` uses the CLI syntax: `arc:<i>`, `vertex-uniform:<label>`,
/// `random:<seed>` or a JSON array of `[re, im]` pairs.
///
/// # Safety
/// `w` must be a live handle, `init` a NUL-terminated string and `out`
/// valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn szw_simulate(
    w: *const SzwWalk,
    init: *const c_char,
    steps: usize,
    out: *mut f64,
    cap: usize,
) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        let spec = tri!(read_str(init));
        let part = w.analysis.partition();
        let trace = InitialState::parse(spec)
            .and_then(|s| s.build(&part))
            .and_then(|psi| evolve_and_measure(w.analysis.inst.u(), &part, &psi, steps));
        match trace {
            Ok(t) => copy_out(&t.distributions.concat(), out, cap),
            Err(e) => from_error(e),
        }
    })
}

/// Limit of the Cesàro averages of the finding probabilities, one value
/// per block.
///
/// # Safety
/// `w` must be a live handle, `init` a NUL-terminated string and `out`
/// valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn szw_limit_distribution(
    w: *const SzwWalk,
    init: *const c_char,
    out: *mut f64,
    cap: usize,
) -> SzwStatus {
    guard(|| {
        let w = tri!(walk(w));
        let spec = tri!(read_str(init));
        let part = w.analysis.partition();
        let limit = InitialState::parse(spec)
            .and_then(|s| s.build(&part))
            .and_then(|psi| limit_distribution(&w.analysis.gen, &part, &psi));
        match limit {
            Ok(l) => copy_out(&l, out, cap),
            Err(e) => from_error(e),
        }
    })
}
