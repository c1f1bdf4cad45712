//! C ABI over the `miura` crate.
//!
//! Every function returns a [`MiuraStatus`]. On failure the message is kept
//! per thread and can be fetched with [`miura_last_error`]. Strings handed to
//! the caller are owned by the caller and released with
//! [`miura_string_free`]. Complex numbers cross the boundary as interleaved
//! `(re, im)` pairs of `double`, matrices row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use miura::cocycle::{transition_rank2, transition_rank3, CocycleError, MobiusChart, SqrtBranch};
use miura::foliation::{omega_minus, verify_miura_graph, FoliationError, FoliationSystem, GraphReport};
use miura::gauge::{GaugeError, MiuraResult};
use miura::numeric::{
    gauss_factorize, monodromy, verify_miura_numeric, CMatrix, FreeFieldOptions, IntegrationOptions,
    NumericError, Path, PotentialSpec, C64,
};
use thiserror::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiuraStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Rejected input: bad rank, malformed JSON, open loop, degenerate chart.
    InvalidArgument = 3,
    /// The computation itself failed: pole too close, step underflow,
    /// path leaving the big cell, branch cut.
    NumericFailure = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Square-root branch for the rank-2 transition matrix.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiuraBranch {
    Principal = 0,
    Negated = 1,
}

/// Symbolic Miura data for one rank.
pub struct MiuraSymbolic {
    inner: MiuraResult,
}

/// Miura foliation of one rank together with its graph check.
pub struct MiuraFoliation {
    system: FoliationSystem,
    graph: GraphReport,
}

/// Rational potential `w_2(z), ..., w_n(z)`.
pub struct MiuraPotential {
    inner: PotentialSpec,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("null pointer argument `{0}`")]
    Null(&'static str),
    #[error("argument `{0}` is not valid UTF-8")]
    Utf8(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}

impl FfiError {
    fn status(&self) -> MiuraStatus {
        match self {
            FfiError::Null(_) => MiuraStatus::NullPointer,
            FfiError::Utf8(_) => MiuraStatus::InvalidUtf8,
            FfiError::Invalid(_) | FfiError::Gauge(_) | FfiError::Foliation(_) => MiuraStatus::InvalidArgument,
            FfiError::Numeric(e) if e.is_validation() => MiuraStatus::InvalidArgument,
            FfiError::Numeric(_) => MiuraStatus::NumericFailure,
            FfiError::Cocycle(
                CocycleError::Degenerate | CocycleError::UnsupportedRank(_) | CocycleError::InvalidInput(_),
            ) => MiuraStatus::InvalidArgument,
            FfiError::Cocycle(_) => MiuraStatus::NumericFailure,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F>(body: F) -> MiuraStatus
where
    F: FnOnce() -> Result<(), FfiError>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MiuraStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(&e.to_string());
            e.status()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MiuraStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8(name))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, FfiError> {
    p.as_mut().ok_or(FfiError::Null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(name))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), FfiError> {
    *out_ref(out, "out")? = owned_string(s);
    Ok(())
}

unsafe fn read_matrix(p: *const f64, n: usize, name: &'static str) -> Result<CMatrix, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    let v = std::slice::from_raw_parts(p, 2 * n * n);
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1])))
}

unsafe fn write_matrix(p: *mut f64, m: &CMatrix) {
    let n = m.ncols();
    let out = std::slice::from_raw_parts_mut(p, 2 * m.nrows() * n);
    for i in 0..m.nrows() {
        for j in 0..n {
            out[2 * (i * n + j)] = m[(i, j)].re;
            out[2 * (i * n + j) + 1] = m[(i, j)].im;
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report serializes")
}

/// Message of the last failed call on this thread, or null if it succeeded.
/// Free the result with [`miura_string_free`].
#[no_mangle]
pub extern "C" fn miura_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn miura_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the symbolic elimination for rank `n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_symbolic_new(n: usize, out: *mut *mut MiuraSymbolic) -> MiuraStatus {
    guard(|| {
        let slot = out_ref(out, "out")?;
        let inner = miura::gauge::miura_eliminate(n)?;
        *slot = Box::into_raw(Box::new(MiuraSymbolic { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`miura_symbolic_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn miura_symbolic_free(h: *mut MiuraSymbolic) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `{"n", "w", "N_minus"}` as a JSON string.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_symbolic_to_json(h: *const MiuraSymbolic, out: *mut *mut c_char) -> MiuraStatus {
    guard(|| {
        let h = handle(h, "h")?;
        write_string(out, to_json(&h.inner.to_json()))
    })
}

/// `w_i` in text form, for `2 <= i <= n`.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_symbolic_w(h: *const MiuraSymbolic, i: usize, out: *mut *mut c_char) -> MiuraStatus {
    guard(|| {
        let h = handle(h, "h")?;
        let n = h.inner.n;
        if !(2..=n).contains(&i) {
            return Err(FfiError::Invalid(format!("index {i} outside 2..={n}")));
        }
        write_string(out, h.inner.w_i(i).to_string())
    })
}

/// Builds the foliation for rank `n` and checks the Miura graph.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_foliation_new(n: usize, out: *mut *mut MiuraFoliation) -> MiuraStatus {
    guard(|| {
        let slot = out_ref(out, "out")?;
        let system = omega_minus(n)?;
        let graph = verify_miura_graph(n)?;
        *slot = Box::into_raw(Box::new(MiuraFoliation { system, graph }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`miura_foliation_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn miura_foliation_free(h: *mut MiuraFoliation) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// The 1-forms and coordinate layout as a JSON string.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_foliation_to_json(h: *const MiuraFoliation, out: *mut *mut c_char) -> MiuraStatus {
    guard(|| {
        let h = handle(h, "h")?;
        write_string(out, to_json(&h.system.to_json()))
    })
}

/// Whether every form vanishes on the Miura graph.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_foliation_graph_exact(h: *const MiuraFoliation, out: *mut bool) -> MiuraStatus {
    guard(|| {
        let h = handle(h, "h")?;
        *out_ref(out, "out")? = h.graph.is_exact();
        Ok(())
    })
}

/// Parses a potential from its JSON description.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_potential_from_json(json: *const c_char, out: *mut *mut MiuraPotential) -> MiuraStatus {
    guard(|| {
        let s = str_arg(json, "json")?;
        let slot = out_ref(out, "out")?;
        let inner = PotentialSpec::from_json(s)?;
        *slot = Box::into_raw(Box::new(MiuraPotential { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`miura_potential_from_json`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn miura_potential_free(h: *mut MiuraPotential) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Rank of the potential, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn miura_potential_rank(h: *const MiuraPotential) -> usize {
    h.as_ref().map_or(0, |p| p.inner.n())
}

/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_potential_to_json(h: *const MiuraPotential, out: *mut *mut c_char) -> MiuraStatus {
    guard(|| {
        let h = handle(h, "h")?;
        write_string(out, h.inner.to_json())
    })
}

/// Gauss factorization `M = N₋ B₊` of an `n × n` complex matrix.
///
/// `m` holds `2n²` doubles. `n_minus` and `b_plus` receive `2n²` doubles
/// each and are left untouched off the big cell; either may be null.
/// `minors` receives the `2n` leading principal minors and may be null.
///
/// # Safety
/// Non-null pointers must address buffers of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn miura_gauss_factorize(
    n: usize,
    m: *const f64,
    tol: f64,
    n_minus: *mut f64,
    b_plus: *mut f64,
    minors: *mut f64,
    in_big_cell: *mut bool,
) -> MiuraStatus {
    guard(|| {
        if n == 0 {
            return Err(FfiError::Invalid("empty matrix".into()));
        }
        if tol.is_nan() || tol < 0.0 {
            return Err(FfiError::Invalid(format!("tolerance {tol} must be non-negative")));
        }
        let r = gauss_factorize(&read_matrix(m, n, "m")?, tol);
        *out_ref(in_big_cell, "in_big_cell")? = r.in_big_cell;
        if let (Some(l), false) = (&r.n_minus, n_minus.is_null()) {
            write_matrix(n_minus, l);
        }
        if let (Some(u), false) = (&r.b_plus, b_plus.is_null()) {
            write_matrix(b_plus, u);
        }
        if !minors.is_null() {
            let out = std::slice::from_raw_parts_mut(minors, 2 * n);
            for (k, d) in r.minors.iter().enumerate() {
                out[2 * k] = d.re;
                out[2 * k + 1] = d.im;
            }
        }
        Ok(())
    })
}

/// Monodromy of the potential around a closed loop given as path JSON.
///
/// `matrix` receives `2n²` doubles and `det` two.
///
/// # Safety
/// `pot` must be a live handle, `loop_json` a nul-terminated string, and
/// the output buffers valid for the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn miura_monodromy(
    pot: *const MiuraPotential,
    loop_json: *const c_char,
    rtol: f64,
    matrix: *mut f64,
    det: *mut f64,
) -> MiuraStatus {
    guard(|| {
        let pot = &handle(pot, "pot")?.inner;
        let lp = Path::from_json(str_arg(loop_json, "loop_json")?)?;
        if matrix.is_null() {
            return Err(FfiError::Null("matrix"));
        }
        if det.is_null() {
            return Err(FfiError::Null("det"));
        }
        let opts = IntegrationOptions { rtol: checked_rtol(rtol)?, ..Default::default() };
        let r = monodromy(pot, &lp, &opts)?;
        write_matrix(matrix, &r.matrix);
        *det = r.det.re;
        *det.add(1) = r.det.im;
        Ok(())
    })
}

fn checked_rtol(rtol: f64) -> Result<f64, FfiError> {
    if rtol > 0.0 && rtol < 1.0 {
        Ok(rtol)
    } else {
        Err(FfiError::Invalid(format!("rtol {rtol} must lie in (0, 1)")))
    }
}

/// Residuals of the numeric Miura check along a path, as a JSON report.
///
/// `m0` is the `2n²`-double initial frame, or null for the identity.
///
/// # Safety
/// `pot` must be a live handle, `path_json` a nul-terminated string, `m0`
/// null or a buffer of `2n²` doubles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn miura_numeric_report_json(
    pot: *const MiuraPotential,
    path_json: *const c_char,
    m0: *const f64,
    rtol: f64,
    minor_tol: f64,
    out: *mut *mut c_char,
) -> MiuraStatus {
    guard(|| {
        let pot = &handle(pot, "pot")?.inner;
        let path = Path::from_json(str_arg(path_json, "path_json")?)?;
        let n = pot.n();
        let m0 = if m0.is_null() { CMatrix::identity(n, n) } else { read_matrix(m0, n, "m0")? };
        if minor_tol.is_nan() || minor_tol < 0.0 {
            return Err(FfiError::Invalid(format!("minor_tol {minor_tol} must be non-negative")));
        }
        let opts = FreeFieldOptions {
            integration: IntegrationOptions { rtol: checked_rtol(rtol)?, ..Default::default() },
            minor_tol,
            ..Default::default()
        };
        let report = verify_miura_numeric(pot, &path, &m0, &opts)?;
        write_string(out, to_json(&report))
    })
}

/// Transition matrix of rank 2 or 3 for the chart `z ↦ (az+b)/(cz+d)`.
///
/// `coeffs` holds `a, b, c, d` as 8 doubles; `out` receives `2·rank²`.
/// `branch` only matters for rank 2.
///
/// # Safety
/// `coeffs` and `out` must address buffers of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn miura_transition(
    rank: usize,
    coeffs: *const f64,
    z_re: f64,
    z_im: f64,
    branch: MiuraBranch,
    out: *mut f64,
) -> MiuraStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(FfiError::Null("coeffs"));
        }
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let c = std::slice::from_raw_parts(coeffs, 8);
        let chart = MobiusChart::new(
            C64::new(c[0], c[1]),
            C64::new(c[2], c[3]),
            C64::new(c[4], c[5]),
            C64::new(c[6], c[7]),
        )?;
        let z = C64::new(z_re, z_im);
        let branch = match branch {
            MiuraBranch::Principal => SqrtBranch::Principal,
            MiuraBranch::Negated => SqrtBranch::Negated,
        };
        let m = match rank {
            2 => transition_rank2(&chart, z, branch)?,
            3 => transition_rank3(&chart, z)?,
            r => return Err(CocycleError::UnsupportedRank(r).into()),
        };
        write_matrix(out, &m);
        Ok(())
    })
}
