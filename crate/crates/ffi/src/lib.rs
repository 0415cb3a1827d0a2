//! C ABI over the `qsdthresh` solver and bound calculators.
//!
//! Pairs live behind the opaque [`QsdPair`] handle. Every call returns a
//! [`QsdStatus`]; on failure a message is available from
//! [`qsd_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as [`QsdStatus::Panic`].
//!
//! Matrices cross the boundary as row-major `n * n` arrays of real and
//! imaginary parts. An imaginary pointer may be null for real input.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qsdthresh::bounds;
use qsdthresh::linalg::gen_eig_definite;
use qsdthresh::models::ModelSpec;
use qsdthresh::qsd::{PairProvenance, ProjectionMode};
use qsdthresh::threshold::auto_threshold_solve;
use qsdthresh::{threshold_solve, CMatrix, DefinitePair, Error, HermitianMatrix, QsdInstance, TimeGrid, C64};

/// Result code of every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QsdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// `S` or the reduced pair is not positive definite.
    NotDefinite = 3,
    /// The threshold discards every direction.
    EmptyThreshold = 4,
    /// A bound's hypothesis fails for the given arguments.
    HypothesisViolated = 5,
    Parse = 6,
    Io = 7,
    /// Output buffer too small; the required length is still written.
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque handle to a Hermitian pair `(H, S)`.
pub struct QsdPair {
    inner: DefinitePair,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: QsdStatus,
    message: String,
}

impl Failure {
    fn new(status: QsdStatus, message: impl Into<String>) -> Self {
        Failure { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NotDefinite { .. } | Error::NotDefinitePair(_) | Error::SingularConjugation(_) => QsdStatus::NotDefinite,
            Error::EmptyThreshold(_) => QsdStatus::EmptyThreshold,
            Error::BoundVacuous { .. }
            | Error::HypothesisViolated(_)
            | Error::ConditionTooPoor { .. }
            | Error::GapTooSmall { .. }
            | Error::OverlapTooSmall(_)
            | Error::SectorMismatch { .. }
            | Error::BoundViolation { .. } => QsdStatus::HypothesisViolated,
            Error::ParseError { .. } => QsdStatus::Parse,
            Error::Io(_) => QsdStatus::Io,
            _ => QsdStatus::InvalidInput,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs replaced"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

/// Runs `f` behind the panic boundary and records its outcome.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QsdStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let what = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure::new(QsdStatus::Panic, format!("panic: {what}")))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            QsdStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(f.message));
            f.status
        }
    }
}

fn null(name: &str) -> Failure {
    Failure::new(QsdStatus::NullPointer, format!("{name} is null"))
}

unsafe fn pair_ref<'a>(pair: *const QsdPair) -> Result<&'a DefinitePair, Failure> {
    pair.as_ref().map(|p| &p.inner).ok_or_else(|| null("pair"))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_matrix(n: usize, re: *const f64, im: *const f64, name: &str) -> Result<HermitianMatrix, Failure> {
    if re.is_null() {
        return Err(null(name));
    }
    let len = n.checked_mul(n).ok_or_else(|| Failure::new(QsdStatus::InvalidInput, "n * n overflows"))?;
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, len)) };
    let m = CMatrix::from_fn(n, n, |j, k| C64::new(re[j * n + k], im.map_or(0.0, |v| v[j * n + k])));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Failure::new(QsdStatus::InvalidInput, format!("{name} has non-finite entries")));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(HermitianMatrix::try_new(m, 1e-12 * scale.max(1.0))?)
}

fn into_handle(pair: DefinitePair, out: *mut *mut QsdPair) -> Result<(), Failure> {
    let boxed = Box::into_raw(Box::new(QsdPair { inner: pair }));
    // SAFETY: checked non-null by callers before any work is done.
    unsafe { out.write(boxed) };
    Ok(())
}

/// Builds a pair from row-major `n * n` arrays. `h_im` and `s_im` may be
/// null. Both matrices must be Hermitian to within `1e-12` of their largest
/// entry. On success `*out` owns a handle released by [`qsd_pair_free`].
///
/// # Safety
/// Non-null array pointers must reference `n * n` readable doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_pair_new(
    n: usize,
    h_re: *const f64,
    h_im: *const f64,
    s_re: *const f64,
    s_im: *const f64,
    out: *mut *mut QsdPair,
) -> QsdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err(Failure::new(QsdStatus::InvalidInput, "n must be positive"));
        }
        let h = read_matrix(n, h_re, h_im, "H")?;
        let s = read_matrix(n, s_re, s_im, "S")?;
        into_handle(DefinitePair::new(h, s, PairProvenance::Synthetic)?, out)
    })
}

/// Parses a pair from the JSON document written by `qsdthresh pair export`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_pair_from_json(json: *const c_char, out: *mut *mut QsdPair) -> QsdStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::new(QsdStatus::Parse, format!("json is not UTF-8: {e}")))?;
        into_handle(qsdthresh::pair_io::pair_from_json(text)?, out)
    })
}

/// Noiseless projected pair of the periodic transverse-field Ising chain
/// with `l` spins and field `g`, on the grid `t_j = j dt`, `j < n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_pair_tfim(l: usize, g: f64, n: usize, dt: f64, out: *mut *mut QsdPair) -> QsdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = ModelSpec::Tfim { l, g, initial: Default::default() };
        let grid = TimeGrid::Forward { n, dt };
        grid.validate()?;
        let inst = QsdInstance::from_model(&model, grid, ProjectionMode::Toeplitz)?;
        into_handle(inst.pair, out)
    })
}

/// Releases a handle. Null is a no-op.
///
/// # Safety
/// `pair` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qsd_pair_free(pair: *mut QsdPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Dimension of the pair, or 0 for a null handle.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsd_pair_dim(pair: *const QsdPair) -> usize {
    pair.as_ref().map_or(0, |p| p.inner.n())
}

/// Spectral norm of `S`.
///
/// # Safety
/// `pair` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_pair_norm_s(pair: *const QsdPair, out: *mut f64) -> QsdStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        write(out, p.norm_s(), "out")
    })
}

/// Least eigenvalue of the pair projected onto the eigenvectors of `S`
/// above `epsilon`. `out_kept` may be null.
///
/// # Safety
/// `pair` must be a live handle, `out_e0` writable, `out_kept` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_threshold_solve(
    pair: *const QsdPair,
    epsilon: f64,
    out_e0: *mut f64,
    out_kept: *mut usize,
) -> QsdStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        if out_e0.is_null() {
            return Err(null("out_e0"));
        }
        let rep = threshold_solve(&p.h, &p.s, epsilon)?;
        out_e0.write(rep.e0);
        if !out_kept.is_null() {
            out_kept.write(rep.kept_dim);
        }
        Ok(())
    })
}

/// Automatic threshold choice: lowers the threshold from `epsilon0` through
/// the eigenvalues of `S` until the energy jumps by a relative amount above
/// `r`, and reports the last accepted threshold and energy.
///
/// # Safety
/// `pair` must be a live handle and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_auto_threshold(
    pair: *const QsdPair,
    epsilon0: f64,
    r: f64,
    out_epsilon: *mut f64,
    out_e: *mut f64,
) -> QsdStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        if out_epsilon.is_null() || out_e.is_null() {
            return Err(null("output"));
        }
        let trace = auto_threshold_solve(&p.h, &p.s, epsilon0, r)?;
        out_epsilon.write(trace.final_epsilon);
        out_e.write(trace.final_e);
        Ok(())
    })
}

/// All eigenvalues of the definite pair, ascending. Writes the count to
/// `out_len`; if `capacity` is short, returns `BufferTooSmall` without
/// touching `values`.
///
/// # Safety
/// `pair` must be a live handle, `values` null or valid for `capacity`
/// doubles, `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_gen_eig_values(
    pair: *const QsdPair,
    values: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> QsdStatus {
    guard(|| {
        let p = pair_ref(pair)?;
        write(out_len, p.n(), "out_len")?;
        if capacity < p.n() {
            return Err(Failure::new(
                QsdStatus::BufferTooSmall,
                format!("need room for {} values, got {capacity}", p.n()),
            ));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let sol = gen_eig_definite(&p.h, &p.s)?;
        ptr::copy_nonoverlapping(sol.values.as_ptr(), values, sol.values.len());
        Ok(())
    })
}

/// Eigenangle perturbation bound `asin(chi / c)` for a pair with Crawford
/// number `c` under a perturbation of joint size `chi`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_stewart_bound(chi: f64, crawford: f64, out: *mut f64) -> QsdStatus {
    guard(|| write(out, bounds::stewart_bound(chi, crawford)?, "out"))
}

/// Simplified a-priori energy error bound for noiseless QSD with `2k + 1`
/// symmetric time steps.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_a_priori_bound(
    delta_e_range: f64,
    delta_e1: f64,
    gamma0_sq: f64,
    k: usize,
    out: *mut f64,
) -> QsdStatus {
    guard(|| write(out, bounds::a_priori_bound_simplified(delta_e_range, delta_e1, gamma0_sq, k)?, "out"))
}

/// Energy error caused by thresholding alone.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_thresholding_only_bound(delta_e: f64, epsilon: f64, c0_norm: f64, out: *mut f64) -> QsdStatus {
    guard(|| write(out, bounds::thresholding_only_bound(delta_e, epsilon, c0_norm)?, "out"))
}

/// Change of the best rank-`m` approximation under a perturbation with
/// spectral norm `delta_spec` and unitarily invariant norm `delta_qui`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsd_low_rank_stability_bound(
    lambda_m: f64,
    lambda_m1: f64,
    delta_spec: f64,
    delta_qui: f64,
    n: usize,
    out: *mut f64,
) -> QsdStatus {
    guard(|| write(out, bounds::low_rank_stability_bound(lambda_m, lambda_m1, delta_spec, delta_qui, n)?, "out"))
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn qsd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qsd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
