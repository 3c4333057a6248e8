//! C ABI over the cvsteer numerics.
//!
//! Every fallible call returns a [`CvStatus`] and writes its result through
//! an out-pointer. On failure the message is kept per thread and can be
//! copied out with [`cvsteer_last_error_message`]. States are opaque
//! [`CvState`] handles released with [`cvsteer_state_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cvsteer::fock::{coherent_state, state_from_json, MultiModeState, Parity, ParitySetting};
use cvsteer::steering::{steering_functional_with_tolerance, SteeringSettings, ViolationSide};
use cvsteer::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDim = 3,
    Truncation = 4,
    DimensionMismatch = 5,
    DegenerateConditioning = 6,
    Numerical = 7,
    Parse = 8,
    InvalidState = 9,
    OutOfRange = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvSide {
    None = 0,
    Upper = 1,
    Lower = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvSteeringReport {
    pub value: f64,
    pub violated: bool,
    pub side: CvSide,
    pub margin: f64,
}

/// Opaque multi-mode state.
pub struct CvState {
    inner: MultiModeState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CvStatus {
    match e {
        Error::InvalidDim { .. } => CvStatus::InvalidDim,
        Error::Truncation { .. } => CvStatus::Truncation,
        Error::DimensionMismatch(_) => CvStatus::DimensionMismatch,
        Error::DegenerateConditioning { .. } => CvStatus::DegenerateConditioning,
        Error::NumericalConsistency(_) | Error::NonHermitianOperator { .. } => CvStatus::Numerical,
        Error::Parse { .. } => CvStatus::Parse,
        Error::InvalidState(_) => CvStatus::InvalidState,
        Error::OutOfRange { .. } => CvStatus::OutOfRange,
        Error::InvalidDistribution(_) | Error::InvalidParameter(_) | Error::EmptyGrid(_) => {
            CvStatus::InvalidArgument
        }
    }
}

/// Runs `f`, storing its result in `out`. Null `out`, errors and panics are
/// turned into status codes.
fn guard<T>(out: *mut T, f: impl FnOnce() -> Result<T, Error>) -> CvStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return CvStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            CvStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CvStatus::Panic
        }
    }
}

fn parity(outcome: u32) -> Result<Parity, Error> {
    u8::try_from(outcome)
        .map_err(|_| {
            Error::InvalidParameter(format!("parity outcome must be 0 or 1, got {outcome}"))
        })
        .and_then(Parity::from_outcome)
}

unsafe fn state_ref<'a>(state: *const CvState) -> Result<&'a MultiModeState, Error> {
    state
        .as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| Error::InvalidParameter("state handle is null".into()))
}

fn boxed(inner: MultiModeState) -> *mut CvState {
    Box::into_raw(Box::new(CvState { inner }))
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to fit) into `buf`. Returns the full message length in bytes, excluding
/// the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cvsteer_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Single-mode coherent state `|gamma⟩` truncated at `dim`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_state_coherent(
    gamma: f64,
    dim: usize,
    out: *mut *mut CvState,
) -> CvStatus {
    guard(out, || {
        Ok(boxed(MultiModeState::single(coherent_state(gamma, dim)?)))
    })
}

/// Two-mode state `|gamma_a⟩ ⊗ |gamma_b⟩`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_state_coherent_pair(
    gamma_a: f64,
    gamma_b: f64,
    dim: usize,
    out: *mut *mut CvState,
) -> CvStatus {
    guard(out, || {
        let s = MultiModeState::product(&[
            coherent_state(gamma_a, dim)?,
            coherent_state(gamma_b, dim)?,
        ])?;
        Ok(boxed(s))
    })
}

/// N00N state `(|N,0⟩ − |0,N⟩)/√2`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_state_noon(
    n: usize,
    dim: usize,
    out: *mut *mut CvState,
) -> CvStatus {
    guard(out, || Ok(boxed(cvsteer::steering::noon_state(n, dim)?)))
}

/// Parses a state from its JSON file contents.
///
/// # Safety
/// `json` must be null or a valid NUL-terminated string; `out` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_state_from_json(
    json: *const c_char,
    out: *mut *mut CvState,
) -> CvStatus {
    guard(out, || {
        if json.is_null() {
            return Err(Error::InvalidParameter("json text is null".into()));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::InvalidParameter(format!("json text is not UTF-8: {e}")))?;
        Ok(boxed(state_from_json(text)?))
    })
}

/// Releases a state; null is ignored.
///
/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_state_free(state: *mut CvState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_state_modes(state: *const CvState, out: *mut usize) -> CvStatus {
    guard(out, || Ok(state_ref(state)?.modes()))
}

/// Closed-form `⟨gamma|Π^parity(beta)|gamma⟩`; `parity` is 0 (even) or 1 (odd).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_analytic_parity_prob(
    gamma: f64,
    beta: f64,
    parity_outcome: u32,
    out: *mut f64,
) -> CvStatus {
    guard(out, || {
        Ok(cvsteer::oracles::analytic_parity_prob(
            gamma,
            beta,
            parity(parity_outcome)?,
        ))
    })
}

/// Numerical average certainty `½[P(b_β) + P(b_−β)]` of a single-mode state.
///
/// # Safety
/// `state` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_average_certainty(
    state: *const CvState,
    beta: f64,
    parity_outcome: u32,
    out: *mut f64,
) -> CvStatus {
    guard(out, || {
        cvsteer::fur::average_certainty(state_ref(state)?, beta, parity(parity_outcome)?)
    })
}

/// Steering functional of a two-mode state for Alice outcome `a` at
/// `(alpha1, alpha2)` and Bob outcome `b` at `(beta1, beta2)`.
///
/// # Safety
/// `state` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn cvsteer_steering_functional(
    state: *const CvState,
    a: u32,
    alpha1: f64,
    alpha2: f64,
    b: u32,
    beta1: f64,
    beta2: f64,
    tolerance: f64,
    out: *mut CvSteeringReport,
) -> CvStatus {
    guard(out, || {
        let (a, b) = (parity(a)?, parity(b)?);
        let settings = SteeringSettings::new(
            [
                ParitySetting::new(a, alpha1)?,
                ParitySetting::new(a, alpha2)?,
            ],
            [ParitySetting::new(b, beta1)?, ParitySetting::new(b, beta2)?],
        );
        let r = steering_functional_with_tolerance(state_ref(state)?, settings, tolerance)?;
        Ok(CvSteeringReport {
            value: r.value,
            violated: r.violated,
            side: match r.side {
                ViolationSide::None => CvSide::None,
                ViolationSide::Upper => CvSide::Upper,
                ViolationSide::Lower => CvSide::Lower,
            },
            margin: r.margin,
        })
    })
}

/// Key-rate lower bound in bits per shared state for a violation `delta`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_key_rate_lower_bound(delta: f64, out: *mut f64) -> CvStatus {
    guard(out, || {
        Ok(cvsteer::security::key_rate_lower_bound(delta)?.rate_lower_bound)
    })
}

/// Mutual information in bits of a row-major 2×2 joint table.
///
/// # Safety
/// `joint` must be null or point to 4 readable doubles; `out` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cvsteer_mutual_information(joint: *const f64, out: *mut f64) -> CvStatus {
    guard(out, || {
        if joint.is_null() {
            return Err(Error::InvalidParameter("joint table is null".into()));
        }
        let t = std::slice::from_raw_parts(joint, 4);
        cvsteer::security::mutual_information([[t[0], t[1]], [t[2], t[3]]])
    })
}
