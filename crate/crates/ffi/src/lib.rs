//! C interface to `gabic`.
//!
//! Every fallible function returns a [`GabicStatus`]; on failure the message
//! is kept per thread and can be read with [`gabic_last_error`]. Handles are
//! opaque and must be released with the matching `_free` function. No
//! function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use gabic::dde::{self, InitialCondition, IntegratorConfig, Trajectory};
use gabic::spectral::{self, Branch};
use gabic::{field, subspace_params, Error, SystemParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GabicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    /// Step size too coarse for the requested accuracy.
    StepSize = 3,
    Degenerate = 4,
    Precondition = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque model parameters.
pub struct GabicParams(SystemParams);

/// Opaque integrated trajectory.
pub struct GabicTrajectory(Trajectory);

/// One bound state in the continuum.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GabicBic {
    /// `+1` for the upper dressed branch, `-1` for the lower.
    pub branch: i32,
    pub q: i64,
    /// Rotating-frame frequency.
    pub omega: f64,
    pub residue_re: f64,
    pub residue_im: f64,
    pub phase_residual: f64,
}

/// Resonant parameters hosting two bound states.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GabicDesign {
    pub omega_e: f64,
    pub g_n: f64,
    pub q_plus: i64,
    pub q_minus: i64,
    pub tau: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> GabicStatus {
    match e {
        Error::InvalidParameter { .. } => GabicStatus::InvalidParameter,
        Error::StepSize { .. } => GabicStatus::StepSize,
        Error::BeyondHorizon { .. } | Error::Precondition(_) => GabicStatus::Precondition,
        Error::Degenerate(_) => GabicStatus::Degenerate,
    }
}

fn fail(status: GabicStatus, msg: impl Into<String>) -> GabicStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, recording library errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), GabicStatus>) -> GabicStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GabicStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(GabicStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> GabicStatus {
    fail(status_of(&e), e.to_string())
}

fn null(name: &str) -> GabicStatus {
    fail(GabicStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, GabicStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, GabicStatus> {
    p.as_mut().ok_or_else(|| null(name))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gabic_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gabic_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds parameters from rates: `Γ`, `γ`, with the coupling phases chosen
/// so that `γ` has the requested sign.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gabic_params_new(
    omega_e: f64,
    omega_s: f64,
    omega_c: f64,
    g: f64,
    gamma_total: f64,
    gamma_coll: f64,
    v: f64,
    d: f64,
    out_params: *mut *mut GabicParams,
) -> GabicStatus {
    guard(|| {
        let slot = out(out_params, "out_params")?;
        *slot = ptr::null_mut();
        let p = SystemParams::from_rates(omega_e, omega_s, omega_c, g, gamma_total, gamma_coll, v, d).map_err(lib)?;
        *slot = Box::into_raw(Box::new(GabicParams(p)));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or come from [`gabic_params_new`], and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn gabic_params_free(params: *mut GabicParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Integrates the delay equation in subspace `n` from the given rotating-
/// frame initial amplitudes up to `t_max`.
///
/// # Safety
/// `params` must be a live handle and `out_traj` valid for a pointer write.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gabic_integrate(
    params: *const GabicParams,
    n: u32,
    u_e0_re: f64,
    u_e0_im: f64,
    u_s0_re: f64,
    u_s0_im: f64,
    t_max: f64,
    steps_per_delay: usize,
    out_traj: *mut *mut GabicTrajectory,
) -> GabicStatus {
    guard(|| {
        let slot = out(out_traj, "out_traj")?;
        *slot = ptr::null_mut();
        let p = &deref(params, "params")?.0;
        let init = InitialCondition::new(Complex64::new(u_e0_re, u_e0_im), Complex64::new(u_s0_re, u_s0_im)).map_err(lib)?;
        let tr = dde::integrate(p, n, &init, t_max, &IntegratorConfig::with_steps(steps_per_delay)).map_err(lib)?;
        *slot = Box::into_raw(Box::new(GabicTrajectory(tr)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or come from [`gabic_integrate`], and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn gabic_trajectory_free(traj: *mut GabicTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples; sample `k` is at `t = k·dt`. Zero for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gabic_trajectory_len(traj: *const GabicTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Sample spacing. NaN for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gabic_trajectory_dt(traj: *const GabicTrajectory) -> f64 {
    traj.as_ref().map_or(f64::NAN, |t| t.0.dt)
}

/// Writes `|U_e(t_k)|²` for every sample into `buf`.
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gabic_trajectory_population(traj: *const GabicTrajectory, buf: *mut f64, len: usize) -> GabicStatus {
    guard(|| {
        let tr = &deref(traj, "traj")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < tr.len() {
            return Err(fail(
                GabicStatus::BufferTooSmall,
                format!("need {} samples, got {len}", tr.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, tr.len());
        dst.copy_from_slice(&dde::population(tr));
        Ok(())
    })
}

/// Writes the rotating-frame `U_e(t_k)` as separate real and imaginary
/// arrays.
///
/// # Safety
/// `traj` must be a live handle; `re` and `im` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gabic_trajectory_amplitude(
    traj: *const GabicTrajectory,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> GabicStatus {
    guard(|| {
        let tr = &deref(traj, "traj")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        if len < tr.len() {
            return Err(fail(
                GabicStatus::BufferTooSmall,
                format!("need {} samples, got {len}", tr.len()),
            ));
        }
        for (k, z) in tr.u_e.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Finds the bound states of subspace `n` for an initially excited atom.
/// `*count` receives the number found; if it exceeds `capacity`, nothing is
/// written to `out` and `BufferTooSmall` is returned.
///
/// # Safety
/// `params` must be a live handle, `out` valid for `capacity` entries (may
/// be null when `capacity` is 0) and `count` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gabic_find_bics(
    params: *const GabicParams,
    n: u32,
    tol: f64,
    out_bics: *mut GabicBic,
    capacity: usize,
    count: *mut usize,
) -> GabicStatus {
    guard(|| {
        let p = &deref(params, "params")?.0;
        let count = out(count, "count")?;
        let found = spectral::find_bics(p, n, tol).map_err(lib)?.solutions;
        *count = found.len();
        if found.len() > capacity {
            return Err(fail(
                GabicStatus::BufferTooSmall,
                format!("{} solutions, capacity {capacity}", found.len()),
            ));
        }
        if found.is_empty() {
            return Ok(());
        }
        if out_bics.is_null() {
            return Err(null("out_bics"));
        }
        for (k, s) in found.iter().enumerate() {
            *out_bics.add(k) = GabicBic {
                branch: if s.branch == Branch::Plus { 1 } else { -1 },
                q: s.q,
                omega: s.omega,
                residue_re: s.residue_e.re,
                residue_im: s.residue_e.im,
                phase_residual: s.phase_residual,
            };
        }
        Ok(())
    })
}

/// Designs a resonant double bound state near `omega_e_target`.
///
/// # Safety
/// `out_design` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gabic_design_double_bic(
    omega_e_target: f64,
    tau: f64,
    q_plus: i64,
    q_minus: i64,
    out_design: *mut GabicDesign,
) -> GabicStatus {
    guard(|| {
        let slot = out(out_design, "out_design")?;
        let d = spectral::design_double_bic(omega_e_target, tau, q_plus, q_minus).map_err(lib)?;
        *slot = GabicDesign {
            omega_e: d.omega_e,
            g_n: d.g_n,
            q_plus: d.q_plus,
            q_minus: d.q_minus,
            tau: d.tau,
        };
        Ok(())
    })
}

/// Period of the two-bound-state beat in subspace `n`.
///
/// # Safety
/// `params` must be a live handle and `out_period` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gabic_beat_period(params: *const GabicParams, n: u32, out_period: *mut f64) -> GabicStatus {
    guard(|| {
        let p = &deref(params, "params")?.0;
        let slot = out(out_period, "out_period")?;
        *slot = field::beat_period(&subspace_params(p, n)).map_err(lib)?;
        Ok(())
    })
}
