//! C ABI over `cvqec`.
//!
//! Every fallible function returns a [`CvqecStatus`] and writes results
//! through out-pointers. On failure a message is available from
//! [`cvqec_last_error`] until the next call on the same thread. Objects
//! are opaque handles released with their matching `_free` function.
//!
//! Quadratures are passed as `0` (x) or `1` (p); qumodes are 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cvqec::config::RunConfig;
use cvqec::decoder::{self, SyndromeCovariance, WhitenedDecoder};
use cvqec::gkp_analytics::{self, SeriesControl};
use cvqec::phase_space::{self, Quadrature, Squeezing, CODE_SIZE};
use cvqec::simulator::{Mode, Simulator, TrajectoryStats};
use cvqec::steane::{self, SyndromeModel};
use cvqec::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvqecStatus {
    Ok = 0,
    InvalidArgument = 1,
    DegenerateModel = 2,
    NotConverged = 3,
    Config = 4,
    Runtime = 5,
    NullPointer = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CvqecStatus {
    match e {
        Error::InvalidArgument(_) => CvqecStatus::InvalidArgument,
        Error::DegenerateModel(_) => CvqecStatus::DegenerateModel,
        Error::SeriesNotConverged { .. } => CvqecStatus::NotConverged,
        Error::Config(_) => CvqecStatus::Config,
        Error::Runtime(_) => CvqecStatus::Runtime,
    }
}

/// Runs `f`, mapping errors and panics to a status and a stored message.
fn guard<F: FnOnce() -> Result<(), (CvqecStatus, String)>>(f: F) -> CvqecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CvqecStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CvqecStatus::Panic
        }
    }
}

fn lift(e: Error) -> (CvqecStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (CvqecStatus, String) {
    (CvqecStatus::NullPointer, format!("{name} is null"))
}

fn quadrature(q: u32) -> Result<Quadrature, (CvqecStatus, String)> {
    match q {
        0 => Ok(Quadrature::X),
        1 => Ok(Quadrature::P),
        _ => Err((CvqecStatus::InvalidArgument, format!("quadrature must be 0 (x) or 1 (p), got {q}"))),
    }
}

/// `r = 0` selects ideal squeezing.
fn squeezing(r: f64) -> Result<Squeezing, (CvqecStatus, String)> {
    if r == 0.0 {
        Ok(Squeezing::Ideal)
    } else {
        Squeezing::finite(r).map_err(lift)
    }
}

unsafe fn write<T>(out: *mut T, name: &str, v: T) -> Result<(), (CvqecStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: caller guarantees `out` points to writable storage for T
    unsafe { out.write(v) };
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn cvqec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cvqec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Right tail of the standard normal distribution.
#[no_mangle]
pub extern "C" fn cvqec_q_function(x: f64) -> f64 {
    gkp_analytics::q_function(x)
}

/// Reduces `v` into `[-sqrt(pi), sqrt(pi))`.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cvqec_modular_reduce(v: f64, out: *mut f64) -> CvqecStatus {
    guard(|| unsafe { write(out, "out", phase_space::modular_reduce(v).map_err(lift)?) })
}

/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cvqec_residual_variance(sigma: f64, out: *mut f64) -> CvqecStatus {
    guard(|| unsafe {
        write(out, "out", gkp_analytics::residual_variance(sigma, &SeriesControl::default()).map_err(lift)?)
    })
}

/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cvqec_residual_pdf(xi: f64, sigma: f64, out: *mut f64) -> CvqecStatus {
    guard(|| unsafe {
        write(out, "out", gkp_analytics::residual_pdf(xi, sigma, &SeriesControl::default()).map_err(lift)?)
    })
}

/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cvqec_finite_squeezing_residual_variance(sigma: f64, r: f64, out: *mut f64) -> CvqecStatus {
    guard(|| unsafe {
        write(out, "out", gkp_analytics::finite_squeezing_residual_variance(sigma, r).map_err(lift)?)
    })
}

/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cvqec_lattice_crossing_probability(sigma: f64, out: *mut f64) -> CvqecStatus {
    guard(|| unsafe { write(out, "out", gkp_analytics::lattice_crossing_probability(sigma).map_err(lift)?) })
}

/// Outer syndrome `s = M_q eps` for seven per-qumode errors.
///
/// # Safety
/// `eps` must point to 7 readable doubles and `out` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cvqec_syndrome(quad: u32, eps: *const f64, out: *mut f64) -> CvqecStatus {
    guard(|| {
        let q = quadrature(quad)?;
        if eps.is_null() {
            return Err(null("eps"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees 7 readable values
        let e: [f64; CODE_SIZE] = unsafe { std::ptr::read(eps.cast()) };
        let s = steane::compute_syndrome(&SyndromeModel::standard(), q, &e, None, None).map_err(lift)?;
        // SAFETY: caller guarantees 3 writable values
        unsafe { std::ptr::copy_nonoverlapping(s.as_ptr(), out, 3) };
        Ok(())
    })
}

/// Opaque whitened decoder for one quadrature.
pub struct CvqecDecoder {
    model: SyndromeModel,
    cov: SyndromeCovariance,
    decoder: WhitenedDecoder,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CvqecDecodeResult {
    /// 1-based qumode with the largest whitened statistic.
    pub j_star: u32,
    pub d_hat: f64,
    pub t: [f64; 7],
    pub triggered: bool,
}

/// Builds a decoder for residual variance `sigma_res_sq`; `squeezing_r = 0`
/// means ideal ancillas.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cvqec_decoder_new(
    quad: u32,
    sigma_res_sq: f64,
    squeezing_r: f64,
    out: *mut *mut CvqecDecoder,
) -> CvqecStatus {
    guard(|| {
        let q = quadrature(quad)?;
        let model = SyndromeModel::standard();
        let cov = decoder::build_covariance(&model, q, sigma_res_sq, squeezing(squeezing_r)?).map_err(lift)?;
        let decoder = WhitenedDecoder::new(&model, &cov);
        let handle = Box::into_raw(Box::new(CvqecDecoder { model, cov, decoder }));
        if out.is_null() {
            // SAFETY: just allocated above
            drop(unsafe { Box::from_raw(handle) });
            return Err(null("out"));
        }
        // SAFETY: checked non-null
        unsafe { out.write(handle) };
        Ok(())
    })
}

fn decoder_ref<'a>(d: *const CvqecDecoder) -> Result<&'a CvqecDecoder, (CvqecStatus, String)> {
    // SAFETY: caller passes a handle from cvqec_decoder_new or null
    unsafe { d.as_ref() }.ok_or_else(|| null("decoder"))
}

/// # Safety
/// `decoder` must come from [`cvqec_decoder_new`]; `syndrome` must point to
/// 3 readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvqec_decoder_decode(
    decoder: *const CvqecDecoder,
    syndrome: *const f64,
    threshold: f64,
    out: *mut CvqecDecodeResult,
) -> CvqecStatus {
    guard(|| {
        let d = decoder_ref(decoder)?;
        if syndrome.is_null() {
            return Err(null("syndrome"));
        }
        // SAFETY: caller guarantees 3 readable values
        let s: [f64; 3] = unsafe { std::ptr::read(syndrome.cast()) };
        let r = d.decoder.decode(&s, threshold).map_err(lift)?;
        let res = CvqecDecodeResult { j_star: r.j_star as u32, d_hat: r.d_hat, t: r.t, triggered: r.triggered };
        unsafe { write(out, "out", res) }
    })
}

/// `Var(d_hat)` for a 1-based qumode.
///
/// # Safety
/// `decoder` must come from [`cvqec_decoder_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvqec_decoder_estimator_variance(
    decoder: *const CvqecDecoder,
    qumode: u32,
    out: *mut f64,
) -> CvqecStatus {
    guard(|| {
        let d = decoder_ref(decoder)?;
        let v = decoder::estimator_variance(&d.model, &d.cov, qumode as usize).map_err(lift)?;
        unsafe { write(out, "out", v) }
    })
}

/// Union bound on mislocalizing an error of magnitude `d` on `qumode`.
///
/// # Safety
/// `decoder` must come from [`cvqec_decoder_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvqec_decoder_miscorrection_bound(
    decoder: *const CvqecDecoder,
    qumode: u32,
    d: f64,
    out: *mut f64,
) -> CvqecStatus {
    guard(|| {
        let h = decoder_ref(decoder)?;
        let v = decoder::miscorrection_bound(&h.model, &h.cov, qumode as usize, d).map_err(lift)?;
        unsafe { write(out, "out", v) }
    })
}

/// Releases a decoder. Null is ignored.
///
/// # Safety
/// `decoder` must come from [`cvqec_decoder_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cvqec_decoder_free(decoder: *mut CvqecDecoder) {
    if !decoder.is_null() {
        // SAFETY: ownership returns to Rust exactly once
        drop(unsafe { Box::from_raw(decoder) });
    }
}

/// Opaque per-round statistics of one simulated scenario.
pub struct CvqecStats {
    stats: TrajectoryStats,
}

/// Runs one scenario. `config_json` is a run configuration (unknown keys are
/// rejected; NULL or `{}` gives the defaults). `mode`: 0 no QEC, 1 GKP only,
/// 2 concatenated. `workers = 0` uses all cores.
///
/// # Safety
/// `config_json` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvqec_experiment_run(
    config_json: *const c_char,
    mode: u32,
    workers: usize,
    out: *mut *mut CvqecStats,
) -> CvqecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = if config_json.is_null() {
            RunConfig::default()
        } else {
            // SAFETY: caller guarantees a NUL-terminated string
            let text = unsafe { CStr::from_ptr(config_json) }
                .to_str()
                .map_err(|_| (CvqecStatus::Config, "config is not valid UTF-8".to_string()))?;
            RunConfig::from_json(text).map_err(lift)?
        };
        let mode = match mode {
            0 => Mode::NoQec,
            1 => Mode::GkpOnly,
            2 => Mode::Concatenated,
            m => return Err((CvqecStatus::InvalidArgument, format!("mode must be 0, 1 or 2, got {m}"))),
        };
        let stats = Simulator::new(cfg.scenario(mode)).and_then(|s| s.run(workers, 0)).map_err(lift)?;
        // SAFETY: checked non-null
        unsafe { out.write(Box::into_raw(Box::new(CvqecStats { stats }))) };
        Ok(())
    })
}

fn stats_ref<'a>(s: *const CvqecStats) -> Result<&'a TrajectoryStats, (CvqecStatus, String)> {
    // SAFETY: caller passes a handle from cvqec_experiment_run or null
    unsafe { s.as_ref() }.map(|s| &s.stats).ok_or_else(|| null("stats"))
}

/// Number of rounds, 0 for a null handle.
///
/// # Safety
/// `stats` must be NULL or come from [`cvqec_experiment_run`].
#[no_mangle]
pub unsafe extern "C" fn cvqec_stats_rounds(stats: *const CvqecStats) -> usize {
    stats_ref(stats).map(|s| s.rounds()).unwrap_or(0)
}

unsafe fn copy_series(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (CvqecStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err((CvqecStatus::InvalidArgument, format!("buffer holds {len} values, need {}", src.len())));
    }
    // SAFETY: caller guarantees `len` writable values
    unsafe { std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// Copies the per-round mean into `buf` (capacity `len` >= rounds).
///
/// # Safety
/// `stats` must come from [`cvqec_experiment_run`]; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cvqec_stats_copy_mean(stats: *const CvqecStats, buf: *mut f64, len: usize) -> CvqecStatus {
    guard(|| unsafe { copy_series(&stats_ref(stats)?.mean, buf, len) })
}

/// Copies the per-round sample standard deviation into `buf`.
///
/// # Safety
/// `stats` must come from [`cvqec_experiment_run`]; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cvqec_stats_copy_std(stats: *const CvqecStats, buf: *mut f64, len: usize) -> CvqecStatus {
    guard(|| unsafe { copy_series(&stats_ref(stats)?.std, buf, len) })
}

/// Releases statistics. Null is ignored.
///
/// # Safety
/// `stats` must come from [`cvqec_experiment_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cvqec_stats_free(stats: *mut CvqecStats) {
    if !stats.is_null() {
        // SAFETY: ownership returns to Rust exactly once
        drop(unsafe { Box::from_raw(stats) });
    }
}
