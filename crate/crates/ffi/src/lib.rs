//! C ABI over the simulator.
//!
//! Every fallible call returns a [`RiscbStatus`]; on failure the message is
//! available from [`riscb_last_error_message`] on the same thread. Handles
//! are opaque and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::{c_char, size_t};

use riscb::baselines::complexity_model;
use riscb::channels::LosComponents;
use riscb::codebooks::{build_alphabet, env_aware_codebook, DedupPolicy};
use riscb::harness::{figure_preset, run_experiment, ExperimentConfig, ExperimentOutput};
use riscb::numeric::{stream_rng, StreamKind};
use riscb::theory::{prop1_bound, TheoryParams};
use riscb::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiscbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numeric = 4,
    Io = 5,
    Panic = 6,
}

impl From<&Error> for RiscbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => RiscbStatus::Config,
            Error::Io { .. } | Error::Parse { .. } => RiscbStatus::Io,
            Error::Convergence { .. } | Error::DegenerateEstimate => RiscbStatus::Numeric,
            _ => RiscbStatus::InvalidArgument,
        }
    }
}

/// Experiment configuration.
pub struct RiscbConfig(ExperimentConfig);

/// Output of one experiment run.
pub struct RiscbResults(ExperimentOutput);

/// Codebook as alphabet indices, one row per word.
pub struct RiscbCodebook {
    words: Vec<Vec<u16>>,
    n_elements: usize,
}

/// One row of a rates experiment.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RiscbRateRow {
    pub sweep_value: f64,
    pub mean_metric_rate: f64,
    pub mean_realized_rate: f64,
    pub std_error: f64,
    pub trials: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RiscbTheoryParams {
    pub p_d: f64,
    pub beta_r: f64,
    pub beta_g: f64,
    pub n_elements: u64,
    pub t_words: u64,
    /// Linear Rician factor; may be infinite.
    pub k_r: f64,
}

/// Real-multiplication counts.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RiscbComplexity {
    pub ao_estimation: u64,
    pub ao_optimization: u64,
    pub proposed_estimation: u64,
    pub proposed_optimization: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(RiscbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(RiscbStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RiscbStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(RiscbStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RiscbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RiscbStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RiscbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn riscb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default scenario configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn riscb_config_default(out: *mut *mut RiscbConfig) -> RiscbStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(RiscbConfig(ExperimentConfig::default())));
        Ok(())
    })
}

/// Parses and validates a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn riscb_config_from_toml(
    toml: *const c_char,
    out: *mut *mut RiscbConfig,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let cfg = ExperimentConfig::from_toml_str(str_arg(toml, "toml")?)?;
        *slot = Box::into_raw(Box::new(RiscbConfig(cfg)));
        Ok(())
    })
}

/// Named figure preset such as `"fig3a"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn riscb_config_from_preset(
    name: *const c_char,
    out: *mut *mut RiscbConfig,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let cfg = figure_preset(str_arg(name, "name")?)?;
        *slot = Box::into_raw(Box::new(RiscbConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn riscb_config_set_trials(
    cfg: *mut RiscbConfig,
    trials: u64,
) -> RiscbStatus {
    guard(|| {
        if trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        out_arg(cfg, "cfg")?.0.run.trials =
            usize::try_from(trials).map_err(|_| invalid("trials out of range"))?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn riscb_config_set_seed(cfg: *mut RiscbConfig, seed: u64) -> RiscbStatus {
    guard(|| {
        out_arg(cfg, "cfg")?.0.run.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn riscb_config_free(cfg: *mut RiscbConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the experiment described by `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn riscb_run(
    cfg: *const RiscbConfig,
    out: *mut *mut RiscbResults,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let result = run_experiment(&handle(cfg, "cfg")?.0)?;
        *slot = Box::into_raw(Box::new(RiscbResults(result)));
        Ok(())
    })
}

/// Number of CSV rows the results hold.
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn riscb_results_row_count(
    res: *const RiscbResults,
    out: *mut size_t,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        *slot = match &handle(res, "res")?.0 {
            ExperimentOutput::Rates(r) => r.len(),
            ExperimentOutput::Theory(r) => r.len(),
            ExperimentOutput::Complexity(r) => r.len(),
        };
        Ok(())
    })
}

fn rate_rows(res: &RiscbResults) -> Result<&[riscb::harness::ResultRow], Failure> {
    match &res.0 {
        ExperimentOutput::Rates(r) => Ok(r),
        _ => Err(invalid("results are not from a rates experiment")),
    }
}

/// Numeric fields of rates row `index`.
///
/// # Safety
/// `res` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn riscb_results_rate_row(
    res: *const RiscbResults,
    index: size_t,
    out: *mut RiscbRateRow,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let rows = rate_rows(handle(res, "res")?)?;
        let r = rows
            .get(index)
            .ok_or_else(|| invalid(format!("row {index} of {}", rows.len())))?;
        *slot = RiscbRateRow {
            sweep_value: r.sweep_value,
            mean_metric_rate: r.mean_metric_rate,
            mean_realized_rate: r.mean_realized_rate,
            std_error: r.std_error,
            trials: r.trials as u64,
        };
        Ok(())
    })
}

/// Copies the scheme label of rates row `index` into `buf` as a
/// NUL-terminated string. `needed` receives the full length including the
/// terminator; a too-small buffer yields `InvalidArgument`.
///
/// # Safety
/// `buf` must hold `buf_len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn riscb_results_scheme(
    res: *const RiscbResults,
    index: size_t,
    buf: *mut c_char,
    buf_len: size_t,
    needed: *mut size_t,
) -> RiscbStatus {
    guard(|| {
        let rows = rate_rows(handle(res, "res")?)?;
        let label = &rows
            .get(index)
            .ok_or_else(|| invalid(format!("row {index} of {}", rows.len())))?
            .scheme;
        let len = label.len() + 1;
        if let Some(n) = needed.as_mut() {
            *n = len;
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < len {
            return Err(invalid(format!("buffer of {buf_len} bytes, need {len}")));
        }
        ptr::copy_nonoverlapping(label.as_ptr().cast::<c_char>(), buf, label.len());
        *buf.add(label.len()) = 0;
        Ok(())
    })
}

/// Writes the results in the CLI's CSV format.
///
/// # Safety
/// `res` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn riscb_results_write_csv(
    res: *const RiscbResults,
    path: *const c_char,
) -> RiscbStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        handle(res, "res")?.0.write_csv(Path::new(path))?;
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn riscb_results_free(res: *mut RiscbResults) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Environment-aware codebook of up to `t_words` words for the scene in
/// `cfg`. Fewer words come back when distinct words run out and the
/// configuration allows a shortfall.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn riscb_codebook_env_aware(
    cfg: *const RiscbConfig,
    t_words: size_t,
    seed: u64,
    out: *mut *mut RiscbCodebook,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let cfg = &handle(cfg, "cfg")?.0;
        let sys = &cfg.system;
        let mut los = LosComponents::from_geometry(&cfg.geometry, sys.m_antennas, sys.n_elements)?;
        if cfg.channel.direct_blocked {
            los = los.without_direct();
        }
        let policy = DedupPolicy {
            max_attempts: None,
            allow_shortfall: cfg.run.allow_shortfall,
        };
        let book = env_aware_codebook(
            &los,
            &cfg.channel.factors(),
            t_words,
            sys.m_ref,
            &build_alphabet(sys.bits)?,
            policy,
            &mut stream_rng(seed, StreamKind::Codebook, 0, 0),
        )?;
        *slot = Box::into_raw(Box::new(RiscbCodebook {
            words: book.words().iter().map(|w| w.0.clone()).collect(),
            n_elements: book.n_elements(),
        }));
        Ok(())
    })
}

/// # Safety
/// `cb` must be a live handle and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn riscb_codebook_shape(
    cb: *const RiscbCodebook,
    words: *mut size_t,
    elements: *mut size_t,
) -> RiscbStatus {
    guard(|| {
        let cb = handle(cb, "cb")?;
        *out_arg(words, "words")? = cb.words.len();
        *out_arg(elements, "elements")? = cb.n_elements;
        Ok(())
    })
}

/// Copies word `index` into `out`, which must hold `len` entries where
/// `len` equals the element count.
///
/// # Safety
/// `out` must point to `len` writable `u16` values.
#[no_mangle]
pub unsafe extern "C" fn riscb_codebook_word(
    cb: *const RiscbCodebook,
    index: size_t,
    out: *mut u16,
    len: size_t,
) -> RiscbStatus {
    guard(|| {
        let cb = handle(cb, "cb")?;
        let word = cb
            .words
            .get(index)
            .ok_or_else(|| invalid(format!("word {index} of {}", cb.words.len())))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != word.len() {
            return Err(invalid(format!(
                "buffer of {len} entries, word has {}",
                word.len()
            )));
        }
        ptr::copy_nonoverlapping(word.as_ptr(), out, len);
        Ok(())
    })
}

/// # Safety
/// `cb` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn riscb_codebook_free(cb: *mut RiscbCodebook) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// Analytical received-power upper bound, watts.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn riscb_prop1_bound(
    params: *const RiscbTheoryParams,
    out: *mut f64,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let p = handle(params, "params")?;
        let to_usize = |v: u64| usize::try_from(v).map_err(|_| invalid("size out of range"));
        *slot = prop1_bound(&TheoryParams {
            p_d: p.p_d,
            beta_r: p.beta_r,
            beta_g: p.beta_g,
            n_elements: to_usize(p.n_elements)?,
            t_words: to_usize(p.t_words)?,
            k_r: p.k_r,
        })?;
        Ok(())
    })
}

/// Real-multiplication counts of the AO baseline and the codebook scheme.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn riscb_complexity(
    m: u64,
    n: u64,
    t: u64,
    a_bits: u32,
    n_iter: u64,
    out: *mut RiscbComplexity,
) -> RiscbStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        let r = complexity_model(m, n, t, a_bits, n_iter)?;
        *slot = RiscbComplexity {
            ao_estimation: r.ao_estimation,
            ao_optimization: r.ao_optimization,
            proposed_estimation: r.proposed_estimation,
            proposed_optimization: r.proposed_optimization,
        };
        Ok(())
    })
}
