// SPDX-License-Identifier: MIT OR Apache-2.0

//! C ABI over `tprlab`.
//!
//! Objects cross the boundary as opaque handles created by `*_load`,
//! `*_read` or `*_new` functions and released with the matching `*_free`.
//! Fallible calls return a [`TprStatus`]; on failure a message is kept per
//! thread and can be fetched with [`tpr_last_error`]. Panics never unwind
//! into the caller; they surface as `TPR_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tprlab::analysis::effective_linear_probe;
use tprlab::encodings::{read_dataset, Dataset};
use tprlab::interventions::Intervener;
use tprlab::othello::{Board, CellColor, Edit, Player, Square, Transcript};
use tprlab::probes::{accuracy, load_probe, save_probe, AnyProbe, Probe, ProbeKind};
use tprlab::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TprStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IllegalMove = 3,
    Io = 4,
    Format = 5,
    DimensionMismatch = 6,
    InsufficientDimension = 7,
    Degenerate = 8,
    NoValidTarget = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TprProbeKind {
    Linear = 0,
    Bilinear = 1,
    Trilinear = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TprPlayer {
    Black = 0,
    White = 1,
}

/// Opaque encoded dataset.
pub struct TprDataset(Dataset);

/// Opaque trained probe of any family.
pub struct TprProbe(AnyProbe);

/// Opaque Othello position.
pub struct TprBoard(Board);

/// Logits per call: 64 squares times 3 colors, square-major.
pub const TPR_LOGITS_LEN: usize = 192;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TprStatus {
    match e {
        Error::IllegalMove(_) => TprStatus::IllegalMove,
        Error::NoValidTarget { .. } => TprStatus::NoValidTarget,
        Error::DimensionMismatch { .. } => TprStatus::DimensionMismatch,
        Error::Format(_) => TprStatus::Format,
        Error::Io(_) => TprStatus::Io,
        Error::InsufficientDimension { .. } => TprStatus::InsufficientDimension,
        Error::InvalidArgument(_) => TprStatus::InvalidArgument,
        Error::ZeroDirection
        | Error::ZeroVector { .. }
        | Error::ZeroRow(_)
        | Error::DegenerateVariance(_)
        | Error::DisconnectedGraph => TprStatus::Degenerate,
    }
}

/// Failure raised on the FFI side before reaching the library.
struct Fail(TprStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TprStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, records any failure and converts it to a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> TprStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TprStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            TprStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TprStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    let slot = as_mut(out, "output handle")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

fn color(v: u8, what: &str) -> Result<CellColor, Fail> {
    CellColor::from_byte(v).ok_or_else(|| Fail(TprStatus::InvalidArgument, format!("{what} {v} is not 0, 1 or 2")))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tpr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tpr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- datasets ----

#[no_mangle]
pub unsafe extern "C" fn tpr_dataset_read(path: *const c_char, out: *mut *mut TprDataset) -> TprStatus {
    guard(|| {
        let d = read_dataset(&PathBuf::from(as_str(path, "path")?))?;
        put(out, TprDataset(d))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tpr_dataset_free(d: *mut TprDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of samples, 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tpr_dataset_len(d: *const TprDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Activation width, 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tpr_dataset_d_model(d: *const TprDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.d_model())
}

/// Copies sample `index` into `h_out` (`h_len` must equal d_model) and its
/// 64 egocentric labels into `labels_out`.
#[no_mangle]
pub unsafe extern "C" fn tpr_dataset_sample(
    d: *const TprDataset,
    index: usize,
    h_out: *mut f32,
    h_len: usize,
    labels_out: *mut u8,
) -> TprStatus {
    guard(|| {
        let d = &as_ref(d, "dataset")?.0;
        if index >= d.len() {
            return Err(Fail(
                TprStatus::InvalidArgument,
                format!("index {index} out of range for {} samples", d.len()),
            ));
        }
        if h_len != d.d_model() {
            return Err(Error::DimensionMismatch {
                expected: d.d_model(),
                actual: h_len,
                context: "activation buffer",
            }
            .into());
        }
        let s = d.get(index);
        slice_mut(h_out, h_len, "activation buffer")?.copy_from_slice(s.h);
        for (o, c) in slice_mut(labels_out, 64, "label buffer")?.iter_mut().zip(s.labels) {
            *o = c.idx() as u8;
        }
        Ok(())
    })
}

// ---- probes ----

#[no_mangle]
pub unsafe extern "C" fn tpr_probe_load(path: *const c_char, out: *mut *mut TprProbe) -> TprStatus {
    guard(|| {
        let p = load_probe(&PathBuf::from(as_str(path, "path")?))?;
        put(out, TprProbe(p))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tpr_probe_save(p: *const TprProbe, path: *const c_char) -> TprStatus {
    guard(|| {
        save_probe(&PathBuf::from(as_str(path, "path")?), &as_ref(p, "probe")?.0)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tpr_probe_free(p: *mut TprProbe) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn tpr_probe_kind(p: *const TprProbe, out: *mut TprProbeKind) -> TprStatus {
    guard(|| {
        let k = match as_ref(p, "probe")?.0.kind() {
            ProbeKind::Linear => TprProbeKind::Linear,
            ProbeKind::Bilinear => TprProbeKind::Bilinear,
            ProbeKind::Trilinear => TprProbeKind::Trilinear,
        };
        *as_mut(out, "output")? = k;
        Ok(())
    })
}

/// Activation width, 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tpr_probe_d_model(p: *const TprProbe) -> usize {
    p.as_ref().map_or(0, |p| p.0.d_model())
}

/// Trainable parameter count, 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tpr_probe_param_count(p: *const TprProbe) -> usize {
    p.as_ref().map_or(0, |p| p.0.param_count())
}

/// Writes the 192 logits for activation `h` into `logits_out`, entry
/// `3 * square + color`.
#[no_mangle]
pub unsafe extern "C" fn tpr_probe_forward(
    p: *const TprProbe,
    h: *const f64,
    h_len: usize,
    logits_out: *mut f64,
) -> TprStatus {
    guard(|| {
        let l = as_ref(p, "probe")?.0.forward(slice(h, h_len, "activation")?)?;
        for (o, x) in slice_mut(logits_out, TPR_LOGITS_LEN, "logit buffer")?
            .iter_mut()
            .zip(l.iter().flatten())
        {
            *o = *x;
        }
        Ok(())
    })
}

/// Fraction of (sample, square) pairs classified correctly.
#[no_mangle]
pub unsafe extern "C" fn tpr_probe_accuracy(p: *const TprProbe, d: *const TprDataset, out: *mut f64) -> TprStatus {
    guard(|| {
        let a = accuracy(&as_ref(p, "probe")?.0, &as_ref(d, "dataset")?.0)?;
        *as_mut(out, "output")? = a;
        Ok(())
    })
}

/// New linear probe computing the same logits as `p`.
#[no_mangle]
pub unsafe extern "C" fn tpr_probe_effective(p: *const TprProbe, out: *mut *mut TprProbe) -> TprStatus {
    guard(|| {
        let lin = effective_linear_probe(&as_ref(p, "probe")?.0);
        put(out, TprProbe(lin.into()))
    })
}

/// Moves activation `h` so that the probe reads `to` on `square`
/// (a token such as "D3") instead of `from`, with step `alpha`. Colors
/// are 0 empty, 1 current player, 2 opponent. Linear probes ignore `from`.
#[no_mangle]
pub unsafe extern "C" fn tpr_intervene(
    p: *const TprProbe,
    h: *const f64,
    h_len: usize,
    square: *const c_char,
    from: u8,
    to: u8,
    alpha: f64,
    h_out: *mut f64,
) -> TprStatus {
    guard(|| {
        let probe = &as_ref(p, "probe")?.0;
        let square: Square = as_str(square, "square")?.parse()?;
        let edit = Edit {
            square,
            from: color(from, "from")?,
            to: color(to, "to")?,
        };
        if edit.from == edit.to {
            return Err(Fail(TprStatus::InvalidArgument, "from and to colors are equal".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Fail(TprStatus::InvalidArgument, format!("alpha {alpha} must be positive")));
        }
        let moved = Intervener::new(probe).single(slice(h, h_len, "activation")?, &edit, alpha)?;
        slice_mut(h_out, h_len, "output activation")?.copy_from_slice(&moved);
        Ok(())
    })
}

// ---- boards ----

/// Standard opening position, Black to move. Never NULL.
#[no_mangle]
pub extern "C" fn tpr_board_new() -> *mut TprBoard {
    Box::into_raw(Box::new(TprBoard(Board::initial())))
}

/// Position after a space-separated transcript such as "D3 C5 F6".
#[no_mangle]
pub unsafe extern "C" fn tpr_board_from_transcript(moves: *const c_char, out: *mut *mut TprBoard) -> TprStatus {
    guard(|| {
        let t: Transcript = as_str(moves, "transcript")?.parse()?;
        put(out, TprBoard(t.final_board()))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tpr_board_free(b: *mut TprBoard) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Plays `square` for the side to move. The board is unchanged on failure.
#[no_mangle]
pub unsafe extern "C" fn tpr_board_apply(b: *mut TprBoard, square: *const c_char) -> TprStatus {
    guard(|| {
        let b = as_mut(b, "board")?;
        let sq: Square = as_str(square, "square")?.parse()?;
        b.0 = b.0.apply_move(sq)?;
        Ok(())
    })
}

/// Legal moves as a bit mask, bit `8 * row + col`. 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn tpr_board_legal_mask(b: *const TprBoard) -> u64 {
    b.as_ref().map_or(0, |b| b.0.legal_mask())
}

#[no_mangle]
pub unsafe extern "C" fn tpr_board_to_move(b: *const TprBoard, out: *mut TprPlayer) -> TprStatus {
    guard(|| {
        let p = match as_ref(b, "board")?.0.to_move() {
            Player::Black => TprPlayer::Black,
            Player::White => TprPlayer::White,
        };
        *as_mut(out, "output")? = p;
        Ok(())
    })
}

/// Writes 64 egocentric labels (0 empty, 1 side to move, 2 opponent).
#[no_mangle]
pub unsafe extern "C" fn tpr_board_labels(b: *const TprBoard, labels_out: *mut u8) -> TprStatus {
    guard(|| {
        let labels = as_ref(b, "board")?.0.egocentric_labels();
        for (o, c) in slice_mut(labels_out, 64, "label buffer")?.iter_mut().zip(labels) {
            *o = c.idx() as u8;
        }
        Ok(())
    })
}
