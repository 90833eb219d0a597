//! C interface to `pepsbound`.
//!
//! Every function returns a [`PbStatus`]; on failure the message is kept per
//! thread and can be read with [`pb_last_error_message`]. Handles are opaque,
//! created by `*_new`/`*_from_json`/`*_builtin` and released by `*_free`.
//! Complex numbers cross the boundary as interleaved `(re, im)` doubles.

use pepsbound::analysis::{
    certify, gibbs_certificate, layout_states, martingale_norm, verify_main_theorem, CertificateKind, Factors, Method, Mode,
};
use pepsbound::cli::builtin_fixture;
use pepsbound::io::FixtureFile;
use pepsbound::lattice::{AbcSplit, Rect};
use pepsbound::peps::boundary::boundary_state;
use pepsbound::peps::{Mps, PepsModel};
use pepsbound::{c64, Error};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    /// Null pointer, bad enum value or undersized buffer.
    InvalidArgument = 1,
    /// Malformed fixture or inconsistent dimensions.
    Input = 2,
    /// A numerical routine failed or a matrix was singular.
    Numerical = 3,
    /// A dense size cap would be exceeded.
    CapExceeded = 4,
    /// A theorem hypothesis does not hold.
    Hypothesis = 5,
    /// An internal panic was caught.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbMethod {
    Dense = 0,
    MatrixFree = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbSource {
    Gibbs = 0,
    Identity = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbMode {
    Injective = 0,
    Mpo = 1,
}

/// Translation-invariant matrix product state.
pub struct PbMps(Mps);

/// Finite PEPS on a rectangular lattice.
pub struct PbPeps(PepsModel);

/// Dense square complex matrix.
pub struct PbOperator(Vec<c64>, usize);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> PbStatus {
    match e {
        Error::CapExceeded { .. } => PbStatus::CapExceeded,
        Error::Hypothesis(_) => PbStatus::Hypothesis,
        Error::DimensionMismatch(_)
        | Error::UnknownLabel(_)
        | Error::DuplicateLabel(_)
        | Error::Geometry(_)
        | Error::Input(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::NotHermitian { .. }
        | Error::SupportMismatch(_) => PbStatus::Input,
        _ => PbStatus::Numerical,
    }
}

enum Fail {
    Arg(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PbStatus::Ok
        }
        Ok(Err(Fail::Arg(m))) => {
            set_error(m.to_string());
            PbStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            set_error(format!("internal panic: {}", msg.unwrap_or_default()));
            PbStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Arg("null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Arg("string is not UTF-8"))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Arg("null handle"))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Arg("null output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Arg("null output pointer"));
    }
    *out = v;
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// MPS from `d` matrices of size `bond × bond`, given as `d·bond·bond`
/// interleaved complex entries, matrix by matrix, each row-major.
///
/// # Safety
/// `entries` must point to `2·d·bond·bond` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_mps_new(d: usize, bond: usize, entries: *const f64, out: *mut *mut PbMps) -> PbStatus {
    guard(|| {
        if entries.is_null() || d == 0 || bond == 0 {
            return Err(Fail::Arg("null entries or zero dimension"));
        }
        let e = std::slice::from_raw_parts(entries, 2 * d * bond * bond);
        let mats = (0..d)
            .map(|k| {
                faer::Mat::from_fn(bond, bond, |i, j| {
                    let o = 2 * ((k * bond + i) * bond + j);
                    c64::new(e[o], e[o + 1])
                })
            })
            .collect();
        put(out, PbMps(Mps::new(mats)?))
    })
}

/// MPS from a `pepsbound.fixture.v1` JSON document of kind `mps`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_mps_from_json(json: *const c_char, out: *mut *mut PbMps) -> PbStatus {
    guard(|| put(out, PbMps(FixtureFile::parse(text(json)?)?.mps()?)))
}

/// Built-in MPS fixture by name (`aklt`, `gapped`, `isometric`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_mps_builtin(name: *const c_char, out: *mut *mut PbMps) -> PbStatus {
    guard(|| put(out, PbMps(builtin_fixture(text(name)?)?.mps()?)))
}

/// # Safety
/// `m` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pb_mps_free(m: *mut PbMps) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Leading transfer eigenvalue `λ` and the ratio `γ = |λ₂|/λ`.
///
/// # Safety
/// `m` must be a valid handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_mps_transfer_gap(m: *const PbMps, lambda: *mut f64, gamma: *mut f64) -> PbStatus {
    guard(|| {
        let sp = deref(m)?.0.transfer_spectrum()?;
        write(lambda, sp.lambda)?;
        write(gamma, sp.gamma)
    })
}

/// Open chain of `length` sites as a one-row PEPS.
///
/// # Safety
/// `m` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_mps_to_peps(m: *const PbMps, length: usize, out: *mut *mut PbPeps) -> PbStatus {
    guard(|| put(out, PbPeps(deref(m)?.0.to_peps(length)?)))
}

/// PEPS from a `pepsbound.fixture.v1` JSON document of kind `peps`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_peps_from_json(json: *const c_char, out: *mut *mut PbPeps) -> PbStatus {
    guard(|| put(out, PbPeps(FixtureFile::parse(text(json)?)?.peps()?)))
}

/// Built-in PEPS fixture by name (`product`, `z2`, `z3`, `random-peps`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_peps_builtin(name: *const c_char, out: *mut *mut PbPeps) -> PbStatus {
    guard(|| put(out, PbPeps(builtin_fixture(text(name)?)?.peps()?)))
}

/// # Safety
/// `p` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pb_peps_free(p: *mut PbPeps) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Lattice shape and physical dimension.
///
/// # Safety
/// `p` must be a valid handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_peps_shape(p: *const PbPeps, rows: *mut usize, cols: *mut usize, phys_dim: *mut usize) -> PbStatus {
    guard(|| {
        let m = &deref(p)?.0;
        write(rows, m.lattice.rows)?;
        write(cols, m.lattice.cols)?;
        write(phys_dim, m.phys_dim)
    })
}

/// Boundary state `ρ_∂A` of the rectangle with corner `(row, col)`.
///
/// # Safety
/// `p` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_peps_boundary_state(
    p: *const PbPeps,
    row: usize,
    col: usize,
    height: usize,
    width: usize,
    out: *mut *mut PbOperator,
) -> PbStatus {
    guard(|| {
        let bs = boundary_state(&deref(p)?.0, &Rect::new(row as i64, col as i64, height, width))?;
        let n = bs.rho.nrows();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(bs.rho[(i, j)]);
            }
        }
        put(out, PbOperator(v, n))
    })
}

/// Row (and column) count of an operator.
///
/// # Safety
/// `op` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn pb_operator_dim(op: *const PbOperator) -> usize {
    op.as_ref().map(|o| o.1).unwrap_or(0)
}

/// Copies the operator into `buf` as `2·dim²` interleaved doubles, row-major.
///
/// # Safety
/// `op` must be a valid handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_operator_entries(op: *const PbOperator, buf: *mut f64, len: usize) -> PbStatus {
    guard(|| {
        let o = deref(op)?;
        if buf.is_null() || len < 2 * o.0.len() {
            return Err(Fail::Arg("buffer too small"));
        }
        let b = std::slice::from_raw_parts_mut(buf, 2 * o.0.len());
        for (k, z) in o.0.iter().enumerate() {
            b[2 * k] = z.re;
            b[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pb_operator_free(op: *mut PbOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

fn split_of(m: &PepsModel, row: usize, height: usize, widths: [usize; 3]) -> Result<AbcSplit, Error> {
    let total = Rect::new(row as i64, 0, height, widths.iter().sum());
    AbcSplit::new(m.lattice, total, widths, 0, 0.0)
}

/// `‖P_AB P_BC − P_ABC‖` for the split of rows `row..row+height` into column
/// blocks of widths `wa, wb, wc` starting at column 0; `method` is a [`PbMethod`].
///
/// # Safety
/// `p` must be a valid handle; `norm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_martingale_norm(
    p: *const PbPeps,
    row: usize,
    height: usize,
    wa: usize,
    wb: usize,
    wc: usize,
    method: i32,
    norm: *mut f64,
) -> PbStatus {
    guard(|| {
        let m = &deref(p)?.0;
        let split = split_of(m, row, height, [wa, wb, wc])?;
        let method = match method {
            x if x == PbMethod::Dense as i32 => Method::Dense,
            x if x == PbMethod::MatrixFree as i32 => Method::MatrixFree,
            _ => return Err(Fail::Arg("unknown method")),
        };
        write(norm, martingale_norm(m, &split, method)?.norm)
    })
}

/// Builds a certificate on the split and checks `‖P_AB P_BC − P_ABC‖ ≤ 8ε`.
/// `source` is a [`PbSource`], `mode` a [`PbMode`]. `pass` is 1 or 0, and −1
/// when `ε > 1` and the inequality is not asserted.
///
/// # Safety
/// `p` must be a valid handle; outputs must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pb_factorize(
    p: *const PbPeps,
    row: usize,
    height: usize,
    wa: usize,
    wb: usize,
    wc: usize,
    source: i32,
    mode: i32,
    epsilon: *mut f64,
    martingale: *mut f64,
    pass: *mut i32,
) -> PbStatus {
    guard(|| {
        let m = &deref(p)?.0;
        let split = split_of(m, row, height, [wa, wb, wc])?;
        let mode = match mode {
            x if x == PbMode::Injective as i32 => Mode::Injective,
            x if x == PbMode::Mpo as i32 => Mode::Mpo,
            _ => return Err(Fail::Arg("unknown mode")),
        };
        let cert = match source {
            x if x == PbSource::Gibbs as i32 => gibbs_certificate(m, &split, mode)?,
            x if x == PbSource::Identity as i32 => {
                let (layout, rho) = layout_states(m, &split)?;
                certify(Factors::identity(&layout), &layout, &rho, mode, CertificateKind::Identity)?
            }
            _ => return Err(Fail::Arg("unknown certificate source")),
        };
        let th = verify_main_theorem(m, &split, &cert)?;
        write(epsilon, th.epsilon)?;
        write(martingale, th.martingale.norm)?;
        write(pass, th.pass.map(i32::from).unwrap_or(-1))
    })
}
