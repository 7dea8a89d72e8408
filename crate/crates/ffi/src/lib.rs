//! C interface to `z2lgt`.
//!
//! Objects cross the boundary as opaque handles created by a `*_new` or
//! producer function and released with the matching `*_free`. Every function
//! that can fail returns a [`Z2Status`]; on failure a message is kept per
//! thread and can be read with [`z2lgt_last_error`]. Strings returned to the
//! caller are released with [`z2lgt_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use z2lgt::circuit::{cx_count, trotter_step, Circuit, Mode};
use z2lgt::error::Error;
use z2lgt::hamiltonians::{build, Couplings, Theory};
use z2lgt::lattice::LatticeGeometry;
use z2lgt::pauli::PauliSum;
use z2lgt::pvqd::{run_pvqd, PartOrder, PvqdConfig, PvqdTrace};
use z2lgt::simulator::{expval, fidelity, ExactPropagator, StateVector, STATE_LIMIT};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Z2Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooManyQubits = 3,
    BadParameterCount = 4,
    ConvergenceFailure = 5,
    Parse = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Z2Theory {
    Pure = 0,
    Full = 1,
    Vc = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Z2Mode {
    Naive = 0,
    Optimized = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2Couplings {
    pub lambda_e: f64,
    pub lambda_b: f64,
    pub eps: f64,
    pub mass: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2PvqdConfig {
    pub k: usize,
    /// Absolute time step.
    pub delta: f64,
    pub n_steps: usize,
    pub theory: Z2Theory,
    pub grad_eps: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Non-zero applies the parts of a layer in listed order, H_B first.
    pub listed_order: i32,
}

/// One row of a pVQD trace. `occupation` is NaN for the pure theory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2PvqdStep {
    pub step: usize,
    pub time: f64,
    pub cost: f64,
    pub iters: usize,
    pub converged: i32,
    pub plaquette: f64,
    pub occupation: f64,
    pub fid_trotter: f64,
    pub fid_exact: f64,
}

pub struct Z2Lattice(LatticeGeometry);
pub struct Z2PauliSum(PauliSum);
pub struct Z2Circuit(Circuit);
pub struct Z2State(StateVector);
pub struct Z2Trace(PvqdTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> Z2Status {
    match e {
        Error::TooManyQubits { .. } => Z2Status::TooManyQubits,
        Error::BadParameterCount { .. } => Z2Status::BadParameterCount,
        Error::ConvergenceFailure(_) => Z2Status::ConvergenceFailure,
        Error::Parse { .. } => Z2Status::Parse,
        _ => Z2Status::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> Z2Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Z2Status::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            Z2Status::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            Z2Status::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = CString::new(s).map_err(|e| Error::InvalidArgument(e.to_string()))?.into_raw();
    Ok(())
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn theory(t: Z2Theory) -> Theory {
    match t {
        Z2Theory::Pure => Theory::Pure,
        Z2Theory::Full => Theory::Full,
        Z2Theory::Vc => Theory::Vc,
    }
}

fn couplings(c: Z2Couplings) -> Couplings {
    Couplings { lambda_e: c.lambda_e, lambda_b: c.lambda_b, eps: c.eps, mass: c.mass }
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn z2lgt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Couplings for gauge coupling `g` without matter.
#[no_mangle]
pub extern "C" fn z2lgt_couplings_from_g(g: f64) -> Z2Couplings {
    let c = Couplings::from_g(g);
    Z2Couplings { lambda_e: c.lambda_e, lambda_b: c.lambda_b, eps: c.eps, mass: c.mass }
}

#[no_mangle]
pub extern "C" fn z2lgt_pvqd_config_default() -> Z2PvqdConfig {
    let d = PvqdConfig::default();
    Z2PvqdConfig {
        k: d.k,
        delta: d.delta,
        n_steps: d.n_steps,
        theory: Z2Theory::Pure,
        grad_eps: d.grad_eps,
        tol: d.tol,
        max_iters: d.max_iters,
        seed: d.seed,
        listed_order: 0,
    }
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_lattice_new(m: usize, n: usize, out: *mut *mut Z2Lattice) -> Z2Status {
    guard(|| put(out, Z2Lattice(LatticeGeometry::new(m, n)?)))
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_lattice_free(lat: *mut Z2Lattice) {
    release(lat)
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_lattice_num_links(lat: *const Z2Lattice) -> usize {
    lat.as_ref().map_or(0, |l| l.0.num_links())
}

/// Qubit count of `theory` on `lat`, or 0 if `lat` is NULL.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_num_qubits(lat: *const Z2Lattice, t: Z2Theory) -> usize {
    lat.as_ref().map_or(0, |l| theory(t).num_qubits(&l.0))
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_hamiltonian_new(
    lat: *const Z2Lattice,
    t: Z2Theory,
    c: Z2Couplings,
    out: *mut *mut Z2PauliSum,
) -> Z2Status {
    guard(|| {
        let lat = get(lat, "lattice")?;
        put(out, Z2PauliSum(build(theory(t), &lat.0, &couplings(c)).total()?))
    })
}

/// Parses the text written by [`z2lgt_pauli_sum_to_text`].
#[no_mangle]
pub unsafe extern "C" fn z2lgt_pauli_sum_from_text(text: *const c_char, out: *mut *mut Z2PauliSum) -> Z2Status {
    guard(|| {
        if text.is_null() {
            return Err(Fail::Null("text"));
        }
        let s = std::ffi::CStr::from_ptr(text).to_str().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        put(out, Z2PauliSum(PauliSum::from_text(s)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_pauli_sum_free(h: *mut Z2PauliSum) {
    release(h)
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_pauli_sum_num_terms(h: *const Z2PauliSum) -> usize {
    h.as_ref().map_or(0, |h| h.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_pauli_sum_num_qubits(h: *const Z2PauliSum) -> usize {
    h.as_ref().map_or(0, |h| h.0.num_qubits())
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_pauli_sum_to_text(h: *const Z2PauliSum, out: *mut *mut c_char) -> Z2Status {
    guard(|| put_string(out, get(h, "pauli sum")?.0.to_text()))
}

/// One first-order Trotter step of `theory` with time step `delta`.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_trotter_step(
    lat: *const Z2Lattice,
    t: Z2Theory,
    c: Z2Couplings,
    delta: f64,
    mode: Z2Mode,
    out: *mut *mut Z2Circuit,
) -> Z2Status {
    guard(|| {
        let lat = get(lat, "lattice")?;
        let mode = if mode == Z2Mode::Naive { Mode::Naive } else { Mode::Optimized };
        put(out, Z2Circuit(trotter_step(theory(t), &lat.0, &couplings(c), delta, mode)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_circuit_free(circ: *mut Z2Circuit) {
    release(circ)
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_circuit_counts(circ: *const Z2Circuit, cx: *mut usize, single: *mut usize) -> Z2Status {
    guard(|| {
        let counts = cx_count(&get(circ, "circuit")?.0);
        *get_mut(cx, "cx")? = counts.cx;
        if let Some(s) = single.as_mut() {
            *s = counts.single;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_circuit_to_text(circ: *const Z2Circuit, out: *mut *mut c_char) -> Z2Status {
    guard(|| put_string(out, get(circ, "circuit")?.0.to_text()))
}

/// |0…0⟩ on `n` qubits.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_new(n: usize, out: *mut *mut Z2State) -> Z2Status {
    guard(|| {
        if n > STATE_LIMIT {
            return Err(Error::TooManyQubits { n, limit: STATE_LIMIT }.into());
        }
        put(out, Z2State(StateVector::zero(n)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_free(s: *mut Z2State) {
    release(s)
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_num_qubits(s: *const Z2State) -> usize {
    s.as_ref().map_or(0, |s| s.0.num_qubits())
}

/// Copies the amplitudes into `re` and `im`, each of length `len = 2^n`.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_amplitudes(s: *const Z2State, re: *mut f64, im: *mut f64, len: usize) -> Z2Status {
    guard(|| {
        let amps = get(s, "state")?.0.amplitudes();
        if len != amps.len() {
            return Err(Error::DimensionMismatch(len, amps.len()).into());
        }
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        let im = std::slice::from_raw_parts_mut(im, len);
        for (i, a) in amps.iter().enumerate() {
            re[i] = a.re;
            im[i] = a.im;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_apply_circuit(s: *mut Z2State, circ: *const Z2Circuit) -> Z2Status {
    guard(|| {
        let circ = get(circ, "circuit")?;
        get_mut(s, "state")?.0.apply_circuit(&circ.0)?;
        Ok(())
    })
}

/// Replaces the state by exp(−i·t·H)·state.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_evolve_exact(s: *mut Z2State, h: *const Z2PauliSum, t: f64) -> Z2Status {
    guard(|| {
        let h = get(h, "hamiltonian")?;
        let s = get_mut(s, "state")?;
        s.0 = ExactPropagator::new(&h.0)?.evolve(&s.0, t)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_expectation(s: *const Z2State, h: *const Z2PauliSum, out: *mut f64) -> Z2Status {
    guard(|| {
        *get_mut(out, "out")? = expval(&get(s, "state")?.0, &get(h, "pauli sum")?.0)?;
        Ok(())
    })
}

/// |⟨a|b⟩|².
#[no_mangle]
pub unsafe extern "C" fn z2lgt_state_fidelity(a: *const Z2State, b: *const Z2State, out: *mut f64) -> Z2Status {
    guard(|| {
        *get_mut(out, "out")? = fidelity(&get(a, "a")?.0, &get(b, "b")?.0)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_pvqd_run(
    lat: *const Z2Lattice,
    c: Z2Couplings,
    cfg: *const Z2PvqdConfig,
    out: *mut *mut Z2Trace,
) -> Z2Status {
    guard(|| {
        let lat = get(lat, "lattice")?;
        let k = get(cfg, "config")?;
        let cfg = PvqdConfig {
            k: k.k,
            delta: k.delta,
            n_steps: k.n_steps,
            theory: theory(k.theory),
            grad_eps: k.grad_eps,
            tol: k.tol,
            max_iters: k.max_iters,
            seed: k.seed,
            order: if k.listed_order != 0 { PartOrder::Listed } else { PartOrder::Product },
        };
        put(out, Z2Trace(run_pvqd(&cfg, &couplings(c), &lat.0)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_trace_free(t: *mut Z2Trace) {
    release(t)
}

/// Number of rows, including the initial one.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_trace_len(t: *const Z2Trace) -> usize {
    t.as_ref().map_or(0, |t| t.0.steps.len())
}

#[no_mangle]
pub unsafe extern "C" fn z2lgt_trace_step(t: *const Z2Trace, i: usize, out: *mut Z2PvqdStep) -> Z2Status {
    guard(|| {
        let tr = get(t, "trace")?;
        let s = tr.0.steps.get(i).ok_or_else(|| Error::InvalidArgument(format!("step {i} out of range")))?;
        *get_mut(out, "out")? = Z2PvqdStep {
            step: s.step,
            time: s.time,
            cost: s.cost,
            iters: s.iters,
            converged: s.converged as i32,
            plaquette: s.plaquette,
            occupation: s.occupation.unwrap_or(f64::NAN),
            fid_trotter: s.fid_trotter,
            fid_exact: s.fid_exact,
        };
        Ok(())
    })
}

/// Copies the parameters of row `i` into `buf` (capacity `len`) and stores
/// their number in `count`. With `buf` NULL only `count` is written.
#[no_mangle]
pub unsafe extern "C" fn z2lgt_trace_params(
    t: *const Z2Trace,
    i: usize,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> Z2Status {
    guard(|| {
        let tr = get(t, "trace")?;
        let s = tr.0.steps.get(i).ok_or_else(|| Error::InvalidArgument(format!("step {i} out of range")))?;
        *get_mut(count, "count")? = s.theta.len();
        if buf.is_null() {
            return Ok(());
        }
        if len < s.theta.len() {
            return Err(Error::BadParameterCount { expected: s.theta.len(), got: len }.into());
        }
        std::slice::from_raw_parts_mut(buf, s.theta.len()).copy_from_slice(&s.theta);
        Ok(())
    })
}
