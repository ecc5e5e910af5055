//! C interface to `algseries`.
//!
//! Systems and grammars are opaque handles created by `*_parse` and released
//! by `*_free`. Every call returns an [`AlgStatus`]; on failure the message is
//! available from [`alg_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released with
//! [`alg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use algseries::bounded::{census_equivalence, EquivOptions};
use algseries::decide::{coeff_alg, eq_alg_with, fin_alg_with, BoundConfig, CoeffQuery, Engine};
use algseries::grammar::Grammar;
use algseries::poly::MultiIndex;
use algseries::polysys::PolySystem;
use algseries::Error;

/// Result codes. `ALG_OK` is zero; everything else is a failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgStatus {
    AlgOk = 0,
    AlgNullPointer = 1,
    AlgInvalidUtf8 = 2,
    AlgParseError = 3,
    AlgNotProper = 4,
    AlgBadModulus = 5,
    AlgBadBound = 6,
    AlgInfeasible = 7,
    AlgUnknownSymbol = 8,
    AlgInvalid = 9,
    AlgPanic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgEngine {
    AlgHensel = 0,
    AlgKleene = 1,
}

impl From<AlgEngine> for Engine {
    fn from(e: AlgEngine) -> Engine {
        match e {
            AlgEngine::AlgHensel => Engine::Hensel,
            AlgEngine::AlgKleene => Engine::Kleene,
        }
    }
}

/// Opaque proper polynomial system.
pub struct AlgSystem(PolySystem);

/// Opaque proper grammar.
pub struct AlgGrammar(Grammar);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AlgStatus {
    match e {
        Error::Parse { .. } => AlgStatus::AlgParseError,
        Error::NotProper(_) | Error::ImproperGrammar(_) => AlgStatus::AlgNotProper,
        Error::BadModulus(_) => AlgStatus::AlgBadModulus,
        Error::BadBound(_) => AlgStatus::AlgBadBound,
        Error::BoundInfeasible { .. } | Error::InsufficientPrecision { .. } => AlgStatus::AlgInfeasible,
        Error::UnknownSymbol(_) | Error::MissingVariable(_) => AlgStatus::AlgUnknownSymbol,
        _ => AlgStatus::AlgInvalid,
    }
}

enum Fail {
    Status(AlgStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AlgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlgStatus::AlgOk,
        Ok(Err(Fail::Status(s, m))) => {
            set_error(m);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            AlgStatus::AlgPanic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(AlgStatus::AlgNullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(AlgStatus::AlgInvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn outref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn explicit(bound: u64) -> BoundConfig {
    BoundConfig::Explicit { d: bound }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn alg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn alg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a system in the text format (`vars:`, `indets:`, equations).
///
/// # Safety
/// `text` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alg_system_parse(text: *const c_char, out: *mut *mut AlgSystem) -> AlgStatus {
    guard(|| {
        let out = outref(out, "out")?;
        let s = PolySystem::parse(read_str(text, "text")?)?;
        *out = Box::into_raw(Box::new(AlgSystem(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`alg_system_parse`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn alg_system_free(s: *mut AlgSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes whether the system is proper.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn alg_system_is_proper(s: *const AlgSystem, proper: *mut bool) -> AlgStatus {
    guard(|| {
        let s = handle(s, "system")?;
        *outref(proper, "proper")? = s.0.validate_proper().is_proper();
        Ok(())
    })
}

/// Coefficient of `X^v` modulo `p` in the first solution component.
///
/// # Safety
/// `v` must point to `len` exponents, one per indeterminate.
#[no_mangle]
pub unsafe extern "C" fn alg_coeff(
    s: *const AlgSystem,
    v: *const u32,
    len: usize,
    p: u64,
    engine: AlgEngine,
    residue: *mut u64,
) -> AlgStatus {
    guard(|| {
        let s = handle(s, "system")?;
        let residue = outref(residue, "residue")?;
        let v = if len == 0 {
            Vec::new()
        } else if v.is_null() {
            return Err(null("v"));
        } else {
            std::slice::from_raw_parts(v, len).to_vec()
        };
        let q = CoeffQuery { v: MultiIndex(v), p };
        *residue = coeff_alg(&s.0, &q, engine.into())?.residue;
        Ok(())
    })
}

/// Whether the first solution component vanishes through degree `bound`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn alg_eq(
    s: *const AlgSystem,
    bound: u64,
    engine: AlgEngine,
    zero: *mut bool,
) -> AlgStatus {
    guard(|| {
        let s = handle(s, "system")?;
        let zero = outref(zero, "zero")?;
        *zero = eq_alg_with(&s.0, &explicit(bound), engine.into())?.zero;
        Ok(())
    })
}

/// Whether the first solution component has finite support, given `bound`.
/// `degree` receives the polynomial degree, or -1 when infinite.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn alg_fin(
    s: *const AlgSystem,
    bound: u64,
    engine: AlgEngine,
    finite: *mut bool,
    degree: *mut i64,
) -> AlgStatus {
    guard(|| {
        let s = handle(s, "system")?;
        let finite = outref(finite, "finite")?;
        let degree = outref(degree, "degree")?;
        let v = fin_alg_with(&s.0, &explicit(bound), engine.into())?;
        *finite = v.finite;
        *degree = v.degree.map_or(-1, i64::from);
        Ok(())
    })
}

/// Parses a grammar in the text format (`terminals:`, `nonterminals:`, rules).
///
/// # Safety
/// `text` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn alg_grammar_parse(text: *const c_char, out: *mut *mut AlgGrammar) -> AlgStatus {
    guard(|| {
        let out = outref(out, "out")?;
        let g = Grammar::parse(read_str(text, "text")?)?;
        *out = Box::into_raw(Box::new(AlgGrammar(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must come from [`alg_grammar_parse`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn alg_grammar_free(g: *mut AlgGrammar) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of derivations of `word` from `nonterminal`, as a decimal string.
///
/// # Safety
/// Strings must be nul-terminated; free `count` with [`alg_string_free`].
#[no_mangle]
pub unsafe extern "C" fn alg_count_derivations(
    g: *const AlgGrammar,
    nonterminal: *const c_char,
    word: *const c_char,
    count: *mut *mut c_char,
) -> AlgStatus {
    guard(|| {
        let g = &handle(g, "grammar")?.0;
        let count = outref(count, "count")?;
        let w = g.word(read_str(word, "word")?)?;
        let c = g.count_derivations(read_str(nonterminal, "nonterminal")?, &w)?;
        *count = to_c_string(c.to_string());
        Ok(())
    })
}

/// Compares the census series of two nonterminals through degree `bound`.
/// `record` receives the verdict as a JSON object (scope, witness, trace).
///
/// # Safety
/// Strings must be nul-terminated; `record` may be null; free it with
/// [`alg_string_free`].
#[no_mangle]
pub unsafe extern "C" fn alg_equiv(
    g: *const AlgGrammar,
    n1: *const c_char,
    n2: *const c_char,
    bound: u64,
    equivalent: *mut bool,
    record: *mut *mut c_char,
) -> AlgStatus {
    guard(|| {
        let g = &handle(g, "grammar")?.0;
        let equivalent = outref(equivalent, "equivalent")?;
        let opts = EquivOptions {
            bounds: explicit(bound),
            engine: None,
        };
        let v = census_equivalence(g, read_str(n1, "n1")?, read_str(n2, "n2")?, &opts)?;
        *equivalent = v.equivalent;
        if let Some(r) = record.as_mut() {
            *r = to_c_string(serde_json::to_string(&v).expect("serializable"));
        }
        Ok(())
    })
}
