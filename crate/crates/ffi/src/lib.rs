//! C ABI over the tempofield core.
//!
//! Graphs and models cross the boundary as opaque handles created by a
//! `tf_*_new`/`tf_*_load` call and released with the matching `tf_*_free`.
//! Every fallible function returns a [`TfStatus`] and writes its results
//! through out-pointers; on failure [`tf_last_error_message`] describes the
//! cause. A receptive field is passed as an unsigned integer where
//! [`TF_TAU_INF`] (zero) means all history.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::slice;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tempofield::eval::{
    average_precision, evaluate_unit, train_unit, ExperimentConfig, TrainConfig,
};
use tempofield::ingest::read_cache;
use tempofield::models::{
    edgebank_score, load_checkpoint, save_checkpoint, Arch, Hyper, ModelState,
};
use tempofield::synthetic::{period_two, PeriodTwo};
use tempofield::{Dtdg, Error, Snapshot, Tau};

/// Receptive field value meaning "all history".
pub const TF_TAU_INF: u32 = 0;

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Format = 4,
    Io = 5,
    OutOfRange = 6,
    Protocol = 7,
    Diverged = 8,
    Degenerate = 9,
    Numeric = 10,
    Panic = 11,
}

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfArch {
    Egcn = 0,
    Dysat = 1,
    Gclstm = 2,
    Stgcn = 3,
    EdgeBank = 4,
}

impl From<TfArch> for Arch {
    fn from(a: TfArch) -> Arch {
        match a {
            TfArch::Egcn => Arch::Egcn,
            TfArch::Dysat => Arch::Dysat,
            TfArch::Gclstm => Arch::Gclstm,
            TfArch::Stgcn => Arch::Stgcn,
            TfArch::EdgeBank => Arch::EdgeBank,
        }
    }
}

impl From<Arch> for TfArch {
    fn from(a: Arch) -> TfArch {
        match a {
            Arch::Egcn => TfArch::Egcn,
            Arch::Dysat => TfArch::Dysat,
            Arch::Gclstm => TfArch::Gclstm,
            Arch::Stgcn => TfArch::Stgcn,
            Arch::EdgeBank => TfArch::EdgeBank,
        }
    }
}

/// Model sizes; see [`tf_experiment_default`] for the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfHyper {
    pub d_in: u32,
    pub hidden: u32,
    pub heads: u32,
    pub kernel: u32,
    pub max_positions: u32,
}

/// Everything besides the graph that fixes the outcome of a unit.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfExperiment {
    pub master_seed: u64,
    pub train_fraction: f64,
    pub epochs: u32,
    pub lr: f64,
    pub negatives_per_positive: u32,
    pub hyper: TfHyper,
}

impl From<&TfExperiment> for ExperimentConfig {
    fn from(e: &TfExperiment) -> Self {
        ExperimentConfig {
            master_seed: e.master_seed,
            train_fraction: e.train_fraction,
            hyper: Hyper {
                d_in: e.hyper.d_in as usize,
                hidden: e.hyper.hidden as usize,
                layers: 1,
                heads: e.hyper.heads as usize,
                kernel: e.hyper.kernel as usize,
                max_positions: e.hyper.max_positions as usize,
            },
            train: TrainConfig {
                epochs: e.epochs as usize,
                lr: e.lr,
                negatives_per_positive: e.negatives_per_positive as usize,
            },
        }
    }
}

/// Opaque dynamic graph.
pub struct TfDtdg {
    inner: Dtdg,
}

/// Opaque model: architecture, sizes and parameters.
pub struct TfModel {
    inner: ModelState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TfStatus {
    match e {
        Error::NodeOutOfRange { .. } | Error::IndexOutOfRange { .. } => TfStatus::OutOfRange,
        Error::Config(_) => TfStatus::InvalidArgument,
        Error::Parse { .. } => TfStatus::Parse,
        Error::Protocol(_) => TfStatus::Protocol,
        Error::Diverged { .. } => TfStatus::Diverged,
        Error::Degenerate(_) => TfStatus::Degenerate,
        Error::Format { .. } | Error::Json(_) | Error::Csv(_) => TfStatus::Format,
        Error::Tensor(_) => TfStatus::Numeric,
        Error::Io(_) => TfStatus::Io,
    }
}

struct Fail(TfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TfStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(TfStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure message, and contains panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            TfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            TfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

fn tau_of(tau: u32) -> Tau {
    if tau == TF_TAU_INF {
        Tau::Inf
    } else {
        Tau::Finite(tau as usize)
    }
}

fn arch_of(raw: i32) -> Result<TfArch, Fail> {
    Ok(match raw {
        0 => TfArch::Egcn,
        1 => TfArch::Dysat,
        2 => TfArch::Gclstm,
        3 => TfArch::Stgcn,
        4 => TfArch::EdgeBank,
        other => return Err(invalid(format!("unknown architecture code {other}"))),
    })
}

fn boxed<T>(value: T, slot: &mut *mut T) {
    *slot = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default experiment settings.
///
/// # Safety
/// `out_experiment` must point to writable memory for one `TfExperiment`.
#[no_mangle]
pub unsafe extern "C" fn tf_experiment_default(out_experiment: *mut TfExperiment) -> TfStatus {
    guard(|| {
        let d = ExperimentConfig::default();
        *out(out_experiment, "out_experiment")? = TfExperiment {
            master_seed: d.master_seed,
            train_fraction: d.train_fraction,
            epochs: d.train.epochs as u32,
            lr: d.train.lr,
            negatives_per_positive: d.train.negatives_per_positive as u32,
            hyper: TfHyper {
                d_in: d.hyper.d_in as u32,
                hidden: d.hyper.hidden as u32,
                heads: d.hyper.heads as u32,
                kernel: d.hyper.kernel as u32,
                max_positions: d.hyper.max_positions as u32,
            },
        };
        Ok(())
    })
}

/// Builds a graph from parallel arrays of edge events `(t[i], u[i], v[i])`.
/// Self-loops are dropped and duplicates merged.
///
/// # Safety
/// `name` must be a NUL-terminated string; `t`, `u` and `v` must each hold
/// `num_edges` elements; `out_dtdg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_dtdg_from_edges(
    name: *const c_char,
    num_nodes: u32,
    num_snapshots: u32,
    t: *const u32,
    u: *const u32,
    v: *const u32,
    num_edges: usize,
    out_dtdg: *mut *mut TfDtdg,
) -> TfStatus {
    guard(|| {
        let slot = out(out_dtdg, "out_dtdg")?;
        let name = str_arg(name, "name")?;
        let (t, u, v) = (
            slice_arg(t, num_edges, "t")?,
            slice_arg(u, num_edges, "u")?,
            slice_arg(v, num_edges, "v")?,
        );
        let n = num_nodes as usize;
        let mut per: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_snapshots as usize];
        for i in 0..num_edges {
            let bucket = per.get_mut(t[i] as usize).ok_or_else(|| {
                Fail(
                    TfStatus::OutOfRange,
                    format!("edge {i} has snapshot {} of {num_snapshots}", t[i]),
                )
            })?;
            bucket.push((u[i] as usize, v[i] as usize));
        }
        let snapshots = per
            .iter()
            .enumerate()
            .map(|(k, e)| Snapshot::from_edges(k, e, n))
            .collect::<Result<Vec<_>, _>>()?;
        boxed(
            TfDtdg {
                inner: Dtdg::new(name, n, snapshots)?,
            },
            slot,
        );
        Ok(())
    })
}

/// Loads a dataset cache written by `tempofield ingest`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_dtdg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_dtdg_load(path: *const c_char, out_dtdg: *mut *mut TfDtdg) -> TfStatus {
    guard(|| {
        let slot = out(out_dtdg, "out_dtdg")?;
        let (d, _) = read_cache(Path::new(str_arg(path, "path")?))?;
        boxed(TfDtdg { inner: d }, slot);
        Ok(())
    })
}

/// The built-in period-2 alternating graph (20 nodes, 40 snapshots).
///
/// # Safety
/// `out_dtdg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_dtdg_period_two(out_dtdg: *mut *mut TfDtdg) -> TfStatus {
    guard(|| {
        let slot = out(out_dtdg, "out_dtdg")?;
        boxed(
            TfDtdg {
                inner: period_two(&PeriodTwo::default())?,
            },
            slot,
        );
        Ok(())
    })
}

/// Node, snapshot and total link counts. Any out-pointer may be NULL.
///
/// # Safety
/// `dtdg` must be a live handle; non-NULL out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_dtdg_stats(
    dtdg: *const TfDtdg,
    out_nodes: *mut u32,
    out_snapshots: *mut u32,
    out_links: *mut u64,
) -> TfStatus {
    guard(|| {
        let d = &deref(dtdg, "dtdg")?.inner;
        if let Some(p) = out_nodes.as_mut() {
            *p = d.num_nodes() as u32;
        }
        if let Some(p) = out_snapshots.as_mut() {
            *p = d.len() as u32;
        }
        if let Some(p) = out_links.as_mut() {
            *p = d.total_links() as u64;
        }
        Ok(())
    })
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `dtdg` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_dtdg_free(dtdg: *mut TfDtdg) {
    if !dtdg.is_null() {
        drop(Box::from_raw(dtdg));
    }
}

/// A freshly initialized model, seeded by `seed`.
///
/// # Safety
/// `hyper` may be NULL for the default sizes; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tf_model_new(
    arch: i32,
    num_nodes: u32,
    hyper: *const TfHyper,
    seed: u64,
    out_model: *mut *mut TfModel,
) -> TfStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let arch: Arch = arch_of(arch)?.into();
        let sizes = match hyper.as_ref() {
            Some(h) => Hyper {
                d_in: h.d_in as usize,
                hidden: h.hidden as usize,
                layers: 1,
                heads: h.heads as usize,
                kernel: h.kernel as usize,
                max_positions: h.max_positions as usize,
            },
            None => Hyper::default(),
        };
        let m = ModelState::new(
            arch,
            num_nodes as usize,
            sizes,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )?;
        boxed(TfModel { inner: m }, slot);
        Ok(())
    })
}

/// Initializes and trains the model of one `(graph, arch, tau, seed_index)`
/// unit, exactly as a sweep would. `out_final_loss` may be NULL; it receives
/// NaN for EdgeBank, which has nothing to train.
///
/// # Safety
/// `dtdg` must be a live handle, `experiment` NULL (defaults) or valid,
/// `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_train_unit(
    dtdg: *const TfDtdg,
    arch: i32,
    tau: u32,
    seed_index: u64,
    experiment: *const TfExperiment,
    out_model: *mut *mut TfModel,
    out_final_loss: *mut f64,
) -> TfStatus {
    guard(|| {
        let d = &deref(dtdg, "dtdg")?.inner;
        let slot = out(out_model, "out_model")?;
        let cfg = experiment
            .as_ref()
            .map_or_else(ExperimentConfig::default, ExperimentConfig::from);
        let (model, curve) = train_unit(d, arch_of(arch)?.into(), tau_of(tau), seed_index, &cfg)?;
        if let Some(p) = out_final_loss.as_mut() {
            *p = curve.last().copied().unwrap_or(f64::NAN);
        }
        boxed(TfModel { inner: model }, slot);
        Ok(())
    })
}

/// Rolling evaluation over the test range: mean AP over scored steps and
/// the number of scored and skipped steps. Count pointers may be NULL.
///
/// # Safety
/// `model` and `dtdg` must be live handles, `experiment` NULL or valid,
/// `out_mean_ap` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_evaluate_unit(
    model: *const TfModel,
    dtdg: *const TfDtdg,
    tau: u32,
    seed_index: u64,
    experiment: *const TfExperiment,
    out_mean_ap: *mut f64,
    out_scored: *mut u32,
    out_skipped: *mut u32,
) -> TfStatus {
    guard(|| {
        let m = &deref(model, "model")?.inner;
        let d = &deref(dtdg, "dtdg")?.inner;
        let mean = out(out_mean_ap, "out_mean_ap")?;
        let cfg = experiment
            .as_ref()
            .map_or_else(ExperimentConfig::default, ExperimentConfig::from);
        let r = evaluate_unit(m, d, tau_of(tau), seed_index, &cfg)?;
        *mean = r.mean_ap;
        let scored = r.per_step.iter().filter(|s| s.ap().is_some()).count();
        if let Some(p) = out_scored.as_mut() {
            *p = scored as u32;
        }
        if let Some(p) = out_skipped.as_mut() {
            *p = (r.per_step.len() - scored) as u32;
        }
        Ok(())
    })
}

/// Edge probabilities for `n` node pairs from the window of `tau` snapshots
/// ending at snapshot `t_end`.
///
/// # Safety
/// Handles must be live; `u`, `v` and `out_scores` must each hold `n`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn tf_model_score_pairs(
    model: *const TfModel,
    dtdg: *const TfDtdg,
    t_end: u32,
    tau: u32,
    u: *const u32,
    v: *const u32,
    n: usize,
    out_scores: *mut f64,
) -> TfStatus {
    guard(|| {
        let m = &deref(model, "model")?.inner;
        let d = &deref(dtdg, "dtdg")?.inner;
        let (u, v) = (slice_arg(u, n, "u")?, slice_arg(v, n, "v")?);
        if n > 0 && out_scores.is_null() {
            return Err(null("out_scores"));
        }
        let window = d.window(t_end as usize, tau_of(tau))?;
        let pairs: Vec<_> = u
            .iter()
            .zip(v)
            .map(|(&a, &b)| (a as usize, b as usize))
            .collect();
        let scores = m.score_pairs(&window, &pairs)?;
        if n > 0 {
            slice::from_raw_parts_mut(out_scores, n).copy_from_slice(&scores);
        }
        Ok(())
    })
}

/// Architecture code of a model.
///
/// # Safety
/// `model` must be a live handle; `out_arch` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_model_arch(model: *const TfModel, out_arch: *mut i32) -> TfStatus {
    guard(|| {
        let m = &deref(model, "model")?.inner;
        *out(out_arch, "out_arch")? = TfArch::from(m.arch()) as i32;
        Ok(())
    })
}

/// Writes a model checkpoint.
///
/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tf_model_save(model: *const TfModel, path: *const c_char) -> TfStatus {
    guard(|| {
        let m = &deref(model, "model")?.inner;
        save_checkpoint(m, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// Reads a model checkpoint.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_model_load(
    path: *const c_char,
    out_model: *mut *mut TfModel,
) -> TfStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        let m = load_checkpoint(Path::new(str_arg(path, "path")?))?;
        boxed(TfModel { inner: m }, slot);
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_model_free(model: *mut TfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// 1 when `(u, v)` occurs in the window of `tau` snapshots ending at
/// `t_end`, else 0.
///
/// # Safety
/// `dtdg` must be a live handle; `out_score` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_edgebank_score(
    dtdg: *const TfDtdg,
    t_end: u32,
    tau: u32,
    u: u32,
    v: u32,
    out_score: *mut u8,
) -> TfStatus {
    guard(|| {
        let d = &deref(dtdg, "dtdg")?.inner;
        let slot = out(out_score, "out_score")?;
        let n = d.num_nodes();
        for id in [u as usize, v as usize] {
            if id >= n {
                return Err(Error::NodeOutOfRange { id, num_nodes: n }.into());
            }
        }
        *slot = edgebank_score(
            &d.window(t_end as usize, tau_of(tau))?,
            u as usize,
            v as usize,
        );
        Ok(())
    })
}

/// Average precision of `n` scores against 0/1 labels, ties averaged over
/// their orderings.
///
/// # Safety
/// `scores` and `labels` must each hold `n` elements; `out_ap` writable.
#[no_mangle]
pub unsafe extern "C" fn tf_average_precision(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out_ap: *mut f64,
) -> TfStatus {
    guard(|| {
        let s = slice_arg(scores, n, "scores")?;
        let l: Vec<bool> = slice_arg(labels, n, "labels")?
            .iter()
            .map(|&x| x != 0)
            .collect();
        let slot = out(out_ap, "out_ap")?;
        *slot = average_precision(s, &l)?;
        Ok(())
    })
}
