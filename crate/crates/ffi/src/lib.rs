//! C ABI over the renderer.
//!
//! Scenes and histograms are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`TgrdStatus`]; on failure [`tgrd_last_error`] describes the cause for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use tgrd::estimators::{default_threads, estimate_gradient, render_forward, RenderOptions, TransientHistogram};
use tgrd::scene::{RenderScene, Scene};
use tgrd::Error;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgrdStatus {
    Ok = 0,
    NullArgument = 1,
    Io = 2,
    Parse = 3,
    InvalidScene = 4,
    InvalidArgument = 5,
    Runtime = 6,
    Panic = 7,
}

/// Loaded scene.
pub struct TgrdScene {
    scene: Scene,
}

/// Transient histogram with its gradient planes.
pub struct TgrdHistogram {
    hist: TransientHistogram,
}

/// Histogram dimensions.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TgrdDims {
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    pub parameters: usize,
    /// First frame start in nanoseconds.
    pub t0: f64,
    /// Frame exposure in nanoseconds.
    pub dt: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TgrdStatus {
    match e {
        Error::Io { .. } => TgrdStatus::Io,
        Error::Parse { .. } | Error::HistogramFormat(_) => TgrdStatus::Parse,
        Error::InvalidMesh(_) | Error::InvalidScene(_) | Error::InvalidProfile(_) | Error::SensorDelta => {
            TgrdStatus::InvalidScene
        }
        Error::InvalidParameter { .. } | Error::DimensionMismatch(_) | Error::Config(_) => TgrdStatus::InvalidArgument,
        _ => TgrdStatus::Runtime,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (TgrdStatus, String)>) -> TgrdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TgrdStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TgrdStatus::Panic
        }
    }
}

fn fail(e: Error) -> (TgrdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TgrdStatus, String) {
    (TgrdStatus::NullArgument, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, (TgrdStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| (TgrdStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
    Ok(Path::new(s).to_path_buf())
}

fn options(threads: u32) -> RenderOptions {
    RenderOptions { threads: if threads == 0 { default_threads() } else { threads as usize }, ..RenderOptions::default() }
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tgrd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a NUL-terminated string.
#[no_mangle]
pub extern "C" fn tgrd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads and validates a scene file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrd_scene_load(path: *const c_char, out: *mut *mut TgrdScene) -> TgrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = path_arg(path)?;
        let scene = tgrd::io::load_scene(&p).map_err(fail)?;
        put(out, TgrdScene { scene });
        Ok(())
    })
}

/// Builds a named built-in scene.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrd_scene_preset(name: *const c_char, out: *mut *mut TgrdScene) -> TgrdStatus {
    guard(|| {
        if out.is_null() || name.is_null() {
            return Err(null("argument"));
        }
        let name = CStr::from_ptr(name).to_string_lossy();
        let desc = tgrd::presets::by_name(&name)
            .ok_or_else(|| (TgrdStatus::InvalidArgument, format!("unknown preset '{name}'")))?;
        let scene = Scene::new(desc, Path::new(".")).map_err(fail)?;
        put(out, TgrdScene { scene });
        Ok(())
    })
}

/// # Safety
/// `scene` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tgrd_scene_free(scene: *mut TgrdScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Number of scene parameters; 0 for a null scene.
///
/// # Safety
/// `scene` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn tgrd_scene_num_parameters(scene: *const TgrdScene) -> usize {
    scene.as_ref().map_or(0, |s| s.scene.num_parameters())
}

/// Copies the current parameter values into `out[0..len]`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tgrd_scene_get_parameters(scene: *const TgrdScene, out: *mut f64, len: usize) -> TgrdStatus {
    guard(|| {
        let s = scene.as_ref().ok_or_else(|| null("scene"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let theta = s.scene.theta();
        if len != theta.len() {
            return Err((TgrdStatus::InvalidArgument, format!("buffer holds {len} values, scene has {}", theta.len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&theta);
        Ok(())
    })
}

/// Replaces the parameter values with `values[0..len]`.
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn tgrd_scene_set_parameters(scene: *mut TgrdScene, values: *const f64, len: usize) -> TgrdStatus {
    guard(|| {
        let s = scene.as_mut().ok_or_else(|| null("scene"))?;
        if values.is_null() {
            return Err(null("values"));
        }
        let theta = std::slice::from_raw_parts(values, len);
        s.scene = s.scene.with_theta(theta).map_err(fail)?;
        Ok(())
    })
}

/// Forward transient render. `threads == 0` picks the default worker count.
///
/// # Safety
/// `scene` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrd_render(
    scene: *const TgrdScene,
    spp: u32,
    seed: u64,
    threads: u32,
    out: *mut *mut TgrdHistogram,
) -> TgrdStatus {
    guard(|| {
        let s = scene.as_ref().ok_or_else(|| null("scene"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rs = RenderScene::new(&s.scene).map_err(fail)?;
        put(out, TgrdHistogram { hist: render_forward(&rs, spp as usize, seed, &options(threads)) });
        Ok(())
    })
}

/// Intensity and gradient (interior plus boundary terms).
///
/// # Safety
/// `scene` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrd_gradient(
    scene: *const TgrdScene,
    spp_interior: u32,
    spp_boundary: u32,
    seed: u64,
    threads: u32,
    out: *mut *mut TgrdHistogram,
) -> TgrdStatus {
    guard(|| {
        let s = scene.as_ref().ok_or_else(|| null("scene"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rs = RenderScene::new(&s.scene).map_err(fail)?;
        let h = estimate_gradient(&rs, spp_interior as usize, spp_boundary as usize, seed, &options(threads));
        put(out, TgrdHistogram { hist: h });
        Ok(())
    })
}

/// # Safety
/// `hist` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrd_histogram_dims(hist: *const TgrdHistogram, out: *mut TgrdDims) -> TgrdStatus {
    guard(|| {
        let h = &hist.as_ref().ok_or_else(|| null("histogram"))?.hist;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = TgrdDims {
            height: h.height,
            width: h.width,
            frames: h.frames,
            parameters: h.num_params(),
            t0: h.t0,
            dt: h.dt,
        };
        Ok(())
    })
}

/// Copies plane `plane` (0 = intensity, `1 + i` = gradient of parameter
/// `i`) into `out`, row-major over `(row, col, frame)`. `len` must equal
/// `height * width * frames`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tgrd_histogram_plane(
    hist: *const TgrdHistogram,
    plane: usize,
    out: *mut f64,
    len: usize,
) -> TgrdStatus {
    guard(|| {
        let h = &hist.as_ref().ok_or_else(|| null("histogram"))?.hist;
        if out.is_null() {
            return Err(null("out"));
        }
        let src = match plane {
            0 => &h.intensity,
            p => h
                .grads
                .get(p - 1)
                .ok_or_else(|| (TgrdStatus::InvalidArgument, format!("no plane {p}; histogram has {}", 1 + h.num_params())))?,
        };
        if len != src.len() {
            return Err((TgrdStatus::InvalidArgument, format!("buffer holds {len} values, plane has {}", src.len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(src);
        Ok(())
    })
}

/// # Safety
/// `hist` must be a valid handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tgrd_histogram_save(hist: *const TgrdHistogram, path: *const c_char) -> TgrdStatus {
    guard(|| {
        let h = &hist.as_ref().ok_or_else(|| null("histogram"))?.hist;
        let p = path_arg(path)?;
        tgrd::io::save_histogram(h, &p).map_err(fail)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tgrd_histogram_load(path: *const c_char, out: *mut *mut TgrdHistogram) -> TgrdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = path_arg(path)?;
        let hist = tgrd::io::load_histogram(&p).map_err(fail)?;
        put(out, TgrdHistogram { hist });
        Ok(())
    })
}

/// # Safety
/// `hist` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tgrd_histogram_free(hist: *mut TgrdHistogram) {
    if !hist.is_null() {
        drop(Box::from_raw(hist));
    }
}
