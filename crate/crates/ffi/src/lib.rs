//! C ABI over the survgeo geometry library.
//!
//! Objects are opaque handles created by `*_load`/`*_new` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SurvStatus`]; on failure, [`survgeo_last_error`] describes the cause for
//! the calling thread. Invalid pixels are exchanged as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nalgebra::Point3;
use survgeo::geometry::Rig;
use survgeo::metrics::evaluate;
use survgeo::priors::{normal_map, pseudo_depth, NeighborPairs, PseudoDepthConfig};
use survgeo::raster::io::{read_scalar_pfm, write_pfm};
use survgeo::raster::{ScalarMap, VectorMap};
use survgeo::Error;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    UnknownCamera = 6,
    NonPositiveDepth = 7,
    DimensionMismatch = 8,
    DegenerateSize = 9,
    AllInvalid = 10,
    ConstantMap = 11,
    NoValidGroundTruth = 12,
    InvalidTransform = 13,
    Other = 14,
    Panic = 15,
}

impl From<&Error> for SurvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => SurvStatus::Io,
            Error::Parse { .. } => SurvStatus::Parse,
            Error::InvalidArgument(_) => SurvStatus::InvalidArgument,
            Error::UnknownCamera(_) => SurvStatus::UnknownCamera,
            Error::NonPositiveDepth { .. } => SurvStatus::NonPositiveDepth,
            Error::DimensionMismatch(_) | Error::ShapeMismatch(_) => SurvStatus::DimensionMismatch,
            Error::DegenerateSize { .. } => SurvStatus::DegenerateSize,
            Error::AllInvalid(_) => SurvStatus::AllInvalid,
            Error::ConstantMap(_) => SurvStatus::ConstantMap,
            Error::NoValidGroundTruth { .. } => SurvStatus::NoValidGroundTruth,
            Error::InvalidTransform(_) => SurvStatus::InvalidTransform,
            _ => SurvStatus::Other,
        }
    }
}

/// Camera rig loaded from JSON.
pub struct SurvRig {
    inner: Rig,
}

/// Single-channel map (depth, disparity).
pub struct SurvScalarMap {
    inner: ScalarMap,
}

/// Three-channel unit-vector map.
pub struct SurvNormalMap {
    inner: VectorMap,
}

/// Depth metrics as returned by [`survgeo_evaluate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SurvMetrics {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub valid_pixels: usize,
    pub scale: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SurvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SurvStatus::from(&e), format!("{}: {e}", e.name()))
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SurvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SurvStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SurvStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SurvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Failure(SurvStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn survgeo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a rig from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_rig_load(path: *const c_char, out: *mut *mut SurvRig) -> SurvStatus {
    guard(|| {
        let rig = Rig::load(path_arg(path, "path")?)?;
        store(out, SurvRig { inner: rig })
    })
}

/// # Safety
/// `rig` must be null or a handle from [`survgeo_rig_load`], freed once.
#[no_mangle]
pub unsafe extern "C" fn survgeo_rig_free(rig: *mut SurvRig) {
    release(rig)
}

/// Number of cameras, or 0 for a null handle.
///
/// # Safety
/// `rig` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn survgeo_rig_camera_count(rig: *const SurvRig) -> usize {
    rig.as_ref().map_or(0, |r| r.inner.len())
}

/// Projects a camera-frame point `xyz[3]` of camera `camera_id` to pixel
/// coordinates `uv[2]`.
///
/// # Safety
/// `rig` must be a live handle; `xyz` readable for 3 and `uv` writable for 2
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn survgeo_rig_project(
    rig: *const SurvRig,
    camera_id: usize,
    xyz: *const f64,
    uv: *mut f64,
) -> SurvStatus {
    guard(|| {
        let rig = borrow(rig, "rig")?;
        if xyz.is_null() || uv.is_null() {
            return Err(null("point buffer"));
        }
        let p = std::slice::from_raw_parts(xyz, 3);
        let (u, v) = rig.inner.camera(camera_id)?.intrinsics.project(&Point3::new(p[0], p[1], p[2]))?;
        *uv = u;
        *uv.add(1) = v;
        Ok(())
    })
}

/// Lifts pixel `(u, v)` at z-depth `depth` to a camera-frame point `xyz[3]`.
///
/// # Safety
/// `rig` must be a live handle; `xyz` writable for 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn survgeo_rig_unproject(
    rig: *const SurvRig,
    camera_id: usize,
    u: f64,
    v: f64,
    depth: f64,
    xyz: *mut f64,
) -> SurvStatus {
    guard(|| {
        let rig = borrow(rig, "rig")?;
        if xyz.is_null() {
            return Err(null("point buffer"));
        }
        let p = rig.inner.camera(camera_id)?.intrinsics.unproject(u, v, depth)?;
        for k in 0..3 {
            *xyz.add(k) = p[k];
        }
        Ok(())
    })
}

/// Builds a map from `height * width` row-major values; NaN marks invalid
/// pixels.
///
/// # Safety
/// `data` must be readable for `height * width` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_map_new(
    height: usize,
    width: usize,
    data: *const f64,
    out: *mut *mut SurvScalarMap,
) -> SurvStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let n = height
            .checked_mul(width)
            .ok_or_else(|| Failure(SurvStatus::InvalidArgument, "map size overflows".into()))?;
        let values = std::slice::from_raw_parts(data, n);
        let map = ScalarMap::with_mask(
            height,
            width,
            values.iter().map(|v| if v.is_nan() { 0.0 } else { *v }).collect(),
            values.iter().map(|v| !v.is_nan()).collect(),
        )?;
        store(out, SurvScalarMap { inner: map })
    })
}

/// Reads a single-channel PFM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_map_read_pfm(path: *const c_char, out: *mut *mut SurvScalarMap) -> SurvStatus {
    guard(|| {
        let map = read_scalar_pfm(path_arg(path, "path")?)?;
        store(out, SurvScalarMap { inner: map })
    })
}

/// Writes a map as a single-channel PFM file.
///
/// # Safety
/// `map` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn survgeo_map_write_pfm(map: *const SurvScalarMap, path: *const c_char) -> SurvStatus {
    guard(|| {
        let map = borrow(map, "map")?;
        write_pfm(&map.inner, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Writes the map dimensions.
///
/// # Safety
/// `map` must be a live handle; `height` and `width` writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_map_dims(map: *const SurvScalarMap, height: *mut usize, width: *mut usize) -> SurvStatus {
    guard(|| {
        let map = borrow(map, "map")?;
        if height.is_null() || width.is_null() {
            return Err(null("dimension output"));
        }
        (*height, *width) = map.inner.dims();
        Ok(())
    })
}

/// Copies the map into `buf` row-major, NaN at invalid pixels. `len` must
/// equal `height * width`.
///
/// # Safety
/// `map` must be a live handle; `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn survgeo_map_copy(map: *const SurvScalarMap, buf: *mut f64, len: usize) -> SurvStatus {
    guard(|| {
        let map = &borrow(map, "map")?.inner;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len != map.len() {
            return Err(Failure(
                SurvStatus::DimensionMismatch,
                format!("buffer holds {len} values, map has {}", map.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (i, o) in out.iter_mut().enumerate() {
            *o = if map.mask()[i] { map.data()[i] } else { f64::NAN };
        }
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn survgeo_map_free(map: *mut SurvScalarMap) {
    release(map)
}

/// Min-max normalizes a disparity-like map into depth in `[d_min, d_max]`.
///
/// # Safety
/// `disparity` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_pseudo_depth(
    disparity: *const SurvScalarMap,
    d_min: f64,
    d_max: f64,
    out: *mut *mut SurvScalarMap,
) -> SurvStatus {
    guard(|| {
        let disparity = borrow(disparity, "disparity")?;
        let cfg = PseudoDepthConfig::new(d_min, d_max)?;
        let depth = pseudo_depth(&disparity.inner, &cfg)?;
        store(out, SurvScalarMap { inner: depth })
    })
}

/// Surface normals of camera `camera_id` from its depth map.
///
/// # Safety
/// `rig` and `depth` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_normal_map(
    rig: *const SurvRig,
    camera_id: usize,
    depth: *const SurvScalarMap,
    out: *mut *mut SurvNormalMap,
) -> SurvStatus {
    guard(|| {
        let rig = borrow(rig, "rig")?;
        let depth = borrow(depth, "depth")?;
        let cam = rig.inner.camera(camera_id)?;
        if depth.inner.dims() != (cam.height, cam.width) {
            return Err(Failure(
                SurvStatus::DimensionMismatch,
                format!(
                    "depth is {:?}, camera {camera_id} is {:?}",
                    depth.inner.dims(),
                    (cam.height, cam.width)
                ),
            ));
        }
        let normals = normal_map(&depth.inner, &cam.intrinsics, &NeighborPairs::default());
        store(out, SurvNormalMap { inner: normals })
    })
}

/// Copies normals into `buf` as row-major xyz triples, NaN at invalid
/// pixels. `len` must equal `3 * height * width`.
///
/// # Safety
/// `normals` must be a live handle; `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn survgeo_normals_copy(normals: *const SurvNormalMap, buf: *mut f64, len: usize) -> SurvStatus {
    guard(|| {
        let map = &borrow(normals, "normals")?.inner;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len != 3 * map.len() {
            return Err(Failure(
                SurvStatus::DimensionMismatch,
                format!("buffer holds {len} values, normals need {}", 3 * map.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (i, chunk) in out.chunks_exact_mut(3).enumerate() {
            let n = map.data()[i];
            for k in 0..3 {
                chunk[k] = if map.mask()[i] { n[k] } else { f64::NAN };
            }
        }
        Ok(())
    })
}

/// # Safety
/// `normals` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn survgeo_normals_free(normals: *mut SurvNormalMap) {
    release(normals)
}

/// Depth metrics of `pred` against `gt` over `gt ∈ [min_depth, max_depth]`.
///
/// # Safety
/// `pred` and `gt` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn survgeo_evaluate(
    pred: *const SurvScalarMap,
    gt: *const SurvScalarMap,
    min_depth: f64,
    max_depth: f64,
    median_scale: bool,
    out: *mut SurvMetrics,
) -> SurvStatus {
    guard(|| {
        let pred = borrow(pred, "pred")?;
        let gt = borrow(gt, "gt")?;
        if out.is_null() {
            return Err(null("metrics output"));
        }
        let m = evaluate(&pred.inner, &gt.inner, min_depth, max_depth, median_scale)?;
        *out = SurvMetrics {
            abs_rel: m.abs_rel,
            sq_rel: m.sq_rel,
            rmse: m.rmse,
            rmse_log: m.rmse_log,
            delta1: m.delta1,
            delta2: m.delta2,
            delta3: m.delta3,
            valid_pixels: m.n,
            scale: m.scale,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping_covers_input_errors() {
        let io = Error::Io {
            path: "x".into(),
            source: std::io::Error::other("gone"),
        };
        assert_eq!(SurvStatus::from(&io), SurvStatus::Io);
        assert_eq!(SurvStatus::from(&Error::ConstantMap(1.0)), SurvStatus::ConstantMap);
        assert_eq!(SurvStatus::from(&Error::ShapeMismatch("s".into())), SurvStatus::DimensionMismatch);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), SurvStatus::Panic);
        let msg = unsafe { CStr::from_ptr(survgeo_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
        assert_eq!(guard(|| Ok(())), SurvStatus::Ok);
        assert!(survgeo_last_error().is_null());
    }
}
