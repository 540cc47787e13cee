//! C ABI for the pmaplab laboratory: opaque handles, status codes, and a
//! JSON experiment entry point, so other languages can bind without linking
//! Rust. The matching header lives in `include/pmaplab.h` (cbindgen).
//!
//! Conventions: every function returns a [`PmlStatus`]; outputs go through
//! pointers supplied by the caller; vertices are 1-based as in the library.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pmaplab::discrete::{cyclic_count, sample_p_mapping, sample_p_tree, Mapping};
use pmaplab::experiment::{run_experiment, ExperimentConfig};
use pmaplab::model::{make_hub_family, FamilySpec, RankedProb, ThetaVector};
use pmaplab::rng::RngStream;

/// Status codes returned by every `pml_` function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Utf8Error = 4,
    JsonError = 5,
    /// The experiment ran but a pinned threshold failed.
    ThresholdFailed = 6,
    Panic = 7,
}

/// Opaque handle: a ranked hub-family distribution on `[n]`.
pub struct PmlFamily {
    p: RankedProb,
}

fn guard<F: FnOnce() -> PmlStatus>(f: F) -> PmlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => PmlStatus::Panic,
    }
}

/// Build the hub family for `theta[0..theta_len]` and size `n`.
///
/// `theta` may be null when `theta_len == 0` (the uniform case). On success
/// `*out` owns the handle; release it with `pml_family_free`.
///
/// # Safety
/// `theta` must point to `theta_len` readable doubles and `out` must be a
/// valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pml_family_new(
    theta: *const f64,
    theta_len: usize,
    n: usize,
    out: *mut *mut PmlFamily,
) -> PmlStatus {
    if out.is_null() || (theta.is_null() && theta_len > 0) {
        return PmlStatus::NullArgument;
    }
    guard(|| {
        let thetas = if theta_len == 0 {
            Vec::new()
        } else {
            unsafe { std::slice::from_raw_parts(theta, theta_len) }.to_vec()
        };
        let theta = match ThetaVector::new(thetas) {
            Ok(t) => t,
            Err(_) => return PmlStatus::InvalidArgument,
        };
        match make_hub_family(&FamilySpec::new(theta, n)) {
            Ok(p) => {
                unsafe { *out = Box::into_raw(Box::new(PmlFamily { p })) };
                PmlStatus::Ok
            }
            Err(_) => PmlStatus::InvalidArgument,
        }
    })
}

/// Release a family handle. Null is ignored.
///
/// # Safety
/// `family` must come from `pml_family_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pml_family_free(family: *mut PmlFamily) {
    if !family.is_null() {
        drop(unsafe { Box::from_raw(family) });
    }
}

/// Number of atoms `n`.
///
/// # Safety
/// `family` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pml_family_len(family: *const PmlFamily) -> usize {
    if family.is_null() {
        return 0;
    }
    unsafe { &*family }.p.n()
}

/// Write `sigma(p)` to `*out`.
///
/// # Safety
/// `family` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pml_family_sigma(family: *const PmlFamily, out: *mut f64) -> PmlStatus {
    if family.is_null() || out.is_null() {
        return PmlStatus::NullArgument;
    }
    unsafe { *out = (*family).p.sigma() };
    PmlStatus::Ok
}

/// Copy the probability vector into `buf` (capacity `len >= n`).
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pml_family_values(
    family: *const PmlFamily,
    buf: *mut f64,
    len: usize,
) -> PmlStatus {
    if family.is_null() || buf.is_null() {
        return PmlStatus::NullArgument;
    }
    let p = &unsafe { &*family }.p;
    if len < p.n() {
        return PmlStatus::BufferTooSmall;
    }
    let dst = unsafe { std::slice::from_raw_parts_mut(buf, p.n()) };
    dst.copy_from_slice(p.values());
    PmlStatus::Ok
}

/// Sample a p-mapping on the stream `(seed, stream)` into `image`
/// (capacity `len >= n`, 1-based values).
///
/// # Safety
/// `image` must point to `len` writable `uint32_t`.
#[no_mangle]
pub unsafe extern "C" fn pml_sample_mapping(
    family: *const PmlFamily,
    seed: u64,
    stream: u64,
    image: *mut u32,
    len: usize,
) -> PmlStatus {
    if family.is_null() || image.is_null() {
        return PmlStatus::NullArgument;
    }
    guard(|| {
        let p = &unsafe { &*family }.p;
        if len < p.n() {
            return PmlStatus::BufferTooSmall;
        }
        let mut rng = RngStream::new(seed, stream);
        let m = sample_p_mapping(p, &mut rng);
        let dst = unsafe { std::slice::from_raw_parts_mut(image, p.n()) };
        for (d, &v) in dst.iter_mut().zip(m.image()) {
            *d = v as u32;
        }
        PmlStatus::Ok
    })
}

/// Sample a p-tree; `parent` receives the parent array (0 at the root) and
/// `*root_out` the root label.
///
/// # Safety
/// `parent` must point to `len` writable `uint32_t`; `root_out` writable.
#[no_mangle]
pub unsafe extern "C" fn pml_sample_tree(
    family: *const PmlFamily,
    seed: u64,
    stream: u64,
    parent: *mut u32,
    len: usize,
    root_out: *mut u32,
) -> PmlStatus {
    if family.is_null() || parent.is_null() || root_out.is_null() {
        return PmlStatus::NullArgument;
    }
    guard(|| {
        let p = &unsafe { &*family }.p;
        if len < p.n() {
            return PmlStatus::BufferTooSmall;
        }
        let mut rng = RngStream::new(seed, stream);
        let t = sample_p_tree(p, &mut rng);
        let dst = unsafe { std::slice::from_raw_parts_mut(parent, p.n()) };
        for (d, &v) in dst.iter_mut().zip(t.parents()) {
            *d = v as u32;
        }
        unsafe { *root_out = t.root() as u32 };
        PmlStatus::Ok
    })
}

/// Count the cyclic points of a mapping given as a 1-based image array.
///
/// # Safety
/// `image` must point to `n` readable `uint32_t`; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pml_cyclic_count(
    image: *const u32,
    n: usize,
    out: *mut usize,
) -> PmlStatus {
    if image.is_null() || out.is_null() {
        return PmlStatus::NullArgument;
    }
    guard(|| {
        let img: Vec<usize> = unsafe { std::slice::from_raw_parts(image, n) }
            .iter()
            .map(|&v| v as usize)
            .collect();
        match Mapping::new(img) {
            Ok(m) => {
                unsafe { *out = cyclic_count(&m) };
                PmlStatus::Ok
            }
            Err(_) => PmlStatus::InvalidArgument,
        }
    })
}

/// Run a catalog experiment from a JSON config string; on success `*report`
/// receives a JSON report to be released with `pml_string_free`.
///
/// Returns `ThresholdFailed` (with the report still written) when the
/// experiment ran but its pinned threshold did not hold.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report` writable.
#[no_mangle]
pub unsafe extern "C" fn pml_run_experiment_json(
    config_json: *const c_char,
    report: *mut *mut c_char,
) -> PmlStatus {
    if config_json.is_null() || report.is_null() {
        return PmlStatus::NullArgument;
    }
    guard(|| {
        let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
            Ok(t) => t,
            Err(_) => return PmlStatus::Utf8Error,
        };
        let cfg: ExperimentConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(_) => return PmlStatus::JsonError,
        };
        let rpt = match run_experiment(&cfg) {
            Ok(r) => r,
            Err(_) => return PmlStatus::InvalidArgument,
        };
        let body = serde_json::to_string(&rpt).expect("report serializes");
        let c = CString::new(body).expect("no interior NUL");
        unsafe { *report = c.into_raw() };
        if rpt.pass {
            PmlStatus::Ok
        } else {
            PmlStatus::ThresholdFailed
        }
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pml_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_lifecycle_and_sampling() {
        let theta = [0.5f64];
        let mut handle: *mut PmlFamily = std::ptr::null_mut();
        let status = unsafe { pml_family_new(theta.as_ptr(), 1, 101, &mut handle) };
        assert_eq!(status, PmlStatus::Ok);
        assert_eq!(unsafe { pml_family_len(handle) }, 101);

        let mut sigma = 0.0;
        assert_eq!(
            unsafe { pml_family_sigma(handle, &mut sigma) },
            PmlStatus::Ok
        );
        assert!((sigma - 0.1091668).abs() < 1e-6);

        let mut values = vec![0.0f64; 101];
        assert_eq!(
            unsafe { pml_family_values(handle, values.as_mut_ptr(), values.len()) },
            PmlStatus::Ok
        );
        assert!((values[0] / sigma - 0.5).abs() < 1e-12);

        let mut image = vec![0u32; 101];
        assert_eq!(
            unsafe { pml_sample_mapping(handle, 7, 0, image.as_mut_ptr(), image.len()) },
            PmlStatus::Ok
        );
        assert!(image.iter().all(|&v| (1..=101).contains(&v)));
        let mut again = vec![0u32; 101];
        unsafe { pml_sample_mapping(handle, 7, 0, again.as_mut_ptr(), again.len()) };
        assert_eq!(image, again);

        let mut count = 0usize;
        assert_eq!(
            unsafe { pml_cyclic_count(image.as_ptr(), image.len(), &mut count) },
            PmlStatus::Ok
        );
        assert!(count >= 1);

        let mut parent = vec![0u32; 101];
        let mut root = 0u32;
        assert_eq!(
            unsafe { pml_sample_tree(handle, 7, 1, parent.as_mut_ptr(), parent.len(), &mut root) },
            PmlStatus::Ok
        );
        assert_eq!(parent[(root - 1) as usize], 0);

        unsafe { pml_family_free(handle) };
    }

    #[test]
    fn invalid_inputs_are_status_coded() {
        let mut handle: *mut PmlFamily = std::ptr::null_mut();
        let bad = [1.2f64];
        assert_eq!(
            unsafe { pml_family_new(bad.as_ptr(), 1, 10, &mut handle) },
            PmlStatus::InvalidArgument
        );
        assert_eq!(
            unsafe { pml_family_new(std::ptr::null(), 1, 10, &mut handle) },
            PmlStatus::NullArgument
        );
        let mut out = 0.0;
        assert_eq!(
            unsafe { pml_family_sigma(std::ptr::null(), &mut out) },
            PmlStatus::NullArgument
        );
    }

    #[test]
    fn experiment_json_end_to_end() {
        let cfg = std::ffi::CString::new(r#"{"experiment":"E1","replications":1}"#).unwrap();
        let mut report: *mut c_char = std::ptr::null_mut();
        let status = unsafe { pml_run_experiment_json(cfg.as_ptr(), &mut report) };
        assert_eq!(status, PmlStatus::Ok);
        let body = unsafe { CStr::from_ptr(report) }.to_str().unwrap();
        assert!(body.contains("\"pass\":true"));
        unsafe { pml_string_free(report) };

        let bad = std::ffi::CString::new("{not json").unwrap();
        let mut report: *mut c_char = std::ptr::null_mut();
        assert_eq!(
            unsafe { pml_run_experiment_json(bad.as_ptr(), &mut report) },
            PmlStatus::JsonError
        );

        // A run whose pinned threshold cannot hold still returns its report.
        let failing = std::ffi::CString::new(
            r#"{"experiment":"E5","n":2,"theta":[],"seed":0,"replications":3}"#,
        )
        .unwrap();
        let mut report: *mut c_char = std::ptr::null_mut();
        assert_eq!(
            unsafe { pml_run_experiment_json(failing.as_ptr(), &mut report) },
            PmlStatus::ThresholdFailed
        );
        let body = unsafe { CStr::from_ptr(report) }.to_str().unwrap();
        assert!(body.contains("\"pass\":false"));
        unsafe { pml_string_free(report) };
    }
}
