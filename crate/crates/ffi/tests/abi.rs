use std::ffi::{CStr, CString};
use std::ptr;

use tgrd_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tgrd_last_error()) }.to_string_lossy().into_owned()
}

fn preset(name: &str) -> *mut TgrdScene {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tgrd_scene_preset(name.as_ptr(), &mut s) }, TgrdStatus::Ok);
    assert!(!s.is_null());
    s
}

fn small_scene(dir: &std::path::Path) -> CString {
    let mut desc = tgrd::presets::by_name("two-planes").unwrap();
    desc.sensor.width = 4;
    desc.sensor.height = 3;
    desc.sensor.frames.count = 5;
    let path = dir.join("s.toml");
    tgrd::io::save_scene(&desc, &path).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

#[test]
fn render_gradient_and_planes() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_scene(dir.path());
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(tgrd_scene_load(path.as_ptr(), &mut s), TgrdStatus::Ok);
        assert_eq!(tgrd_scene_num_parameters(s), 1);

        let mut h = ptr::null_mut();
        assert_eq!(tgrd_gradient(s, 4, 4, 7, 1, &mut h), TgrdStatus::Ok);
        let mut d = TgrdDims::default();
        assert_eq!(tgrd_histogram_dims(h, &mut d), TgrdStatus::Ok);
        assert_eq!((d.height, d.width, d.frames, d.parameters), (3, 4, 5, 1));
        let n = d.height * d.width * d.frames;
        let mut buf = vec![0.0; n];
        assert_eq!(tgrd_histogram_plane(h, 0, buf.as_mut_ptr(), n), TgrdStatus::Ok);
        assert!(buf.iter().any(|v| *v > 0.0));
        assert_eq!(tgrd_histogram_plane(h, 1, buf.as_mut_ptr(), n), TgrdStatus::Ok);
        assert_eq!(tgrd_histogram_plane(h, 2, buf.as_mut_ptr(), n), TgrdStatus::InvalidArgument);
        assert!(last_error().contains("no plane 2"));
        assert_eq!(tgrd_histogram_plane(h, 0, buf.as_mut_ptr(), n - 1), TgrdStatus::InvalidArgument);

        let mut f = ptr::null_mut();
        assert_eq!(tgrd_render(s, 4, 7, 1, &mut f), TgrdStatus::Ok);
        let mut fwd = vec![0.0; n];
        tgrd_histogram_plane(f, 0, fwd.as_mut_ptr(), n);
        let mut grad_int = vec![0.0; n];
        tgrd_histogram_plane(h, 0, grad_int.as_mut_ptr(), n);
        assert_eq!(fwd.iter().sum::<f64>() > 0.0, grad_int.iter().sum::<f64>() > 0.0);

        tgrd_histogram_free(f);
        tgrd_histogram_free(h);
        tgrd_scene_free(s);
    }
}

#[test]
fn parameters_roundtrip() {
    let s = preset("mini-nlos");
    unsafe {
        assert_eq!(tgrd_scene_num_parameters(s), 3);
        let v = [0.1, -0.05, 0.02];
        assert_eq!(tgrd_scene_set_parameters(s, v.as_ptr(), 3), TgrdStatus::Ok);
        let mut back = [0.0; 3];
        assert_eq!(tgrd_scene_get_parameters(s, back.as_mut_ptr(), 3), TgrdStatus::Ok);
        assert_eq!(back, v);
        assert_eq!(tgrd_scene_set_parameters(s, v.as_ptr(), 2), TgrdStatus::InvalidArgument);
        assert_eq!(tgrd_scene_get_parameters(s, back.as_mut_ptr(), 4), TgrdStatus::InvalidArgument);
        tgrd_scene_free(s);
    }
}

#[test]
fn save_and_load_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_scene(dir.path());
    let out = CString::new(dir.path().join("h.tgrd").to_str().unwrap()).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        tgrd_scene_load(path.as_ptr(), &mut s);
        let mut h = ptr::null_mut();
        assert_eq!(tgrd_render(s, 2, 1, 0, &mut h), TgrdStatus::Ok);
        assert_eq!(tgrd_histogram_save(h, out.as_ptr()), TgrdStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(tgrd_histogram_load(out.as_ptr(), &mut back), TgrdStatus::Ok);
        let (mut a, mut b) = (TgrdDims::default(), TgrdDims::default());
        tgrd_histogram_dims(h, &mut a);
        tgrd_histogram_dims(back, &mut b);
        assert_eq!(a, b);
        tgrd_histogram_free(back);
        tgrd_histogram_free(h);
        tgrd_scene_free(s);
    }
}

#[test]
fn errors_have_codes_and_messages() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        let missing = CString::new(dir.path().join("none.toml").to_str().unwrap()).unwrap();
        assert_eq!(tgrd_scene_load(missing.as_ptr(), &mut s), TgrdStatus::Io);
        assert!(s.is_null());
        assert!(last_error().contains("none.toml"));

        let bad = dir.path().join("bad.toml");
        std::fs::write(&bad, "c = 0.3\nnot valid = = toml\n").unwrap();
        let bad = CString::new(bad.to_str().unwrap()).unwrap();
        assert_eq!(tgrd_scene_load(bad.as_ptr(), &mut s), TgrdStatus::Parse);

        assert_eq!(tgrd_scene_load(ptr::null(), &mut s), TgrdStatus::NullArgument);
        let unknown = CString::new("nope").unwrap();
        assert_eq!(tgrd_scene_preset(unknown.as_ptr(), &mut s), TgrdStatus::InvalidArgument);
        let mut h = ptr::null_mut();
        assert_eq!(tgrd_render(ptr::null(), 1, 0, 1, &mut h), TgrdStatus::NullArgument);

        let ok = preset("two-planes");
        let neg = [f64::NAN];
        assert_ne!(tgrd_scene_set_parameters(ok, neg.as_ptr(), 1), TgrdStatus::Ok);
        tgrd_scene_free(ok);
        tgrd_scene_free(ptr::null_mut());
        tgrd_histogram_free(ptr::null_mut());
    }
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(tgrd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/tgrd.h")).unwrap();
    for name in ["tgrd_scene_load", "tgrd_gradient", "tgrd_histogram_plane", "TGRD_STATUS_OK", "TgrdDims"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
