mod common;

use proptest::prelude::*;
use tgrd::estimators::{RenderOptions, TransientHistogram};
use tgrd::presets::{two_planes, Layout};
use tgrd::scene::FramesDesc;
use tgrd::temporal::{FrameSpec, TemporalProfile};
use tgrd::validation::*;

fn hist(h: usize, w: usize, f: usize, values: Vec<f64>) -> TransientHistogram {
    let spec = FrameSpec { count: f, exposure: 0.1, start: 0.0, width: w, height: h };
    let mut out = TransientHistogram::zeros(&spec, 0.3, 1);
    out.grads[0] = values.iter().map(|v| 2.0 * v).collect();
    out.intensity = values;
    out
}

fn ramp(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 37) % 11) as f64 * 0.3 + 0.1).collect()
}

#[test]
fn identical_inputs() {
    let a = hist(3, 4, 5, ramp(60));
    let m = compare(&a, &a).unwrap();
    assert_eq!(m.rmse, 0.0);
    assert_eq!(m.psnr, f64::INFINITY);
    assert!(m.frames.iter().all(|f| f.rmse == 0.0 && f.psnr.is_infinite() && f.max_abs_diff == 0.0));
    assert!(m.summary().contains("psnr inf"));
}

#[test]
fn constant_offset_gives_known_rmse() {
    let a = hist(3, 4, 5, ramp(60));
    let b = hist(3, 4, 5, ramp(60).iter().map(|v| v + 0.1).collect());
    let m = compare(&b, &a).unwrap();
    assert!((m.rmse - 0.1).abs() < 1e-12);
    for f in &m.frames {
        assert!((f.rmse - 0.1).abs() < 1e-12);
        assert!((f.max_abs_diff - 0.1).abs() < 1e-12);
        assert!((f.correlation - 1.0).abs() < 1e-12);
    }
    let g = compare_planes(&b, &a, Plane::Gradient(0)).unwrap();
    assert!((g.rmse - 0.2).abs() < 1e-12);
    assert!(compare_planes(&b, &a, Plane::Gradient(1)).is_err());
    let csv = m.to_csv();
    assert_eq!(csv.lines().count(), 1 + 5);
    assert!(csv.starts_with("frame,rmse,psnr,correlation,max_abs_diff"));
    assert_eq!(m.diff_histogram.counts.iter().sum::<u64>(), 60);
}

#[test]
fn mismatched_dims_are_refused() {
    let a = hist(3, 4, 5, ramp(60));
    let b = hist(4, 3, 5, ramp(60));
    assert!(compare(&a, &b).is_err());
    let c = hist(3, 4, 4, ramp(48));
    assert!(compare(&a, &c).is_err());
}

fn smooth_scene() -> tgrd::scene::Scene {
    let mut d = two_planes(Layout::new(8, 8, 1, 100.0, -50.0));
    d.sensor.profile = TemporalProfile::Box { t_start: 0.0, t_end: 100.0, amplitude: 1.0 };
    d.sensor.frames = FramesDesc { count: 1, exposure: 100.0, start: -50.0 };
    common::scene(d)
}

#[test]
fn unbound_scene_gives_no_planes() {
    let mut s = smooth_scene();
    s.desc.parameters.clear();
    s.desc.bindings.clear();
    let s = common::scene(s.desc);
    let h = fd_gradient(&s, &FdConfig { spp: 2, ..FdConfig::default() }, 0, &RenderOptions::single_threaded()).unwrap();
    assert!(h.grads.is_empty());
}

#[test]
fn defaults() {
    let c = FdConfig::default();
    assert_eq!(c.epsilon, vec![0.01]);
    assert_eq!(c.scheme, FdScheme::Central);
    assert!(c.common_random_numbers);
    assert!(FdConfig { epsilon: vec![0.0], ..c.clone() }.validate(1).is_err());
    assert!(FdConfig { epsilon: vec![0.1, 0.2], ..c }.validate(1).is_err());
}

#[test]
fn central_beats_forward_at_matched_step() {
    let s = smooth_scene();
    let opts = RenderOptions::single_threaded();
    let fd = |eps: f64, scheme| {
        let cfg = FdConfig { epsilon: vec![eps], scheme, spp: 16, common_random_numbers: true };
        fd_gradient(&s, &cfg, 7, &opts).unwrap().grads.remove(0)
    };
    let reference = fd(1e-4, FdScheme::Central);
    assert!(reference.iter().any(|v| *v != 0.0));
    let central = fd(0.05, FdScheme::Central);
    let forward = fd(0.05, FdScheme::Forward);
    let (ec, ef) = (rmse(&central, &reference), rmse(&forward, &reference));
    assert!(ec < ef, "central {ec}, forward {ef}");
}

#[test]
fn invalid_perturbation_names_the_parameter() {
    let mut d = smooth_scene().desc;
    d.medium.eta = 1.0;
    d.parameters[0].name = "index".into();
    d.parameters[0].value = -0.995;
    d.bindings[0].parameter = "index".into();
    d.bindings[0].target = "medium".into();
    d.bindings[0].kind = tgrd::geometry::BindingKind::RefractiveIndex;
    let s = common::scene(d);
    let e = fd_gradient(&s, &FdConfig { spp: 1, ..FdConfig::default() }, 0, &RenderOptions::single_threaded()).unwrap_err();
    assert!(e.to_string().contains("index"), "{e}");
}

proptest! {
    #[test]
    fn rmse_and_max_diff_are_symmetric(a in prop::collection::vec(-5.0..5.0f64, 24), b in prop::collection::vec(-5.0..5.0f64, 24)) {
        let (ha, hb) = (hist(2, 3, 4, a), hist(2, 3, 4, b));
        let (m1, m2) = (compare(&ha, &hb).unwrap(), compare(&hb, &ha).unwrap());
        prop_assert_eq!(m1.rmse, m2.rmse);
        prop_assert_eq!(m1.max_abs_diff, m2.max_abs_diff);
        for (f1, f2) in m1.frames.iter().zip(&m2.frames) {
            prop_assert_eq!(f1.rmse, f2.rmse);
        }
    }
}
