mod common;

use std::path::Path;

use proptest::prelude::*;
use tgrd::estimators::TransientHistogram;
use tgrd::io::*;
use tgrd::presets::{by_name, NAMES};
use tgrd::scene::Scene;
use tgrd::temporal::FrameSpec;
use tgrd::Error;

const SCENE: &str = r#"
c = 0.3

[[mesh]]
name = "floor"
file = "floor.obj"
scale = 2.0
[mesh.material]
type = "lambertian"
albedo = 0.5

[[mesh]]
name = "light"
vertices = [[-0.1, -0.1, 1.0], [-0.1, 0.1, 1.0], [0.1, 0.1, 1.0], [0.1, -0.1, 1.0]]
triangles = [[0, 1, 2], [0, 2, 3]]
[mesh.material]
type = "lambertian"
albedo = 0.0
[mesh.emission]
radiance = 4.0
profile = { kind = "gaussian", mean = 0.0, sigma = 0.1, amplitude = 1.0 }

[sensor]
position = [0.0, 0.0, 0.5]
look_at = [0.0, 0.0, 0.0]
up = [0.0, 1.0, 0.0]
fov_deg = 50.0
width = 3
height = 2
profile = { kind = "triangle", center = 0.1, half_width = 0.1, peak = 1.0 }
frames = { count = 4, exposure = 0.2, start = 3.0 }

[[parameter]]
name = "y"
value = 0.25
bounds = [-1.0, 1.0]

[[binding]]
parameter = "y"
target = "light"
kind = { type = "translation", axis = [0.0, 1.0, 0.0] }
"#;

const FLOOR_OBJ: &str = "# floor\nv -1 -1 0\nv 1 -1 0\nv 1 1 0\nv -1 1 0\nf 1 2 3\nf 1 3/1 4//2\n";

fn write_scene(dir: &Path, text: &str) -> std::path::PathBuf {
    std::fs::write(dir.join("floor.obj"), FLOOR_OBJ).unwrap();
    let p = dir.join("scene.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn hand_written_scene_loads() {
    let dir = tempfile::tempdir().unwrap();
    let s = load_scene(&write_scene(dir.path(), SCENE)).unwrap();
    assert_eq!(s.base_meshes.len(), 2);
    assert_eq!(s.base_meshes[0].triangles.len(), 2);
    assert_eq!(s.base_meshes[0].vertices[2].x, 2.0);
    assert_eq!(s.theta(), vec![0.25]);
    let f = s.frames();
    assert_eq!((f.width, f.height, f.count), (3, 2, 4));
    common::prepared(&s);
}

#[test]
fn scene_round_trips_through_toml() {
    for name in NAMES {
        let d = by_name(name).unwrap();
        let text = scene_to_toml(&d).unwrap();
        let back = parse_scene(&text, Path::new("x.toml")).unwrap();
        assert_eq!(back, d, "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let d = parse_scene(SCENE, Path::new("s.toml")).unwrap();
    let p = dir.path().join("copy.toml");
    save_scene(&d, &p).unwrap();
    assert_eq!(parse_scene(&std::fs::read_to_string(&p).unwrap(), &p).unwrap(), d);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = SCENE.replace("fov_deg = 50.0", "fov_deg = 50.0\nfocal = 3.0");
    let e = parse_scene(&text, Path::new("s.toml")).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }), "{e}");
    assert!(e.to_string().contains("focal"), "{e}");
}

#[test]
fn parse_errors_carry_the_line() {
    let text = "c = 0.3\n\n[sensor\nwidth = 2\n";
    match parse_scene(text, Path::new("bad.toml")).unwrap_err() {
        Error::Parse { line, path, .. } => {
            assert_eq!(line, 3);
            assert_eq!(path, Path::new("bad.toml"));
        }
        e => panic!("{e}"),
    }
}

#[test]
fn a_scene_needs_an_emitter() {
    let mut d = parse_scene(SCENE, Path::new("s.toml")).unwrap();
    d.meshes[1].emission = None;
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), SCENE);
    let e = Scene::new(d, dir.path()).unwrap_err();
    assert!(matches!(e, Error::InvalidScene(_)), "{e}");
}

#[test]
fn invalid_scenes_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_scene(dir.path(), SCENE);
    let base = parse_scene(SCENE, Path::new("s.toml")).unwrap();
    let check = |f: &dyn Fn(&mut tgrd::scene::SceneDesc)| {
        let mut d = base.clone();
        f(&mut d);
        assert!(Scene::new(d, dir.path()).is_err());
    };
    check(&|d| d.bindings[0].target = "nothing".into());
    check(&|d| d.bindings[0].parameter = "nothing".into());
    check(&|d| d.meshes[1].name = "floor".into());
    check(&|d| d.medium.eta = 0.0);
    check(&|d| d.sensor.frames.count = 0);
    check(&|d| d.meshes[0].file = Some("missing.obj".into()));
    check(&|d| d.meshes[1].triangles = Some(vec![[0, 1, 7]]));
    check(&|d| d.sensor.profile = tgrd::temporal::TemporalProfile::Delta { t0: 0.0 });
}

#[test]
fn bad_histogram_files_are_rejected() {
    assert!(matches!(decode_histogram(b"TGRX").unwrap_err(), Error::HistogramFormat(_)));
    let h = TransientHistogram::zeros(&FrameSpec { count: 2, exposure: 0.1, start: 0.0, width: 2, height: 2 }, 0.3, 1);
    let mut b = encode_histogram(&h).unwrap();
    assert_eq!(b.len(), 48 + 2 * 8 * 4);
    b.pop();
    assert!(decode_histogram(&b).is_err());
    b[0] = b'X';
    assert!(decode_histogram(&b).is_err());
    assert!(matches!(load_histogram(Path::new("/nonexistent/h.bin")).unwrap_err(), Error::Io { .. }));
}

#[test]
fn csv_lists_every_bin() {
    let mut h = TransientHistogram::zeros(&FrameSpec { count: 3, exposure: 0.1, start: 1.0, width: 2, height: 1 }, 0.3, 2);
    h.intensity[4] = 1.5;
    let csv = histogram_csv(&h);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 6);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn png_frames_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut h = TransientHistogram::zeros(&FrameSpec { count: 2, exposure: 0.1, start: 0.0, width: 3, height: 2 }, 0.3, 1);
    h.intensity[1] = 2.0;
    h.grads[0][3] = -1.0;
    let p = dir.path().join("f.png");
    frame_png(&h, None, 1, &p).unwrap();
    frame_png(&h, Some(0), 1, &dir.path().join("g.png")).unwrap();
    let bytes = std::fs::read(&p).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");
}

fn histogram() -> impl Strategy<Value = TransientHistogram> {
    (1usize..4, 1usize..4, 1usize..5, 0usize..3, -5.0..5.0f64, 0.01..1.0f64).prop_flat_map(|(h, w, f, d, t0, dt)| {
        let n = h * w * f;
        let plane = || prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()).prop_map(f64::from), n);
        (plane(), prop::collection::vec(plane(), d)).prop_map(move |(intensity, grads)| {
            let mut out = TransientHistogram::zeros(&FrameSpec { count: f, exposure: dt, start: t0, width: w, height: h }, 0.3, d);
            out.intensity = intensity;
            out.grads = grads;
            out
        })
    })
}

proptest! {
    #[test]
    fn histogram_round_trip(h in histogram()) {
        let bytes = encode_histogram(&h).unwrap();
        prop_assert_eq!(bytes.len(), 48 + (1 + h.num_params()) * h.len() * 4);
        let back = decode_histogram(&bytes).unwrap();
        prop_assert_eq!(&back.intensity, &h.intensity);
        prop_assert_eq!(&back.grads, &h.grads);
        prop_assert_eq!((back.height, back.width, back.frames), (h.height, h.width, h.frames));
        prop_assert_eq!((back.t0, back.dt, back.c), (h.t0, h.dt, h.c));
        prop_assert_eq!(encode_histogram(&back).unwrap(), bytes);
    }
}
