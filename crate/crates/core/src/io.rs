//! Scene files (TOML) and histogram files.
//!
//! Histogram layout, little-endian: magic `TGRD`, then `u32` version, `H`,
//! `W`, `N_f`, `d`, then `f64` `t0`, `Δt`, `c`, then `1 + d` planes of
//! `H·W·N_f` `f32` values (intensity first), each row-major over
//! `(row, col, frame)`.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::TransientHistogram;
use crate::scene::{Scene, SceneDesc};

pub const MAGIC: [u8; 4] = *b"TGRD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 5 * 4 + 3 * 8;

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses a scene description; errors carry the line number.
pub fn parse_scene(text: &str, path: &Path) -> Result<SceneDesc> {
    toml::from_str::<SceneDesc>(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })
}

pub fn scene_to_toml(desc: &SceneDesc) -> Result<String> {
    toml::to_string(desc).map_err(|e| Error::Config(format!("cannot serialize scene: {e}")))
}

/// Reads and validates a scene file; mesh paths resolve against its directory.
pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let desc = parse_scene(&text, path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Scene::new(desc, dir)
}

pub fn save_scene(desc: &SceneDesc, path: &Path) -> Result<()> {
    fs::write(path, scene_to_toml(desc)?).map_err(|e| Error::io(path, e))
}

fn u32_of(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::HistogramFormat(format!("{what} {v} does not fit in u32")))
}

pub fn encode_histogram(h: &TransientHistogram) -> Result<Vec<u8>> {
    let n = h.len();
    let mut out = Vec::with_capacity(HEADER_LEN + (1 + h.num_params()) * n * 4);
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, u32_of(h.height, "height")?, u32_of(h.width, "width")?, u32_of(h.frames, "frames")?, u32_of(h.num_params(), "parameters")?] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [h.t0, h.dt, h.c] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for plane in std::iter::once(&h.intensity).chain(&h.grads) {
        for &v in plane {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_histogram(bytes: &[u8]) -> Result<TransientHistogram> {
    let bad = |m: String| Error::HistogramFormat(m);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("file too short ({} bytes)", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let u = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let f = |i: usize| f64::from_le_bytes(bytes[24 + 8 * i..32 + 8 * i].try_into().unwrap());
    if u(0) != VERSION {
        return Err(bad(format!("unsupported version {}", u(0))));
    }
    let (height, width, frames, d) = (u(1) as usize, u(2) as usize, u(3) as usize, u(4) as usize);
    let n = height
        .checked_mul(width)
        .and_then(|x| x.checked_mul(frames))
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    let expect = (1 + d).checked_mul(n).and_then(|x| x.checked_mul(4)).ok_or_else(|| bad("dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expect {
        return Err(bad(format!("payload is {} bytes, expected {expect}", payload.len())));
    }
    let mut planes = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect::<Vec<_>>()
        .into_iter();
    let mut take = || planes.by_ref().take(n).collect::<Vec<f64>>();
    let intensity = take();
    let grads = (0..d).map(|_| take()).collect();
    Ok(TransientHistogram {
        height,
        width,
        frames,
        t0: f(0),
        dt: f(1),
        c: f(2),
        intensity,
        grads,
        samples_interior: 0,
        samples_boundary: 0,
        nonfinite: 0,
    })
}

pub fn save_histogram(h: &TransientHistogram, path: &Path) -> Result<()> {
    let bytes = encode_histogram(h)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load_histogram(path: &Path) -> Result<TransientHistogram> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_histogram(&bytes)
}

/// One line per bin: `row,col,frame,intensity,grad_0,...`.
pub fn histogram_csv(h: &TransientHistogram) -> String {
    let mut s = String::from("row,col,frame,intensity");
    for i in 0..h.num_params() {
        let _ = write!(s, ",grad_{i}");
    }
    s.push('\n');
    for row in 0..h.height {
        for col in 0..h.width {
            for l in 0..h.frames {
                let k = h.index(row, col, l);
                let _ = write!(s, "{row},{col},{l},{:e}", h.intensity[k]);
                for g in &h.grads {
                    let _ = write!(s, ",{:e}", g[k]);
                }
                s.push('\n');
            }
        }
    }
    s
}

/// Tonemapped frame: intensity as gamma-corrected gray scaled by the
/// plane maximum; gradients red (positive) and blue (negative) scaled by the
/// plane's largest magnitude.
pub fn frame_png(h: &TransientHistogram, plane: Option<usize>, frame: usize, path: &Path) -> Result<()> {
    if frame >= h.frames {
        return Err(Error::DimensionMismatch(format!("frame {frame} of {}", h.frames)));
    }
    let values = match plane {
        None => &h.intensity,
        Some(i) => h.grads.get(i).ok_or_else(|| Error::DimensionMismatch(format!("no gradient plane {i}")))?,
    };
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let img = h.frame_of(values, frame);
    let mut buf = image::RgbImage::new(h.width as u32, h.height as u32);
    for (p, px) in img.iter().zip(buf.pixels_mut()) {
        let v = p * scale;
        *px = match plane {
            None => {
                let g = (v.max(0.0).powf(1.0 / 2.2) * 255.0).round() as u8;
                image::Rgb([g, g, g])
            }
            Some(_) => {
                let m = (v.abs().powf(1.0 / 2.2) * 255.0).round() as u8;
                if v >= 0.0 { image::Rgb([m, 0, 0]) } else { image::Rgb([0, 0, m]) }
            }
        };
    }
    buf.save(path).map_err(|e| Error::io(path, std::io::Error::other(e)))
}
