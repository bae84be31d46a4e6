//! Minimal OBJ reader: `v` and triangular `f` records only.

use std::path::Path;

use crate::error::{Error, Result};
use crate::vec::Vec3;

pub fn parse_obj(text: &str, path: &Path) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let xs: Vec<f64> = it
                    .map(|s| s.parse::<f64>().map_err(|e| err(line_no, format!("bad coordinate '{s}': {e}"))))
                    .collect::<Result<_>>()?;
                if xs.len() < 3 {
                    return Err(err(line_no, "vertex needs three coordinates".into()));
                }
                vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|e| err(line_no, format!("bad index '{s}': {e}")))?;
                        let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                        if resolved < 0 || resolved >= vertices.len() as i64 {
                            return Err(err(line_no, format!("index {i} out of range")));
                        }
                        Ok(resolved as u32)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(err(line_no, format!("only triangles are supported, got {} vertices", idx.len())));
                }
                triangles.push([idx[0], idx[1], idx[2]]);
            }
            // Normals, texture coordinates, groups and materials are ignored.
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

pub fn load_obj(path: &Path) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}
