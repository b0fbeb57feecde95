//! ASCII point-cloud files.
//!
//! PLY layout, byte for byte (`\n` line endings, coordinates in Rust's
//! shortest round-trip decimal form):
//!
//! ```text
//! ply
//! format ascii 1.0
//! element vertex <N>
//! property double x
//! property double y
//! property double z
//! end_header
//! <x> <y> <z>
//! ...
//! ```
//!
//! The plain text format is the vertex lines alone.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::Point3;

pub fn write_xyz(points: &[Point3]) -> String {
    let mut out = String::with_capacity(points.len() * 32);
    for p in points {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    out
}

pub fn write_ply(points: &[Point3]) -> String {
    let mut out = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    );
    out.push_str(&write_xyz(points));
    out
}

fn parse_vertex(line: &str, lineno: usize) -> Result<Point3> {
    let mut it = line.split_whitespace().map(|t| {
        t.parse::<f64>().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid coordinate {t:?}"),
        })
    });
    let mut next = || {
        it.next().unwrap_or_else(|| {
            Err(Error::Parse {
                line: lineno,
                message: "expected at least 3 coordinates".into(),
            })
        })
    };
    Ok(Point3::new(next()?, next()?, next()?))
}

/// Reads `x y z` lines; extra columns (e.g. reflectance) are ignored.
pub fn read_xyz(text: &str) -> Result<Vec<Point3>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_vertex(l, i + 1))
        .collect()
}

/// Reads an ASCII PLY whose vertex element starts with x, y, z properties.
pub fn read_ply(text: &str) -> Result<Vec<Point3>> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing ply magic")),
    }
    let mut vertices = None;
    let mut in_vertex = false;
    let mut props = Vec::new();
    let mut header_done = false;
    for (i, line) in lines.by_ref() {
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::Format(format!("unsupported PLY format {fmt}")))
            }
            ["element", "vertex", n] => {
                vertices = Some(
                    n.parse::<usize>()
                        .map_err(|_| parse_err(i + 1, "bad vertex count"))?,
                );
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", .., name] if in_vertex => props.push(name.to_string()),
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(Error::Format("PLY header not terminated".into()));
    }
    let n = vertices.ok_or_else(|| Error::Format("PLY has no vertex element".into()))?;
    if props.len() < 3 || props[..3] != ["x", "y", "z"] {
        return Err(Error::Format("PLY vertices must start with x, y, z".into()));
    }
    let mut out = Vec::with_capacity(n);
    for (i, line) in lines.take(n) {
        out.push(parse_vertex(line, i + 1)?);
    }
    if out.len() != n {
        return Err(Error::Format(format!(
            "PLY declares {n} vertices but holds {}",
            out.len()
        )));
    }
    Ok(out)
}
