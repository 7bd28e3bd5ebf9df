//! Atomic file output and small text formats.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use framegate::numfmt::g17;
use nalgebra::Vector3;
use serde_json::Value;

use crate::{data_err, CliError};

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`. Parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| data_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| data_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| data_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| data_err(path, e))?;
    tmp.persist(path).map_err(|e| data_err(path, e.error))?;
    Ok(())
}

/// Renders into a buffer with `f`, then writes atomically.
pub fn write_with(
    path: &Path,
    f: impl FnOnce(&mut Vec<u8>) -> framegate::Result<()>,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Points as `x y z` lines.
pub fn write_xyz(path: &Path, points: &[Vector3<f64>]) -> Result<(), CliError> {
    let mut s = String::with_capacity(points.len() * 48);
    for p in points {
        s.push_str(&format!("{} {} {}\n", g17(p.x), g17(p.y), g17(p.z)));
    }
    write_atomic(path, s.as_bytes())
}

pub fn read_xyz(path: &Path) -> Result<Vec<Vector3<f64>>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| data_err(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| data_err(path, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: Vec<f64> = body
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| data_err(path, format!("line {}: not a number", n + 1)))?;
        if v.len() != 3 || v.iter().any(|x| !x.is_finite()) {
            return Err(data_err(path, format!("line {}: expected 3 finite values", n + 1)));
        }
        out.push(Vector3::new(v[0], v[1], v[2]));
    }
    Ok(out)
}

pub fn open(path: &Path) -> Result<BufReader<std::fs::File>, CliError> {
    std::fs::File::open(path).map(BufReader::new).map_err(|e| data_err(path, e))
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
