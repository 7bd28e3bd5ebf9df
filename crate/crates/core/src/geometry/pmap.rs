//! `PMAP v1` pointmap files.
//!
//! Layout (little-endian): magic `PMAP`, `u32` height, `u32` width, then
//! `height * width` records of `f32 x, f32 y, f32 z, f32 c, f32 q, u8 valid`
//! in row-major order. No padding.

use std::io::{Read, Write};

use nalgebra::Vector3;

use super::PointMapFrame;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PMAP";
const RECORD: usize = 5 * 4 + 1;

pub fn write<W: Write>(frame: &PointMapFrame, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(12 + frame.len() * RECORD);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(frame.height() as u32).to_le_bytes());
    buf.extend_from_slice(&(frame.width() as u32).to_le_bytes());
    for i in 0..frame.len() {
        let p = frame.points()[i];
        for v in [p.x, p.y, p.z, frame.confidence()[i], frame.quality()[i]] {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        buf.push(frame.valid_mask()[i] as u8);
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Reads one frame; `id` is assigned by the caller since the format carries
/// no frame index.
pub fn read<R: Read>(mut input: R, id: usize) -> Result<PointMapFrame> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode(&bytes, id)
}

pub fn decode(bytes: &[u8], id: usize) -> Result<PointMapFrame> {
    if bytes.len() < 12 {
        return Err(Error::format("PMAP", "truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format("PMAP", "bad magic"));
    }
    let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n = h
        .checked_mul(w)
        .ok_or_else(|| Error::format("PMAP", "dimensions overflow"))?;
    let expected = n
        .checked_mul(RECORD)
        .and_then(|b| b.checked_add(12))
        .ok_or_else(|| Error::format("PMAP", "dimensions overflow"))?;
    if bytes.len() < expected {
        return Err(Error::format("PMAP", format!("truncated payload: {} of {expected} bytes", bytes.len())));
    }
    if bytes.len() > expected {
        return Err(Error::format("PMAP", "trailing bytes after payload"));
    }
    let mut points = Vec::with_capacity(n);
    let mut conf = Vec::with_capacity(n);
    let mut qual = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for rec in bytes[12..].chunks_exact(RECORD) {
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()) as f64;
        points.push(Vector3::new(f(0), f(1), f(2)));
        conf.push(f(3));
        qual.push(f(4));
        valid.push(match rec[20] {
            0 => false,
            1 => true,
            b => return Err(Error::format("PMAP", format!("valid flag {b}"))),
        });
    }
    PointMapFrame::new(id, h, w, points, conf, qual, valid).map_err(|e| Error::format("PMAP", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame_from(vals: &[(f32, f32, f32, f32, f32, bool)], h: usize, w: usize) -> PointMapFrame {
        PointMapFrame::new(
            0,
            h,
            w,
            vals.iter().map(|v| Vector3::new(v.0 as f64, v.1 as f64, v.2 as f64)).collect(),
            vals.iter().map(|v| v.3 as f64).collect(),
            vals.iter().map(|v| v.4 as f64).collect(),
            vals.iter().map(|v| v.5).collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            vals in prop::collection::vec(
                (-100f32..100.0, -100f32..100.0, -100f32..100.0, 0f32..=1.0, 0f32..5.0, any::<bool>()),
                12,
            )
        ) {
            let f = frame_from(&vals, 3, 4);
            let mut buf = Vec::new();
            write(&f, &mut buf).unwrap();
            prop_assert_eq!(buf.len(), 12 + 12 * 21);
            let g = decode(&buf, 0).unwrap();
            prop_assert_eq!(&g, &f);
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let f = frame_from(&[(1.0, 2.0, 3.0, 0.5, 2.0, true); 4], 2, 2);
        let mut buf = Vec::new();
        write(&f, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(decode(&bad, 0).is_err());
        assert!(decode(&buf[..buf.len() - 1], 0).is_err());
        assert!(decode(&buf[..8], 0).is_err());
        assert!(decode(&buf, 0).is_ok());
    }

    #[test]
    fn header_layout() {
        let f = frame_from(&[(1.0, 2.0, 3.0, 0.5, 2.0, true); 6], 2, 3);
        let mut buf = Vec::new();
        write(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"PMAP");
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(&buf[8..12], &3u32.to_le_bytes());
        assert_eq!(&buf[12..16], &1.0f32.to_le_bytes());
        assert_eq!(buf[32], 1);
    }
}
