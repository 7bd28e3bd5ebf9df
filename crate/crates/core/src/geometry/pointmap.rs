use nalgebra::Vector3;

use super::SE3Pose;
use crate::{Error, Result};

/// Integer pixel coordinate, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Dense per-pixel geometry of one frame: pointmap `P`, confidence `C`,
/// quality `Q` and the set of pixels with defined geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMapFrame {
    pub id: usize,
    height: usize,
    width: usize,
    points: Vec<Vector3<f64>>,
    confidence: Vec<f64>,
    quality: Vec<f64>,
    valid: Vec<bool>,
}

impl PointMapFrame {
    /// Validates dimensions and value ranges. Invalid pixels may hold any
    /// point; valid ones must be finite.
    pub fn new(
        id: usize,
        height: usize,
        width: usize,
        points: Vec<Vector3<f64>>,
        confidence: Vec<f64>,
        quality: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!("frame size {height}x{width}")));
        }
        let n = height * width;
        for (what, len) in [
            ("points", points.len()),
            ("confidence", confidence.len()),
            ("quality", quality.len()),
            ("valid", valid.len()),
        ] {
            if len != n {
                return Err(Error::InvalidArgument(format!("{what} has {len} entries, expected {n}")));
            }
        }
        if let Some(c) = confidence.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidArgument(format!("confidence {c} outside [0,1]")));
        }
        if let Some(q) = quality.iter().find(|q| !(**q >= 0.0) || !q.is_finite()) {
            return Err(Error::InvalidArgument(format!("quality {q} is negative or not finite")));
        }
        if points.iter().zip(&valid).any(|(p, v)| *v && !p.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidArgument("non-finite point at a valid pixel".into()));
        }
        Ok(Self { id, height, width, points, confidence, quality, valid })
    }

    /// Frame with every pixel valid and uniform `C`, `Q`.
    pub fn from_points(
        id: usize,
        height: usize,
        width: usize,
        points: Vec<Vector3<f64>>,
        confidence: f64,
        quality: f64,
    ) -> Result<Self> {
        let n = height * width;
        Self::new(id, height, width, points, vec![confidence; n], vec![quality; n], vec![true; n])
    }

    /// Frame with no valid pixel.
    pub fn empty(id: usize, height: usize, width: usize) -> Result<Self> {
        let n = height * width;
        Self::new(id, height, width, vec![Vector3::zeros(); n], vec![0.0; n], vec![0.0; n], vec![false; n])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &PointMapFrame) -> bool {
        self.height == other.height && self.width == other.width
    }

    #[inline]
    pub fn index(&self, px: Pixel) -> usize {
        px.row * self.width + px.col
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> Pixel {
        Pixel::new(index / self.width, index % self.width)
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn confidence(&self) -> &[f64] {
        &self.confidence
    }

    pub fn quality(&self) -> &[f64] {
        &self.quality
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    /// `|Ω|`: number of pixels with defined geometry.
    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Points of valid pixels, row-major.
    pub fn valid_points(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.points.iter().zip(&self.valid).filter(|(_, v)| **v).map(|(p, _)| p)
    }

    /// Same frame with every point mapped through `pose`.
    pub fn transformed(&self, pose: &SE3Pose) -> Self {
        let mut out = self.clone();
        for p in out.points.iter_mut() {
            *p = pose.apply(p);
        }
        out
    }

    /// Rotates the pixel grid by 90° clockwise (H×W becomes W×H).
    pub fn rotated_90(&self) -> Self {
        let (h, w) = (self.height, self.width);
        let mut idx = Vec::with_capacity(h * w);
        // Output pixel (r, c) takes input pixel (h - 1 - c, r).
        for r in 0..w {
            for c in 0..h {
                idx.push((h - 1 - c) * w + r);
            }
        }
        Self {
            id: self.id,
            height: w,
            width: h,
            points: idx.iter().map(|&i| self.points[i]).collect(),
            confidence: idx.iter().map(|&i| self.confidence[i]).collect(),
            quality: idx.iter().map(|&i| self.quality[i]).collect(),
            valid: idx.iter().map(|&i| self.valid[i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_ranges() {
        let pts = vec![Vector3::zeros(); 4];
        assert!(PointMapFrame::from_points(0, 2, 2, pts.clone(), 1.5, 1.0).is_err());
        assert!(PointMapFrame::from_points(0, 2, 2, pts.clone(), 0.5, -1.0).is_err());
        assert!(PointMapFrame::from_points(0, 0, 2, vec![], 0.5, 1.0).is_err());
        let mut bad = pts.clone();
        bad[1].x = f64::NAN;
        assert!(PointMapFrame::from_points(0, 2, 2, bad, 0.5, 1.0).is_err());
        assert!(PointMapFrame::from_points(0, 2, 2, pts, 0.5, 1.0).is_ok());
    }

    #[test]
    fn nan_allowed_at_invalid_pixels() {
        let mut pts = vec![Vector3::zeros(); 4];
        pts[0].x = f64::NAN;
        let f = PointMapFrame::new(0, 2, 2, pts, vec![0.5; 4], vec![1.0; 4], vec![false, true, true, true]);
        assert!(f.is_ok());
        assert_eq!(f.unwrap().n_valid(), 3);
    }

    #[test]
    fn rotation_four_times_is_identity() {
        let pts: Vec<_> = (0..6).map(|i| Vector3::new(i as f64, 0.0, 1.0)).collect();
        let f = PointMapFrame::from_points(3, 2, 3, pts, 0.5, 2.0).unwrap();
        let r = f.rotated_90();
        assert_eq!((r.height(), r.width()), (3, 2));
        // top-left of the rotated grid is the bottom-left of the source
        assert_eq!(r.points()[0].x, 3.0);
        assert_eq!(r.rotated_90().rotated_90().rotated_90(), f);
    }
}
