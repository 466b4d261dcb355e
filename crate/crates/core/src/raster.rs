//! Escape-time style classification images, written as binary PPM.

use rayon::prelude::*;

use crate::dynamics::{iterate_orbit, ClassifierConfig, GlobalMapConfig, Label};
use crate::error::{Error, Result};
use crate::point::Point;

pub const MAX_PIXELS: u64 = 100_000_000;

/// Fixed label colours.
pub fn palette(label: Label) -> [u8; 3] {
    match label {
        Label::Escaping => [255, 255, 255],
        Label::Bounded => [0, 0, 0],
        Label::Bungee => [255, 0, 0],
        Label::Undecided => [128, 128, 128],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Viewport {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let v = Viewport { x_min, x_max, y_min, y_max };
        if ![x_min, x_max, y_min, y_max].iter().all(|c| c.is_finite()) || !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidParameter(format!(
                "viewport needs x_min < x_max and y_min < y_max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone)]
pub struct RasterJob {
    pub viewport: Viewport,
    pub width: usize,
    pub height: usize,
    pub map: GlobalMapConfig,
    pub classifier: ClassifierConfig,
}

impl RasterJob {
    pub fn validate(&self) -> Result<()> {
        Viewport::new(self.viewport.x_min, self.viewport.x_max, self.viewport.y_min, self.viewport.y_max)?;
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("raster needs at least one pixel".into()));
        }
        if (self.width as u64).saturating_mul(self.height as u64) > MAX_PIXELS {
            return Err(Error::InvalidParameter(format!(
                "{}x{} raster exceeds {MAX_PIXELS} pixels",
                self.width, self.height
            )));
        }
        self.classifier.validate()
    }

    /// Centre of pixel `(col, row)`; row 0 is the top of the viewport.
    pub fn pixel_center(&self, col: usize, row: usize) -> Point {
        let v = &self.viewport;
        let fx = (col as f64 + 0.5) / self.width as f64;
        let fy = (row as f64 + 0.5) / self.height as f64;
        Point::new(v.x_min + (v.x_max - v.x_min) * fx, v.y_max - (v.y_max - v.y_min) * fy)
    }

    /// Labels in row-major order, top row first. Rows are classified in
    /// parallel and collected in order.
    pub fn classify(&self) -> Result<Vec<Label>> {
        self.validate()?;
        let rows: Result<Vec<Vec<Label>>> = (0..self.height)
            .into_par_iter()
            .map(|row| {
                (0..self.width)
                    .map(|col| {
                        let p = self.pixel_center(col, row);
                        iterate_orbit(p, &self.map, &self.classifier).map(|r| r.label)
                    })
                    .collect()
            })
            .collect();
        Ok(rows?.concat())
    }

    pub fn render(&self) -> Result<Vec<u8>> {
        let labels = self.classify()?;
        Ok(encode_ppm(self.width, self.height, &labels))
    }
}

/// `P6` header followed by RGB triples, row-major.
pub fn encode_ppm(width: usize, height: usize, labels: &[Label]) -> Vec<u8> {
    assert_eq!(labels.len(), width * height, "label count must match the image size");
    let header = format!("P6\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + 3 * labels.len());
    out.extend_from_slice(header.as_bytes());
    for &l in labels {
        out.extend_from_slice(&palette(l));
    }
    out
}

/// How many pixels carry each label, in [`Label::ALL`] order.
pub fn label_counts(labels: &[Label]) -> [usize; 4] {
    let mut counts = [0; 4];
    for l in labels {
        counts[Label::ALL.iter().position(|k| k == l).expect("label listed")] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapKind;

    fn job(viewport: Viewport, w: usize, h: usize, map: MapKind) -> RasterJob {
        RasterJob {
            viewport,
            width: w,
            height: h,
            map: GlobalMapConfig::default_for(map).unwrap(),
            classifier: ClassifierConfig::default(),
        }
    }

    #[test]
    fn header_and_size() {
        let bytes = encode_ppm(2, 1, &[Label::Bungee, Label::Escaping]);
        assert_eq!(&bytes[..11], b"P6\n2 1\n255\n");
        assert_eq!(&bytes[11..], &[255, 0, 0, 255, 255, 255]);
    }

    #[test]
    fn pixel_centres_run_top_down() {
        let j = job(Viewport::new(0.0, 4.0, 0.0, 2.0).unwrap(), 4, 2, MapKind::F);
        assert_eq!(j.pixel_center(0, 0), Point::new(0.5, 1.5));
        assert_eq!(j.pixel_center(3, 1), Point::new(3.5, 0.5));
    }

    #[test]
    fn outside_snake_is_uniformly_bounded() {
        let j = job(Viewport::new(2.0, 3.0, 2.0, 3.0).unwrap(), 8, 8, MapKind::F);
        let labels = j.classify().unwrap();
        assert!(labels.iter().all(|&l| l == Label::Bounded));
    }

    #[test]
    fn invalid_jobs_are_rejected() {
        assert!(Viewport::new(1.0, 0.0, 0.0, 1.0).is_err());
        let mut j = job(Viewport::new(0.0, 1.0, 0.0, 1.0).unwrap(), 0, 1, MapKind::F);
        assert!(j.validate().is_err());
        j.width = 20_000;
        j.height = 20_000;
        assert!(j.validate().is_err());
    }
}
