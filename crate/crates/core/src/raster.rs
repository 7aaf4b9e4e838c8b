//! Row-major rasters: single-channel float maps, RGB images and binary masks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Raster {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Raster { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), rows * cols, "raster data length");
        Raster { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    /// Row-major index of the first maximum.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f32)> = None;
        for (i, &v) in self.data.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| (i / self.cols, i % self.cols))
    }

    pub fn scale(&self, s: f32) -> Raster {
        Raster { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }
}

/// RGB image, interleaved `rows x cols x 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(rows: usize, cols: usize) -> Self {
        Image { rows, cols, data: vec![0.0; rows * cols * 3] }
    }

    pub fn get(&self, r: usize, c: usize) -> [f32; 3] {
        let i = (r * self.cols + c) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, r: usize, c: usize, v: [f32; 3]) {
        let i = (r * self.cols + c) * 3;
        self.data[i..i + 3].copy_from_slice(&v);
    }

    /// Planar `3 x rows x cols` copy, the layout the network consumes.
    pub fn to_chw(&self) -> Vec<f32> {
        let n = self.rows * self.cols;
        let mut out = vec![0.0; 3 * n];
        for p in 0..n {
            for ch in 0..3 {
                out[ch * n + p] = self.data[p * 3 + ch];
            }
        }
        out
    }

    pub fn crop(&self, top: usize, left: usize, rows: usize, cols: usize) -> Image {
        let mut out = Image::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(top + r, left + c));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize) -> Self {
        Mask { rows, cols, data: vec![false; rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r * self.cols + c] = v;
    }

    /// Bounds-checked read with signed coordinates; outside reads false.
    pub fn at(&self, r: isize, c: isize) -> bool {
        r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols && self.get(r as usize, c as usize)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn pixels(&self) -> Vec<(usize, usize)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / self.cols, i % self.cols))
            .collect()
    }

    pub fn to_raster(&self) -> Raster {
        Raster::from_vec(self.rows, self.cols, self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }
}
