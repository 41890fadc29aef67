//! Rectangular blocks in ℂ and series-valued fields sampled on them.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{parse_pairs, TruncatedSeries};

pub const MIN_MESH: usize = 8;

/// `[a, b] × [c, d]` with `n` equally spaced nodes per side, corners
/// included. Node `(ix, iy)` has flat index `iy·n + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridBlock {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub n: usize,
}

impl GridBlock {
    pub fn new(a: f64, b: f64, c: f64, d: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::usage("block bounds must be finite"));
        }
        if b <= a || d <= c {
            return Err(Error::usage(format!(
                "block needs a < b and c < d, got [{a}, {b}] x [{c}, {d}]"
            )));
        }
        if n < MIN_MESH {
            return Err(Error::usage(format!(
                "mesh needs at least {MIN_MESH} nodes per side, got {n}"
            )));
        }
        Ok(GridBlock { a, b, c, d, n })
    }

    /// The square `[-s, s]²`.
    pub fn square(s: f64, n: usize) -> Result<Self> {
        Self::new(-s, s, -s, s, n)
    }

    pub fn nodes(&self) -> usize {
        self.n * self.n
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.d - self.c) / (self.n - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.a + ix as f64 * self.dx(), self.c + iy as f64 * self.dy())
    }

    pub fn point_at(&self, idx: usize) -> Complex64 {
        self.point(idx % self.n, idx / self.n)
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.nodes()).map(|i| self.point_at(i)).collect()
    }

    /// `sup |z|²` over the block, attained at a corner.
    pub fn max_modulus_sqr(&self) -> f64 {
        [self.a, self.b]
            .iter()
            .flat_map(|&x| [self.c, self.d].map(|y| x * x + y * y))
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.max_modulus_sqr().sqrt()
    }

    /// `sup (1 + |z|²)²`, the constant bounding the weight `(1 + |z|²)^{-2}`
    /// from below.
    pub fn weight_constant(&self) -> f64 {
        (1.0 + self.max_modulus_sqr()).powi(2)
    }

    pub fn contains_block(&self, other: &GridBlock) -> bool {
        self.a <= other.a && self.b >= other.b && self.c <= other.c && self.d >= other.d
    }
}

/// One truncated series per node, stored node-major and coefficient-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeriesField {
    block: GridBlock,
    trunc: usize,
    data: Vec<Complex64>,
}

impl GridSeriesField {
    pub fn zeros(block: GridBlock, trunc: usize) -> Self {
        GridSeriesField {
            block,
            trunc,
            data: vec![Complex64::new(0.0, 0.0); block.nodes() * (trunc + 1)],
        }
    }

    /// `f(z)` gives the coefficients at node `z`; missing trailing entries
    /// are zero and extra ones are rejected.
    pub fn from_fn<F>(block: GridBlock, trunc: usize, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Vec<Complex64>,
    {
        let mut field = Self::zeros(block, trunc);
        for idx in 0..block.nodes() {
            let coeffs = f(block.point_at(idx));
            if coeffs.len() > trunc + 1 {
                return Err(Error::DimensionMismatch {
                    expected: trunc + 1,
                    got: coeffs.len(),
                });
            }
            field.data[idx * (trunc + 1)..idx * (trunc + 1) + coeffs.len()].copy_from_slice(&coeffs);
        }
        Ok(field)
    }

    /// Zero field except component `j`, set from `f`.
    pub fn from_component<F>(block: GridBlock, trunc: usize, j: usize, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        if j > trunc {
            return Err(Error::Cap { index: j, cap: trunc });
        }
        let mut field = Self::zeros(block, trunc);
        let values: Vec<Complex64> = block.points().into_iter().map(f).collect();
        field.set_component(j, &values)?;
        Ok(field)
    }

    pub fn from_data(block: GridBlock, trunc: usize, data: Vec<Complex64>) -> Result<Self> {
        let expected = block.nodes() * (trunc + 1);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(GridSeriesField { block, trunc, data })
    }

    pub fn block(&self) -> &GridBlock {
        &self.block
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, node: usize, j: usize) -> Complex64 {
        self.data[node * (self.trunc + 1) + j]
    }

    pub fn node_series(&self, node: usize) -> TruncatedSeries {
        let w = self.trunc + 1;
        TruncatedSeries::new(self.data[node * w..(node + 1) * w].to_vec())
    }

    pub fn component(&self, j: usize) -> Vec<Complex64> {
        let w = self.trunc + 1;
        (0..self.block.nodes()).map(|i| self.data[i * w + j]).collect()
    }

    pub fn set_component(&mut self, j: usize, values: &[Complex64]) -> Result<()> {
        if j > self.trunc {
            return Err(Error::Cap {
                index: j,
                cap: self.trunc,
            });
        }
        if values.len() != self.block.nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.block.nodes(),
                got: values.len(),
            });
        }
        let w = self.trunc + 1;
        for (i, v) in values.iter().enumerate() {
            self.data[i * w + j] = *v;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.block == other.block && self.trunc == other.trunc
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::BlockMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(GridSeriesField {
            block: self.block,
            trunc: self.trunc,
            data,
        })
    }

    /// One `re im` pair per line, node-major and coefficient-minor.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.data {
            let _ = writeln!(out, "{:e} {:e}", c.re, c.im);
        }
        out
    }

    pub fn from_text(text: &str, block: GridBlock, trunc: usize) -> Result<Self> {
        Self::from_data(block, trunc, parse_pairs(text)?)
    }

    /// Raw little-endian `f64` pairs in the text layout's order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 16);
        for c in &self.data {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], block: GridBlock, trunc: usize) -> Result<Self> {
        if !bytes.len().is_multiple_of(16) {
            return Err(Error::parse(
                0,
                format!("binary field length {} is not a multiple of 16", bytes.len()),
            ));
        }
        let data = bytes
            .chunks_exact(16)
            .map(|chunk| {
                let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::from_data(block, trunc, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_geometry() {
        let q = GridBlock::square(1.0, 9).unwrap();
        assert_eq!(q.dx(), 0.25);
        assert_eq!(q.point(0, 0), Complex64::new(-1.0, -1.0));
        assert_eq!(q.point_at(q.index(8, 4)), Complex64::new(1.0, 0.0));
        assert_eq!(q.weight_constant(), 9.0);
        assert!(GridBlock::new(1.0, 0.0, 0.0, 1.0, 8).is_err());
        assert!(GridBlock::square(1.0, 7).is_err());
    }

    #[test]
    fn field_io_round_trip() {
        let q = GridBlock::square(1.0, 8).unwrap();
        let f = GridSeriesField::from_fn(q, 2, |z| vec![z, z.conj() * 0.5]).unwrap();
        assert_eq!(f.get(3, 2), Complex64::new(0.0, 0.0));
        let text = GridSeriesField::from_text(&f.to_text(), q, 2).unwrap();
        assert_eq!(text, f);
        let bin = GridSeriesField::from_bytes(&f.to_bytes(), q, 2).unwrap();
        assert_eq!(bin, f);
        assert!(GridSeriesField::from_text(&f.to_text(), q, 1).is_err());
    }

    #[test]
    fn components() {
        let q = GridBlock::square(1.0, 8).unwrap();
        let f = GridSeriesField::from_component(q, 3, 1, |z| z).unwrap();
        assert_eq!(f.component(1), q.points());
        assert!(f.component(0).iter().all(|c| c.norm() == 0.0));
        assert_eq!(f.node_series(5).coeff(1), q.point_at(5));
    }
}
