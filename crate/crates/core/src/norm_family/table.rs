use std::fs;
use std::path::Path;

use super::LogNormJet;
use crate::error::{Error, Result};

/// Norms `‖t^j‖_h` listed at finitely many levels.
///
/// File layout: a `level <h>` line opens a block, followed by two-column
/// `j value` rows. `#` starts a comment. Every block must list the same
/// indices `0..=J`. Between listed levels, `log ‖t^j‖` is interpolated
/// linearly in `log h`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTable {
    levels: Vec<f64>,
    // log_norms[level][j]
    log_norms: Vec<Vec<f64>>,
}

impl NormTable {
    pub fn new(mut rows: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::usage("a norm table needs at least two levels"));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let width = rows[0].1.len();
        if width == 0 {
            return Err(Error::usage("a norm table needs at least one index"));
        }
        let mut levels = Vec::with_capacity(rows.len());
        let mut log_norms = Vec::with_capacity(rows.len());
        for (h, norms) in rows {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::usage(format!("table level {h} must be positive")));
            }
            if levels.last() == Some(&h) {
                return Err(Error::usage(format!("table level {h} listed twice")));
            }
            if norms.len() != width {
                return Err(Error::usage(format!(
                    "table level {h} lists {} indices, expected {width}",
                    norms.len()
                )));
            }
            if let Some(bad) = norms.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::usage(format!("table norm {bad} at level {h} must be positive")));
            }
            levels.push(h);
            log_norms.push(norms.iter().map(|v| v.ln()).collect());
        }
        Ok(NormTable { levels, log_norms })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap();
            if first == "level" {
                let h: f64 = parts
                    .next()
                    .ok_or_else(|| Error::parse(line_no, "missing level value"))?
                    .parse()
                    .map_err(|_| Error::parse(line_no, "bad level value"))?;
                rows.push((h, Vec::new()));
                continue;
            }
            let j: usize = first
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad index `{first}`")))?;
            let value: f64 = parts
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing norm value"))?
                .parse()
                .map_err(|_| Error::parse(line_no, "bad norm value"))?;
            if parts.next().is_some() {
                return Err(Error::parse(line_no, "expected two columns"));
            }
            let block = rows
                .last_mut()
                .ok_or_else(|| Error::parse(line_no, "row before any `level` line"))?;
            if j != block.1.len() {
                return Err(Error::parse(
                    line_no,
                    format!("expected index {}, got {j}", block.1.len()),
                ));
            }
            block.1.push(value);
        }
        Self::new(rows)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn min_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn max_level(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    pub fn max_index(&self) -> usize {
        self.log_norms[0].len() - 1
    }

    pub fn contains(&self, h: f64) -> bool {
        h >= self.min_level() && h <= self.max_level()
    }

    fn segment(&self, h: f64) -> usize {
        match self.levels.partition_point(|&l| l <= h) {
            0 => 0,
            n if n >= self.levels.len() => self.levels.len() - 2,
            n => n - 1,
        }
    }

    /// Slope of `log ‖t^j‖` against `log h` on a segment.
    fn slope(&self, seg: usize, j: usize) -> f64 {
        let (h0, h1) = (self.levels[seg], self.levels[seg + 1]);
        (self.log_norms[seg + 1][j] - self.log_norms[seg][j]) / (h1.ln() - h0.ln())
    }

    pub(crate) fn log_norm(&self, h: f64, j: usize) -> f64 {
        let seg = self.segment(h);
        let v0 = self.log_norms[seg][j];
        v0 + self.slope(seg, j) * (h / self.levels[seg]).ln()
    }

    /// `log ‖t^j‖_to − log ‖t^j‖_from`, summed segment by segment so that
    /// nearby levels do not cancel.
    fn log_diff(&self, from: f64, to: f64, j: usize) -> f64 {
        let (lo, hi, sign) = if to >= from { (from, to, 1.0) } else { (to, from, -1.0) };
        let mut x = lo;
        let mut acc = 0.0;
        while x < hi {
            let seg = self.segment(x);
            let end = if seg + 2 == self.levels.len() {
                hi
            } else {
                hi.min(self.levels[seg + 1])
            };
            acc += self.slope(seg, j) * ((end - x) / x).ln_1p();
            x = end;
        }
        sign * acc
    }

    /// Central differences with step `1e-4·h`; `None` when the stencil
    /// leaves the table.
    pub(crate) fn jet(&self, h: f64, j: usize) -> Option<LogNormJet> {
        let step = 1e-4 * h;
        if h - step < self.min_level() || h + step > self.max_level() {
            return None;
        }
        let up = self.log_diff(h, h + step, j);
        let down = self.log_diff(h, h - step, j);
        Some(LogNormJet {
            value: self.log_norm(h, j),
            d1: (up - down) / (2.0 * step),
            d2: (up + down) / (step * step),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# factorial at two levels
level 0.5
0 1
1 0.5
2 0.125
level 0.25
0 1
1 0.25
2 0.03125
";

    #[test]
    fn parses_and_interpolates() {
        let t = NormTable::parse(SAMPLE).unwrap();
        assert_eq!(t.levels(), &[0.25, 0.5]);
        assert_eq!(t.max_index(), 2);
        // h^j/j! is linear in log h for fixed j, so interpolation is exact
        let h = 0.35f64;
        assert!((t.log_norm(h, 2) - (h * h / 2.0).ln()).abs() < 1e-12);
        let jet = t.jet(h, 1).unwrap();
        assert!((jet.d1 - 1.0 / h).abs() < 1e-6);
    }

    #[test]
    fn rejects_malformed() {
        assert!(NormTable::parse("0 1\n").is_err());
        assert!(NormTable::parse("level 0.5\n0 1\n2 0.5\n").is_err());
        assert!(NormTable::parse("level 0.5\n0 1 3\n").is_err());
        assert!(NormTable::parse("level 0.5\n0 1\n").is_err());
        assert!(NormTable::parse("level 0.5\n0 1\nlevel 0.6\n0 -1\n").is_err());
        assert!(NormTable::parse("level 0.5\n0 1\n1 0.5\nlevel 0.6\n0 1\n").is_err());
    }

    #[test]
    fn jet_on_a_segment_is_log_linear() {
        // ℓ = a + s·log h gives -ℓ'' - ℓ'/h = 0; no cancellation noise
        let t = NormTable::new(vec![
            (0.25, vec![1.0, 0.1]),
            (0.5, vec![1.0, 0.15]),
            (1.0, vec![1.0, 0.9]),
        ])
        .unwrap();
        for h in [0.253125, 0.3, 0.45, 0.7] {
            let jet = t.jet(h, 1).unwrap();
            let slack = (-jet.d2 - jet.d1 / h) / (1.0 + jet.d2.abs() + jet.d1.abs() / h);
            assert!(slack.abs() < 1e-8, "h={h}: {slack}");
        }
    }

    #[test]
    fn jet_outside_is_none() {
        let t = NormTable::parse(SAMPLE).unwrap();
        assert!(t.jet(0.25, 1).is_none());
        assert!(t.jet(0.5, 1).is_none());
    }
}
