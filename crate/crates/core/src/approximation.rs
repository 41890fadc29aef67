//! Tail cut plus polynomial fitting of series-valued functions on nested
//! square blocks.
//!
//! A section `f(x) = Σ a_j(x) t^j` is measured in the sampled sup norm
//! `sup_x Σ_j |a_j(x)| ‖t^j‖_{(1+1/m)h(|x|)}` on each block. The tail
//! `j ≥ l` is dropped and every kept coefficient is replaced by a
//! holomorphic polynomial fitted by least squares on the sample grid.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridBlock, GridSeriesField};
use crate::level::LevelFunction;
use crate::norm_family::NormFamily;
use crate::series::TruncatedSeries;

pub const DEGREE_CAP: usize = 40;

/// Singular values below this fraction of the largest are discarded in
/// the least-squares fits.
const SVD_CUTOFF: f64 = 1e-13;

/// Concentric squares `X_n = [-n·s, n·s]²` for `n = 1..=ν`, each sampled
/// with the same number of nodes per side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestedBlocks {
    half_widths: Vec<f64>,
    nodes: usize,
}

impl NestedBlocks {
    /// `ν` blocks with half-widths `s, 2s, …, νs`.
    pub fn exhaustion(nu: usize, s: f64, nodes: usize) -> Result<Self> {
        if nu == 0 {
            return Err(Error::usage("need at least one block"));
        }
        Self::new((1..=nu).map(|n| n as f64 * s).collect(), nodes)
    }

    pub fn new(half_widths: Vec<f64>, nodes: usize) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::usage("need at least one block"));
        }
        if half_widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::usage("block half-widths must be positive and finite"));
        }
        if half_widths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::usage("blocks must be strictly increasing"));
        }
        GridBlock::square(half_widths[0], nodes)?;
        Ok(NestedBlocks { half_widths, nodes })
    }

    pub fn len(&self) -> usize {
        self.half_widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_widths.is_empty()
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn block(&self, n: usize) -> GridBlock {
        GridBlock::square(self.half_widths[n], self.nodes).expect("validated on construction")
    }

    /// The largest block `X_ν`, where the section is sampled.
    pub fn outer(&self) -> GridBlock {
        self.block(self.len() - 1)
    }

    /// `X_{ν+1}`: one more step of the same increment (doubling for a
    /// single block).
    pub fn next(&self) -> GridBlock {
        let last = *self.half_widths.last().unwrap();
        let step = match self.half_widths.len() {
            1 => last,
            k => last - self.half_widths[k - 2],
        };
        GridBlock::square(last + step, self.nodes).expect("validated on construction")
    }
}

/// Where the coefficients `a_j(x)` come from.
pub enum Section<'a> {
    /// Closed form, evaluated at the nodes of the outer block.
    Closure(&'a (dyn Fn(Complex64) -> TruncatedSeries + Sync)),
    /// Samples on exactly the outer block's grid.
    Sampled(&'a GridSeriesField),
}

/// `g = Σ_{j<l} P_j(z) t^j` with `P_j(z) = Σ_k c_{jk} (z/scale)^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TPolynomial {
    pub scale: f64,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl TPolynomial {
    /// Number of kept `t`-powers, the tail index `l`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1)).collect()
    }

    pub fn eval_coeff(&self, j: usize, z: Complex64) -> Complex64 {
        horner(&self.coeffs[j], z / self.scale)
    }

    /// `g(z)` truncated at `trunc`; powers beyond `l` are zero.
    pub fn eval(&self, z: Complex64, trunc: usize) -> TruncatedSeries {
        let mut out = vec![Complex64::new(0.0, 0.0); trunc + 1];
        for (j, slot) in out.iter_mut().enumerate().take(self.len()) {
            *slot = self.eval_coeff(j, z);
        }
        TruncatedSeries::new(out)
    }
}

fn horner(c: &[Complex64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockError {
    pub half_width: f64,
    pub nodes: usize,
    /// `sup Σ_{j≥l} |a_j| ‖t^j‖` over the block.
    pub tail: f64,
    /// `sup Σ_{j<l} |P_j − a_j| ‖t^j‖` over the block.
    pub fit: f64,
    /// `sup ‖g − f‖` over the block, evaluated directly.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub epsilon: f64,
    pub m: usize,
    pub l: usize,
    /// `tail_sums[l]` is the sup over the outer block of the tail from `l`.
    pub tail_sums: Vec<f64>,
    pub degrees: Vec<usize>,
    /// Weighted sup error of each coefficient fit.
    pub coefficient_errors: Vec<f64>,
    pub blocks: Vec<BlockError>,
    pub outer_half_width: f64,
    pub outer_finite: bool,
    pub outer_max_norm: f64,
}

impl ApproxReport {
    pub fn passed(&self) -> bool {
        self.outer_finite && self.blocks.iter().all(|b| b.total < self.epsilon)
    }
}

/// Sampled data on the outer block: coefficients and `log ‖t^j‖` at the
/// effective level `(1+1/m)h(|x|)`.
struct Samples {
    points: Vec<Complex64>,
    coeffs: Vec<Vec<Complex64>>,
    log_norms: Vec<Vec<f64>>,
}

fn sample(
    section: &Section<'_>,
    family: &NormFamily,
    level: &LevelFunction,
    m: usize,
    outer: &GridBlock,
) -> Result<Samples> {
    let points = outer.points();
    let coeffs: Vec<Vec<Complex64>> = match section {
        Section::Closure(f) => points.iter().map(|&z| f(z).into_coeffs()).collect(),
        Section::Sampled(field) => {
            if field.block() != outer {
                return Err(Error::BlockMismatch);
            }
            (0..outer.nodes()).map(|i| field.node_series(i).into_coeffs()).collect()
        }
    };
    let trunc = coeffs[0].len() - 1;
    if coeffs.iter().any(|c| c.len() != trunc + 1) {
        return Err(Error::DimensionMismatch {
            expected: trunc + 1,
            got: coeffs.iter().map(Vec::len).find(|&l| l != trunc + 1).unwrap_or(0),
        });
    }
    let factor = 1.0 + 1.0 / m as f64;
    let log_norms = points
        .iter()
        .map(|z| {
            let h = factor * level.eval(z.norm());
            if !family.in_h_range(h) {
                return Err(Error::Domain {
                    family: family.to_string(),
                    h,
                });
            }
            (0..=trunc).map(|j| family.log_norm(h, j)).collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(Samples {
        points,
        coeffs,
        log_norms,
    })
}

/// Weighted least-squares fit of degree `deg`; returns the coefficients in
/// `(z/scale)^k` and the weighted sup error.
fn fit(points: &[Complex64], values: &[Complex64], weights: &[f64], scale: f64, deg: usize) -> (Vec<Complex64>, f64) {
    let rows = points.len();
    let a = DMatrix::from_fn(rows, deg + 1, |i, k| (points[i] / scale).powu(k as u32) * weights[i]);
    let b = DMatrix::from_fn(rows, 1, |i, _| values[i] * weights[i]);
    let svd = a.svd(true, true);
    let cutoff = SVD_CUTOFF * svd.singular_values.max();
    let c = svd.solve(&b, cutoff).expect("both factors were computed");
    let coeffs: Vec<Complex64> = c.iter().copied().collect();
    let err = points
        .iter()
        .zip(values)
        .zip(weights)
        .map(|((&z, &v), &w)| (horner(&coeffs, z / scale) - v).norm() * w)
        .fold(0.0, f64::max);
    (coeffs, err)
}

/// Cuts the tail at the smallest admissible `l`, fits each kept coefficient
/// with degree escalation up to [`DEGREE_CAP`], and measures the result on
/// every block.
pub fn approximate_section(
    section: &Section<'_>,
    family: &NormFamily,
    level: &LevelFunction,
    m: usize,
    epsilon: f64,
    blocks: &NestedBlocks,
) -> Result<(TPolynomial, ApproxReport)> {
    if m == 0 {
        return Err(Error::usage("level index m must be at least 1"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::usage(format!("epsilon must be positive, got {epsilon}")));
    }
    let outer = blocks.outer();
    let s = sample(section, family, level, m, &outer)?;
    let trunc = s.coeffs[0].len() - 1;
    let nodes = s.points.len();

    // Per-node suffix sums are built from the top, so they are
    // nonincreasing in l in floating point too.
    let mut suffix = vec![0.0; nodes];
    let mut tail_sums = vec![0.0; trunc + 2];
    for l in (0..=trunc).rev() {
        for (i, acc) in suffix.iter_mut().enumerate() {
            *acc += s.coeffs[i][l].norm() * s.log_norms[i][l].exp();
        }
        tail_sums[l] = suffix.iter().copied().fold(0.0, f64::max);
    }
    let l = (0..=trunc + 1)
        .find(|&l| tail_sums[l] < epsilon / 2.0)
        .expect("tail past the truncation is zero");

    let scale = outer.max_modulus();
    let budget = if l == 0 { 0.0 } else { epsilon / (2.0 * l as f64) };
    let fits: Vec<(Vec<Complex64>, f64)> = (0..l)
        .into_par_iter()
        .map(|j| {
            let values: Vec<Complex64> = s.coeffs.iter().map(|c| c[j]).collect();
            let weights: Vec<f64> = s.log_norms.iter().map(|ln| ln[j].exp()).collect();
            let mut best = (Vec::new(), f64::INFINITY);
            for deg in 0..=DEGREE_CAP {
                let (c, err) = fit(&s.points, &values, &weights, scale, deg);
                if err < best.1 {
                    best = (c, err);
                }
                if best.1 < budget {
                    return Ok(best);
                }
            }
            Err(Error::Approximation {
                cap: DEGREE_CAP,
                achieved: best.1,
                target: budget,
            })
        })
        .collect::<Result<_>>()?;

    let coefficient_errors: Vec<f64> = fits.iter().map(|f| f.1).collect();
    let g = TPolynomial {
        scale,
        coeffs: fits.into_iter().map(|f| f.0).collect(),
    };

    let per_node: Vec<(f64, f64, f64)> = (0..nodes)
        .map(|i| {
            let z = s.points[i];
            let mut tail = 0.0;
            let mut fit_err = 0.0;
            for j in 0..=trunc {
                let w = s.log_norms[i][j].exp();
                if j < l {
                    fit_err += (g.eval_coeff(j, z) - s.coeffs[i][j]).norm() * w;
                } else {
                    tail += s.coeffs[i][j].norm() * w;
                }
            }
            (tail, fit_err, tail + fit_err)
        })
        .collect();
    let report_blocks = blocks
        .half_widths()
        .iter()
        .map(|&hw| {
            let inside = |z: Complex64| z.re.abs() <= hw * (1.0 + 1e-12) && z.im.abs() <= hw * (1.0 + 1e-12);
            let mut b = BlockError {
                half_width: hw,
                nodes: 0,
                tail: 0.0,
                fit: 0.0,
                total: 0.0,
            };
            for (i, p) in per_node.iter().enumerate() {
                if inside(s.points[i]) {
                    b.nodes += 1;
                    b.tail = b.tail.max(p.0);
                    b.fit = b.fit.max(p.1);
                    b.total = b.total.max(p.2);
                }
            }
            b
        })
        .collect();

    let next = blocks.next();
    let outer_values: Vec<f64> = next
        .points()
        .iter()
        .flat_map(|&z| (0..g.len()).map(move |j| (j, z)))
        .map(|(j, z)| g.eval_coeff(j, z).norm())
        .collect();
    let report = ApproxReport {
        epsilon,
        m,
        l,
        tail_sums,
        degrees: g.degrees(),
        coefficient_errors,
        blocks: report_blocks,
        outer_half_width: next.b,
        outer_finite: outer_values.iter().all(|v| v.is_finite()),
        outer_max_norm: outer_values.iter().copied().fold(0.0, f64::max),
    };
    Ok((g, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn nested_blocks_validate_and_extend() {
        let b = NestedBlocks::exhaustion(3, 0.5, 16).unwrap();
        assert_eq!(b.half_widths(), &[0.5, 1.0, 1.5]);
        assert_eq!(b.next().b, 2.0);
        assert!(b.outer().contains_block(&b.block(0)));
        assert!(NestedBlocks::new(vec![1.0, 1.0], 16).is_err());
        assert!(NestedBlocks::new(vec![1.0], 4).is_err());
        assert_eq!(NestedBlocks::new(vec![1.0], 16).unwrap().next().b, 2.0);
    }

    #[test]
    fn polynomial_section_is_reproduced() {
        let f = |z: Complex64| TruncatedSeries::new(vec![z * z - 1.0, c(0.5) * z]);
        let blocks = NestedBlocks::exhaustion(2, 0.5, 16).unwrap();
        let fam = NormFamily::factorial();
        let level = LevelFunction::constant(0.5).unwrap();
        let (g, rep) = approximate_section(&Section::Closure(&f), &fam, &level, 1, 1e-10, &blocks).unwrap();
        assert_eq!(rep.l, 2);
        assert!(rep.passed());
        assert!(rep.blocks.iter().all(|b| b.total < 1e-12), "{:?}", rep.blocks);
        let z = Complex64::new(0.3, -0.7);
        assert!((g.eval_coeff(0, z) - (z * z - 1.0)).norm() < 1e-12);
    }

    #[test]
    fn tail_cut_matches_explicit_sum() {
        // Effective level (1 + 1/m)·h = 0.5 with m = 1, so ‖t^j‖ = 0.5^j / j!.
        let f = |_: Complex64| TruncatedSeries::new((0..30).map(|j| c(0.5f64.powi(j))).collect());
        let blocks = NestedBlocks::exhaustion(1, 1.0, 8).unwrap();
        let fam = NormFamily::factorial();
        let level = LevelFunction::constant(0.25).unwrap();
        let (_, rep) = approximate_section(&Section::Closure(&f), &fam, &level, 1, 0.01, &blocks).unwrap();
        let mut fact = 1.0;
        let terms: Vec<f64> = (0..30)
            .map(|j| {
                if j > 0 {
                    fact *= j as f64;
                }
                0.25f64.powi(j) / fact
            })
            .collect();
        let oracle = (0..=30).find(|&l| terms[l..].iter().sum::<f64>() < 0.005).unwrap();
        assert_eq!(oracle, 3);
        assert_eq!(rep.l, oracle);
        assert!(rep.tail_sums.windows(2).all(|w| w[1] <= w[0]));
        assert!(rep.passed());
    }

    #[test]
    fn exponential_fits_below_taylor_bound() {
        let f = |z: Complex64| TruncatedSeries::new(vec![z.exp(), c(0.0)]);
        let blocks = NestedBlocks::exhaustion(1, 1.0, 32).unwrap();
        let fam = NormFamily::factorial();
        let level = LevelFunction::exp_decay().scaled(0.5).unwrap();
        let (g, rep) = approximate_section(&Section::Closure(&f), &fam, &level, 1, 2e-6, &blocks).unwrap();
        assert_eq!(rep.l, 1);
        // Taylor remainder of e^z at degree 10 on |z| ≤ √2.
        let r = 2f64.sqrt();
        let taylor: f64 = (11..40)
            .map(|k| r.powi(k) / (1..=k).map(|i| i as f64).product::<f64>())
            .sum();
        assert!(taylor * r.exp() < 1e-4);
        assert!(rep.degrees[0] <= 12, "{:?}", rep.degrees);
        assert!(rep.passed());
        assert!(rep.outer_finite);
        assert!((g.eval(Complex64::new(0.2, 0.1), 1).coeff(0) - Complex64::new(0.2, 0.1).exp()).norm() < 1e-5);
    }

    #[test]
    fn degree_cap_reports_achieved_error() {
        // |z|² is not holomorphic, so no polynomial in z gets close.
        let f = |z: Complex64| TruncatedSeries::new(vec![c(z.norm_sqr())]);
        let blocks = NestedBlocks::exhaustion(1, 1.0, 12).unwrap();
        let fam = NormFamily::factorial();
        let level = LevelFunction::constant(0.5).unwrap();
        match approximate_section(&Section::Closure(&f), &fam, &level, 1, 1e-3, &blocks) {
            Err(Error::Approximation { cap, achieved, target }) => {
                assert_eq!(cap, DEGREE_CAP);
                assert!(achieved > target);
            }
            other => panic!("expected approximation failure, got {other:?}"),
        }
    }

    #[test]
    fn sampled_section_needs_matching_block() {
        let blocks = NestedBlocks::exhaustion(1, 1.0, 8).unwrap();
        let field = GridSeriesField::from_component(GridBlock::square(2.0, 8).unwrap(), 1, 0, |z| z).unwrap();
        let fam = NormFamily::factorial();
        let level = LevelFunction::constant(0.5).unwrap();
        assert!(matches!(
            approximate_section(&Section::Sampled(&field), &fam, &level, 1, 1e-3, &blocks),
            Err(Error::BlockMismatch)
        ));
    }
}
