//! Stalk-level series in base variables `x_1..x_n` and `t`: ρ-norms,
//! coordinate changes, t-regularization and Weierstrass division.
//!
//! A [`PolySeries`] is a dense array over the quotient ring
//! `ℂ[x_1..x_n, t] / (x_1^{D+1}, …, x_n^{D+1}, t^{J+1})`. Products are exact
//! in that ring, which makes the division iteration terminate: the remainder
//! operator raises the x-degree by at least one per step.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm_family::NormFamily;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_MAGNITUDE: f64 = 0.1;
const MAX_SHRINKS: usize = 20;
/// Coefficients below this fraction of the largest one count as zero when
/// reading off a t-order.
const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PolySeries {
    n: usize,
    x_cap: usize,
    t_cap: usize,
    // flat index: (Σ_k α_k (D+1)^k)·(J+1) + i
    coeffs: Vec<Complex64>,
}

impl PolySeries {
    pub fn zeros(n: usize, x_cap: usize, t_cap: usize) -> Self {
        let len = (x_cap + 1).pow(n as u32) * (t_cap + 1);
        PolySeries {
            n,
            x_cap,
            t_cap,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Builds from `(α, i, a_{α,i})` triples; repeated entries are summed.
    pub fn from_terms(n: usize, x_cap: usize, t_cap: usize, terms: &[(Vec<usize>, usize, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(n, x_cap, t_cap);
        for (alpha, i, a) in terms {
            let idx = f.index(alpha, *i)?;
            f.coeffs[idx] += a;
        }
        Ok(f)
    }

    /// `c·x^α t^i`.
    pub fn monomial(n: usize, x_cap: usize, t_cap: usize, alpha: &[usize], i: usize, c: Complex64) -> Result<Self> {
        Self::from_terms(n, x_cap, t_cap, &[(alpha.to_vec(), i, c)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_cap(&self) -> usize {
        self.x_cap
    }

    pub fn t_cap(&self) -> usize {
        self.t_cap
    }

    fn x_blocks(&self) -> usize {
        self.coeffs.len() / (self.t_cap + 1)
    }

    fn x_index(&self, alpha: &[usize]) -> Result<usize> {
        if alpha.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: alpha.len(),
            });
        }
        let mut idx = 0;
        for &a in alpha.iter().rev() {
            if a > self.x_cap {
                return Err(Error::Cap {
                    index: a,
                    cap: self.x_cap,
                });
            }
            idx = idx * (self.x_cap + 1) + a;
        }
        Ok(idx)
    }

    fn index(&self, alpha: &[usize], i: usize) -> Result<usize> {
        if i > self.t_cap {
            return Err(Error::Cap {
                index: i,
                cap: self.t_cap,
            });
        }
        Ok(self.x_index(alpha)? * (self.t_cap + 1) + i)
    }

    fn alpha_of(&self, mut x: usize) -> Vec<usize> {
        let base = self.x_cap + 1;
        (0..self.n)
            .map(|_| {
                let a = x % base;
                x /= base;
                a
            })
            .collect()
    }

    pub fn coeff(&self, alpha: &[usize], i: usize) -> Complex64 {
        self.index(alpha, i).map(|idx| self.coeffs[idx]).unwrap_or_default()
    }

    /// Nonzero terms as `(α, i, a_{α,i})`, x-major then t.
    pub fn terms(&self) -> Vec<(Vec<usize>, usize, Complex64)> {
        let width = self.t_cap + 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(idx, a)| (self.alpha_of(idx / width), idx % width, *a))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|a| *a == Complex64::new(0.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Copies into new caps, dropping terms that no longer fit.
    pub fn with_caps(&self, x_cap: usize, t_cap: usize) -> Self {
        let mut out = Self::zeros(self.n, x_cap, t_cap);
        for (alpha, i, a) in self.terms() {
            if let Ok(idx) = out.index(&alpha, i) {
                out.coeffs[idx] = a;
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.x_cap != other.x_cap || self.t_cap != other.t_cap {
            return Err(Error::usage(format!(
                "series caps differ: (D, J) = ({}, {}) vs ({}, {})",
                self.x_cap, self.t_cap, other.x_cap, other.t_cap
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    /// Product in the quotient ring.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let width = self.t_cap + 1;
        let lhs = self.sparse();
        let rhs = other.sparse();
        let mut out = Self::zeros(self.n, self.x_cap, self.t_cap);
        for (xa, ia, alpha_a, a) in &lhs {
            for (xb, ib, alpha_b, b) in &rhs {
                if ia + ib > self.t_cap || alpha_a.iter().zip(alpha_b).any(|(p, q)| p + q > self.x_cap) {
                    continue;
                }
                out.coeffs[(xa + xb) * width + ia + ib] += a * b;
            }
        }
        Ok(out)
    }

    fn sparse(&self) -> Vec<(usize, usize, Vec<usize>, Complex64)> {
        let width = self.t_cap + 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(idx, a)| (idx / width, idx % width, self.alpha_of(idx / width), *a))
            .collect()
    }

    /// Inverse of a series with nonzero constant term, by the Neumann series
    /// of its nilpotent remainder.
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == Complex64::new(0.0, 0.0) {
            return Err(Error::NonUnit);
        }
        let inv_c0 = c0.inv();
        let mut q = self.scale(-inv_c0);
        q.coeffs[0] = Complex64::new(0.0, 0.0);
        let one = Self::constant(self.n, self.x_cap, self.t_cap, Complex64::new(1.0, 0.0));
        let mut sum = one.clone();
        let mut term = one;
        // nilpotency index of the maximal ideal
        for _ in 0..=(self.n * self.x_cap + self.t_cap) {
            term = term.multiply(&q)?;
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term)?;
        }
        Ok(sum.scale(inv_c0))
    }

    pub fn constant(n: usize, x_cap: usize, t_cap: usize, c: Complex64) -> Self {
        let mut f = Self::zeros(n, x_cap, t_cap);
        f.coeffs[0] = c;
        f
    }

    /// `Σ |a_{α,i}| ρ^α ‖t^i‖_h`.
    pub fn rho_norm(&self, rho: &[f64], family: &NormFamily, h: f64) -> Result<f64> {
        if rho.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rho.len(),
            });
        }
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::usage(format!("radius {bad} must be positive")));
        }
        let t_norms = (0..=self.t_cap)
            .map(|i| family.eval_norm(h, i))
            .collect::<Result<Vec<_>>>()?;
        let width = self.t_cap + 1;
        let mut total = 0.0;
        for x in 0..self.x_blocks() {
            let row = &self.coeffs[x * width..(x + 1) * width];
            if row.iter().all(|a| *a == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let weight: f64 = self
                .alpha_of(x)
                .iter()
                .zip(rho)
                .map(|(&a, r)| r.powi(a as i32))
                .product();
            let row_norm: f64 = row.iter().zip(&t_norms).map(|(a, w)| a.norm() * w).sum();
            total += weight * row_norm;
        }
        Ok(total)
    }

    /// Smallest `i` with `a_{0,i} ≠ 0`, i.e. the order of `f(0, t)`.
    pub fn t_order(&self) -> Option<usize> {
        let floor = ORDER_TOL * self.max_abs();
        (0..=self.t_cap).find(|&i| self.coeffs[i].norm() > floor)
    }

    /// `(f̂, f̃)` with `f = f̂ + f̃·t^b`; `f̃` keeps the caps of `f`.
    pub fn split_at(&self, b: usize) -> Result<(Self, Self)> {
        if b > self.t_cap {
            return Err(Error::Cap {
                index: b,
                cap: self.t_cap,
            });
        }
        let width = self.t_cap + 1;
        let mut hat = Self::zeros(self.n, self.x_cap, self.t_cap);
        let mut tilde = Self::zeros(self.n, self.x_cap, self.t_cap);
        for x in 0..self.x_blocks() {
            for i in 0..width {
                let a = self.coeffs[x * width + i];
                if i < b {
                    hat.coeffs[x * width + i] = a;
                } else {
                    tilde.coeffs[x * width + i - b] = a;
                }
            }
        }
        Ok((hat, tilde))
    }

    /// Multiplies by `t^b`, dropping overflow.
    pub fn shift_t(&self, b: usize) -> Self {
        let width = self.t_cap + 1;
        let mut out = Self::zeros(self.n, self.x_cap, self.t_cap);
        for x in 0..self.x_blocks() {
            for i in 0..width.saturating_sub(b) {
                out.coeffs[x * width + i + b] = self.coeffs[x * width + i];
            }
        }
        out
    }

    /// Lines `α_1 … α_n i re im` for the nonzero terms.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (alpha, i, a) in self.terms() {
            for k in alpha {
                let _ = write!(out, "{k} ");
            }
            let _ = writeln!(out, "{i} {:e} {:e}", a.re, a.im);
        }
        out
    }

    /// Parses the text layout; `n` comes from the column count and the caps
    /// from the largest listed degrees unless given.
    pub fn from_text(text: &str, caps: Option<(usize, usize)>) -> Result<Self> {
        let mut n = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 3 {
                return Err(Error::parse(idx + 1, "expected `α_1 … α_n i re im`"));
            }
            let this_n = cols.len() - 3;
            if *n.get_or_insert(this_n) != this_n {
                return Err(Error::parse(idx + 1, "inconsistent number of x-exponents"));
            }
            let degrees = cols[..this_n + 1]
                .iter()
                .map(|c| c.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(idx + 1, "bad exponent"))?;
            let re: f64 = cols[this_n + 1]
                .parse()
                .map_err(|_| Error::parse(idx + 1, "bad real part"))?;
            let im: f64 = cols[this_n + 2]
                .parse()
                .map_err(|_| Error::parse(idx + 1, "bad imaginary part"))?;
            terms.push((degrees[..this_n].to_vec(), degrees[this_n], Complex64::new(re, im)));
        }
        let n = n.ok_or_else(|| Error::parse(0, "empty series file"))?;
        let (x_cap, t_cap) = caps.unwrap_or_else(|| {
            let d = terms.iter().flat_map(|(a, _, _)| a.iter().copied()).max().unwrap_or(0);
            let j = terms.iter().map(|(_, i, _)| *i).max().unwrap_or(0);
            (d, j)
        });
        Self::from_terms(n, x_cap, t_cap, &terms)
    }
}

/// Result of [`coordinate_change`]: the substituted series and the number
/// of nonzero terms dropped for exceeding the t-cap.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChange {
    pub series: PolySeries,
    pub overflow: usize,
}

/// Re-expresses `f` in `w_k = x_k + c_k t` by substituting
/// `x_k = w_k − c_k t`, one variable at a time. The x-degree never grows;
/// t-degrees beyond the cap are dropped and counted.
pub fn coordinate_change(f: &PolySeries, c: &[Complex64]) -> Result<CoordinateChange> {
    if c.len() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: c.len(),
        });
    }
    let mut current = f.clone();
    let mut overflow = 0;
    for (k, &ck) in c.iter().enumerate() {
        if ck == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut next = PolySeries::zeros(f.n, f.x_cap, f.t_cap);
        let mut spill = std::collections::BTreeSet::new();
        for (alpha, i, a) in current.terms() {
            let p = alpha[k];
            // x^p = Σ_q C(p,q) w^{p-q} (-c t)^q
            let mut binom = 1.0;
            let mut power = Complex64::new(1.0, 0.0);
            for q in 0..=p {
                if q > 0 {
                    binom = binom * (p - q + 1) as f64 / q as f64;
                    power *= -ck;
                }
                let mut beta = alpha.clone();
                beta[k] = p - q;
                if i + q > f.t_cap {
                    spill.insert((beta, i + q));
                    continue;
                }
                let idx = next.index(&beta, i + q)?;
                next.coeffs[idx] += a * power * binom;
            }
        }
        overflow += spill.len();
        current = next;
    }
    Ok(CoordinateChange {
        series: current,
        overflow,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regularization {
    pub c: Vec<Complex64>,
    pub order: usize,
    pub series: PolySeries,
    /// Magnitudes tried, in order; empty when `f` was already t-regular.
    pub tried: Vec<f64>,
}

/// Finds a coordinate change making `f` t-regular.
///
/// Returns `c = 0` when `f(0, t)` already has finite order. Otherwise draws
/// `c` with `|c_k| = magnitude` and uniform phases from a seeded stream,
/// halving the magnitude after each failure. The t-cap is widened by
/// `n·D` so the substitution drops nothing.
pub fn t_regularize(f: &PolySeries, trials: usize, magnitude: f64, seed: u64) -> Result<Regularization> {
    if f.is_zero() {
        return Err(Error::precondition("cannot regularize the zero series"));
    }
    if let Some(order) = f.t_order() {
        return Ok(Regularization {
            c: vec![Complex64::new(0.0, 0.0); f.n],
            order,
            series: f.clone(),
            tried: Vec::new(),
        });
    }
    let widened = f.with_caps(f.x_cap, f.t_cap + f.n * f.x_cap);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mag = magnitude;
    let mut tried = Vec::new();
    for _ in 0..trials {
        tried.push(mag);
        let c: Vec<Complex64> = (0..f.n)
            .map(|_| Complex64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let changed = coordinate_change(&widened, &c)?;
        if let Some(order) = changed.series.t_order() {
            return Ok(Regularization {
                c,
                order,
                series: changed.series,
                tried,
            });
        }
        mag *= 0.5;
    }
    Err(Error::Regularization { tried })
}

/// The split `f = f̂ + f̃·t^b` with its norm certificates at levels `k < h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatTildeSplit {
    pub hat: PolySeries,
    pub tilde: PolySeries,
    pub estimate: SplitEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitEstimate {
    /// `‖f‖_{ρ,h} − ‖f̂‖_{ρ,h}`, never negative.
    pub hat_slack: f64,
    /// `max_{b≤i≤J} ‖t^{i−b}‖_k / ‖t^i‖_h`.
    pub tilde_constant: f64,
    /// `C·‖f‖_{ρ,h} − ‖f̃‖_{ρ,k}`, never negative.
    pub tilde_slack: f64,
    /// `‖f‖_{ρ,k}/‖t^b‖_k − ‖f̃‖_{ρ,k}`. Not a valid bound in general:
    /// `f = t^{b+1}` with factorial norms makes it negative for `b ≥ 1`.
    pub same_level_slack: f64,
}

/// `max_{b≤i≤J} ‖t^{i−b}‖_k / ‖t^i‖_h`.
pub fn tilde_constant(family: &NormFamily, b: usize, t_cap: usize, k: f64, h: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for i in b..=t_cap {
        best = best.max(family.log_norm(k, i - b)? - family.log_norm(h, i)?);
    }
    Ok(best.exp())
}

pub fn hat_tilde_split(
    f: &PolySeries,
    b: usize,
    family: &NormFamily,
    rho: &[f64],
    k: f64,
    h: f64,
) -> Result<HatTildeSplit> {
    if k > h {
        return Err(Error::Ordering {
            lower_name: "k",
            upper_name: "h",
            lower: k,
            upper: h,
        });
    }
    let (hat, tilde) = f.split_at(b)?;
    let f_h = f.rho_norm(rho, family, h)?;
    let f_k = f.rho_norm(rho, family, k)?;
    let hat_h = hat.rho_norm(rho, family, h)?;
    let tilde_k = tilde.rho_norm(rho, family, k)?;
    let constant = tilde_constant(family, b, f.t_cap, k, h)?;
    Ok(HatTildeSplit {
        hat,
        tilde,
        estimate: SplitEstimate {
            hat_slack: f_h - hat_h,
            tilde_constant: constant,
            tilde_slack: constant * f_h - tilde_k,
            same_level_slack: f_k / family.eval_norm(k, b)? - tilde_k,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionResult {
    pub q: PolySeries,
    pub r: PolySeries,
    /// `‖f − q·g − r‖_ρ` at the final radii.
    pub residual: f64,
    /// Largest observed `‖v_{j+1}‖_ρ / ‖v_j‖_ρ`.
    pub contraction: f64,
    /// `‖ĝ g̃^{-1}‖_ρ · max_{b≤i≤J} ‖t^{i−b}‖_h/‖t^i‖_h`.
    pub certified_epsilon: f64,
    pub step_ratios: Vec<f64>,
    pub iterations: usize,
    pub order: usize,
    pub rho: Vec<f64>,
    pub shrinks: usize,
}

/// Scalar fields of a [`DivisionResult`], for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionSummary {
    pub residual: f64,
    pub contraction: f64,
    pub certified_epsilon: f64,
    pub iterations: usize,
    pub order: usize,
    pub rho: Vec<f64>,
    pub shrinks: usize,
}

impl DivisionResult {
    pub fn summary(&self) -> DivisionSummary {
        DivisionSummary {
            residual: self.residual,
            contraction: self.contraction,
            certified_epsilon: self.certified_epsilon,
            iterations: self.iterations,
            order: self.order,
            rho: self.rho.clone(),
            shrinks: self.shrinks,
        }
    }
}

/// Weierstrass division `f = q·g + r` with `r` of t-degree below the
/// t-order `b` of `g`.
///
/// Writes `g = ĝ + g̃·t^b` and iterates `v_0 = f`,
/// `v_{j+1} = −ĝ g̃^{-1} ṽ_j`, accumulating `q = g̃^{-1} Σ ṽ_j` and
/// `r = Σ v̂_j`. Each step contracts the ρ-norm by at most the certified
/// `ε`; the radii are halved together until `ε < 1`.
pub fn weierstrass_divide(
    f: &PolySeries,
    g: &PolySeries,
    family: &NormFamily,
    h: f64,
    rho: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<DivisionResult> {
    f.check_same_shape(g)?;
    if rho.len() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: rho.len(),
        });
    }
    let order = g
        .t_order()
        .ok_or_else(|| Error::precondition("divisor is not t-regular at the origin"))?;
    let (g_hat, g_tilde) = g.split_at(order)?;
    let g_tilde_inv = g_tilde.invert()?;
    let remainder_op = g_hat.multiply(&g_tilde_inv)?.scale(Complex64::new(-1.0, 0.0));
    let shift_constant = tilde_constant(family, order, f.t_cap, h, h)?;

    let mut rho = rho.to_vec();
    let mut shrinks = 0;
    let certified_epsilon = loop {
        let eps = remainder_op.rho_norm(&rho, family, h)? * shift_constant;
        if eps < 1.0 {
            break eps;
        }
        if shrinks == MAX_SHRINKS {
            return Err(Error::DivisionSetup(format!(
                "contraction factor {eps:e} >= 1 after {MAX_SHRINKS} halvings of the radii"
            )));
        }
        rho.iter_mut().for_each(|r| *r *= 0.5);
        shrinks += 1;
    };

    let mut v = f.clone();
    let mut tilde_sum = PolySeries::zeros(f.n, f.x_cap, f.t_cap);
    let mut r = PolySeries::zeros(f.n, f.x_cap, f.t_cap);
    let mut step_ratios = Vec::new();
    let mut v_norm = v.rho_norm(&rho, family, h)?;
    let mut iterations = 0;
    // stop well below tol so the explicit residual clears it
    while !v.is_zero() && v_norm >= 1e-3 * tol && iterations < max_iter {
        let (v_hat, v_tilde) = v.split_at(order)?;
        r = r.add(&v_hat)?;
        tilde_sum = tilde_sum.add(&v_tilde)?;
        let next = remainder_op.multiply(&v_tilde)?;
        let next_norm = next.rho_norm(&rho, family, h)?;
        if v_norm > 0.0 {
            step_ratios.push(next_norm / v_norm);
        }
        v = next;
        v_norm = next_norm;
        iterations += 1;
    }
    let q = g_tilde_inv.multiply(&tilde_sum)?;
    let residual = f.sub(&q.multiply(g)?)?.sub(&r)?.rho_norm(&rho, family, h)?;
    let result = DivisionResult {
        q,
        r,
        residual,
        contraction: step_ratios.iter().copied().fold(0.0, f64::max),
        certified_epsilon,
        step_ratios,
        iterations,
        order,
        rho,
        shrinks,
    };
    if residual > tol {
        return Err(Error::DivisionConvergence {
            iterations,
            residual,
            partial: Box::new(result),
        });
    }
    Ok(result)
}

/// A random division instance: `g = u·t^b + Σ_{i<b} p_i(x) t^i` with `u` a
/// unit near 1 and each `p_i` vanishing at the origin, and `f` with
/// coefficients uniform in the unit square.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    b: usize,
    x_cap: usize,
    t_cap: usize,
    perturbation: f64,
) -> (PolySeries, PolySeries) {
    let mut f = PolySeries::zeros(n, x_cap, t_cap);
    for a in f.coeffs.iter_mut() {
        *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let mut g = PolySeries::zeros(n, x_cap, t_cap);
    let width = t_cap + 1;
    for x in 0..g.x_blocks() {
        for i in 0..width {
            let small = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * perturbation;
            if i < b {
                if x > 0 {
                    g.coeffs[x * width + i] = small;
                }
            } else if x == 0 && i == b {
                g.coeffs[x * width + i] = Complex64::new(1.0, 0.0) + small;
            } else {
                g.coeffs[x * width + i] = small;
            }
        }
    }
    (f, g)
}
