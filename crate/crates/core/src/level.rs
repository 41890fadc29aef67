//! Radius-dependent levels `h(r)`, the criterion `h'² ≥ h·h''`, and
//! plurisubharmonicity of the weights `W_j(z) = −2 log ‖t^j‖_{h(|z|)}`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridBlock;
use crate::norm_family::{NormFamily, Verdict};

/// Tolerance on the normalized `h'² − h·h''` and on `H'`.
pub const H_CONDITION_TOL: f64 = 1e-10;
pub const DEFAULT_PSH_TOL: f64 = 1e-7;
/// Factor applied to the psh tolerance when derivatives come from
/// finite differences.
const FD_TOL_WIDENING: f64 = 100.0;

pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `h(r) = exp(−∫_0^r H)` with the integral precomputed on a grid.
pub struct RateLevel {
    label: String,
    rate: RateFn,
    step: f64,
    // cumulative[k] = ∫_0^{k·step} H
    cumulative: Vec<f64>,
}

impl RateLevel {
    fn simpson(&self, x0: f64, x1: f64) -> f64 {
        let h = &self.rate;
        (x1 - x0) / 6.0 * (h(x0) + 4.0 * h(0.5 * (x0 + x1)) + h(x1))
    }

    fn integral(&self, r: f64) -> f64 {
        let last = self.cumulative.len() - 1;
        let k = ((r / self.step).floor() as usize).min(last);
        let mut acc = self.cumulative[k];
        let mut x = k as f64 * self.step;
        while x + self.step < r {
            acc += self.simpson(x, x + self.step);
            x += self.step;
        }
        acc + self.simpson(x, r)
    }

    /// Second-order one-sided difference, step `1e-5·(1 + r)`.
    fn rate_derivative(&self, r: f64) -> f64 {
        let d = 1e-5 * (1.0 + r);
        let h = &self.rate;
        (-3.0 * h(r) + 4.0 * h(r + d) - h(r + 2.0 * d)) / (2.0 * d)
    }
}

/// Samples `(r_i, h_i)` with `log h` interpolated linearly in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    radii: Vec<f64>,
    log_levels: Vec<f64>,
}

impl LevelTable {
    pub fn new(mut rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::usage("a level table needs at least two rows"));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows[0].0 != 0.0 {
            return Err(Error::usage("a level table must start at r = 0"));
        }
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::usage(format!("radius {} listed twice", w[0].0)));
            }
        }
        if let Some((r, h)) = rows.iter().find(|(_, h)| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::usage(format!("level {h} at r = {r} must be positive")));
        }
        Ok(LevelTable {
            radii: rows.iter().map(|r| r.0).collect(),
            log_levels: rows.iter().map(|r| r.1.ln()).collect(),
        })
    }

    /// Two columns `r h`, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::parse(idx + 1, "expected `r h`"));
            }
            let r: f64 = cols[0].parse().map_err(|_| Error::parse(idx + 1, "bad radius"))?;
            let h: f64 = cols[1].parse().map_err(|_| Error::parse(idx + 1, "bad level"))?;
            rows.push((r, h));
        }
        Self::new(rows)
    }

    fn log_level(&self, r: f64) -> f64 {
        let seg = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            n if n >= self.radii.len() => self.radii.len() - 2,
            n => n - 1,
        };
        let (r0, r1) = (self.radii[seg], self.radii[seg + 1]);
        let (v0, v1) = (self.log_levels[seg], self.log_levels[seg + 1]);
        v0 + (r - r0) / (r1 - r0) * (v1 - v0)
    }
}

#[derive(Clone)]
pub enum LevelKind {
    Constant(f64),
    /// `e^{−r}`
    ExpDecay,
    /// `e^{−r²}`
    Gaussian,
    /// `1/(1+r)`
    Reciprocal,
    FromRate(Arc<RateLevel>),
    Tabulated(Arc<LevelTable>),
}

/// A level `h(r) = s·h_0(r)` with scale `s > 0`.
#[derive(Clone)]
pub struct LevelFunction {
    kind: LevelKind,
    scale: f64,
}

/// `(h, h', h'')` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelJet {
    pub h: f64,
    pub d1: f64,
    pub d2: f64,
}

impl LevelFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::usage(format!("constant level {c} must be positive")));
        }
        Ok(Self::from_kind(LevelKind::Constant(c)))
    }

    pub fn exp_decay() -> Self {
        Self::from_kind(LevelKind::ExpDecay)
    }

    pub fn gaussian() -> Self {
        Self::from_kind(LevelKind::Gaussian)
    }

    pub fn reciprocal() -> Self {
        Self::from_kind(LevelKind::Reciprocal)
    }

    pub fn tabulated(table: LevelTable) -> Self {
        Self::from_kind(LevelKind::Tabulated(Arc::new(table)))
    }

    fn from_kind(kind: LevelKind) -> Self {
        LevelFunction { kind, scale: 1.0 }
    }

    /// `h(r) = exp(−∫_0^r H)`, integrated by composite Simpson with the
    /// given step on `[0, r_max]` (and on demand beyond). Every Simpson node
    /// on `[0, r_max]` must have `H ≥ 0`.
    pub fn from_rate<F>(label: &str, rate: F, r_max: f64, step: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(r_max.is_finite() && r_max > 0.0 && step.is_finite() && step > 0.0) {
            return Err(Error::usage("from_rate needs positive r_max and step"));
        }
        let rate: RateFn = Arc::new(rate);
        let steps = (r_max / step).ceil() as usize;
        for i in 0..=2 * steps {
            let r = 0.5 * step * i as f64;
            let value = rate(r);
            if value.is_nan() || value < 0.0 {
                return Err(Error::NegativeRate { r, value });
            }
        }
        let mut level = RateLevel {
            label: label.to_string(),
            rate,
            step,
            cumulative: vec![0.0],
        };
        for k in 0..steps {
            let x0 = k as f64 * step;
            let next = level.cumulative[k] + level.simpson(x0, x0 + step);
            level.cumulative.push(next);
        }
        Ok(Self::from_kind(LevelKind::FromRate(Arc::new(level))))
    }

    /// Resolves a registry id: `constant[:c]`, `exp`, `gauss`,
    /// `reciprocal`, `linear-rate:<a>,<b>` (`H = a + b·r`) or
    /// `tabulated:<path>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let (name, arg) = match id.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (id, None),
        };
        let number = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::usage(format!("bad number `{s}` in level id `{id}`")))
        };
        match (name, arg) {
            ("constant", None) => Self::constant(1.0),
            ("constant", Some(c)) => Self::constant(number(c)?),
            ("exp", None) => Ok(Self::exp_decay()),
            ("gauss", None) => Ok(Self::gaussian()),
            ("reciprocal", None) => Ok(Self::reciprocal()),
            ("linear-rate", Some(args)) => {
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| Error::usage(format!("level id `{id}` needs `a,b`")))?;
                let (a, b) = (number(a)?, number(b)?);
                Self::from_rate(&format!("linear-rate:{a},{b}"), move |r| a + b * r, 4.0, 1e-3)
            }
            ("tabulated", Some(path)) => Ok(Self::tabulated(LevelTable::parse(&std::fs::read_to_string(
                Path::new(path),
            )?)?)),
            _ => Err(Error::usage(format!("unknown level id `{id}`"))),
        }
    }

    /// Multiplies the level by `s`; the rate `H` is unchanged.
    pub fn scaled(mut self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::usage(format!("level scale {s} must be positive")));
        }
        self.scale *= s;
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kind(&self) -> &LevelKind {
        &self.kind
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.kind, LevelKind::Tabulated(_))
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.jet(r).h
    }

    pub fn jet(&self, r: f64) -> LevelJet {
        let s = self.scale;
        match &self.kind {
            LevelKind::Constant(c) => LevelJet {
                h: s * c,
                d1: 0.0,
                d2: 0.0,
            },
            LevelKind::ExpDecay => {
                let h = s * (-r).exp();
                LevelJet { h, d1: -h, d2: h }
            }
            LevelKind::Gaussian => {
                let h = s * (-r * r).exp();
                LevelJet {
                    h,
                    d1: -2.0 * r * h,
                    d2: (4.0 * r * r - 2.0) * h,
                }
            }
            LevelKind::Reciprocal => {
                let p = 1.0 + r;
                LevelJet {
                    h: s / p,
                    d1: -s / (p * p),
                    d2: 2.0 * s / (p * p * p),
                }
            }
            LevelKind::FromRate(level) => {
                let h = s * (-level.integral(r)).exp();
                let rate = (level.rate)(r);
                let dr = level.rate_derivative(r);
                LevelJet {
                    h,
                    d1: -rate * h,
                    d2: (rate * rate - dr) * h,
                }
            }
            LevelKind::Tabulated(t) => {
                let d = 1e-4 * (1.0 + r);
                let lo = (r - d).max(0.0);
                let hi = r + d;
                let f = |x: f64| s * t.log_level(x).exp();
                let (fm, f0, fp) = (f(lo), f(r), f(hi));
                if lo == r {
                    // forward differences at the origin
                    let fpp = f(r + 2.0 * d);
                    LevelJet {
                        h: f0,
                        d1: (-3.0 * f0 + 4.0 * fp - fpp) / (2.0 * d),
                        d2: (f0 - 2.0 * fp + fpp) / (d * d),
                    }
                } else {
                    LevelJet {
                        h: f0,
                        d1: (fp - fm) / (hi - lo),
                        d2: (fp - 2.0 * f0 + fm) / (d * d),
                    }
                }
            }
        }
    }

    /// `(H(r), H'(r))` when the level is given through its rate.
    pub fn rate(&self, r: f64) -> Option<(f64, f64)> {
        match &self.kind {
            LevelKind::Constant(_) => Some((0.0, 0.0)),
            LevelKind::ExpDecay => Some((1.0, 0.0)),
            LevelKind::Gaussian => Some((2.0 * r, 2.0)),
            LevelKind::Reciprocal => {
                let p = 1.0 + r;
                Some((1.0 / p, -1.0 / (p * p)))
            }
            LevelKind::FromRate(level) => Some(((level.rate)(r), level.rate_derivative(r))),
            LevelKind::Tabulated(_) => None,
        }
    }
}

impl fmt::Display for LevelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LevelKind::Constant(c) => write!(f, "constant:{c}")?,
            LevelKind::ExpDecay => write!(f, "exp")?,
            LevelKind::Gaussian => write!(f, "gauss")?,
            LevelKind::Reciprocal => write!(f, "reciprocal")?,
            LevelKind::FromRate(level) => write!(f, "{}", level.label)?,
            LevelKind::Tabulated(t) => write!(f, "tabulated({} rows)", t.radii.len())?,
        }
        if self.scale != 1.0 {
            write!(f, "*{}", self.scale)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LevelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelFunction({self})")
    }
}

/// `r_0 … r_max` with `n + 1` equally spaced points.
pub fn radial_grid(r_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| r_max * i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HConditionReport {
    pub points: usize,
    pub verdict: Verdict,
    /// Smallest `(h'² − h·h'')/h²`.
    pub min_slack: f64,
    pub argmin_r: f64,
    pub first_violation: Option<f64>,
    /// Verdict of `H' ≥ −tol` when a rate is available.
    pub rate_verdict: Option<Verdict>,
    pub rate_first_violation: Option<f64>,
    /// Radii where the two verdicts disagree.
    pub mismatches: Vec<f64>,
}

/// Checks `h'² ≥ h·h''` on the grid in the normalized form
/// `(h'² − h·h'')/h² ≥ −1e-10` (which equals `H'`), and cross-checks against
/// `H' ≥ −1e-10` node by node. Radii where `h` underflows are skipped.
pub fn check_h_condition(level: &LevelFunction, r_grid: &[f64]) -> HConditionReport {
    let mut report = HConditionReport {
        points: 0,
        verdict: Verdict::Pass,
        min_slack: f64::INFINITY,
        argmin_r: f64::NAN,
        first_violation: None,
        rate_verdict: None,
        rate_first_violation: None,
        mismatches: Vec::new(),
    };
    for &r in r_grid {
        let jet = level.jet(r);
        if !(jet.h > 0.0 && jet.h.is_finite()) {
            continue;
        }
        report.points += 1;
        let slack = (jet.d1 / jet.h).powi(2) - jet.d2 / jet.h;
        if slack < report.min_slack {
            report.min_slack = slack;
            report.argmin_r = r;
        }
        let direct_ok = slack >= -H_CONDITION_TOL;
        if !direct_ok && report.first_violation.is_none() {
            report.first_violation = Some(r);
            report.verdict = Verdict::Fail;
        }
        if let Some((_, dr)) = level.rate(r) {
            let rate_ok = dr >= -H_CONDITION_TOL;
            let verdict = report.rate_verdict.get_or_insert(Verdict::Pass);
            if !rate_ok {
                *verdict = Verdict::Fail;
                report.rate_first_violation.get_or_insert(r);
            }
            if rate_ok != direct_ok {
                report.mismatches.push(r);
            }
        }
    }
    if report.points == 0 {
        report.verdict = Verdict::Inconclusive;
    }
    report
}

/// `W_j(z) = −2 log ‖t^j‖_{h(|z|)}`.
pub fn weight_w(family: &NormFamily, level: &LevelFunction, j: usize, z: Complex64) -> Result<f64> {
    let h = level.eval(z.norm());
    if !family.in_h_range(h) {
        return Err(Error::Domain {
            family: family.to_string(),
            h,
        });
    }
    Ok(-2.0 * family.log_norm(h, j)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PshReport {
    pub j: usize,
    pub verdict: Verdict,
    /// Smallest `W''(r)/(1 + |W(r)|)` over the radial grid.
    pub radial_min_slack: f64,
    pub radial_argmin_r: f64,
    pub radial_verdict: Verdict,
    /// Smallest five-point second-difference sum over `1 + max|W|`.
    pub laplacian_min_slack: f64,
    pub laplacian_argmin: (f64, f64),
    pub laplacian_verdict: Verdict,
    /// The radial and two-dimensional verdicts disagree.
    pub discrepancy: bool,
    /// Some derivative came from finite differences; `tol` was widened.
    pub finite_differences: bool,
    pub tol: f64,
    /// Mesh nodes whose level left the family's admissible range.
    pub skipped_nodes: usize,
}

/// Two plurisubharmonicity checks for `W_j` on a punctured block.
///
/// Radial: `W_j'' = −(log T_j)'' ≥ −tol·(1 + |W_j|)` with
/// `T_j = N_j ∘ h`, for `r` from one mesh spacing to the block's largest
/// modulus. Two-dimensional: the five-point second-difference sum of
/// `W_j` at interior nodes with `|z| ≥ spacing` is `≥ −tol·(1 + max|W_j|)`.
/// Nodes where `h(|z|)` leaves the family's admissible range are skipped.
pub fn check_psh(
    family: &NormFamily,
    level: &LevelFunction,
    j: usize,
    block: &GridBlock,
    tol: f64,
) -> Result<PshReport> {
    let finite_differences = family.is_tabulated() || level.is_tabulated();
    let tol = if finite_differences { tol * FD_TOL_WIDENING } else { tol };
    let spacing = block.spacing();

    let r_lo = min_modulus(block).max(spacing);
    let r_hi = block.max_modulus();
    let samples = 4 * block.n;
    let mut radial_min = f64::INFINITY;
    let mut radial_arg = f64::NAN;
    for i in 0..=samples {
        let r = r_lo + (r_hi - r_lo) * i as f64 / samples as f64;
        let lj = level.jet(r);
        if !family.in_h_range(lj.h) {
            continue;
        }
        let nj = family.log_norm_jet(lj.h, j)?;
        let w = -2.0 * nj.value;
        let w2 = -2.0 * (nj.d2 * lj.d1 * lj.d1 + nj.d1 * lj.d2);
        let slack = w2 / (1.0 + w.abs());
        if slack < radial_min {
            radial_min = slack;
            radial_arg = r;
        }
    }

    let n = block.n;
    let weights: Vec<Option<f64>> = (0..block.nodes())
        .into_par_iter()
        .map(|idx| match weight_w(family, level, j, block.point_at(idx)) {
            Ok(w) => Ok(Some(w)),
            Err(Error::Domain { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let skipped_nodes = weights.iter().filter(|w| w.is_none()).count();
    let scale = 1.0 + weights.iter().flatten().fold(0.0f64, |m, w| m.max(w.abs()));
    let aspect = (block.dx() / block.dy()).powi(2);
    let (lap_min, lap_arg) = (1..n - 1)
        .into_par_iter()
        .map(|iy| {
            let mut best = (f64::INFINITY, (f64::NAN, f64::NAN));
            for ix in 1..n - 1 {
                let z = block.point(ix, iy);
                if z.norm() < spacing {
                    continue;
                }
                let at = |x: usize, y: usize| weights[block.index(x, y)];
                let stencil = (
                    at(ix, iy),
                    at(ix + 1, iy),
                    at(ix - 1, iy),
                    at(ix, iy + 1),
                    at(ix, iy - 1),
                );
                if let (Some(c), Some(e), Some(w), Some(no), Some(s)) = stencil {
                    let sum = (e + w - 2.0 * c) + (no + s - 2.0 * c) * aspect;
                    let slack = sum / scale;
                    if slack < best.0 {
                        best = (slack, (z.re, z.im));
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, (f64::NAN, f64::NAN)),
            |a, b| if b.0 < a.0 { b } else { a },
        );

    let judge = |slack: f64| {
        if slack.is_infinite() {
            Verdict::Inconclusive
        } else if slack >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    let radial_verdict = judge(radial_min);
    let laplacian_verdict = judge(lap_min);
    let verdict = if radial_verdict == Verdict::Fail || laplacian_verdict == Verdict::Fail {
        Verdict::Fail
    } else if radial_verdict == Verdict::Pass && laplacian_verdict == Verdict::Pass {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(PshReport {
        j,
        verdict,
        radial_min_slack: radial_min,
        radial_argmin_r: radial_arg,
        radial_verdict,
        laplacian_min_slack: lap_min,
        laplacian_argmin: lap_arg,
        laplacian_verdict,
        discrepancy: radial_verdict != laplacian_verdict,
        finite_differences,
        tol,
        skipped_nodes,
    })
}

fn min_modulus(block: &GridBlock) -> f64 {
    let x = 0.0f64.clamp(block.a, block.b);
    let y = 0.0f64.clamp(block.c, block.d);
    x.hypot(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn from_rate_examples() {
        let zero = LevelFunction::from_rate("zero", |_| 0.0, 2.0, 0.01).unwrap();
        assert_eq!(zero.eval(1.3), 1.0);
        let one = LevelFunction::from_rate("one", |_| 1.0, 2.0, 0.01).unwrap();
        assert_relative_eq!(one.eval(1.0), (-1.0f64).exp(), max_relative = 1e-12);
        let lin = LevelFunction::from_rate("2r", |r| 2.0 * r, 2.0, 0.01).unwrap();
        assert_relative_eq!(lin.eval(1.0), (-1.0f64).exp(), max_relative = 1e-12);
        // past r_max the integral is continued on demand
        assert_relative_eq!(lin.eval(2.5), (-6.25f64).exp(), max_relative = 1e-12);
        assert!(matches!(
            LevelFunction::from_rate("neg", |r| 0.5 - r, 2.0, 0.01),
            Err(Error::NegativeRate { .. })
        ));
    }

    #[test]
    fn from_rate_derivatives() {
        let lin = LevelFunction::from_rate("2r", |r| 2.0 * r, 2.0, 0.01).unwrap();
        let g = LevelFunction::gaussian();
        for r in [0.0, 0.4, 1.1] {
            let a = lin.jet(r);
            let b = g.jet(r);
            assert_relative_eq!(a.h, b.h, max_relative = 1e-12);
            assert!((a.d1 - b.d1).abs() < 1e-12);
            assert!((a.d2 - b.d2).abs() < 1e-8);
        }
    }

    #[test]
    fn h_condition_examples() {
        let grid = radial_grid(3.0, 60);
        let exp = check_h_condition(&LevelFunction::exp_decay(), &grid);
        assert_eq!(exp.verdict, Verdict::Pass);
        assert_eq!(exp.rate_verdict, Some(Verdict::Pass));
        let gauss = check_h_condition(&LevelFunction::gaussian(), &grid);
        assert_eq!(gauss.verdict, Verdict::Pass);
        let rec = check_h_condition(&LevelFunction::reciprocal(), &grid);
        assert_eq!(rec.verdict, Verdict::Fail);
        assert_eq!(rec.first_violation, Some(0.0));
        // (h'² − h·h'')/h² = −1/(1+r)²
        assert_relative_eq!(rec.min_slack, -1.0, max_relative = 1e-12);
        for r in [&exp, &gauss, &rec] {
            assert!(r.mismatches.is_empty());
        }
    }

    #[test]
    fn h_condition_from_rate_matches_rate_criterion() {
        let grid = radial_grid(2.0, 40);
        let dec = LevelFunction::from_rate("1/(1+r)", |r| 1.0 / (1.0 + r), 2.0, 0.01).unwrap();
        let rep = check_h_condition(&dec, &grid);
        assert_eq!(rep.verdict, Verdict::Fail);
        assert_eq!(rep.rate_verdict, Some(Verdict::Fail));
        assert!(rep.mismatches.is_empty());
    }

    #[test]
    fn weight_examples() {
        let fac = NormFamily::factorial();
        let exp = LevelFunction::exp_decay();
        for z in [Complex64::new(0.3, 0.1), Complex64::new(0.0, 0.0)] {
            assert_eq!(weight_w(&fac, &exp, 0, z).unwrap(), 0.0);
        }
        assert_relative_eq!(
            weight_w(&fac, &exp, 1, Complex64::new(0.6, 0.8)).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            weight_w(&fac, &exp, 2, Complex64::new(0.0, 0.0)).unwrap(),
            2.0 * 2f64.ln(),
            max_relative = 1e-12
        );
        let too_big = LevelFunction::constant(2.0).unwrap();
        assert!(matches!(
            weight_w(&fac, &too_big, 1, Complex64::new(0.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn weight_is_radial() {
        let fac = NormFamily::exp_factorial(1.0).unwrap();
        let g = LevelFunction::gaussian();
        let z = Complex64::new(0.3, -0.4);
        let base = weight_w(&fac, &g, 7, z).unwrap();
        for k in 0..8 {
            let u = Complex64::from_polar(1.0, k as f64 * 0.7);
            let rotated = Complex64::from_polar(z.norm(), (u * z).arg());
            assert_eq!(weight_w(&fac, &g, 7, rotated).unwrap(), base);
        }
    }

    #[test]
    fn psh_examples() {
        let fac = NormFamily::factorial();
        let block = GridBlock::square(1.0, 32).unwrap();
        let r = check_psh(&fac, &LevelFunction::exp_decay(), 1, &block, DEFAULT_PSH_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        // W_1 = 2r: the radial second derivative vanishes
        assert!(r.radial_min_slack.abs() < 1e-12);
        assert!(r.laplacian_min_slack > 0.0);

        let r = check_psh(&fac, &LevelFunction::exp_decay(), 0, &block, DEFAULT_PSH_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.laplacian_min_slack, 0.0);
    }

    #[test]
    fn psh_reciprocal_level_fails_radially() {
        let fac = NormFamily::factorial();
        let block = GridBlock::square(1.0, 32).unwrap();
        let r = check_psh(&fac, &LevelFunction::reciprocal(), 3, &block, DEFAULT_PSH_TOL).unwrap();
        assert_eq!(r.radial_verdict, Verdict::Fail);
        // W = 2j log(1+r) + c has ΔW = 2j/(r(1+r)²) > 0
        assert_eq!(r.laplacian_verdict, Verdict::Pass);
        assert!(r.discrepancy);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn psh_skips_levels_above_bound() {
        let ex2 = NormFamily::power_polynomial(1, 2.0).unwrap();
        let block = GridBlock::square(1.0, 16).unwrap();
        let r = check_psh(&ex2, &LevelFunction::exp_decay(), 2, &block, DEFAULT_PSH_TOL).unwrap();
        assert!(r.skipped_nodes > 0);
    }

    #[test]
    fn level_ids() {
        for id in [
            "constant",
            "constant:0.5",
            "exp",
            "gauss",
            "reciprocal",
            "linear-rate:1,2",
        ] {
            LevelFunction::from_id(id).unwrap();
        }
        assert!(LevelFunction::from_id("wobble").is_err());
        assert!(LevelFunction::from_id("linear-rate:1").is_err());
    }

    #[test]
    fn tabulated_level() {
        let rows = (0..=40).map(|i| (0.05 * i as f64, (-0.05 * i as f64).exp())).collect();
        let t = LevelFunction::tabulated(LevelTable::new(rows).unwrap());
        let e = LevelFunction::exp_decay();
        for r in [0.0, 0.33, 1.2] {
            let (a, b) = (t.jet(r), e.jet(r));
            assert_relative_eq!(a.h, b.h, max_relative = 1e-12);
            assert_relative_eq!(a.d1, b.d1, max_relative = 1e-6);
        }
    }
}
