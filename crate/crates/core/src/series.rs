//! Truncated power series in `t` with norm tracking.
//!
//! A [`TruncatedSeries`] of truncation `J` stands for a class modulo
//! `t^{J+1}`; every operation documents which truncation its result carries.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm_family::{nuclearity_scan, NormFamily, Verdict};

pub const DEFAULT_TRUNC: usize = 64;
pub const DEFAULT_INVERT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

/// The ℓ¹ algebra norm and its ℓ² companion at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesNorms {
    pub l1: f64,
    pub l2: f64,
}

impl TruncatedSeries {
    /// Panics on an empty coefficient vector; truncation is `len - 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        TruncatedSeries { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zeros(trunc: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); trunc + 1])
    }

    pub fn one(trunc: usize) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), trunc)
    }

    pub fn constant(c: Complex64, trunc: usize) -> Self {
        let mut s = Self::zeros(trunc);
        s.coeffs[0] = c;
        s
    }

    /// `t^j`, or zero when `j > trunc`.
    pub fn monomial(j: usize, trunc: usize) -> Self {
        let mut s = Self::zeros(trunc);
        if j <= trunc {
            s.coeffs[j] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// Re-truncates, padding with zeros when growing.
    pub fn with_trunc(&self, trunc: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(trunc + 1, Complex64::new(0.0, 0.0));
        Self::new(coeffs)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Cauchy product truncated at `min(self.trunc, other.trunc)`.
    pub fn multiply(&self, other: &Self) -> Self {
        let trunc = self.trunc().min(other.trunc());
        let mut out = vec![Complex64::new(0.0, 0.0); trunc + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(trunc + 1) {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(trunc + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `(Σ|a_j|‖t^j‖_h, (Σ|a_j|²‖t^j‖_h²)^{1/2})`.
    pub fn norms(&self, family: &NormFamily, h: f64) -> Result<SeriesNorms> {
        let terms = self.weighted_terms(family, h)?;
        Ok(SeriesNorms {
            l1: terms.iter().sum(),
            l2: scaled_l2(&terms),
        })
    }

    pub fn norm(&self, family: &NormFamily, h: f64) -> Result<f64> {
        Ok(self.weighted_terms(family, h)?.iter().sum())
    }

    fn weighted_terms(&self, family: &NormFamily, h: f64) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let abs = a.norm();
                if abs == 0.0 {
                    // still validate the level
                    family.log_norm(h, j).map(|_| 0.0)
                } else {
                    Ok(abs * family.log_norm(h, j)?.exp())
                }
            })
            .collect()
    }

    /// Neumann inversion `s^{-1} = a_0^{-1} Σ_k (1 - a_0^{-1}s)^k`.
    ///
    /// Terms are summed until one has both weighted norm and largest
    /// coefficient below `tol`, or vanishes in the truncation (at most
    /// `J + 1` terms, since the remainder lies in `(t)`). The result carries
    /// the input truncation.
    pub fn invert(&self, family: &NormFamily, h: f64, tol: f64) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == Complex64::new(0.0, 0.0) {
            return Err(Error::NonUnit);
        }
        let trunc = self.trunc();
        let inv_a0 = a0.inv();
        // e = a_0^{-1} s - 1, q = -e
        let mut q = self.scale(-inv_a0);
        q.coeffs[0] = Complex64::new(0.0, 0.0);
        let remainder = q.norm(family, h)?;
        if remainder >= 1.0 {
            return Err(Error::NeumannDivergence { norm: remainder });
        }
        let cap = (10 * trunc).max(trunc + 1);
        let mut sum = Self::one(trunc);
        let mut term = Self::one(trunc);
        for _ in 0..cap {
            term = term.multiply(&q);
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
            let largest = term.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if largest < tol && term.norm(family, h)? < tol {
                break;
            }
        }
        Ok(sum.scale(inv_a0))
    }

    /// Divides by `t`. The quotient has truncation `J - 1` (zero series of
    /// truncation 0 when `J = 0`), together with the norm certificate
    /// `‖g‖_l ≤ K_{l,k} ‖s‖_k` from the scanned nuclearity constant.
    pub fn t_divide(&self, family: &NormFamily, k: f64, l: f64) -> Result<TDivision> {
        if l >= k {
            return Err(Error::Ordering {
                lower_name: "l",
                upper_name: "k",
                lower: l,
                upper: k,
            });
        }
        let a0 = self.coeffs[0];
        if a0 != Complex64::new(0.0, 0.0) {
            return Err(Error::NotDivisible {
                constant: format!("{a0}"),
            });
        }
        let quotient = if self.trunc() == 0 {
            Self::zeros(0)
        } else {
            Self::new(self.coeffs[1..].to_vec())
        };
        let scan_bound = self.trunc().max(2);
        let scan = nuclearity_scan(family, l, k, scan_bound)?;
        let lhs = quotient.norm(family, l)?;
        let rhs = scan.constant * self.norm(family, k)?;
        Ok(TDivision {
            quotient,
            certificate: DivisionCertificate {
                constant: scan.constant,
                scan_bound,
                scan_verdict: scan.verdict,
                quotient_norm: lhs,
                bound: rhs,
                holds: lhs <= rhs * (1.0 + 1e-12),
            },
        })
    }

    /// One `re im` pair per line; line `j` holds `a_j`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.coeffs {
            let _ = writeln!(out, "{:e} {:e}", c.re, c.im);
        }
        out
    }

    /// Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let coeffs = parse_pairs(text)?;
        if coeffs.is_empty() {
            return Err(Error::parse(0, "empty series"));
        }
        Ok(Self::new(coeffs))
    }
}

pub(crate) fn parse_pairs(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::parse(idx + 1, format!("missing {what}")))?
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad {what}")))
        };
        let re = next("real part")?;
        let im = next("imaginary part")?;
        if parts.next().is_some() {
            return Err(Error::parse(idx + 1, "expected `re im`"));
        }
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

fn scaled_l2(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    max * terms.iter().map(|t| (t / max).powi(2)).sum::<f64>().sqrt()
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        let trunc = self.trunc().min(rhs.trunc());
        TruncatedSeries::new((0..=trunc).map(|j| self.coeffs[j] + rhs.coeffs[j]).collect())
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        let trunc = self.trunc().min(rhs.trunc());
        TruncatedSeries::new((0..=trunc).map(|j| self.coeffs[j] - rhs.coeffs[j]).collect())
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.multiply(rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TDivision {
    pub quotient: TruncatedSeries,
    pub certificate: DivisionCertificate,
}

/// `‖s/t‖_l ≤ K_{l,k}‖s‖_k`, with `K` from a finite nuclearity scan and
/// therefore possibly below the true supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisionCertificate {
    pub constant: f64,
    pub scan_bound: usize,
    pub scan_verdict: Verdict,
    pub quotient_norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Levels and constant for `A_{(1+1/m)h} ⊂ H_{(1+1/m)h} ↪ A_{(1+1/(m+1))h}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingCertificate {
    /// `(1 + 1/(m+1))·h`
    pub lower_level: f64,
    /// `(1 + 1/m)·h`
    pub upper_level: f64,
    /// Scanned nuclearity constant between the two levels.
    pub nuclearity_constant: f64,
    /// `K·(R(upper,0)² + Σ_{j=1}^J j^{-2})^{1/2}`.
    pub embedding_constant: f64,
    pub scan_bound: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingSample {
    pub upper: SeriesNorms,
    pub lower: SeriesNorms,
    /// `K_emb·ℓ²(upper) / ℓ¹(lower) - 1`; `+∞` for the zero series.
    pub embedding_slack: f64,
}

impl EmbeddingCertificate {
    pub fn new(family: &NormFamily, h: f64, m: usize, scan_bound: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::usage("embedding level index m must be >= 1"));
        }
        let upper_level = (1.0 + 1.0 / m as f64) * h;
        let lower_level = (1.0 + 1.0 / (m as f64 + 1.0)) * h;
        let scan_bound = scan_bound.max(2);
        let scan = nuclearity_scan(family, lower_level, upper_level, scan_bound)?;
        if scan.verdict != Verdict::Pass {
            return Err(Error::precondition(format!(
                "controlled nuclearity between {lower_level} and {upper_level} is {} up to J = {scan_bound}",
                scan.verdict
            )));
        }
        let r0 = family.ratio(upper_level, 0)?;
        let tail: f64 = (1..=scan_bound).map(|j| 1.0 / (j as f64).powi(2)).sum();
        Ok(EmbeddingCertificate {
            lower_level,
            upper_level,
            nuclearity_constant: scan.constant,
            embedding_constant: scan.constant * (r0 * r0 + tail).sqrt(),
            scan_bound,
        })
    }

    pub fn check(&self, family: &NormFamily, s: &TruncatedSeries) -> Result<EmbeddingSample> {
        if s.trunc() > self.scan_bound {
            return Err(Error::Cap {
                index: s.trunc(),
                cap: self.scan_bound,
            });
        }
        let upper = s.norms(family, self.upper_level)?;
        let lower = s.norms(family, self.lower_level)?;
        let embedding_slack = if lower.l1 == 0.0 {
            f64::INFINITY
        } else {
            self.embedding_constant * upper.l2 / lower.l1 - 1.0
        };
        Ok(EmbeddingSample {
            upper,
            lower,
            embedding_slack,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub certificate: EmbeddingCertificate,
    pub samples: usize,
    /// Samples with `ℓ² > ℓ¹` at the upper level.
    pub upper_violations: usize,
    /// Samples with `ℓ² > ℓ¹` at the lower level.
    pub lower_violations: usize,
    pub embedding_violations: usize,
    /// Smallest `ℓ¹/ℓ² - 1` over both levels.
    pub worst_norm_slack: f64,
    pub worst_embedding_slack: f64,
}

impl EmbeddingReport {
    pub fn passed(&self) -> bool {
        self.upper_violations == 0 && self.lower_violations == 0 && self.embedding_violations == 0
    }
}

/// Relative round-off allowed in `ℓ² ≤ ℓ¹`.
const NORM_ROUNDOFF: f64 = 1e-15;

/// Random-sample check of `ℓ² ≤ ℓ¹` at both levels and of the embedding
/// inequality `ℓ¹(lower) ≤ K_emb·ℓ²(upper)`.
pub fn check_embeddings(
    samples: usize,
    family: &NormFamily,
    h: f64,
    m: usize,
    trunc: usize,
    seed: u64,
) -> Result<EmbeddingReport> {
    let certificate = EmbeddingCertificate::new(family, h, m, trunc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EmbeddingReport {
        certificate,
        samples,
        upper_violations: 0,
        lower_violations: 0,
        embedding_violations: 0,
        worst_norm_slack: f64::INFINITY,
        worst_embedding_slack: f64::INFINITY,
    };
    for _ in 0..samples {
        let s = random_series(&mut rng, trunc);
        let sample = certificate.check(family, &s)?;
        for (norms, count) in [
            (sample.upper, &mut report.upper_violations),
            (sample.lower, &mut report.lower_violations),
        ] {
            if norms.l2 > norms.l1 * (1.0 + NORM_ROUNDOFF) {
                *count += 1;
            }
            if norms.l2 > 0.0 {
                report.worst_norm_slack = report.worst_norm_slack.min(norms.l1 / norms.l2 - 1.0);
            }
        }
        if sample.embedding_slack < 0.0 {
            report.embedding_violations += 1;
        }
        report.worst_embedding_slack = report.worst_embedding_slack.min(sample.embedding_slack);
    }
    Ok(report)
}

/// Coefficients uniform in the unit square of `ℂ`.
pub fn random_series<R: Rng>(rng: &mut R, trunc: usize) -> TruncatedSeries {
    TruncatedSeries::new(
        (0..=trunc)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn multiply_examples() {
        let a = TruncatedSeries::from_real(&[1.0, 1.0, 0.0]);
        let b = TruncatedSeries::from_real(&[1.0, -1.0, 0.0]);
        assert_eq!(a.multiply(&b), TruncatedSeries::from_real(&[1.0, 0.0, -1.0]));

        let f = TruncatedSeries::from_real(&[3.0, -2.0, 0.5, 7.0]);
        assert_eq!(TruncatedSeries::one(3).multiply(&f), f);

        let t = TruncatedSeries::monomial(1, 1);
        assert!(t.multiply(&t).is_zero());
        assert_eq!(t.multiply(&t).trunc(), 1);
    }

    #[test]
    fn multiply_truncates_at_min() {
        let a = TruncatedSeries::from_real(&[1.0, 2.0, 3.0, 4.0]);
        let b = TruncatedSeries::from_real(&[1.0, 1.0]);
        let p = a.multiply(&b);
        assert_eq!(p.trunc(), 1);
        assert_eq!(p.coeffs(), &[c(1.0), c(3.0)]);
    }

    #[test]
    fn norms_examples() {
        let fam = NormFamily::factorial();
        let s = TruncatedSeries::from_real(&[1.0, 1.0]);
        let n = s.norms(&fam, 0.5).unwrap();
        assert!((n.l1 - 1.5).abs() < 1e-15);
        assert!((n.l2 - 1.25f64.sqrt()).abs() < 1e-15);

        let z = TruncatedSeries::zeros(5).norms(&fam, 0.5).unwrap();
        assert_eq!((z.l1, z.l2), (0.0, 0.0));

        let t2 = TruncatedSeries::monomial(2, 2).norms(&fam, 1.0).unwrap();
        assert!((t2.l1 - 0.5).abs() < 1e-15 && (t2.l2 - 0.5).abs() < 1e-15);

        assert!(matches!(s.norms(&fam, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn invert_examples() {
        let fam = NormFamily::factorial();
        let s = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0]);
        let g = s.invert(&fam, 0.5, DEFAULT_INVERT_TOL).unwrap();
        assert_eq!(g, TruncatedSeries::from_real(&[1.0, -1.0, 1.0, -1.0]));

        let g = TruncatedSeries::from_real(&[2.0])
            .invert(&fam, 0.5, DEFAULT_INVERT_TOL)
            .unwrap();
        assert_eq!(g, TruncatedSeries::from_real(&[0.5]));

        let t = TruncatedSeries::monomial(1, 3);
        assert!(matches!(t.invert(&fam, 0.5, 1e-15), Err(Error::NonUnit)));
    }

    #[test]
    fn invert_reports_divergent_remainder() {
        let fam = NormFamily::factorial();
        // remainder 3t has norm 3·0.5 = 1.5
        let s = TruncatedSeries::from_real(&[1.0, 3.0]);
        match s.invert(&fam, 0.5, 1e-15) {
            Err(Error::NeumannDivergence { norm }) => assert!((norm - 1.5).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn t_divide_examples() {
        let fam = NormFamily::factorial();
        let s = TruncatedSeries::from_real(&[0.0, 1.0, 3.0]);
        let d = s.t_divide(&fam, 0.9, 0.5).unwrap();
        assert_eq!(d.quotient, TruncatedSeries::from_real(&[1.0, 3.0]));
        assert!(d.certificate.holds);

        let s = TruncatedSeries::from_real(&[0.0, 0.0, 0.0, 1.0]);
        let d = s.t_divide(&fam, 0.9, 0.5).unwrap();
        assert_eq!(d.quotient, TruncatedSeries::from_real(&[0.0, 0.0, 1.0]));

        let s = TruncatedSeries::from_real(&[1.0, 1.0]);
        assert!(matches!(s.t_divide(&fam, 0.9, 0.5), Err(Error::NotDivisible { .. })));
        let s = TruncatedSeries::from_real(&[0.0, 1.0]);
        assert!(matches!(s.t_divide(&fam, 0.5, 0.9), Err(Error::Ordering { .. })));
    }

    #[test]
    fn embedding_single_spike() {
        let fam = NormFamily::factorial();
        let cert = EmbeddingCertificate::new(&fam, 0.5, 1, 50).unwrap();
        assert!((cert.upper_level - 1.0).abs() < 1e-15);
        assert!((cert.lower_level - 0.75).abs() < 1e-15);
        let s = TruncatedSeries::monomial(5, 50);
        let sample = cert.check(&fam, &s).unwrap();
        assert!((sample.upper.l1 - sample.upper.l2).abs() <= 1e-15 * sample.upper.l1);
        assert!((sample.lower.l1 - sample.lower.l2).abs() <= 1e-15 * sample.lower.l1);
        // direct evaluation: K_emb·‖t^5‖_1 / ‖t^5‖_0.75 - 1 = K_emb·(4/3)^5 - 1
        let expect = cert.embedding_constant * (4.0f64 / 3.0).powi(5) - 1.0;
        assert!((sample.embedding_slack - expect).abs() < 1e-9 * expect.abs());
        assert!(sample.embedding_slack >= 0.0);
    }

    #[test]
    fn embedding_zero_series() {
        let fam = NormFamily::factorial();
        let cert = EmbeddingCertificate::new(&fam, 0.5, 1, 50).unwrap();
        let sample = cert.check(&fam, &TruncatedSeries::zeros(50)).unwrap();
        assert_eq!(sample.upper.l1, 0.0);
        assert_eq!(sample.upper.l2, 0.0);
        assert_eq!(sample.lower.l1, 0.0);
    }

    #[test]
    fn embedding_random_samples() {
        let fam = NormFamily::factorial();
        let r = check_embeddings(1000, &fam, 0.5, 1, 50, 7).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.worst_norm_slack >= -1e-15);
    }

    #[test]
    fn text_round_trip() {
        let s = TruncatedSeries::new(vec![Complex64::new(1.5, -2.0), Complex64::new(0.0, 1e-300)]);
        assert_eq!(TruncatedSeries::from_text(&s.to_text()).unwrap(), s);
        assert!(TruncatedSeries::from_text("1 2 3\n").is_err());
        assert!(TruncatedSeries::from_text("# nothing\n").is_err());
    }
}
