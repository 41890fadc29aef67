//! Finite-scan certification of the norm-family condition block.
//!
//! Every "for all j" condition is checked for `j ≤ J` only, and a pass
//! records the bound it was certified up to.

use std::fmt;

use serde::Serialize;

use super::NormFamily;
use crate::error::{Error, Result};

pub const DEFAULT_SCAN_BOUND: usize = 200;

/// Locality passes once `R(h, J)` drops below this.
const LOCALITY_THRESHOLD: f64 = 0.01;
/// Growth of the required constant over the second half of the scan that
/// counts as unbounded.
const NUCLEARITY_GROWTH: f64 = 1.5;
/// Normalized slack below which subharmonicity fails.
const SUBHARMONIC_TOL: f64 = 1e-8;
/// Relative round-off allowance for the log-space comparisons.
const LOG_SLACK: f64 = 1e-12;
/// Number of interior points on the subharmonicity level grid.
const LEVEL_GRID: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    Submultiplicativity,
    Normalization,
    Locality,
    ControlledNuclearity,
    Subharmonicity,
    SpectralMonotonicity,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionId::Submultiplicativity => "submultiplicativity",
            ConditionId::Normalization => "normalization",
            ConditionId::Locality => "locality",
            ConditionId::ControlledNuclearity => "controlled_nuclearity",
            ConditionId::Subharmonicity => "subharmonicity",
            ConditionId::SpectralMonotonicity => "spectral_monotonicity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Index { j: usize },
    Pair { j: usize, l: usize },
    LevelIndex { h: f64, j: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Index { j } => write!(f, "j={j}"),
            Witness::Pair { j, l } => write!(f, "j={j};l={l}"),
            Witness::LevelIndex { h, j } => write!(f, "h={h:e};j={j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub id: ConditionId,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Smallest observed margin of the inequality (condition-specific units).
    pub slack: f64,
    /// Estimated constant, for the conditions that have one.
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub family: String,
    pub h: f64,
    pub k: f64,
    pub scan_bound: usize,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn get(&self, id: ConditionId) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|c| c.id == id)
            .expect("every condition is reported")
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn any_fail(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    /// The scanned controlled-nuclearity constant `K_{h,k}`.
    pub fn nuclearity_constant(&self) -> f64 {
        self.get(ConditionId::ControlledNuclearity)
            .constant
            .unwrap_or(f64::INFINITY)
    }
}

/// Result of scanning `‖t^j‖_h ≤ K·min(1/j, R(k,j))·‖t^j‖_k` over `j ≤ J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuclearityScan {
    pub constant: f64,
    pub log_constant: f64,
    pub argmax: usize,
    pub verdict: Verdict,
    pub scan_bound: usize,
}

/// Smallest `K` with `‖t^j‖_h ≤ K·min(1/j, R(k,j))·‖t^j‖_k` for `j ≤ J`.
///
/// At `j = 0` the `1/j` term is infinite and only `R(k, 0)` binds. The scan
/// fails when the maximum sits in the last tenth of the scan and grew by a
/// factor of at least 1.5 over the second half; it is inconclusive when the
/// maximum sits there without that growth.
pub fn nuclearity_scan(family: &NormFamily, h: f64, k: f64, scan_bound: usize) -> Result<NuclearityScan> {
    check_levels(h, k)?;
    let lh = log_norms(family, h, scan_bound)?;
    let lk = log_norms(family, k, scan_bound + 1)?;
    Ok(nuclearity_from_logs(&lh, &lk, scan_bound))
}

fn nuclearity_from_logs(lh: &[f64], lk: &[f64], scan_bound: usize) -> NuclearityScan {
    let log_k: Vec<f64> = (0..=scan_bound)
        .map(|j| {
            let log_r = lk[j + 1] - lk[j];
            let log_min = if j == 0 { log_r } else { log_r.min(-(j as f64).ln()) };
            lh[j] - lk[j] - log_min
        })
        .collect();
    let (argmax, &max) = log_k.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let edge = scan_bound - scan_bound / 10;
    let verdict = if argmax >= edge && scan_bound >= 2 {
        if log_k[scan_bound] - log_k[scan_bound / 2] >= NUCLEARITY_GROWTH.ln() {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    } else {
        Verdict::Pass
    };
    NuclearityScan {
        constant: max.exp(),
        log_constant: max,
        argmax,
        verdict,
        scan_bound,
    }
}

fn check_levels(h: f64, k: f64) -> Result<()> {
    if h >= k {
        return Err(Error::Ordering {
            lower_name: "h",
            upper_name: "k",
            lower: h,
            upper: k,
        });
    }
    Ok(())
}

fn log_norms(family: &NormFamily, h: f64, upto: usize) -> Result<Vec<f64>> {
    (0..=upto).map(|j| family.log_norm(h, j)).collect()
}

/// Scans the six conditions at level `h` (nuclearity between `h < k`).
pub fn check_conditions(family: &NormFamily, h: f64, k: f64, scan_bound: usize) -> Result<ConditionReport> {
    check_levels(h, k)?;
    if scan_bound < 2 {
        return Err(Error::usage(format!("scan bound J must be >= 2, got {scan_bound}")));
    }
    if scan_bound + 1 > family.max_index() {
        return Err(Error::usage(format!(
            "scan bound J = {scan_bound} needs indices up to {} but the family stops at {}",
            scan_bound + 1,
            family.max_index()
        )));
    }
    let lh = log_norms(family, h, scan_bound + 1)?;
    let lk = log_norms(family, k, scan_bound + 1)?;

    let nuclearity = nuclearity_from_logs(&lh, &lk, scan_bound);
    let checks = vec![
        submultiplicativity(&lh, scan_bound),
        normalization(&lh, scan_bound),
        locality(&lh, scan_bound),
        ConditionCheck {
            id: ConditionId::ControlledNuclearity,
            verdict: nuclearity.verdict,
            witness: (nuclearity.verdict != Verdict::Pass).then_some(Witness::Index { j: nuclearity.argmax }),
            slack: nuclearity.log_constant,
            constant: Some(nuclearity.constant),
        },
        subharmonicity(family, h, k, scan_bound)?,
        spectral_monotonicity(&lh, scan_bound),
    ];
    Ok(ConditionReport {
        family: family.to_string(),
        h,
        k,
        scan_bound,
        checks,
    })
}

fn submultiplicativity(l: &[f64], scan_bound: usize) -> ConditionCheck {
    let mut slack = f64::INFINITY;
    let mut witness = None;
    for j in 0..=scan_bound {
        for m in j..=(scan_bound - j) {
            let margin = l[j] + l[m] - l[j + m];
            slack = slack.min(margin);
            if witness.is_none() && margin < -LOG_SLACK * (1.0 + l[j + m].abs()) {
                witness = Some(Witness::Pair { j, l: m });
            }
        }
    }
    verdict_from(ConditionId::Submultiplicativity, witness, slack)
}

fn normalization(l: &[f64], scan_bound: usize) -> ConditionCheck {
    // norm bound first, then the ratio bound: the witness is the first
    // index whose norm exceeds one, if any
    let mut slack = f64::INFINITY;
    let mut witness = None;
    for (j, &v) in l.iter().enumerate().take(scan_bound + 1) {
        slack = slack.min(-v);
        if witness.is_none() && v > LOG_SLACK {
            witness = Some(Witness::Index { j });
        }
    }
    for j in 0..=scan_bound {
        let log_r = l[j + 1] - l[j];
        slack = slack.min(-log_r);
        if witness.is_none() && log_r > LOG_SLACK * (1.0 + l[j + 1].abs()) {
            witness = Some(Witness::Index { j });
        }
    }
    verdict_from(ConditionId::Normalization, witness, slack)
}

fn locality(l: &[f64], scan_bound: usize) -> ConditionCheck {
    let log_r: Vec<f64> = (0..=scan_bound).map(|j| l[j + 1] - l[j]).collect();
    let nonmonotone = (0..scan_bound).find(|&j| log_r[j + 1] > log_r[j] + LOG_SLACK * (1.0 + log_r[j].abs()));
    let tail = log_r[scan_bound];
    let slack = LOCALITY_THRESHOLD.ln() - tail;
    let verdict = if nonmonotone.is_none() && slack > 0.0 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    ConditionCheck {
        id: ConditionId::Locality,
        verdict,
        witness: nonmonotone
            .map(|j| Witness::Index { j: j + 1 })
            .or((slack <= 0.0).then_some(Witness::Index { j: scan_bound })),
        slack,
        constant: Some(tail.exp()),
    }
}

/// Levels sampled for the subharmonicity check: an even grid on `(0, k]`
/// together with `h`, `k` and, for tables, the listed levels.
fn level_grid(family: &NormFamily, h: f64, k: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=LEVEL_GRID).map(|i| k * i as f64 / LEVEL_GRID as f64).collect();
    grid.push(h);
    if let super::FamilyKind::Tabulated(t) = family.kind() {
        grid.extend(t.levels().iter().copied().filter(|&l| l <= k));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn subharmonicity(family: &NormFamily, h: f64, k: f64, scan_bound: usize) -> Result<ConditionCheck> {
    let mut slack = f64::INFINITY;
    let mut witness = None;
    let mut sampled = 0usize;
    for level in level_grid(family, h, k) {
        for j in 0..=scan_bound {
            let jet = match family.log_norm_jet(level, j) {
                Ok(jet) => jet,
                Err(Error::Domain { .. }) => continue,
                Err(e) => return Err(e),
            };
            sampled += 1;
            // -(log N)'' - (log N)'/h, with log N = 2ℓ; the common factor 2
            // is dropped
            let raw = -jet.d2 - jet.d1 / level;
            let normalized = raw / (1.0 + jet.d2.abs() + jet.d1.abs() / level);
            if normalized < slack {
                slack = normalized;
            }
            if witness.is_none() && normalized < -SUBHARMONIC_TOL {
                witness = Some(Witness::LevelIndex { h: level, j });
            }
        }
    }
    if sampled == 0 {
        return Ok(ConditionCheck {
            id: ConditionId::Subharmonicity,
            verdict: Verdict::Inconclusive,
            witness: None,
            slack: f64::NAN,
            constant: None,
        });
    }
    Ok(verdict_from(ConditionId::Subharmonicity, witness, slack))
}

fn spectral_monotonicity(l: &[f64], scan_bound: usize) -> ConditionCheck {
    let mut slack = f64::INFINITY;
    let mut witness = None;
    for n in 2..=scan_bound {
        let prev = l[n - 1] / (n - 1) as f64;
        let cur = l[n] / n as f64;
        slack = slack.min(prev - cur);
        if witness.is_none() && cur > prev {
            witness = Some(Witness::Index { j: n });
        }
    }
    verdict_from(ConditionId::SpectralMonotonicity, witness, slack)
}

fn verdict_from(id: ConditionId, witness: Option<Witness>, slack: f64) -> ConditionCheck {
    ConditionCheck {
        id,
        verdict: if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        witness,
        slack,
        constant: None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{NormFamily, NormTable};
    use super::*;

    #[test]
    fn factorial_passes_everything() {
        let r = check_conditions(&NormFamily::factorial(), 0.5, 0.9, 200).unwrap();
        for c in &r.checks {
            assert_eq!(c.verdict, Verdict::Pass, "{:?}", c);
        }
        assert_eq!(r.scan_bound, 200);
    }

    #[test]
    fn factorial_nuclearity_constant_matches_finite_scan() {
        // oracle: K = max_j (h/k)^j / min(1/j, k/(j+1)), with min = k at j = 0
        let (h, k) = (0.5f64, 0.9f64);
        let mut oracle: f64 = 0.0;
        for j in 0..=200usize {
            let jf = j as f64;
            let min = if j == 0 { k } else { (1.0 / jf).min(k / (jf + 1.0)) };
            oracle = oracle.max((h / k).powi(j as i32) / min);
        }
        let r = check_conditions(&NormFamily::factorial(), h, k, 200).unwrap();
        let got = r.nuclearity_constant();
        assert!((got - oracle).abs() <= 1e-12 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn factorial_above_one_fails_normalization_at_one() {
        let r = check_conditions(&NormFamily::factorial(), 2.0, 3.0, 10).unwrap();
        let c = r.get(ConditionId::Normalization);
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.witness, Some(Witness::Index { j: 1 }));
        assert!(r.any_fail());
    }

    #[test]
    fn example_one_with_gamma_one() {
        let f = NormFamily::power_factorial(1.0).unwrap();
        let r = check_conditions(&f, 0.5, 0.8, 200).unwrap();
        assert!(r.all_pass(), "{:#?}", r.checks);
    }

    #[test]
    fn errors() {
        let f = NormFamily::factorial();
        assert!(matches!(
            check_conditions(&f, 0.9, 0.5, 10),
            Err(Error::Ordering { .. })
        ));
        assert!(matches!(
            check_conditions(&f, 0.5, 0.5, 10),
            Err(Error::Ordering { .. })
        ));
        assert!(matches!(check_conditions(&f, 0.5, 0.9, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn level_independent_table_fails_nuclearity() {
        // ‖t^j‖ = 1/j! at every level: K_j = max(j, (j+1)) grows linearly
        let norms: Vec<f64> = (0..=60)
            .map(|j| (-statrs::function::factorial::ln_factorial(j)).exp())
            .collect();
        let t = NormTable::new(vec![(0.2, norms.clone()), (1.0, norms)]).unwrap();
        let f = NormFamily::tabulated(t);
        let r = check_conditions(&f, 0.4, 0.9, 50).unwrap();
        assert_eq!(r.get(ConditionId::ControlledNuclearity).verdict, Verdict::Fail);
    }

    #[test]
    fn geometric_family_locality_is_inconclusive() {
        // germs of holomorphic functions: ‖t^j‖_h = h^j, R = h constant
        let rows = [0.2, 0.5, 1.0]
            .iter()
            .map(|&h: &f64| (h, (0..=40).map(|j| h.powi(j)).collect()))
            .collect();
        let f = NormFamily::tabulated(NormTable::new(rows).unwrap());
        let r = check_conditions(&f, 0.5, 0.9, 30).unwrap();
        assert_eq!(r.get(ConditionId::Locality).verdict, Verdict::Inconclusive);
        assert_eq!(r.get(ConditionId::Submultiplicativity).verdict, Verdict::Pass);
    }

    #[test]
    fn convex_kink_in_table_fails_subharmonicity() {
        // log-norm convex in log h at the middle level
        let lo: Vec<f64> = vec![1.0, 0.1, 0.01, 0.001];
        let mid: Vec<f64> = vec![1.0, 0.15, 0.02, 0.002];
        let hi: Vec<f64> = vec![1.0, 0.9, 0.8, 0.7];
        let t = NormTable::new(vec![(0.25, lo), (0.5, mid), (1.0, hi)]).unwrap();
        let r = check_conditions(&NormFamily::tabulated(t), 0.3, 0.9, 2).unwrap();
        let c = r.get(ConditionId::Subharmonicity);
        assert_eq!(c.verdict, Verdict::Fail);
        assert!(matches!(c.witness, Some(Witness::LevelIndex { h, .. }) if h == 0.5));
    }

    #[test]
    fn nuclearity_scan_errors_on_order() {
        assert!(nuclearity_scan(&NormFamily::factorial(), 0.9, 0.5, 10).is_err());
    }
    #[test]
    fn double_exponential_needs_k_at_least_gamma_h() {
        // log(‖t^j‖_h / (R(k,j)‖t^j‖_k)) = γ^j(γ/k − 1/h) + 1/h + log(j+1):
        // bounded in j iff k ≥ γh.
        let fam = NormFamily::double_exp_factorial(2.0).unwrap();
        let exponent = |h: f64, k: f64, j: i32| 2f64.powi(j) * (2.0 / k - 1.0 / h) + 1.0 / h + ((j + 1) as f64).ln();
        assert!(exponent(0.5, 0.9, 60) > exponent(0.5, 0.9, 30));
        assert!(exponent(0.4, 0.9, 60) < exponent(0.4, 0.9, 30));
        let close = check_conditions(&fam, 0.5, 0.9, 200).unwrap();
        assert_eq!(close.get(ConditionId::ControlledNuclearity).verdict, Verdict::Fail);
        let wide = check_conditions(&fam, 0.4, 0.9, 200).unwrap();
        assert_eq!(wide.get(ConditionId::ControlledNuclearity).verdict, Verdict::Pass);
    }
}
