//! The acceptance battery behind `wdvr suite`: one check per criterion,
//! each returning a pass/fail line with its worst observed margin.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Outcome, ReportRow, Subcommand, FEASIBILITY_TOL};
use crate::approximation::{approximate_section, NestedBlocks, Section};
use crate::dbar::{dense_reference, solve_component, solve_dbar, ComponentWeights, DbarOperator, SolverOptions};
use crate::error::Result;
use crate::grid::{GridBlock, GridSeriesField};
use crate::level::{check_h_condition, check_psh, radial_grid, LevelFunction, DEFAULT_PSH_TOL};
use crate::norm_family::{check_conditions, ConditionId, NormFamily, Verdict, Witness};
use crate::series::{check_embeddings, random_series, TruncatedSeries};
use crate::weierstrass::{random_instance, weierstrass_divide, PolySeries, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Condition-suite scan bound.
pub const SUITE_SCAN_BOUND: usize = 200;
/// Base levels, scaled by each family's level bound.
pub const SUITE_LEVELS: (f64, f64) = (0.5, 0.9);

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Worst margin over the criterion's checks; negative on failure.
    pub slack: f64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn into_outcome(self) -> Outcome {
        let rows = self
            .criteria
            .iter()
            .map(|c| {
                ReportRow::new(
                    format!("criterion_{}_{}", c.id, c.name),
                    if c.passed { Verdict::Pass } else { Verdict::Fail },
                    c.detail.clone(),
                    c.slack,
                )
            })
            .collect();
        Outcome {
            subcommand: Subcommand::Suite,
            rows,
            details: serde_json::to_value(&self).expect("suite report serializes"),
        }
    }
}

pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let criteria = vec![
        condition_suite()?,
        eps_monotonicity()?,
        ring_properties(seed)?,
        weierstrass_division(seed)?,
        level_criterion()?,
        plurisubharmonicity()?,
        dbar_solver()?,
        embeddings(seed)?,
        approximation()?,
    ];
    Ok(SuiteReport { seed, criteria })
}

/// Families (factorial, i, iv, v) with their default parameters.
pub fn suite_families() -> Vec<NormFamily> {
    vec![
        NormFamily::factorial(),
        NormFamily::power_factorial(1.5).expect("valid default"),
        NormFamily::exp_factorial(1.0).expect("valid default"),
        NormFamily::double_exp_factorial(2.0).expect("valid default"),
    ]
}

pub fn suite_level_pair(family: &NormFamily) -> (f64, f64) {
    let s = family.level_bound();
    (SUITE_LEVELS.0 * s, SUITE_LEVELS.1 * s)
}

fn timed<F>(id: usize, name: &'static str, f: F) -> Result<CriterionResult>
where
    F: FnOnce() -> Result<(bool, String, f64)>,
{
    let start = Instant::now();
    let (passed, detail, slack) = f()?;
    Ok(CriterionResult {
        id,
        name,
        passed,
        detail,
        slack,
        elapsed: start.elapsed(),
    })
}

fn with_deadline(mut c: CriterionResult, limit: Duration) -> CriterionResult {
    if c.elapsed >= limit {
        c.passed = false;
        c.detail = format!("{} (over the {} s budget)", c.detail, limit.as_secs());
    }
    c
}

/// Criterion 1: all six checks pass for the suite families at
/// `(0.5, 0.9)·S`, `J = 200`, and factorial at `h = 2` fails
/// normalization at `j = 1`.
pub fn condition_suite() -> Result<CriterionResult> {
    let c = timed(1, "condition_suite", || {
        let mut ok = true;
        let mut slack = f64::INFINITY;
        let mut failures = Vec::new();
        for family in suite_families() {
            let (h, k) = suite_level_pair(&family);
            let report = check_conditions(&family, h, k, SUITE_SCAN_BOUND)?;
            for check in &report.checks {
                if check.verdict != Verdict::Pass {
                    ok = false;
                    failures.push(format!("{family}:{}", check.id));
                }
                slack = slack.min(check.slack);
            }
        }
        let bad = check_conditions(&NormFamily::factorial(), 2.0, 3.0, 10)?;
        let norm = bad.get(ConditionId::Normalization);
        let witness_ok = norm.verdict == Verdict::Fail && norm.witness == Some(Witness::Index { j: 1 });
        ok &= witness_ok;
        let detail = if failures.is_empty() {
            format!("4 families pass; factorial h=2 normalization witness_ok={witness_ok}")
        } else {
            format!("failed: {}", failures.join(" "))
        };
        Ok((ok, detail, slack))
    })?;
    Ok(with_deadline(c, Duration::from_secs(10)))
}

/// Criterion 2: `ε_n` is nonincreasing for `n ≤ 200` at both suite levels
/// of every suite family, compared exactly.
pub fn eps_monotonicity() -> Result<CriterionResult> {
    timed(2, "eps_monotonicity", || {
        let mut violations = 0;
        let mut slack = f64::INFINITY;
        for family in suite_families() {
            let (h, k) = suite_level_pair(&family);
            for level in [h, k] {
                let eps: Vec<f64> = (1..=SUITE_SCAN_BOUND)
                    .map(|n| family.spectral_eps(level, n))
                    .collect::<Result<_>>()?;
                for w in eps.windows(2) {
                    if w[1] > w[0] {
                        violations += 1;
                    }
                    slack = slack.min(w[0] - w[1]);
                }
            }
        }
        Ok((violations == 0, format!("violations={violations}"), slack))
    })
}

/// Criterion 3: submultiplicativity over 1000 random pairs (trunc 50),
/// exact `t`-division round trip, inversion residual `≤ 1e-12`.
pub fn ring_properties(seed: u64) -> Result<CriterionResult> {
    timed(3, "ring_properties", || {
        let family = NormFamily::factorial();
        let h = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0;
        let mut round_trip_failures = 0;
        let mut worst_inverse: f64 = 0.0;
        let mut slack = f64::INFINITY;
        for _ in 0..1000 {
            let a = random_series(&mut rng, 50);
            let b = random_series(&mut rng, 50);
            let lhs = a.multiply(&b).norm(&family, h)?;
            let rhs = a.norm(&family, h)? * b.norm(&family, h)?;
            if lhs > rhs {
                violations += 1;
            }
            slack = slack.min(1.0 - lhs / rhs);

            let mut s = random_series(&mut rng, 50);
            s.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
            let q = s.t_divide(&family, 0.9, h)?.quotient;
            if &q.with_trunc(50) * &TruncatedSeries::monomial(1, 50) != s {
                round_trip_failures += 1;
            }

            let mut u = random_series(&mut rng, 50).scale(Complex64::new(0.1, 0.0));
            u.coeffs_mut()[0] = Complex64::new(1.0, 0.0) + Complex64::new(rng.gen_range(-0.1..0.1), 0.0);
            let inv = u.invert(&family, h, 1e-15)?;
            let residual = (&u.multiply(&inv) - &TruncatedSeries::one(50)).norm(&family, h)?;
            worst_inverse = worst_inverse.max(residual);
        }
        let ok = violations == 0 && round_trip_failures == 0 && worst_inverse <= 1e-12;
        Ok((
            ok,
            format!(
                "submult_violations={violations} round_trip_failures={round_trip_failures} inverse_residual={worst_inverse:e}"
            ),
            slack.min(1e-12 - worst_inverse),
        ))
    })
}

fn poly1(terms: &[(usize, usize, f64)], x_cap: usize, t_cap: usize) -> Result<PolySeries> {
    let terms: Vec<(Vec<usize>, usize, Complex64)> = terms
        .iter()
        .map(|&(a, i, c)| (vec![a], i, Complex64::new(c, 0.0)))
        .collect();
    PolySeries::from_terms(1, x_cap, t_cap, &terms)
}

/// Criterion 4: the three worked divisions to `1e-12`, then 100 random
/// instances (`n ≤ 2`, `b ≤ 3`) to `1e-10` with every step ratio under the
/// certified `ε < 1`, within 60 s.
pub fn weierstrass_division(seed: u64) -> Result<CriterionResult> {
    let c = timed(4, "weierstrass_division", || {
        let family = NormFamily::factorial();
        let h = 0.5;
        let pure_t = |c: &[f64]| {
            let terms: Vec<(Vec<usize>, usize, Complex64)> = c
                .iter()
                .enumerate()
                .map(|(i, &v)| (vec![], i, Complex64::new(v, 0.0)))
                .collect();
            PolySeries::from_terms(0, 0, 3, &terms)
        };
        let g_line = poly1(&[(0, 1, 1.0), (1, 0, -1.0)], 3, 3)?;
        let examples = [
            (pure_t(&[3.0, 5.0, 7.0, 1.0])?, pure_t(&[0.0, 0.0, 1.0])?, vec![]),
            (poly1(&[(0, 1, 1.0)], 3, 3)?, g_line.clone(), vec![0.25]),
            (poly1(&[(0, 2, 1.0)], 3, 3)?, g_line, vec![0.25]),
        ];
        let mut worst_example: f64 = 0.0;
        for (f, g, rho) in &examples {
            let d = weierstrass_divide(f, g, &family, h, rho, 1e-12, DEFAULT_MAX_ITER)?;
            worst_example = worst_example.max(d.residual);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instances: Vec<(usize, usize, PolySeries, PolySeries)> = (0..100)
            .map(|i| {
                let n = i % 3;
                let b = 1 + (i / 3) % 3;
                let (f, g) = random_instance(&mut rng, n, b, 3, 6, 0.3);
                (n, b, f, g)
            })
            .collect();
        let results = instances
            .par_iter()
            .map(|(n, _, f, g)| weierstrass_divide(f, g, &family, h, &vec![0.5; *n], DEFAULT_TOL, DEFAULT_MAX_ITER))
            .collect::<Result<Vec<_>>>()?;
        let mut worst_residual: f64 = 0.0;
        let mut worst_margin = f64::INFINITY;
        let mut ok = worst_example <= 1e-12;
        for ((_, b, _, _), d) in instances.iter().zip(&results) {
            worst_residual = worst_residual.max(d.residual);
            ok &= d.residual <= DEFAULT_TOL && d.certified_epsilon < 1.0 && d.order == *b;
            ok &= d.r.terms().iter().all(|(_, i, _)| i < b);
            for r in &d.step_ratios {
                ok &= *r <= d.certified_epsilon;
                worst_margin = worst_margin.min(d.certified_epsilon - r);
            }
        }
        Ok((
            ok,
            format!("example_residual={worst_example:e} random_residual={worst_residual:e}"),
            worst_margin,
        ))
    })?;
    Ok(with_deadline(c, Duration::from_secs(60)))
}

/// Levels built from a rate `H`, used to test that the level criterion
/// agrees with `H' ≥ 0` node by node.
pub fn rate_levels() -> Result<Vec<LevelFunction>> {
    Ok(vec![
        LevelFunction::from_rate("linear-rate:1,0.5", |r| 1.0 + 0.5 * r, 4.0, 1e-3)?,
        LevelFunction::from_rate("linear-rate:2,-0.25", |r| 2.0 - 0.25 * r, 4.0, 1e-3)?,
        LevelFunction::from_rate("wavy-rate", |r| 1.0 + 0.5 * (3.0 * r).sin(), 4.0, 1e-3)?,
        LevelFunction::from_rate("quadratic-rate", |r| r * r, 4.0, 1e-3)?,
    ])
}

/// Criterion 5: `e^{-r}` and `e^{-r²}` pass, `1/(1+r)` fails, and the
/// verdict of every rate-built level matches `H' ≥ 0` at each node.
pub fn level_criterion() -> Result<CriterionResult> {
    timed(5, "level_criterion", || {
        let grid = radial_grid(4.0, 400);
        let exp = check_h_condition(&LevelFunction::exp_decay(), &grid);
        let gauss = check_h_condition(&LevelFunction::gaussian(), &grid);
        let recip = check_h_condition(&LevelFunction::reciprocal(), &grid);
        let mut ok = exp.verdict == Verdict::Pass && gauss.verdict == Verdict::Pass && recip.verdict == Verdict::Fail;
        let mut mismatches = 0;
        for level in rate_levels()? {
            let rep = check_h_condition(&level, &grid);
            mismatches += rep.mismatches.len();
            ok &= rep.rate_verdict == Some(rep.verdict);
        }
        ok &= mismatches == 0;
        Ok((
            ok,
            format!(
                "exp={} gauss={} reciprocal={} rate_mismatches={mismatches}",
                exp.verdict, gauss.verdict, recip.verdict
            ),
            exp.min_slack.min(gauss.min_slack),
        ))
    })
}

/// Criterion 6: every (family, level) pair whose family passes
/// subharmonicity and whose level passes the level criterion has
/// `min-slack ≥ −1e-7` for `j ≤ 50` on the punctured 64×64 grid.
pub fn plurisubharmonicity() -> Result<CriterionResult> {
    timed(6, "plurisubharmonicity", || {
        let block = GridBlock::square(1.0, 64)?;
        let grid = radial_grid(block.max_modulus(), 256);
        let levels: Vec<LevelFunction> = [
            LevelFunction::exp_decay(),
            LevelFunction::gaussian(),
            LevelFunction::reciprocal(),
        ]
        .into_iter()
        .filter(|l| check_h_condition(l, &grid).verdict == Verdict::Pass)
        .collect();
        let mut pairs = Vec::new();
        for family in suite_families() {
            let (h, k) = suite_level_pair(&family);
            let sub = check_conditions(&family, h, k, SUITE_SCAN_BOUND)?;
            if sub.get(ConditionId::Subharmonicity).verdict == Verdict::Pass {
                for level in &levels {
                    pairs.push((family.clone(), level.clone()));
                }
            }
        }
        let jobs: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|p| (0..=50).map(move |j| (p, j))).collect();
        let slacks = jobs
            .par_iter()
            .map(|&(p, j)| {
                let rep = check_psh(&pairs[p].0, &pairs[p].1, j, &block, DEFAULT_PSH_TOL)?;
                Ok(rep.radial_min_slack.min(rep.laplacian_min_slack))
            })
            .collect::<Result<Vec<f64>>>()?;
        let worst = slacks.iter().copied().fold(f64::INFINITY, f64::min);
        let bad = slacks.iter().filter(|s| **s < -DEFAULT_PSH_TOL).count();
        Ok((
            bad == 0,
            format!("pairs={} checks={} below_tol={bad}", pairs.len(), slacks.len()),
            worst,
        ))
    })
}

/// Family and level used for the suite's dbar solves.
pub fn dbar_setup() -> (NormFamily, LevelFunction) {
    (NormFamily::factorial(), LevelFunction::exp_decay())
}

/// Criterion 7: feasibility of the `ω ≡ 1` solve on the 64×64 grid, dense
/// agreement on 8×8 for `j ≤ 3`, and the estimate with `c = 9` on every
/// solve, within 120 s.
pub fn dbar_solver() -> Result<CriterionResult> {
    let c = timed(7, "dbar_solver", || {
        let (family, level) = dbar_setup();
        let trunc = 3;
        let one = |_: Complex64| vec![Complex64::new(1.0, 0.0); trunc + 1];

        let big = GridBlock::square(1.0, 64)?;
        let omega = GridSeriesField::from_fn(big, trunc, one)?;
        let (_, report) = solve_dbar(&omega, &family, &level, &SolverOptions::default())?;
        let residual = report.components.iter().map(|c| c.residual).fold(0.0, f64::max);
        let mut estimates_ok = report.estimate.verdict == Verdict::Pass && report.estimate.c == 9.0;
        let mut worst_ratio = report.estimate.ratio;

        let small = GridBlock::square(1.0, 8)?;
        let op = DbarOperator::new(&small);
        let tight = SolverOptions {
            tol: 1e-13,
            max_iter: 10_000,
        };
        let omega_small = GridSeriesField::from_fn(small, trunc, |z| {
            (0..=trunc).map(|j| Complex64::new(1.0, 0.0) + z * j as f64).collect()
        })?;
        let mut worst_gap: f64 = 0.0;
        for j in 0..=trunc {
            let weights = ComponentWeights::new(&family, &level, j, &small)?;
            let rhs = omega_small.component(j);
            let iterative = solve_component(&op, &rhs, &weights, &tight)?.u;
            let dense = dense_reference(&op, &rhs, &weights)?;
            let scale = dense.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
            let gap = iterative
                .iter()
                .zip(&dense)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / scale;
            worst_gap = worst_gap.max(gap);
        }
        let (_, small_report) = solve_dbar(&omega_small, &family, &level, &tight)?;
        estimates_ok &= small_report.estimate.verdict == Verdict::Pass;
        worst_ratio = worst_ratio.max(small_report.estimate.ratio);

        let ok = residual <= FEASIBILITY_TOL && worst_gap <= 1e-8 && estimates_ok;
        Ok((
            ok,
            format!("residual={residual:e} dense_gap={worst_gap:e} estimate_ratio={worst_ratio:e}"),
            1.0 - worst_ratio,
        ))
    })?;
    Ok(with_deadline(c, Duration::from_secs(120)))
}

/// Criterion 8: `ℓ² ≤ ℓ¹` at both levels and the embedding inequality for
/// 1000 random series.
pub fn embeddings(seed: u64) -> Result<CriterionResult> {
    timed(8, "embeddings", || {
        let rep = check_embeddings(1000, &NormFamily::factorial(), 0.4, 1, 50, seed)?;
        Ok((
            rep.passed(),
            format!(
                "upper_violations={} lower_violations={} embedding_violations={}",
                rep.upper_violations, rep.lower_violations, rep.embedding_violations
            ),
            rep.worst_norm_slack.min(rep.worst_embedding_slack),
        ))
    })
}

/// Criterion 9: `e^x` on `[-1, 1]²` with `ε = 1e-3` succeeds on every block
/// and the tail index agrees with the closed-form tail sum to within one.
pub fn approximation() -> Result<CriterionResult> {
    timed(9, "approximation", || {
        let family = NormFamily::factorial();
        let level = LevelFunction::exp_decay().scaled(0.5)?;
        let epsilon = 1e-3;
        let blocks = NestedBlocks::exhaustion(1, 1.0, 64)?;
        let f = |z: Complex64| TruncatedSeries::new(vec![z.exp(), Complex64::new(0.0, 0.0)]);
        let (_, rep) = approximate_section(&Section::Closure(&f), &family, &level, 1, epsilon, &blocks)?;
        // only a_0 is nonzero and sup |e^z| = e, so the tail from 0 is e·‖1‖
        let oracle = if std::f64::consts::E * family.eval_norm(level.eval(1.0) * 2.0, 0)? < epsilon / 2.0 {
            0
        } else {
            1
        };
        let worst = rep.blocks.iter().map(|b| b.total).fold(0.0, f64::max);
        let ok = rep.passed() && rep.l.abs_diff(oracle) <= 1;
        Ok((
            ok,
            format!(
                "l={} oracle_l={oracle} degrees={:?} error={worst:e}",
                rep.l, rep.degrees
            ),
            epsilon - worst,
        ))
    })
}
