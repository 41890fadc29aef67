//! Configuration, dispatch and CSV/JSON reporting behind the `wdvr` binary.
//!
//! Every subcommand produces report rows with the fixed columns
//! `check_id, verdict, witness, slack, scan_bound`, written to
//! `<out-dir>/<subcommand>.csv` and mirrored with extra detail in
//! `<out-dir>/<subcommand>.json`.

mod config;
pub mod suite;

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

pub use config::{load_config, parse_config_text, FieldFormat, RunConfig, Subcommand, DEFAULT_SEED, KEYS, SEED_ENV};

use crate::approximation::{approximate_section, NestedBlocks, Section};
use crate::dbar::{solve_dbar, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::{GridBlock, GridSeriesField};
use crate::level::{check_h_condition, check_psh, radial_grid, LevelFunction, DEFAULT_PSH_TOL};
use crate::norm_family::{check_conditions, FamilyParams, NormFamily, Verdict};
use crate::series::TruncatedSeries;
use crate::weierstrass::{coordinate_change, t_regularize, weierstrass_divide, PolySeries, DEFAULT_MAGNITUDE};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Nodal `|∂̄u − ω|` above this marks a dbar solve as infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-3;

const REGULARIZE_TRIALS: usize = 32;

/// One line of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub check_id: String,
    pub verdict: Verdict,
    pub witness: String,
    pub slack: f64,
    pub scan_bound: Option<usize>,
}

impl ReportRow {
    pub fn new(check_id: impl Into<String>, verdict: Verdict, witness: impl Into<String>, slack: f64) -> Self {
        ReportRow {
            check_id: check_id.into(),
            verdict,
            witness: witness.into(),
            slack,
            scan_bound: None,
        }
    }

    fn pass_if(check_id: impl Into<String>, ok: bool, witness: impl Into<String>, slack: f64) -> Self {
        Self::new(check_id, if ok { Verdict::Pass } else { Verdict::Fail }, witness, slack)
    }
}

/// Rows plus the subcommand-specific JSON detail.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub subcommand: Subcommand,
    pub rows: Vec<ReportRow>,
    pub details: serde_json::Value,
}

impl Outcome {
    /// Exit 1 exactly when some row fails.
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.verdict == Verdict::Fail) {
            EXIT_FAIL
        } else {
            EXIT_PASS
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let value = json!({
            "subcommand": self.subcommand,
            "rows": self.rows,
            "details": self.details,
        });
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    /// Writes `<name>.csv` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.csv", self.subcommand)), self.to_csv()?)?;
        fs::write(dir.join(format!("{}.json", self.subcommand)), self.to_json()?)?;
        Ok(())
    }
}

/// Exit code for a run that ended in an error.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Solver { .. }
        | Error::DivisionConvergence { .. }
        | Error::DivisionSetup(_)
        | Error::NeumannDivergence { .. }
        | Error::Regularization { .. }
        | Error::Approximation { .. } => EXIT_SOLVER,
        _ => EXIT_USAGE,
    }
}

/// Runs the configured subcommand and writes its reports and artifacts.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let outcome = match config.subcommand {
        Subcommand::ValidateFamily => validate_family(config)?,
        Subcommand::Divide => divide(config)?,
        Subcommand::Dbar => dbar(config)?,
        Subcommand::PshCheck => psh(config)?,
        Subcommand::Approx => approx(config)?,
        Subcommand::Suite => suite::run_suite(config.seed)?.into_outcome(),
    };
    outcome.write(&config.out_dir)?;
    Ok(outcome)
}

pub fn family_of(config: &RunConfig) -> Result<NormFamily> {
    NormFamily::from_id(
        &config.family,
        FamilyParams {
            gamma: config.gamma,
            kexp: config.kexp,
        },
    )
}

pub fn level_of(config: &RunConfig) -> Result<LevelFunction> {
    LevelFunction::from_id(&config.level_fn)?.scaled(config.level_scale)
}

fn validate_family(config: &RunConfig) -> Result<Outcome> {
    let family = family_of(config)?;
    let report = check_conditions(&family, config.h, config.k, config.scan_bound)?;
    let rows = report
        .checks
        .iter()
        .map(|c| ReportRow {
            check_id: c.id.to_string(),
            verdict: c.verdict,
            witness: c.witness.map(|w| w.to_string()).unwrap_or_default(),
            slack: c.slack,
            scan_bound: Some(report.scan_bound),
        })
        .collect();
    Ok(Outcome {
        subcommand: Subcommand::ValidateFamily,
        rows,
        details: serde_json::to_value(&report)?,
    })
}

fn read_poly(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::usage(format!("cannot read `{}`: {e}", path.display())))
}

fn divide(config: &RunConfig) -> Result<Outcome> {
    let (f_path, g_path) = match (&config.f, &config.g) {
        (Some(f), Some(g)) => (f, g),
        _ => return Err(Error::usage("divide needs both `f` and `g` series files")),
    };
    let f_text = read_poly(f_path)?;
    let g_text = read_poly(g_path)?;
    let f0 = PolySeries::from_text(&f_text, None)?;
    let g0 = PolySeries::from_text(&g_text, None)?;
    if f0.n() != g0.n() {
        return Err(Error::DimensionMismatch {
            expected: g0.n(),
            got: f0.n(),
        });
    }
    let file_caps = (f0.x_cap().max(g0.x_cap()), f0.t_cap().max(g0.t_cap()));
    let caps = (
        config.x_cap.unwrap_or(file_caps.0).max(file_caps.0),
        config.t_cap.unwrap_or(file_caps.1).max(file_caps.1),
    );
    let mut f = f0.with_caps(caps.0, caps.1);
    let mut g = g0.with_caps(caps.0, caps.1);

    let mut change = None;
    if g.t_order().is_none() {
        let reg = t_regularize(&g, REGULARIZE_TRIALS, DEFAULT_MAGNITUDE, config.seed)?;
        let t_cap = reg.series.t_cap();
        f = coordinate_change(&f.with_caps(caps.0, t_cap), &reg.c)?.series;
        g = reg.series.clone();
        change = Some(reg.c.clone());
    }

    let family = family_of(config)?;
    let rho = config.rho.clone().unwrap_or_else(|| vec![0.5; f.n()]);
    let tol = config.tol.unwrap_or(crate::weierstrass::DEFAULT_TOL);
    let max_iter = config.max_iter.unwrap_or(crate::weierstrass::DEFAULT_MAX_ITER);
    fs::create_dir_all(&config.out_dir)?;
    let result = match weierstrass_divide(&f, &g, &family, config.h, &rho, tol, max_iter) {
        Ok(d) => d,
        Err(Error::DivisionConvergence {
            iterations,
            residual,
            partial,
        }) => {
            fs::write(config.out_dir.join("q.partial.txt"), partial.q.to_text())?;
            fs::write(config.out_dir.join("r.partial.txt"), partial.r.to_text())?;
            let report = json!({ "partial": partial.summary(), "coordinate_change": change, "seed": config.seed });
            fs::write(
                config.out_dir.join("divide.json"),
                serde_json::to_string_pretty(&report)? + "\n",
            )?;
            return Err(Error::DivisionConvergence {
                iterations,
                residual,
                partial,
            });
        }
        Err(e) => return Err(e),
    };
    fs::write(config.out_dir.join("q.txt"), result.q.to_text())?;
    fs::write(config.out_dir.join("r.txt"), result.r.to_text())?;

    let shape_ok = result.r.terms().iter().all(|(_, i, _)| *i < result.order);
    let ratios_ok = result
        .step_ratios
        .iter()
        .all(|r| *r <= result.certified_epsilon * (1.0 + 1e-12));
    let rows = vec![
        ReportRow::pass_if("residual", result.residual <= tol, "", tol - result.residual),
        ReportRow::pass_if(
            "contraction",
            ratios_ok && result.certified_epsilon < 1.0,
            format!("iterations={}", result.iterations),
            result.certified_epsilon - result.contraction,
        ),
        ReportRow::pass_if("remainder_shape", shape_ok, format!("b={}", result.order), 0.0),
    ];
    Ok(Outcome {
        subcommand: Subcommand::Divide,
        rows,
        details: json!({ "division": result.summary(), "coordinate_change": change, "seed": config.seed }),
    })
}

fn omega_field(config: &RunConfig) -> Result<GridSeriesField> {
    let block = config.block;
    let trunc = config.trunc;
    match config.omega.as_str() {
        "zero" => Ok(GridSeriesField::zeros(block, trunc)),
        "one" => GridSeriesField::from_fn(block, trunc, |_| vec![Complex64::new(1.0, 0.0); trunc + 1]),
        path => {
            let p = Path::new(path);
            if p.extension().is_some_and(|e| e == "bin") {
                GridSeriesField::from_bytes(&fs::read(p)?, block, trunc)
            } else {
                GridSeriesField::from_text(&fs::read_to_string(p)?, block, trunc)
            }
        }
    }
}

fn dbar(config: &RunConfig) -> Result<Outcome> {
    let family = family_of(config)?;
    let level = level_of(config)?;
    let omega = omega_field(config)?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        tol: config.tol.unwrap_or(defaults.tol),
        max_iter: config.max_iter.unwrap_or(defaults.max_iter),
    };
    let (u, report) = solve_dbar(&omega, &family, &level, &opts)?;
    fs::create_dir_all(&config.out_dir)?;
    match config.format {
        FieldFormat::Text => fs::write(config.out_dir.join("u.txt"), u.to_text())?,
        FieldFormat::Binary => fs::write(config.out_dir.join("u.bin"), u.to_bytes())?,
    }

    let mut rows = Vec::new();
    for c in &report.components {
        rows.push(ReportRow::pass_if(
            format!("residual_j{}", c.j),
            c.residual <= FEASIBILITY_TOL,
            format!("iterations={}", c.iterations),
            FEASIBILITY_TOL - c.residual,
        ));
        rows.push(ReportRow::new(format!("psh_j{}", c.j), c.psh, "", 0.0));
        let bound = if report.bound_informational {
            Verdict::Inconclusive
        } else if c.bound_holds {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        rows.push(ReportRow::new(
            format!("bound_j{}", c.j),
            bound,
            "",
            1.0 - c.bound_ratio,
        ));
    }
    let estimate = if report.bound_informational {
        Verdict::Inconclusive
    } else {
        report.estimate.verdict
    };
    rows.push(ReportRow::new(
        "estimate",
        estimate,
        format!("c={}", report.estimate.c),
        1.0 - report.estimate.ratio,
    ));
    Ok(Outcome {
        subcommand: Subcommand::Dbar,
        rows,
        details: serde_json::to_value(&report)?,
    })
}

fn psh(config: &RunConfig) -> Result<Outcome> {
    let family = family_of(config)?;
    let level = level_of(config)?;
    let block = config.block;
    let tol = config.tol.unwrap_or(DEFAULT_PSH_TOL);
    let h_report = check_h_condition(&level, &radial_grid(block.max_modulus(), 4 * block.n));
    let mut rows = vec![ReportRow::new(
        "h_condition",
        h_report.verdict,
        h_report.first_violation.map(|r| format!("r={r:e}")).unwrap_or_default(),
        h_report.min_slack,
    )];
    let mut reports = Vec::new();
    for j in 0..=config.j_max {
        let p = check_psh(&family, &level, j, &block, tol)?;
        let (slack, witness) = if p.radial_min_slack <= p.laplacian_min_slack {
            (p.radial_min_slack, format!("r={:e}", p.radial_argmin_r))
        } else {
            (
                p.laplacian_min_slack,
                format!("z={:e}{:+e}i", p.laplacian_argmin.0, p.laplacian_argmin.1),
            )
        };
        rows.push(ReportRow::new(format!("psh_j{j}"), p.verdict, witness, slack));
        reports.push(p);
    }
    Ok(Outcome {
        subcommand: Subcommand::PshCheck,
        rows,
        details: json!({ "h_condition": h_report, "psh": reports }),
    })
}

/// `exp`: `e^z` in the constant coefficient. `geometric`: `Σ 2^{-j} t^j`,
/// constant in `z`. Anything else is a grid-field text file on the outer
/// block.
fn approx(config: &RunConfig) -> Result<Outcome> {
    let family = family_of(config)?;
    let level = level_of(config)?;
    let blocks = NestedBlocks::exhaustion(config.blocks, config.block_step, config.block.n)?;
    let trunc = config.trunc;
    let exp = move |z: Complex64| {
        let mut c = vec![Complex64::new(0.0, 0.0); trunc + 1];
        c[0] = z.exp();
        TruncatedSeries::new(c)
    };
    let geometric = move |_: Complex64| {
        TruncatedSeries::new(
            (0..=trunc)
                .map(|j| Complex64::new(0.5f64.powi(j as i32), 0.0))
                .collect(),
        )
    };
    let field;
    let section = match config.input.as_deref() {
        None | Some("exp") => Section::Closure(&exp),
        Some("geometric") => Section::Closure(&geometric),
        Some(path) => {
            let outer: GridBlock = blocks.outer();
            field = GridSeriesField::from_text(&fs::read_to_string(path)?, outer, trunc)?;
            Section::Sampled(&field)
        }
    };
    let (g, report) = approximate_section(&section, &family, &level, config.m, config.epsilon, &blocks)?;
    let mut rows = vec![ReportRow::new(
        "tail_cut",
        Verdict::Pass,
        format!("l={}", report.l),
        0.0,
    )];
    for (n, b) in report.blocks.iter().enumerate() {
        rows.push(ReportRow::pass_if(
            format!("block_{}", n + 1),
            b.total < config.epsilon,
            format!("half_width={}", b.half_width),
            config.epsilon - b.total,
        ));
    }
    rows.push(ReportRow::pass_if(
        "outer_block",
        report.outer_finite,
        format!("half_width={}", report.outer_half_width),
        0.0,
    ));
    Ok(Outcome {
        subcommand: Subcommand::Approx,
        rows,
        details: json!({ "report": report, "polynomial": g }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(sub: Subcommand, pairs: &[(&str, &str)], dir: &Path) -> RunConfig {
        let mut kv: Vec<(String, String)> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        kv.push(("out-dir".into(), dir.display().to_string()));
        load_config(sub, None, &kv).unwrap()
    }

    #[test]
    fn factorial_validates() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&config(
            Subcommand::ValidateFamily,
            &[("h", "0.5"), ("k", "0.9")],
            dir.path(),
        ))
        .unwrap();
        assert_eq!(out.rows.len(), 6);
        assert_eq!(out.exit_code(), EXIT_PASS);
        let csv = fs::read_to_string(dir.path().join("validate-family.csv")).unwrap();
        assert!(csv.starts_with("check_id,verdict,witness,slack,scan_bound\n"));
    }

    #[test]
    fn factorial_above_one_fails_normalization() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&config(
            Subcommand::ValidateFamily,
            &[("h", "2"), ("k", "3"), ("J", "10")],
            dir.path(),
        ))
        .unwrap();
        assert_eq!(out.exit_code(), EXIT_FAIL);
        let row = out.rows.iter().find(|r| r.check_id == "normalization").unwrap();
        assert_eq!(row.verdict, Verdict::Fail);
        assert_eq!(row.witness, "j=1");
    }

    #[test]
    fn zero_dbar_problem_passes() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&config(
            Subcommand::Dbar,
            &[("omega", "zero"), ("grid-n", "8"), ("trunc-J", "1")],
            dir.path(),
        ))
        .unwrap();
        assert_eq!(out.exit_code(), EXIT_PASS);
        let u = GridSeriesField::from_text(
            &fs::read_to_string(dir.path().join("u.txt")).unwrap(),
            GridBlock::square(1.0, 8).unwrap(),
            1,
        )
        .unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn solver_errors_map_to_exit_three() {
        let e = Error::Solver {
            iterations: 1,
            residual: 1.0,
            history: vec![],
        };
        assert_eq!(exit_code_for(&e), EXIT_SOLVER);
        assert_eq!(exit_code_for(&Error::usage("x")), EXIT_USAGE);
    }
}
