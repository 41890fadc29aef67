//! Weighted ∂̄-equation on a block in ℂ, solved component-wise in `t`.
//!
//! For each coefficient `j` the solver returns the least-squares solution of
//! the discrete `∂̄u_j = ω_j` that has minimal weighted norm
//! `Σ |u_j|² e^{−W_j} (1+|z|²)^{−2}·cell area`. Integrals are cell-area sums
//! over all nodes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridBlock, GridSeriesField};
use crate::level::{check_psh, weight_w, LevelFunction, DEFAULT_PSH_TOL};
use crate::norm_family::{NormFamily, Verdict};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Relative residual of the normal equations at which CGLS stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// The discrete `∂̄ = ½(∂_x + i∂_y)` as a sparse row list: centered
/// differences inside, second-order one-sided differences on the edges.
#[derive(Debug, Clone)]
pub struct DbarOperator {
    n: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl DbarOperator {
    pub fn new(block: &GridBlock) -> Self {
        let n = block.n;
        let stencil = |i: usize, step: f64| -> Vec<(usize, f64)> {
            let s = 1.0 / (2.0 * step);
            if i == 0 {
                vec![(0, -3.0 * s), (1, 4.0 * s), (2, -s)]
            } else if i == n - 1 {
                vec![(n - 1, 3.0 * s), (n - 2, -4.0 * s), (n - 3, s)]
            } else {
                vec![(i - 1, -s), (i + 1, s)]
            }
        };
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, 0.5);
        let mut rows = Vec::with_capacity(block.nodes());
        for iy in 0..n {
            for ix in 0..n {
                let mut row = Vec::with_capacity(6);
                for (jx, v) in stencil(ix, block.dx()) {
                    row.push((block.index(jx, iy), half * v));
                }
                for (jy, v) in stencil(iy, block.dy()) {
                    row.push((block.index(ix, jy), half_i * v));
                }
                rows.push(row);
            }
        }
        DbarOperator { n: block.nodes(), rows }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(c, v)| v * u[*c]).sum())
            .collect()
    }

    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (row, yr) in self.rows.iter().zip(y) {
            for (c, v) in row {
                out[*c] += v.conj() * yr;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                m[(r, *c)] += v;
            }
        }
        m
    }
}

/// Discrete `∂̄u`, coefficient by coefficient.
pub fn dbar_apply(u: &GridSeriesField) -> GridSeriesField {
    let op = DbarOperator::new(u.block());
    let mut out = GridSeriesField::zeros(*u.block(), u.trunc());
    for j in 0..=u.trunc() {
        out.set_component(j, &op.apply(&u.component(j)))
            .expect("component shape matches its own block");
    }
    out
}

/// `log` of the solver weight `e^{−W_j}(1+|z|²)^{−2}` and of `e^{−W_j}` at
/// every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentWeights {
    pub j: usize,
    pub log_solver: Vec<f64>,
    pub log_density: Vec<f64>,
}

impl ComponentWeights {
    pub fn new(family: &NormFamily, level: &LevelFunction, j: usize, block: &GridBlock) -> Result<Self> {
        let points = block.points();
        let log_density = points
            .iter()
            .map(|z| weight_w(family, level, j, *z).map(|w| -w))
            .collect::<Result<Vec<_>>>()?;
        let log_solver = points
            .iter()
            .zip(&log_density)
            .map(|(z, d)| d - 2.0 * z.norm_sqr().ln_1p())
            .collect();
        Ok(ComponentWeights {
            j,
            log_solver,
            log_density,
        })
    }

    /// Unit weights, i.e. `W ≡ 0`.
    pub fn flat(j: usize, block: &GridBlock) -> Self {
        let log_solver = block.points().iter().map(|z| -2.0 * z.norm_sqr().ln_1p()).collect();
        ComponentWeights {
            j,
            log_solver,
            log_density: vec![0.0; block.nodes()],
        }
    }
}

/// `Σ |v_k|² e^{w_k}` as `(scaled sum, log scale)` with the largest `w_k`
/// factored out; the cell area is not included.
pub fn log_weighted_sum(values: &[Complex64], log_w: &[f64]) -> (f64, f64) {
    let scale = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (sum_at_scale(values, log_w, scale), scale)
}

/// `Σ |v_k|² e^{w_k − scale}`.
fn sum_at_scale(values: &[Complex64], log_w: &[f64], scale: f64) -> f64 {
    values
        .iter()
        .zip(log_w)
        .map(|(v, w)| v.norm_sqr() * (w - scale).exp())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSolve {
    pub u: Vec<Complex64>,
    pub iterations: usize,
    /// `‖A^H r‖ / ‖A^H ω‖` at exit.
    pub normal_residual: f64,
    pub history: Vec<f64>,
}

/// Minimum weighted-norm least-squares solution of `D u = ω` by CGLS on
/// `A = D·diag(m)^{-1/2}` from a zero start, with `m` the solver weights
/// normalized to maximum one.
pub fn solve_component(
    op: &DbarOperator,
    omega: &[Complex64],
    weights: &ComponentWeights,
    opts: &SolverOptions,
) -> Result<ComponentSolve> {
    let n = op.size();
    if omega.len() != n || weights.log_solver.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: omega.len(),
        });
    }
    let top = weights.log_solver.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // u = s ⊙ y with s = m^{-1/2}
    let s: Vec<f64> = weights.log_solver.iter().map(|w| (-(w - top) / 2.0).exp()).collect();
    let a = |y: &[Complex64]| -> Vec<Complex64> {
        let scaled: Vec<Complex64> = y.iter().zip(&s).map(|(v, w)| v * w).collect();
        op.apply(&scaled)
    };
    let a_h = |r: &[Complex64]| -> Vec<Complex64> { op.apply_adjoint(r).iter().zip(&s).map(|(v, w)| v * w).collect() };
    let norm2 = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();

    let mut y = vec![Complex64::new(0.0, 0.0); n];
    let mut r = omega.to_vec();
    let mut grad = a_h(&r);
    let target = norm2(&grad).sqrt();
    if target == 0.0 {
        return Ok(ComponentSolve {
            u: y,
            iterations: 0,
            normal_residual: 0.0,
            history: Vec::new(),
        });
    }
    let omega_norm = norm2(omega).sqrt();
    let mut p = grad.clone();
    let mut gamma = norm2(&grad);
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let q = a(&p);
        let alpha = gamma / norm2(&q);
        for k in 0..n {
            y[k] += p[k] * alpha;
            r[k] -= q[k] * alpha;
        }
        grad = a_h(&r);
        let gamma_new = norm2(&grad);
        let rel = gamma_new.sqrt() / target;
        history.push(rel);
        if rel <= opts.tol || norm2(&r).sqrt() <= opts.tol * omega_norm {
            let u = y.iter().zip(&s).map(|(v, w)| v * w).collect();
            return Ok(ComponentSolve {
                u,
                iterations: it,
                normal_residual: rel,
                history,
            });
        }
        let beta = gamma_new / gamma;
        for k in 0..n {
            p[k] = grad[k] + p[k] * beta;
        }
        gamma = gamma_new;
    }
    Err(Error::Solver {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Dense reference for small grids: `u = S·pinv(D·S)·ω` with
/// `S = diag(m)^{-1/2}`, singular values below `1e-12·σ_max` dropped.
pub fn dense_reference(op: &DbarOperator, omega: &[Complex64], weights: &ComponentWeights) -> Result<Vec<Complex64>> {
    let n = op.size();
    let top = weights.log_solver.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: Vec<f64> = weights.log_solver.iter().map(|w| (-(w - top) / 2.0).exp()).collect();
    let mut a = op.to_dense();
    for (c, sc) in s.iter().enumerate() {
        for r in 0..n {
            a[(r, c)] *= sc;
        }
    }
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(1e-12 * sigma_max)
        .map_err(|e| Error::precondition(e.to_string()))?;
    let y = pinv * DVector::from_column_slice(omega);
    Ok(y.iter().zip(&s).map(|(v, w)| v * w).collect())
}

/// Particular solution `u(z) = −(1/π) Σ_ζ ω(ζ)/(ζ − z)·cell area`, with the
/// node's own cell left out. First-order accurate; used as a cross-check.
pub fn cauchy_transform(block: &GridBlock, omega: &[Complex64]) -> Vec<Complex64> {
    let points = block.points();
    let weight = block.cell_area() / std::f64::consts::PI;
    points
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, (zeta, w)) in points.iter().zip(omega).enumerate() {
                if k != i {
                    acc += w / (zeta - z);
                }
            }
            -acc * weight
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub j: usize,
    pub iterations: usize,
    pub normal_residual: f64,
    /// `max_k |(∂̄u_j − ω_j)(z_k)|`.
    pub residual: f64,
    /// `Σ |u_j|² e^{−W_j}(1+|z|²)^{−2}·area`, divided by `e^{scale}`.
    pub weighted_u: f64,
    /// `Σ |ω_j|² e^{−W_j}·area`, divided by `e^{scale}`.
    pub weighted_omega: f64,
    pub log_scale: f64,
    /// `weighted_u / weighted_omega`; zero for a zero right-hand side.
    pub bound_ratio: f64,
    pub bound_holds: bool,
    pub psh: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    /// `sup (1+|z|²)²` over the block.
    pub c: f64,
    /// `Σ_j Σ |u_j|² ‖t^j‖²_{h(r)}·area`, divided by `e^{log_scale}`.
    pub lhs: f64,
    /// The same sum for `ω`, without the factor `c`.
    pub rhs: f64,
    pub log_scale: f64,
    /// `lhs / (c·rhs)`; zero when both vanish.
    pub ratio: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbarReport {
    pub block: GridBlock,
    pub trunc: usize,
    pub components: Vec<ComponentReport>,
    /// Every `W_j` passed the plurisubharmonicity check.
    pub psh_certified: bool,
    /// Without the psh certificate the bound is informational only.
    pub bound_informational: bool,
    pub estimate: EstimateReport,
}

impl DbarReport {
    /// Fails only when a certified bound is violated.
    pub fn verdict(&self) -> Verdict {
        if self.bound_informational {
            return Verdict::Inconclusive;
        }
        if self.estimate.verdict == Verdict::Fail || self.components.iter().any(|c| !c.bound_holds) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }
}

/// Solves `∂̄u = ω` for every t-coefficient in parallel, then checks the
/// per-component weighted bound and the assembled estimate.
pub fn solve_dbar(
    omega: &GridSeriesField,
    family: &NormFamily,
    level: &LevelFunction,
    opts: &SolverOptions,
) -> Result<(GridSeriesField, DbarReport)> {
    let block = *omega.block();
    let op = DbarOperator::new(&block);
    let area = block.cell_area();
    let solved = (0..=omega.trunc())
        .into_par_iter()
        .map(|j| -> Result<_> {
            let weights = ComponentWeights::new(family, level, j, &block)?;
            let rhs = omega.component(j);
            let solve = solve_component(&op, &rhs, &weights, opts)?;
            let psh = check_psh(family, level, j, &block, DEFAULT_PSH_TOL)?.verdict;
            Ok((weights, rhs, solve, psh))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut u = GridSeriesField::zeros(block, omega.trunc());
    let mut components = Vec::with_capacity(solved.len());
    for (weights, rhs, solve, psh) in solved {
        let j = weights.j;
        let residual = op
            .apply(&solve.u)
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        // both sums share the scale of e^{−W_j}
        let scale = weights.log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weighted_u = sum_at_scale(&solve.u, &weights.log_solver, scale) * area;
        let weighted_omega = sum_at_scale(&rhs, &weights.log_density, scale) * area;
        let bound_ratio = if weighted_omega == 0.0 {
            0.0
        } else {
            weighted_u / weighted_omega
        };
        components.push(ComponentReport {
            j,
            iterations: solve.iterations,
            normal_residual: solve.normal_residual,
            residual,
            weighted_u,
            weighted_omega,
            log_scale: scale,
            bound_ratio,
            bound_holds: weighted_u <= weighted_omega,
            psh,
        });
        u.set_component(j, &solve.u)?;
    }
    let psh_certified = components.iter().all(|c| c.psh == Verdict::Pass);
    let estimate = verify_estimate(&u, omega, family, level)?;
    let report = DbarReport {
        block,
        trunc: omega.trunc(),
        components,
        psh_certified,
        bound_informational: !psh_certified,
        estimate,
    };
    Ok((u, report))
}

/// Checks `Σ_j Σ |u_j|²‖t^j‖²_{h(r)} ≤ c·Σ_j Σ |ω_j|²‖t^j‖²_{h(r)}` (cell-area
/// sums) with `c = sup (1+|z|²)²`.
pub fn verify_estimate(
    u: &GridSeriesField,
    omega: &GridSeriesField,
    family: &NormFamily,
    level: &LevelFunction,
) -> Result<EstimateReport> {
    if !u.same_shape(omega) {
        return Err(Error::BlockMismatch);
    }
    let block = *u.block();
    let c = block.weight_constant();
    let mut parts = Vec::with_capacity(u.trunc() + 1);
    for j in 0..=u.trunc() {
        let weights = ComponentWeights::new(family, level, j, &block)?;
        let (lu, su) = log_weighted_sum(&u.component(j), &weights.log_density);
        let (lw, _) = log_weighted_sum(&omega.component(j), &weights.log_density);
        parts.push((lu, lw, su));
    }
    let log_scale = parts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let area = block.cell_area();
    let lhs: f64 = parts.iter().map(|p| p.0 * (p.2 - log_scale).exp()).sum::<f64>() * area;
    let rhs: f64 = parts.iter().map(|p| p.1 * (p.2 - log_scale).exp()).sum::<f64>() * area;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / (c * rhs) };
    Ok(EstimateReport {
        c,
        lhs,
        rhs,
        log_scale,
        ratio,
        verdict: if lhs <= c * rhs { Verdict::Pass } else { Verdict::Fail },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n: usize) -> GridBlock {
        GridBlock::square(1.0, n).unwrap()
    }

    #[test]
    fn apply_examples() {
        let q = block(16);
        let constant = GridSeriesField::from_component(q, 0, 0, |_| Complex64::new(2.0, -1.0)).unwrap();
        assert!(dbar_apply(&constant).max_abs() < 1e-12);
        let z = GridSeriesField::from_component(q, 0, 0, |z| z).unwrap();
        assert!(dbar_apply(&z).max_abs() < 1e-12);
        let zbar = GridSeriesField::from_component(q, 0, 0, |z| z.conj()).unwrap();
        let d = dbar_apply(&zbar);
        assert!(d.component(0).iter().all(|v| (v - 1.0).norm() < 1e-12));
    }

    #[test]
    fn apply_is_second_order() {
        // ∂̄(z̄²) = 2z̄; centered and one-sided differences are exact on quadratics
        let q = block(12);
        let f = GridSeriesField::from_component(q, 0, 0, |z| z.conj() * z.conj()).unwrap();
        let d = dbar_apply(&f);
        for (v, z) in d.component(0).iter().zip(q.points()) {
            assert!((v - 2.0 * z.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_consistent() {
        let q = block(9);
        let op = DbarOperator::new(&q);
        let u: Vec<Complex64> = (0..q.nodes())
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let v: Vec<Complex64> = (0..q.nodes())
            .map(|k| Complex64::new((k as f64 * 0.7).cos(), (k as f64).sin()))
            .collect();
        let lhs: Complex64 = op.apply(&u).iter().zip(&v).map(|(a, b)| b.conj() * a).sum();
        let rhs: Complex64 = u.iter().zip(op.apply_adjoint(&v)).map(|(a, b)| b.conj() * a).sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn zero_right_hand_side() {
        let q = block(8);
        let omega = GridSeriesField::zeros(q, 2);
        let fam = NormFamily::factorial();
        let (u, rep) = solve_dbar(&omega, &fam, &LevelFunction::exp_decay(), &SolverOptions::default()).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert_eq!(rep.estimate.verdict, Verdict::Pass);
        assert_eq!(rep.estimate.lhs, 0.0);
    }

    #[test]
    fn unit_right_hand_side() {
        let q = block(16);
        let omega = GridSeriesField::from_component(q, 0, 0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let fam = NormFamily::factorial();
        let level = LevelFunction::exp_decay();
        let (u, rep) = solve_dbar(&omega, &fam, &level, &SolverOptions::default()).unwrap();
        assert!(dbar_apply(&u).sub(&omega).unwrap().max_abs() < 1e-6);
        // z̄ is feasible, so the minimal solution is no larger
        let weights = ComponentWeights::new(&fam, &level, 0, &q).unwrap();
        let zbar: Vec<Complex64> = q.points().iter().map(|z| z.conj()).collect();
        let (min_norm, _) = log_weighted_sum(&u.component(0), &weights.log_solver);
        let (zbar_norm, _) = log_weighted_sum(&zbar, &weights.log_solver);
        assert!(min_norm <= zbar_norm * (1.0 + 1e-9));
        assert!(rep.components[0].bound_holds);
        assert_eq!(rep.estimate.c, 9.0);
        assert_eq!(rep.verdict(), Verdict::Pass);
    }

    #[test]
    fn matches_dense_reference() {
        let q = block(8);
        let fam = NormFamily::factorial();
        let level = LevelFunction::exp_decay();
        let op = DbarOperator::new(&q);
        let weights = ComponentWeights::new(&fam, &level, 1, &q).unwrap();
        let omega = vec![Complex64::new(1.0, 0.0); q.nodes()];
        let iterative = solve_component(
            &op,
            &omega,
            &weights,
            &SolverOptions {
                tol: 1e-13,
                max_iter: 10_000,
            },
        )
        .unwrap();
        let dense = dense_reference(&op, &omega, &weights).unwrap();
        let diff = iterative
            .u
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn components_are_independent() {
        let q = block(10);
        let fam = NormFamily::factorial();
        let level = LevelFunction::exp_decay();
        let omega = GridSeriesField::from_fn(q, 2, |z| vec![z, Complex64::new(1.0, 0.0), z * z]).unwrap();
        let opts = SolverOptions::default();
        let (u, _) = solve_dbar(&omega, &fam, &level, &opts).unwrap();
        let op = DbarOperator::new(&q);
        for j in 0..=2 {
            let weights = ComponentWeights::new(&fam, &level, j, &q).unwrap();
            let single = solve_component(&op, &omega.component(j), &weights, &opts).unwrap();
            assert_eq!(single.u, u.component(j));
        }
    }

    #[test]
    fn cauchy_transform_is_a_rough_solution() {
        let q = block(24);
        let omega = vec![Complex64::new(1.0, 0.0); q.nodes()];
        let u = cauchy_transform(&q, &omega);
        let d = DbarOperator::new(&q).apply(&u);
        // interior nodes only; the transform is first-order accurate
        let n = q.n;
        let mut worst: f64 = 0.0;
        for iy in 3..n - 3 {
            for ix in 3..n - 3 {
                worst = worst.max((d[q.index(ix, iy)] - 1.0).norm());
            }
        }
        assert!(worst < 0.2, "{worst}");
    }

    #[test]
    fn verify_estimate_rejects_mismatch() {
        let fam = NormFamily::factorial();
        let level = LevelFunction::exp_decay();
        let a = GridSeriesField::zeros(block(8), 1);
        let b = GridSeriesField::zeros(block(9), 1);
        assert!(matches!(
            verify_estimate(&a, &b, &fam, &level),
            Err(Error::BlockMismatch)
        ));
    }

    #[test]
    fn solver_reports_history_on_cap() {
        let q = block(16);
        let op = DbarOperator::new(&q);
        let weights = ComponentWeights::flat(0, &q);
        let omega: Vec<Complex64> = q.points().iter().map(|z| z.conj() * z.norm()).collect();
        match solve_component(
            &op,
            &omega,
            &weights,
            &SolverOptions {
                tol: 1e-14,
                max_iter: 3,
            },
        ) {
            Err(Error::Solver {
                iterations, history, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
