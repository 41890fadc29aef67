//! Parametrized norm families `j ↦ ‖t^j‖_h` on the formal power series ring.
//!
//! Every family is evaluated in log space: `ℓ_j(h) = log ‖t^j‖_h`. Most
//! families decay faster than exponentially in `j`, so the norms themselves
//! underflow `f64` long before the scan bounds used by the condition checks
//! (`h^200 / 200!` is already far below `f64::MIN_POSITIVE`).

mod conditions;
mod table;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

pub use conditions::{
    check_conditions, nuclearity_scan, ConditionCheck, ConditionId, ConditionReport, NuclearityScan, Verdict, Witness,
    DEFAULT_SCAN_BOUND,
};
pub use table::NormTable;

/// The built-in closed forms plus a user-supplied table.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `h^j / j!`
    Factorial,
    /// `h^{j^γ} / j!`, `γ ≥ 1`
    PowerFactorial {
        gamma: f64,
    },
    /// `j^{-k} h^{j^γ}`, `k ≥ 1` integer, `γ > 1`
    PowerPolynomial {
        k: u32,
        gamma: f64,
    },
    /// `e^{-j^k} h^{j^γ}`, `k ≥ 1` integer, `γ > k`
    PowerExponential {
        k: u32,
        gamma: f64,
    },
    /// `e^{-γ j / h} / j!`, `γ ≥ 1`
    ExpFactorial {
        gamma: f64,
    },
    /// `e^{(1 - γ^j) / h} / j!`, `γ ≥ 2`
    DoubleExpFactorial {
        gamma: f64,
    },
    Tabulated(Arc<NormTable>),
}

/// Optional parameters used when resolving a family id.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FamilyParams {
    pub gamma: Option<f64>,
    pub kexp: Option<u32>,
}

/// A norm family together with its documented upper level bound `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormFamily {
    kind: FamilyKind,
    level_bound: f64,
}

/// `(ℓ, ℓ', ℓ'')` for `ℓ(h) = log ‖t^j‖_h`, derivatives in `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl NormFamily {
    pub fn factorial() -> Self {
        NormFamily {
            kind: FamilyKind::Factorial,
            level_bound: 1.0,
        }
    }

    /// Example (i). `γ = 1` coincides with [`NormFamily::factorial`].
    pub fn power_factorial(gamma: f64) -> Result<Self> {
        require(gamma >= 1.0, "family ex1 needs gamma >= 1")?;
        Ok(NormFamily {
            kind: FamilyKind::PowerFactorial { gamma },
            level_bound: 1.0,
        })
    }

    /// Example (ii). Only certified for small levels; `S = 1/2`.
    pub fn power_polynomial(k: u32, gamma: f64) -> Result<Self> {
        require(k >= 1, "family ex2 needs k >= 1")?;
        require(gamma > 1.0, "family ex2 needs gamma > 1")?;
        Ok(NormFamily {
            kind: FamilyKind::PowerPolynomial { k, gamma },
            level_bound: 0.5,
        })
    }

    /// Example (iii).
    pub fn power_exponential(k: u32, gamma: f64) -> Result<Self> {
        require(k >= 1, "family ex3 needs k >= 1")?;
        require(gamma > k as f64, "family ex3 needs gamma > k")?;
        Ok(NormFamily {
            kind: FamilyKind::PowerExponential { k, gamma },
            level_bound: 1.0,
        })
    }

    /// Example (iv).
    pub fn exp_factorial(gamma: f64) -> Result<Self> {
        require(gamma >= 1.0, "family ex4 needs gamma >= 1")?;
        Ok(NormFamily {
            kind: FamilyKind::ExpFactorial { gamma },
            level_bound: 1.0,
        })
    }

    /// Example (v).
    pub fn double_exp_factorial(gamma: f64) -> Result<Self> {
        require(gamma >= 2.0, "family ex5 needs gamma >= 2")?;
        Ok(NormFamily {
            kind: FamilyKind::DoubleExpFactorial { gamma },
            level_bound: 1.0,
        })
    }

    pub fn tabulated(table: NormTable) -> Self {
        let level_bound = table.max_level();
        NormFamily {
            kind: FamilyKind::Tabulated(Arc::new(table)),
            level_bound,
        }
    }

    /// Resolves a registry id: `factorial`, `ex1`..`ex5`, `tabulated:<path>`.
    ///
    /// Missing parameters fall back to the documented defaults:
    /// ex1 `γ = 1.5`, ex2 `k = 1, γ = 2`, ex3 `k = 1, γ = 2`, ex4 `γ = 1`,
    /// ex5 `γ = 2`.
    pub fn from_id(id: &str, params: FamilyParams) -> Result<Self> {
        let gamma = params.gamma;
        let kexp = params.kexp;
        match id {
            "factorial" => Ok(Self::factorial()),
            "ex1" => Self::power_factorial(gamma.unwrap_or(1.5)),
            "ex2" => Self::power_polynomial(kexp.unwrap_or(1), gamma.unwrap_or(2.0)),
            "ex3" => Self::power_exponential(kexp.unwrap_or(1), gamma.unwrap_or(2.0)),
            "ex4" => Self::exp_factorial(gamma.unwrap_or(1.0)),
            "ex5" => Self::double_exp_factorial(gamma.unwrap_or(2.0)),
            other => match other.strip_prefix("tabulated:") {
                Some(path) => Ok(Self::tabulated(NormTable::from_path(Path::new(path))?)),
                None => Err(Error::usage(format!("unknown family id `{other}`"))),
            },
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// The documented admissible upper level `S`.
    pub fn level_bound(&self) -> f64 {
        self.level_bound
    }

    /// Overrides `S`, e.g. to certify a family on a smaller level range.
    pub fn with_level_bound(mut self, s: f64) -> Self {
        self.level_bound = s;
        self
    }

    /// Admissible level interval `(0, S]` used by the level-weight and
    /// solver modules.
    pub fn h_range(&self) -> (f64, f64) {
        match &self.kind {
            FamilyKind::Tabulated(t) => (t.min_level(), self.level_bound),
            _ => (0.0, self.level_bound),
        }
    }

    pub fn in_h_range(&self, h: f64) -> bool {
        let (lo, hi) = self.h_range();
        if self.is_tabulated() {
            h >= lo && h <= hi
        } else {
            h > lo && h <= hi
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.kind, FamilyKind::Tabulated(_))
    }

    /// Largest `j` the family can evaluate (unbounded for closed forms).
    pub fn max_index(&self) -> usize {
        match &self.kind {
            FamilyKind::Tabulated(t) => t.max_index(),
            _ => usize::MAX,
        }
    }

    fn check_level(&self, h: f64) -> Result<()> {
        let ok = match &self.kind {
            FamilyKind::Tabulated(t) => h.is_finite() && t.contains(h),
            _ => h.is_finite() && h > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.to_string(),
                h,
            })
        }
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.max_index() {
            return Err(Error::Cap {
                index: j,
                cap: self.max_index(),
            });
        }
        Ok(())
    }

    /// `log ‖t^j‖_h`.
    pub fn log_norm(&self, h: f64, j: usize) -> Result<f64> {
        self.check_level(h)?;
        self.check_index(j)?;
        Ok(match &self.kind {
            FamilyKind::Tabulated(t) => t.log_norm(h, j),
            _ => self.closed_jet(h, j).value,
        })
    }

    /// `‖t^j‖_h`. May underflow to zero for large `j`; use
    /// [`NormFamily::log_norm`] for scans.
    pub fn eval_norm(&self, h: f64, j: usize) -> Result<f64> {
        self.log_norm(h, j).map(f64::exp)
    }

    /// `R(h, j) = ‖t^{j+1}‖_h / ‖t^j‖_h`, formed in log space.
    pub fn ratio(&self, h: f64, j: usize) -> Result<f64> {
        self.log_ratio(h, j).map(f64::exp)
    }

    /// `log R(h, j)`; representable where `R` itself underflows.
    pub fn log_ratio(&self, h: f64, j: usize) -> Result<f64> {
        Ok(self.log_norm(h, j + 1)? - self.log_norm(h, j)?)
    }

    /// `ε_n = ‖t^n‖_h^{1/n}`.
    pub fn spectral_eps(&self, h: f64, n: usize) -> Result<f64> {
        self.log_spectral_eps(h, n).map(f64::exp)
    }

    pub fn log_spectral_eps(&self, h: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::usage("spectral_eps needs n >= 1"));
        }
        Ok(self.log_norm(h, n)? / n as f64)
    }

    /// Log-norm with its first two `h`-derivatives. Closed form for the
    /// built-in families, central differences (step `1e-4·h`) for tables.
    pub fn log_norm_jet(&self, h: f64, j: usize) -> Result<LogNormJet> {
        self.check_level(h)?;
        self.check_index(j)?;
        match &self.kind {
            FamilyKind::Tabulated(t) => t.jet(h, j).ok_or_else(|| Error::Domain {
                family: self.to_string(),
                h,
            }),
            _ => Ok(self.closed_jet(h, j)),
        }
    }

    /// `(N_j, N_j', N_j'')` with `N_j(h) = ‖t^j‖_h²`.
    pub fn n_j(&self, h: f64, j: usize) -> Result<(f64, f64, f64)> {
        let jet = self.log_norm_jet(h, j)?;
        // log N = 2ℓ, N' = N·2ℓ', N'' = N·(4ℓ'² + 2ℓ'')
        let n = (2.0 * jet.value).exp();
        Ok((n, n * 2.0 * jet.d1, n * (4.0 * jet.d1 * jet.d1 + 2.0 * jet.d2)))
    }

    fn closed_jet(&self, h: f64, j: usize) -> LogNormJet {
        let jf = j as f64;
        let power_jet = |p: f64, offset: f64| LogNormJet {
            value: p * h.ln() + offset,
            d1: p / h,
            d2: -p / (h * h),
        };
        match &self.kind {
            FamilyKind::Factorial => power_jet(jf, -ln_factorial(j as u64)),
            FamilyKind::PowerFactorial { gamma } => power_jet(jf.powf(*gamma), -ln_factorial(j as u64)),
            FamilyKind::PowerPolynomial { k, gamma } => {
                // j = 0 is read as ‖1‖ = 1
                let offset = if j == 0 { 0.0 } else { -(*k as f64) * jf.ln() };
                power_jet(jf.powf(*gamma), offset)
            }
            FamilyKind::PowerExponential { k, gamma } => power_jet(jf.powf(*gamma), -jf.powi(*k as i32)),
            FamilyKind::ExpFactorial { gamma } => {
                let a = gamma * jf;
                LogNormJet {
                    value: -a / h - ln_factorial(j as u64),
                    d1: a / (h * h),
                    d2: -2.0 * a / (h * h * h),
                }
            }
            FamilyKind::DoubleExpFactorial { gamma } => {
                let a = gamma.powf(jf) - 1.0;
                LogNormJet {
                    value: -a / h - ln_factorial(j as u64),
                    d1: a / (h * h),
                    d2: -2.0 * a / (h * h * h),
                }
            }
            FamilyKind::Tabulated(_) => unreachable!("tables use finite differences"),
        }
    }
}

impl fmt::Display for NormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::Factorial => write!(f, "factorial"),
            FamilyKind::PowerFactorial { gamma } => write!(f, "ex1(gamma={gamma})"),
            FamilyKind::PowerPolynomial { k, gamma } => write!(f, "ex2(k={k},gamma={gamma})"),
            FamilyKind::PowerExponential { k, gamma } => write!(f, "ex3(k={k},gamma={gamma})"),
            FamilyKind::ExpFactorial { gamma } => write!(f, "ex4(gamma={gamma})"),
            FamilyKind::DoubleExpFactorial { gamma } => write!(f, "ex5(gamma={gamma})"),
            FamilyKind::Tabulated(t) => write!(f, "tabulated({} levels)", t.levels().len()),
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::usage(msg))
    }
}
