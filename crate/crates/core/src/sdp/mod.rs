//! Semidefinite programs over one Hermitian (or real symmetric) matrix
//! variable plus a few bounded scalars.
//!
//! ```text
//! min/max   Re tr(C X) + cᵀs + c0
//! s.t.      F_l(X, s) ⪰ 0           for each LMI block l
//!           a_k(X, s) {=, ≥, ≤} 0    for each linear row k
//!           X ⪰ 0,  s_i ≥ lower_i
//! ```
//!
//! Every scalar entry of an LMI block and every linear row is an
//! [`AffineForm`]. [`solve`] compiles the problem to block-diagonal
//! standard form (Hermitian variables through the real embedding
//! `[[Re, −Im], [Im, Re]]`) and runs a primal-dual interior-point method.
//! [`verify`] re-checks a solution against the original description.

mod io;
mod ipm;
mod standard;
mod verify;

pub use io::{dump, load};
pub use verify::{verify, VerifyReport};

use std::fmt;

use crate::error::{domain, Result};
use crate::{CMatrix, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

/// A scalar decision variable with a finite lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVar {
    pub name: String,
    pub lower: f64,
}

impl ScalarVar {
    pub fn nonneg(name: &str) -> Self {
        Self {
            name: name.to_string(),
            lower: 0.0,
        }
    }

    pub fn bounded_below(name: &str, lower: f64) -> Self {
        Self {
            name: name.to_string(),
            lower,
        }
    }
}

/// `Re tr(H X) + Σ c_k s_k + c0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineForm {
    pub matrix: Option<CMatrix>,
    pub scalars: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineForm {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    pub fn matrix(h: CMatrix) -> Self {
        Self {
            matrix: Some(h),
            ..Self::default()
        }
    }

    pub fn with_scalar(mut self, index: usize, coeff: f64) -> Self {
        self.scalars.push((index, coeff));
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn value(&self, x: &CMatrix, s: &[f64]) -> f64 {
        let mut v = self.constant;
        if let Some(h) = &self.matrix {
            v += crate::quadratic::re_trace(h, x);
        }
        for &(k, c) in &self.scalars {
            v += c * s[k];
        }
        v
    }
}

/// Symmetric `dim × dim` affine block; `entries` holds the upper triangle row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Lmi {
    pub dim: usize,
    pub entries: Vec<AffineForm>,
}

impl Lmi {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![AffineForm::default(); dim * (dim + 1) / 2],
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut AffineForm {
        let k = self.index(i, j);
        &mut self.entries[k]
    }

    pub fn entry(&self, i: usize, j: usize) -> &AffineForm {
        &self.entries[self.index(i, j)]
    }

    pub fn value(&self, x: &CMatrix, s: &[f64]) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j).value(x, s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub form: AffineForm,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub matrix_dim: usize,
    /// Complex Hermitian variable when true, real symmetric otherwise.
    pub hermitian: bool,
    pub scalars: Vec<ScalarVar>,
    pub sense: Sense,
    pub objective: AffineForm,
    pub lmis: Vec<Lmi>,
    pub linear: Vec<LinearConstraint>,
}

impl SdpProblem {
    pub fn new(matrix_dim: usize, hermitian: bool, sense: Sense) -> Self {
        Self {
            matrix_dim,
            hermitian,
            scalars: Vec::new(),
            sense,
            objective: AffineForm::default(),
            lmis: Vec::new(),
            linear: Vec::new(),
        }
    }

    pub fn add_scalar(&mut self, var: ScalarVar) -> usize {
        self.scalars.push(var);
        self.scalars.len() - 1
    }

    pub fn scalar_index(&self, name: &str) -> Option<usize> {
        self.scalars.iter().position(|s| s.name == name)
    }

    pub fn objective_value(&self, x: &CMatrix, s: &[f64]) -> f64 {
        self.objective.value(x, s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.matrix_dim;
        if n == 0 {
            return Err(domain("matrix variable dimension must be positive"));
        }
        let check = |f: &AffineForm, what: &str| -> Result<()> {
            if let Some(h) = &f.matrix {
                if h.shape() != (n, n) {
                    return Err(domain(format!(
                        "{what}: coefficient is {}x{}, variable is {n}x{n}",
                        h.nrows(),
                        h.ncols()
                    )));
                }
                if !self.hermitian && h.iter().any(|z| z.im != 0.0) {
                    return Err(domain(format!(
                        "{what}: complex coefficient on a real variable"
                    )));
                }
                if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(domain(format!("{what}: non-finite coefficient")));
                }
            }
            if let Some(&(k, _)) = f.scalars.iter().find(|(k, _)| *k >= self.scalars.len()) {
                return Err(domain(format!("{what}: unknown scalar index {k}")));
            }
            if !f.constant.is_finite() || f.scalars.iter().any(|(_, c)| !c.is_finite()) {
                return Err(domain(format!("{what}: non-finite coefficient")));
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (l, lmi) in self.lmis.iter().enumerate() {
            if lmi.dim == 0 || lmi.entries.len() != lmi.dim * (lmi.dim + 1) / 2 {
                return Err(domain(format!("lmi {l}: malformed entry list")));
            }
            for e in &lmi.entries {
                check(e, "lmi entry")?;
            }
        }
        for r in &self.linear {
            check(&r.form, "linear constraint")?;
        }
        if let Some(s) = self.scalars.iter().find(|s| !s.lower.is_finite()) {
            return Err(domain(format!(
                "scalar {} needs a finite lower bound",
                s.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Optimal => "optimal",
            Self::Infeasible => "infeasible",
            Self::Unbounded => "unbounded",
            Self::NumericalFailure => "numerical failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub matrix_value: CMatrix,
    pub scalar_values: Vec<(String, f64)>,
    pub objective_value: f64,
    pub status: SdpStatus,
    /// max(relative gap, relative primal residual, relative dual residual).
    pub certified_gap: f64,
    pub iterations: usize,
    pub diagnostic: String,
}

impl SdpSolution {
    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalar_values
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn scalar_vector(&self) -> Vec<f64> {
        self.scalar_values.iter().map(|(_, v)| *v).collect()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Solves `problem` to relative accuracy `options.tol`.
///
/// Malformed problems are errors; infeasibility and numerical trouble are
/// reported through [`SdpSolution::status`].
pub fn solve(problem: &SdpProblem, options: &SolverOptions) -> Result<SdpSolution> {
    if !(options.tol > 0.0) {
        return Err(domain("solver tolerance must be positive"));
    }
    problem.validate()?;
    let compiled = standard::compile(problem);
    let out = ipm::solve(&compiled.form, options);
    Ok(compiled.recover(problem, out))
}

pub(crate) fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * Complex64::new(0.5, 0.0)
}
