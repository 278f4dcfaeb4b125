//! Compilation of [`SdpProblem`] into block-diagonal primal standard form
//!
//! ```text
//! min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X = diag(X_1, …, X_p, x_lin) ⪰ 0
//! ```
//!
//! Block 0 holds the matrix variable (real embedding when Hermitian), one
//! PSD block per LMI holds its slack, and the trailing diagonal block holds
//! the shifted scalars `s − lower` and the slacks of inequality rows.

use nalgebra::{DMatrix, DVector};

use super::ipm::IpmOutcome;
use super::{hermitian_part, AffineForm, Relation, SdpProblem, SdpSolution, SdpStatus, Sense};
use crate::{CMatrix, Complex64};

/// Symmetric coefficient of one PSD block.
#[derive(Debug, Clone)]
pub(crate) enum SymCoeff {
    Dense(DMatrix<f64>),
    /// Full list of `(row, col, value)` (both triangles).
    Sparse(Vec<(usize, usize, f64)>),
}

impl SymCoeff {
    pub(crate) fn from_dense(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let nnz = m.iter().filter(|x| **x != 0.0).count();
        if nnz <= 4 * n {
            let mut e = Vec::with_capacity(nnz);
            for j in 0..n {
                for i in 0..n {
                    if m[(i, j)] != 0.0 {
                        e.push((i, j, m[(i, j)]));
                    }
                }
            }
            Self::Sparse(e)
        } else {
            Self::Dense(m)
        }
    }

    /// ⟨A, P⟩ = Σ A_pq P_pq.
    pub(crate) fn inner(&self, p: &DMatrix<f64>) -> f64 {
        match self {
            Self::Dense(a) => a.dot(p),
            Self::Sparse(e) => e.iter().map(|&(i, j, v)| v * p[(i, j)]).sum(),
        }
    }

    pub(crate) fn add_scaled_to(&self, target: &mut DMatrix<f64>, k: f64) {
        match self {
            Self::Dense(a) => *target += a * k,
            Self::Sparse(e) => {
                for &(i, j, v) in e {
                    target[(i, j)] += k * v;
                }
            }
        }
    }

    /// `X A Z⁻¹`.
    pub(crate) fn sandwich(&self, x: &DMatrix<f64>, zinv: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Self::Dense(a) => x * a * zinv,
            Self::Sparse(e) => {
                let n = x.nrows();
                let mut out = DMatrix::zeros(n, n);
                for &(p, q, v) in e {
                    // v · X[:, p] ⊗ Z⁻¹[q, :]
                    let col = x.column(p);
                    let row = zinv.row(q);
                    out.ger(v, &col, &row.transpose(), 1.0);
                }
                out
            }
        }
    }

    pub(crate) fn frobenius(&self) -> f64 {
        match self {
            Self::Dense(a) => a.norm(),
            Self::Sparse(e) => e.iter().map(|(_, _, v)| v * v).sum::<f64>().sqrt(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Row {
    pub psd: Vec<(usize, SymCoeff)>,
    pub lin: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub psd_dims: Vec<usize>,
    pub lin_dim: usize,
    pub c_psd: Vec<Option<SymCoeff>>,
    pub c_lin: DVector<f64>,
    pub rows: Vec<Row>,
    pub b: DVector<f64>,
    /// Constant that turns the standard-form objective back into the
    /// problem's objective (up to sign); used to normalize the gap.
    pub obj_shift: f64,
}

pub(crate) struct Compiled {
    pub form: StandardForm,
    n: usize,
    hermitian: bool,
    /// Objective sign (+1 minimize, −1 maximize) and constant offset.
    sign: f64,
    obj_offset: f64,
}

/// Real symmetric coefficient `K` with `⟨K, Y⟩ = Re tr(H X)` for the
/// embedded variable `Y`.
fn embed(h: &CMatrix, hermitian: bool) -> DMatrix<f64> {
    let h = hermitian_part(h);
    let n = h.nrows();
    if !hermitian {
        return h.map(|z| z.re);
    }
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)] * 0.5;
            k[(i, j)] = z.re;
            k[(i + n, j + n)] = z.re;
            k[(i, j + n)] = -z.im;
            k[(i + n, j)] = z.im;
        }
    }
    k
}

pub(crate) fn compile(p: &SdpProblem) -> Compiled {
    let n = p.matrix_dim;
    let nb = if p.hermitian { 2 * n } else { n };
    let ns = p.scalars.len();
    let n_ineq = p
        .linear
        .iter()
        .filter(|r| r.relation != Relation::Eq)
        .count();
    let mut psd_dims = vec![nb];
    psd_dims.extend(p.lmis.iter().map(|l| l.dim));
    let lin_dim = ns + n_ineq;

    // Shift s = t + lower into constants.
    let shift = |f: &AffineForm| -> f64 {
        f.constant
            + f.scalars
                .iter()
                .map(|&(k, c)| c * p.scalars[k].lower)
                .sum::<f64>()
    };
    let var_row = |f: &AffineForm, row: &mut Row| {
        if let Some(h) = &f.matrix {
            let k = embed(h, p.hermitian);
            if k.iter().any(|x| *x != 0.0) {
                row.psd.push((0, SymCoeff::from_dense(k)));
            }
        }
        let mut lin: Vec<(usize, f64)> = Vec::new();
        for &(k, c) in &f.scalars {
            match lin.iter_mut().find(|(i, _)| *i == k) {
                Some(e) => e.1 += c,
                None => lin.push((k, c)),
            }
        }
        row.lin.extend(lin);
    };

    let mut rows = Vec::new();
    let mut b = Vec::new();
    for (l, lmi) in p.lmis.iter().enumerate() {
        for i in 0..lmi.dim {
            for j in i..lmi.dim {
                let f = lmi.entry(i, j);
                let mut row = Row::default();
                var_row(f, &mut row);
                let mut e = DMatrix::zeros(lmi.dim, lmi.dim);
                if i == j {
                    e[(i, i)] = -1.0;
                } else {
                    e[(i, j)] = -0.5;
                    e[(j, i)] = -0.5;
                }
                row.psd.push((l + 1, SymCoeff::from_dense(e)));
                rows.push(row);
                b.push(-shift(f));
            }
        }
    }
    let mut slack = ns;
    for r in &p.linear {
        let mut row = Row::default();
        var_row(&r.form, &mut row);
        match r.relation {
            Relation::Eq => {}
            Relation::Ge => {
                row.lin.push((slack, -1.0));
                slack += 1;
            }
            Relation::Le => {
                row.lin.push((slack, 1.0));
                slack += 1;
            }
        }
        rows.push(row);
        b.push(-shift(&r.form));
    }

    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut c_psd: Vec<Option<SymCoeff>> = vec![None; psd_dims.len()];
    if let Some(h) = &p.objective.matrix {
        c_psd[0] = Some(SymCoeff::from_dense(embed(h, p.hermitian) * sign));
    }
    let mut c_lin = DVector::zeros(lin_dim);
    for &(k, c) in &p.objective.scalars {
        c_lin[k] += sign * c;
    }
    Compiled {
        form: StandardForm {
            psd_dims,
            lin_dim,
            c_psd,
            c_lin,
            rows,
            b: DVector::from_vec(b),
            obj_shift: sign * shift(&p.objective),
        },
        n,
        hermitian: p.hermitian,
        sign,
        obj_offset: shift(&p.objective),
    }
}

impl Compiled {
    pub(crate) fn recover(&self, p: &SdpProblem, out: IpmOutcome) -> SdpSolution {
        let n = self.n;
        let y = &out.x_psd[0];
        let matrix_value = if self.hermitian {
            CMatrix::from_fn(n, n, |i, j| {
                Complex64::new(
                    0.5 * (y[(i, j)] + y[(i + n, j + n)]),
                    0.5 * (y[(i + n, j)] - y[(i, j + n)]),
                )
            })
        } else {
            y.map(|v| Complex64::new(v, 0.0))
        };
        let scalar_values = p
            .scalars
            .iter()
            .enumerate()
            .map(|(k, s)| (s.name.clone(), out.x_lin[k] + s.lower))
            .collect();
        let objective_value = match out.status {
            SdpStatus::Optimal | SdpStatus::NumericalFailure => {
                self.sign * out.primal_objective + self.obj_offset
            }
            SdpStatus::Infeasible => match p.sense {
                Sense::Minimize => f64::INFINITY,
                Sense::Maximize => f64::NEG_INFINITY,
            },
            SdpStatus::Unbounded => match p.sense {
                Sense::Minimize => f64::NEG_INFINITY,
                Sense::Maximize => f64::INFINITY,
            },
        };
        SdpSolution {
            matrix_value,
            scalar_values,
            objective_value,
            status: out.status,
            certified_gap: out.certified_gap,
            iterations: out.iterations,
            diagnostic: out.diagnostic,
        }
    }
}
