use nalgebra::SymmetricEigen;

use super::{hermitian_part, Relation, SdpProblem, SdpSolution};

/// Constraint residuals recomputed from the problem description alone.
///
/// Every violation is non-negative; zero means satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Smallest eigenvalue of the matrix variable.
    pub matrix_min_eig: f64,
    /// Smallest eigenvalue of each evaluated LMI block.
    pub lmi_min_eigs: Vec<f64>,
    /// Signed residual `a_k(X, s)` of each linear row.
    pub linear_residuals: Vec<f64>,
    /// `max(0, lower − s)` per scalar.
    pub scalar_violations: Vec<f64>,
    pub max_violation: f64,
    pub passed: bool,
}

pub fn verify(problem: &SdpProblem, sol: &SdpSolution, tol: f64) -> VerifyReport {
    let x = &sol.matrix_value;
    let s = sol.scalar_vector();
    let mut worst = 0.0f64;

    let matrix_min_eig = if x.shape() == (problem.matrix_dim, problem.matrix_dim) {
        SymmetricEigen::new(hermitian_part(x)).eigenvalues.min()
    } else {
        f64::NEG_INFINITY
    };
    worst = worst.max(-matrix_min_eig);

    let lmi_min_eigs: Vec<f64> = problem
        .lmis
        .iter()
        .map(|l| {
            let v = l.value(x, &s);
            SymmetricEigen::new(v).eigenvalues.min()
        })
        .collect();
    for e in &lmi_min_eigs {
        worst = worst.max(-e);
    }

    let linear_residuals: Vec<f64> = problem.linear.iter().map(|r| r.form.value(x, &s)).collect();
    for (r, v) in problem.linear.iter().zip(&linear_residuals) {
        let viol = match r.relation {
            Relation::Eq => v.abs(),
            Relation::Ge => (-v).max(0.0),
            Relation::Le => v.max(0.0),
        };
        worst = worst.max(viol);
    }

    let scalar_violations: Vec<f64> = problem
        .scalars
        .iter()
        .zip(&s)
        .map(|(var, v)| (var.lower - v).max(0.0))
        .collect();
    for v in &scalar_violations {
        worst = worst.max(*v);
    }
    if s.len() != problem.scalars.len() || worst.is_nan() {
        worst = f64::INFINITY;
    }

    VerifyReport {
        matrix_min_eig,
        lmi_min_eigs,
        linear_residuals,
        scalar_violations,
        max_violation: worst,
        passed: worst <= tol,
    }
}
