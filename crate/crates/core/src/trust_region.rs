//! Exact global minimization of a 3-D quadratic over a Euclidean ball.
//!
//! A point `x*` is a global minimizer of `gᵀx + ½xᵀHx` on `‖x‖ ≤ ρ` iff there is
//! `λ ≥ 0` with `(H + λI)x* = −g`, `H + λI ⪰ 0` and `λ(ρ − ‖x*‖) = 0`. We work
//! in the eigenbasis of `H` and find λ from the scalar secular equation
//! `‖x(λ)‖ = ρ`, falling back to the hard case when `g` has no component
//! along the bottom eigenvector.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::quadratic::RobustQuadratic;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMinimum {
    pub value: f64,
    /// Minimizer in normalized coordinates `Δ̄`.
    pub argmin: Vector3<f64>,
}

/// Worst case of the quadratic model over `‖Δ̄‖ ≤ Υ / d̂`.
pub fn min_quadratic_over_ball(rq: &RobustQuadratic) -> BallMinimum {
    let rho = if rq.radius > 0.0 { rq.rho() } else { 0.0 };
    let x = minimize_on_ball(&rq.phi, &rq.phi_mat, rho);
    BallMinimum {
        value: rq.eval(&x),
        argmin: x,
    }
}

/// Minimizer of `gᵀx + ½xᵀHx` over `‖x‖ ≤ radius`.
pub fn minimize_on_ball(g: &Vector3<f64>, h: &Matrix3<f64>, radius: f64) -> Vector3<f64> {
    if radius <= 0.0 {
        return Vector3::zeros();
    }
    let h = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(h);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lam: [f64; 3] = order.map(|i| eig.eigenvalues[i]);
    let vecs: [Vector3<f64>; 3] = order.map(|i| eig.eigenvectors.column(i).into_owned());
    let gt: [f64; 3] = std::array::from_fn(|i| vecs[i].dot(g));

    let scale = lam.iter().fold(g.norm() / radius, |a, l| a.max(l.abs()));
    if scale == 0.0 {
        return Vector3::zeros();
    }
    let eig_tol = 1e-12 * scale;
    let from_coeffs = |c: [f64; 3]| vecs[0] * c[0] + vecs[1] * c[1] + vecs[2] * c[2];
    let x_of = |shift: f64| -> [f64; 3] { std::array::from_fn(|i| -gt[i] / (lam[i] + shift)) };
    let norm = |c: &[f64; 3]| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();

    // Interior Newton point.
    if lam[0] > eig_tol {
        let x = x_of(0.0);
        if norm(&x) <= radius {
            return from_coeffs(x);
        }
    }

    let lo = (-lam[0]).max(0.0);
    let g_norm = g.norm();

    // Hard case: g (numerically) orthogonal to the bottom eigenspace and the
    // shifted solution stays inside the ball. The test is absolute because a
    // g made of round-off has no meaningful direction.
    let bottom: Vec<usize> = (0..3).filter(|&i| lam[i] - lam[0] <= eig_tol).collect();
    let g_bottom = bottom.iter().map(|&i| gt[i] * gt[i]).sum::<f64>().sqrt();
    if g_bottom <= 1e-12 * scale * radius {
        let mut c = [0.0; 3];
        for i in 0..3 {
            if !bottom.contains(&i) {
                c[i] = -gt[i] / (lam[i] + lo);
            }
        }
        let n = norm(&c);
        if n <= radius {
            let tau = (radius * radius - n * n).max(0.0).sqrt();
            c[bottom[0]] = tau;
            return from_coeffs(c);
        }
    }

    // Secular equation ψ(λ) = 1/‖x(λ)‖ − 1/ρ on (lo, hi].
    let psi = |shift: f64| -> (f64, f64) {
        let mut s2 = 0.0;
        let mut ds2 = 0.0;
        for i in 0..3 {
            let den = lam[i] + shift;
            s2 += gt[i] * gt[i] / (den * den);
            ds2 += -2.0 * gt[i] * gt[i] / (den * den * den);
        }
        let n = s2.sqrt();
        // d/dλ (s2^{-1/2}) = −½ s2^{-3/2} ds2
        (1.0 / n - 1.0 / radius, -0.5 * ds2 / (s2 * n))
    };
    let mut a = lo;
    let mut b = lo + g_norm / radius;
    let mut shift = b;
    for _ in 0..200 {
        let (f, df) = psi(shift);
        if f.abs() <= 1e-14 / radius {
            break;
        }
        if f > 0.0 {
            b = shift;
        } else {
            a = shift;
        }
        let newton = shift - f / df;
        shift = if newton > a && newton < b && df.is_finite() {
            newton
        } else {
            0.5 * (a + b)
        };
        if b - a <= 1e-15 * b.max(1.0e-300) {
            break;
        }
    }
    // This branch always solves on the sphere. Near the hard case ψ is so
    // steep that the iteration can stop slightly short of it.
    let x = from_coeffs(x_of(shift));
    let n = x.norm();
    if n > 0.0 {
        x * (radius / n)
    } else {
        x
    }
}
