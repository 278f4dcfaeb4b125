//! Second-order model of the received power under a location error, its
//! lifted (matrix-variable) forms and the S-procedure certificate.
//!
//! With `d = diag(ĝ) diag(ξ) G w` and the normalized error `Δ̄ = Δ / d̂`,
//!
//! ```text
//! |e(Δ)ᵀ d|² = Σ_{m,n} d_m d_n* exp((f̄_m − f̄_n)ᵀ Δ̄),   f̄_m = jπ d̂ f_m
//!           ≈ q0 + φᵀ Δ̄ + ½ Δ̄ᵀ Φ Δ̄
//! ```
//!
//! with `q0 = |1ᵀd|²`, `φ_k = Σ d_m d_n* (f̄_m − f̄_n)_k` and
//! `Φ_sl = Σ d_m d_n* (f̄_m − f̄_n)_s (f̄_m − f̄_n)_l`. Both sums are real.
//! The ½ is the exact Maclaurin factor. The LMI below uses the matching
//! `½φ`, `½Φ` blocks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Matrix4, SymmetricEigen, Vector3};

use crate::channel::{ChannelB2I, PhaseShifts, ReflectChannel};
use crate::error::{check_len, domain, Result};
use crate::location::{error_vector, ErrorSensitivity, LocationError, UncertaintyBall};
use crate::{CMatrix, CVector, Complex64};

/// Index pairs `(s, l)`, `s ≤ l`, in storage order for the six `A_sl` / `Φ_sl`.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Per-element reflected contributions `d = diag(ĝ) diag(ξ) G w`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeVector {
    pub d: CVector,
}

impl CompositeVector {
    pub fn new(
        g_hat: &ReflectChannel,
        xi: &PhaseShifts,
        b2i: &ChannelB2I,
        w: &CVector,
    ) -> Result<Self> {
        let m = b2i.irs_elements();
        check_len("reflection channel", m, g_hat.len())?;
        check_len("phase shifts", m, xi.len())?;
        check_len("beamformer", b2i.bs_antennas(), w.len())?;
        let gw = &b2i.matrix * w;
        Ok(Self {
            d: g_hat
                .vector
                .component_mul(xi.as_vector())
                .component_mul(&gw),
        })
    }

    pub fn from_vector(d: CVector) -> Self {
        Self { d }
    }
}

/// Quadratic model `q(Δ̄) = q0 + φᵀΔ̄ + ½ Δ̄ᵀΦΔ̄` on `‖Δ̄‖ ≤ Υ / d̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustQuadratic {
    pub q0: f64,
    pub phi: Vector3<f64>,
    pub phi_mat: Matrix3<f64>,
    pub d_hat: f64,
    pub radius: f64,
}

impl RobustQuadratic {
    /// Radius of the normalized ball, `Υ / d̂`.
    pub fn rho(&self) -> f64 {
        self.radius / self.d_hat
    }

    pub fn eval(&self, dbar: &Vector3<f64>) -> f64 {
        self.q0 + self.phi.dot(dbar) + 0.5 * dbar.dot(&(self.phi_mat * dbar))
    }

    pub fn eval_delta(&self, delta: &LocationError) -> f64 {
        self.eval(&(delta.delta / self.d_hat))
    }

    fn add_scaled(&mut self, other: &Self, k: f64) {
        self.q0 += k * other.q0;
        self.phi += other.phi * k;
        self.phi_mat += other.phi_mat * k;
    }
}

/// Moment form of the Taylor coefficients, O(M).
pub fn taylor_quadratic(
    d: &CompositeVector,
    sens: &ErrorSensitivity,
    ball: &UncertaintyBall,
) -> Result<RobustQuadratic> {
    check_len("sensitivity rows", d.d.len(), sens.len())?;
    let mut s = Complex64::new(0.0, 0.0);
    let mut s1 = [Complex64::new(0.0, 0.0); 3];
    let mut s2 = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (dm, fm) in d.d.iter().zip(sens.f.iter()) {
        s += dm;
        for k in 0..3 {
            s1[k] += dm * fm[k];
            for l in k..3 {
                s2[k][l] += dm * (fm[k] * fm[l]);
            }
        }
    }
    let pd = PI * sens.d_hat;
    let mut phi = Vector3::zeros();
    let mut phi_mat = Matrix3::zeros();
    for k in 0..3 {
        phi[k] = -2.0 * pd * (s1[k] * s.conj()).im;
        for l in k..3 {
            let v = -pd * pd * 2.0 * ((s2[k][l] * s.conj()).re - (s1[k] * s1[l].conj()).re);
            phi_mat[(k, l)] = v;
            phi_mat[(l, k)] = v;
        }
    }
    Ok(RobustQuadratic {
        q0: s.norm_sqr(),
        phi,
        phi_mat,
        d_hat: sens.d_hat,
        radius: ball.radius,
    })
}

/// `|e(Δ)ᵀ d|²` evaluated directly.
pub fn exact_received_power(
    d: &CompositeVector,
    sens: &ErrorSensitivity,
    delta: &LocationError,
) -> f64 {
    let e = error_vector(sens, delta);
    e.iter()
        .zip(d.d.iter())
        .map(|(a, b)| a * b)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Coefficients of `(q0, φ, Φ)` as linear functionals `Re tr(H X)` of a
/// Hermitian matrix variable `X`, where the composite outer product is
/// `d dᴴ = B X Bᴴ` for the basis `B` (`T` for the beamformer step, `Π` for
/// the phase-shift step).
#[derive(Debug, Clone)]
pub struct LiftedForms {
    /// `T = diag(ĝ) diag(ξ) G` or `Π = diag(diag(ĝ) G w)`.
    pub basis: CMatrix,
    /// `[R_q]_{mn} = (f_m − f_n)_q`, antisymmetric. `D_q = jπ d̂ R_q`.
    pub d_mats: [DMatrix<f64>; 3],
    /// `[A_sl]_{mn} = (jπ d̂)² (f_m − f_n)_s (f_m − f_n)_l`, symmetric, in [`SYM_PAIRS`] order.
    pub a_mats: [DMatrix<f64>; 6],
    pub d_hat: f64,
    pub radius: f64,
    q0_coeff: CMatrix,
    phi_coeff: [CMatrix; 3],
    phi_mat_coeff: [CMatrix; 6],
}

impl LiftedForms {
    fn build(basis: CMatrix, sens: &ErrorSensitivity, ball: &UncertaintyBall) -> Result<Self> {
        let m = basis.nrows();
        check_len("sensitivity rows", m, sens.len())?;
        let pd = PI * sens.d_hat;
        let d_mats: [DMatrix<f64>; 3] =
            std::array::from_fn(|q| DMatrix::from_fn(m, m, |a, b| sens.f[a][q] - sens.f[b][q]));
        let a_mats: [DMatrix<f64>; 6] = std::array::from_fn(|k| {
            let (s, l) = SYM_PAIRS[k];
            d_mats[s].component_mul(&d_mats[l]) * (-pd * pd)
        });

        let bh = basis.adjoint();
        let h1 = &bh * CVector::from_element(m, Complex64::new(1.0, 0.0));
        let q0_coeff = &h1 * h1.adjoint();
        let to_c = |r: &DMatrix<f64>| r.map(|x| Complex64::new(x, 0.0));
        // Re tr(H X) = Σ P_mn (B X Bᴴ)_mn  ⇔  H = Bᴴ Pᵀ B.
        let phi_coeff = std::array::from_fn(|q| {
            let pt = to_c(&d_mats[q]) * Complex64::new(0.0, -pd);
            &bh * pt * &basis
        });
        let phi_mat_coeff = std::array::from_fn(|k| &bh * to_c(&a_mats[k]) * &basis);
        Ok(Self {
            basis,
            d_mats,
            a_mats,
            d_hat: sens.d_hat,
            radius: ball.radius,
            q0_coeff,
            phi_coeff,
            phi_mat_coeff,
        })
    }

    /// Dimension of the matrix variable.
    pub fn var_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn q0_coeff(&self) -> &CMatrix {
        &self.q0_coeff
    }

    pub fn phi_coeff(&self, q: usize) -> &CMatrix {
        &self.phi_coeff[q]
    }

    /// Coefficient of `Φ_sl`; `(s, l)` in either order.
    pub fn phi_mat_coeff(&self, s: usize, l: usize) -> &CMatrix {
        let key = (s.min(l), s.max(l));
        let k = SYM_PAIRS
            .iter()
            .position(|p| *p == key)
            .expect("index in 0..3");
        &self.phi_mat_coeff[k]
    }

    /// `(Q̄, φ̄, Φ̄)` at the matrix variable `x`.
    pub fn evaluate(&self, x: &CMatrix) -> Result<RobustQuadratic> {
        let n = self.var_dim();
        if x.shape() != (n, n) {
            return Err(domain(format!(
                "matrix variable is {}x{}, expected {n}x{n}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mut phi = Vector3::zeros();
        let mut phi_mat = Matrix3::zeros();
        for q in 0..3 {
            phi[q] = re_trace(&self.phi_coeff[q], x);
        }
        for (k, &(s, l)) in SYM_PAIRS.iter().enumerate() {
            let v = re_trace(&self.phi_mat_coeff[k], x);
            phi_mat[(s, l)] = v;
            phi_mat[(l, s)] = v;
        }
        Ok(RobustQuadratic {
            q0: re_trace(&self.q0_coeff, x),
            phi,
            phi_mat,
            d_hat: self.d_hat,
            radius: self.radius,
        })
    }
}

/// `Re tr(H X)`.
pub fn re_trace(h: &CMatrix, x: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            acc += (h[(a, b)] * x[(b, a)]).re;
        }
    }
    acc
}

/// Lifted forms in the beamformer covariance `W̄ = w wᴴ` for fixed ξ.
pub fn lift_for_w(
    xi: &PhaseShifts,
    g_hat: &ReflectChannel,
    b2i: &ChannelB2I,
    sens: &ErrorSensitivity,
    ball: &UncertaintyBall,
) -> Result<LiftedForms> {
    let m = b2i.irs_elements();
    check_len("reflection channel", m, g_hat.len())?;
    check_len("phase shifts", m, xi.len())?;
    let diag = g_hat.vector.component_mul(xi.as_vector());
    let mut t = b2i.matrix.clone();
    for (i, mut row) in t.row_iter_mut().enumerate() {
        row *= diag[i];
    }
    LiftedForms::build(t, sens, ball)
}

/// Lifted forms in the phase-shift covariance `Ξ = ξ ξᴴ` for fixed w.
pub fn lift_for_xi(
    w: &CVector,
    g_hat: &ReflectChannel,
    b2i: &ChannelB2I,
    sens: &ErrorSensitivity,
    ball: &UncertaintyBall,
) -> Result<LiftedForms> {
    let ones = PhaseShifts::ones(b2i.irs_elements());
    let c = CompositeVector::new(g_hat, &ones, b2i, w)?;
    LiftedForms::build(CMatrix::from_diagonal(&c.d), sens, ball)
}

/// S-procedure block
///
/// ```text
/// [ q0 − γ − v − μ     ½φᵀ               ]
/// [ ½φ                 ½Φ + μ (d̂²/Υ²) I₃ ]
/// ```
///
/// as an affine function of `(μ, v)`. If it is PSD for some `μ ≥ 0` then
/// `q(Δ̄) ≥ γ + v` on the whole ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmiBlock {
    pub constant: Matrix4<f64>,
    pub mu_coeff: Matrix4<f64>,
    pub v_coeff: Matrix4<f64>,
}

impl LmiBlock {
    pub fn at(&self, mu: f64, v: f64) -> Matrix4<f64> {
        self.constant + self.mu_coeff * mu + self.v_coeff * v
    }

    pub fn min_eigenvalue(&self, mu: f64, v: f64) -> f64 {
        SymmetricEigen::new(self.at(mu, v)).eigenvalues.min()
    }

    /// Maximizes the minimum eigenvalue over `μ ≥ 0` (a concave function of μ).
    /// Returns `(μ, λ_min)`.
    pub fn best_mu(&self, v: f64) -> (f64, f64) {
        let f = |mu: f64| self.min_eigenvalue(mu, v);
        let at0 = f(0.0);
        // λ_min(μ) ≤ (0,0) entry = c − μ, so nothing beyond `hi` beats μ = 0.
        let c = self.constant[(0, 0)] - v;
        let hi = (c - at0).max(0.0);
        if hi == 0.0 {
            return (0.0, at0);
        }
        let (mut lo, mut up) = (0.0, hi);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = up - g * (up - lo);
        let mut x2 = lo + g * (up - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..200 {
            if up - lo <= 1e-14 * hi.max(1e-300) {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (up - lo);
                f2 = f(x2);
            } else {
                up = x2;
                x2 = x1;
                f2 = f1;
                x1 = up - g * (up - lo);
                f1 = f(x1);
            }
        }
        let mid = 0.5 * (lo + up);
        let fm = f(mid);
        if fm >= at0 {
            (mid, fm)
        } else {
            (0.0, at0)
        }
    }
}

/// Builds the S-procedure block for a fixed quadratic model and threshold γ.
pub fn assemble_lmi(rq: &RobustQuadratic, gamma: f64) -> Result<LmiBlock> {
    if !(gamma >= 0.0) {
        return Err(domain(format!("threshold must be >= 0, got {gamma}")));
    }
    if !(rq.radius > 0.0) {
        return Err(domain(
            "zero uncertainty radius: use the pointwise constraint q0 >= gamma",
        ));
    }
    let mut constant = Matrix4::zeros();
    constant[(0, 0)] = rq.q0 - gamma;
    for k in 0..3 {
        constant[(0, k + 1)] = 0.5 * rq.phi[k];
        constant[(k + 1, 0)] = 0.5 * rq.phi[k];
        for l in 0..3 {
            constant[(k + 1, l + 1)] = 0.5 * rq.phi_mat[(k, l)];
        }
    }
    let inv_rho2 = (rq.d_hat / rq.radius).powi(2);
    let mu_coeff =
        Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, inv_rho2, inv_rho2, inv_rho2));
    let v_coeff = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 0.0, 0.0, 0.0));
    Ok(LmiBlock {
        constant,
        mu_coeff,
        v_coeff,
    })
}

/// Sum of lifted evaluations, used by linearity checks.
pub fn combine(a: &RobustQuadratic, b: &RobustQuadratic) -> RobustQuadratic {
    let mut out = *a;
    out.add_scaled(b, 1.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UraGeometry;
    use crate::location::{error_sensitivity, Position3D};
    use crate::trust_region::min_quadratic_over_ball;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut impl Rng) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn setup(m_side: usize) -> (ErrorSensitivity, UncertaintyBall) {
        let geom = UraGeometry::half_wavelength(m_side, m_side).unwrap();
        let s = error_sensitivity(
            Position3D::ORIGIN,
            Position3D::new(20.0, 20.0, -20.0),
            &geom,
        )
        .unwrap();
        (s, UncertaintyBall::new(2.0).unwrap())
    }

    /// Pairwise definition, kept complex so the imaginary residue is visible.
    fn pairwise(
        d: &CVector,
        sens: &ErrorSensitivity,
    ) -> (Complex64, [Complex64; 3], [[Complex64; 3]; 3]) {
        let jpd = Complex64::new(0.0, PI * sens.d_hat);
        let mut q0 = Complex64::new(0.0, 0.0);
        let mut phi = [Complex64::new(0.0, 0.0); 3];
        let mut phim = [[Complex64::new(0.0, 0.0); 3]; 3];
        for m in 0..d.len() {
            for n in 0..d.len() {
                let dd = d[m] * d[n].conj();
                let diff = sens.f[m] - sens.f[n];
                q0 += dd;
                for s in 0..3 {
                    phi[s] += dd * jpd * diff[s];
                    for l in 0..3 {
                        phim[s][l] += dd * jpd * jpd * diff[s] * diff[l];
                    }
                }
            }
        }
        (q0, phi, phim)
    }

    #[test]
    fn moment_form_matches_pairwise_sums() {
        let (sens, ball) = setup(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = CVector::from_fn(9, |_, _| rc(&mut rng));
            let rq =
                taylor_quadratic(&CompositeVector::from_vector(d.clone()), &sens, &ball).unwrap();
            let (q0, phi, phim) = pairwise(&d, &sens);
            let scale = d.norm_squared();
            assert!((q0.re - rq.q0).abs() < 1e-12 * scale);
            for s in 0..3 {
                assert!(phi[s].im.abs() <= 1e-10 * scale * PI * sens.d_hat);
                assert!((phi[s].re - rq.phi[s]).abs() < 1e-10 * scale);
                for (l, p) in phim[s].iter().enumerate() {
                    assert!(p.im.abs() <= 1e-10 * scale * (PI * sens.d_hat).powi(2));
                    assert!((p.re - rq.phi_mat[(s, l)]).abs() < 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn degenerate_composites() {
        let (mut sens, ball) = setup(2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = CompositeVector::from_vector(CVector::from_fn(4, |_, _| rc(&mut rng)));
        let f0 = Vector3::new(0.1, -0.2, 0.3);
        sens.f.iter_mut().for_each(|f| *f = f0);
        let rq = taylor_quadratic(&d, &sens, &ball).unwrap();
        let scale = rq.q0 * (PI * sens.d_hat).powi(2);
        assert!(rq.phi.norm() < 1e-13 * scale && rq.phi_mat.norm() < 1e-13 * scale);

        let (sens, _) = setup(2);
        let mut single = CVector::zeros(4);
        single[2] = Complex64::new(0.6, -0.8);
        let rq = taylor_quadratic(&CompositeVector::from_vector(single), &sens, &ball).unwrap();
        assert!((rq.q0 - 1.0).abs() < 1e-14);
        assert!(rq.phi.norm() < 1e-14 && rq.phi_mat.norm() < 1e-14);
    }

    #[test]
    fn remainder_is_cubic() {
        let (sens, ball) = setup(3);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = CompositeVector::from_vector(CVector::from_fn(9, |_, _| rc(&mut rng)));
        let rq = taylor_quadratic(&d, &sens, &ball).unwrap();
        let u = Vector3::new(0.3, -0.7, 0.5).normalize();
        let rem = |t: f64| {
            let delta = LocationError { delta: u * t };
            (rq.eval_delta(&delta) - exact_received_power(&d, &sens, &delta)).abs()
        };
        let ratio = rem(0.2) / rem(0.1);
        assert!((6.0..=10.0).contains(&ratio), "ratio {ratio}");
        assert!((exact_received_power(&d, &sens, &LocationError::default()) - rq.q0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_bounds() {
        let (sens, _) = setup(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = CompositeVector::from_vector(CVector::from_fn(9, |_, _| rc(&mut rng)));
        let bound = d.d.iter().map(|x| x.norm()).sum::<f64>().powi(2);
        for _ in 0..100 {
            let delta = LocationError::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let p = exact_received_power(&d, &sens, &delta);
            assert!(p >= 0.0 && p <= bound * (1.0 + 1e-12));
        }
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        n: usize,
        m_side: usize,
    ) -> (
        ReflectChannel,
        ChannelB2I,
        PhaseShifts,
        CVector,
        ErrorSensitivity,
        UncertaintyBall,
    ) {
        let (sens, ball) = setup(m_side);
        let m = m_side * m_side;
        let geom = UraGeometry::half_wavelength(m_side, m_side).unwrap();
        let g_hat = ReflectChannel::new(
            rc(rng),
            crate::geometry::EffectiveAngles::new(0.577, -0.577),
            &geom,
        );
        let b2i = ChannelB2I {
            matrix: CMatrix::from_fn(m, n, |_, _| rc(rng)),
        };
        let xi = PhaseShifts::from_phases((0..m).map(|_| rng.random_range(-PI..PI)));
        let w = CVector::from_fn(n, |_, _| rc(rng));
        (g_hat, b2i, xi, w, sens, ball)
    }

    fn rel_close(a: &RobustQuadratic, b: &RobustQuadratic, tol: f64) -> bool {
        let scale = b.q0.abs() + b.phi.norm() + b.phi_mat.norm();
        (a.q0 - b.q0).abs() <= tol * scale
            && (a.phi - b.phi).norm() <= tol * scale
            && (a.phi_mat - b.phi_mat).norm() <= tol * scale
    }

    #[test]
    fn lifted_forms_reproduce_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let (g_hat, b2i, xi, w, sens, ball) = random_instance(&mut rng, 3, 3);
            let d = CompositeVector::new(&g_hat, &xi, &b2i, &w).unwrap();
            let direct = taylor_quadratic(&d, &sens, &ball).unwrap();

            let lw = lift_for_w(&xi, &g_hat, &b2i, &sens, &ball).unwrap();
            let via_w = lw.evaluate(&(&w * w.adjoint())).unwrap();
            assert!(rel_close(&via_w, &direct, 1e-9));

            let lx = lift_for_xi(&w, &g_hat, &b2i, &sens, &ball).unwrap();
            let x = xi.as_vector();
            let via_xi = lx.evaluate(&(x * x.adjoint())).unwrap();
            assert!(rel_close(&via_xi, &direct, 1e-9));
        }
    }

    #[test]
    fn lifted_forms_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let (g_hat, b2i, xi, _, sens, ball) = random_instance(&mut rng, 3, 2);
        let lw = lift_for_w(&xi, &g_hat, &b2i, &sens, &ball).unwrap();
        let zero = lw.evaluate(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(
            (zero.q0, zero.phi.norm(), zero.phi_mat.norm()),
            (0.0, 0.0, 0.0)
        );
        let a = CVector::from_fn(3, |_, _| rc(&mut rng));
        let b = CVector::from_fn(3, |_, _| rc(&mut rng));
        let wa = &a * a.adjoint();
        let wb = &b * b.adjoint();
        let sum = lw.evaluate(&(&wa + &wb)).unwrap();
        let parts = combine(&lw.evaluate(&wa).unwrap(), &lw.evaluate(&wb).unwrap());
        assert!(rel_close(&sum, &parts, 1e-12));
    }

    #[test]
    fn lifted_xi_at_identity_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let (g_hat, b2i, _, w, sens, ball) = random_instance(&mut rng, 3, 3);
        let lx = lift_for_xi(&w, &g_hat, &b2i, &sens, &ball).unwrap();
        let at_i = lx.evaluate(&CMatrix::identity(9, 9)).unwrap();
        // With Ξ = I only the diagonal m = n terms survive: Q̃ = Σ|c_m|², φ̃ = 0, Φ̃ = 0.
        let c = lx.basis.diagonal();
        assert!((at_i.q0 - c.norm_squared()).abs() < 1e-12 * c.norm_squared());
        assert!(at_i.phi.norm() < 1e-12 * c.norm_squared());
        assert!(at_i.phi_mat.norm() < 1e-10 * c.norm_squared());
        // Diagonal structure of the lifting matrices.
        for q in 0..3 {
            let dq = &lx.d_mats[q];
            assert!((dq + dq.transpose()).norm() < 1e-15);
        }
        for a in &lx.a_mats {
            assert!((a - a.transpose()).norm() < 1e-15);
        }
    }

    #[test]
    fn lmi_examples() {
        let base = RobustQuadratic {
            q0: 3.0,
            phi: Vector3::zeros(),
            phi_mat: Matrix3::zeros(),
            d_hat: 10.0,
            radius: 1.0,
        };
        let lmi = assemble_lmi(&base, 2.0).unwrap();
        for mu in [0.0, 0.5, 1.0] {
            assert!(lmi.min_eigenvalue(mu, 0.0) >= -1e-12);
        }
        assert!(lmi.min_eigenvalue(1.5, 0.0) < 0.0);

        let rho = 0.1;
        let concave = RobustQuadratic {
            q0: 1.0,
            phi: Vector3::zeros(),
            phi_mat: Matrix3::identity() * -2.0,
            d_hat: 10.0,
            radius: rho * 10.0,
        };
        let margin = rho * rho;
        let ok = assemble_lmi(&concave, 1.0 - margin).unwrap();
        assert!(ok.min_eigenvalue(margin, 0.0) >= -1e-12);
        let bad = assemble_lmi(&concave, 1.0 - 0.9 * margin).unwrap();
        assert!(bad.best_mu(0.0).1 < 0.0);
        let m = min_quadratic_over_ball(&concave);
        assert!((m.value - (1.0 - margin)).abs() < 1e-12);

        let mut zero_r = base;
        zero_r.radius = 0.0;
        assert!(assemble_lmi(&zero_r, 1.0).is_err());
        assert!(assemble_lmi(&base, -1.0).is_err());
    }

    #[test]
    fn certificate_implies_sampled_bound() {
        let (sens, ball) = setup(3);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut certified = 0;
        for _ in 0..30 {
            let d = CompositeVector::from_vector(CVector::from_fn(9, |_, _| rc(&mut rng)));
            let rq = taylor_quadratic(&d, &sens, &ball).unwrap();
            let gamma = 0.5 * min_quadratic_over_ball(&rq).value;
            if gamma <= 0.0 {
                continue;
            }
            let lmi = assemble_lmi(&rq, gamma).unwrap();
            let (mu, lam) = lmi.best_mu(0.0);
            assert!(lam >= 0.0, "S-lemma certificate should exist: {lam}");
            assert!(mu >= 0.0);
            certified += 1;
            let mut sampler = crate::location::ErrorSampler::new(ball, 5);
            for _ in 0..200 {
                assert!(rq.eval_delta(&sampler.sample()) >= gamma - 1e-7 * rq.q0);
            }
        }
        assert!(certified > 10);
    }
}
