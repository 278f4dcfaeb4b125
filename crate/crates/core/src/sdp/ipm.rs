//! Infeasible-start primal-dual path-following method with the HKM search
//! direction and Mehrotra predictor-corrector steps.
//!
//! Dual: `max bᵀy  s.t.  Σ y_i A_i + Z = C, Z ⪰ 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::standard::StandardForm;
use super::{SdpStatus, SolverOptions};

pub(crate) struct IpmOutcome {
    pub x_psd: Vec<DMatrix<f64>>,
    pub x_lin: DVector<f64>,
    pub primal_objective: f64,
    pub status: SdpStatus,
    pub certified_gap: f64,
    pub iterations: usize,
    pub diagnostic: String,
}

const INFEASIBILITY_TOL: f64 = 1e-8;

#[derive(Clone)]
struct Point {
    x: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
    zl: DVector<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
    dzl: DVector<f64>,
}

impl StandardForm {
    fn m(&self) -> usize {
        self.rows.len()
    }

    fn total_dim(&self) -> usize {
        self.psd_dims.iter().sum::<usize>() + self.lin_dim
    }

    /// A(X).
    fn apply(&self, x: &[DMatrix<f64>], xl: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|r| {
                r.psd.iter().map(|(b, a)| a.inner(&x[*b])).sum::<f64>()
                    + r.lin.iter().map(|&(k, v)| v * xl[k]).sum::<f64>()
            }),
        )
    }

    /// A*(y).
    fn adjoint(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mut s: Vec<DMatrix<f64>> = self
            .psd_dims
            .iter()
            .map(|&n| DMatrix::zeros(n, n))
            .collect();
        let mut sl = DVector::zeros(self.lin_dim);
        for (r, yi) in self.rows.iter().zip(y.iter()) {
            for (b, a) in &r.psd {
                a.add_scaled_to(&mut s[*b], *yi);
            }
            for &(k, v) in &r.lin {
                sl[k] += v * yi;
            }
        }
        (s, sl)
    }

    fn c_dense(&self) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let c = self
            .psd_dims
            .iter()
            .zip(&self.c_psd)
            .map(|(&n, c)| {
                let mut m = DMatrix::zeros(n, n);
                if let Some(c) = c {
                    c.add_scaled_to(&mut m, 1.0);
                }
                m
            })
            .collect();
        (c, self.c_lin.clone())
    }

    /// Rows touching each PSD block.
    fn block_rows(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.psd_dims.len()];
        for (i, r) in self.rows.iter().enumerate() {
            for (b, _) in &r.psd {
                out[*b].push(i);
            }
        }
        out
    }
}

fn inner_all(a: &[DMatrix<f64>], al: &DVector<f64>, b: &[DMatrix<f64>], bl: &DVector<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum::<f64>() + al.dot(bl)
}

fn norm_all(a: &[DMatrix<f64>], al: &DVector<f64>) -> f64 {
    (a.iter().map(|x| x.norm_squared()).sum::<f64>() + al.norm_squared()).sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let c = m.clone().cholesky()?;
    Some(sym(c.inverse()))
}

/// Largest α ≤ 1/0 such that `X + α dX ⪰ 0`, as `+∞` when unbounded.
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(ch) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = ch.l();
    let Some(linv) = l.clone().try_inverse() else {
        return 0.0;
    };
    let s = sym(&linv * dx * linv.transpose());
    let lmin = SymmetricEigen::new(s).eigenvalues.min();
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn max_step_lin(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn solve(f: &StandardForm, opt: &SolverOptions) -> IpmOutcome {
    let m = f.m();
    let ntot = f.total_dim() as f64;
    let (c, cl) = f.c_dense();
    let c_norm = norm_all(&c, &cl);
    let b_norm = f.b.norm();
    let block_rows = f.block_rows();

    // Initial point.
    let mut pt = {
        let mut x = Vec::new();
        let mut z = Vec::new();
        for (bi, &n) in f.psd_dims.iter().enumerate() {
            let sn = (n as f64).sqrt();
            let mut xi: f64 = 10f64.max(sn);
            let mut eta: f64 = 10f64.max(sn);
            for r in &f.rows {
                for (b, a) in &r.psd {
                    if *b == bi {
                        let an = a.frobenius();
                        let i = f.rows.iter().position(|rr| std::ptr::eq(rr, r)).unwrap();
                        xi = xi.max(sn * (1.0 + f.b[i].abs()) / (1.0 + an));
                        eta = eta.max(an);
                    }
                }
            }
            if let Some(cb) = &f.c_psd[bi] {
                eta = eta.max(cb.frobenius());
            }
            x.push(DMatrix::identity(n, n) * xi);
            z.push(DMatrix::identity(n, n) * eta);
        }
        let sn = (f.lin_dim.max(1) as f64).sqrt();
        let mut xi: f64 = 10f64.max(sn);
        let mut eta: f64 = 10f64.max(sn).max(f.c_lin.amax());
        for (i, r) in f.rows.iter().enumerate() {
            if !r.lin.is_empty() {
                let an = r.lin.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                xi = xi.max(sn * (1.0 + f.b[i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        Point {
            x,
            xl: DVector::from_element(f.lin_dim, xi),
            y: DVector::zeros(m),
            z,
            zl: DVector::from_element(f.lin_dim, eta),
        }
    };

    let mut status = SdpStatus::NumericalFailure;
    let mut diagnostic = String::from("iteration limit reached");
    let mut gap_measure = f64::INFINITY;
    let mut iterations = 0;
    let mut best: Option<(f64, Point)> = None;
    let mut stalls = 0;

    for it in 0..=opt.max_iter {
        iterations = it;
        let ax = f.apply(&pt.x, &pt.xl);
        let rp = &f.b - &ax;
        let (aty, atyl) = f.adjoint(&pt.y);
        let rd: Vec<DMatrix<f64>> = (0..c.len()).map(|k| &c[k] - &pt.z[k] - &aty[k]).collect();
        let rdl = &cl - &pt.zl - &atyl;
        let pobj = inner_all(&c, &cl, &pt.x, &pt.xl);
        let dobj = f.b.dot(&pt.y);
        let mu = inner_all(&pt.x, &pt.xl, &pt.z, &pt.zl) / ntot;
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = norm_all(&rd, &rdl) / (1.0 + c_norm);
        let rel_gap =
            (pobj - dobj).abs() / (1.0 + (pobj + f.obj_shift).abs() + (dobj + f.obj_shift).abs());
        let measure = rel_gap.max(pinf).max(dinf);
        log::trace!("ipm {it}: pobj {pobj:.6e} dobj {dobj:.6e} pinf {pinf:.2e} dinf {dinf:.2e} gap {rel_gap:.2e}");
        if measure < gap_measure {
            gap_measure = measure;
            best = Some((pobj, pt.clone()));
        }
        if measure <= opt.tol {
            status = SdpStatus::Optimal;
            diagnostic = format!("converged in {it} iterations");
            break;
        }
        // Farkas certificates.
        if dobj > 0.0 {
            let (s, sl) = (&aty, &atyl);
            let cert: f64 = (s
                .iter()
                .zip(&pt.z)
                .map(|(a, z)| (a + z).norm_squared())
                .sum::<f64>()
                + (sl + &pt.zl).norm_squared())
            .sqrt();
            if cert <= INFEASIBILITY_TOL * dobj {
                status = SdpStatus::Infeasible;
                diagnostic = format!("primal infeasible: dual ray with bᵀy = {dobj:.3e}");
                break;
            }
        }
        if pobj < 0.0 && ax.norm() <= INFEASIBILITY_TOL * (-pobj) {
            status = SdpStatus::Unbounded;
            diagnostic = format!("dual infeasible: primal ray with ⟨C, X⟩ = {pobj:.3e}");
            break;
        }
        if it == opt.max_iter {
            break;
        }

        // Z⁻¹ per block.
        let mut zinv = Vec::with_capacity(pt.z.len());
        for z in &pt.z {
            match spd_inverse(z) {
                Some(zi) => zinv.push(zi),
                None => {
                    diagnostic = format!("lost positive definiteness of Z at iteration {it}");
                    return finish(
                        f,
                        best,
                        pt,
                        SdpStatus::NumericalFailure,
                        gap_measure,
                        it,
                        diagnostic,
                    );
                }
            }
        }
        let zlinv = pt.zl.map(|v| 1.0 / v);

        // Schur complement M_ij = ⟨A_i, X A_j Z⁻¹⟩.
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (bi, rows) in block_rows.iter().enumerate() {
            for &j in rows {
                let aj = &f.rows[j].psd.iter().find(|(b, _)| *b == bi).unwrap().1;
                let g = aj.sandwich(&pt.x[bi], &zinv[bi]);
                for &i in rows {
                    let ai = &f.rows[i].psd.iter().find(|(b, _)| *b == bi).unwrap().1;
                    schur[(i, j)] += ai.inner(&g);
                }
            }
        }
        let dl = pt.xl.component_mul(&zlinv);
        for (i, ri) in f.rows.iter().enumerate() {
            for (j, rj) in f.rows.iter().enumerate() {
                let mut acc = 0.0;
                for &(k, vi) in &ri.lin {
                    for &(kk, vj) in &rj.lin {
                        if k == kk {
                            acc += vi * vj * dl[k];
                        }
                    }
                }
                schur[(i, j)] += acc;
            }
        }
        let schur = sym(schur);
        let chol = match schur.clone().cholesky() {
            Some(c) => c,
            None => {
                let reg = 1e-14 * schur.diagonal().amax().max(1e-300);
                match (schur + DMatrix::identity(m, m) * reg).cholesky() {
                    Some(c) => c,
                    None => {
                        diagnostic =
                            format!("Schur complement not positive definite at iteration {it}");
                        return finish(
                            f,
                            best,
                            pt,
                            SdpStatus::NumericalFailure,
                            gap_measure,
                            it,
                            diagnostic,
                        );
                    }
                }
            }
        };

        let x_rd_zinv: Vec<DMatrix<f64>> =
            (0..c.len()).map(|k| &pt.x[k] * &rd[k] * &zinv[k]).collect();
        let x_rd_zinv_l = pt.xl.component_mul(&rdl).component_mul(&zlinv);
        let base_rhs = &f.b + f.apply(&x_rd_zinv, &x_rd_zinv_l);

        let direction = |rhs: DVector<f64>,
                         sigma_mu: f64,
                         corr: Option<(&Vec<DMatrix<f64>>, &DVector<f64>)>|
         -> Direction {
            let dy = if m > 0 {
                chol.solve(&rhs)
            } else {
                DVector::zeros(0)
            };
            let (ady, adyl) = f.adjoint(&dy);
            let dz: Vec<DMatrix<f64>> = (0..c.len()).map(|k| &rd[k] - &ady[k]).collect();
            let dzl = &rdl - &adyl;
            let mut dx = Vec::with_capacity(c.len());
            for k in 0..c.len() {
                let mut inner = &pt.x[k] * &dz[k];
                if let Some((cx, _)) = corr {
                    inner += &cx[k];
                }
                let t = sym(inner * &zinv[k]);
                dx.push(&zinv[k] * sigma_mu - &pt.x[k] - t);
            }
            let mut dxl = DVector::zeros(f.lin_dim);
            for k in 0..f.lin_dim {
                let mut inner = pt.xl[k] * dzl[k];
                if let Some((_, cl)) = corr {
                    inner += cl[k];
                }
                dxl[k] = sigma_mu * zlinv[k] - pt.xl[k] - inner * zlinv[k];
            }
            Direction {
                dx,
                dxl,
                dy,
                dz,
                dzl,
            }
        };

        let step_lengths = |d: &Direction| -> (f64, f64) {
            let mut ap = max_step_lin(&pt.xl, &d.dxl);
            let mut ad = max_step_lin(&pt.zl, &d.dzl);
            for k in 0..c.len() {
                ap = ap.min(max_step_psd(&pt.x[k], &d.dx[k]));
                ad = ad.min(max_step_psd(&pt.z[k], &d.dz[k]));
            }
            (ap, ad)
        };

        // Predictor.
        let pred = direction(base_rhs.clone(), 0.0, None);
        let (ap, ad) = step_lengths(&pred);
        let (ap1, ad1) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = {
            let xs: Vec<DMatrix<f64>> =
                (0..c.len()).map(|k| &pt.x[k] + &pred.dx[k] * ap1).collect();
            let zs: Vec<DMatrix<f64>> =
                (0..c.len()).map(|k| &pt.z[k] + &pred.dz[k] * ad1).collect();
            inner_all(
                &xs,
                &(&pt.xl + &pred.dxl * ap1),
                &zs,
                &(&pt.zl + &pred.dzl * ad1),
            ) / ntot
        };
        let expo = 1f64.max(3.0 * ap1.min(ad1).powi(2));
        let sigma = if mu > 0.0 {
            (mu_aff.max(0.0) / mu).powf(expo).min(1.0)
        } else {
            0.0
        };

        // Corrector.
        let cx: Vec<DMatrix<f64>> = (0..c.len()).map(|k| &pred.dx[k] * &pred.dz[k]).collect();
        let cxl = pred.dxl.component_mul(&pred.dzl);
        let cx_zinv: Vec<DMatrix<f64>> = (0..c.len()).map(|k| &cx[k] * &zinv[k]).collect();
        let cxl_zinv = cxl.component_mul(&zlinv);
        let zinv_l_sum = f.apply(&zinv, &zlinv);
        let rhs = &base_rhs - zinv_l_sum * (sigma * mu) + f.apply(&cx_zinv, &cxl_zinv);
        let corr = direction(rhs, sigma * mu, Some((&cx, &cxl)));
        let (ap, ad) = step_lengths(&corr);
        let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls > 3 {
                diagnostic = format!("step length collapsed at iteration {it}");
                return finish(
                    f,
                    best,
                    pt,
                    SdpStatus::NumericalFailure,
                    gap_measure,
                    it,
                    diagnostic,
                );
            }
        } else {
            stalls = 0;
        }
        for k in 0..c.len() {
            pt.x[k] = sym(&pt.x[k] + &corr.dx[k] * ap);
            pt.z[k] = sym(&pt.z[k] + &corr.dz[k] * ad);
        }
        pt.xl += &corr.dxl * ap;
        pt.zl += &corr.dzl * ad;
        pt.y += &corr.dy * ad;
    }

    if status == SdpStatus::Optimal {
        let pobj = inner_all(&c, &cl, &pt.x, &pt.xl);
        return IpmOutcome {
            x_psd: pt.x,
            x_lin: pt.xl,
            primal_objective: pobj,
            status,
            certified_gap: gap_measure,
            iterations,
            diagnostic,
        };
    }
    finish(f, best, pt, status, gap_measure, iterations, diagnostic)
}

fn finish(
    f: &StandardForm,
    best: Option<(f64, Point)>,
    current: Point,
    status: SdpStatus,
    gap: f64,
    iterations: usize,
    diagnostic: String,
) -> IpmOutcome {
    let (pobj, pt) = match (status, best) {
        (SdpStatus::NumericalFailure, Some(b)) => b,
        _ => {
            let (c, cl) = f.c_dense();
            (inner_all(&c, &cl, &current.x, &current.xl), current)
        }
    };
    IpmOutcome {
        x_psd: pt.x,
        x_lin: pt.xl,
        primal_objective: pobj,
        status,
        certified_gap: gap,
        iterations,
        diagnostic,
    }
}
