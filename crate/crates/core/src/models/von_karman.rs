use nalgebra::DMatrix;

use super::{all_finite, finite, Defect};
use crate::error::{FsiError, Result};
use crate::plate::banded::{BandCholesky, SymBand};
use crate::plate::{biharmonic, GalerkinBasis, PlateGrid, Stencils};

const AIRY_TOL: f64 = 1e-10;
const DENSE_DEFECT_LIMIT: usize = 1600;

/// Airy stress function: `S v = −[η, η]`, clamped.
#[derive(Clone, Debug)]
pub struct AiryField {
    pub v: Vec<f64>,
    /// `‖S v + [η,η]‖ / ‖[η,η]‖` (zero when the bracket vanishes).
    pub residual: f64,
}

/// `[w, u] = w_xx u_yy + w_yy u_xx − 2 w_xy u_xy` with centred differences.
pub fn vk_bracket(grid: &PlateGrid, w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if w.len() != grid.len() || u.len() != grid.len() {
        return Err(FsiError::Parameter(format!(
            "bracket operands of length {} and {} on a grid of {}",
            w.len(),
            u.len(),
            grid.len()
        )));
    }
    let s = Stencils::new(grid);
    let (wxx, wyy, wxy) = (s.dxx(w), s.dyy(w), s.dxy(w));
    let (uxx, uyy, uxy) = (s.dxx(u), s.dyy(u), s.dxy(u));
    Ok((0..grid.len()).map(|i| wxx[i] * uyy[i] + wyy[i] * uxx[i] - 2.0 * wxy[i] * uxy[i]).collect())
}

/// One-off Airy solve; models reuse a stored factorisation instead.
pub fn airy_solve(basis: &GalerkinBasis, eta: &[f64]) -> Result<AiryField> {
    let band = biharmonic::assemble(basis.grid());
    let chol = band.cholesky()?;
    solve_with(basis.grid(), &band, &chol, eta)
}

fn solve_with(grid: &PlateGrid, band: &SymBand, chol: &BandCholesky, eta: &[f64]) -> Result<AiryField> {
    let b = vk_bracket(grid, eta, eta)?;
    let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if bn == 0.0 {
        return Ok(AiryField { v: vec![0.0; grid.len()], residual: 0.0 });
    }
    let rhs: Vec<f64> = b.iter().map(|x| -x).collect();
    let v = chol.solve(&rhs);
    all_finite(&v, "Airy solve")?;
    let sv = band.matvec(&v);
    let rn = sv.iter().zip(&b).map(|(s, b)| (s + b) * (s + b)).sum::<f64>().sqrt();
    let residual = rn / bn;
    if residual > AIRY_TOL {
        return Err(FsiError::Solver { detail: "Airy biharmonic solve".into(), residual });
    }
    Ok(AiryField { v, residual })
}

/// `Π = ¼‖Δv‖² − ½(η, L η) − (h, η)` with `L` the symmetric part of
/// `u ↦ [F₀, u]`; `F = −[η, v]ᵀ − Lη − h` in the adjoint sense.
pub(super) struct VonKarman {
    grid: PlateGrid,
    band: SymBand,
    chol: BandCholesky,
    f0xx: Vec<f64>,
    f0yy: Vec<f64>,
    f0xy: Vec<f64>,
    h: Vec<f64>,
    theta: f64,
}

impl VonKarman {
    pub fn new(grid: PlateGrid, f0: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let band = biharmonic::assemble(&grid);
        let chol = band.cholesky()?;
        let s = Stencils::new(&grid);
        let mut vk = Self { grid, band, chol, f0xx: s.dxx(&f0), f0yy: s.dyy(&f0), f0xy: s.dxy(&f0), h, theta: 0.0 };
        all_finite(&vk.f0xx, "von Karman F0 datum")?;
        vk.theta = vk.compute_theta();
        Ok(vk)
    }

    pub fn defect(&self) -> Defect {
        Defect { theta: self.theta, gamma: 0.0, c0: 0.0 }
    }

    /// `η ↦ [η, ·]ᵀ u`.
    fn bracket_adjoint(&self, eta: &[f64], u: &[f64]) -> Vec<f64> {
        let s = Stencils::new(&self.grid);
        let (exx, eyy, exy) = (s.dxx(eta), s.dyy(eta), s.dxy(eta));
        adjoint(&s, &exx, &eyy, &exy, u)
    }

    /// Symmetric part of `u ↦ [F₀, u]`.
    fn lsym(&self, u: &[f64]) -> Vec<f64> {
        let s = Stencils::new(&self.grid);
        let (uxx, uyy, uxy) = (s.dxx(u), s.dyy(u), s.dxy(u));
        let fwd = (0..u.len()).map(|i| self.f0xx[i] * uyy[i] + self.f0yy[i] * uxx[i] - 2.0 * self.f0xy[i] * uxy[i]);
        let adj = adjoint(&s, &self.f0xx, &self.f0yy, &self.f0xy, u);
        fwd.zip(adj).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Largest `θ` with `½ηᵀLη ≤ θ ηᵀSη`, clipped at zero.
    fn compute_theta(&self) -> f64 {
        let n = self.grid.len();
        if self.f0xx.iter().chain(&self.f0yy).chain(&self.f0xy).all(|v| *v == 0.0) {
            return 0.0;
        }
        if n <= DENSE_DEFECT_LIMIT {
            let mut l = DMatrix::zeros(n, n);
            let mut e = vec![0.0; n];
            for j in 0..n {
                e[j] = 1.0;
                let col = self.lsym(&e);
                e[j] = 0.0;
                for i in 0..n {
                    l[(i, j)] = 0.5 * col[i];
                }
            }
            let s = DMatrix::from_fn(n, n, |i, j| self.band.get(i, j));
            let Some(ch) = s.cholesky() else { return f64::INFINITY };
            let lo = ch.l();
            let x = lo.solve_lower_triangular(&l).expect("nonsingular factor");
            let c = lo.solve_lower_triangular(&x.transpose()).expect("nonsingular factor");
            let c = (&c + c.transpose()) * 0.5;
            let max = c.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            max.max(0.0)
        } else {
            // power iteration on S⁻¹L for the dominant |θ|, with a margin
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 97) as f64 / 97.0).collect();
            let mut est = 0.0;
            for _ in 0..500 {
                let y: Vec<f64> = self.chol.solve(&self.lsym(&x)).iter().map(|v| 0.5 * v).collect();
                let sy = self.band.matvec(&y);
                let num: f64 = y.iter().zip(&sy).map(|(a, b)| a * b).sum::<f64>().sqrt();
                let sx = self.band.matvec(&x);
                let den: f64 = x.iter().zip(&sx).map(|(a, b)| a * b).sum::<f64>().sqrt();
                let next = num / den;
                x = y;
                let done = (next - est).abs() <= 1e-10 * next;
                est = next;
                if done {
                    break;
                }
            }
            1.05 * est
        }
    }

    pub fn airy(&self, eta: &[f64]) -> Result<AiryField> {
        solve_with(&self.grid, &self.band, &self.chol, eta)
    }

    pub fn force(&self, eta: &[f64]) -> Result<Vec<f64>> {
        let v = self.airy(eta)?.v;
        let a = self.bracket_adjoint(eta, &v);
        let l = self.lsym(eta);
        let out: Vec<f64> = (0..eta.len()).map(|i| -a[i] - l[i] - self.h[i]).collect();
        all_finite(&out, "von Karman force")?;
        Ok(out)
    }

    pub fn potential(&self, eta: &[f64]) -> Result<f64> {
        let v = self.airy(eta)?.v;
        let sv = self.band.matvec(&v);
        let membrane = 0.25 * self.grid.inner(&v, &sv);
        let l = self.lsym(eta);
        let pre = 0.5 * self.grid.inner(eta, &l);
        finite(membrane - pre - self.grid.inner(&self.h, eta), "von Karman potential")
    }
}

/// `u ↦ Dyy(axx∘u) + Dxx(ayy∘u) − 2 Dxy(axy∘u)`, the transpose of
/// `u ↦ axx∘Dyy u + ayy∘Dxx u − 2 axy∘Dxy u` (the stencils are symmetric).
fn adjoint(s: &Stencils<'_>, axx: &[f64], ayy: &[f64], axy: &[f64], u: &[f64]) -> Vec<f64> {
    let m = |a: &[f64]| a.iter().zip(u).map(|(a, u)| a * u).collect::<Vec<_>>();
    let t1 = s.dyy(&m(axx));
    let t2 = s.dxx(&m(ayy));
    let t3 = s.dxy(&m(axy));
    (0..u.len()).map(|i| t1[i] + t2[i] - 2.0 * t3[i]).collect()
}
