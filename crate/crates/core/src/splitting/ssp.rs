use super::ode::{dopri5, gauss8, OdeStats};
use crate::error::{FsiError, Result};
use crate::models::PlateModel;
use crate::plate::GalerkinBasis;

/// Plate state at one stored time of a sub-interval.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    /// Offset from the start of the sub-interval.
    pub tau: f64,
    pub alpha: Vec<f64>,
    /// `∂tη` coefficients.
    pub rate: Vec<f64>,
}

/// Solution of one structure step on `[t0, t0 + dt]`: the start and end
/// points and the eight Gauss points in between.
#[derive(Clone, Debug)]
pub struct SspTrajectory {
    pub t0: f64,
    pub dt: f64,
    /// Frozen plate velocity `Vⁿ`.
    pub v: Vec<f64>,
    pub start: TrajectoryPoint,
    pub gauss: Vec<TrajectoryPoint>,
    pub gauss_weights: [f64; 8],
    pub end: TrajectoryPoint,
    pub stats: OdeStats,
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn diff_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Right-hand side `Vⁿ − Δt(Ξα + F̄(α))`.
pub fn ssp_rate(basis: &GalerkinBasis, model: &PlateModel, v: &[f64], dt: f64, alpha: &[f64]) -> Result<Vec<f64>> {
    let f = if model.is_zero() { vec![0.0; alpha.len()] } else { model.force(basis, alpha)? };
    Ok(alpha.iter().zip(basis.xi()).zip(&f).zip(v).map(|(((a, x), f), v)| v - dt * (x * a + f)).collect())
}

/// Integrates the structure step from `alpha0` with the plate velocity `v`
/// frozen. The solution is continued node to node so no interpolation
/// error enters the stored points.
pub fn ssp_step(
    basis: &GalerkinBasis,
    model: &PlateModel,
    alpha0: &[f64],
    v: &[f64],
    t0: f64,
    dt: f64,
    tol: f64,
) -> Result<SspTrajectory> {
    let k = basis.k();
    if alpha0.len() != k || v.len() != k {
        return Err(FsiError::Parameter(format!("{} / {} coefficients for {k} modes", alpha0.len(), v.len())));
    }
    let rhs = |_: f64, a: &[f64]| ssp_rate(basis, model, v, dt, a);
    let point = |tau: f64, a: Vec<f64>| -> Result<TrajectoryPoint> {
        let rate = rhs(tau, &a)?;
        Ok(TrajectoryPoint { tau, alpha: a, rate })
    };
    let (nodes, weights) = gauss8(dt);
    let mut stats = OdeStats::default();
    let mut h = 0.0;
    let mut tau = 0.0;
    let mut a = alpha0.to_vec();
    let mut gauss = Vec::with_capacity(8);
    for &x in nodes.iter().chain(std::iter::once(&dt)) {
        let (next, st) = dopri5(rhs, tau, x, &a, tol, &mut h).map_err(|e| match e {
            FsiError::Integrator { detail, .. } => FsiError::Integrator { t0: t0 + tau, t1: t0 + x, detail },
            e => e,
        })?;
        stats.add(st);
        a = next;
        tau = x;
        if gauss.len() < 8 {
            gauss.push(point(x, a.clone())?);
        }
    }
    Ok(SspTrajectory {
        t0,
        dt,
        v: v.to_vec(),
        start: point(0.0, alpha0.to_vec())?,
        gauss,
        gauss_weights: weights,
        end: point(dt, a)?,
        stats,
    })
}

impl SspTrajectory {
    /// `(η(t0+dt) − η(t0)) / dt`, exact from the endpoints.
    pub fn average_rate(&self) -> Vec<f64> {
        self.end.alpha.iter().zip(&self.start.alpha).map(|(b, a)| (b - a) / self.dt).collect()
    }

    fn points(&self) -> impl Iterator<Item = &TrajectoryPoint> {
        std::iter::once(&self.start).chain(&self.gauss).chain(std::iter::once(&self.end))
    }

    fn quad(&self, g: impl Fn(&TrajectoryPoint) -> f64) -> f64 {
        self.gauss.iter().zip(&self.gauss_weights).map(|(p, w)| w * g(p)).sum()
    }

    /// `∫ ‖∂tη‖²` over the sub-interval by the Gauss rule.
    pub fn rate_sq_integral(&self) -> f64 {
        self.quad(|p| sq(&p.rate))
    }

    /// `∫ ‖∂tη − Vⁿ‖²` over the sub-interval by the Gauss rule.
    pub fn mismatch_sq_integral(&self) -> f64 {
        self.quad(|p| diff_sq(&p.rate, &self.v))
    }

    /// `(1/Δt) ∫ ∂tη` by the Gauss rule; compare with [`Self::average_rate`].
    pub fn quadrature_average_rate(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.v.len()];
        for (p, w) in self.gauss.iter().zip(&self.gauss_weights) {
            for (m, r) in m.iter_mut().zip(&p.rate) {
                *m += w * r / self.dt;
            }
        }
        m
    }

    /// `max_t ‖∂tη(t) − Vⁿ‖` over the stored points.
    pub fn max_mismatch(&self) -> f64 {
        self.points().map(|p| diff_sq(&p.rate, &self.v).sqrt()).fold(0.0, f64::max)
    }

    /// `max_t ‖∂̃tη − ∂tη(t)‖²` over the stored points.
    pub fn max_average_defect_sq(&self) -> f64 {
        let avg = self.average_rate();
        self.points().map(|p| diff_sq(&p.rate, &avg)).fold(0.0, f64::max)
    }
}

/// Elastic energy `½‖Δη‖² = ½ Σ ξᵢ αᵢ²`.
pub fn elastic_energy(basis: &GalerkinBasis, alpha: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(basis.xi()).map(|(a, x)| x * a * a).sum::<f64>()
}

/// Terms of the structure-step energy equality at the end of a sub-interval:
/// `(1/2Δt)∫‖∂tη − Vⁿ‖² + S(end) = F(start)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SspEnergy {
    pub mismatch_term: f64,
    /// `S` at the end of the sub-interval.
    pub s_end: f64,
    /// `F` at the start: plate and fluid energy handed over by the previous step.
    pub f_start: f64,
    /// `|lhs − rhs|` over the sum of the magnitudes of all terms.
    pub residual: f64,
}

/// Checks the structure-step energy equality. `fluid_kinetic` is
/// `½∫Jⁿ|uⁿ|²`, which enters both sides unchanged.
pub fn ssp_energy(
    basis: &GalerkinBasis,
    model: &PlateModel,
    traj: &SspTrajectory,
    fluid_kinetic: f64,
) -> Result<SspEnergy> {
    let dt = traj.dt;
    let pi0 = model.potential(basis, &traj.start.alpha)?;
    let pi1 = model.potential(basis, &traj.end.alpha)?;
    let el0 = elastic_energy(basis, &traj.start.alpha);
    let el1 = elastic_energy(basis, &traj.end.alpha);
    let mis = traj.mismatch_sq_integral() / (2.0 * dt);
    let rate = traj.rate_sq_integral() / (2.0 * dt);
    let kin_v = 0.5 * sq(&traj.v);
    let s_end = rate + el1 + pi1 + fluid_kinetic;
    let f_start = kin_v + el0 + pi0 + fluid_kinetic;
    let scale = mis + rate + el1 + pi1.abs() + kin_v + el0 + pi0.abs() + fluid_kinetic;
    let diff = (mis + s_end - f_start).abs();
    let residual = if diff == 0.0 { 0.0 } else { diff / scale };
    Ok(SspEnergy { mismatch_term: mis, s_end, f_start, residual })
}
