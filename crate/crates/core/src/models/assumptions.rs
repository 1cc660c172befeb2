use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::PlateModel;
use crate::error::{FsiError, Result};
use crate::exec::{self, ExecMode};
use crate::plate::GalerkinBasis;

/// Lipschitz estimates are scaled by this safety factor.
pub const LIPSCHITZ_SAFETY: f64 = 2.0;
pub const COERCIVITY_TOL: f64 = 1e-12;
/// Relative margin added to the sampled `max Π` over the initial ball.
pub const C_PI_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoercivityReport {
    pub min_margin: f64,
    pub pass: bool,
}

/// Record written for each assumption check.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AssumptionReport {
    pub model: String,
    #[serde(rename = "R")]
    pub r: f64,
    pub seed: u64,
    #[serde(rename = "C_R")]
    pub c_r: f64,
    pub kappa: f64,
    #[serde(rename = "C_star")]
    pub c_star: f64,
    pub min_margin: f64,
    pub pass: bool,
    /// The sampled constant is an empirical estimate, not a proven bound.
    pub label: String,
}

/// Seeded Monte Carlo probes of a model's structural assumptions. Samples
/// are drawn sequentially from the seed and then evaluated in `mode`, so the
/// results do not depend on the execution mode.
pub struct Sampler<'a> {
    pub model: &'a PlateModel,
    pub basis: &'a GalerkinBasis,
    pub seed: u64,
    pub mode: ExecMode,
}

impl<'a> Sampler<'a> {
    pub fn new(model: &'a PlateModel, basis: &'a GalerkinBasis, seed: u64) -> Self {
        Self { model, basis, seed, mode: ExecMode::default() }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    /// Uniform sample of the spectral H² ball of the given radius.
    fn ball(&self, rng: &mut ChaCha8Rng, radius: f64) -> Vec<f64> {
        let dir = self.unit(rng);
        let k = dir.len() as f64;
        let u: f64 = rng.random();
        let rho = radius * u.powf(1.0 / k);
        dir.iter().map(|d| rho * d).collect()
    }

    /// Random coefficient vector with unit spectral H² norm.
    fn unit(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let xi = self.basis.xi();
        loop {
            let z: Vec<f64> = xi.iter().map(|_| rng.sample(StandardNormal)).collect();
            let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-12 {
                return z.iter().zip(xi).map(|(z, x)| z / (n * x.sqrt())).collect();
            }
        }
    }

    fn h2(&self, c: &[f64]) -> f64 {
        self.basis.spectral_norm_unchecked(c, 2.0)
    }

    /// Empirical `C_R` over pairs in the H² ball of radius `r`: the largest
    /// sampled `‖F̄(η₁) − F̄(η₂)‖_{H^{−a}} / ‖η₁ − η₂‖_{H²}`, times
    /// [`LIPSCHITZ_SAFETY`]. Half the pairs are independent, half are close.
    pub fn estimate_lipschitz(&self, r: f64, a: f64, n_samples: usize) -> Result<f64> {
        if n_samples < 100 {
            return Err(FsiError::Parameter(format!("n_samples = {n_samples} < 100")));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(FsiError::Parameter(format!("radius {r} must be finite and >= 0")));
        }
        if !(0.0..2.0).contains(&a) {
            return Err(FsiError::Parameter(format!("a = {a} must lie in [0, 2)")));
        }
        if self.model.is_zero() {
            return Ok(0.0);
        }
        let mut rng = self.rng(1);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples)
            .map(|s| {
                if s % 2 == 0 {
                    (self.ball(&mut rng, r), self.ball(&mut rng, r))
                } else {
                    let x = self.ball(&mut rng, r * (1.0 - 1e-3));
                    let d = self.unit(&mut rng);
                    let y = x.iter().zip(&d).map(|(x, d)| x + 1e-3 * r * d).collect();
                    (x, y)
                }
            })
            .collect();
        let ratios = exec::map_collect(self.mode, &pairs, |(x, y)| -> Result<Option<f64>> {
            let dc: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let den = self.h2(&dc);
            if den == 0.0 {
                return Ok(None);
            }
            let fx = self.model.force(self.basis, x)?;
            let fy = self.model.force(self.basis, y)?;
            let df: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
            Ok(Some(self.basis.spectral_norm_unchecked(&df, -a) / den))
        });
        let mut best: Option<f64> = None;
        for r in ratios {
            if let Some(v) = r? {
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        best.map(|b| LIPSCHITZ_SAFETY * b).ok_or_else(|| FsiError::Sampling("every sampled pair was degenerate".into()))
    }

    /// Minimum of `κ‖Δη‖² + Π(η) + C*` over samples from the H² ball.
    pub fn check_coercivity(&self, r: f64, n_samples: usize) -> Result<CoercivityReport> {
        let c = self.model.constants();
        let mut rng = self.rng(2);
        let mut samples: Vec<Vec<f64>> = (0..n_samples).map(|_| self.ball(&mut rng, r)).collect();
        // the boundary sphere is where coercivity is tightest for polynomial Π
        for s in samples.iter_mut().skip(1).step_by(2) {
            let n = self.h2(s);
            if n > 0.0 {
                s.iter_mut().for_each(|v| *v *= r / n);
            }
        }
        let vals = exec::map_collect(self.mode, &samples, |s| -> Result<f64> {
            let lap2 = self.h2(s).powi(2);
            Ok(c.kappa * lap2 + self.model.potential(self.basis, s)? + c.c_star)
        });
        let mut min = f64::INFINITY;
        for v in vals {
            min = min.min(v?);
        }
        if n_samples == 0 {
            min = c.c_star;
        }
        Ok(CoercivityReport { min_margin: min, pass: min >= -COERCIVITY_TOL })
    }

    /// Constructive `C(Π, η₀)`: the largest `Π` over samples with
    /// `‖η‖_{H²} ≤ ‖η₀‖_{H²}` (η₀ itself included) plus a 10% margin.
    pub fn c_pi_eta0(&self, eta0: &[f64], n_samples: usize) -> Result<f64> {
        let r = self.h2(eta0);
        let mut rng = self.rng(3);
        let mut samples = vec![eta0.to_vec()];
        samples.extend((0..n_samples).map(|_| self.ball(&mut rng, r)));
        let vals = exec::map_collect(self.mode, &samples, |s| self.model.potential(self.basis, s));
        let mut max = f64::NEG_INFINITY;
        for v in vals {
            max = max.max(v?);
        }
        Ok(max + C_PI_MARGIN * max.abs())
    }

    pub fn report(&self, r: f64, n_samples: usize) -> Result<AssumptionReport> {
        let c = *self.model.constants();
        let c_r = self.estimate_lipschitz(r, c.a, n_samples.max(100))?;
        let co = self.check_coercivity(r, n_samples)?;
        Ok(AssumptionReport {
            model: self.model.name().into(),
            r,
            seed: self.seed,
            c_r,
            kappa: c.kappa,
            c_star: c.c_star,
            min_margin: co.min_margin,
            pass: co.pass,
            label: "empirical".into(),
        })
    }
}
