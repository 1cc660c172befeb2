use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::SymBand;
use crate::error::{FsiError, Result};

/// Grids with at most this many unknowns use the dense solver under `Auto`.
pub const DENSE_LIMIT: usize = 4096;

const ITER_SEED: u64 = 0x5eed_b1a5;
const ITER_MAX: usize = 2000;
const ITER_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigenMethod {
    #[default]
    Auto,
    Dense,
    /// Block inverse iteration with Rayleigh–Ritz, seeded.
    Iterative,
}

/// The `k` smallest eigenpairs of `a`, ascending, with unit-Euclidean
/// eigenvectors stored as columns.
pub fn smallest(a: &SymBand, k: usize, method: EigenMethod) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(FsiError::Parameter(format!("k_max = {k} must lie in 1..={n}")));
    }
    let dense = match method {
        EigenMethod::Auto => n <= DENSE_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Iterative => false,
    };
    let (vals, mut vecs) = if dense { dense_solve(a, k)? } else { iterative_solve(a, k)? };
    for mut c in vecs.column_iter_mut() {
        fix_sign(c.as_mut_slice());
    }
    Ok((vals, vecs))
}

fn dense_solve(a: &SymBand, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.dim();
    let m = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let eig = SymmetricEigen::try_new(m, 1e-15, 0).ok_or_else(|| FsiError::Eigensolver {
        index: 0,
        detail: "dense symmetric QR iteration did not converge".into(),
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, k, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

fn iterative_solve(a: &SymBand, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.dim();
    let m = (2 * k + 8).min(n);
    let chol = a.cholesky().map_err(|e| FsiError::Eigensolver { index: 0, detail: e.to_string() })?;
    let mut rng = ChaCha8Rng::seed_from_u64(ITER_SEED);
    let mut x = orthonormalize(DMatrix::from_fn(n, m, |_, _| rng.random::<f64>() - 0.5));
    let mut worst = (0, f64::INFINITY);
    for _ in 0..ITER_MAX {
        let mut y = DMatrix::zeros(n, m);
        for c in 0..m {
            let col = chol.solve(x.column(c).as_slice());
            y.column_mut(c).copy_from_slice(&col);
        }
        let q = orthonormalize(y);
        let mut aq = DMatrix::zeros(n, m);
        for c in 0..m {
            let col = a.matvec(q.column(c).as_slice());
            aq.column_mut(c).copy_from_slice(&col);
        }
        let h = q.transpose() * &aq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let v = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = &q * &v;
        let ax = &aq * &v;
        worst = (0, 0.0);
        for i in 0..k {
            let r = (ax.column(i) - x.column(i) * theta[i]).norm() / theta[i].abs();
            if r > worst.1 {
                worst = (i, r);
            }
        }
        if worst.1 <= ITER_TOL {
            return Ok((theta[..k].to_vec(), x.columns(0, k).into_owned()));
        }
    }
    Err(FsiError::Eigensolver {
        index: worst.0,
        detail: format!("inverse iteration stalled, relative residual {:e}", worst.1),
    })
}

/// Sign convention: the first entry whose magnitude is within 1e-6 of the
/// largest magnitude is made positive.
fn fix_sign(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(p) = v.iter().find(|x| x.abs() >= big * (1.0 - 1e-6)) {
        if *p < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
