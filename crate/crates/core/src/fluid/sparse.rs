use std::io::Write;
use std::path::Path;

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use std::sync::{Arc, Mutex};

use crate::error::{FsiError, Result};

/// Square CSR matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub ptr: Vec<usize>,
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Builds the pattern from `(row, col)` pairs; values start at zero.
    pub fn pattern(n: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut ptr = vec![0; n + 1];
        for &(r, _) in &pairs {
            ptr[r + 1] += 1;
        }
        for i in 0..n {
            ptr[i + 1] += ptr[i];
        }
        let idx = pairs.iter().map(|p| p.1).collect();
        Self { n, ptr, idx, val: vec![0.0; pairs.len()] }
    }

    /// Sums duplicate triplets.
    pub fn from_triplets(n: usize, t: &[(usize, usize, f64)]) -> Self {
        let mut m = Self::pattern(n, t.iter().map(|x| (x.0, x.1)).collect());
        for &(r, c, v) in t {
            let s = m.slot(r, c).expect("entry in pattern");
            m.val[s] += v;
        }
        m
    }

    pub fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let row = &self.idx[self.ptr[r]..self.ptr[r + 1]];
        row.binary_search(&c).ok().map(|k| self.ptr[r] + k)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.slot(r, c).map_or(0.0, |s| self.val[s])
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| (self.ptr[r]..self.ptr[r + 1]).map(|s| self.val[s] * x[self.idx[s]]).sum()).collect()
    }

    pub fn quad(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `max |M + Mᵀ|` over all entries.
    pub fn max_sym_part(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for s in self.ptr[r]..self.ptr[r + 1] {
                let c = self.idx[s];
                worst = worst.max((self.val[s] + self.get(c, r)).abs());
            }
        }
        worst
    }

    /// `max |M − Mᵀ|`.
    pub fn max_skew_part(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for s in self.ptr[r]..self.ptr[r + 1] {
                let c = self.idx[s];
                worst = worst.max((self.val[s] - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| (self.ptr[r]..self.ptr[r + 1]).map(move |s| (r, self.idx[s], self.val[s])))
    }

    /// Matrix Market coordinate format, 1-based, general real.
    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_vector_market(path: &Path, v: &[f64]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Sparse LU solve (fill-reducing column ordering, partial pivoting).
/// Returns the solution and `‖Ax − b‖ / ‖b‖`.
pub fn lu_solve(a: &Csr, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    LuCache::default().solve(a, b)
}

/// Reuses the symbolic LU analysis while the sparsity pattern is unchanged.
/// Clones share the cache.
/// Column pointers, row indices, and the analysis for that pattern.
type Symbolic = (Vec<usize>, Vec<usize>, SymbolicLu<usize>);

#[derive(Clone, Default)]
pub struct LuCache {
    inner: Arc<Mutex<Option<Symbolic>>>,
}

impl std::fmt::Debug for LuCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LuCache")
    }
}

fn solver_err(what: &str, e: impl std::fmt::Debug) -> FsiError {
    FsiError::Solver { detail: format!("{what}: {e:?}"), residual: f64::NAN }
}

impl LuCache {
    /// Solves `a x = b` and returns `x` with the relative residual.
    pub fn solve(&self, a: &Csr, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let bn = norm(b);
        if bn == 0.0 {
            return Ok((vec![0.0; a.n], 0.0));
        }
        let trip: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &trip)
            .map_err(|e| solver_err("matrix construction", e))?;
        let sym = {
            let mut g = self.inner.lock().unwrap_or_else(|p| p.into_inner());
            match &*g {
                Some((ptr, idx, s)) if *ptr == a.ptr && *idx == a.idx => s.clone(),
                _ => {
                    let s = SymbolicLu::try_new(m.symbolic()).map_err(|e| solver_err("symbolic LU", e))?;
                    *g = Some((a.ptr.clone(), a.idx.clone(), s.clone()));
                    s
                }
            }
        };
        let lu = Lu::try_new_with_symbolic(sym, m.as_ref()).map_err(|e| solver_err("sparse LU factorization", e))?;
        let rhs = Mat::<f64>::from_fn(a.n, 1, |i, _| b[i]);
        let sol = lu.solve(&rhs);
        let x: Vec<f64> = (0..a.n).map(|i| sol[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FsiError::Solver { detail: "sparse LU produced non-finite values".into(), residual: f64::NAN });
        }
        let r = a.matvec(&x);
        let res = norm(&r.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>()) / bn;
        Ok((x, res))
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
