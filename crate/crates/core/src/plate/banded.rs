use crate::error::{FsiError, Result};

/// Symmetric matrix in lower band storage.
#[derive(Clone, Debug)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + self.bw - (i - j)
    }

    /// Entry `(i, j)`; either triangle.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds to the lower-triangle entry `(i, j)`, `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn shift_diagonal(&mut self, sigma: f64) {
        for i in 0..self.n {
            let s = self.slot(i, i);
            self.data[s] += sigma;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.slot(i, i)] * x[i];
        }
        y
    }

    /// Band Cholesky factorisation `A = L Lᵀ`.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let mut l = self.clone();
        let bw = l.bw;
        for j in 0..l.n {
            let lo = j.saturating_sub(bw);
            let mut d = l.data[l.slot(j, j)];
            for k in lo..j {
                let v = l.data[l.slot(j, k)];
                d -= v * v;
            }
            if !(d > 0.0) {
                return Err(FsiError::Numeric(format!("band Cholesky: non-positive pivot {d:e} at row {j}")));
            }
            let d = d.sqrt();
            let sj = l.slot(j, j);
            l.data[sj] = d;
            let hi = (j + bw).min(l.n - 1);
            for i in j + 1..=hi {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l.data[l.slot(i, j)];
                for k in lo_i..j {
                    s -= l.data[l.slot(i, k)] * l.data[l.slot(j, k)];
                }
                let sij = l.slot(i, j);
                l.data[sij] = s / d;
            }
        }
        Ok(BandCholesky { l })
    }
}

#[derive(Clone, Debug)]
pub struct BandCholesky {
    l: SymBand,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let n = l.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(l.bw);
            let mut s = x[i];
            for k in lo..i {
                s -= l.data[l.slot(i, k)] * x[k];
            }
            x[i] = s / l.data[l.slot(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + l.bw).min(n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= l.data[l.slot(k, i)] * x[k];
            }
            x[i] = s / l.data[l.slot(i, i)];
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.l.n
    }
}
