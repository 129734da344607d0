//! Dense complex LU factorisation with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots below `PIVOT_FLOOR * max|A|` are treated as singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let mut m = Self::zeros(n);
        let fill = |(i, row): (usize, &mut [Complex64])| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            m.data.par_chunks_mut(n.max(1)).enumerate().for_each(fill);
        }
        #[cfg(not(feature = "parallel"))]
        m.data.chunks_mut(n.max(1)).enumerate().for_each(fill);
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Factor in place. Fails on a numerically zero pivot.
    pub fn lu(mut self) -> Result<LuFactors> {
        let n = self.n;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, self.data[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= PIVOT_FLOOR * scale {
                return Err(Error::SingularSystem { pivot: pmax, column: k });
            }
            if p != k {
                for j in 0..n {
                    self.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = self.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            let inv = pivot_row[k].inv();
            let update = |row: &mut [Complex64]| {
                let l = row[k] * inv;
                row[k] = l;
                if l.norm_sqr() != 0.0 {
                    for (r, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= l * u;
                    }
                }
            };
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                if n - k > 256 {
                    tail.par_chunks_mut(n).for_each(update);
                } else {
                    tail.chunks_mut(n).for_each(update);
                }
            }
            #[cfg(not(feature = "parallel"))]
            tail.chunks_mut(n).for_each(update);
        }
        Ok(LuFactors { n, lu: self.data, perm })
    }
}

/// `P A = L U` with unit lower `L` stored below the diagonal.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}
