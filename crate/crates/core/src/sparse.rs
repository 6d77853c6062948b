//! Minimal real CSR matrices for the truncated ladder algebra.

use num_complex::Complex64;

/// Compressed sparse row matrix with `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl Csr {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        let mut indptr = vec![0usize; nrows + 1];
        for t in &merged {
            indptr[t.0 + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices: merged.iter().map(|t| t.1).collect(),
            data: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_triplets(n, n, d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.data[self.indptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trip = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.nrows, self.ncols, trip)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        for (r, k, a) in self.triplets() {
            for idx in other.indptr[k]..other.indptr[k + 1] {
                trip.push((r, other.indices[idx], a * other.data[idx]));
            }
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, a) in self.triplets() {
            for (r2, c2, b) in other.triplets() {
                trip.push((r1 * other.nrows + r2, c1 * other.ncols + c2, a * b));
            }
        }
        Self::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, trip)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| x[self.indices[k]] * self.data[k])
                    .sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }
}

/// Truncated single-mode annihilation operator, `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(n_trunc: usize) -> Csr {
    Csr::from_triplets(
        n_trunc,
        n_trunc,
        (1..n_trunc).map(|n| (n - 1, n, (n as f64).sqrt())).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_commutator_defect() {
        let a = annihilation(5);
        let c = a.commutator(&a.transpose());
        for i in 0..4 {
            assert!((c.get(i, i) - 1.0).abs() < 1e-14);
        }
        assert!((c.get(4, 4) + 4.0).abs() < 1e-14);
        assert!(c.is_diagonal());
    }

    #[test]
    fn kron_and_matmul_against_dense() {
        let a = annihilation(3);
        let b = a.transpose().add(&Csr::identity(3).scale(0.5));
        let k = a.kron(&b);
        let kd = k.to_dense();
        let ad = a.to_dense();
        let bd = b.to_dense();
        for r in 0..9 {
            for c in 0..9 {
                assert_eq!(kd[(r, c)], ad[(r / 3, c / 3)] * bd[(r % 3, c % 3)]);
            }
        }
        let p = k.matmul(&k.transpose()).to_dense();
        assert!((p - &kd * kd.transpose()).abs().max() < 1e-14);
    }

    #[test]
    fn mul_vec_matches_dense() {
        let a = annihilation(4);
        let x: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let y = a.mul_vec(&x);
        assert!((y[0] - x[1]).norm() < 1e-15);
        assert!((y[2] - x[3] * 3f64.sqrt()).norm() < 1e-15);
        assert_eq!(y[3], Complex64::new(0.0, 0.0));
    }
}
