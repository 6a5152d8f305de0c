//! Sparse symmetric matrices and block Cholesky factorizations.
//!
//! Precision matrices in this crate are a diagonal plus a sparse off-diagonal pattern.
//! Factorizations split the pattern into connected components and factor each block
//! densely, so a matrix with only a few hundred edges at `p = 1000` costs almost nothing.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::math;

/// A real symmetric matrix stored as its diagonal and the strictly upper off-diagonal
/// entries `(i, j, v)` with `i < j`, sorted lexicographically, no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    diag: Vec<f64>,
    off: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    /// Build from a diagonal and a list of off-diagonal entries. Entries may be given in
    /// either triangle; duplicates of the same pair are summed and exact zeros dropped.
    pub fn new(diag: Vec<f64>, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = diag.len();
        let mut off = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i.max(j) + 1,
                });
            }
            if i == j {
                return Err(crate::error::invalid(
                    "entries",
                    "diagonal entries belong in `diag`",
                ));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            off.push((a, b, v));
        }
        Ok(Self::from_unsorted(diag, off))
    }

    fn from_unsorted(diag: Vec<f64>, mut off: Vec<(usize, usize, f64)>) -> Self {
        off.sort_by_key(|x| (x.0, x.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(off.len());
        for e in off {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        SparseSym { diag, off: merged }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::diagonal(vec![0.0; n])
    }

    pub fn diagonal(diag: Vec<f64>) -> Self {
        SparseSym {
            diag,
            off: Vec::new(),
        }
    }

    /// Convert a dense matrix; it must be exactly symmetric.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.ncols(),
            });
        }
        let mut off = Vec::new();
        for j in 0..n {
            for i in 0..j {
                let v = m[(i, j)];
                if v != m[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                if v != 0.0 {
                    off.push((i, j, v));
                }
            }
        }
        let diag = (0..n).map(|i| m[(i, i)]).collect();
        Ok(Self::from_unsorted(diag, off))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        for &(i, j, v) in &self.off {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Strictly upper off-diagonal entries, sorted.
    pub fn offdiag(&self) -> &[(usize, usize, f64)] {
        &self.off
    }

    pub fn offdiag_support(&self) -> Vec<(usize, usize)> {
        self.off.iter().map(|&(i, j, _)| (i, j)).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let key = if i < j { (i, j) } else { (j, i) };
        match self.off.binary_search_by(|e| (e.0, e.1).cmp(&key)) {
            Ok(k) => self.off[k].2,
            Err(_) => 0.0,
        }
    }

    /// Replace the diagonal, keeping the off-diagonal pattern bit-identical.
    pub fn with_diag(&self, diag: Vec<f64>) -> Self {
        assert_eq!(diag.len(), self.dim());
        SparseSym {
            diag,
            off: self.off.clone(),
        }
    }

    pub fn map_diag(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        self.with_diag(self.diag.iter().map(|&d| f(d)).collect())
    }

    /// The off-diagonal part only (zero diagonal).
    pub fn offdiag_part(&self) -> Self {
        self.with_diag(vec![0.0; self.dim()])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for &(i, j, v) in &self.off {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
        y
    }

    /// `x' M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        let mut s = 0.0;
        for (d, v) in self.diag.iter().zip(x) {
            s += d * v * v;
        }
        let mut o = 0.0;
        for &(i, j, v) in &self.off {
            o += v * x[i] * x[j];
        }
        s + 2.0 * o
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|v| v * v).sum();
        let o: f64 = self.off.iter().map(|e| e.2 * e.2).sum();
        d + 2.0 * o
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_unsorted(
            self.diag.iter().map(|d| d * s).collect(),
            self.off.iter().map(|&(i, j, v)| (i, j, v * s)).collect(),
        )
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diag = self
            .diag
            .iter()
            .zip(&other.diag)
            .map(|(a, b)| a + sign * b)
            .collect();
        let mut off = Vec::with_capacity(self.off.len() + other.off.len());
        let (mut a, mut b) = (0, 0);
        while a < self.off.len() || b < other.off.len() {
            let ka = self.off.get(a).map(|e| (e.0, e.1));
            let kb = other.off.get(b).map(|e| (e.0, e.1));
            match (ka, kb) {
                (Some(x), Some(y)) if x == y => {
                    off.push((x.0, x.1, self.off[a].2 + sign * other.off[b].2));
                    a += 1;
                    b += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    off.push(self.off[a]);
                    a += 1;
                }
                (Some(_), None) => {
                    off.push(self.off[a]);
                    a += 1;
                }
                _ => {
                    let e = other.off[b];
                    off.push((e.0, e.1, sign * e.2));
                    b += 1;
                }
            }
        }
        off.retain(|e| e.2 != 0.0);
        Ok(SparseSym { diag, off })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// Principal submatrix on `idx` (which must be strictly increasing).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let diag = idx.iter().map(|&i| self.diag[i]).collect();
        let off = self
            .off
            .iter()
            .filter(|e| pos[e.0] != usize::MAX && pos[e.1] != usize::MAX)
            .map(|&(i, j, v)| (pos[i], pos[j], v))
            .collect();
        Self::from_unsorted(diag, off)
    }

    /// Connected components of the off-diagonal graph, each sorted, ordered by smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j, _) in &self.off {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
        let mut slot = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[slot[r]].push(i);
        }
        comps
    }

    /// Block Cholesky factorization `M = L L'`.
    pub fn cholesky(&self) -> Result<BlockCholesky> {
        let mut blocks = Vec::new();
        for comp in self.components() {
            let k = comp.len();
            if k == 1 {
                let d = self.diag[comp[0]];
                if !(d > 0.0) {
                    return Err(Error::NotPositiveDefinite { pivot: comp[0] });
                }
                blocks.push(Block {
                    idx: comp,
                    l: vec![math::sqrt(d)],
                });
                continue;
            }
            let dense = dense_block(self, &comp);
            let l = cholesky_row_major(dense, k)
                .map_err(|local| Error::NotPositiveDefinite { pivot: comp[local] })?;
            blocks.push(Block { idx: comp, l });
        }
        Ok(BlockCholesky {
            n: self.dim(),
            blocks,
        })
    }

    pub fn log_det(&self) -> Result<f64> {
        Ok(self.cholesky()?.log_det())
    }

    /// Eigenvalues, sorted ascending, computed per connected component.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for comp in self.components() {
            if comp.len() == 1 {
                out.push(self.diag[comp[0]]);
                continue;
            }
            let k = comp.len();
            let dense = dense_block(self, &comp);
            let m = DMatrix::from_row_slice(k, k, &dense);
            out.extend(SymmetricEigen::new(m).eigenvalues.iter().copied());
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::NAN)
    }

    /// Spectral norm `max |λ|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

fn dense_block(m: &SparseSym, comp: &[usize]) -> Vec<f64> {
    let k = comp.len();
    let sub = m.submatrix(comp);
    let mut a = vec![0.0; k * k];
    for (i, &d) in sub.diag.iter().enumerate() {
        a[i * k + i] = d;
    }
    for &(i, j, v) in &sub.off {
        a[i * k + j] = v;
        a[j * k + i] = v;
    }
    a
}

/// In-place dense Cholesky of a row-major `k x k` symmetric matrix. Returns the lower
/// factor (upper triangle zeroed) or the index of the first non-positive pivot.
pub fn cholesky_row_major(mut a: Vec<f64>, k: usize) -> core::result::Result<Vec<f64>, usize> {
    assert_eq!(a.len(), k * k);
    for j in 0..k {
        let row_j = &mut a[j * k..(j + 1) * k];
        let mut s = row_j[j];
        for v in &row_j[..j] {
            s -= v * v;
        }
        if !(s > 0.0) {
            return Err(j);
        }
        let ljj = math::sqrt(s);
        row_j[j] = ljj;
        for v in &mut row_j[j + 1..] {
            *v = 0.0;
        }
        let (upto, rest) = a.split_at_mut((j + 1) * k);
        let row_j = &upto[j * k..j * k + j];
        for i in (j + 1)..k {
            let row_i = &mut rest[(i - j - 1) * k..(i - j) * k];
            let mut s = row_i[j];
            for (x, y) in row_i[..j].iter().zip(row_j) {
                s -= x * y;
            }
            row_i[j] = s / ljj;
        }
    }
    Ok(a)
}

/// Log-determinant of a dense symmetric positive definite matrix.
pub fn log_det(m: &DMatrix<f64>) -> Result<f64> {
    let k = m.nrows();
    if m.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: m.ncols(),
        });
    }
    let mut a = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            a[i * k + j] = m[(i, j)];
        }
    }
    let l = cholesky_row_major(a, k).map_err(|pivot| Error::NotPositiveDefinite { pivot })?;
    Ok((0..k).map(|i| 2.0 * math::ln(l[i * k + i])).sum())
}

#[derive(Debug, Clone)]
struct Block {
    idx: Vec<usize>,
    l: Vec<f64>,
}

/// Cholesky factor of a [`SparseSym`], one dense lower-triangular block per component.
#[derive(Debug, Clone)]
pub struct BlockCholesky {
    n: usize,
    blocks: Vec<Block>,
}

impl BlockCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn log_det(&self) -> f64 {
        let mut s = 0.0;
        for b in &self.blocks {
            let k = b.idx.len();
            for i in 0..k {
                s += math::ln(b.l[i * k + i]);
            }
        }
        2.0 * s
    }

    /// Solve `M y = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mut out = vec![0.0; self.n];
        let mut buf = Vec::new();
        for b in &self.blocks {
            buf.clear();
            buf.extend(b.idx.iter().map(|&i| rhs[i]));
            forward(&b.l, &mut buf);
            backward_transposed(&b.l, &mut buf);
            for (&i, &v) in b.idx.iter().zip(&buf) {
                out[i] = v;
            }
        }
        out
    }

    /// Map white noise `z` to `L'^{-1} z`, which has covariance `M^{-1}`.
    pub fn whiten_inverse(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        let mut out = vec![0.0; self.n];
        let mut buf = Vec::new();
        for b in &self.blocks {
            buf.clear();
            buf.extend(b.idx.iter().map(|&i| z[i]));
            backward_transposed(&b.l, &mut buf);
            for (&i, &v) in b.idx.iter().zip(&buf) {
                out[i] = v;
            }
        }
        out
    }
}

fn forward(l: &[f64], x: &mut [f64]) {
    let k = x.len();
    for i in 0..k {
        let row = &l[i * k..i * k + i];
        let mut s = x[i];
        for (a, b) in row.iter().zip(x.iter()) {
            s -= a * b;
        }
        x[i] = s / l[i * k + i];
    }
}

fn backward_transposed(l: &[f64], x: &mut [f64]) {
    let k = x.len();
    for i in (0..k).rev() {
        let xi = x[i] / l[i * k + i];
        x[i] = xi;
        let row = &l[i * k..i * k + i];
        for (xj, a) in x[..i].iter_mut().zip(row) {
            *xj -= a * xi;
        }
    }
}

/// Dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_spd(k: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b = DMatrix::from_fn(k, k, |_, _| next());
        &b * b.transpose() + DMatrix::identity(k, k) * 0.5
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(log_det(&DMatrix::identity(5, 5)).unwrap(), 0.0);
        let two = DMatrix::from_diagonal_element(10, 10, 2.0);
        assert!((log_det(&two).unwrap() - 10.0 * core::f64::consts::LN_2).abs() < 1e-12);
        let m = random_spd(6, 3);
        let eig = SymmetricEigen::new(m.clone()).eigenvalues;
        let oracle: f64 = eig.iter().map(|v| v.ln()).sum();
        assert!((log_det(&m).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn non_pd_reports_pivot() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 2.0, 1.0]);
        assert_eq!(log_det(&m), Err(Error::NotPositiveDefinite { pivot: 2 }));
        let s = SparseSym::from_dense(&m).unwrap();
        assert_eq!(s.log_det(), Err(Error::NotPositiveDefinite { pivot: 2 }));
    }

    #[test]
    fn sparse_ops_match_dense() {
        let m = SparseSym::new(
            vec![2.0, 3.0, 4.0, 5.0, 6.0],
            vec![(0, 2, 0.5), (3, 1, -0.7), (4, 3, 0.2)],
        )
        .unwrap();
        let d = m.to_dense();
        let x = [0.3, -1.0, 2.0, 0.5, -0.25];
        let y = m.mul_vec(&x);
        let yd = &d * nalgebra::DVector::from_row_slice(&x);
        for i in 0..5 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
        let q = m.quad_form(&x);
        assert!((q - dot(&x, &y)).abs() < 1e-12);
        assert_eq!(m.components().len(), 2);
        let ld = m.log_det().unwrap();
        assert!((ld - log_det(&d).unwrap()).abs() < 1e-12);
        let sol = m.cholesky().unwrap().solve(&x);
        let back = m.mul_vec(&sol);
        for i in 0..5 {
            assert!((back[i] - x[i]).abs() < 1e-12);
        }
        assert!((m.frobenius_sq() - d.norm_squared()).abs() < 1e-12);
        let sub = m.submatrix(&[1, 3, 4]);
        assert_eq!(sub.get(0, 1), -0.7);
        assert_eq!(sub.get(2, 1), 0.2);
    }

    #[test]
    fn whitening_has_inverse_covariance() {
        let m = SparseSym::from_dense(&random_spd(4, 9)).unwrap();
        let ch = m.cholesky().unwrap();
        // Columns of L'^{-1} give L'^{-1} L^{-1} = M^{-1}.
        let mut w = DMatrix::zeros(4, 4);
        for j in 0..4 {
            let mut e = [0.0; 4];
            e[j] = 1.0;
            let c = ch.whiten_inverse(&e);
            for i in 0..4 {
                w[(i, j)] = c[i];
            }
        }
        let cov = &w * w.transpose();
        let inv = m.to_dense().try_inverse().unwrap();
        assert!((cov - inv).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn add_sub_roundtrip(vals in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let a = SparseSym::new(vec![1.0; 5], vec![(0, 1, vals[0]), (1, 2, vals[1]), (3, 4, vals[2])]).unwrap();
            let b = SparseSym::new(vec![vals[3]; 5], vec![(0, 1, vals[4]), (2, 4, vals[5])]).unwrap();
            let s = a.add(&b).unwrap();
            let dense = a.to_dense() + b.to_dense();
            prop_assert!((s.to_dense() - dense).norm() < 1e-14);
            let back = s.sub(&b).unwrap();
            prop_assert!((back.to_dense() - a.to_dense()).norm() < 1e-14);
        }
    }
}
