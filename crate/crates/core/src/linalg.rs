//! Dense and banded complex linear algebra used by the solvers.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

pub type Mat2<T> = [[Cplx<T>; 2]; 2];

fn czero<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::zero())
}

/// Solves a 2x2 complex system by Gaussian elimination with partial pivoting.
pub fn solve_small<T: Real>(m: Mat2<T>, b: [Cplx<T>; 2]) -> Result<[Cplx<T>; 2]> {
    let (mut m, mut b) = (m, b);
    if m[1][0].norm() > m[0][0].norm() {
        m.swap(0, 1);
        b.swap(0, 1);
    }
    let scale = m
        .iter()
        .flatten()
        .fold(T::zero(), |acc, z| acc.max(z.norm()));
    let tiny = scale * T::epsilon() * T::lit(4.0);
    if m[0][0].norm() <= tiny {
        return Err(singular(2, m[0][0].norm()));
    }
    let l = m[1][0] / m[0][0];
    let u11 = m[1][1] - l * m[0][1];
    if u11.norm() <= tiny {
        return Err(singular(2, u11.norm()));
    }
    let x1 = (b[1] - l * b[0]) / u11;
    let x0 = (b[0] - m[0][1] * x1) / m[0][0];
    Ok([x0, x1])
}

/// Inverse of a 2x2 complex matrix.
pub fn inverse2<T: Real>(m: &Mat2<T>) -> Result<Mat2<T>> {
    let one = Complex::new(T::one(), T::zero());
    let c0 = solve_small(*m, [one, czero()])?;
    let c1 = solve_small(*m, [czero(), one])?;
    Ok([[c0[0], c1[0]], [c0[1], c1[1]]])
}

pub fn adjoint2<T: Real>(m: &Mat2<T>) -> Mat2<T> {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

fn singular(size: usize, pivot: impl Real) -> Error {
    Error::Singular {
        size,
        pivot: pivot.to_f64().unwrap_or(f64::NAN),
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cplx<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Cplx<T>> {
        self.data
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * o.cols..(i + 1) * o.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == czero() {
                    continue;
                }
                let o_row = &o.data[k * o.cols..(k + 1) * o.cols];
                for (dst, &b) in out_row.iter_mut().zip(o_row) {
                    *dst = *dst + a * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    /// `Tr(self * o)` without forming the product.
    pub fn trace_product(&self, o: &Self) -> Cplx<T> {
        assert_eq!((self.cols, self.rows), (o.rows, o.cols));
        let mut acc = czero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(i, k)] * o[(k, i)];
            }
        }
        acc
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, Cplx<T>)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != czero())
            .map(move |(idx, &z)| (idx / self.cols, idx % self.cols, z))
    }

    /// Cholesky factorization of a Hermitian matrix; `false` if it is not
    /// positive definite.
    pub fn is_positive_definite(&self) -> bool {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = vec![czero::<T>(); n * n];
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d = d - l[j * n + k].norm_sqr();
            }
            if !(d > T::zero()) {
                return false;
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex::new(djj, T::zero());
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        true
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Square band matrix with `lower` sub- and `upper` super-diagonals.
///
/// Each row stores the columns `i - lower ..= i + lower + upper`; the extra
/// `lower` slots hold fill-in produced by row interchanges during
/// factorization.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        BandMatrix {
            n,
            lower,
            upper,
            width,
            data: vec![czero(); n * width],
        }
    }

    /// Assembles from triplets, summing duplicates; bandwidths are taken from
    /// the entries.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, Cplx<T>)]) -> Self {
        let (mut lower, mut upper) = (0, 0);
        for &(i, j, _) in entries {
            if i > j {
                lower = lower.max(i - j);
            } else {
                upper = upper.max(j - i);
            }
        }
        let mut m = Self::zeros(n, lower, upper);
        for &(i, j, v) in entries {
            m.add_to(i, j, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.lower < i || j > i + self.lower + self.upper {
            None
        } else {
            Some(i * self.width + (j + self.lower - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        if j + self.lower < i || j > i + self.upper {
            return czero();
        }
        self.slot(i, j).map_or(czero(), |s| self.data[s])
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: Cplx<T>) {
        assert!(
            j + self.lower >= i && j <= i + self.upper,
            "entry ({i}, {j}) outside the band"
        );
        let s = self.slot(i, j).expect("inside band");
        self.data[s] = self.data[s] + v;
    }

    /// Replaces row `i` with the unit row `e_i`.
    pub fn set_unit_row(&mut self, i: usize) {
        let start = i * self.width;
        for z in &mut self.data[start..start + self.width] {
            *z = czero();
        }
        let s = self.slot(i, i).expect("diagonal inside band");
        self.data[s] = Complex::new(T::one(), T::zero());
    }

    pub fn mul_vec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).fold(czero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                d[(i, j)] = self.get(i, j);
            }
        }
        d
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// LU factorization with partial pivoting.
    ///
    /// Fails with [`Error::Singular`] when a pivot falls below
    /// `n * eps * max|A|`.
    pub fn factorize(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let (kl, ku, w) = (self.lower, self.upper, self.width);
        let tiny = self.max_abs() * T::epsilon() * T::from_usize(n).unwrap_or(T::one());
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = vec![czero(); n * kl];
        let (mut pmin, mut pmax) = (T::infinity(), T::zero());
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            // column k lives at offset (k + kl - i) in row i
            let mut p = k;
            let mut best = T::zero();
            for i in k..=last {
                let v = self.data[i * w + (k + kl - i)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::Singular {
                    size: n,
                    pivot: best.to_f64().unwrap_or(f64::NAN),
                });
            }
            pmin = pmin.min(best);
            pmax = pmax.max(best);
            pivots.push(p);
            let span = (kl + ku + 1).min(n - k);
            if p != k {
                for c in 0..span {
                    let a = k * w + kl + c;
                    let b = p * w + (k + kl - p) + c;
                    self.data.swap(a, b);
                }
            }
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let pivot_row = &head[k * w + kl..k * w + kl + span];
            let inv = Complex::new(T::one(), T::zero()) / pivot_row[0];
            for i in k + 1..=last {
                let off = (i - k - 1) * w + (k + kl - i);
                let row = &mut tail[off..off + span];
                let l = row[0] * inv;
                multipliers[k * kl + (i - k - 1)] = l;
                row[0] = czero();
                if l == czero() {
                    continue;
                }
                for (dst, &src) in row[1..].iter_mut().zip(&pivot_row[1..]) {
                    *dst = *dst - l * src;
                }
            }
        }
        Ok(BandLu {
            u: self,
            pivots,
            multipliers,
            pivot_ratio: pmax / pmin,
        })
    }
}

/// Banded LU factors, reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    u: BandMatrix<T>,
    pivots: Vec<usize>,
    multipliers: Vec<Cplx<T>>,
    pivot_ratio: T,
}

impl<T: Real> BandLu<T> {
    /// Ratio of largest to smallest pivot, a cheap conditioning estimate.
    pub fn condition_estimate(&self) -> T {
        self.pivot_ratio
    }

    pub fn solve(&self, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let u = &self.u;
        let (n, kl, w) = (u.n, u.lower, u.width);
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] = x[i] - self.multipliers[k * kl + (i - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let span = (kl + u.upper + 1).min(n - k);
            let row = &u.data[k * w + kl..k * w + kl + span];
            let mut s = x[k];
            for c in 1..span {
                s = s - row[c] * x[k + c];
            }
            x[k] = s / row[0];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn small_solve_and_inverse() {
        let m = [[c(0.0, 1e-3), c(2.0, 1.0)], [c(1.0, -1.0), c(3.0, 0.5)]];
        let x = [c(1.0, 2.0), c(-0.5, 0.25)];
        let b = [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ];
        let y = solve_small(m, b).unwrap();
        assert!((y[0] - x[0]).norm() < 1e-14 && (y[1] - x[1]).norm() < 1e-14);
        let inv = inverse2(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let p = m[i][0] * inv[0][j] + m[i][1] * inv[1][j];
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p - c(e, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_small_system() {
        let m = [[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0)]];
        assert!(matches!(
            solve_small(m, [c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn banded_lu_matches_dense_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n: usize = 40;
        let (kl, ku) = (5, 3);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal forces row interchanges
                let scale = if i == j { 0.1 } else { 1.0 };
                entries.push((
                    i,
                    j,
                    c(
                        rng.gen_range(-1.0..1.0) * scale,
                        rng.gen_range(-1.0..1.0) * scale,
                    ),
                ));
            }
        }
        let band = BandMatrix::from_triplets(n, &entries);
        assert_eq!(band.bandwidths(), (kl, ku));
        let x: Vec<_> = (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let b = band.mul_vec(&x);
        let dense_b = {
            let d = band.to_dense();
            let xm = DenseMatrix::from_vec(n, 1, x.clone());
            d.matmul(&xm).into_vec()
        };
        for (a, b) in b.iter().zip(&dense_b) {
            assert!((a - b).norm() < 1e-13);
        }
        let lu = band.factorize().unwrap();
        let y = lu.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
        assert!(lu.condition_estimate() >= 1.0);
    }

    #[test]
    fn banded_lu_detects_singularity() {
        let entries = vec![
            (0, 0, c(1.0, 0.0)),
            (1, 0, c(1.0, 0.0)),
            (0, 1, c(1.0, 0.0)),
            (1, 1, c(1.0, 0.0)),
        ];
        let band = BandMatrix::from_triplets(2, &entries);
        assert!(band.factorize().is_err());
    }

    #[test]
    fn positive_definiteness() {
        let mut m = DenseMatrix::<f64>::identity(3);
        m[(0, 1)] = c(0.5, 0.1);
        m[(1, 0)] = c(0.5, -0.1);
        assert!(m.is_positive_definite());
        m[(2, 2)] = c(-1e-3, 0.0);
        assert!(!m.is_positive_definite());
    }
}
