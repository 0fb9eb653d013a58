//! Dense matrices over any [`Ring`], with exact Gaussian elimination for the
//! ring elements that admit inverses.
//!
//! Elimination routines select pivots that are invertible in the ring (not
//! merely nonzero), so they behave correctly over the biquadratic ring, which
//! has zero divisors when a parameter is a square.

use super::ring::Ring;
use super::ExactError;

/// Dense row-major matrix with explicit dimensions.
#[derive(Clone, PartialEq)]
pub struct RingMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for RingMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RingMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.entries[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Ring> RingMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Self {
        assert_eq!(rows * cols, entries.len(), "entry count must match dimensions");
        RingMatrix { rows, cols, entries }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RingMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        RingMatrix { rows, cols, entries: (0..rows * cols).map(|_| T::zero()).collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    if r == c {
                        self[(r, c)] == T::one()
                    } else {
                        self[(r, c)].is_zero()
                    }
                })
            })
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.entries.iter().all(Ring::is_zero)
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> RingMatrix<U> {
        RingMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix addition shape");
        let entries =
            self.entries.iter().zip(&rhs.entries).map(|(x, y)| x.add(y)).collect();
        RingMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix subtraction shape");
        let entries =
            self.entries.iter().zip(&rhs.entries).map(|(x, y)| x.sub(y)).collect();
        RingMatrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn neg(&self) -> Self {
        self.map(Ring::neg)
    }

    pub fn scalar_mul(&self, s: &T) -> Self {
        self.map(|x| s.mul(x))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = Self::zero(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let lhs = &self[(r, k)];
                if lhs.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let term = lhs.mul(&rhs[(k, c)]);
                    out[(r, c)] = out[(r, c)].add(&term);
                }
            }
        }
        out
    }

    /// Multiplies a column vector.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for c in 0..self.cols {
                    acc = acc.add(&self[(r, c)].mul(&v[c]));
                }
                acc
            })
            .collect()
    }

    /// Determinant by Gaussian elimination with invertible pivots.
    ///
    /// Returns `Err(Singular)` only when elimination gets stuck on a column
    /// whose remaining entries are all nonzero zero-divisors (possible over the
    /// biquadratic ring with square parameters); over a field it never fails
    /// and returns zero for singular input.
    pub fn det(&self) -> Result<T, ExactError> {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot = match (col..n).find(|&r| m[(r, col)].inverse().is_some()) {
                Some(r) => r,
                None => {
                    if (col..n).all(|r| m[(r, col)].is_zero()) {
                        return Ok(T::zero());
                    }
                    return Err(ExactError::Singular);
                }
            };
            if pivot != col {
                m.swap_rows(pivot, col);
                det = det.neg();
            }
            let p = m[(col, col)].clone();
            let pinv = p.inverse().expect("pivot chosen invertible");
            det = det.mul(&p);
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].mul(&pinv);
                for c in col..n {
                    let t = factor.mul(&m[(col, c)]);
                    m[(r, c)] = m[(r, c)].sub(&t);
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss–Jordan elimination with invertible pivots.
    pub fn inverse(&self) -> Result<Self, ExactError> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| m[(r, col)].inverse().is_some())
                .ok_or(ExactError::Singular)?;
            if pivot != col {
                m.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let pinv = m[(col, col)].inverse().expect("pivot chosen invertible");
            for c in 0..n {
                m[(col, c)] = m[(col, c)].mul(&pinv);
                inv[(col, c)] = inv[(col, c)].mul(&pinv);
            }
            for r in 0..n {
                if r == col || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in 0..n {
                    let t = factor.mul(&m[(col, c)]);
                    m[(r, c)] = m[(r, c)].sub(&t);
                    let t = factor.mul(&inv[(col, c)]);
                    inv[(r, c)] = inv[(r, c)].sub(&t);
                }
            }
        }
        Ok(inv)
    }

    /// Basis of the right kernel {v : Mv = 0}, via reduced row echelon form.
    ///
    /// Deterministic: pivots are chosen left to right, first invertible entry
    /// down each column, and the basis vectors are the standard free-column
    /// parametrization in column order.
    pub fn kernel(&self) -> Result<Vec<Vec<T>>, ExactError> {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            let pivot = match (row..m.rows).find(|&r| m[(r, col)].inverse().is_some()) {
                Some(r) => r,
                None => {
                    if (row..m.rows).all(|r| m[(r, col)].is_zero()) {
                        continue;
                    }
                    return Err(ExactError::Singular);
                }
            };
            m.swap_rows(pivot, row);
            let pinv = m[(row, col)].inverse().expect("pivot chosen invertible");
            for c in 0..m.cols {
                m[(row, c)] = m[(row, c)].mul(&pinv);
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in 0..m.cols {
                    let t = factor.mul(&m[(row, c)]);
                    m[(r, c)] = m[(r, c)].sub(&t);
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == m.rows {
                break;
            }
        }
        let mut basis = Vec::new();
        for free in 0..m.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v: Vec<T> = (0..m.cols).map(|_| T::zero()).collect();
            v[free] = T::one();
            for (r, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = m[(r, free)].neg();
            }
            basis.push(v);
        }
        Ok(basis)
    }

    pub fn rank(&self) -> Result<usize, ExactError> {
        Ok(self.cols - self.kernel()?.len())
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        if r1 == r2 {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(r1 * self.cols + c, r2 * self.cols + c);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for RingMatrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.entries[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for RingMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.entries[r * self.cols + c]
    }
}

/// Kronecker product A⊗B with the row-major block convention
/// (A⊗B)[(i·p+k, j·q+l)] = A[(i,j)]·B[(k,l)].
pub fn kronecker<T: Ring>(a: &RingMatrix<T>, b: &RingMatrix<T>) -> RingMatrix<T> {
    let (n, m) = (a.rows(), a.cols());
    let (p, q) = (b.rows(), b.cols());
    let mut out = RingMatrix::zero(n * p, m * q);
    for i in 0..n {
        for j in 0..m {
            let aij = &a[(i, j)];
            if aij.is_zero() {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out[(i * p + k, j * q + l)] = aij.mul(&b[(k, l)]);
                }
            }
        }
    }
    out
}

/// Block-diagonal sum of square matrices.
pub fn block_diag<T: Ring>(blocks: &[RingMatrix<T>]) -> RingMatrix<T> {
    let n: usize = blocks.iter().map(RingMatrix::rows).sum();
    let mut out = RingMatrix::zero(n, n);
    let mut off = 0;
    for b in blocks {
        assert!(b.is_square(), "block-diagonal blocks must be square");
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                out[(off + r, off + c)] = b[(r, c)].clone();
            }
        }
        off += b.rows();
    }
    out
}
