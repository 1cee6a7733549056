//! Small dense matrices, subspaces and polynomials over F_p.
//!
//! Matrices act on column vectors. Dimensions here are tens at most, so
//! everything is plain Gaussian elimination.

use crate::field::Prime;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    p: Prime,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Matrix {
    pub fn zeros(p: Prime, rows: usize, cols: usize) -> Self {
        Matrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn scalar(p: Prime, n: usize, c: u8) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = c % p.get();
        }
        m
    }

    pub fn identity(p: Prime, n: usize) -> Self {
        Self::scalar(p, n, 1)
    }

    pub fn from_rows(p: Prime, rows: &[Vec<u8>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| x % p.get()));
        }
        Matrix { p, rows: r, cols: c, data }
    }

    /// Matrix whose j-th column is `cols[j]`.
    pub fn from_columns(p: Prime, cols: &[Vec<u8>]) -> Self {
        Self::from_rows(p, cols).transpose()
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v % self.p.get();
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `Some(c)` when the matrix is `c` times the identity.
    pub fn as_scalar(&self) -> Option<u8> {
        if self.rows != self.cols {
            return None;
        }
        let c = if self.rows == 0 { 1 } else { self.get(0, 0) };
        (*self == Matrix::scalar(self.p, self.rows, c)).then_some(c)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let q = self.p.get() as u32;
        let mut out = Matrix::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = 0u32;
                for k in 0..self.cols {
                    s += self.get(i, k) as u32 * other.get(k, j) as u32;
                    if k % 4096 == 4095 {
                        s %= q;
                    }
                }
                out.data[i * other.cols + j] = (s % q) as u8;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(self.cols, v.len());
        let q = self.p.get() as u32;
        (0..self.rows)
            .map(|i| {
                let s: u32 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u32 * b as u32 % q).sum();
                (s % q) as u8
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| self.p.add(a, b))
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| self.p.sub(a, b))
    }

    fn zip(&self, other: &Matrix, f: impl Fn(u8, u8) -> u8) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: u8) -> Matrix {
        Matrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| self.p.mul(a, c % self.p.get())).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut result = Matrix::identity(self.p, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn is_nilpotent(&self) -> bool {
        self.pow(self.rows.max(1) as u64).is_zero()
    }

    /// Row echelon form in place; returns the pivot columns and the
    /// determinant factor accumulated from swaps and pivots.
    fn eliminate(&mut self) -> (Vec<usize>, u8) {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut det = 1u8;
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                det = 0;
                continue;
            };
            if piv != r {
                for j in 0..self.cols {
                    self.data.swap(piv * self.cols + j, r * self.cols + j);
                }
                det = p.neg(det);
            }
            let pv = self.get(r, c);
            det = p.mul(det, pv);
            let inv = p.inv(pv);
            for j in 0..self.cols {
                let v = p.mul(self.get(r, j), inv);
                self.data[r * self.cols + j] = v;
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = p.sub(self.get(i, j), p.mul(f, self.get(r, j)));
                    self.data[i * self.cols + j] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        if r < self.rows {
            det = 0;
        }
        (pivots, det)
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate().0.len()
    }

    pub fn det(&self) -> u8 {
        assert_eq!(self.rows, self.cols);
        if self.rows == 0 {
            return 1;
        }
        self.clone().eliminate().1
    }

    pub fn is_invertible(&self) -> bool {
        self.det() != 0
    }

    /// Basis of the null space `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<u8>> {
        let p = self.p;
        let mut m = self.clone();
        let (pivots, _) = m.eliminate();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u8; self.cols];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = p.neg(m.get(r, f));
                }
                v
            })
            .collect()
    }

    /// Characteristic polynomial `det(xI - M)`, coefficients low to high.
    /// Reduces to Hessenberg form by similarity, then expands.
    pub fn char_poly(&self) -> Vec<u8> {
        assert_eq!(self.rows, self.cols);
        let p = self.p;
        let n = self.rows;
        let mut h = self.clone();
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| h.get(i, m - 1) != 0) else {
                continue;
            };
            if i != m {
                for j in 0..n {
                    h.data.swap(i * n + j, m * n + j);
                }
                for j in 0..n {
                    h.data.swap(j * n + i, j * n + m);
                }
            }
            let inv = p.inv(h.get(m, m - 1));
            for i in m + 1..n {
                let u = p.mul(h.get(i, m - 1), inv);
                if u == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = p.sub(h.get(i, j), p.mul(u, h.get(m, j)));
                    h.data[i * n + j] = v;
                }
                for j in 0..n {
                    let v = p.add(h.get(j, m), p.mul(u, h.get(j, i)));
                    h.data[j * n + m] = v;
                }
            }
        }
        // polys[m] = char poly of the leading m x m block
        let mut polys: Vec<Vec<u8>> = vec![vec![1]];
        for m in 1..=n {
            let hm = h.get(m - 1, m - 1);
            let prev = &polys[m - 1];
            let mut cur = vec![0u8; m + 1];
            for (k, &c) in prev.iter().enumerate() {
                cur[k + 1] = p.add(cur[k + 1], c);
                cur[k] = p.sub(cur[k], p.mul(hm, c));
            }
            let mut t = 1u8;
            for i in 1..m {
                t = p.mul(t, h.get(m - i, m - i - 1));
                let coef = p.mul(t, h.get(m - i - 1, m - 1));
                if coef == 0 {
                    continue;
                }
                for (k, &c) in polys[m - i - 1].iter().enumerate() {
                    cur[k] = p.sub(cur[k], p.mul(coef, c));
                }
            }
            polys.push(cur);
        }
        polys.pop().unwrap()
    }
}

/// Value of a polynomial (low-to-high coefficients) at `x`.
pub fn poly_eval(p: Prime, poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0u8, |acc, &c| p.add(p.mul(acc, x), c))
}

/// Roots in F_p with multiplicities, found by trying every residue and
/// deflating. The second value is the degree left over (factors without
/// roots).
pub fn poly_roots(p: Prime, poly: &[u8]) -> (Vec<(u8, usize)>, usize) {
    let mut f = poly.to_vec();
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
    let mut roots = Vec::new();
    for x in 0..p.get() {
        let mut mult = 0;
        while f.len() > 1 && poly_eval(p, &f, x) == 0 {
            // synthetic division by (t - x)
            let n = f.len() - 1;
            let mut q = vec![0u8; n];
            let mut carry = 0u8;
            for k in (0..n).rev() {
                carry = p.add(f[k + 1], p.mul(carry, x));
                q[k] = carry;
            }
            f = q;
            mult += 1;
        }
        if mult > 0 {
            roots.push((x, mult));
        }
    }
    (roots, f.len() - 1)
}

/// A subspace of `F_p^n` kept in reduced row echelon form, remembering how
/// each echelon row arose from the inserted vectors so that coordinates with
/// respect to the insertion-ordered basis can be recovered.
#[derive(Clone, Debug)]
pub struct Span {
    p: Prime,
    n: usize,
    rows: Vec<Vec<u8>>,
    combos: Vec<Vec<u8>>,
    pivots: Vec<usize>,
    basis: Vec<Vec<u8>>,
}

impl Span {
    pub fn new(p: Prime, n: usize) -> Self {
        Span { p, n, rows: Vec::new(), combos: Vec::new(), pivots: Vec::new(), basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Inserted independent vectors, in insertion order.
    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    /// Reduces `v` against the echelon rows; returns the residual and the
    /// combination of inserted vectors that was subtracted.
    fn reduce(&self, v: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let p = self.p;
        let mut r = v.to_vec();
        let mut combo = vec![0u8; self.basis.len()];
        for ((row, c), &pc) in self.rows.iter().zip(&self.combos).zip(&self.pivots) {
            let f = r[pc];
            if f == 0 {
                continue;
            }
            for (x, &y) in r.iter_mut().zip(row) {
                *x = p.sub(*x, p.mul(f, y));
            }
            for (x, &y) in combo.iter_mut().zip(c) {
                *x = p.add(*x, p.mul(f, y));
            }
        }
        (r, combo)
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.reduce(v).0.iter().all(|&x| x == 0)
    }

    /// Coordinates of `v` in the insertion-ordered basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &[u8]) -> Option<Vec<u8>> {
        let (r, combo) = self.reduce(v);
        r.iter().all(|&x| x == 0).then_some(combo)
    }

    /// Adds `v` if it is independent; returns whether it was added.
    pub fn insert(&mut self, v: &[u8]) -> bool {
        assert_eq!(v.len(), self.n);
        let p = self.p;
        let (mut r, combo) = self.reduce(v);
        let Some(pc) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let k = self.basis.len();
        // new row = (v - combo . basis) scaled to a unit pivot
        let mut c: Vec<u8> = combo.iter().map(|&x| p.neg(x)).collect();
        c.push(1);
        for old in self.combos.iter_mut() {
            old.push(0);
        }
        let inv = p.inv(r[pc]);
        r.iter_mut().for_each(|x| *x = p.mul(*x, inv));
        c.iter_mut().for_each(|x| *x = p.mul(*x, inv));
        // clear the new pivot column from existing rows
        for (row, rc) in self.rows.iter_mut().zip(self.combos.iter_mut()) {
            let f = row[pc];
            if f == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&r) {
                *x = p.sub(*x, p.mul(f, y));
            }
            for (x, &y) in rc.iter_mut().zip(&c) {
                *x = p.sub(*x, p.mul(f, y));
            }
        }
        self.rows.push(r);
        self.combos.push(c);
        self.pivots.push(pc);
        self.basis.push(v.to_vec());
        debug_assert_eq!(self.basis.len(), k + 1);
        true
    }
}
