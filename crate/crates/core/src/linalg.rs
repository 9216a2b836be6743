//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers ([`BigInt`]) and
//! rationals ([`BigRational`]); there is no floating point anywhere.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type IntVec = Vec<BigInt>;
pub type RatVec = Vec<BigRational>;

/// Builds an integer vector from machine integers.
pub fn ivec(v: &[i64]) -> IntVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_rat(v: &[BigInt]) -> RatVec {
    v.iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect()
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Pairing of an integer vector with a rational covector.
pub fn dot_mixed(a: &[BigInt], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + y * x)
}

pub fn is_zero(v: &[BigInt]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// gcd of all entries (0 for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Divides an integer vector by the gcd of its entries. The zero vector is
/// returned unchanged.
pub fn make_primitive(v: &[BigInt]) -> IntVec {
    let g = content(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// The unique primitive integer vector on the ray `Q⁺ v`.
pub fn primitive_generator(v: &[BigRational]) -> Result<IntVec> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroVector);
    }
    Ok(make_primitive(&clear_denominators(v)))
}

/// Multiplies by the lcm of denominators, giving a positive multiple in `Zⁿ`.
pub fn clear_denominators(v: &[BigRational]) -> IntVec {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    v.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows, each of length `cols`.
    pub fn from_rows(cols: usize, rows: &[IntVec]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length mismatch");
            data.extend(r.iter().cloned());
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<IntVec> = rows.iter().map(|r| ivec(r)).collect();
        Self::from_rows(cols, &rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> IntVec {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<IntVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> IntVec {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += q * row[src]
    fn add_row(&mut self, target: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * q;
            self.data[target * self.cols + j] += v;
        }
    }

    /// col[target] += q * col[src]
    fn add_col(&mut self, target: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * q;
            self.data[i * self.cols + target] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let idx = r * self.cols + j;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }
}

/// Result of [`smith_normal_form`]: `u * a * v == s`.
#[derive(Clone, Debug)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Inverse of `v`, tracked alongside it.
    pub v_inv: IntMatrix,
    pub s: IntMatrix,
}

impl SnfResult {
    /// Nonzero diagonal entries `d₁ | d₂ | …`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.s.rows.min(self.s.cols))
            .map(|i| self.s.get(i, i).clone())
            .filter(|d| !d.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form by row and column reduction.
///
/// The pivot at each step is the entry of least nonzero absolute value in the
/// remaining block, lowest row first and then lowest column on ties.
pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let (m, n) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut v_inv = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = s.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if s.get(bi, bj).abs() <= x.abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(u, v, v_inv, s);
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                if s.get(i, t).is_zero() {
                    continue;
                }
                let q = -s.get(i, t).div_floor(s.get(t, t));
                s.add_row(i, t, &q);
                u.add_row(i, t, &q);
                if !s.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if s.get(t, j).is_zero() {
                    continue;
                }
                let q = -s.get(t, j).div_floor(s.get(t, t));
                s.add_col(j, t, &q);
                v.add_col(j, t, &q);
                v_inv.add_row(t, j, &-q);
                if !s.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let p = s.get(t, t).clone();
            let offending =
                (t + 1..m).find(|&i| (t + 1..n).any(|j| !s.get(i, j).is_multiple_of(&p)));
            match offending {
                Some(i) => {
                    let one = BigInt::one();
                    s.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    finish(u, v, v_inv, s)
}

fn finish(u: IntMatrix, v: IntMatrix, v_inv: IntMatrix, s: IntMatrix) -> SnfResult {
    SnfResult { u, v, v_inv, s }
}

/// True iff the vectors are independent and extend to a basis of `Zⁿ`.
pub fn is_z_basis_extendable(n: usize, vectors: &[IntVec]) -> bool {
    if vectors.is_empty() {
        return true;
    }
    if vectors.len() > n {
        return false;
    }
    let snf = smith_normal_form(&IntMatrix::from_rows(n, vectors));
    let f = snf.invariant_factors();
    f.len() == vectors.len() && f.iter().all(|d| d.is_one())
}

/// Index of the lattice spanned by `vectors` in its saturation.
pub fn sublattice_index(n: usize, vectors: &[IntVec]) -> Result<BigInt> {
    if vectors.is_empty() {
        return Ok(BigInt::one());
    }
    let snf = smith_normal_form(&IntMatrix::from_rows(n, vectors));
    let f = snf.invariant_factors();
    if f.len() < vectors.len() {
        return Err(Error::DependentInput);
    }
    Ok(f.iter().product())
}

/// Splits `Zⁿ` along the span of `vectors`.
///
/// Returns `(saturation, complement)`: a basis of `span ∩ Zⁿ` and vectors
/// completing it to a basis of `Zⁿ`.
pub fn saturation_and_complement(n: usize, vectors: &[IntVec]) -> (Vec<IntVec>, Vec<IntVec>) {
    if vectors.is_empty() {
        return (Vec::new(), IntMatrix::identity(n).to_rows());
    }
    let snf = smith_normal_form(&IntMatrix::from_rows(n, vectors));
    let r = snf.rank();
    let rows = snf.v_inv.to_rows();
    let (sat, comp) = rows.split_at(r);
    (sat.to_vec(), comp.to_vec())
}

/// A lattice basis of `{x ∈ Zⁿ : row · x = 0 for every row}`.
pub fn integer_kernel(n: usize, rows: &[IntVec]) -> Vec<IntVec> {
    if rows.is_empty() {
        return IntMatrix::identity(n).to_rows();
    }
    let snf = smith_normal_form(&IntMatrix::from_rows(n, rows));
    let r = snf.rank();
    (r..n).map(|j| snf.v.column(j)).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(rows: &mut Vec<RatVec>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot).take(ncols) {
                    *x -= p * &f;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank_rat(rows: &[RatVec]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

pub fn rank(rows: &[IntVec]) -> usize {
    let m: Vec<RatVec> = rows.iter().map(|r| to_rat(r)).collect();
    rank_rat(&m)
}

/// Solves `a x = b` over `Q` (`a` given by rows). Free variables are set to 0.
pub fn solve(a: &[RatVec], ncols: usize, b: &[BigRational]) -> Option<RatVec> {
    let mut aug: Vec<RatVec> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (row, &c) in aug.iter().zip(&pivots) {
        x[c] = row[ncols].clone();
    }
    Some(x)
}

/// Basis of the rational kernel `{x : a x = 0}`, as primitive integer vectors.
pub fn rational_kernel(a: &[RatVec], ncols: usize) -> Vec<IntVec> {
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![BigRational::zero(); ncols];
        x[free] = BigRational::one();
        for (row, &c) in m.iter().zip(&pivots) {
            x[c] = -row[free].clone();
        }
        out.push(make_primitive(&clear_denominators(&x)));
    }
    out
}

/// Canonical basis of a rational subspace: the rows of its reduced echelon
/// form, scaled to primitive integer vectors.
pub fn canonical_subspace_basis(ncols: usize, vectors: &[IntVec]) -> Vec<IntVec> {
    let mut m: Vec<RatVec> = vectors.iter().map(|v| to_rat(v)).collect();
    if m.is_empty() {
        return Vec::new();
    }
    debug_assert!(m.iter().all(|r| r.len() == ncols));
    rref(&mut m);
    m.iter()
        .map(|r| make_primitive(&clear_denominators(r)))
        .collect()
}

/// Orthogonal projection of `v` onto the complement of `span(basis)` with
/// respect to the standard inner product, scaled to a primitive integer
/// vector (or zero).
pub fn project_out(v: &[BigInt], basis: &[IntVec]) -> IntVec {
    if basis.is_empty() {
        return make_primitive(v);
    }
    let k = basis.len();
    let gram: Vec<RatVec> = basis
        .iter()
        .map(|b| {
            basis
                .iter()
                .map(|c| BigRational::from_integer(dot(b, c)))
                .collect()
        })
        .collect();
    let rhs: RatVec = basis
        .iter()
        .map(|b| BigRational::from_integer(dot(b, v)))
        .collect();
    let c = solve(&gram, k, &rhs).expect("independent basis");
    let mut w = to_rat(v);
    for (ci, b) in c.iter().zip(basis) {
        for (wj, bj) in w.iter_mut().zip(b) {
            *wj -= ci * bj;
        }
    }
    make_primitive(&clear_denominators(&w))
}
