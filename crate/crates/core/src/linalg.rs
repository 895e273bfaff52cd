//! Dense linear algebra over F_q.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalars::{Field, Fq};

pub type Vector = Vec<Fq>;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    #[serde(skip)]
    pub data: Vec<Fq>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Fq::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Fq::ONE);
        }
        m
    }

    pub fn scalar(n: usize, c: Fq) -> Matrix {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn from_rows(rows: &[Vector]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors (all of length `dim`).
    pub fn from_cols(dim: usize, cols: &[Vector]) -> Matrix {
        let mut m = Matrix::zero(dim, cols.len());
        for (j, v) in cols.iter().enumerate() {
            assert_eq!(v.len(), dim);
            for (i, &x) in v.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Fq) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }
    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
    pub fn row_vectors(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    if !b.is_zero() {
                        *o = f.add(*o, f.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, f: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, f: &Field, c: Fq) -> Matrix {
        let data = self.data.iter().map(|&a| f.mul(a, c)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// M v for a column vector v.
    pub fn apply(&self, f: &Field, v: &[Fq]) -> Vector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(Fq::ZERO, |acc, (&a, &b)| {
                    if a.is_zero() || b.is_zero() {
                        acc
                    } else {
                        f.add(acc, f.mul(a, b))
                    }
                })
            })
            .collect()
    }

    /// v M for a row vector v.
    pub fn apply_right(&self, f: &Field, v: &[Fq]) -> Vector {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Fq::ZERO; self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = self.data[i * self.cols + j];
                if !a.is_zero() {
                    *o = f.add(*o, f.mul(c, a));
                }
            }
        }
        out
    }

    /// Kronecker product; index (i, j) maps to i * other.dim + j.
    pub fn kron(&self, f: &Field, other: &Matrix) -> Matrix {
        let mut out = Matrix::zero(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, f.mul(a, b));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, f: &Field, mut e: u64) -> Matrix {
        let mut acc = Matrix::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base);
            }
            base = base.mul(f, &base);
            e >>= 1;
        }
        acc
    }

    pub fn rank(&self, f: &Field) -> usize {
        rref(f, self).rank
    }

    pub fn det(&self, f: &Field) -> Fq {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Fq::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !m.get(r, c).is_zero()) else {
                return Fq::ZERO;
            };
            if p != c {
                for j in 0..n {
                    let t = m.get(p, j);
                    m.set(p, j, m.get(c, j));
                    m.set(c, j, t);
                }
                det = f.neg(det);
            }
            let piv = m.get(c, c);
            det = f.mul(det, piv);
            let pinv = f.inv(piv).expect("nonzero pivot");
            for r in c + 1..n {
                let factor = f.mul(m.get(r, c), pinv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(c, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self, f: &Field) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::AmbientMismatch("inverse of a non-square matrix".into()));
        }
        let e = rref(f, self);
        if e.rank < self.rows {
            return Err(Error::Singular);
        }
        Ok(e.t)
    }

    /// Rows as serializable integer arrays.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| serde_json::Value::Array(self.row(i).iter().map(|x| x.0.into()).collect()))
                .collect(),
        )
    }
}

/// Result of Gauss-Jordan elimination: `t * m = r`.
#[derive(Clone, Debug)]
pub struct Rref {
    pub r: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub t: Matrix,
}

pub fn rref(f: &Field, m: &Matrix) -> Rref {
    let (rows, cols) = (m.rows, m.cols);
    let mut r = m.clone();
    let mut t = Matrix::identity(rows);
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&i| !r.get(i, c).is_zero()) else {
            continue;
        };
        if p != row {
            swap_rows(&mut r, p, row);
            swap_rows(&mut t, p, row);
        }
        let inv = f.inv(r.get(row, c)).expect("nonzero pivot");
        scale_row(f, &mut r, row, inv);
        scale_row(f, &mut t, row, inv);
        for i in 0..rows {
            if i == row {
                continue;
            }
            let factor = r.get(i, c);
            if factor.is_zero() {
                continue;
            }
            axpy_row(f, &mut r, i, row, factor);
            axpy_row(f, &mut t, i, row, factor);
        }
        pivots.push(c);
        row += 1;
    }
    Rref { r, rank: pivots.len(), pivots, t }
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    for j in 0..m.cols {
        m.data.swap(a * m.cols + j, b * m.cols + j);
    }
}

fn scale_row(f: &Field, m: &mut Matrix, i: usize, c: Fq) {
    for j in 0..m.cols {
        let v = f.mul(m.get(i, j), c);
        m.set(i, j, v);
    }
}

// row_i -= c * row_src
fn axpy_row(f: &Field, m: &mut Matrix, i: usize, src: usize, c: Fq) {
    for j in 0..m.cols {
        let s = m.get(src, j);
        if !s.is_zero() {
            let v = f.sub(m.get(i, j), f.mul(c, s));
            m.set(i, j, v);
        }
    }
}

/// Some x with M x = b, or None when inconsistent.
pub fn solve(f: &Field, m: &Matrix, b: &[Fq]) -> Option<Vector> {
    assert_eq!(m.rows, b.len());
    let e = rref(f, m);
    let tb = e.t.apply(f, b);
    if tb[e.rank..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![Fq::ZERO; m.cols];
    for (k, &c) in e.pivots.iter().enumerate() {
        x[c] = tb[k];
    }
    Some(x)
}

/// Basis of {x : M x = 0}.
pub fn kernel(f: &Field, m: &Matrix) -> Vec<Vector> {
    let e = rref(f, m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !e.pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut x = vec![Fq::ZERO; m.cols];
            x[fc] = Fq::ONE;
            for (k, &pc) in e.pivots.iter().enumerate() {
                x[pc] = f.neg(e.r.get(k, fc));
            }
            x
        })
        .collect()
}

/// A subspace of F_q^ambient stored by its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: Vec<Vector>,
    pub pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Subspace {
        let basis = (0..ambient).map(|i| unit_vector(ambient, i)).collect();
        Subspace { ambient, basis, pivots: (0..ambient).collect() }
    }

    pub fn span(f: &Field, ambient: usize, vectors: &[Vector]) -> Subspace {
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        let e = rref(f, &Matrix::from_rows(vectors));
        let basis = (0..e.rank).map(|i| e.r.row(i)).collect();
        Subspace { ambient, basis, pivots: e.pivots }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch(format!("{} vs {}", self.ambient, other.ambient)));
        }
        Ok(())
    }

    /// Coordinates of v in the echelon basis, if v lies in the subspace.
    pub fn coords(&self, f: &Field, v: &[Fq]) -> Option<Vector> {
        let (c, rest) = self.reduce(f, v);
        rest.iter().all(|x| x.is_zero()).then_some(c)
    }

    /// Splits v as Σ c_k basis_k + residual with the residual zero on every pivot.
    pub fn reduce(&self, f: &Field, v: &[Fq]) -> (Vector, Vector) {
        let c: Vector = self.pivots.iter().map(|&p| v[p]).collect();
        let mut rest = v.to_vec();
        for (k, b) in self.basis.iter().enumerate() {
            if c[k].is_zero() {
                continue;
            }
            for (r, &x) in rest.iter_mut().zip(b) {
                if !x.is_zero() {
                    *r = f.sub(*r, f.mul(c[k], x));
                }
            }
        }
        (c, rest)
    }

    pub fn contains(&self, f: &Field, v: &[Fq]) -> bool {
        self.coords(f, v).is_some()
    }

    /// Adds v; returns true when the dimension grew. Keeps the basis reduced.
    pub fn insert(&mut self, f: &Field, v: &[Fq]) -> bool {
        let mut w = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            let c = w[p];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in w.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = f.inv(w[p]).expect("nonzero");
        for x in w.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for b in self.basis.iter_mut() {
            let c = b[p];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in b.iter_mut().zip(&w) {
                if !y.is_zero() {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        let pos = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(pos, p);
        self.basis.insert(pos, w);
        true
    }

    pub fn sum(&self, f: &Field, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Ok(Subspace::span(f, self.ambient, &all))
    }

    pub fn intersect(&self, f: &Field, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.ambient));
        }
        // a in A, b in B with sum a_i A_i - sum b_j B_j = 0
        let mut cols = self.basis.clone();
        cols.extend(other.basis.iter().map(|b| b.iter().map(|&x| f.neg(x)).collect()));
        let m = Matrix::from_cols(self.ambient, &cols);
        let vecs: Vec<Vector> = kernel(f, &m)
            .into_iter()
            .map(|k| {
                let mut v = vec![Fq::ZERO; self.ambient];
                for (i, b) in self.basis.iter().enumerate() {
                    for (o, &x) in v.iter_mut().zip(b) {
                        *o = f.add(*o, f.mul(k[i], x));
                    }
                }
                v
            })
            .collect();
        Ok(Subspace::span(f, self.ambient, &vecs))
    }

    pub fn contains_space(&self, f: &Field, other: &Subspace) -> Result<bool> {
        self.check(other)?;
        Ok(other.basis.iter().all(|v| self.contains(f, v)))
    }

    pub fn equals(&self, other: &Subspace) -> Result<bool> {
        self.check(other)?;
        Ok(self == other)
    }
}

/// Basis of {X : X A_i = B_i X for all i}, X of shape dim(B) x dim(A).
pub fn hom_space(f: &Field, gens_a: &[Matrix], gens_b: &[Matrix]) -> Result<Vec<Matrix>> {
    if gens_a.len() != gens_b.len() {
        return Err(Error::GeneratorCountMismatch(gens_a.len(), gens_b.len()));
    }
    let Some(a0) = gens_a.first() else {
        return Err(Error::GeneratorCountMismatch(0, 0));
    };
    let Some(b0) = gens_b.first() else {
        return Err(Error::GeneratorCountMismatch(0, 0));
    };
    let (da, db) = (a0.rows, b0.rows);
    let unknowns = da * db;
    let mut eqs: Vec<Vector> = Vec::new();
    let mut basis = Subspace::zero(unknowns);
    for (a, b) in gens_a.iter().zip(gens_b) {
        // (XA - BX)[i][j] = sum_k X[i][k] A[k][j] - sum_k B[i][k] X[k][j]
        for i in 0..db {
            for j in 0..da {
                let mut row = vec![Fq::ZERO; unknowns];
                for k in 0..da {
                    let x = a.get(k, j);
                    if !x.is_zero() {
                        row[i * da + k] = f.add(row[i * da + k], x);
                    }
                }
                for k in 0..db {
                    let x = b.get(i, k);
                    if !x.is_zero() {
                        row[k * da + j] = f.sub(row[k * da + j], x);
                    }
                }
                if row.iter().any(|x| !x.is_zero()) && basis.insert(f, &row) {
                    eqs.push(row);
                }
                if basis.dim() == unknowns {
                    return Ok(Vec::new());
                }
            }
        }
    }
    let sys = if eqs.is_empty() { Matrix::zero(1, unknowns) } else { Matrix::from_rows(&basis.basis) };
    Ok(kernel(f, &sys)
        .into_iter()
        .map(|v| Matrix { rows: db, cols: da, data: v })
        .collect())
}

/// Looks for an invertible element in the span of `homs`.
///
/// Basis elements first, then seeded random combinations, then an exhaustive
/// walk over all lines when the span has dimension at most 3.
pub fn find_invertible(f: &Field, homs: &[Matrix]) -> Option<Matrix> {
    let first = homs.first()?;
    if !first.is_square() {
        return None;
    }
    for h in homs {
        if !h.det(f).is_zero() {
            return Some(h.clone());
        }
    }
    let combine = |coeffs: &[Fq]| {
        homs.iter()
            .zip(coeffs)
            .fold(Matrix::zero(first.rows, first.cols), |acc, (h, &c)| acc.add(f, &h.scale(f, c)))
    };
    let d = homs.len();
    if d <= 3 {
        let q = f.q() as usize;
        let total = q.pow(d as u32);
        for code in 1..total {
            let mut c = code;
            let coeffs: Vec<Fq> = (0..d)
                .map(|_| {
                    let x = Fq((c % q) as u8);
                    c /= q;
                    x
                })
                .collect();
            // one representative per line: leading nonzero coefficient is 1
            if coeffs.iter().find(|x| !x.is_zero()) != Some(&Fq::ONE) {
                continue;
            }
            let m = combine(&coeffs);
            if !m.det(f).is_zero() {
                return Some(m);
            }
        }
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let coeffs: Vec<Fq> = (0..d).map(|_| Fq(rng.gen_range(0..f.q()) as u8)).collect();
        let m = combine(&coeffs);
        if !m.det(f).is_zero() {
            return Some(m);
        }
    }
    None
}

pub fn is_isomorphic(f: &Field, gens_a: &[Matrix], gens_b: &[Matrix]) -> Result<Option<Matrix>> {
    let (Some(a), Some(b)) = (gens_a.first(), gens_b.first()) else {
        return Err(Error::GeneratorCountMismatch(gens_a.len(), gens_b.len()));
    };
    if a.rows != b.rows {
        return Ok(None);
    }
    Ok(find_invertible(f, &hom_space(f, gens_a, gens_b)?))
}

pub fn vec_add(f: &Field, a: &[Fq], b: &[Fq]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

pub fn vec_sub(f: &Field, a: &[Fq], b: &[Fq]) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
}

pub fn vec_scale(f: &Field, a: &[Fq], c: Fq) -> Vector {
    a.iter().map(|&x| f.mul(x, c)).collect()
}

pub fn vec_neg(f: &Field, a: &[Fq]) -> Vector {
    a.iter().map(|&x| f.neg(x)).collect()
}

pub fn is_zero_vec(a: &[Fq]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = vec![Fq::ZERO; n];
    v[i] = Fq::ONE;
    v
}

/// Nonzero vectors of F_q^d with leading nonzero coordinate 1 (one per line).
pub fn projective_points(f: &Field, d: usize) -> Vec<Vector> {
    let q = f.q() as usize;
    let mut out = Vec::new();
    for lead in 0..d {
        let free = d - lead - 1;
        for code in 0..q.pow(free as u32) {
            let mut v = vec![Fq::ZERO; d];
            v[lead] = Fq::ONE;
            let mut c = code;
            for x in v.iter_mut().skip(lead + 1) {
                *x = Fq((c % q) as u8);
                c /= q;
            }
            out.push(v);
        }
    }
    out
}

/// Coordinates with respect to a linearly independent family in F_q^n.
#[derive(Clone, Debug)]
pub struct LinearBasis {
    pub ambient: usize,
    pub len: usize,
    t: Matrix,
}

impl LinearBasis {
    pub fn new(f: &Field, ambient: usize, vectors: &[Vector]) -> Result<LinearBasis> {
        let len = vectors.len();
        if len == 0 {
            return Ok(LinearBasis { ambient, len, t: Matrix::identity(ambient) });
        }
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(Error::AmbientMismatch("vector length".into()));
        }
        let red = rref(f, &Matrix::from_cols(ambient, vectors));
        if red.rank != len {
            return Err(Error::Singular);
        }
        Ok(LinearBasis { ambient, len, t: red.t })
    }

    pub fn coords(&self, f: &Field, v: &[Fq]) -> Option<Vector> {
        let w = self.t.apply(f, v);
        is_zero_vec(&w[self.len..]).then(|| w[..self.len].to_vec())
    }
}
