//! The finite group Gamma = GL2(F_q), its representations, the Hecke operators
//! on U-invariants, the irreducibles rho_{chi,J}, the modules V_r ⊗ det^a and the
//! dictionary between the two labelings.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, kernel, projective_points, Matrix, Subspace, Vector};
use crate::scalars::{Field, Fq};

/// An invertible 2x2 matrix over F_q.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GammaElement {
    pub a: Fq,
    pub b: Fq,
    pub c: Fq,
    pub d: Fq,
}

/// One factor of the standard generating family.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gen {
    /// u(λ) = [[1, λ], [0, 1]]
    Upper(Fq),
    /// l(λ) = [[1, 0], [λ, 1]]
    Lower(Fq),
    /// diag(g^k, 1)
    Diag1(u32),
    /// diag(1, g^k)
    Diag2(u32),
}

impl GammaElement {
    pub fn new(f: &Field, a: Fq, b: Fq, c: Fq, d: Fq) -> Result<GammaElement> {
        let g = GammaElement { a, b, c, d };
        if g.det(f).is_zero() {
            return Err(Error::Singular);
        }
        Ok(g)
    }
    pub fn identity() -> GammaElement {
        GammaElement { a: Fq::ONE, b: Fq::ZERO, c: Fq::ZERO, d: Fq::ONE }
    }
    pub fn upper(x: Fq) -> GammaElement {
        GammaElement { a: Fq::ONE, b: x, c: Fq::ZERO, d: Fq::ONE }
    }
    pub fn lower(x: Fq) -> GammaElement {
        GammaElement { a: Fq::ONE, b: Fq::ZERO, c: x, d: Fq::ONE }
    }
    pub fn diag(x: Fq, y: Fq) -> GammaElement {
        GammaElement { a: x, b: Fq::ZERO, c: Fq::ZERO, d: y }
    }
    /// n_s = [[0, -1], [1, 0]]
    pub fn n_s(f: &Field) -> GammaElement {
        GammaElement { a: Fq::ZERO, b: f.neg(Fq::ONE), c: Fq::ONE, d: Fq::ZERO }
    }
    /// s = [[0, 1], [1, 0]]
    pub fn s() -> GammaElement {
        GammaElement { a: Fq::ZERO, b: Fq::ONE, c: Fq::ONE, d: Fq::ZERO }
    }

    pub fn det(&self, f: &Field) -> Fq {
        f.sub(f.mul(self.a, self.d), f.mul(self.b, self.c))
    }

    pub fn mul(&self, f: &Field, o: &GammaElement) -> GammaElement {
        GammaElement {
            a: f.add(f.mul(self.a, o.a), f.mul(self.b, o.c)),
            b: f.add(f.mul(self.a, o.b), f.mul(self.b, o.d)),
            c: f.add(f.mul(self.c, o.a), f.mul(self.d, o.c)),
            d: f.add(f.mul(self.c, o.b), f.mul(self.d, o.d)),
        }
    }

    pub fn inv(&self, f: &Field) -> GammaElement {
        let di = f.inv(self.det(f)).expect("invertible element");
        GammaElement {
            a: f.mul(self.d, di),
            b: f.neg(f.mul(self.b, di)),
            c: f.neg(f.mul(self.c, di)),
            d: f.mul(self.a, di),
        }
    }

    pub fn frobenius(&self, f: &Field, i: u32) -> GammaElement {
        GammaElement {
            a: f.frobenius_pow(self.a, i),
            b: f.frobenius_pow(self.b, i),
            c: f.frobenius_pow(self.c, i),
            d: f.frobenius_pow(self.d, i),
        }
    }

    pub fn from_gen(f: &Field, g: Gen) -> GammaElement {
        match g {
            Gen::Upper(x) => GammaElement::upper(x),
            Gen::Lower(x) => GammaElement::lower(x),
            Gen::Diag1(k) => GammaElement::diag(f.gpow(k as i64), Fq::ONE),
            Gen::Diag2(k) => GammaElement::diag(Fq::ONE, f.gpow(k as i64)),
        }
    }

    /// Factors into generators; the product of the returned list (left to right) is self.
    pub fn factor(&self, f: &Field) -> Vec<Gen> {
        let dl = |x: Fq| f.dlog(x).expect("nonzero");
        if self.c.is_zero() {
            // diag(a, d) u(b / a)
            vec![
                Gen::Diag1(dl(self.a)),
                Gen::Diag2(dl(self.d)),
                Gen::Upper(f.div(self.b, self.a).expect("a != 0")),
            ]
        } else {
            // u(α) l(c) u(β) diag(1, D) with α = (a-1)/c, β = (d/D - 1)/c
            let big_d = self.det(f);
            let ci = f.inv(self.c).expect("c != 0");
            let alpha = f.mul(f.sub(self.a, Fq::ONE), ci);
            let beta = f.mul(f.sub(f.div(self.d, big_d).expect("det != 0"), Fq::ONE), ci);
            vec![Gen::Upper(alpha), Gen::Lower(self.c), Gen::Upper(beta), Gen::Diag2(dl(big_d))]
        }
    }

    pub fn all(f: &Field) -> Vec<GammaElement> {
        let mut out = Vec::new();
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    for d in f.elements() {
                        let g = GammaElement { a, b, c, d };
                        if !g.det(f).is_zero() {
                            out.push(g);
                        }
                    }
                }
            }
        }
        out
    }
}

/// A character of the torus H: χ(diag(λ, μ)) = λ^c μ^d, exponents mod q-1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TorusChar {
    pub c: u32,
    pub d: u32,
}

impl fmt::Debug for TorusChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.c, self.d)
    }
}

impl TorusChar {
    pub fn new(f: &Field, c: i64, d: i64) -> TorusChar {
        let m = (f.q() - 1) as i64;
        TorusChar { c: c.rem_euclid(m) as u32, d: d.rem_euclid(m) as u32 }
    }
    pub fn trivial() -> TorusChar {
        TorusChar { c: 0, d: 0 }
    }
    /// α = λ μ^{-1}
    pub fn alpha(f: &Field) -> TorusChar {
        TorusChar::new(f, 1, -1)
    }
    pub fn s(self) -> TorusChar {
        TorusChar { c: self.d, d: self.c }
    }
    pub fn is_regular(self) -> bool {
        self.c != self.d
    }
    pub fn mul(self, f: &Field, o: TorusChar) -> TorusChar {
        TorusChar::new(f, self.c as i64 + o.c as i64, self.d as i64 + o.d as i64)
    }
    pub fn pow(self, f: &Field, e: i64) -> TorusChar {
        TorusChar::new(f, self.c as i64 * e, self.d as i64 * e)
    }
    /// Value on diag(g^i, g^j).
    pub fn eval_log(self, f: &Field, i: i64, j: i64) -> Fq {
        f.gpow(self.c as i64 * i + self.d as i64 * j)
    }
    pub fn eval(self, f: &Field, lambda: Fq, mu: Fq) -> Fq {
        let l = f.dlog(lambda).expect("nonzero") as i64;
        let m = f.dlog(mu).expect("nonzero") as i64;
        self.eval_log(f, l, m)
    }
    pub fn all(f: &Field) -> Vec<TorusChar> {
        let m = f.q() - 1;
        (0..m).flat_map(|c| (0..m).map(move |d| TorusChar { c, d })).collect()
    }
    pub fn key(self) -> String {
        format!("{},{}", self.c, self.d)
    }
}

/// A representation of Gamma given by the matrices of the generating family.
#[derive(Clone, Debug)]
pub struct GammaRep {
    pub field: Field,
    pub dim: usize,
    upper: Vec<Matrix>,
    lower: Vec<Matrix>,
    diag1: Vec<Matrix>,
    diag2: Vec<Matrix>,
}

impl GammaRep {
    /// Builds the tables from any function giving the matrix of a group element.
    pub fn from_fn(field: &Field, dim: usize, rho: impl Fn(&GammaElement) -> Matrix) -> GammaRep {
        let f = field;
        let upper = f.elements().map(|x| rho(&GammaElement::upper(x))).collect();
        let lower = f.elements().map(|x| rho(&GammaElement::lower(x))).collect();
        let m = f.q() as i64 - 1;
        let diag1 = (0..m).map(|k| rho(&GammaElement::diag(f.gpow(k), Fq::ONE))).collect();
        let diag2 = (0..m).map(|k| rho(&GammaElement::diag(Fq::ONE, f.gpow(k)))).collect();
        GammaRep { field: f.clone(), dim, upper, lower, diag1, diag2 }
    }

    pub fn trivial(f: &Field) -> GammaRep {
        GammaRep::from_fn(f, 1, |_| Matrix::identity(1))
    }

    /// The character det^e.
    pub fn det_char(f: &Field, e: i64) -> GammaRep {
        GammaRep::from_fn(f, 1, |g| Matrix::scalar(1, f.pow(g.det(f), e)))
    }

    fn map_tables(&self, dim: usize, mut h: impl FnMut(Gen, &Matrix) -> Matrix) -> GammaRep {
        let f = &self.field;
        let upper = f.elements().map(|x| h(Gen::Upper(x), &self.upper[x.0 as usize])).collect();
        let lower = f.elements().map(|x| h(Gen::Lower(x), &self.lower[x.0 as usize])).collect();
        let diag1 = self.diag1.iter().enumerate().map(|(k, m)| h(Gen::Diag1(k as u32), m)).collect();
        let diag2 = self.diag2.iter().enumerate().map(|(k, m)| h(Gen::Diag2(k as u32), m)).collect();
        GammaRep { field: f.clone(), dim, upper, lower, diag1, diag2 }
    }

    pub fn gen_matrix(&self, g: Gen) -> &Matrix {
        match g {
            Gen::Upper(x) => &self.upper[x.0 as usize],
            Gen::Lower(x) => &self.lower[x.0 as usize],
            Gen::Diag1(k) => &self.diag1[k as usize % self.diag1.len()],
            Gen::Diag2(k) => &self.diag2[k as usize % self.diag2.len()],
        }
    }

    /// g v, computed factor by factor.
    pub fn act(&self, g: &GammaElement, v: &[Fq]) -> Vector {
        let f = &self.field;
        g.factor(f)
            .into_iter()
            .rev()
            .fold(v.to_vec(), |acc, gen| self.gen_matrix(gen).apply(f, &acc))
    }

    pub fn matrix(&self, g: &GammaElement) -> Matrix {
        let f = &self.field;
        g.factor(f)
            .into_iter()
            .fold(Matrix::identity(self.dim), |acc, gen| acc.mul(f, self.gen_matrix(gen)))
    }

    /// A generating set of Gamma: u and l over an F_p-basis, and the two torus generators.
    pub fn generators(f: &Field) -> Vec<Gen> {
        let mut g: Vec<Gen> = f.prime_basis().into_iter().map(Gen::Upper).collect();
        g.extend(f.prime_basis().into_iter().map(Gen::Lower));
        if f.q() > 2 {
            g.push(Gen::Diag1(1));
            g.push(Gen::Diag2(1));
        }
        g
    }

    pub fn generator_matrices(&self) -> Vec<Matrix> {
        GammaRep::generators(&self.field).into_iter().map(|g| self.gen_matrix(g).clone()).collect()
    }

    pub fn tensor(&self, other: &GammaRep) -> GammaRep {
        let f = self.field.clone();
        self.map_tables(self.dim * other.dim, |g, m| m.kron(&f, other.gen_matrix(g)))
    }

    pub fn direct_sum(&self, other: &GammaRep) -> GammaRep {
        let (a, b) = (self.dim, other.dim);
        self.map_tables(a + b, |g, m| {
            let o = other.gen_matrix(g);
            let mut out = Matrix::zero(a + b, a + b);
            for i in 0..a {
                for j in 0..a {
                    out.set(i, j, m.get(i, j));
                }
            }
            for i in 0..b {
                for j in 0..b {
                    out.set(a + i, a + j, o.get(i, j));
                }
            }
            out
        })
    }

    /// The representation g ↦ ρ(Fr^i(g)).
    pub fn frobenius_twist(&self, i: u32) -> GammaRep {
        let f = self.field.clone();
        let pi = f.p().pow(i % f.n()) as u64;
        self.map_tables(self.dim, |g, _| match g {
            Gen::Upper(x) => self.upper[f.frobenius_pow(x, i).0 as usize].clone(),
            Gen::Lower(x) => self.lower[f.frobenius_pow(x, i).0 as usize].clone(),
            Gen::Diag1(k) => self.diag1[(k as u64 * pi % self.diag1.len() as u64) as usize].clone(),
            Gen::Diag2(k) => self.diag2[(k as u64 * pi % self.diag2.len() as u64) as usize].clone(),
        })
    }

    /// ρ ⊗ det^e.
    pub fn det_twist(&self, e: i64) -> GammaRep {
        let f = self.field.clone();
        self.map_tables(self.dim, |g, m| match g {
            Gen::Diag1(k) | Gen::Diag2(k) => m.scale(&f, f.gpow(k as i64 * e)),
            _ => m.clone(),
        })
    }

    /// Restriction to a stable subspace, in its echelon basis.
    pub fn restrict(&self, sub: &Subspace) -> Result<GammaRep> {
        self.restrict_with(sub.dim(), &sub.basis, |v| sub.coords(&self.field, v))
    }

    /// Restriction to a stable subspace with a chosen basis and coordinate map.
    pub fn restrict_with(
        &self,
        dim: usize,
        basis: &[Vector],
        coords: impl Fn(&[Fq]) -> Option<Vector>,
    ) -> Result<GammaRep> {
        let f = self.field.clone();
        let mut err = None;
        let rep = self.map_tables(dim, |_, m| {
            let cols: Vec<Vector> = basis
                .iter()
                .map(|b| {
                    coords(&m.apply(&f, b)).unwrap_or_else(|| {
                        err = Some(Error::AmbientMismatch("subspace is not stable".into()));
                        vec![Fq::ZERO; dim]
                    })
                })
                .collect();
            Matrix::from_cols(dim, &cols)
        });
        match err {
            Some(e) => Err(e),
            None => Ok(rep),
        }
    }

    /// Smallest stable subspace containing the vectors.
    pub fn span_closure(&self, vectors: &[Vector]) -> Subspace {
        let f = &self.field;
        let gens = self.generator_matrices();
        let mut sub = Subspace::zero(self.dim);
        let mut queue: Vec<Vector> = Vec::new();
        for v in vectors {
            if sub.insert(f, v) {
                queue.push(v.clone());
            }
        }
        while let Some(v) = queue.pop() {
            for m in &gens {
                let w = m.apply(f, &v);
                if sub.insert(f, &w) {
                    queue.push(w);
                }
            }
        }
        sub
    }

    /// Subrepresentation generated by the vectors, with the subspace it lives on.
    pub fn generated_subrep(&self, vectors: &[Vector]) -> (GammaRep, Subspace) {
        let sub = self.span_closure(vectors);
        let rep = self.restrict(&sub).expect("closure is stable");
        (rep, sub)
    }

    /// ρ^U as a subspace.
    pub fn u_fixed(&self) -> Subspace {
        let f = &self.field;
        let mut rows: Vec<Vector> = Vec::new();
        for x in f.prime_basis() {
            let m = &self.upper[x.0 as usize];
            rows.extend(m.sub(f, &Matrix::identity(self.dim)).row_vectors());
        }
        Subspace::span(f, self.dim, &kernel(f, &Matrix::from_rows(&rows)))
    }

    pub fn is_u_invariant(&self, v: &[Fq]) -> bool {
        let f = &self.field;
        f.prime_basis().into_iter().all(|x| self.upper[x.0 as usize].apply(f, v) == v)
    }

    /// Decomposes ρ^U into H-eigenspaces.
    pub fn u_invariants(&self) -> Vec<(TorusChar, Vec<Vector>)> {
        let f = &self.field;
        let inv = self.u_fixed();
        if inv.dim() == 0 {
            return Vec::new();
        }
        let restrict = |m: &Matrix| {
            let cols: Vec<Vector> =
                inv.basis.iter().map(|b| inv.coords(f, &m.apply(f, b)).expect("H preserves ρ^U")).collect();
            Matrix::from_cols(inv.dim(), &cols)
        };
        let k = inv.dim();
        let d1 = restrict(&self.diag1[1 % self.diag1.len()]);
        let d2 = restrict(&self.diag2[1 % self.diag2.len()]);
        let mut out = Vec::new();
        let m = f.q() - 1;
        for c in 0..m {
            let a = d1.sub(f, &Matrix::scalar(k, f.gpow(c as i64)));
            for d in 0..m {
                let b = d2.sub(f, &Matrix::scalar(k, f.gpow(d as i64)));
                let mut rows = a.row_vectors();
                rows.extend(b.row_vectors());
                let ker = kernel(f, &Matrix::from_rows(&rows));
                if ker.is_empty() {
                    continue;
                }
                let vecs: Vec<Vector> = ker
                    .iter()
                    .map(|coef| {
                        let mut v = vec![Fq::ZERO; self.dim];
                        for (c, b) in coef.iter().zip(&inv.basis) {
                            v = linalg::vec_add(f, &v, &linalg::vec_scale(f, b, *c));
                        }
                        v
                    })
                    .collect();
                out.push((TorusChar { c, d }, vecs));
            }
        }
        out
    }

    /// v T_{n_s} = Σ_{u ∈ U} u n_s^{-1} v.
    pub fn hecke_tns(&self, v: &[Fq]) -> Result<Vector> {
        if !self.is_u_invariant(v) {
            return Err(Error::NotUInvariant);
        }
        Ok(self.tns_unchecked(v))
    }

    pub(crate) fn tns_unchecked(&self, v: &[Fq]) -> Vector {
        let f = &self.field;
        let w = self.act(&GammaElement::n_s(f).inv(f), v);
        let mut out = vec![Fq::ZERO; self.dim];
        for x in f.elements() {
            out = linalg::vec_add(f, &out, &self.upper[x.0 as usize].apply(f, &w));
        }
        out
    }

    /// v T_h = h^{-1} v for h = diag(g^i, g^j).
    pub fn hecke_th(&self, i: i64, j: i64, v: &[Fq]) -> Vector {
        let f = &self.field;
        let m = self.diag1.len() as i64;
        let w = self.diag2[(-j).rem_euclid(m) as usize].apply(f, v);
        self.diag1[(-i).rem_euclid(m) as usize].apply(f, &w)
    }

    /// v e_χ = |H|^{-1} Σ_h χ(h) h^{-1} v; |H| = (q-1)^2 ≡ 1 mod p.
    pub fn e_chi_project(&self, v: &[Fq], chi: TorusChar) -> Result<Vector> {
        if !self.is_u_invariant(v) {
            return Err(Error::NotUInvariant);
        }
        Ok(self.e_chi_unchecked(v, chi))
    }

    pub(crate) fn e_chi_unchecked(&self, v: &[Fq], chi: TorusChar) -> Vector {
        let f = &self.field;
        let m = f.q() as i64 - 1;
        let mut out = vec![Fq::ZERO; self.dim];
        for i in 0..m {
            for j in 0..m {
                let w = self.hecke_th(i, j, v);
                out = linalg::vec_add(f, &out, &linalg::vec_scale(f, &w, chi.eval_log(f, i, j)));
            }
        }
        out
    }

    pub fn is_irreducible(&self) -> Result<bool> {
        if self.dim == 0 {
            return Err(Error::ZeroRep);
        }
        let f = &self.field;
        let inv = self.u_fixed();
        for coef in projective_points(f, inv.dim()) {
            let mut v = vec![Fq::ZERO; self.dim];
            for (c, b) in coef.iter().zip(&inv.basis) {
                v = linalg::vec_add(f, &v, &linalg::vec_scale(f, b, *c));
            }
            if self.span_closure(&[v]).dim() != self.dim {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn hom_dim(&self, other: &GammaRep) -> usize {
        linalg::hom_space(&self.field, &self.generator_matrices(), &other.generator_matrices())
            .map(|h| h.len())
            .unwrap_or(0)
    }

    /// An isomorphism self → other, if one exists.
    pub fn isomorphism(&self, other: &GammaRep) -> Option<Matrix> {
        if self.dim != other.dim {
            return None;
        }
        linalg::is_isomorphic(&self.field, &self.generator_matrices(), &other.generator_matrices())
            .ok()
            .flatten()
    }
}

/// C(n, k) mod p by Lucas' theorem.
pub fn binom_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut out = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let mut c = 1u64;
        for i in 0..b {
            c = c * (a - i) / (i + 1);
        }
        out = out * (c % p) % p;
        n /= p;
        k /= p;
    }
    out
}

/// Sym^d of the standard representation on m_i = C(d,i) X^{d-i} Y^i.
pub fn symmetric_power_rep(f: &Field, d: u32) -> GammaRep {
    let p = f.p() as u64;
    let dd = d as usize;
    let bin = |n: usize, k: usize| f.from_int(binom_mod_p(n as u64, k as u64, p) as i64);
    let upper = f
        .elements()
        .map(|x| {
            let mut m = Matrix::zero(dd + 1, dd + 1);
            for i in 0..=dd {
                for k in 0..=i {
                    m.set(k, i, f.mul(bin(dd - k, dd - i), f.pow(x, (i - k) as i64)));
                }
            }
            m
        })
        .collect();
    let lower = f
        .elements()
        .map(|x| {
            let mut m = Matrix::zero(dd + 1, dd + 1);
            for i in 0..=dd {
                for k in i..=dd {
                    m.set(k, i, f.mul(bin(k, i), f.pow(x, (k - i) as i64)));
                }
            }
            m
        })
        .collect();
    let mq = f.q() as i64 - 1;
    let diag = |first: bool| -> Vec<Matrix> {
        (0..mq)
            .map(|k| {
                let mut m = Matrix::zero(dd + 1, dd + 1);
                for i in 0..=dd {
                    let e = if first { (dd - i) as i64 } else { i as i64 };
                    m.set(i, i, f.gpow(k * e));
                }
                m
            })
            .collect()
    };
    GammaRep { field: f.clone(), dim: dd + 1, upper, lower, diag1: diag(true), diag2: diag(false) }
}

/// ⊗_i V_{r_i}^{Fr^i} ⊗ det^a. Tensor index: component 0 is most significant.
pub fn build_v_tuple(f: &Field, r: &[u32], a: i64) -> Result<GammaRep> {
    if r.len() != f.n() as usize || r.iter().any(|&x| x >= f.p()) {
        return Err(Error::InvalidLabel(format!("digit tuple {r:?}")));
    }
    let mut rep = GammaRep::trivial(f);
    for (i, &ri) in r.iter().enumerate() {
        rep = rep.tensor(&symmetric_power_rep(f, ri).frobenius_twist(i as u32));
    }
    Ok(rep.det_twist(a))
}

/// Ind_B^Γ χ, functions with f(bx) = χ(b) f(x), left action (γ f)(x) = f(x γ).
///
/// Basis: delta functions at the coset representatives 1 and n_s u(y), y ∈ F_q.
#[derive(Clone, Debug)]
pub struct InducedB {
    pub chi: TorusChar,
    pub rep: GammaRep,
    pub reps: Vec<GammaElement>,
}

impl InducedB {
    pub fn new(f: &Field, chi: TorusChar) -> InducedB {
        let mut reps = vec![GammaElement::identity()];
        for y in f.elements() {
            reps.push(GammaElement::n_s(f).mul(f, &GammaElement::upper(y)));
        }
        let n = reps.len();
        let coset = |x: &GammaElement| -> usize {
            if x.c.is_zero() {
                0
            } else {
                1 + f.div(x.d, x.c).expect("c != 0").0 as usize
            }
        };
        let reps2 = reps.clone();
        let rep = GammaRep::from_fn(f, n, move |g| {
            let mut m = Matrix::zero(n, n);
            for (k, xk) in reps2.iter().enumerate() {
                let y = xk.mul(f, g);
                let j = coset(&y);
                let b = y.mul(f, &reps2[j].inv(f));
                m.set(k, j, chi.eval(f, b.a, b.d));
            }
            m
        });
        InducedB { chi, rep, reps }
    }

    /// φ_χ: supported on B with value χ(b) at b.
    pub fn phi(&self) -> Vector {
        linalg::unit_vector(self.rep.dim, 0)
    }
}

/// Ind_U^Γ 1 as a permutation representation on U\Γ.
#[derive(Clone, Debug)]
pub struct InducedU {
    pub rep: GammaRep,
    pub reps: Vec<GammaElement>,
}

impl InducedU {
    pub fn new(f: &Field) -> InducedU {
        let mut reps = Vec::new();
        for c in f.elements() {
            for d in f.elements() {
                if c.is_zero() && d.is_zero() {
                    continue;
                }
                for det in f.units() {
                    let g = if c.is_zero() {
                        GammaElement { a: f.div(det, d).unwrap(), b: Fq::ZERO, c, d }
                    } else {
                        GammaElement { a: Fq::ZERO, b: f.neg(f.div(det, c).unwrap()), c, d }
                    };
                    reps.push(g);
                }
            }
        }
        let n = reps.len();
        let reps2 = reps.clone();
        let field = f.clone();
        let rep = GammaRep::from_fn(f, n, move |g| {
            let mut m = Matrix::zero(n, n);
            for (k, xk) in reps2.iter().enumerate() {
                let j = Self::index_of(&field, &xk.mul(&field, g));
                m.set(k, j, Fq::ONE);
            }
            m
        });
        InducedU { rep, reps }
    }

    /// Index of the coset U x, read off the bottom row and the determinant.
    pub fn index_of(f: &Field, x: &GammaElement) -> usize {
        let q = f.q() as usize;
        let row = x.c.0 as usize * q + x.d.0 as usize - 1;
        row * (q - 1) + (x.det(f).0 as usize - 1)
    }

    /// φ = indicator of U.
    pub fn phi(&self, f: &Field) -> Vector {
        linalg::unit_vector(self.rep.dim, Self::index_of(f, &GammaElement::identity()))
    }

    /// Left translation (T_h f)(x) = f(h^{-1} x) by h ∈ H, the endomorphism behind e_χ.
    pub fn left_translate(&self, f: &Field, h: &GammaElement, v: &[Fq]) -> Vector {
        let mut out = vec![Fq::ZERO; v.len()];
        for (k, xk) in self.reps.iter().enumerate() {
            // (T_h f)(x_k) = f(h^{-1} x_k)
            out[k] = v[Self::index_of(f, &h.inv(f).mul(f, xk))];
        }
        out
    }

    /// The idempotent e_χ = Σ_h χ(h) T_h applied to v.
    pub fn e_chi(&self, f: &Field, chi: TorusChar, v: &[Fq]) -> Vector {
        let m = f.q() as i64 - 1;
        let mut out = vec![Fq::ZERO; v.len()];
        for i in 0..m {
            for j in 0..m {
                let h = GammaElement::diag(f.gpow(i), f.gpow(j));
                let w = self.left_translate(f, &h, v);
                out = linalg::vec_add(f, &out, &linalg::vec_scale(f, &w, chi.eval_log(f, i, j)));
            }
        }
        out
    }
}

/// An irreducible together with its distinguished U-invariant generator.
#[derive(Clone, Debug)]
pub struct Irrep {
    pub chi: TorusChar,
    pub j_is_s: bool,
    pub rep: GammaRep,
    pub generator: Vector,
}

/// ρ_{χ,∅} = ⟨Γ φ_{χ^s} T_{n_s}⟩ ⊂ Ind_B χ^s; ρ_{χ,S} = ⟨Γ (1 + T_{n_s}) φ_χ⟩ ⊂ Ind_B χ.
pub fn carter_lusztig_irrep(f: &Field, chi: TorusChar, j_is_s: bool) -> Result<Irrep> {
    if j_is_s && chi.is_regular() {
        return Err(Error::InvalidJ);
    }
    let (ind, v) = if j_is_s {
        let ind = InducedB::new(f, chi);
        let phi = ind.phi();
        let v = linalg::vec_add(f, &phi, &ind.rep.tns_unchecked(&phi));
        (ind, v)
    } else {
        let ind = InducedB::new(f, chi.s());
        let phi = ind.phi();
        let v = ind.rep.tns_unchecked(&phi);
        (ind, v)
    };
    let (rep, sub) = ind.rep.generated_subrep(std::slice::from_ref(&v));
    let generator = sub.coords(f, &v).expect("generator lies in its span");
    Ok(Irrep { chi, j_is_s, rep, generator })
}

/// Either labeling of an irreducible of Gamma.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IrrepLabel {
    /// (χ, J) with J = S encoded as `j_is_s`.
    CarterLusztig { chi: TorusChar, j_is_s: bool },
    /// (a, r⃗) with 1 <= a <= q-1 and digits 0 <= r_i <= p-1.
    BrauerNesbitt { a: u32, r: Vec<u32> },
}

impl IrrepLabel {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            IrrepLabel::CarterLusztig { chi, j_is_s } => serde_json::json!({
                "chi": [chi.c, chi.d],
                "J": if *j_is_s { "S" } else { "empty" },
            }),
            IrrepLabel::BrauerNesbitt { a, r } => serde_json::json!({ "a": a, "r": r }),
        }
    }
}

pub fn digits(f: &Field, mut r: u32) -> Vec<u32> {
    (0..f.n())
        .map(|_| {
            let x = r % f.p();
            r /= f.p();
            x
        })
        .collect()
}

pub fn undigits(f: &Field, r: &[u32]) -> u32 {
    r.iter().rev().fold(0, |acc, &x| acc * f.p() + x)
}

fn norm_1_to_qm1(f: &Field, x: i64) -> u32 {
    let m = f.q() as i64 - 1;
    let r = x.rem_euclid(m);
    if r == 0 {
        m as u32
    } else {
        r as u32
    }
}

/// Converts a label to the other form.
pub fn dictionary(f: &Field, label: &IrrepLabel) -> Result<IrrepLabel> {
    let q = f.q();
    match label {
        IrrepLabel::CarterLusztig { chi, j_is_s } => {
            let m = q - 1;
            if chi.c >= m.max(1) || chi.d >= m.max(1) {
                return Err(Error::InvalidLabel(format!("character {chi:?}")));
            }
            if *j_is_s && chi.is_regular() {
                return Err(Error::InvalidLabel("J = S needs chi = chi^s".into()));
            }
            let a = norm_1_to_qm1(f, chi.d as i64);
            let r = norm_1_to_qm1(f, chi.c as i64 - chi.d as i64);
            let r = if *j_is_s { vec![0; f.n() as usize] } else { digits(f, r) };
            Ok(IrrepLabel::BrauerNesbitt { a, r })
        }
        IrrepLabel::BrauerNesbitt { a, r } => {
            if *a == 0 || *a > q - 1 || r.len() != f.n() as usize || r.iter().any(|&x| x >= f.p()) {
                return Err(Error::InvalidLabel(format!("(a, r) = ({a}, {r:?})")));
            }
            let rr = undigits(f, r);
            let a = *a as i64;
            let label = if rr == 0 {
                IrrepLabel::CarterLusztig { chi: TorusChar::new(f, a, a), j_is_s: true }
            } else {
                IrrepLabel::CarterLusztig { chi: TorusChar::new(f, a + rr as i64, a), j_is_s: false }
            };
            Ok(label)
        }
    }
}

/// (χ, J) ↦ (χ^s, J̄) with J̄ = J_0(χ) \ J, returned in the same form as the input.
pub fn bar_label(f: &Field, label: &IrrepLabel) -> Result<IrrepLabel> {
    match label {
        IrrepLabel::CarterLusztig { chi, j_is_s } => {
            dictionary(f, label)?;
            let j = if chi.is_regular() { false } else { !j_is_s };
            Ok(IrrepLabel::CarterLusztig { chi: chi.s(), j_is_s: j })
        }
        IrrepLabel::BrauerNesbitt { a, r } => {
            dictionary(f, label)?;
            let rr = undigits(f, r) as i64;
            let rbar: Vec<u32> = r.iter().map(|&x| f.p() - 1 - x).collect();
            Ok(IrrepLabel::BrauerNesbitt { a: norm_1_to_qm1(f, *a as i64 + rr), r: rbar })
        }
    }
}

/// All q(q-1) Carter-Lusztig labels in a fixed order.
pub fn all_cl_labels(f: &Field) -> Vec<IrrepLabel> {
    let mut out = Vec::new();
    for chi in TorusChar::all(f) {
        out.push(IrrepLabel::CarterLusztig { chi, j_is_s: false });
        if !chi.is_regular() {
            out.push(IrrepLabel::CarterLusztig { chi, j_is_s: true });
        }
    }
    out
}
